#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "msgate/errors.hpp"
#include "msgate/io.hpp"
#include "oracles.hpp"

using namespace msgate;
using nlohmann::json;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("msgate_io_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const char* name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("mode spec round trip preserves values and units") {
    TempDir dir;
    const ModeSpec spec = two_ion_modes(two_pi * 2.0e6, two_pi * 1.99e6, 0.1);
    save_mode_spec(spec, dir.file("modes.json"));
    const ModeSpec back = load_mode_spec(dir.file("modes.json"));
    CHECK(back.num_ions == spec.num_ions);
    for (int k = 0; k < 2; ++k) {
        CHECK(back.mode_freqs[k] == doctest::Approx(spec.mode_freqs[k]).epsilon(1e-14));
        CHECK(back.lamb_dicke[k] == spec.lamb_dicke[k]);
        CHECK(back.drift_ratios[k] == spec.drift_ratios[k]);
    }
    CHECK((back.coupling - spec.coupling).cwiseAbs().maxCoeff() < 1e-15);

    // File stores cyclic Hz.
    const json j = load_json_file(dir.file("modes.json"));
    CHECK(j["mode_freqs_hz"][0].get<double>() == doctest::Approx(2.0e6).epsilon(1e-12));
}

TEST_CASE("mode spec defaults and validation on load") {
    json j = mode_spec_to_json(two_ion_modes(two_pi * 2.0e6, two_pi * 1.95e6, 0.1));
    j.erase("drift_ratios");
    const ModeSpec spec = mode_spec_from_json(j);
    CHECK(spec.drift_ratios == std::vector<double>{1.0, 1.0});

    json bad = j;
    bad["coupling"][0][0] = 0.9;  // breaks orthonormality
    CHECK_THROWS_WITH_AS(mode_spec_from_json(bad), doctest::Contains("orthonormal"),
                         ValidationError);

    json missing = j;
    missing.erase("lamb_dicke");
    CHECK_THROWS_WITH_AS(mode_spec_from_json(missing), doctest::Contains("lamb_dicke"),
                         ValidationError);
}

TEST_CASE("pulse round trip with scale and meta header") {
    TempDir dir;
    const PulseProgram pulse({Segment{10e-6, two_pi * 1.98e6, two_pi * 50e3},
                              Segment{12e-6, two_pi * 2.01e6, two_pi * 40e3}},
                             1.25);
    FileMeta meta{version(), "deadbeef00000000"};
    save_pulse(pulse, dir.file("pulse.json"), meta);
    const PulseProgram back = load_pulse(dir.file("pulse.json"));
    CHECK(back.scale() == doctest::Approx(1.25).epsilon(1e-15));
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.segments()[i].duration ==
              doctest::Approx(pulse.segments()[i].duration).epsilon(1e-15));
        CHECK(back.segments()[i].detuning ==
              doctest::Approx(pulse.segments()[i].detuning).epsilon(1e-14));
        CHECK(back.segments()[i].amplitude ==
              doctest::Approx(pulse.segments()[i].amplitude).epsilon(1e-14));
    }
    const json j = load_json_file(dir.file("pulse.json"));
    CHECK(j["meta"]["config_hash"] == "deadbeef00000000");
    CHECK(j["segments"][0]["detuning_hz"].get<double>() ==
          doctest::Approx(1.98e6).epsilon(1e-12));

    json empty;
    empty["segments"] = json::array();
    CHECK_THROWS_AS(pulse_from_json(empty), ValidationError);
    CHECK_THROWS_AS(load_pulse(dir.file("nope.json")), ValidationError);
}

TEST_CASE("noise model json: defaults, scalar nbar, infinities") {
    const json j = {{"heating_rates_qps", {10.0, 1.0}},
                    {"motional_T2_s", 3e-3},
                    {"carrier_T2_s", 0.33},
                    {"initial_nbar", 0.05}};
    const NoiseModel noise = noise_model_from_json(j, 2);
    CHECK(noise.heating_rates == std::vector<double>{10.0, 1.0});
    CHECK(noise.motional_T2 == doctest::Approx(3e-3));
    CHECK(noise.initial_nbar == std::vector<double>{0.05, 0.05});
    CHECK_FALSE(noise.is_noiseless());

    const NoiseModel bare = noise_model_from_json(json::object(), 2);
    CHECK(bare.is_noiseless());
    CHECK(std::isinf(bare.motional_T2));

    json bad = j;
    bad["heating_rates_qps"] = {10.0};
    CHECK_THROWS_AS(noise_model_from_json(bad, 2), ValidationError);
    bad = j;
    bad["motional_T2_s"] = 0.0;
    CHECK_THROWS_AS(noise_model_from_json(bad, 2), ValidationError);
}

TEST_CASE("spectrum json parsing") {
    const NoiseSpectrum white = spectrum_from_json({{"kind", "white"}, {"amplitude", 2.5}});
    CHECK(white.sample(123.0) == 2.5);
    const NoiseSpectrum ff = spectrum_from_json(
        {{"kind", "one_over_f"}, {"amplitude", 1.0}, {"exponent", 1.0}, {"corner_hz", 1.0}});
    CHECK(ff.sample(10.0) == doctest::Approx(0.1));
    CHECK_THROWS_AS(spectrum_from_json({{"kind", "fuchsia"}}), ValidationError);
    CHECK_THROWS_AS(spectrum_from_json({{"kind", "tabulated"}, {"freqs_hz", {1.0}}}),
                    ValidationError);
}

TEST_CASE("optimizer config json with Hz conversion") {
    const json j = {{"num_segments", 14},
                    {"gate_time_s", 1e-4},
                    {"target_angle_rad", pi / 8},
                    {"max_amplitude_hz", 150e3},
                    {"detuning_bounds_hz", {1.87e6, 2.08e6}},
                    {"seed", 7},
                    {"ff_suppression", {{"freq_hz", 5e3}, {"weight", 12.0}}}};
    const OptimizerConfig cfg = optimizer_config_from_json(j);
    CHECK(cfg.max_amplitude == doctest::Approx(two_pi * 150e3));
    CHECK(cfg.detuning_lo == doctest::Approx(two_pi * 1.87e6));
    CHECK(cfg.seed == 7);
    REQUIRE(cfg.ff_suppression.has_value());
    CHECK(cfg.ff_suppression->freq_hz == 5e3);
    CHECK(cfg.ff_suppression->weight == 12.0);

    json bad = j;
    bad["detuning_bounds_hz"] = {2.08e6};
    CHECK_THROWS_AS(optimizer_config_from_json(bad), ValidationError);
    bad = j;
    bad.erase("gate_time_s");
    CHECK_THROWS_WITH_AS(optimizer_config_from_json(bad), doctest::Contains("gate_time_s"),
                         ValidationError);
}

TEST_CASE("scan csv: exact column order and deterministic body") {
    ScanResult scan;
    scan.repeats = 5;
    scan.points.push_back(
        {two_pi * -500.0, 0.51, 0.47, 0.02, 0.93, 0.955, 1.2e-5, 3.4e-6});
    scan.points.push_back({0.0, 0.5, 0.5, 0.0, 1.0, 1.0, 0.0, 0.0});
    std::ostringstream a, b;
    write_scan_csv(a, scan, FileMeta{version(), "cafe"});
    write_scan_csv(b, scan, FileMeta{version(), "cafe"});
    CHECK(a.str() == b.str());
    CHECK(a.str().find("offset_hz,p00,p11,p01_10,contrast,fidelity,err_alpha,err_theta\n") !=
          std::string::npos);
    CHECK(a.str().find("# config cafe") != std::string::npos);
    CHECK(a.str().find("-500,0.51,0.47,0.02,0.93,0.955,1.2e-05,3.4e-06") != std::string::npos);
}

TEST_CASE("ff csv format") {
    FilterFunctionCurve curve;
    curve.freqs_hz = {10.0, 100.0};
    curve.f_alpha = {1e-3, 2e-4};
    curve.f_theta = {5e-6, 6e-7};
    std::ostringstream os;
    write_ff_csv(os, curve);
    CHECK(os.str() == "freq_hz,f_alpha,f_theta\n10,0.001,5e-06\n100,0.0002,6e-07\n");
}

TEST_CASE("diagnostics serialization: complex as [re, im]") {
    const ModeSpec modes = oracles::two_ion_spec();
    std::mt19937_64 rng(81);
    const PulseProgram p = oracles::random_pulse(rng, modes);
    const GateDiagnostics d = diagnostics(p, modes, {0, 1}, 2);
    const json j = diagnostics_to_json(d);
    CHECK(j["alpha"][0][0].size() == 2);
    CHECK(j["alpha"][0][0][0].get<double>() == doctest::Approx(d.alpha(0, 0).real()));
    CHECK(j["alpha"][0][0][1].get<double>() == doctest::Approx(d.alpha(0, 0).imag()));
    CHECK(j["higher_dtheta"].size() == 1);
    CHECK(j["theta"].get<double>() == d.theta);

    std::ostringstream os;
    write_diagnostics_csv(os, d);
    CHECK(os.str().find("quantity,ion,mode,re,im\n") != std::string::npos);
    CHECK(os.str().find("dtheta_weighted_order2") != std::string::npos);
}

TEST_CASE("config hash is stable and order-insensitive") {
    const json a = {{"x", 1}, {"y", 2.5}};
    const json b = {{"y", 2.5}, {"x", 1}};
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(config_hash(a) != config_hash(json{{"x", 2}, {"y", 2.5}}));
}
