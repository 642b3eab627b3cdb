#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "msgate/errors.hpp"
#include "msgate/robust_optimizer.hpp"
#include "msgate/scan_sim.hpp"
#include "oracles.hpp"

using namespace msgate;

namespace {

PulseProgram robust_pi4(const ModeSpec& modes, std::uint64_t seed = 1) {
    OptimizerConfig cfg;
    cfg.num_segments = 14;
    cfg.gate_time = 100e-6;
    cfg.target_angle = pi / 4;
    cfg.max_amplitude = two_pi * 150e3;
    cfg.detuning_lo = two_pi * 1.87e6;
    cfg.detuning_hi = two_pi * 2.08e6;
    cfg.seed = seed;
    cfg.max_iters = 600;
    cfg.tolerance = 1e-10;
    return optimize_fm(cfg, modes, {0, 1}).pulse;
}

}  // namespace

TEST_CASE("perfect gate on |00>: equal even-parity populations, unit fidelity") {
    const Eigen::MatrixXcd alpha = Eigen::MatrixXcd::Zero(2, 2);
    const BellOutputs out = bell_outputs_from_parameters(alpha, pi / 4, {0.0, 0.0});
    CHECK(out.p00 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(out.p11 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(out.p01_10 == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(out.contrast == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(out.fidelity == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("pure overrotation: fidelity deficit is quadratic in the angle miss") {
    const Eigen::MatrixXcd alpha = Eigen::MatrixXcd::Zero(2, 2);
    for (double d : {1e-3, 5e-3, 2e-2}) {
        const BellOutputs out = bell_outputs_from_parameters(alpha, pi / 4 + d, {0.0, 0.0});
        CHECK(out.fidelity < 1.0);
        CHECK(1.0 - out.fidelity == doctest::Approx(d * d).epsilon(1e-3));
        // Exact form: F = (1 + cos(2d))/2.
        CHECK(out.fidelity == doctest::Approx(0.5 * (1.0 + std::cos(2 * d))).epsilon(1e-12));
    }
}

TEST_CASE("gate-error decomposition: 1 - F tracks (1+2nbar) E_alpha + E_theta") {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double nbar : {0.0, 0.1}) {
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::MatrixXcd alpha(2, 2);
            double err_alpha = 0.0;
            for (int r = 0; r < 2; ++r)
                for (int k = 0; k < 2; ++k) {
                    alpha(r, k) = 0.02 * cplx(gauss(rng), gauss(rng));
                    err_alpha += std::norm(alpha(r, k));
                }
            const double d = 0.02 * gauss(rng);
            const BellOutputs out =
                bell_outputs_from_parameters(alpha, pi / 4 + d, {nbar, nbar});
            const double predicted = (1.0 + 2.0 * nbar) * err_alpha + d * d;
            if (predicted < 1e-2)
                CHECK(1.0 - out.fidelity ==
                      doctest::Approx(predicted).epsilon(0.2));
        }
    }
}

TEST_CASE("ideal populations vs zero-noise master equation on random pulses") {
    const ModeSpec modes = oracles::two_ion_spec();
    std::mt19937_64 rng(72);
    oracles::RandomPulseParams params;
    params.max_segments = 10;
    params.min_amplitude = two_pi * 5e3;
    params.max_amplitude = two_pi * 15e3;
    params.mode_guard = two_pi * 8e3;
    params.max_duration = 20e-6;
    LindbladOptions opt;
    opt.n_max = {15, 15};
    NoiseModel quiet;
    for (int trial = 0; trial < 8; ++trial) {
        const PulseProgram p = oracles::random_pulse(rng, modes, params);
        const BellOutputs ideal = ideal_populations(p, modes, {0, 1});
        const LindbladResult lind = lindblad_sim(p, modes, {0, 1}, quiet, opt);
        CHECK(std::abs(ideal.p00 - lind.outputs.p00) < 1e-4);
        CHECK(std::abs(ideal.p11 - lind.outputs.p11) < 1e-4);
        CHECK(std::abs(ideal.p01_10 - lind.outputs.p01_10) < 1e-4);
        CHECK(std::abs(ideal.contrast - lind.outputs.contrast) < 1e-4);
        CHECK(std::abs(ideal.fidelity - lind.outputs.fidelity) < 1e-4);
        CHECK(lind.trace_error < 1e-8);

        // Populations sum to one; spin state Hermitian and positive.
        CHECK(ideal.p00 + ideal.p11 + ideal.p01_10 == doctest::Approx(1.0).epsilon(1e-9));
        CHECK((ideal.rho - ideal.rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> eig(ideal.rho);
        CHECK(eig.eigenvalues().minCoeff() > -1e-9);
    }
}

TEST_CASE("free heating grows the mode occupation linearly") {
    const ModeSpec modes = oracles::two_ion_spec();
    const PulseProgram off({Segment{100e-6, modes.mode_freqs[0], 0.0}});
    NoiseModel noise;
    noise.heating_rates = {1000.0, 0.0};
    LindbladOptions opt;
    opt.n_max = {6, 3};
    const LindbladResult res = lindblad_sim(off, modes, {0, 1}, noise, opt);
    CHECK(res.final_nbar[0] == doctest::Approx(1000.0 * 100e-6).epsilon(1e-3));
    CHECK(res.final_nbar[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(res.trace_error < 1e-8);
    // Spins untouched by pure heating.
    CHECK(res.outputs.p00 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("motional dephasing degrades the gate, carrier dephasing the contrast") {
    const ModeSpec modes = oracles::two_ion_spec();
    const PulseProgram gate = robust_pi4(modes);
    LindbladOptions opt;
    opt.n_max = {7, 7};
    opt.rel_tol = 1e-8;

    NoiseModel quiet;
    const double f_clean = lindblad_sim(gate, modes, {0, 1}, quiet, opt).outputs.fidelity;

    NoiseModel motional;
    motional.motional_T2 = 300e-6;
    const auto res_m = lindblad_sim(gate, modes, {0, 1}, motional, opt);
    CHECK(res_m.outputs.fidelity < f_clean - 1e-3);
    CHECK(res_m.trace_error < 1e-8);

    NoiseModel carrier;
    carrier.carrier_T2 = 2e-3;
    const auto res_c = lindblad_sim(gate, modes, {0, 1}, carrier, opt);
    CHECK(res_c.outputs.contrast < 1.0 - 1e-3);
    CHECK(res_c.trace_error < 1e-8);
}

TEST_CASE("thermal initial state matches the analytic thermal average") {
    const ModeSpec modes = oracles::two_ion_spec();
    const PulseProgram gate = robust_pi4(modes);
    NoiseModel warm;
    warm.initial_nbar = {0.15, 0.1};
    LindbladOptions opt;
    opt.n_max = {9, 9};
    const LindbladResult lind = lindblad_sim(gate, modes, {0, 1}, warm, opt);
    const BellOutputs ideal = ideal_populations(gate, modes, {0, 1}, warm.initial_nbar);
    // Truncated thermal tail limits the agreement, not the integrator.
    CHECK(std::abs(ideal.fidelity - lind.outputs.fidelity) < 1e-4);
    CHECK(std::abs(ideal.p00 - lind.outputs.p00) < 1e-4);
}

TEST_CASE("truncation overflow raises a numeric error naming the mode") {
    const ModeSpec modes = oracles::two_ion_spec();
    // Resonant drive piles population on the COM mode.
    const PulseProgram res({Segment{60e-6, modes.mode_freqs[0], two_pi * 40e3}});
    NoiseModel quiet;
    LindbladOptions opt;
    opt.n_max = {2, 2};
    CHECK_THROWS_WITH_AS(lindblad_sim(res, modes, {0, 1}, quiet, opt),
                         doctest::Contains("truncation"), NumericError);
    opt.n_max = {1, 1};
    CHECK_THROWS_AS(lindblad_sim(res, modes, {0, 1}, quiet, opt), ValidationError);
}

TEST_CASE("detuning scan: zero offset reproduces the ideal gate") {
    const ModeSpec modes = oracles::two_ion_spec();
    const PulseProgram gate = robust_pi4(modes);
    const ScanResult scan = detuning_scan(gate, modes, {0, 1}, {0.0}, 1);
    REQUIRE(scan.points.size() == 1);
    CHECK(scan.points[0].fidelity == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(scan.points[0].p01_10 < 1e-8);
    CHECK(scan.points[0].err_alpha < 1e-8);
    CHECK(scan.points[0].err_theta < 1e-12);
}

TEST_CASE("repeated-gate sequences compose against the numeric propagator") {
    const ModeSpec modes = oracles::two_ion_spec();
    const PulseProgram gate = robust_pi4(modes);
    const double eps = two_pi * 400.0;
    const ScanResult scan = detuning_scan(gate, modes, {0, 1}, {eps}, 3);

    const PulseProgram seq = repeat_pulse(apply_offset(gate, {eps}), 3);
    NoiseModel quiet;
    LindbladOptions opt;
    opt.n_max = {10, 10};
    const LindbladResult lind = lindblad_sim(seq, modes, {0, 1}, quiet, opt);
    CHECK(std::abs(scan.points[0].p00 - lind.outputs.p00) < 1e-4);
    CHECK(std::abs(scan.points[0].p11 - lind.outputs.p11) < 1e-4);
    CHECK(std::abs(scan.points[0].fidelity - lind.outputs.fidelity) < 1e-4);
}

TEST_CASE("noisy scan path produces physical rows") {
    const ModeSpec modes = oracles::two_ion_spec();
    const PulseProgram gate = robust_pi4(modes);
    NoiseModel noise;
    noise.heating_rates = {10.0, 1.0};
    noise.motional_T2 = 3e-3;
    LindbladOptions opt;
    opt.n_max = {6, 6};
    opt.rel_tol = 1e-7;
    const std::vector<double> offsets = {-two_pi * 500.0, 0.0};
    const ScanResult scan = detuning_scan(gate, modes, {0, 1}, offsets, 1, noise, opt);
    REQUIRE(scan.points.size() == 2);
    for (const auto& pt : scan.points) {
        CHECK(pt.fidelity < 1.0);
        CHECK(pt.fidelity > 0.9);
        CHECK(pt.p00 + pt.p11 + pt.p01_10 == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK_THROWS_AS(detuning_scan(gate, modes, {0, 1}, {0.0}, 0), ValidationError);
}

TEST_CASE("repeated_gate_fit: exact slopes and degenerate input") {
    // error = 0.002 N exactly.
    const std::vector<double> counts = {1, 5, 9, 13};
    std::vector<double> fids;
    for (double n : counts) fids.push_back(1.0 - 0.002 * n);
    const GateErrorFit fit = repeated_gate_fit(counts, fids);
    CHECK(fit.error_per_gate == doctest::Approx(0.002).epsilon(1e-12));
    CHECK(fit.std_error == doctest::Approx(0.0));

    const GateErrorFit flat = repeated_gate_fit(counts, {0.97, 0.97, 0.97, 0.97});
    CHECK(flat.error_per_gate == doctest::Approx(0.0));

    CHECK_THROWS_AS(repeated_gate_fit({5, 5}, {0.9, 0.9}), ValidationError);
    CHECK_THROWS_AS(repeated_gate_fit({5}, {0.9}), ValidationError);
}

TEST_CASE("master-equation sequence error is linear in the gate count") {
    const ModeSpec modes = oracles::two_ion_spec();
    const PulseProgram gate = robust_pi4(modes);
    NoiseModel noise;
    noise.heating_rates = {10.0, 1.0};
    noise.motional_T2 = 3e-3;
    noise.carrier_T2 = 0.33;
    LindbladOptions opt;
    opt.n_max = {6, 6};
    opt.rel_tol = 1e-7;
    std::vector<double> counts = {1, 3};
    std::vector<double> fids;
    for (double n : counts) {
        const PulseProgram seq =
            n == 1 ? gate : repeat_pulse(gate, static_cast<int>(n));
        fids.push_back(lindblad_sim(seq, modes, {0, 1}, noise, opt).outputs.fidelity);
    }
    const GateErrorFit fit = repeated_gate_fit(counts, fids);
    const double single = 1.0 - fids[0];
    CHECK(fit.error_per_gate == doctest::Approx(single).epsilon(0.3));
}
