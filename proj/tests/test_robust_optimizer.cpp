#include <doctest.h>

#include <cmath>

#include "msgate/errors.hpp"
#include "msgate/filter_function.hpp"
#include "msgate/robust_optimizer.hpp"
#include "oracles.hpp"

using namespace msgate;

namespace {

OptimizerConfig half_config(double gate_time = 100e-6, int segments = 14,
                            std::uint64_t seed = 1) {
    OptimizerConfig cfg;
    cfg.num_segments = segments;
    cfg.gate_time = gate_time;
    cfg.target_angle = pi / 8;
    cfg.max_amplitude = two_pi * 150e3;
    cfg.detuning_lo = two_pi * 1.87e6;
    cfg.detuning_hi = two_pi * 2.08e6;
    cfg.seed = seed;
    cfg.max_iters = 600;
    cfg.tolerance = 1e-10;
    return cfg;
}

}  // namespace

TEST_CASE("config validation") {
    OptimizerConfig cfg = half_config();
    cfg.num_segments = 13;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = half_config();
    cfg.detuning_lo = cfg.detuning_hi;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = half_config();
    cfg.gate_time = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = half_config();
    cfg.initial_half = std::vector<double>(3, 0.0);  // needs num_segments/2 entries
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("robust run: alpha and its drift derivative both suppressed") {
    const ModeSpec modes = oracles::two_ion_spec();
    OptimizerConfig cfg = half_config(200e-6, 28);
    cfg.target_angle = pi / 4;
    const OptimizerReport robust = optimize_fm(cfg, modes, {0, 1});
    CHECK(robust.converged);
    CHECK(robust.robustness_check);
    CHECK(robust.final_diagnostics.err_alpha < 1e-4);
    CHECK(std::abs(robust.final_diagnostics.theta - pi / 4) < 1e-10);

    // alphabar-unconstrained comparison run: displacement still closes but the
    // first-order drift response stays generic.
    OptimizerConfig loose = cfg;
    loose.avg_weight = 0.0;
    const OptimizerReport plain = optimize_fm(loose, modes, {0, 1});
    CHECK(plain.final_diagnostics.err_alpha < 1e-4);

    auto dnorm = [](const GateDiagnostics& d) {
        double acc = 0.0;
        for (int r = 0; r < 2; ++r)
            for (int k = 0; k < d.dalpha_domega.cols(); ++k)
                acc += std::norm(d.dalpha_domega(r, k));
        return std::sqrt(acc);
    };
    CHECK(dnorm(plain.final_diagnostics) >= 100.0 * dnorm(robust.final_diagnostics));
}

TEST_CASE("returned pulses are exactly time-symmetric with uniform segments") {
    const ModeSpec modes = oracles::two_ion_spec();
    const OptimizerReport rep = optimize_fm(half_config(), modes, {0, 1});
    const auto& segs = rep.pulse.segments();
    const std::size_t n = segs.size();
    CHECK(n == 14);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(segs[i].duration == segs[n - 1 - i].duration);
        CHECK(segs[i].detuning == segs[n - 1 - i].detuning);
        CHECK(segs[i].amplitude == segs[n - 1 - i].amplitude);
    }
}

TEST_CASE("determinism: identical config and seed give identical pulses") {
    const ModeSpec modes = oracles::two_ion_spec();
    const OptimizerReport a = optimize_fm(half_config(), modes, {0, 1});
    const OptimizerReport b = optimize_fm(half_config(), modes, {0, 1});
    REQUIRE(a.pulse.size() == b.pulse.size());
    CHECK(a.pulse.scale() == b.pulse.scale());
    for (std::size_t i = 0; i < a.pulse.size(); ++i) {
        CHECK(a.pulse.segments()[i].detuning == b.pulse.segments()[i].detuning);
        CHECK(a.pulse.segments()[i].amplitude == b.pulse.segments()[i].amplitude);
    }
    CHECK(a.cost_history == b.cost_history);
}

TEST_CASE("cost history is monotone non-increasing") {
    const ModeSpec modes = oracles::two_ion_spec();
    const OptimizerReport rep = optimize_fm(half_config(), modes, {0, 1});
    for (std::size_t i = 1; i < rep.cost_history.size(); ++i)
        CHECK(rep.cost_history[i] <= rep.cost_history[i - 1]);
}

TEST_CASE("pi/8 target then sqrt(2) amplitude scale gives a pi/4 gate") {
    const ModeSpec modes = oracles::two_ion_spec();
    const OptimizerReport rep = optimize_fm(half_config(), modes, {0, 1});
    const double theta = rotation_angle(rep.pulse, modes, {0, 1});
    CHECK(theta == doctest::Approx(pi / 8).epsilon(1e-12));
    const double scaled =
        rotation_angle(scale_amplitude(rep.pulse, std::sqrt(2.0)), modes, {0, 1});
    CHECK(scaled == doctest::Approx(pi / 4).epsilon(1e-12));
}

TEST_CASE("calibrate_angle: identity, arithmetic, error paths") {
    const ModeSpec modes = oracles::two_ion_spec();
    const OptimizerReport rep = optimize_fm(half_config(), modes, {0, 1});

    const PulseProgram same = calibrate_angle(rep.pulse, modes, {0, 1}, pi / 8);
    CHECK(same.scale() == doctest::Approx(rep.pulse.scale()).epsilon(1e-12));

    const PulseProgram p16 = scale_amplitude(rep.pulse, std::sqrt(0.5));  // theta = pi/16
    const PulseProgram p8 = calibrate_angle(p16, modes, {0, 1}, pi / 8);
    CHECK(p8.scale() / p16.scale() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(rotation_angle(p8, modes, {0, 1}) == doctest::Approx(pi / 8).epsilon(1e-10));

    CHECK_THROWS_AS(calibrate_angle(rep.pulse, modes, {0, 1}, -pi / 8), InfeasibleError);
    CHECK_THROWS_AS(calibrate_angle(scale_amplitude(rep.pulse, 0.0), modes, {0, 1}, pi / 8),
                    InfeasibleError);
}

TEST_CASE("amplitude budget violations name the required amplitude") {
    const ModeSpec modes = oracles::two_ion_spec();
    OptimizerConfig cfg = half_config();
    cfg.max_amplitude = two_pi * 10e3;  // far below what pi/8 at 100 us needs
    CHECK_THROWS_WITH_AS(optimize_fm(cfg, modes, {0, 1}), doctest::Contains("max_amplitude"),
                         InfeasibleError);
}

TEST_CASE("non-convergence is reported, not thrown") {
    const ModeSpec modes = oracles::two_ion_spec();
    OptimizerConfig cfg = half_config();
    cfg.max_iters = 1;
    cfg.tolerance = 1e-30;
    cfg.initial_center = two_pi * 1.975e6;
    const OptimizerReport rep = optimize_fm(cfg, modes, {0, 1});
    CHECK_FALSE(rep.converged);
    CHECK(std::abs(rotation_angle(rep.pulse, modes, {0, 1}) - pi / 8) < 1e-10);
}

TEST_CASE("filter-function suppression reduces F_alpha at the target frequency") {
    const ModeSpec modes = oracles::two_ion_spec();
    OptimizerConfig plain = half_config(200e-6, 28);
    plain.target_angle = pi / 4;
    const OptimizerReport rep_plain = optimize_fm(plain, modes, {0, 1});

    OptimizerConfig sup = plain;
    sup.ff_suppression = OptimizerConfig::FfSuppression{5e3, 10.0};
    const OptimizerReport rep_sup = optimize_fm(sup, modes, {0, 1});
    CHECK(rep_sup.final_diagnostics.err_alpha < 1e-4);

    const std::vector<double> probe = {5e3};
    const double f_plain = ff_alpha(rep_plain.pulse, modes, {0, 1}, probe)[0];
    const double f_sup = ff_alpha(rep_sup.pulse, modes, {0, 1}, probe)[0];
    CHECK(f_sup * 10.0 <= f_plain);
}

TEST_CASE("five-ion design converges near a steered center") {
    const ModeSpec modes = chain_modes(5, two_pi * 0.5e6, two_pi * 2.5e6, 0.08);
    OptimizerConfig cfg;
    cfg.num_segments = 24;
    cfg.gate_time = 100e-6;
    cfg.target_angle = pi / 8;
    cfg.max_amplitude = two_pi * 400e3;
    cfg.detuning_lo = modes.mode_freqs[4] - two_pi * 80e3;
    cfg.detuning_hi = modes.mode_freqs[0] + two_pi * 80e3;
    cfg.max_iters = 2000;
    cfg.tolerance = 1e-9;
    cfg.seed = 2;
    cfg.initial_center = modes.mode_freqs[3] + two_pi * 20e3;
    const OptimizerReport rep = optimize_fm(cfg, modes, {1, 3});
    CHECK(rep.converged);
    CHECK(rep.final_diagnostics.err_alpha < 1e-8);
    CHECK(std::abs(rep.final_diagnostics.theta - pi / 8) < 1e-10);
}
