// Acceptance suite: one pass/fail line per criterion. Exact identities run at
// their stated tolerances; figure-level reproductions are qualitative but
// thresholded. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "msgate/arobust.hpp"
#include "msgate/errors.hpp"
#include "msgate/filter_function.hpp"
#include "msgate/robust_optimizer.hpp"
#include "msgate/scan_sim.hpp"
#include "oracles.hpp"

using namespace msgate;

namespace {

int failed = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int id, const char* name, bool pass, const std::string& detail,
            bool soft = false) {
    if (!pass && !soft) ++failed;
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : (soft ? "WARN" : "FAIL"), id,
                name, detail.c_str());
    std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

OptimizerConfig two_ion_half_config(std::uint64_t seed = 1, double gate_time = 100e-6,
                                    int segments = 14, double target = pi / 8) {
    OptimizerConfig cfg;
    cfg.num_segments = segments;
    cfg.gate_time = gate_time;
    cfg.target_angle = target;
    cfg.max_amplitude = two_pi * 150e3;
    cfg.detuning_lo = two_pi * 1.87e6;
    cfg.detuning_hi = two_pi * 2.08e6;
    cfg.seed = seed;
    cfg.max_iters = 800;
    cfg.tolerance = 1e-12;
    return cfg;
}

double weighted_gradient_sum(const GateDiagnostics& d) { return d.dtheta_weighted; }

double fit_exponent(const std::vector<double>& eps, const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (err[i] <= 0) continue;
        const double x = std::log(eps[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> offset_grid() {
    std::vector<double> eps;
    for (double f = 50.0; f <= 500.1; f *= 1.2) eps.push_back(two_pi * f);
    return eps;
}

}  // namespace

int main() {
    const ModeSpec modes = oracles::two_ion_spec();
    const IonPair pair{0, 1};

    // Shared artifacts: the optimized pi/8 half and the two composites.
    const OptimizerReport half_report = optimize_fm(two_ion_half_config(), modes, pair);
    const PulseProgram half = half_report.pulse;
    const PulseProgram robust_composite = concatenate(half, half);
    const AmSolution arobust_sol = two_ion_arobust(half, modes, pair);
    const PulseProgram arobust_composite = arobust_sol.composite;

    // 1. Mirror identity on random pulses.
    {
        Timer t;
        std::mt19937_64 rng(101);
        double worst_theta = 0.0, worst_grad = 0.0;
        for (int i = 0; i < 20; ++i) {
            const PulseProgram p = oracles::random_pulse(rng, modes);
            const PulseProgram m = mirror_pulse(p, modes.mode_freqs[0], modes.mode_freqs[1]);
            const GateDiagnostics dp = diagnostics(p, modes, pair, 1);
            const GateDiagnostics dm = diagnostics(m, modes, pair, 1);
            worst_theta = std::max(worst_theta, rel(dm.theta, dp.theta));
            const double sp = dp.dtheta_domega[0] + dp.dtheta_domega[1];
            const double sm = dm.dtheta_domega[0] + dm.dtheta_domega[1];
            worst_grad = std::max(worst_grad, rel(sm, -sp));
        }
        const double dt = t.seconds();
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "max rel dev: theta %.2e, gradient sum %.2e; %.2f s", worst_theta,
                      worst_grad, dt);
        report(1, "mirror identity on 20 random two-ion pulses",
               worst_theta < 1e-9 && worst_grad < 1e-9 && dt < 10.0, buf);
    }

    // 2. A-robust construction vs repeated-half composite.
    {
        Timer t;
        const GateDiagnostics da = diagnostics(arobust_composite, modes, pair, 1);
        const GateDiagnostics dr = diagnostics(robust_composite, modes, pair, 1);
        const double theta_miss = std::abs(da.theta - pi / 4);
        const double reduction =
            std::abs(weighted_gradient_sum(dr)) /
            std::max(std::abs(weighted_gradient_sum(da)), 1e-300);
        const double dt = t.seconds();
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "|theta - pi/4| = %.2e rad, gradient reduction %.1e x; %.2f s",
                      theta_miss, reduction, dt);
        report(2, "A-robust composite: angle and first-order response",
               theta_miss < 1e-6 && reduction >= 1e3 && dt < 60.0, buf);
    }

    // 3. Static-offset scaling exponents of E_theta.
    {
        const auto eps = offset_grid();
        std::vector<double> err_r, err_a;
        for (double e : eps) {
            err_r.push_back(
                diagnostics(apply_offset(robust_composite, {e}), modes, pair, 1).err_theta);
            err_a.push_back(
                diagnostics(apply_offset(arobust_composite, {e}), modes, pair, 1).err_theta);
        }
        const double slope_r = fit_exponent(eps, err_r);
        const double slope_a = fit_exponent(eps, err_a);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "robust exponent %.3f, A-robust exponent %.3f",
                      slope_r, slope_a);
        report(3, "E_theta(eps) log-log exponents over 2pi*[50,500] Hz",
               slope_r > 1.9 && slope_r < 2.3 && slope_a >= 3.8, buf);
    }

    // 4. AM solver exactness and infeasibility diagnostics.
    {
        const PulseProgram mirrored =
            mirror_pulse(half, modes.mode_freqs[0], modes.mode_freqs[1]);
        const AmSolution sol = am_concatenate(half, mirrored, modes, pair);
        const double beta_dev =
            std::max(std::abs(sol.betas[0] - 1.0), std::abs(sol.betas[1] - 1.0));
        const double resid = std::max(sol.solve_residuals[0], sol.solve_residuals[1]);
        bool rejected = false;
        std::string msg;
        try {
            am_concatenate(half, optimize_fm(two_ion_half_config(5), modes, pair).pulse,
                           modes, pair);
        } catch (const InfeasibleError& e) {
            rejected = std::string(e.what()).find("beta") != std::string::npos;
            msg = e.what();
        }
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "mirror-seed |beta-1| <= %.1e, residuals <= %.1e, same-sign pair %s",
                      beta_dev, resid, rejected ? "rejected with beta^2 diagnostic" : "NOT rejected");
        report(4, "AM 2x2 solver", beta_dev < 1e-10 && resid < 1e-10 && rejected, buf);
    }

    // 5. Second-order suppression from three mixed-class seeds. The third seed
    // comes from the outside-band class; a small deterministic config search
    // finds a feasible gradient spread.
    {
        const PulseProgram mirrored =
            mirror_pulse(half, modes.mode_freqs[0], modes.mode_freqs[1]);
        bool found = false;
        double slope = 0.0;
        std::string betas = "none";
        for (double center_mhz : {2.015, 2.025}) {
            for (double gate_time : {200e-6, 140e-6}) {
                for (std::uint64_t seed : {1, 2}) {
                    OptimizerConfig third = two_ion_half_config(seed, gate_time, 14, -pi / 8);
                    third.max_amplitude = two_pi * 250e3;
                    third.detuning_lo = two_pi * 1.80e6;
                    third.detuning_hi = two_pi * 2.15e6;
                    third.initial_center = two_pi * center_mhz * 1e6;
                    third.max_iters = 600;
                    third.tolerance = 1e-10;
                    try {
                        const PulseProgram outer = optimize_fm(third, modes, pair).pulse;
                        const AmSolution sol =
                            nth_order_arobust({half, mirrored, outer}, modes, pair, 2);
                        const auto eps = offset_grid();
                        std::vector<double> err;
                        for (double e : eps)
                            err.push_back(diagnostics(apply_offset(sol.composite, {e}),
                                                      modes, pair, 1)
                                              .err_theta);
                        slope = fit_exponent(eps, err);
                        char bb[64];
                        std::snprintf(bb, sizeof(bb), "%.3f/%.3f/%.3f", sol.betas[0],
                                      sol.betas[1], sol.betas[2]);
                        betas = bb;
                        found = true;
                    } catch (const Error&) {
                        continue;
                    }
                    break;
                }
                if (found) break;
            }
            if (found) break;
        }
        char buf[160];
        std::snprintf(buf, sizeof(buf), "exponent %.3f (betas %s)", slope, betas.c_str());
        report(5, "n = 2 composite E_theta exponent", found && slope >= 5.5, buf);
    }

    // 6. Derivative closed forms vs central finite differences.
    {
        Timer t;
        std::mt19937_64 rng(106);
        const double h = two_pi * 1.0;
        double worst_alpha = 0.0, worst_theta = 0.0;
        for (int i = 0; i < 100; ++i) {
            const PulseProgram p = oracles::random_pulse(rng, modes);
            const auto d1 = theta_derivative(p, modes, pair, 1);
            for (int k = 0; k < 2; ++k) {
                const cplx da = alpha_derivative(p, modes, 0, k);
                const cplx up =
                    displacement(p, oracles::shift_mode(modes, k, h), 0, k, p.total_duration());
                const cplx dn = displacement(p, oracles::shift_mode(modes, k, -h), 0, k,
                                             p.total_duration());
                worst_alpha = std::max(
                    worst_alpha, std::abs(da - (up - dn) / (2.0 * h)) / std::abs(da));
                const double tu = rotation_angle(p, oracles::shift_mode(modes, k, h), pair);
                const double td = rotation_angle(p, oracles::shift_mode(modes, k, -h), pair);
                worst_theta =
                    std::max(worst_theta, rel(d1[k], (tu - td) / (2.0 * h)));
            }
        }
        const double dt = t.seconds();
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "max rel dev: dalpha/domega %.2e, dtheta/domega %.2e; %.2f s",
                      worst_alpha, worst_theta, dt);
        report(6, "drift derivatives vs finite differences (100 pulses)",
               worst_alpha < 1e-4 && worst_theta < 1e-4 && dt < 30.0, buf);
    }

    // 7. Kernel closed forms vs adaptive quadrature.
    {
        Timer t;
        std::mt19937_64 rng(107);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const PulseProgram p = oracles::random_pulse(rng, modes);
            for (int k = 0; k < 2; ++k) {
                const cplx a = displacement(p, modes, 0, k, p.total_duration());
                worst = std::max(worst, std::abs(a - oracles::displacement_quad(p, modes, 0, k)) /
                                            std::abs(a));
                const cplx ab = avg_displacement(p, modes, 0, k);
                worst = std::max(worst,
                                 std::abs(ab - oracles::avg_displacement_quad(p, modes, 0, k)) /
                                     std::abs(ab));
            }
            const double th = rotation_angle(p, modes, pair);
            worst = std::max(worst, rel(th, oracles::rotation_angle_quad(p, modes, pair)));
        }
        const double dt = t.seconds();
        char buf[160];
        std::snprintf(buf, sizeof(buf), "max rel dev %.2e; %.2f s", worst, dt);
        report(7, "alpha, theta, alphabar vs adaptive quadrature (100 pulses)", worst < 1e-8,
               buf);
    }

    // 8. Filter functions: quadrature agreement and the A-robust slope gain.
    {
        std::mt19937_64 rng(108);
        oracles::RandomPulseParams params;
        params.max_segments = 8;
        double worst_a = 0.0, worst_t = 0.0;
        const std::vector<double> probe = {41.0, 1.3e3, 5.2e4};
        for (int i = 0; i < 6; ++i) {
            const PulseProgram p = oracles::random_pulse(rng, modes, params);
            const auto fa = ff_alpha(p, modes, pair, probe);
            const auto ft = ff_theta(p, modes, pair, probe);
            for (std::size_t q = 0; q < probe.size(); ++q) {
                worst_a = std::max(
                    worst_a, rel(fa[q], oracles::ff_alpha_quad(p, modes, pair, probe[q])));
                worst_t = std::max(
                    worst_t, rel(ft[q], oracles::ff_theta_quad(p, modes, pair, probe[q])));
            }
        }
        const auto grid = default_ff_grid(10.0, 1e5, 80);
        const auto ft_r = ff_theta(robust_composite, modes, pair, grid);
        const auto ft_a = ff_theta(arobust_composite, modes, pair, grid);
        const double slope_r = loglog_slope(grid, ft_r, 1e3);
        const double slope_a = loglog_slope(grid, ft_a, 1e3);
        char buf[200];
        std::snprintf(
            buf, sizeof(buf),
            "quad dev F_alpha %.2e, F_theta %.2e; F_theta slopes %.2f (robust) %.2f (A-robust)",
            worst_a, worst_t, slope_r, slope_a);
        report(8, "filter functions: oracle match and low-frequency slopes",
               worst_a < 1e-6 && worst_t < 1e-6 && slope_a - slope_r >= 1.5, buf);
    }

    // 9. Analytic populations vs the zero-noise master equation.
    {
        Timer t;
        std::mt19937_64 rng(109);
        oracles::RandomPulseParams params;
        params.max_segments = 10;
        params.min_amplitude = two_pi * 5e3;
        params.max_amplitude = two_pi * 15e3;
        params.mode_guard = two_pi * 8e3;
        params.max_duration = 20e-6;
        LindbladOptions opt;
        opt.n_max = {15, 15};
        NoiseModel quiet;
        double worst = 0.0, worst_trace = 0.0;
        for (int i = 0; i < 50; ++i) {
            const PulseProgram p = oracles::random_pulse(rng, modes, params);
            const BellOutputs ideal = ideal_populations(p, modes, pair);
            const LindbladResult lind = lindblad_sim(p, modes, pair, quiet, opt);
            worst = std::max({worst, std::abs(ideal.p00 - lind.outputs.p00),
                              std::abs(ideal.p11 - lind.outputs.p11),
                              std::abs(ideal.p01_10 - lind.outputs.p01_10),
                              std::abs(ideal.contrast - lind.outputs.contrast),
                              std::abs(ideal.fidelity - lind.outputs.fidelity)});
            worst_trace = std::max(worst_trace, lind.trace_error);
        }
        const double dt = t.seconds();
        char buf[160];
        std::snprintf(buf, sizeof(buf), "max dev %.2e, max trace error %.2e; %.1f s", worst,
                      worst_trace, dt);
        report(9, "ideal populations vs zero-noise Lindblad (50 pulses, n_max 15)",
               worst < 1e-4 && worst_trace < 1e-8 && dt < 600.0, buf);
    }

    // 10. Detuning-scan reproduction: five concatenated gates over +-1 kHz.
    {
        std::vector<double> offsets;
        for (double f = -1000.0; f <= 1000.1; f += 100.0) offsets.push_back(two_pi * f);
        const ScanResult sr = detuning_scan(robust_composite, modes, pair, offsets, 5);
        const ScanResult sa = detuning_scan(arobust_composite, modes, pair, offsets, 5);
        double max_podd = 0.0, dev_r = 0.0, dev_a = 0.0;
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            max_podd = std::max({max_podd, sr.points[i].p01_10, sa.points[i].p01_10});
            dev_r = std::max(dev_r, std::abs(sr.points[i].p00 - 0.5));
            dev_a = std::max(dev_a, std::abs(sa.points[i].p00 - 0.5));
        }
        auto linear_coeff = [&](const ScanResult& s) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            const int n = static_cast<int>(s.points.size());
            for (const auto& p : s.points) {
                sx += p.offset;
                sy += p.p00;
                sxx += p.offset * p.offset;
                sxy += p.offset * p.p00;
            }
            return (n * sxy - sx * sy) / (n * sxx - sx * sx);
        };
        const double cr = linear_coeff(sr), ca = linear_coeff(sa);
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "max P01+10 %.1e; max|P00-1/2| robust %.3f vs A-robust %.3f; "
                      "linear coeff ratio %.1e",
                      max_podd, dev_r, dev_a, std::abs(ca / cr));
        report(10, "five-gate detuning scan over +-1 kHz",
               max_podd < 0.01 && dev_a * 3.0 <= dev_r && std::abs(ca) < 0.1 * std::abs(cr),
               buf);
    }

    // 11. Stochastic-noise band at the measured rates.
    {
        Timer t;
        NoiseModel noise;
        noise.heating_rates = {10.0, 1.0};
        noise.motional_T2 = 3e-3;
        noise.carrier_T2 = 0.33;
        LindbladOptions opt;
        opt.n_max = {8, 8};
        opt.rel_tol = 1e-8;
        opt.abs_tol = 1e-11;
        auto gate_error = [&](const PulseProgram& p, double eps) {
            const PulseProgram shifted = apply_offset(p, {eps});
            return 1.0 - lindblad_sim(shifted, modes, pair, noise, opt).outputs.fidelity;
        };
        const double er0 = gate_error(robust_composite, 0.0);
        const double ea0 = gate_error(arobust_composite, 0.0);
        bool band = er0 >= 1e-3 && er0 <= 3e-2 && ea0 >= 1e-3 && ea0 <= 3e-2;
        bool ordered = true;
        double er_off = 0.0, ea_off = 0.0;
        for (double f : {-400.0, 400.0}) {
            const double er = gate_error(robust_composite, two_pi * f);
            const double ea = gate_error(arobust_composite, two_pi * f);
            er_off = std::max(er_off, er);
            ea_off = std::max(ea_off, ea);
            if (ea > er) ordered = false;
        }
        const double dt = t.seconds();
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "errors at 0: robust %.2e, A-robust %.2e; at +-400 Hz: %.2e vs %.2e; "
                      "%.0f s",
                      er0, ea0, er_off, ea_off, dt);
        report(11, "noisy single-gate errors in band, A-robust wins off resonance",
               band && ordered, buf);
    }

    // 12. Power ordering (soft check per the source comparison).
    {
        OptimizerConfig full = two_ion_half_config(1, 200e-6, 28, pi / 4);
        const OptimizerReport robust_full = optimize_fm(full, modes, pair);
        const double amp_half = half_report.required_amplitude;
        const double amp_full = robust_full.required_amplitude;
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "A-robust half %.1f kHz vs full-time robust %.1f kHz",
                      rad_to_hz(amp_half) / 1e3, rad_to_hz(amp_full) / 1e3);
        report(12, "A-robust half needs more power than the full-time robust gate",
               amp_half > amp_full, buf, /*soft=*/true);
    }

    if (failed == 0)
        std::printf("acceptance: all criteria passed\n");
    else
        std::printf("acceptance: %d criteria FAILED\n", failed);
    return failed;
}
