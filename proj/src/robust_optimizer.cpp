#include "msgate/robust_optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "msgate/errors.hpp"

namespace msgate {

void OptimizerConfig::validate() const {
    if (num_segments < 2 || num_segments % 2 != 0)
        throw ValidationError("optimizer: num_segments must be even and >= 2");
    if (!(gate_time > 0.0)) throw ValidationError("optimizer: gate_time must be > 0");
    if (!(max_amplitude > 0.0)) throw ValidationError("optimizer: max_amplitude must be > 0");
    if (!(detuning_hi > detuning_lo))
        throw ValidationError("optimizer: detuning bounds must be ordered");
    if (target_angle == 0.0) throw ValidationError("optimizer: target_angle must be nonzero");
    if (num_starts < 1) throw ValidationError("optimizer: num_starts must be >= 1");
    if (max_iters < 1) throw ValidationError("optimizer: max_iters must be >= 1");
    if (avg_weight < 0.0) throw ValidationError("optimizer: avg_weight must be >= 0");
    if (initial_half && static_cast<int>(initial_half->size()) != num_segments / 2)
        throw ValidationError("optimizer: initial_half must have num_segments/2 entries");
    if (ff_suppression && !(ff_suppression->freq_hz > 0.0))
        throw ValidationError("optimizer: ff_suppression frequency must be > 0");
}

namespace {

using detail::segment_moment;

// The cost is a sum of squared residuals: per mode the wave integral S0
// (residual displacement) and the weighted S0 - S1/tau (time-averaged
// displacement), optionally the filter-function integral at one frequency.
// Residuals and the analytic Jacobian are evaluated in the free first-half
// detunings; detunings are scaled to units of 2 pi kHz so the normal
// equations are well conditioned.
class CostModel {
public:
    CostModel(const OptimizerConfig& cfg, const ModeSpec& modes, IonPair pair)
        : cfg_(cfg), modes_(modes) {
        half_ = cfg.num_segments / 2;
        seg_dt_ = cfg.gate_time / cfg.num_segments;
        omega0_ = cfg.max_amplitude;
        tau_ = cfg.gate_time;
        const int num_modes = modes.num_modes();
        for (int k = 0; k < num_modes; ++k) {
            const double b1 = modes.coupling(pair.j1, k), b2 = modes.coupling(pair.j2, k);
            const double eta2 = modes.lamb_dicke[k] * modes.lamb_dicke[k];
            alpha_coef_.push_back(std::sqrt(0.25 * eta2 * (b1 * b1 + b2 * b2)));
            ff_coef_.push_back(std::sqrt(0.25 * eta2 * eta2 * (b1 * b1 + b2 * b2)));
        }
        num_residuals_ = 4 * num_modes + (cfg.ff_suppression ? 2 * num_modes : 0);
    }

    int dim() const { return half_; }
    int residual_count() const { return num_residuals_; }

    std::vector<double> full_detunings(const Eigen::VectorXd& x) const {
        std::vector<double> full(2 * half_);
        for (int i = 0; i < half_; ++i) {
            full[i] = x[i] * detuning_unit;
            full[2 * half_ - 1 - i] = x[i] * detuning_unit;
        }
        return full;
    }

    // Residual vector and, when requested, its Jacobian. Cost = |r|^2.
    void evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
        const int s = 2 * half_;
        const std::vector<double> delta = full_detunings(x);
        r.setZero(num_residuals_);
        if (jac) jac->setZero(num_residuals_, half_);

        const double w_avg = std::sqrt(cfg_.avg_weight);
        std::vector<cplx> a0(s), a1(s), d0(s), d1(s);
        std::vector<cplx> ds0(jac ? s : 0), ds1(jac ? s : 0);
        for (int k = 0; k < modes_.num_modes(); ++k) {
            const double wk = modes_.mode_freqs[k];
            double theta = 0.0;
            for (int m = 0; m < s; ++m) {
                const double mu = wk - delta[m];
                const cplx g = omega0_ * std::polar(1.0, theta);
                const cplx m0 = segment_moment(mu, seg_dt_, 0);
                const cplx m1 = segment_moment(mu, seg_dt_, 1);
                const double t0 = m * seg_dt_;
                a0[m] = g * m0;
                a1[m] = g * (t0 * m0 + m1);
                if (jac) {
                    const cplx m2 = segment_moment(mu, seg_dt_, 2);
                    d0[m] = -iu * g * m1;
                    d1[m] = -iu * g * (t0 * m1 + m2);
                }
                theta += mu * seg_dt_;
            }
            cplx s0 = 0.0, s1 = 0.0;
            for (int m = 0; m < s; ++m) {
                s0 += a0[m];
                s1 += a1[m];
            }
            const cplx sbar = s0 - s1 / tau_;
            const int row = 4 * k;
            r[row] = alpha_coef_[k] * s0.real();
            r[row + 1] = alpha_coef_[k] * s0.imag();
            r[row + 2] = alpha_coef_[k] * w_avg * sbar.real();
            r[row + 3] = alpha_coef_[k] * w_avg * sbar.imag();
            if (jac) {
                // d/d delta_m: the segment's own moment derivative plus the
                // phase shift -dt on every later segment; symmetric positions
                // fold onto the same free variable.
                cplx suf0 = 0.0, suf1 = 0.0;
                for (int m = s - 1; m >= 0; --m) {
                    ds0[m] = d0[m] - iu * seg_dt_ * suf0;
                    ds1[m] = d1[m] - iu * seg_dt_ * suf1;
                    suf0 += a0[m];
                    suf1 += a1[m];
                }
                for (int i = 0; i < half_; ++i) {
                    const cplx g0 = (ds0[i] + ds0[s - 1 - i]) * detuning_unit;
                    const cplx g1 = (ds1[i] + ds1[s - 1 - i]) * detuning_unit;
                    const cplx gbar = g0 - g1 / tau_;
                    (*jac)(row, i) = alpha_coef_[k] * g0.real();
                    (*jac)(row + 1, i) = alpha_coef_[k] * g0.imag();
                    (*jac)(row + 2, i) = alpha_coef_[k] * w_avg * gbar.real();
                    (*jac)(row + 3, i) = alpha_coef_[k] * w_avg * gbar.imag();
                }
            }
        }

        if (cfg_.ff_suppression) {
            const double nu = two_pi * cfg_.ff_suppression->freq_hz;
            const double w_ff = std::sqrt(cfg_.ff_suppression->weight);
            for (int k = 0; k < modes_.num_modes(); ++k) {
                const double wk = modes_.mode_freqs[k];
                double theta = 0.0;
                std::vector<cplx> b(s), db(s);
                for (int m = 0; m < s; ++m) {
                    const double mu = wk - delta[m];
                    const cplx g = omega0_ * std::polar(1.0, nu * m * seg_dt_ - theta);
                    b[m] = g * segment_moment(nu - mu, seg_dt_, 0);
                    if (jac) db[m] = iu * g * segment_moment(nu - mu, seg_dt_, 1);
                    theta += mu * seg_dt_;
                }
                cplx sb = 0.0;
                for (int m = 0; m < s; ++m) sb += b[m];
                const int row = 4 * modes_.num_modes() + 2 * k;
                r[row] = ff_coef_[k] * w_ff * sb.real();
                r[row + 1] = ff_coef_[k] * w_ff * sb.imag();
                if (jac) {
                    std::vector<cplx> dsb(s);
                    cplx suf = 0.0;
                    for (int m = s - 1; m >= 0; --m) {
                        dsb[m] = db[m] + iu * seg_dt_ * suf;
                        suf += b[m];
                    }
                    for (int i = 0; i < half_; ++i) {
                        const cplx gb = (dsb[i] + dsb[s - 1 - i]) * detuning_unit;
                        (*jac)(row, i) = ff_coef_[k] * w_ff * gb.real();
                        (*jac)(row + 1, i) = ff_coef_[k] * w_ff * gb.imag();
                    }
                }
            }
        }
    }

    double cost(const Eigen::VectorXd& x) const {
        Eigen::VectorXd r;
        evaluate(x, r, nullptr);
        return r.squaredNorm();
    }

    PulseProgram build_pulse(const Eigen::VectorXd& x) const {
        const std::vector<double> delta = full_detunings(x);
        std::vector<Segment> segs(delta.size());
        for (std::size_t i = 0; i < delta.size(); ++i)
            segs[i] = Segment{seg_dt_, delta[i], omega0_};
        return PulseProgram(std::move(segs), 1.0);
    }

    static constexpr double detuning_unit = two_pi * 1e3;

private:
    const OptimizerConfig& cfg_;
    const ModeSpec& modes_;
    int half_ = 0;
    int num_residuals_ = 0;
    double seg_dt_ = 0.0, omega0_ = 0.0, tau_ = 0.0;
    std::vector<double> alpha_coef_, ff_coef_;
};

struct StartResult {
    double cost = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x;
    std::vector<double> history;
};

// Damped Gauss-Newton (Levenberg-Marquardt) with box projection. The normal
// equations are tiny (variables = num_segments/2), so each iteration is cheap
// and deterministic.
StartResult minimize(const CostModel& model, Eigen::VectorXd x, double lo, double hi,
                     int max_iters, double cost_tol) {
    const int n = model.dim();
    auto clamp_vec = [&](Eigen::VectorXd& v) {
        for (int i = 0; i < n; ++i) v[i] = std::clamp(v[i], lo, hi);
    };
    clamp_vec(x);

    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    model.evaluate(x, r, &jac);
    double cost = r.squaredNorm();

    StartResult res;
    res.cost = cost;
    res.x = x;
    res.history.push_back(cost);

    double lambda = 1e-4;
    for (int iter = 0; iter < max_iters; ++iter) {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        Eigen::MatrixXd damped = jtj;
        for (int i = 0; i < n; ++i)
            damped(i, i) += lambda * std::max(jtj(i, i), 1e-12 * jtj.trace() / n + 1e-300);
        const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
        Eigen::VectorXd xnew = x + step;
        clamp_vec(xnew);
        Eigen::VectorXd rnew;
        model.evaluate(xnew, rnew, nullptr);
        const double costnew = rnew.squaredNorm();
        if (costnew < cost) {
            x = xnew;
            cost = costnew;
            model.evaluate(x, r, &jac);
            lambda = std::max(lambda / 3.0, 1e-12);
            if (cost < res.cost) {
                res.cost = cost;
                res.x = x;
            }
            res.history.push_back(std::min(res.history.back(), cost));
            if (cost < cost_tol) break;
            if (step.cwiseAbs().maxCoeff() < 1e-12) break;
        } else {
            lambda *= 4.0;
            if (lambda > 1e12) break;  // stationary within machine limits
        }
    }
    return res;
}

}  // namespace

PulseProgram calibrate_angle(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                             double target) {
    const double theta = rotation_angle(pulse, modes, pair);
    if (theta == 0.0 || !std::isfinite(theta))
        throw InfeasibleError("calibrate_angle: rotation angle is zero");
    if (theta * target < 0.0) {
        std::ostringstream os;
        os << "calibrate_angle: rotation angle " << theta << " has opposite sign to target "
           << target;
        throw InfeasibleError(os.str());
    }
    return scale_amplitude(pulse, std::sqrt(target / theta));
}

OptimizerReport optimize_fm(const OptimizerConfig& config, const ModeSpec& modes, IonPair pair) {
    config.validate();
    modes.validate();
    validate_pair(modes, pair);

    const CostModel model(config, modes, pair);
    const double unit = CostModel::detuning_unit;
    const double lo = config.detuning_lo / unit;
    const double hi = config.detuning_hi / unit;
    const int half = config.num_segments / 2;

    // Deterministic start list: cycle the initial center through the modes from
    // the lowest up, alternating the side of the mode, with seeded jitter.
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<int> ascending(modes.num_modes());
    for (int k = 0; k < modes.num_modes(); ++k) ascending[k] = k;
    std::sort(ascending.begin(), ascending.end(), [&](int a, int b) {
        return modes.mode_freqs[a] < modes.mode_freqs[b];
    });

    // Start list: an explicit half-pulse or center detuning steers every start
    // (seeded jitter breaks degeneracy); otherwise the centers cycle through
    // the modes from the lowest up, alternating sides.
    std::vector<Eigen::VectorXd> starts;
    for (int s = 0; s < config.num_starts; ++s) {
        Eigen::VectorXd x(half);
        if (s == 0 && config.initial_half) {
            for (int i = 0; i < half; ++i) x[i] = (*config.initial_half)[i] / unit;
        } else {
            double center;
            if (config.initial_center) {
                center = *config.initial_center / unit +
                         (s == 0 ? 0.0 : (uni(rng) - 0.5) * two_pi * 8e3 / unit);
            } else {
                const int k = ascending[s % modes.num_modes()];
                const double side = ((s / modes.num_modes()) % 2 == 0) ? -1.0 : 1.0;
                const double off = two_pi * (3e3 + 15e3 * uni(rng)) / unit;
                center = modes.mode_freqs[k] / unit + side * off;
            }
            for (int i = 0; i < half; ++i)
                x[i] = center + (uni(rng) - 0.5) * two_pi * 4e3 / unit;
        }
        starts.push_back(std::move(x));
    }

    // Selection: lowest cost among starts that can be calibrated (right angle
    // sign, amplitude within budget); ties broken by start index.
    StartResult best;
    int best_start = -1;
    bool any_sign_ok = false;
    double worst_required = 0.0;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        StartResult r = minimize(model, starts[s], lo, hi, config.max_iters, config.tolerance);
        const PulseProgram trial = model.build_pulse(r.x);
        const double theta = rotation_angle(trial, modes, pair);
        if (theta * config.target_angle <= 0.0) continue;
        any_sign_ok = true;
        const double required =
            std::sqrt(config.target_angle / theta) * config.max_amplitude;
        if (required > config.max_amplitude * (1.0 + 1e-9)) {
            worst_required = worst_required == 0.0 ? required : std::min(worst_required, required);
            continue;
        }
        if (r.cost < best.cost) {
            best = std::move(r);
            best_start = static_cast<int>(s);
        }
    }
    if (best_start < 0) {
        if (any_sign_ok && worst_required > 0.0) {
            std::ostringstream os;
            os << "optimize_fm: amplitude calibration needs " << worst_required << " rad/s ("
               << rad_to_hz(worst_required) << " Hz) > max_amplitude " << config.max_amplitude
               << " rad/s; raise max_amplitude or relax the target angle";
            throw InfeasibleError(os.str());
        }
        throw InfeasibleError(
            "optimize_fm: no start produced a rotation angle of the target sign");
    }

    PulseProgram raw = model.build_pulse(best.x);
    const double theta = rotation_angle(raw, modes, pair);
    const double beta = std::sqrt(config.target_angle / theta);
    const double required = beta * config.max_amplitude;
    PulseProgram calibrated = scale_amplitude(raw, beta);

    OptimizerReport report{.pulse = calibrated,
                           .cost_history = best.history,
                           .final_diagnostics = diagnostics(calibrated, modes, pair, 1),
                           .converged = false,
                           .final_cost = best.cost,
                           .required_amplitude = required,
                           .best_start = best_start,
                           .robustness_check = false};

    // Post-hoc robustness assertion: symmetric pulses minimizing |alphabar|
    // should carry vanishing first-order displacement response.
    const double tau = config.gate_time;
    double dsum = 0.0;
    for (int r = 0; r < 2; ++r)
        for (int k = 0; k < modes.num_modes(); ++k)
            dsum += std::norm(report.final_diagnostics.dalpha_domega(r, k));
    report.robustness_check =
        report.final_diagnostics.err_alpha < 1e-4 && dsum < 1e-4 * tau * tau;
    report.converged = best.cost <= config.tolerance && report.robustness_check;
    return report;
}

}  // namespace msgate
