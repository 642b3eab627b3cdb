#include "msgate/arobust.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "msgate/errors.hpp"

namespace msgate {

namespace {

std::vector<double> effective_ratios(const ModeSpec& modes,
                                     const std::optional<std::vector<double>>& ratios) {
    if (!ratios) return modes.drift_ratios;
    if (static_cast<int>(ratios->size()) != modes.num_modes())
        throw ValidationError("arobust: drift ratio list length must match mode count");
    return *ratios;
}

double weighted_gradient(const std::vector<double>& dtheta, const std::vector<double>& r) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dtheta.size(); ++k) acc += r[k] * dtheta[k];
    return acc;
}

void require_robust(const GateDiagnostics& d, double tau, const SeedTolerance& tol,
                    const char* label) {
    if (d.err_alpha >= tol.err_alpha) {
        std::ostringstream os;
        os << "arobust: " << label << " is not robust (E_alpha = " << d.err_alpha
           << " >= " << tol.err_alpha << ")";
        throw ValidationError(os.str());
    }
    double dsum = 0.0;
    for (int r = 0; r < 2; ++r)
        for (Eigen::Index k = 0; k < d.dalpha_domega.cols(); ++k)
            dsum += std::norm(d.dalpha_domega(r, k));
    if (dsum >= tol.dalpha_scaled * tau * tau) {
        std::ostringstream os;
        os << "arobust: " << label
           << " is not robust (sum |dalpha/domega|^2 = " << dsum << " >= "
           << tol.dalpha_scaled * tau * tau << ")";
        throw ValidationError(os.str());
    }
}

void require_robust_seed(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                         double target_angle, const SeedTolerance& tol, const char* label) {
    const GateDiagnostics d = diagnostics(pulse, modes, pair, 1);
    require_robust(d, pulse.total_duration(), tol, label);
    if (std::abs(d.theta - target_angle) >= tol.angle) {
        std::ostringstream os;
        os << "arobust: " << label << " rotation angle " << d.theta << " misses target "
           << target_angle << " by more than " << tol.angle << " rad";
        throw ValidationError(os.str());
    }
}

}  // namespace

AmSolution two_ion_arobust(const PulseProgram& half, const ModeSpec& modes, IonPair pair,
                           const SeedTolerance& tol) {
    validate_pair(modes, pair);
    if (modes.num_ions != 2 || modes.num_modes() != 2)
        throw ValidationError("two_ion_arobust: requires a 2-ion, 2-mode spec");
    if (std::abs(modes.lamb_dicke[0] - modes.lamb_dicke[1]) >
        1e-9 * std::max(modes.lamb_dicke[0], 1.0))
        throw ValidationError("two_ion_arobust: requires eta_1 = eta_2");
    require_robust_seed(half, modes, pair, pi / 8.0, tol, "half pulse");

    const PulseProgram mirrored =
        mirror_pulse(half, modes.mode_freqs[0], modes.mode_freqs[1]);
    AmSolution sol{.betas = {1.0, 1.0},
                   .composite = concatenate(half, mirrored)};

    const GateDiagnostics dh = diagnostics(half, modes, pair, 1);
    const GateDiagnostics dm = diagnostics(mirrored, modes, pair, 1);
    sol.seed_thetas = {dh.theta, dm.theta};
    sol.seed_gradients = {dh.dtheta_weighted, dm.dtheta_weighted};
    sol.solve_residuals = {std::abs(dh.theta + dm.theta - pi / 4.0),
                           std::abs(dh.dtheta_weighted + dm.dtheta_weighted)};

    const GateDiagnostics dc = diagnostics(sol.composite, modes, pair, 1);
    sol.residual_theta = std::abs(dc.theta - pi / 4.0);
    sol.residual_orders = {std::abs(dc.dtheta_weighted)};
    return sol;
}

AmSolution am_concatenate(const PulseProgram& p1, const PulseProgram& p2, const ModeSpec& modes,
                          IonPair pair, const std::optional<std::vector<double>>& ratios,
                          const SeedTolerance& tol) {
    validate_pair(modes, pair);
    const std::vector<double> r = effective_ratios(modes, ratios);

    const GateDiagnostics d1 = diagnostics(p1, modes, pair, 1);
    const GateDiagnostics d2 = diagnostics(p2, modes, pair, 1);
    require_robust(d1, p1.total_duration(), tol, "first seed");
    require_robust(d2, p2.total_duration(), tol, "second seed");

    const double t1 = d1.theta, t2 = d2.theta;
    const double g1 = weighted_gradient(d1.dtheta_domega, r);
    const double g2 = weighted_gradient(d2.dtheta_domega, r);
    const double det = t1 * g2 - t2 * g1;
    if (det == 0.0 || !std::isfinite(det))
        throw InfeasibleError("am_concatenate: singular 2x2 system (degenerate seeds)");

    const double beta2 = (pi / 4.0) * g2 / det;
    const double beta2t = -(pi / 4.0) * g1 / det;
    if (beta2 < 0.0 || beta2t < 0.0) {
        std::ostringstream os;
        os << "am_concatenate: infeasible pair (beta^2 = " << beta2
           << ", betatilde^2 = " << beta2t
           << "); seed pulses must have opposite-sign weighted angle gradients";
        throw InfeasibleError(os.str());
    }

    AmSolution sol{.betas = {std::sqrt(beta2), std::sqrt(beta2t)},
                   .composite = concatenate(scale_amplitude(p1, std::sqrt(beta2)),
                                            scale_amplitude(p2, std::sqrt(beta2t)))};
    sol.seed_thetas = {t1, t2};
    sol.seed_gradients = {g1, g2};
    sol.solve_residuals = {std::abs(beta2 * t1 + beta2t * t2 - pi / 4.0),
                           std::abs(beta2 * g1 + beta2t * g2)};
    sol.condition_number = [&] {
        Eigen::Matrix2d m;
        m << t1, t2, g1, g2;
        const auto sv = m.jacobiSvd().singularValues();
        return sv(0) / sv(1);
    }();

    const GateDiagnostics dc = diagnostics(sol.composite, modes, pair, 1);
    std::vector<double> rc = effective_ratios(modes, ratios);
    sol.residual_theta = std::abs(dc.theta - pi / 4.0);
    sol.residual_orders = {std::abs(weighted_gradient(dc.dtheta_domega, rc))};
    return sol;
}

AmSolution nth_order_arobust(const std::vector<PulseProgram>& pulses, const ModeSpec& modes,
                             IonPair pair, int order,
                             const std::optional<std::vector<double>>& ratios,
                             const SeedTolerance& tol) {
    validate_pair(modes, pair);
    if (order < 1) throw ValidationError("nth_order_arobust: order must be >= 1");
    const int count = order + 1;
    if (static_cast<int>(pulses.size()) != count)
        throw ValidationError("nth_order_arobust: need exactly order+1 seed pulses");
    const std::vector<double> r = effective_ratios(modes, ratios);

    Eigen::MatrixXd m(count, count);
    std::vector<double> thetas(count);
    std::vector<double> first_grads(count);
    for (int i = 0; i < count; ++i) {
        const GateDiagnostics d = diagnostics(pulses[i], modes, pair, order);
        const std::string label = "seed " + std::to_string(i);
        require_robust(d, pulses[i].total_duration(), tol, label.c_str());
        thetas[i] = d.theta;
        first_grads[i] = d.dtheta_weighted;
        m(0, i) = d.theta;
        m(1, i) = d.dtheta_weighted;
        for (int j = 2; j <= order; ++j) m(j, i) = d.higher_dtheta[j - 2];
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cond = svd.singularValues()(0) / svd.singularValues()(count - 1);
    if (!std::isfinite(cond) || svd.singularValues()(count - 1) <= 0.0 || cond > 1e14) {
        std::ostringstream os;
        os << "nth_order_arobust: system is singular or ill-conditioned (condition number "
           << cond << "); seeds are linearly dependent";
        throw InfeasibleError(os.str());
    }

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(count);
    rhs(0) = pi / 4.0;
    const Eigen::VectorXd beta2 = m.partialPivLu().solve(rhs);
    for (int i = 0; i < count; ++i) {
        if (beta2(i) < 0.0) {
            std::ostringstream os;
            os << "nth_order_arobust: infeasible (beta^2[" << i << "] = " << beta2(i)
               << " < 0); choose seeds with better-spread angle gradients";
            throw InfeasibleError(os.str());
        }
    }

    AmSolution sol{.betas = {}, .composite = pulses[0]};
    sol.betas.resize(count);
    for (int i = 0; i < count; ++i) sol.betas[i] = std::sqrt(beta2(i));
    PulseProgram composite = scale_amplitude(pulses[0], sol.betas[0]);
    for (int i = 1; i < count; ++i)
        composite = concatenate(composite, scale_amplitude(pulses[i], sol.betas[i]));
    sol.composite = composite;
    sol.condition_number = cond;
    sol.seed_thetas = thetas;
    sol.seed_gradients = first_grads;

    const Eigen::VectorXd resid = m * beta2 - rhs;
    sol.solve_residuals.resize(count);
    for (int i = 0; i < count; ++i) sol.solve_residuals[i] = std::abs(resid(i));

    const GateDiagnostics dc = diagnostics(sol.composite, modes, pair, order);
    sol.residual_theta = std::abs(dc.theta - pi / 4.0);
    sol.residual_orders.resize(order);
    sol.residual_orders[0] = std::abs(dc.dtheta_weighted);
    for (int j = 2; j <= order; ++j)
        sol.residual_orders[j - 1] = std::abs(dc.higher_dtheta[j - 2]);
    return sol;
}

}  // namespace msgate
