#include "msgate/mode_model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "msgate/errors.hpp"
#include "msgate/units.hpp"

namespace msgate {

void ModeSpec::validate() const {
    if (num_ions < 1) throw ValidationError("mode spec: num_ions must be >= 1");
    const auto k = mode_freqs.size();
    if (k == 0) throw ValidationError("mode spec: no modes");
    if (lamb_dicke.size() != k)
        throw ValidationError("mode spec: lamb_dicke length does not match mode_freqs");
    if (drift_ratios.size() != k)
        throw ValidationError("mode spec: drift_ratios length does not match mode_freqs");
    if (coupling.rows() != num_ions || coupling.cols() != static_cast<Eigen::Index>(k))
        throw ValidationError("mode spec: coupling must be num_ions x num_modes");
    for (std::size_t i = 0; i < k; ++i) {
        if (!(mode_freqs[i] > 0.0))
            throw ValidationError("mode spec: mode_freqs must be positive (mode " +
                                  std::to_string(i) + ")");
        if (lamb_dicke[i] < 0.0)
            throw ValidationError("mode spec: lamb_dicke must be >= 0 (mode " +
                                  std::to_string(i) + ")");
        if (!std::isfinite(drift_ratios[i]))
            throw ValidationError("mode spec: drift_ratios must be finite (mode " +
                                  std::to_string(i) + ")");
    }
    const Eigen::MatrixXd gram = coupling.transpose() * coupling;
    const double err = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols()))
                           .cwiseAbs()
                           .maxCoeff();
    if (err > 1e-12) {
        std::ostringstream os;
        os << "mode spec: coupling columns not orthonormal (max deviation " << err << ")";
        throw ValidationError(os.str());
    }
}

ModeSpec two_ion_modes(double omega_com, double omega_tilt, double eta) {
    if (!(omega_tilt > 0.0) || !(omega_com > omega_tilt))
        throw ValidationError("two_ion_modes: require omega_com > omega_tilt > 0");
    if (eta < 0.0) throw ValidationError("two_ion_modes: eta must be >= 0");
    ModeSpec spec;
    spec.num_ions = 2;
    spec.mode_freqs = {omega_com, omega_tilt};
    const double s = 1.0 / std::sqrt(2.0);
    spec.coupling.resize(2, 2);
    spec.coupling << s, s, s, -s;
    spec.lamb_dicke = {eta, eta};
    spec.drift_ratios = {1.0, 1.0};
    spec.validate();
    return spec;
}

std::vector<double> chain_equilibrium(int n, int max_iters, double tol) {
    if (n < 1) throw ValidationError("chain_equilibrium: num_ions must be >= 1");
    std::vector<double> u(n);
    // Empirical even-spacing seed; accurate enough for Newton to converge from.
    const double spread = 2.018 / std::pow(double(n), 0.559);
    for (int i = 0; i < n; ++i) u[i] = (i - 0.5 * (n - 1)) * spread;

    Eigen::VectorXd g(n);
    Eigen::MatrixXd h(n, n);
    auto gradient_norm = [&](const std::vector<double>& x) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            double gi = x[i];
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double d = x[i] - x[j];
                gi -= (d > 0 ? 1.0 : -1.0) / (d * d);
            }
            g[i] = gi;
            worst = std::max(worst, std::abs(gi));
        }
        return worst;
    };

    double gnorm = gradient_norm(u);
    for (int iter = 0; iter < max_iters; ++iter) {
        if (gnorm < tol) return u;
        h.setZero();
        for (int i = 0; i < n; ++i) {
            double diag = 1.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double d3 = std::pow(std::abs(u[i] - u[j]), 3);
                diag += 2.0 / d3;
                h(i, j) = -2.0 / d3;
            }
            h(i, i) = diag;
        }
        const Eigen::VectorXd step = h.ldlt().solve(g);
        // Damped update: backtrack until the residual shrinks.
        double lambda = 1.0;
        std::vector<double> trial(n);
        for (int bt = 0; bt < 40; ++bt) {
            for (int i = 0; i < n; ++i) trial[i] = u[i] - lambda * step[i];
            const double gn = gradient_norm(trial);
            if (gn < gnorm) {
                u = trial;
                gnorm = gn;
                break;
            }
            lambda *= 0.5;
            if (bt == 39)
                throw NumericError("chain_equilibrium: Newton backtracking stalled");
        }
    }
    if (gnorm >= tol)
        throw NumericError("chain_equilibrium: Newton did not converge after " +
                           std::to_string(max_iters) + " iterations");
    return u;
}

ModeSpec chain_modes(int num_ions, double axial_freq, double radial_freq, double eta_com) {
    if (num_ions < 2) throw ValidationError("chain_modes: num_ions must be >= 2");
    if (!(axial_freq > 0.0) || !(radial_freq > 0.0))
        throw ValidationError("chain_modes: frequencies must be positive");
    if (!(radial_freq > axial_freq))
        throw ValidationError("chain_modes: radial_freq must exceed axial_freq");
    if (eta_com < 0.0) throw ValidationError("chain_modes: eta_com must be >= 0");

    const auto u = chain_equilibrium(num_ions);
    const int n = num_ions;
    const double r2 = (radial_freq / axial_freq) * (radial_freq / axial_freq);

    // Radial Hessian in units of the axial frequency squared.
    Eigen::MatrixXd kmat(n, n);
    kmat.setZero();
    for (int i = 0; i < n; ++i) {
        double diag = r2;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d3 = std::pow(std::abs(u[i] - u[j]), 3);
            diag -= 1.0 / d3;
            kmat(i, j) = 1.0 / d3;
        }
        kmat(i, i) = diag;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kmat);
    if (eig.info() != Eigen::Success)
        throw NumericError("chain_modes: radial Hessian eigendecomposition failed");

    // Eigen returns ascending eigenvalues; modes are reported descending (COM first).
    ModeSpec spec;
    spec.num_ions = n;
    spec.coupling.resize(n, n);
    spec.mode_freqs.resize(n);
    spec.lamb_dicke.resize(n);
    spec.drift_ratios.assign(n, 1.0);
    for (int k = 0; k < n; ++k) {
        const int src = n - 1 - k;
        const double lambda = eig.eigenvalues()[src];
        if (!(lambda > 0.0)) {
            std::ostringstream os;
            os << "chain_modes: radial mode " << k << " is unstable (lambda = " << lambda
               << " axial units); increase radial_freq (zig-zag threshold)";
            throw NumericError(os.str());
        }
        spec.mode_freqs[k] = axial_freq * std::sqrt(lambda);
        Eigen::VectorXd v = eig.eigenvectors().col(src);
        for (int i = 0; i < n; ++i) {
            if (std::abs(v[i]) > 1e-12) {
                if (v[i] < 0) v = -v;
                break;
            }
        }
        spec.coupling.col(k) = v;
    }
    const double omega_com = spec.mode_freqs[0];
    for (int k = 0; k < n; ++k)
        spec.lamb_dicke[k] = eta_com * std::sqrt(omega_com / spec.mode_freqs[k]);
    spec.validate();
    return spec;
}

}  // namespace msgate
