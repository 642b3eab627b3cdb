#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "msgate/mode_model.hpp"
#include "msgate/pulse.hpp"
#include "msgate/units.hpp"

namespace msgate {

struct IonPair {
    int j1 = 0;
    int j2 = 1;
};

void validate_pair(const ModeSpec& modes, IonPair pair);

// Magnus-expansion quantities of a (pulse, modes, pair) triple. alpha rows are
// the two ions of the pair, columns the modes. Derivatives are with respect to
// the mode frequency of the same mode (units: s for first order, s^j for order j).
struct GateDiagnostics {
    Eigen::MatrixXcd alpha;         // 2 x K, dimensionless
    Eigen::MatrixXcd dalpha_domega; // 2 x K, s
    double theta = 0.0;             // rad
    std::vector<double> dtheta_domega;  // per mode, s
    double dtheta_weighted = 0.0;       // sum_k r_k dTheta/domega_k, s
    std::vector<double> higher_dtheta;  // sum_k r_k d^jTheta/domega_k^j, j = 2..max_order
    double err_alpha = 0.0;  // sum over pair ions and modes of |alpha|^2
    double err_theta = 0.0;  // (theta - pi/4)^2
};

// Displacement alpha_j^k(t_end) = (eta_k b_j^k / 2) * integral of
// Omega(t) e^{i theta_k(t)} dt, by exact per-segment antiderivatives.
// t_end must lie in (0, total duration].
cplx displacement(const PulseProgram& pulse, const ModeSpec& modes, int ion, int mode,
                  double t_end);

// Time-averaged displacement (1/tau) * integral of alpha_j^k(t) dt over the gate.
cplx avg_displacement(const PulseProgram& pulse, const ModeSpec& modes, int ion, int mode);

// d alpha_j^k / d omega_k = (i eta_k b_j^k / 2) * integral of Omega t e^{i theta} dt.
cplx alpha_derivative(const PulseProgram& pulse, const ModeSpec& modes, int ion, int mode);

// Two-qubit rotation angle Theta(tau) about sigma_x sigma_x, from the ordered
// double integral of the sin kernel; exact per-segment-pair closed forms.
double rotation_angle(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair);

// Per-mode d^j Theta / d omega_k^j. Order 1 uses closed forms; orders >= 2 use
// nested Gauss-Legendre quadrature (64 nodes per segment per axis).
std::vector<double> theta_derivative(const PulseProgram& pulse, const ModeSpec& modes,
                                     IonPair pair, int order = 1);

// Assemble everything, including sum_k r_k dTheta/domega_k and, when
// max_order >= 2, the drift-ratio-weighted higher-order angle responses.
GateDiagnostics diagnostics(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                            int max_order = 1);

namespace detail {

// integral of s^n e^{i mu s} ds over [0, T]. Stable for any mu: below
// |mu T| = 0.1 a truncated power series replaces the closed form, which
// otherwise loses up to n+1 digits of cancellation near resonance.
cplx segment_moment(double mu, double T, int n);

// Per-(pulse, mode) table of segment constants used by every closed form:
// start times, durations, effective amplitudes, mu_i = omega_k - delta_i and
// the accumulated phase at each segment start.
struct ModePulseTable {
    int num_segments = 0;
    double tau = 0.0;
    std::vector<double> t0;
    std::vector<double> dt;
    std::vector<double> omega;  // effective amplitude, scale folded in
    std::vector<double> mu;
    std::vector<double> theta0;
    std::vector<cplx> eitheta0;

    // theta_k(t) for t inside segment i.
    double phase(int i, double t) const { return theta0[i] + mu[i] * (t - t0[i]); }
    int segment_at(double t) const;
};

ModePulseTable build_table(const PulseProgram& pulse, double mode_freq);

// integral of Omega e^{i theta} over [0, t_end] (the displacement sans eta*b/2).
cplx weighted_integral(const ModePulseTable& tab, double t_end);

// integral of Omega t e^{i theta} over the full pulse.
cplx first_moment_integral(const ModePulseTable& tab);

// Ordered double integral of Omega(t) Omega(t') sin(theta(t) - theta(t')).
double theta_kernel(const ModePulseTable& tab);

// Same with the (t - t') cos kernel (first drift derivative).
double theta_kernel_derivative(const ModePulseTable& tab);

// (t - t')^j sin(theta - theta' + j pi/2) kernel by nested Gauss-Legendre.
double theta_kernel_higher(const ModePulseTable& tab, int order);

}  // namespace detail

}  // namespace msgate
