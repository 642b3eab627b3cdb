#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "msgate/gate_kernel.hpp"

namespace msgate {

// Stochastic noise parameters for the master-equation path. Rates are per
// mode (heating) or shared (coherence times); T2 values are seconds, infinity
// disables the channel. initial_nbar seeds the thermal mode occupation.
struct NoiseModel {
    std::vector<double> heating_rates;  // quanta/s, per mode
    double motional_T2 = std::numeric_limits<double>::infinity();  // s
    double carrier_T2 = std::numeric_limits<double>::infinity();   // s
    std::vector<double> initial_nbar;   // per mode, default zeros

    bool is_noiseless() const;
    void validate(int num_modes) const;
};

struct BellOutputs {
    double p00 = 0.0;
    double p11 = 0.0;
    double p01_10 = 0.0;
    double contrast = 0.0;   // 2 |rho_{00,11}|
    double fidelity = 0.0;   // (P00 + P11)/2 + |rho_{00,11}|
    Eigen::Matrix4cd rho;    // spin density matrix, computational basis 00,01,10,11
};

struct ScanPoint {
    double offset = 0.0;  // rad/s
    double p00 = 0.0, p11 = 0.0, p01_10 = 0.0, contrast = 0.0, fidelity = 0.0;
    double err_alpha = 0.0, err_theta = 0.0;  // single-gate diagnostics at this offset
};

struct ScanResult {
    int repeats = 1;
    std::vector<ScanPoint> points;
};

struct LindbladResult {
    BellOutputs outputs;
    double trace_error = 0.0;
    std::vector<double> top_fock_population;  // per mode, at final time
    std::vector<double> final_nbar;           // per-mode <n> at final time
    long rhs_evaluations = 0;
    long steps = 0;
};

struct LindbladOptions {
    std::vector<int> n_max;     // per-mode truncation (Fock levels 0..n_max)
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double truncation_limit = 1e-4;  // max allowed top-level population
};

// Exact closed-form evolution of |00> tensor thermal(nbar): sigma_x branch
// decomposition with thermally averaged displacement overlaps. nbar may be
// empty (vacuum) or one entry per mode.
BellOutputs ideal_populations(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                              const std::vector<double>& nbar = {});

// Same observables from precomputed gate parameters (alpha rows = pair ions).
BellOutputs bell_outputs_from_parameters(const Eigen::MatrixXcd& alpha, double theta,
                                         const std::vector<double>& nbar);

// Detuning scan: for each offset, shift the pulse, build the repeated-gate
// sequence (motional phases carry over between gates) and evaluate either the
// analytic path or, when noise is present, the master-equation path.
ScanResult detuning_scan(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                         const std::vector<double>& offsets, int repeats = 1,
                         const std::optional<NoiseModel>& noise = {},
                         const LindbladOptions& options = {});

// Fock-truncated master-equation propagation of Eq.-of-motion with piecewise
// constant drive parameters, in the frame where each segment's generator is
// constant. Collapse channels: heating (a and a^dag at the heating rate),
// motional dephasing (n_k at 2/T2), collective carrier dephasing
// (sigma_z sum at 1/(2 T2)). Noiseless vacuum inputs take a pure-state fast
// path through the same integrator machinery.
LindbladResult lindblad_sim(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                            const NoiseModel& noise, const LindbladOptions& options);

struct GateErrorFit {
    double error_per_gate = 0.0;
    double std_error = 0.0;
    double intercept = 0.0;
};

// Least-squares slope of state error (1 - fidelity) versus gate count.
GateErrorFit repeated_gate_fit(const std::vector<double>& gate_counts,
                               const std::vector<double>& fidelities);

}  // namespace msgate
