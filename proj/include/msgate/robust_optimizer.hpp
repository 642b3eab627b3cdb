#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "msgate/gate_kernel.hpp"

namespace msgate {

// Frequency-modulated robust-pulse search. The pulse is time-symmetric with
// num_segments equal-duration segments and uniform amplitude; the free
// variables are the first num_segments/2 detunings. The cost is
//   sum_{j in pair} sum_k (|alpha_j^k|^2 + avg_weight |alphabar_j^k|^2)
// plus an optional filter-function suppression term at one frequency.
struct OptimizerConfig {
    int num_segments = 28;        // total, even
    double gate_time = 0.0;       // s
    double target_angle = pi / 4; // rad, pi/8 for concatenation halves
    double max_amplitude = 0.0;   // rad/s; also the working amplitude during the search
    double detuning_lo = 0.0;     // rad/s, absolute drive detuning bounds
    double detuning_hi = 0.0;
    std::optional<double> initial_center;            // rad/s
    std::optional<std::vector<double>> initial_half; // explicit first-half detunings (rad/s)

    struct FfSuppression {
        double freq_hz = 0.0;
        double weight = 10.0;
    };
    std::optional<FfSuppression> ff_suppression;

    double avg_weight = 1.0;  // weight w on |alphabar|^2
    int num_starts = 8;
    std::uint64_t seed = 0;
    int max_iters = 400;
    double tolerance = 1e-8;  // cost threshold for convergence

    void validate() const;
};

struct OptimizerReport {
    PulseProgram pulse;               // calibrated to target_angle
    std::vector<double> cost_history; // best-so-far per accepted iterate, winning start
    GateDiagnostics final_diagnostics;
    bool converged = false;
    double final_cost = 0.0;          // at the working amplitude, before calibration
    double required_amplitude = 0.0;  // rad/s, scale * working amplitude
    int best_start = -1;
    bool robustness_check = false;    // post-hoc |dalpha/domega| assertion
};

// Multi-start quasi-Newton search with analytic gradients; deterministic for a
// given config (fixed start list drawn from the seed, fixed iteration order).
// Non-convergence is reported, not thrown; an amplitude calibration that would
// exceed max_amplitude throws, naming the required amplitude.
OptimizerReport optimize_fm(const OptimizerConfig& config, const ModeSpec& modes, IonPair pair);

// scale_amplitude(pulse, sqrt(target / Theta)). Throws if Theta is zero or of
// opposite sign to the target.
PulseProgram calibrate_angle(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                             double target);

}  // namespace msgate
