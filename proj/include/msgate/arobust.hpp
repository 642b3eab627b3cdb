#pragma once

#include <optional>
#include <vector>

#include "msgate/gate_kernel.hpp"

namespace msgate {

// Result of an amplitude-modulated concatenation. betas are the per-seed Rabi
// multipliers; residuals are recomputed on the composite with gate_kernel.
struct AmSolution {
    std::vector<double> betas;
    PulseProgram composite;
    double residual_theta = 0.0;          // |Theta_composite - pi/4|
    std::vector<double> residual_orders;  // |sum_k r_k d^jTheta/domega_k^j| of composite, j=1..n
    std::vector<double> solve_residuals;  // linear-system residuals, same ordering with theta first
    double condition_number = 1.0;
    std::vector<double> seed_thetas;
    std::vector<double> seed_gradients;   // weighted first-order gradients of the seeds
};

// Tolerances defining a "robust seed": residual displacement error, its drift
// derivative (scaled by the gate time squared) and the angle miss accepted on
// inputs to the concatenation constructions.
struct SeedTolerance {
    double err_alpha = 1e-4;
    double dalpha_scaled = 1e-4;  // sum |dalpha/domega|^2 < dalpha_scaled * tau^2
    double angle = 1e-6;          // rad
};

// Two-ion construction: mirror the half about (omega1+omega2)/2 and concatenate,
// beta = betatilde = 1. Requires a 2-ion spec with equal Lamb-Dicke parameters
// and a robust XX(pi/8) half; verifies Theta = pi/4 and vanishing weighted
// first-order angle response on the composite.
AmSolution two_ion_arobust(const PulseProgram& half, const ModeSpec& modes, IonPair pair,
                           const SeedTolerance& tol = {});

// General A-robust concatenation: solve
//   beta^2 Theta + betatilde^2 Thetatilde = pi/4
//   beta^2 G + betatilde^2 Gtilde = 0,   G = sum_k r_k dTheta/domega_k
// for the squared amplitude factors. Throws InfeasibleError when either square
// is negative (seeds need opposite-sign weighted gradients).
AmSolution am_concatenate(const PulseProgram& p1, const PulseProgram& p2, const ModeSpec& modes,
                          IonPair pair, const std::optional<std::vector<double>>& ratios = {},
                          const SeedTolerance& tol = {});

// n-th order suppression from n+1 robust seeds: solve the (n+1)x(n+1) system
// zeroing the drift-ratio-weighted angle derivatives up to order n. Reports the
// condition number; throws on singular systems or negative beta^2.
AmSolution nth_order_arobust(const std::vector<PulseProgram>& pulses, const ModeSpec& modes,
                             IonPair pair, int order,
                             const std::optional<std::vector<double>>& ratios = {},
                             const SeedTolerance& tol = {});

}  // namespace msgate
