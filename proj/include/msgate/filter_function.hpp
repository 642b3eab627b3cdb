#pragma once

#include <string>
#include <vector>

#include "msgate/gate_kernel.hpp"

namespace msgate {

// Power spectral density of the uniform mode-frequency fluctuation delta(t).
// Convention: delta(t) in rad/s, f in cyclic Hz, sample() in (rad/s)^2 / Hz.
// The spectral error integral weights by 1/(2 pi f)^2 accordingly.
struct NoiseSpectrum {
    enum class Kind { static_offset, white, one_over_f, tabulated };
    Kind kind = Kind::white;
    double amplitude = 0.0;   // static: offset eps (rad/s); white: PSD level; 1/f: PSD at 1 Hz
    double exponent = 1.0;    // one_over_f: S ~ amplitude / f^exponent
    double corner_hz = 0.0;   // one_over_f: flattens below this frequency (0 = none)
    std::vector<double> freqs_hz;  // tabulated
    std::vector<double> psd;       // tabulated, log-log interpolated

    double sample(double f_hz) const;
    void validate() const;
};

struct FilterFunctionCurve {
    std::vector<double> freqs_hz;  // ascending, > 0
    std::vector<double> f_alpha;
    std::vector<double> f_theta;
};

struct SpectralError {
    double err_alpha = 0.0;
    double err_theta = 0.0;
    bool accuracy_warning = false;  // grid too coarse for the requested integral
    std::string warning_detail;
};

// Residual-displacement filter function
//   F_alpha(f) = sum_k [(b_j1^k)^2 + (b_j2^k)^2] |(eta_k^2/2) int Omega e^{i(2pi f t - theta_k)} dt|^2
// by per-segment closed forms.
std::vector<double> ff_alpha(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                             const std::vector<double>& freqs_hz);

// Rotation-angle filter function: squared modulus of the ordered double integral
// of (e^{2pi i f t} - e^{2pi i f t'}) Omega Omega' sum_k (eta_k^2/2) b b cos(dtheta_k).
std::vector<double> ff_theta(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                             const std::vector<double>& freqs_hz);

// Default log grid: 200 points, 10 Hz .. 1 MHz.
std::vector<double> default_ff_grid(double f_min_hz = 10.0, double f_max_hz = 1e6, int points = 200);

FilterFunctionCurve filter_functions(const PulseProgram& pulse, const ModeSpec& modes,
                                     IonPair pair, const std::vector<double>& freqs_hz);

// E_nu = int df S(f) / (2 pi f)^2 * F_nu(f), symmetrized over +-f, log-trapezoid
// on the curve grid. Below the grid the fitted low-frequency power law of F_nu
// is integrated analytically; a static-offset spectrum evaluates that limit.
SpectralError spectral_error(const FilterFunctionCurve& curve, const NoiseSpectrum& spectrum);

// Least-squares log-log slope of (freqs, values) over frequencies <= f_cap_hz.
double loglog_slope(const std::vector<double>& freqs, const std::vector<double>& values,
                    double f_cap_hz);

}  // namespace msgate
