#include "msgate/filter_function.hpp"

#include <algorithm>
#include <cmath>

#include "msgate/errors.hpp"

namespace msgate {

void NoiseSpectrum::validate() const {
    switch (kind) {
        case Kind::static_offset:
            break;  // amplitude is a signed offset in rad/s
        case Kind::white:
            if (amplitude < 0.0) throw ValidationError("spectrum: white PSD level must be >= 0");
            break;
        case Kind::one_over_f:
            if (amplitude < 0.0) throw ValidationError("spectrum: 1/f amplitude must be >= 0");
            if (exponent <= 0.0) throw ValidationError("spectrum: 1/f exponent must be > 0");
            if (corner_hz < 0.0) throw ValidationError("spectrum: corner must be >= 0");
            break;
        case Kind::tabulated:
            if (freqs_hz.size() != psd.size() || freqs_hz.size() < 2)
                throw ValidationError("spectrum: tabulated arrays need >= 2 matched entries");
            for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
                if (!(freqs_hz[i] > 0.0))
                    throw ValidationError("spectrum: tabulated frequencies must be > 0");
                if (psd[i] < 0.0) throw ValidationError("spectrum: PSD must be >= 0");
                if (i > 0 && freqs_hz[i] <= freqs_hz[i - 1])
                    throw ValidationError("spectrum: tabulated frequencies must ascend");
            }
            break;
    }
}

double NoiseSpectrum::sample(double f_hz) const {
    switch (kind) {
        case Kind::static_offset:
            return 0.0;  // delta at f = 0; handled analytically in spectral_error
        case Kind::white:
            return amplitude;
        case Kind::one_over_f: {
            const double f_eff = std::max(f_hz, corner_hz);
            if (f_eff <= 0.0) return 0.0;
            return amplitude / std::pow(f_eff, exponent);
        }
        case Kind::tabulated: {
            if (f_hz <= freqs_hz.front()) return psd.front();
            if (f_hz >= freqs_hz.back()) return psd.back();
            const auto it = std::upper_bound(freqs_hz.begin(), freqs_hz.end(), f_hz);
            const std::size_t i = std::distance(freqs_hz.begin(), it);
            const double lf = std::log(f_hz), lf0 = std::log(freqs_hz[i - 1]),
                         lf1 = std::log(freqs_hz[i]);
            const double s0 = psd[i - 1], s1 = psd[i];
            if (s0 <= 0.0 || s1 <= 0.0)  // fall back to linear near zeros
                return s0 + (s1 - s0) * (lf - lf0) / (lf1 - lf0);
            return std::exp(std::log(s0) + (std::log(s1) - std::log(s0)) * (lf - lf0) / (lf1 - lf0));
        }
    }
    return 0.0;
}

std::vector<double> default_ff_grid(double f_min_hz, double f_max_hz, int points) {
    if (!(f_min_hz > 0.0) || !(f_max_hz > f_min_hz) || points < 2)
        throw ValidationError("ff grid: need 0 < f_min < f_max and >= 2 points");
    std::vector<double> freqs(points);
    const double step = std::log(f_max_hz / f_min_hz) / (points - 1);
    for (int i = 0; i < points; ++i) freqs[i] = f_min_hz * std::exp(step * i);
    return freqs;
}

namespace {

using detail::ModePulseTable;
using detail::segment_moment;

void check_freqs(const std::vector<double>& freqs_hz) {
    if (freqs_hz.empty()) throw ValidationError("filter function: empty frequency grid");
    for (double f : freqs_hz)
        if (!(f > 0.0)) throw ValidationError("filter function: frequencies must be > 0");
}

// int over segment m of Omega e^{i(nu t - theta(t))} dt, absolute-time phase.
cplx b_segment(const ModePulseTable& tab, int m, double nu) {
    const cplx phase = std::polar(1.0, nu * tab.t0[m] - tab.theta0[m]);
    return tab.omega[m] * phase * segment_moment(nu - tab.mu[m], tab.dt[m], 0);
}

// int over segment m of Omega e^{i(nu t + theta(t))} dt.
cplx a_segment(const ModePulseTable& tab, int m, double nu) {
    const cplx phase = std::polar(1.0, nu * tab.t0[m] + tab.theta0[m]);
    return tab.omega[m] * phase * segment_moment(nu + tab.mu[m], tab.dt[m], 0);
}

// Ordered same-segment block of the e^{i nu t} branch:
// Omega^2 e^{i nu t0} * int_0^D e^{i nu s} 2 sin(mu s)/mu ds.
cplx same_segment_a(const ModePulseTable& tab, int m, double nu) {
    const double mu = tab.mu[m], D = tab.dt[m];
    cplx j;
    if (std::abs(mu * D) < 0.1) {
        // 2 s sinc(mu s) expanded in odd moments of e^{i nu s}.
        const double mu2 = mu * mu;
        j = 2.0 * segment_moment(nu, D, 1) - (mu2 / 3.0) * segment_moment(nu, D, 3) +
            (mu2 * mu2 / 60.0) * segment_moment(nu, D, 5) -
            (mu2 * mu2 * mu2 / 2520.0) * segment_moment(nu, D, 7);
    } else {
        j = (segment_moment(nu + mu, D, 0) - segment_moment(nu - mu, D, 0)) / (iu * mu);
    }
    return tab.omega[m] * tab.omega[m] * std::polar(1.0, nu * tab.t0[m]) * j;
}

// Ordered double integral with the (e^{i nu t} - e^{i nu t'}) weight against
// 2 cos(theta(t) - theta(t')) for one mode, over all ordered segment pairs.
cplx theta_ff_kernel(const ModePulseTable& tab, double nu) {
    cplx t_a = 0.0, t_b = 0.0;
    cplx pf = 0.0, pa = 0.0, pb = 0.0;  // prefix sums over earlier segments
    for (int m = 0; m < tab.num_segments; ++m) {
        const cplx f_m = tab.omega[m] * tab.eitheta0[m] * segment_moment(tab.mu[m], tab.dt[m], 0);
        const cplx a_m = a_segment(tab, m, nu);
        const cplx b_m = b_segment(tab, m, nu);

        t_a += a_m * std::conj(pf) + b_m * pf;
        t_b += f_m * pb + std::conj(f_m) * pa;

        const cplx same_a = same_segment_a(tab, m, nu);
        t_a += same_a;
        // Ordered block with the e^{i nu t'} weight: full separable square
        // minus the e^{i nu t} ordered block (kernel symmetric in t, t').
        t_b += a_m * std::conj(f_m) + b_m * f_m - same_a;

        pf += f_m;
        pa += a_m;
        pb += b_m;
    }
    return t_a - t_b;
}

}  // namespace

std::vector<double> ff_alpha(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                             const std::vector<double>& freqs_hz) {
    validate_pair(modes, pair);
    check_freqs(freqs_hz);
    std::vector<double> out(freqs_hz.size(), 0.0);
    for (int k = 0; k < modes.num_modes(); ++k) {
        const auto tab = detail::build_table(pulse, modes.mode_freqs[k]);
        const double eta2 = modes.lamb_dicke[k] * modes.lamb_dicke[k];
        const double bsq = modes.coupling(pair.j1, k) * modes.coupling(pair.j1, k) +
                           modes.coupling(pair.j2, k) * modes.coupling(pair.j2, k);
        for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
            const double nu = two_pi * freqs_hz[i];
            cplx s = 0.0;
            for (int m = 0; m < tab.num_segments; ++m) s += b_segment(tab, m, nu);
            out[i] += bsq * std::norm(0.5 * eta2 * s);
        }
    }
    return out;
}

std::vector<double> ff_theta(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                             const std::vector<double>& freqs_hz) {
    validate_pair(modes, pair);
    check_freqs(freqs_hz);
    std::vector<detail::ModePulseTable> tabs;
    tabs.reserve(modes.num_modes());
    for (int k = 0; k < modes.num_modes(); ++k)
        tabs.push_back(detail::build_table(pulse, modes.mode_freqs[k]));

    std::vector<double> out(freqs_hz.size(), 0.0);
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
        const double nu = two_pi * freqs_hz[i];
        cplx total = 0.0;
        for (int k = 0; k < modes.num_modes(); ++k) {
            const double eta2 = modes.lamb_dicke[k] * modes.lamb_dicke[k];
            const double bb = modes.coupling(pair.j1, k) * modes.coupling(pair.j2, k);
            // theta_ff_kernel carries the 2cos decomposition; the extra 1/2
            // restores cos, and eta^2/2 is the formula's per-mode weight.
            total += 0.5 * eta2 * bb * 0.5 * theta_ff_kernel(tabs[k], nu);
        }
        out[i] = std::norm(total);
    }
    return out;
}

FilterFunctionCurve filter_functions(const PulseProgram& pulse, const ModeSpec& modes,
                                     IonPair pair, const std::vector<double>& freqs_hz) {
    FilterFunctionCurve curve;
    curve.freqs_hz = freqs_hz;
    curve.f_alpha = ff_alpha(pulse, modes, pair, freqs_hz);
    curve.f_theta = ff_theta(pulse, modes, pair, freqs_hz);
    return curve;
}

double loglog_slope(const std::vector<double>& freqs, const std::vector<double>& values,
                    double f_cap_hz) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        if (freqs[i] > f_cap_hz || values[i] <= 0.0) continue;
        const double x = std::log(freqs[i]), y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw NumericError("loglog_slope: fewer than 2 usable points");
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw NumericError("loglog_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

namespace {

struct PowerLawFit {
    double log_a = 0.0;
    double p = 0.0;
    bool ok = false;
    double value(double f) const { return std::exp(log_a + p * std::log(f)); }
};

// Least-squares power law F ~ A f^p over the lowest decade of the grid.
PowerLawFit fit_low_frequency(const std::vector<double>& freqs, const std::vector<double>& vals) {
    PowerLawFit fit;
    const double cap = freqs.front() * 10.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < freqs.size() && freqs[i] <= cap; ++i) {
        if (vals[i] <= 0.0) continue;
        const double x = std::log(freqs[i]), y = std::log(vals[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return fit;
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) return fit;
    fit.p = (n * sxy - sx * sy) / denom;
    fit.log_a = (sy - fit.p * sx) / n;
    fit.ok = true;
    return fit;
}

double trapezoid_log(const std::vector<double>& freqs, const std::vector<double>& g, int stride) {
    // int g df = int (g f) dln f, trapezoid on the log-spaced grid.
    double acc = 0.0;
    std::size_t prev = 0;
    for (std::size_t i = stride; i < freqs.size(); i += stride) {
        const double dlnf = std::log(freqs[i] / freqs[prev]);
        acc += 0.5 * (g[i] * freqs[i] + g[prev] * freqs[prev]) * dlnf;
        prev = i;
    }
    return acc;
}

}  // namespace

SpectralError spectral_error(const FilterFunctionCurve& curve, const NoiseSpectrum& spectrum) {
    spectrum.validate();
    if (curve.freqs_hz.size() < 4 || curve.freqs_hz.size() != curve.f_alpha.size() ||
        curve.freqs_hz.size() != curve.f_theta.size())
        throw ValidationError("spectral_error: curve needs >= 4 matched samples");

    SpectralError result;
    const auto& freqs = curve.freqs_hz;

    auto channel = [&](const std::vector<double>& fvals) -> double {
        const PowerLawFit fit = fit_low_frequency(freqs, fvals);
        if (spectrum.kind == NoiseSpectrum::Kind::static_offset) {
            // Static offset: eps^2 times the fitted F/(2 pi f)^2 limit,
            // evaluated at the lowest grid frequency.
            if (!fit.ok) return 0.0;
            const double f0 = freqs.front();
            const double eps2 = spectrum.amplitude * spectrum.amplitude;
            return eps2 * fit.value(f0) / (two_pi * f0 * two_pi * f0);
        }
        std::vector<double> g(freqs.size());
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            const double w = two_pi * freqs[i];
            g[i] = spectrum.sample(freqs[i]) * fvals[i] / (w * w);
        }
        double total = trapezoid_log(freqs, g, 1);
        const double coarse = trapezoid_log(freqs, g, 2);
        if (std::abs(total - coarse) > 0.05 * std::max(std::abs(total), 1e-300)) {
            result.accuracy_warning = true;
            result.warning_detail = "frequency grid too coarse for the error integral";
        }
        // Analytic tail below the grid using the fitted power laws of F and S.
        if (fit.ok) {
            const double f0 = freqs.front();
            const double s0 = spectrum.sample(f0), s1 = spectrum.sample(2.0 * f0);
            double gamma = 0.0;
            if (s0 > 0.0 && s1 > 0.0) gamma = -std::log(s1 / s0) / std::log(2.0);
            const double q = fit.p - 2.0 - gamma;
            if (q > -1.0 + 1e-9) {
                total += s0 * fit.value(f0) / (two_pi * f0 * two_pi * f0) * f0 / (q + 1.0);
            } else if (s0 > 0.0 && fit.value(f0) > 0.0) {
                result.accuracy_warning = true;
                result.warning_detail = "error integral diverges below the grid";
            }
        }
        return 2.0 * total;  // symmetrize over +-f
    };

    result.err_alpha = channel(curve.f_alpha);
    result.err_theta = channel(curve.f_theta);
    return result;
}

}  // namespace msgate
