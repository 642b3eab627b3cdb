#include "msgate/gate_kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "msgate/errors.hpp"

namespace msgate {

void validate_pair(const ModeSpec& modes, IonPair pair) {
    if (pair.j1 == pair.j2) throw ValidationError("ion pair: indices must differ");
    if (pair.j1 < 0 || pair.j1 >= modes.num_ions || pair.j2 < 0 || pair.j2 >= modes.num_ions)
        throw ValidationError("ion pair: index outside [0, num_ions)");
}

namespace detail {

cplx segment_moment(double mu, double T, int n) {
    const double x = mu * T;
    if (std::abs(x) < 0.1) {
        // sum_m (i mu)^m T^(n+m+1) / (m! (n+m+1)); 18 terms put the tail far
        // below double precision for |x| <= 0.1 at every order used here.
        cplx term(std::pow(T, n + 1), 0.0);
        cplx acc = term / double(n + 1);
        const cplx z = iu * mu * T;
        for (int m = 1; m < 18; ++m) {
            term *= z / double(m);
            acc += term / double(n + m + 1);
        }
        return acc;
    }
    const cplx eix = std::polar(1.0, x);
    const cplx imu = iu * mu;
    cplx result = (eix - 1.0) / imu;
    double tpow = 1.0;
    for (int m = 1; m <= n; ++m) {
        tpow *= T;
        result = (tpow * eix - double(m) * result) / imu;
    }
    return result;
}

int ModePulseTable::segment_at(double t) const {
    // Boundaries belong to the later segment except at the very end.
    int lo = 0, hi = num_segments - 1;
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (t < t0[mid] + dt[mid])
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

ModePulseTable build_table(const PulseProgram& pulse, double mode_freq) {
    ModePulseTable tab;
    tab.num_segments = static_cast<int>(pulse.size());
    tab.tau = pulse.total_duration();
    tab.t0.resize(tab.num_segments);
    tab.dt.resize(tab.num_segments);
    tab.omega.resize(tab.num_segments);
    tab.mu.resize(tab.num_segments);
    tab.theta0.resize(tab.num_segments);
    tab.eitheta0.resize(tab.num_segments);
    double t = 0.0, theta = 0.0;
    for (int i = 0; i < tab.num_segments; ++i) {
        const Segment& s = pulse.segments()[i];
        tab.t0[i] = t;
        tab.dt[i] = s.duration;
        tab.omega[i] = pulse.effective_amplitude(i);
        tab.mu[i] = mode_freq - s.detuning;
        tab.theta0[i] = theta;
        tab.eitheta0[i] = std::polar(1.0, theta);
        theta += tab.mu[i] * s.duration;
        t += s.duration;
    }
    return tab;
}

cplx weighted_integral(const ModePulseTable& tab, double t_end) {
    cplx acc = 0.0;
    for (int i = 0; i < tab.num_segments; ++i) {
        if (t_end <= tab.t0[i]) break;
        const double len = std::min(t_end - tab.t0[i], tab.dt[i]);
        acc += tab.omega[i] * tab.eitheta0[i] * segment_moment(tab.mu[i], len, 0);
    }
    return acc;
}

cplx first_moment_integral(const ModePulseTable& tab) {
    cplx acc = 0.0;
    for (int i = 0; i < tab.num_segments; ++i) {
        const cplx m0 = segment_moment(tab.mu[i], tab.dt[i], 0);
        const cplx m1 = segment_moment(tab.mu[i], tab.dt[i], 1);
        acc += tab.omega[i] * tab.eitheta0[i] * (tab.t0[i] * m0 + m1);
    }
    return acc;
}

namespace {

// int_0^D int_0^s sin(mu (s-u)) du ds = (mu D - sin(mu D)) / mu^2.
double same_segment_sin(double mu, double D) {
    const double y = mu * D;
    if (std::abs(y) < 0.1) {
        const double y2 = y * y;
        return D * D *
               (y / 6.0 -
                y * y2 / 120.0 * (1.0 - y2 / 42.0 * (1.0 - y2 / 72.0 * (1.0 - y2 / 110.0))));
    }
    return (y - std::sin(y)) / (mu * mu);
}

// int_0^D v (D - v) cos(mu v) dv.
double same_segment_vcos(double mu, double D) {
    const double y = mu * D;
    if (std::abs(y) < 0.1) {
        const double y2 = y * y;
        const double d3 = D * D * D;
        return d3 * (1.0 / 6.0 +
                     y2 * (-1.0 / 40.0 +
                           y2 * (1.0 / 1008.0 + y2 * (-1.0 / 51840.0 + y2 / 4435200.0))));
    }
    const double c = std::cos(y), s = std::sin(y);
    const double mu2 = mu * mu;
    const double int_vcos = (c + y * s - 1.0) / mu2;
    const double int_v2cos = (2.0 * y * c + (y * y - 2.0) * s) / (mu2 * mu);
    return D * int_vcos - int_v2cos;
}

// 64-point Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton
// iteration on the Legendre polynomial.
struct Gauss64 {
    std::array<double, 64> x{}, w{};
    Gauss64() {
        constexpr int n = 64;
        for (int i = 0; i < n / 2; ++i) {
            double z = std::cos(pi * (i + 0.75) / (n + 0.5));
            double p1 = 0.0, pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                p1 = 1.0;
                double p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                const double dz = p1 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
        }
    }
};

const Gauss64& gauss64() {
    static const Gauss64 g;
    return g;
}

}  // namespace

double theta_kernel(const ModePulseTable& tab) {
    double acc = 0.0;
    cplx prefix = 0.0;
    for (int m = 0; m < tab.num_segments; ++m) {
        const cplx f = tab.omega[m] * tab.eitheta0[m] * segment_moment(tab.mu[m], tab.dt[m], 0);
        acc += std::imag(f * std::conj(prefix));
        acc += tab.omega[m] * tab.omega[m] * same_segment_sin(tab.mu[m], tab.dt[m]);
        prefix += f;
    }
    return acc;
}

double theta_kernel_derivative(const ModePulseTable& tab) {
    double acc = 0.0;
    cplx prefix0 = 0.0, prefix1 = 0.0;
    for (int m = 0; m < tab.num_segments; ++m) {
        const cplx w = tab.omega[m] * tab.eitheta0[m];
        const cplx g0 = w * segment_moment(tab.mu[m], tab.dt[m], 0);
        const cplx g1 = w * (tab.t0[m] * segment_moment(tab.mu[m], tab.dt[m], 0) +
                             segment_moment(tab.mu[m], tab.dt[m], 1));
        acc += std::real(g1 * std::conj(prefix0) - g0 * std::conj(prefix1));
        acc += tab.omega[m] * tab.omega[m] * same_segment_vcos(tab.mu[m], tab.dt[m]);
        prefix0 += g0;
        prefix1 += g1;
    }
    return acc;
}

double theta_kernel_higher(const ModePulseTable& tab, int order) {
    const auto& g = gauss64();
    const double shift = order * pi / 2.0;
    auto kernel = [&](int sm, double t, int sl, double tp) {
        const double dtheta = tab.phase(sm, t) - tab.phase(sl, tp);
        return tab.omega[sm] * tab.omega[sl] * std::pow(t - tp, order) *
               std::sin(dtheta + shift);
    };
    double acc = 0.0;
    for (int m = 0; m < tab.num_segments; ++m) {
        const double am = tab.t0[m], hm = 0.5 * tab.dt[m];
        // Triangle t > t' within segment m: inner interval scales with the outer node.
        for (int i = 0; i < 64; ++i) {
            const double t = am + hm * (1.0 + g.x[i]);
            const double hi = 0.5 * (t - am);
            double inner = 0.0;
            for (int jn = 0; jn < 64; ++jn)
                inner += g.w[jn] * kernel(m, t, m, am + hi * (1.0 + g.x[jn]));
            acc += g.w[i] * hm * hi * inner;
        }
        // Full rectangles against every earlier segment.
        for (int l = 0; l < m; ++l) {
            const double al = tab.t0[l], hl = 0.5 * tab.dt[l];
            double block = 0.0;
            for (int i = 0; i < 64; ++i) {
                const double t = am + hm * (1.0 + g.x[i]);
                double inner = 0.0;
                for (int jn = 0; jn < 64; ++jn)
                    inner += g.w[jn] * kernel(m, t, l, al + hl * (1.0 + g.x[jn]));
                block += g.w[i] * inner;
            }
            acc += hm * hl * block;
        }
    }
    return acc;
}

}  // namespace detail

namespace {

void check_mode_ion(const ModeSpec& modes, int ion, int mode) {
    if (ion < 0 || ion >= modes.num_ions) throw ValidationError("ion index out of range");
    if (mode < 0 || mode >= modes.num_modes()) throw ValidationError("mode index out of range");
}

}  // namespace

cplx displacement(const PulseProgram& pulse, const ModeSpec& modes, int ion, int mode,
                  double t_end) {
    check_mode_ion(modes, ion, mode);
    if (!(t_end > 0.0) || t_end > pulse.total_duration() * (1.0 + 1e-12))
        throw ValidationError("displacement: t_end outside (0, total duration]");
    const auto tab = detail::build_table(pulse, modes.mode_freqs[mode]);
    const double pref = 0.5 * modes.lamb_dicke[mode] * modes.coupling(ion, mode);
    return pref * detail::weighted_integral(tab, t_end);
}

cplx avg_displacement(const PulseProgram& pulse, const ModeSpec& modes, int ion, int mode) {
    check_mode_ion(modes, ion, mode);
    const auto tab = detail::build_table(pulse, modes.mode_freqs[mode]);
    cplx acc = 0.0, running = 0.0;
    for (int i = 0; i < tab.num_segments; ++i) {
        const cplx m0 = detail::segment_moment(tab.mu[i], tab.dt[i], 0);
        const cplx m1 = detail::segment_moment(tab.mu[i], tab.dt[i], 1);
        // int over this segment of alpha(t): carried prefix plus the segment's
        // own double antiderivative D*I0 - I1.
        acc += running * tab.dt[i] + tab.omega[i] * tab.eitheta0[i] * (tab.dt[i] * m0 - m1);
        running += tab.omega[i] * tab.eitheta0[i] * m0;
    }
    const double pref = 0.5 * modes.lamb_dicke[mode] * modes.coupling(ion, mode);
    return pref * acc / tab.tau;
}

cplx alpha_derivative(const PulseProgram& pulse, const ModeSpec& modes, int ion, int mode) {
    check_mode_ion(modes, ion, mode);
    const auto tab = detail::build_table(pulse, modes.mode_freqs[mode]);
    const double pref = 0.5 * modes.lamb_dicke[mode] * modes.coupling(ion, mode);
    return iu * pref * detail::first_moment_integral(tab);
}

double rotation_angle(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair) {
    validate_pair(modes, pair);
    double theta = 0.0;
    for (int k = 0; k < modes.num_modes(); ++k) {
        const double eta = modes.lamb_dicke[k];
        const double bb = modes.coupling(pair.j1, k) * modes.coupling(pair.j2, k);
        const auto tab = detail::build_table(pulse, modes.mode_freqs[k]);
        theta += 0.5 * eta * eta * bb * detail::theta_kernel(tab);
    }
    return theta;
}

std::vector<double> theta_derivative(const PulseProgram& pulse, const ModeSpec& modes,
                                     IonPair pair, int order) {
    validate_pair(modes, pair);
    if (order < 1) throw ValidationError("theta_derivative: order must be >= 1");
    std::vector<double> out(modes.num_modes());
    for (int k = 0; k < modes.num_modes(); ++k) {
        const double eta = modes.lamb_dicke[k];
        const double bb = modes.coupling(pair.j1, k) * modes.coupling(pair.j2, k);
        const auto tab = detail::build_table(pulse, modes.mode_freqs[k]);
        const double kernel = (order == 1) ? detail::theta_kernel_derivative(tab)
                                           : detail::theta_kernel_higher(tab, order);
        out[k] = 0.5 * eta * eta * bb * kernel;
    }
    return out;
}

GateDiagnostics diagnostics(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                            int max_order) {
    validate_pair(modes, pair);
    if (max_order < 1) throw ValidationError("diagnostics: max_order must be >= 1");
    const int num_modes = modes.num_modes();
    GateDiagnostics d;
    d.alpha.resize(2, num_modes);
    d.dalpha_domega.resize(2, num_modes);
    const int ions[2] = {pair.j1, pair.j2};
    const double tau = pulse.total_duration();

    double theta = 0.0;
    d.dtheta_domega.resize(num_modes);
    for (int k = 0; k < num_modes; ++k) {
        const auto tab = detail::build_table(pulse, modes.mode_freqs[k]);
        const cplx s0 = detail::weighted_integral(tab, tau);
        const cplx s1 = detail::first_moment_integral(tab);
        for (int r = 0; r < 2; ++r) {
            const double pref = 0.5 * modes.lamb_dicke[k] * modes.coupling(ions[r], k);
            d.alpha(r, k) = pref * s0;
            d.dalpha_domega(r, k) = iu * pref * s1;
            d.err_alpha += std::norm(d.alpha(r, k));
        }
        const double eta = modes.lamb_dicke[k];
        const double bb = modes.coupling(pair.j1, k) * modes.coupling(pair.j2, k);
        theta += 0.5 * eta * eta * bb * detail::theta_kernel(tab);
        d.dtheta_domega[k] = 0.5 * eta * eta * bb * detail::theta_kernel_derivative(tab);
        d.dtheta_weighted += modes.drift_ratios[k] * d.dtheta_domega[k];
    }
    d.theta = theta;
    d.err_theta = (theta - pi / 4.0) * (theta - pi / 4.0);

    for (int j = 2; j <= max_order; ++j) {
        const auto dj = theta_derivative(pulse, modes, pair, j);
        double weighted = 0.0;
        for (int k = 0; k < num_modes; ++k) weighted += modes.drift_ratios[k] * dj[k];
        d.higher_dtheta.push_back(weighted);
    }
    return d;
}

}  // namespace msgate
