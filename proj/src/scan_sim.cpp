#include "msgate/scan_sim.hpp"

#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "msgate/errors.hpp"

namespace msgate {

bool NoiseModel::is_noiseless() const {
    for (double h : heating_rates)
        if (h > 0.0) return false;
    return !(motional_T2 < std::numeric_limits<double>::infinity()) &&
           !(carrier_T2 < std::numeric_limits<double>::infinity());
}

void NoiseModel::validate(int num_modes) const {
    if (!heating_rates.empty() && static_cast<int>(heating_rates.size()) != num_modes)
        throw ValidationError("noise model: heating_rates length must match mode count");
    for (double h : heating_rates)
        if (h < 0.0 || !std::isfinite(h))
            throw ValidationError("noise model: heating rates must be finite and >= 0");
    if (!(motional_T2 > 0.0)) throw ValidationError("noise model: motional_T2 must be > 0");
    if (!(carrier_T2 > 0.0)) throw ValidationError("noise model: carrier_T2 must be > 0");
    if (!initial_nbar.empty() && static_cast<int>(initial_nbar.size()) != num_modes)
        throw ValidationError("noise model: initial_nbar length must match mode count");
    for (double n : initial_nbar)
        if (n < 0.0 || !std::isfinite(n))
            throw ValidationError("noise model: initial_nbar must be finite and >= 0");
}

namespace {

// x-basis order (+,+), (+,-), (-,+), (-,-); z-basis order 00, 01, 10, 11.
// M[z][s] = <z1 z2 | s1 s2> is the two-qubit Hadamard product.
Eigen::Matrix4cd x_to_z_matrix() {
    Eigen::Matrix4cd m;
    const double h = 0.5;
    for (int z = 0; z < 4; ++z) {
        const int z1 = (z >> 1) & 1, z2 = z & 1;
        for (int s = 0; s < 4; ++s) {
            const int m1 = (s >> 1) & 1, m2 = s & 1;  // bit set = minus branch
            const double sign = ((z1 && m1) ? -1.0 : 1.0) * ((z2 && m2) ? -1.0 : 1.0);
            m(z, s) = h * sign;
        }
    }
    return m;
}

BellOutputs outputs_from_rho_z(const Eigen::Matrix4cd& rho) {
    BellOutputs out;
    out.rho = rho;
    out.p00 = std::real(rho(0, 0));
    out.p01_10 = std::real(rho(1, 1)) + std::real(rho(2, 2));
    out.p11 = std::real(rho(3, 3));
    out.contrast = 2.0 * std::abs(rho(0, 3));
    out.fidelity = 0.5 * (out.p00 + out.p11) + std::abs(rho(0, 3));
    return out;
}

std::vector<double> resolve_nbar(const std::vector<double>& nbar, int num_modes) {
    if (nbar.empty()) return std::vector<double>(num_modes, 0.0);
    if (static_cast<int>(nbar.size()) != num_modes)
        throw ValidationError("nbar: length must match mode count");
    for (double n : nbar)
        if (n < 0.0) throw ValidationError("nbar: entries must be >= 0");
    return nbar;
}

}  // namespace

BellOutputs bell_outputs_from_parameters(const Eigen::MatrixXcd& alpha, double theta,
                                         const std::vector<double>& nbar) {
    const int num_modes = static_cast<int>(alpha.cols());
    const std::vector<double> nb = resolve_nbar(nbar, num_modes);
    const double sgn[2] = {1.0, -1.0};

    Eigen::Matrix4cd rho_x;
    for (int s = 0; s < 4; ++s) {
        const double s1 = sgn[(s >> 1) & 1], s2 = sgn[s & 1];
        for (int sp = 0; sp < 4; ++sp) {
            const double sp1 = sgn[(sp >> 1) & 1], sp2 = sgn[sp & 1];
            cplx val = 0.25 * std::polar(1.0, theta * (s1 * s2 - sp1 * sp2));
            for (int k = 0; k < num_modes; ++k) {
                const cplx g = s1 * alpha(0, k) + s2 * alpha(1, k);
                const cplx gp = sp1 * alpha(0, k) + sp2 * alpha(1, k);
                // Thermal displacement overlap <D(gp)^dag D(g)>.
                val *= std::polar(1.0, std::imag(g * std::conj(gp)));
                val *= std::exp(-std::norm(g - gp) * (nb[k] + 0.5));
            }
            rho_x(s, sp) = val;
        }
    }
    const Eigen::Matrix4cd m = x_to_z_matrix();
    return outputs_from_rho_z(m * rho_x * m.adjoint());
}

BellOutputs ideal_populations(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                              const std::vector<double>& nbar) {
    validate_pair(modes, pair);
    const int num_modes = modes.num_modes();
    Eigen::MatrixXcd alpha(2, num_modes);
    const double tau = pulse.total_duration();
    double theta = 0.0;
    for (int k = 0; k < num_modes; ++k) {
        const auto tab = detail::build_table(pulse, modes.mode_freqs[k]);
        const cplx s0 = detail::weighted_integral(tab, tau);
        alpha(0, k) = 0.5 * modes.lamb_dicke[k] * modes.coupling(pair.j1, k) * s0;
        alpha(1, k) = 0.5 * modes.lamb_dicke[k] * modes.coupling(pair.j2, k) * s0;
        const double eta = modes.lamb_dicke[k];
        const double bb = modes.coupling(pair.j1, k) * modes.coupling(pair.j2, k);
        theta += 0.5 * eta * eta * bb * detail::theta_kernel(tab);
    }
    return bell_outputs_from_parameters(alpha, theta, resolve_nbar(nbar, num_modes));
}

// ---------------------------------------------------------------------------
// Master-equation propagation.
//
// Frame: V(t) = exp(-i sum_k theta_k(t) n_k) turns the interaction-picture
// Hamiltonian into a per-segment-constant generator
//   H' = sum_k mu_k n_k + (Omega_i/2) X,
//   X  = sum_{j in pair, k} eta_k b_j^k sigma_x^j (a_k + a_k^dag).
// Mode-local unitaries drop out of the spin-reduced state, so observables can
// be read directly from the frame state. All collapse operators commute with
// the frame up to phases that cancel inside each dissipator.
// ---------------------------------------------------------------------------

namespace {

using SpMat = Eigen::SparseMatrix<cplx>;
using SpMatR = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;  // fast left products

struct FockLayout {
    int num_modes = 0;
    std::vector<int> dims;     // n_max + 1 per mode
    std::vector<int> strides;  // mode k stride within the Fock part
    int fock_dim = 1;

    int level(int fock_index, int k) const { return (fock_index / strides[k]) % dims[k]; }
};

FockLayout make_layout(const std::vector<int>& n_max) {
    FockLayout lay;
    lay.num_modes = static_cast<int>(n_max.size());
    lay.dims.resize(lay.num_modes);
    lay.strides.resize(lay.num_modes);
    for (int k = 0; k < lay.num_modes; ++k) lay.dims[k] = n_max[k] + 1;
    for (int k = lay.num_modes - 1; k >= 0; --k) {
        lay.strides[k] = lay.fock_dim;
        lay.fock_dim *= lay.dims[k];
    }
    return lay;
}

// Embedded Dormand-Prince 5(4) with PI-free step control; the right-hand side
// is autonomous within one pulse segment.
struct StepStats {
    long rhs_evals = 0;
    long steps = 0;
};

template <typename State, typename Rhs>
void integrate_segment(const Rhs& rhs, State& y, double duration, double rel_tol,
                       double abs_tol, StepStats& stats) {
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    State k1 = rhs(y), k2, k3, k4, k5, k6, k7, ytmp;
    ++stats.rhs_evals;
    double t = 0.0;
    double h = duration / 16.0;
    while (duration - t > duration * 1e-12) {
        const double hs = std::min(h, duration - t);
        ytmp = y + hs * a21 * k1;
        k2 = rhs(ytmp);
        ytmp = y + hs * (a31 * k1 + a32 * k2);
        k3 = rhs(ytmp);
        ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        k4 = rhs(ytmp);
        ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        k5 = rhs(ytmp);
        ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        k6 = rhs(ytmp);
        ytmp = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = rhs(ytmp);
        stats.rhs_evals += 6;

        const State err_mat =
            hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double scale = abs_tol + rel_tol * ytmp.cwiseAbs().maxCoeff();
        const double err = err_mat.cwiseAbs().maxCoeff() / scale;

        if (err <= 1.0) {
            y = ytmp;
            t += hs;
            k1 = k7;  // first-same-as-last
            ++stats.steps;
            h = hs * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 1.0, 4.0);
        } else {
            // Rejected: y and k1 are unchanged, only the step shrinks.
            h = hs * std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (h < duration * 1e-13)
                throw NumericError("lindblad_sim: integrator step-size underflow");
        }
    }
}

std::vector<int> resolve_nmax(const LindbladOptions& options, int num_modes) {
    std::vector<int> n_max = options.n_max;
    if (n_max.empty()) n_max.assign(num_modes, 15);
    if (n_max.size() == 1 && num_modes > 1) n_max.assign(num_modes, n_max[0]);
    if (static_cast<int>(n_max.size()) != num_modes)
        throw ValidationError("lindblad: n_max needs one entry per mode");
    for (int n : n_max)
        if (n < 2) throw ValidationError("lindblad: n_max must be >= 2");
    return n_max;
}

void check_truncation(const std::vector<double>& top_pop, double limit) {
    for (std::size_t k = 0; k < top_pop.size(); ++k) {
        if (top_pop[k] > limit) {
            std::ostringstream os;
            os << "lindblad_sim: truncation overflow on mode " << k << " (top Fock population "
               << top_pop[k] << " > " << limit << "); raise n_max";
            throw NumericError(os.str());
        }
    }
}

// Pure-state fast path: zero noise, vacuum start. sigma_x eigenbranches evolve
// independently in mode space; the spin density matrix is the Gram matrix of
// the four branches.
LindbladResult lindblad_pure(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                             const std::vector<int>& n_max, const LindbladOptions& options) {
    const FockLayout lay = make_layout(n_max);
    const int dm = lay.fock_dim;
    const double sgn[2] = {1.0, -1.0};

    std::vector<Eigen::VectorXd> nvals(lay.num_modes, Eigen::VectorXd(dm));
    for (int k = 0; k < lay.num_modes; ++k)
        for (int f = 0; f < dm; ++f) nvals[k](f) = lay.level(f, k);

    // Mode-space coupling operator per spin branch.
    std::vector<SpMat> coupling(4, SpMat(dm, dm));
    for (int s = 0; s < 4; ++s) {
        const double s1 = sgn[(s >> 1) & 1], s2 = sgn[s & 1];
        std::vector<Eigen::Triplet<cplx>> trip;
        for (int k = 0; k < lay.num_modes; ++k) {
            const double g = modes.lamb_dicke[k] *
                             (s1 * modes.coupling(pair.j1, k) + s2 * modes.coupling(pair.j2, k));
            if (g == 0.0) continue;
            for (int f = 0; f < dm; ++f) {
                const int n = lay.level(f, k);
                if (n + 1 < lay.dims[k]) {
                    const double v = g * std::sqrt(double(n + 1));
                    trip.emplace_back(f + lay.strides[k], f, v);  // a^dag
                    trip.emplace_back(f, f + lay.strides[k], v);  // a
                }
            }
        }
        coupling[s].setFromTriplets(trip.begin(), trip.end());
    }

    std::vector<Eigen::VectorXcd> psi(4, Eigen::VectorXcd::Zero(dm));
    for (int s = 0; s < 4; ++s) psi[s](0) = 1.0;

    StepStats stats;
    for (std::size_t i = 0; i < pulse.size(); ++i) {
        const Segment& seg = pulse.segments()[i];
        const double om = 0.5 * pulse.effective_amplitude(i);
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(dm);
        for (int k = 0; k < lay.num_modes; ++k)
            diag += (modes.mode_freqs[k] - seg.detuning) * nvals[k];
        const Eigen::VectorXcd diagc = diag.cast<cplx>();
        for (int s = 0; s < 4; ++s) {
            auto rhs = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
                return (-iu) * (diagc.cwiseProduct(v) + om * (coupling[s] * v));
            };
            integrate_segment(rhs, psi[s], seg.duration, options.rel_tol, options.abs_tol,
                              stats);
        }
    }

    LindbladResult res;
    Eigen::Matrix4cd rho_x;
    for (int s = 0; s < 4; ++s)
        for (int sp = 0; sp < 4; ++sp) rho_x(s, sp) = 0.25 * psi[sp].dot(psi[s]);
    const Eigen::Matrix4cd m = x_to_z_matrix();
    res.outputs = outputs_from_rho_z(m * rho_x * m.adjoint());
    res.trace_error = std::abs(rho_x.trace().real() - 1.0);
    res.top_fock_population.assign(lay.num_modes, 0.0);
    res.final_nbar.assign(lay.num_modes, 0.0);
    for (int k = 0; k < lay.num_modes; ++k) {
        double pop = 0.0, nbar = 0.0;
        for (int s = 0; s < 4; ++s)
            for (int f = 0; f < dm; ++f) {
                const double w = 0.25 * std::norm(psi[s](f));
                if (lay.level(f, k) == lay.dims[k] - 1) pop += w;
                nbar += w * lay.level(f, k);
            }
        res.top_fock_population[k] = pop;
        res.final_nbar[k] = nbar;
    }
    res.rhs_evaluations = stats.rhs_evals;
    res.steps = stats.steps;
    check_truncation(res.top_fock_population, options.truncation_limit);
    return res;
}

LindbladResult lindblad_density(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                                const NoiseModel& noise, const std::vector<int>& n_max,
                                const LindbladOptions& options) {
    const FockLayout lay = make_layout(n_max);
    const int dm = lay.fock_dim;
    const int dim = 4 * dm;
    const double sgn[2] = {1.0, -1.0};

    auto fock_of = [&](int idx) { return idx % dm; };
    auto spin_of = [&](int idx) { return idx / dm; };

    std::vector<Eigen::VectorXd> nvals(lay.num_modes, Eigen::VectorXd(dim));
    for (int k = 0; k < lay.num_modes; ++k)
        for (int idx = 0; idx < dim; ++idx) nvals[k](idx) = lay.level(fock_of(idx), k);

    // Coupling operator X (real symmetric, sparse). Row-major copy serves the
    // left products, column-major the right ones.
    SpMat xop(dim, dim);
    {
        std::vector<Eigen::Triplet<cplx>> trip;
        const int ions[2] = {pair.j1, pair.j2};
        for (int r = 0; r < 2; ++r) {
            for (int k = 0; k < lay.num_modes; ++k) {
                const double g = modes.lamb_dicke[k] * modes.coupling(ions[r], k);
                if (g == 0.0) continue;
                for (int idx = 0; idx < dim; ++idx) {
                    const int s = spin_of(idx), f = fock_of(idx);
                    const int sflip = s ^ (r == 0 ? 2 : 1);
                    const int n = lay.level(f, k);
                    if (n + 1 < lay.dims[k]) {
                        const double v = g * std::sqrt(double(n + 1));
                        trip.emplace_back(sflip * dm + f + lay.strides[k], idx, v);
                        trip.emplace_back(sflip * dm + f, f + lay.strides[k] + s * dm, v);
                    }
                }
            }
        }
        xop.setFromTriplets(trip.begin(), trip.end());
    }
    const SpMatR xop_rm(xop);

    // Heating jump operators per mode with nonzero rate.
    struct Heating {
        double rate;
        SpMatR lower, raise;     // act from the left
        SpMat lower_adj, raise_adj;  // act from the right
    };
    std::vector<Heating> heat;
    for (int k = 0; k < lay.num_modes; ++k) {
        const double rate = k < static_cast<int>(noise.heating_rates.size())
                                ? noise.heating_rates[k]
                                : 0.0;
        if (rate <= 0.0) continue;
        SpMat lower(dim, dim), raise(dim, dim);
        std::vector<Eigen::Triplet<cplx>> lo, hi;
        for (int idx = 0; idx < dim; ++idx) {
            const int f = fock_of(idx), s = spin_of(idx);
            const int n = lay.level(f, k);
            if (n + 1 < lay.dims[k]) {
                const double v = std::sqrt(double(n + 1));
                lo.emplace_back(idx, s * dm + f + lay.strides[k], v);  // a
                hi.emplace_back(s * dm + f + lay.strides[k], idx, v);  // a^dag
            }
        }
        lower.setFromTriplets(lo.begin(), lo.end());
        raise.setFromTriplets(hi.begin(), hi.end());
        heat.push_back(Heating{rate, SpMatR(lower), SpMatR(raise), SpMat(lower.adjoint()),
                               SpMat(raise.adjoint())});
    }

    // Time-independent elementwise damping from all diagonal channels.
    const double kappa_m =
        noise.motional_T2 < std::numeric_limits<double>::infinity() ? 2.0 / noise.motional_T2
                                                                    : 0.0;
    const double kappa_c =
        noise.carrier_T2 < std::numeric_limits<double>::infinity() ? 0.5 / noise.carrier_T2
                                                                   : 0.0;
    Eigen::VectorXd zsum(dim);
    for (int idx = 0; idx < dim; ++idx) {
        const int s = spin_of(idx);
        zsum(idx) = sgn[(s >> 1) & 1] + sgn[s & 1];  // qubit |0> has sigma_z = +1
    }
    Eigen::MatrixXd damp = Eigen::MatrixXd::Zero(dim, dim);
    for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
            double w = -0.5 * kappa_c * (zsum(a) - zsum(b)) * (zsum(a) - zsum(b));
            for (int k = 0; k < lay.num_modes; ++k) {
                const double na = nvals[k](a), nb = nvals[k](b);
                w -= 0.5 * kappa_m * (na - nb) * (na - nb);
                const double rate = k < static_cast<int>(noise.heating_rates.size())
                                        ? noise.heating_rates[k]
                                        : 0.0;
                if (rate > 0.0) w -= rate * (na + nb + 1.0);
            }
            damp(a, b) = w;
        }
    }

    // Initial state |00><00| x thermal, thermal weights normalized over the
    // truncated space.
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    {
        const std::vector<double> nb = resolve_nbar(noise.initial_nbar, lay.num_modes);
        Eigen::VectorXd weights = Eigen::VectorXd::Ones(dm);
        for (int k = 0; k < lay.num_modes; ++k) {
            for (int f = 0; f < dm; ++f) {
                const int n = lay.level(f, k);
                weights(f) *= (nb[k] <= 0.0)
                                  ? (n == 0 ? 1.0 : 0.0)
                                  : std::pow(nb[k] / (1.0 + nb[k]), n) / (1.0 + nb[k]);
            }
        }
        weights /= weights.sum();
        for (int f = 0; f < dm; ++f) rho(f, f) = weights(f);  // spin block s = 0 is |00>
    }

    StepStats stats;
    double max_trace_err = 0.0;
    Eigen::MatrixXcd phase(dim, dim);
    Eigen::MatrixXcd buf(dim, dim);
    for (std::size_t i = 0; i < pulse.size(); ++i) {
        const Segment& seg = pulse.segments()[i];
        const double om = 0.5 * pulse.effective_amplitude(i);
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
        for (int k = 0; k < lay.num_modes; ++k)
            diag += (modes.mode_freqs[k] - seg.detuning) * nvals[k];
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b)
                phase(a, b) = cplx(damp(a, b), -(diag(a) - diag(b)));

        auto rhs = [&](const Eigen::MatrixXcd& r) -> Eigen::MatrixXcd {
            buf.noalias() = xop_rm * r;
            buf.noalias() -= r * xop;
            Eigen::MatrixXcd out = cplx(0.0, -om) * buf;
            out.array() += phase.array() * r.array();
            for (const Heating& h : heat) {
                buf.noalias() = h.lower * r;
                out.noalias() += h.rate * (buf * h.lower_adj);
                buf.noalias() = h.raise * r;
                out.noalias() += h.rate * (buf * h.raise_adj);
            }
            return out;
        };
        integrate_segment(rhs, rho, seg.duration, options.rel_tol, options.abs_tol, stats);
        max_trace_err = std::max(max_trace_err, std::abs(rho.trace().real() - 1.0));
    }

    LindbladResult res;
    Eigen::Matrix4cd rho_spin = Eigen::Matrix4cd::Zero();
    for (int s = 0; s < 4; ++s)
        for (int sp = 0; sp < 4; ++sp)
            for (int f = 0; f < dm; ++f) rho_spin(s, sp) += rho(s * dm + f, sp * dm + f);
    res.outputs = outputs_from_rho_z(rho_spin);
    res.trace_error = max_trace_err;
    res.top_fock_population.assign(lay.num_modes, 0.0);
    res.final_nbar.assign(lay.num_modes, 0.0);
    for (int k = 0; k < lay.num_modes; ++k) {
        double pop = 0.0, nbar = 0.0;
        for (int idx = 0; idx < dim; ++idx) {
            const double w = std::real(rho(idx, idx));
            if (lay.level(fock_of(idx), k) == lay.dims[k] - 1) pop += w;
            nbar += w * lay.level(fock_of(idx), k);
        }
        res.top_fock_population[k] = pop;
        res.final_nbar[k] = nbar;
    }
    res.rhs_evaluations = stats.rhs_evals;
    res.steps = stats.steps;
    check_truncation(res.top_fock_population, options.truncation_limit);
    return res;
}

}  // namespace

LindbladResult lindblad_sim(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                            const NoiseModel& noise, const LindbladOptions& options) {
    validate_pair(modes, pair);
    noise.validate(modes.num_modes());
    const std::vector<int> n_max = resolve_nmax(options, modes.num_modes());

    bool vacuum = true;
    for (double n : noise.initial_nbar)
        if (n > 0.0) vacuum = false;
    if (noise.is_noiseless() && vacuum)
        return lindblad_pure(pulse, modes, pair, n_max, options);
    return lindblad_density(pulse, modes, pair, noise, n_max, options);
}

ScanResult detuning_scan(const PulseProgram& pulse, const ModeSpec& modes, IonPair pair,
                         const std::vector<double>& offsets, int repeats,
                         const std::optional<NoiseModel>& noise,
                         const LindbladOptions& options) {
    validate_pair(modes, pair);
    if (repeats < 1) throw ValidationError("detuning_scan: repeats must be >= 1");
    if (noise) noise->validate(modes.num_modes());

    ScanResult result;
    result.repeats = repeats;
    result.points.reserve(offsets.size());
    const bool noisy = noise && !noise->is_noiseless();
    for (double eps : offsets) {
        const PulseProgram shifted = apply_offset(pulse, DetuningOffset{eps});
        const PulseProgram sequence =
            repeats == 1 ? shifted : repeat_pulse(shifted, repeats);

        ScanPoint pt;
        pt.offset = eps;
        const GateDiagnostics single = diagnostics(shifted, modes, pair, 1);
        pt.err_alpha = single.err_alpha;
        pt.err_theta = single.err_theta;

        BellOutputs out;
        if (noisy) {
            out = lindblad_sim(sequence, modes, pair, *noise, options).outputs;
        } else {
            const std::vector<double> nbar = noise ? noise->initial_nbar : std::vector<double>{};
            out = ideal_populations(sequence, modes, pair, nbar);
        }
        pt.p00 = out.p00;
        pt.p11 = out.p11;
        pt.p01_10 = out.p01_10;
        pt.contrast = out.contrast;
        pt.fidelity = out.fidelity;
        result.points.push_back(pt);
    }
    return result;
}

GateErrorFit repeated_gate_fit(const std::vector<double>& gate_counts,
                               const std::vector<double>& fidelities) {
    const std::size_t n = gate_counts.size();
    if (n < 2 || fidelities.size() != n)
        throw ValidationError("repeated_gate_fit: need >= 2 matched (count, fidelity) pairs");
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += gate_counts[i];
        mean_y += 1.0 - fidelities[i];
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = gate_counts[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (1.0 - fidelities[i] - mean_y);
    }
    if (sxx <= 0.0)
        throw ValidationError("repeated_gate_fit: gate counts are degenerate");
    GateErrorFit fit;
    fit.error_per_gate = sxy / sxx;
    fit.intercept = mean_y - fit.error_per_gate * mean_x;
    if (n > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double pred = fit.intercept + fit.error_per_gate * gate_counts[i];
            const double r = (1.0 - fidelities[i]) - pred;
            ssr += r * r;
        }
        fit.std_error = std::sqrt(ssr / double(n - 2) / sxx);
    }
    return fit;
}

}  // namespace msgate
