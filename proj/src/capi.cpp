#include "msgate/msgate_c.h"

#include <cstring>
#include <fstream>
#include <string>

#include "msgate/arobust.hpp"
#include "msgate/errors.hpp"
#include "msgate/filter_function.hpp"
#include "msgate/io.hpp"
#include "msgate/robust_optimizer.hpp"
#include "msgate/scan_sim.hpp"

// Opaque handle definitions: thin wrappers over the C++ value types.
struct msg_modespec {
    msgate::ModeSpec spec;
};
struct msg_pulse {
    msgate::PulseProgram pulse;
};
struct msg_diag {
    msgate::GateDiagnostics diag;
};
struct msg_scan {
    msgate::ScanResult scan;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const char* what) {
    g_last_error = what;
    return code;
}

// Runs the body, translating the library's exception taxonomy to status codes.
template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return MSG_OK;
    } catch (const msgate::Error& e) {
        return fail(static_cast<int>(e.code()), e.what());
    } catch (const std::exception& e) {
        return fail(MSG_ERR_NUMERIC, e.what());
    } catch (...) {
        return fail(MSG_ERR_NUMERIC, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::optional<msgate::FileMeta> make_meta(const char* config_hash_or_null) {
    if (!config_hash_or_null) return std::nullopt;
    return msgate::FileMeta{msgate::version(), config_hash_or_null};
}

void fill_outputs(const msgate::BellOutputs& o, double out[5]) {
    out[0] = o.p00;
    out[1] = o.p11;
    out[2] = o.p01_10;
    out[3] = o.contrast;
    out[4] = o.fidelity;
}

int require_handle(const void* p, const char* name) {
    if (!p) return fail(MSG_ERR_CONFIG, (std::string(name) + " handle is null").c_str());
    return MSG_OK;
}

}  // namespace

extern "C" {

const char* msg_last_error(void) { return g_last_error.c_str(); }
const char* msg_version(void) { return msgate::version(); }
void msg_string_free(char* s) { delete[] s; }

/* ---- mode spec -------------------------------------------------------- */

int msg_modespec_two_ion(double omega_com, double omega_tilt, double eta, msg_modespec** out) {
    if (!out) return fail(MSG_ERR_CONFIG, "out pointer is null");
    return guarded([&] { *out = new msg_modespec{msgate::two_ion_modes(omega_com, omega_tilt, eta)}; });
}

int msg_modespec_chain(int num_ions, double axial_freq, double radial_freq, double eta_com,
                       msg_modespec** out) {
    if (!out) return fail(MSG_ERR_CONFIG, "out pointer is null");
    return guarded([&] {
        *out = new msg_modespec{msgate::chain_modes(num_ions, axial_freq, radial_freq, eta_com)};
    });
}

int msg_modespec_load(const char* path, msg_modespec** out) {
    if (!out || !path) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] { *out = new msg_modespec{msgate::load_mode_spec(path)}; });
}

int msg_modespec_save(const msg_modespec* spec, const char* path,
                      const char* config_hash_or_null) {
    if (int rc = require_handle(spec, "mode spec")) return rc;
    if (!path) return fail(MSG_ERR_CONFIG, "path is null");
    return guarded([&] { msgate::save_mode_spec(spec->spec, path, make_meta(config_hash_or_null)); });
}

int msg_modespec_num_ions(const msg_modespec* spec) { return spec ? spec->spec.num_ions : -1; }
int msg_modespec_num_modes(const msg_modespec* spec) {
    return spec ? spec->spec.num_modes() : -1;
}

int msg_modespec_get(const msg_modespec* spec, double* mode_freqs, double* coupling,
                     double* lamb_dicke, double* drift_ratios) {
    if (int rc = require_handle(spec, "mode spec")) return rc;
    const auto& s = spec->spec;
    const int k = s.num_modes();
    for (int i = 0; i < k; ++i) {
        if (mode_freqs) mode_freqs[i] = s.mode_freqs[i];
        if (lamb_dicke) lamb_dicke[i] = s.lamb_dicke[i];
        if (drift_ratios) drift_ratios[i] = s.drift_ratios[i];
    }
    if (coupling)
        for (int i = 0; i < s.num_ions; ++i)
            for (int m = 0; m < k; ++m) coupling[i * k + m] = s.coupling(i, m);
    return MSG_OK;
}

int msg_modespec_set_drift_ratios(msg_modespec* spec, const double* ratios, int count) {
    if (int rc = require_handle(spec, "mode spec")) return rc;
    if (!ratios) return fail(MSG_ERR_CONFIG, "ratios is null");
    return guarded([&] {
        if (count != spec->spec.num_modes())
            throw msgate::ValidationError("drift ratio count must match mode count");
        spec->spec.drift_ratios.assign(ratios, ratios + count);
        spec->spec.validate();
    });
}

void msg_modespec_free(msg_modespec* spec) { delete spec; }

/* ---- pulses ------------------------------------------------------------ */

int msg_pulse_create(const double* durations, const double* detunings, const double* amplitudes,
                     int num_segments, double scale, msg_pulse** out) {
    if (!out || !durations || !detunings || !amplitudes)
        return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        if (num_segments < 1) throw msgate::ValidationError("num_segments must be >= 1");
        std::vector<msgate::Segment> segs(num_segments);
        for (int i = 0; i < num_segments; ++i)
            segs[i] = msgate::Segment{durations[i], detunings[i], amplitudes[i]};
        *out = new msg_pulse{msgate::PulseProgram(std::move(segs), scale)};
    });
}

int msg_pulse_load(const char* path, msg_pulse** out) {
    if (!out || !path) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] { *out = new msg_pulse{msgate::load_pulse(path)}; });
}

int msg_pulse_save(const msg_pulse* pulse, const char* path, const char* config_hash_or_null) {
    if (int rc = require_handle(pulse, "pulse")) return rc;
    if (!path) return fail(MSG_ERR_CONFIG, "path is null");
    return guarded([&] { msgate::save_pulse(pulse->pulse, path, make_meta(config_hash_or_null)); });
}

int msg_pulse_num_segments(const msg_pulse* pulse) {
    return pulse ? static_cast<int>(pulse->pulse.size()) : -1;
}

int msg_pulse_get(const msg_pulse* pulse, double* durations, double* detunings,
                  double* amplitudes, double* scale) {
    if (int rc = require_handle(pulse, "pulse")) return rc;
    const auto& segs = pulse->pulse.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (durations) durations[i] = segs[i].duration;
        if (detunings) detunings[i] = segs[i].detuning;
        if (amplitudes) amplitudes[i] = segs[i].amplitude;
    }
    if (scale) *scale = pulse->pulse.scale();
    return MSG_OK;
}

double msg_pulse_total_duration(const msg_pulse* pulse) {
    return pulse ? pulse->pulse.total_duration() : -1.0;
}

int msg_pulse_mirror(const msg_pulse* pulse, double omega1, double omega2, msg_pulse** out) {
    if (int rc = require_handle(pulse, "pulse")) return rc;
    if (!out) return fail(MSG_ERR_CONFIG, "out pointer is null");
    return guarded([&] { *out = new msg_pulse{msgate::mirror_pulse(pulse->pulse, omega1, omega2)}; });
}

int msg_pulse_concatenate(const msg_pulse* first, const msg_pulse* second, msg_pulse** out) {
    if (!first || !second || !out) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] { *out = new msg_pulse{msgate::concatenate(first->pulse, second->pulse)}; });
}

int msg_pulse_repeat(const msg_pulse* pulse, int count, msg_pulse** out) {
    if (!pulse || !out) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] { *out = new msg_pulse{msgate::repeat_pulse(pulse->pulse, count)}; });
}

int msg_pulse_scale_amplitude(const msg_pulse* pulse, double beta, msg_pulse** out) {
    if (!pulse || !out) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] { *out = new msg_pulse{msgate::scale_amplitude(pulse->pulse, beta)}; });
}

int msg_pulse_apply_offset(const msg_pulse* pulse, double epsilon, msg_pulse** out) {
    if (!pulse || !out) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        *out = new msg_pulse{msgate::apply_offset(pulse->pulse, msgate::DetuningOffset{epsilon})};
    });
}

void msg_pulse_free(msg_pulse* pulse) { delete pulse; }

/* ---- kernel ------------------------------------------------------------- */

int msg_displacement(const msg_pulse* pulse, const msg_modespec* spec, int ion, int mode,
                     double t_end, double out_re_im[2]) {
    if (!pulse || !spec || !out_re_im) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        const auto z = msgate::displacement(pulse->pulse, spec->spec, ion, mode, t_end);
        out_re_im[0] = z.real();
        out_re_im[1] = z.imag();
    });
}

int msg_avg_displacement(const msg_pulse* pulse, const msg_modespec* spec, int ion, int mode,
                         double out_re_im[2]) {
    if (!pulse || !spec || !out_re_im) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        const auto z = msgate::avg_displacement(pulse->pulse, spec->spec, ion, mode);
        out_re_im[0] = z.real();
        out_re_im[1] = z.imag();
    });
}

int msg_alpha_derivative(const msg_pulse* pulse, const msg_modespec* spec, int ion, int mode,
                         double out_re_im[2]) {
    if (!pulse || !spec || !out_re_im) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        const auto z = msgate::alpha_derivative(pulse->pulse, spec->spec, ion, mode);
        out_re_im[0] = z.real();
        out_re_im[1] = z.imag();
    });
}

int msg_rotation_angle(const msg_pulse* pulse, const msg_modespec* spec, int j1, int j2,
                       double* out_theta) {
    if (!pulse || !spec || !out_theta) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        *out_theta = msgate::rotation_angle(pulse->pulse, spec->spec, msgate::IonPair{j1, j2});
    });
}

int msg_theta_derivative(const msg_pulse* pulse, const msg_modespec* spec, int j1, int j2,
                         int order, double* out) {
    if (!pulse || !spec || !out) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        const auto v =
            msgate::theta_derivative(pulse->pulse, spec->spec, msgate::IonPair{j1, j2}, order);
        std::copy(v.begin(), v.end(), out);
    });
}

int msg_integrated_phase(const msg_pulse* pulse, double mode_freq, double t, double* out_theta) {
    if (!pulse || !out_theta) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] { *out_theta = msgate::integrated_phase(pulse->pulse, mode_freq, t); });
}

int msg_diag_compute(const msg_pulse* pulse, const msg_modespec* spec, int j1, int j2,
                     int max_order, msg_diag** out) {
    if (!pulse || !spec || !out) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        *out = new msg_diag{
            msgate::diagnostics(pulse->pulse, spec->spec, msgate::IonPair{j1, j2}, max_order)};
    });
}

double msg_diag_theta(const msg_diag* d) { return d ? d->diag.theta : 0.0; }
double msg_diag_err_alpha(const msg_diag* d) { return d ? d->diag.err_alpha : 0.0; }
double msg_diag_err_theta(const msg_diag* d) { return d ? d->diag.err_theta : 0.0; }
double msg_diag_dtheta_weighted(const msg_diag* d) { return d ? d->diag.dtheta_weighted : 0.0; }

int msg_diag_alpha(const msg_diag* d, int pair_ion, int mode, double out_re_im[2]) {
    if (!d || !out_re_im) return fail(MSG_ERR_CONFIG, "null argument");
    if (pair_ion < 0 || pair_ion > 1 || mode < 0 || mode >= d->diag.alpha.cols())
        return fail(MSG_ERR_CONFIG, "diagnostics index out of range");
    out_re_im[0] = d->diag.alpha(pair_ion, mode).real();
    out_re_im[1] = d->diag.alpha(pair_ion, mode).imag();
    return MSG_OK;
}

int msg_diag_dalpha(const msg_diag* d, int pair_ion, int mode, double out_re_im[2]) {
    if (!d || !out_re_im) return fail(MSG_ERR_CONFIG, "null argument");
    if (pair_ion < 0 || pair_ion > 1 || mode < 0 || mode >= d->diag.dalpha_domega.cols())
        return fail(MSG_ERR_CONFIG, "diagnostics index out of range");
    out_re_im[0] = d->diag.dalpha_domega(pair_ion, mode).real();
    out_re_im[1] = d->diag.dalpha_domega(pair_ion, mode).imag();
    return MSG_OK;
}

int msg_diag_dtheta(const msg_diag* d, int mode, double* out) {
    if (!d || !out) return fail(MSG_ERR_CONFIG, "null argument");
    if (mode < 0 || mode >= static_cast<int>(d->diag.dtheta_domega.size()))
        return fail(MSG_ERR_CONFIG, "diagnostics index out of range");
    *out = d->diag.dtheta_domega[mode];
    return MSG_OK;
}

int msg_diag_higher(const msg_diag* d, int order, double* out) {
    if (!d || !out) return fail(MSG_ERR_CONFIG, "null argument");
    const int idx = order - 2;
    if (idx < 0 || idx >= static_cast<int>(d->diag.higher_dtheta.size()))
        return fail(MSG_ERR_CONFIG, "order not computed; raise max_order in msg_diag_compute");
    *out = d->diag.higher_dtheta[idx];
    return MSG_OK;
}

int msg_diag_to_json(const msg_diag* d, char** out_json) {
    if (!d || !out_json) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] { *out_json = dup_string(msgate::diagnostics_to_json(d->diag).dump(2)); });
}

int msg_diag_write_csv(const msg_diag* d, const char* path, const char* config_hash_or_null) {
    if (!d || !path) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        std::ofstream os(path);
        if (!os) throw msgate::ValidationError(std::string("cannot write file: ") + path);
        msgate::write_diagnostics_csv(os, d->diag, make_meta(config_hash_or_null));
    });
}

void msg_diag_free(msg_diag* d) { delete d; }

/* ---- optimizer ----------------------------------------------------------- */

int msg_optimize_fm(const msg_modespec* spec, int j1, int j2, const char* config_json,
                    msg_pulse** out_pulse, char** out_report_json) {
    if (!spec || !config_json || !out_pulse) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::parse_error& e) {
            throw msgate::ValidationError(std::string("optimizer config: ") + e.what());
        }
        const auto cfg = msgate::optimizer_config_from_json(j);
        auto report = msgate::optimize_fm(cfg, spec->spec, msgate::IonPair{j1, j2});
        *out_pulse = new msg_pulse{report.pulse};
        if (out_report_json)
            *out_report_json = dup_string(msgate::optimizer_report_to_json(report).dump(2));
    });
}

int msg_calibrate_angle(const msg_pulse* pulse, const msg_modespec* spec, int j1, int j2,
                        double target, msg_pulse** out) {
    if (!pulse || !spec || !out) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        *out = new msg_pulse{msgate::calibrate_angle(pulse->pulse, spec->spec,
                                                     msgate::IonPair{j1, j2}, target)};
    });
}

/* ---- A-robust -------------------------------------------------------------- */

namespace {
std::optional<std::vector<double>> ratio_vec(const double* ratios, int num_modes) {
    if (!ratios) return std::nullopt;
    return std::vector<double>(ratios, ratios + num_modes);
}
}  // namespace

int msg_arobust_two_ion(const msg_pulse* half, const msg_modespec* spec, int j1, int j2,
                        msg_pulse** out_composite, char** out_solution_json) {
    if (!half || !spec || !out_composite) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        const auto sol =
            msgate::two_ion_arobust(half->pulse, spec->spec, msgate::IonPair{j1, j2});
        *out_composite = new msg_pulse{sol.composite};
        if (out_solution_json)
            *out_solution_json = dup_string(msgate::am_solution_to_json(sol).dump(2));
    });
}

int msg_arobust_am(const msg_pulse* p1, const msg_pulse* p2, const msg_modespec* spec, int j1,
                   int j2, const double* ratios_or_null, msg_pulse** out_composite,
                   char** out_solution_json) {
    if (!p1 || !p2 || !spec || !out_composite) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        const auto sol =
            msgate::am_concatenate(p1->pulse, p2->pulse, spec->spec, msgate::IonPair{j1, j2},
                                   ratio_vec(ratios_or_null, spec->spec.num_modes()));
        *out_composite = new msg_pulse{sol.composite};
        if (out_solution_json)
            *out_solution_json = dup_string(msgate::am_solution_to_json(sol).dump(2));
    });
}

int msg_arobust_nth(const msg_pulse* const* pulses, int count, int order,
                    const msg_modespec* spec, int j1, int j2, const double* ratios_or_null,
                    msg_pulse** out_composite, char** out_solution_json) {
    if (!pulses || !spec || !out_composite) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        std::vector<msgate::PulseProgram> seeds;
        for (int i = 0; i < count; ++i) {
            if (!pulses[i]) throw msgate::ValidationError("null pulse handle in seed list");
            seeds.push_back(pulses[i]->pulse);
        }
        const auto sol =
            msgate::nth_order_arobust(seeds, spec->spec, msgate::IonPair{j1, j2}, order,
                                      ratio_vec(ratios_or_null, spec->spec.num_modes()));
        *out_composite = new msg_pulse{sol.composite};
        if (out_solution_json)
            *out_solution_json = dup_string(msgate::am_solution_to_json(sol).dump(2));
    });
}

/* ---- filter functions -------------------------------------------------------- */

int msg_filter_functions(const msg_pulse* pulse, const msg_modespec* spec, int j1, int j2,
                         const double* freqs_hz, int count, double* out_f_alpha,
                         double* out_f_theta) {
    if (!pulse || !spec || !freqs_hz) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        const std::vector<double> freqs(freqs_hz, freqs_hz + count);
        const msgate::IonPair pair{j1, j2};
        if (out_f_alpha) {
            const auto fa = msgate::ff_alpha(pulse->pulse, spec->spec, pair, freqs);
            std::copy(fa.begin(), fa.end(), out_f_alpha);
        }
        if (out_f_theta) {
            const auto ft = msgate::ff_theta(pulse->pulse, spec->spec, pair, freqs);
            std::copy(ft.begin(), ft.end(), out_f_theta);
        }
    });
}

int msg_spectral_error(const double* freqs_hz, const double* f_alpha, const double* f_theta,
                       int count, const char* spectrum_json, double* out_err_alpha,
                       double* out_err_theta, int* out_accuracy_warning) {
    if (!freqs_hz || !f_alpha || !f_theta || !spectrum_json)
        return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        msgate::FilterFunctionCurve curve;
        curve.freqs_hz.assign(freqs_hz, freqs_hz + count);
        curve.f_alpha.assign(f_alpha, f_alpha + count);
        curve.f_theta.assign(f_theta, f_theta + count);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(spectrum_json);
        } catch (const nlohmann::json::parse_error& e) {
            throw msgate::ValidationError(std::string("spectrum: ") + e.what());
        }
        const auto err = msgate::spectral_error(curve, msgate::spectrum_from_json(j));
        if (out_err_alpha) *out_err_alpha = err.err_alpha;
        if (out_err_theta) *out_err_theta = err.err_theta;
        if (out_accuracy_warning) *out_accuracy_warning = err.accuracy_warning ? 1 : 0;
    });
}

int msg_ff_write_csv(const double* freqs_hz, const double* f_alpha, const double* f_theta,
                     int count, const char* path, const char* config_hash_or_null) {
    if (!freqs_hz || !f_alpha || !f_theta || !path) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        msgate::FilterFunctionCurve curve;
        curve.freqs_hz.assign(freqs_hz, freqs_hz + count);
        curve.f_alpha.assign(f_alpha, f_alpha + count);
        curve.f_theta.assign(f_theta, f_theta + count);
        std::ofstream os(path);
        if (!os) throw msgate::ValidationError(std::string("cannot write file: ") + path);
        msgate::write_ff_csv(os, curve, make_meta(config_hash_or_null));
    });
}

/* ---- scans / simulation ---------------------------------------------------------- */

int msg_ideal_populations(const msg_pulse* pulse, const msg_modespec* spec, int j1, int j2,
                          const double* nbar_or_null, double out[5]) {
    if (!pulse || !spec || !out) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        std::vector<double> nbar;
        if (nbar_or_null)
            nbar.assign(nbar_or_null, nbar_or_null + spec->spec.num_modes());
        fill_outputs(
            msgate::ideal_populations(pulse->pulse, spec->spec, msgate::IonPair{j1, j2}, nbar),
            out);
    });
}

int msg_detuning_scan(const msg_pulse* pulse, const msg_modespec* spec, int j1, int j2,
                      const double* offsets, int count, int repeats,
                      const char* noise_json_or_null, int n_max, msg_scan** out) {
    if (!pulse || !spec || !offsets || !out) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        std::optional<msgate::NoiseModel> noise;
        if (noise_json_or_null) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(noise_json_or_null);
            } catch (const nlohmann::json::parse_error& e) {
                throw msgate::ValidationError(std::string("noise model: ") + e.what());
            }
            noise = msgate::noise_model_from_json(j, spec->spec.num_modes());
        }
        msgate::LindbladOptions options;
        if (n_max > 0) options.n_max.assign(spec->spec.num_modes(), n_max);
        const std::vector<double> offs(offsets, offsets + count);
        *out = new msg_scan{msgate::detuning_scan(pulse->pulse, spec->spec,
                                                  msgate::IonPair{j1, j2}, offs, repeats, noise,
                                                  options)};
    });
}

int msg_scan_size(const msg_scan* scan) {
    return scan ? static_cast<int>(scan->scan.points.size()) : -1;
}

int msg_scan_row(const msg_scan* scan, int index, double out_row[8]) {
    if (!scan || !out_row) return fail(MSG_ERR_CONFIG, "null argument");
    if (index < 0 || index >= static_cast<int>(scan->scan.points.size()))
        return fail(MSG_ERR_CONFIG, "scan row index out of range");
    const auto& p = scan->scan.points[index];
    out_row[0] = p.offset;
    out_row[1] = p.p00;
    out_row[2] = p.p11;
    out_row[3] = p.p01_10;
    out_row[4] = p.contrast;
    out_row[5] = p.fidelity;
    out_row[6] = p.err_alpha;
    out_row[7] = p.err_theta;
    return MSG_OK;
}

int msg_scan_write_csv(const msg_scan* scan, const char* path, const char* config_hash_or_null) {
    if (!scan || !path) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        std::ofstream os(path);
        if (!os) throw msgate::ValidationError(std::string("cannot write file: ") + path);
        msgate::write_scan_csv(os, scan->scan, make_meta(config_hash_or_null));
    });
}

void msg_scan_free(msg_scan* scan) { delete scan; }

int msg_lindblad_observables(const msg_pulse* pulse, const msg_modespec* spec, int j1, int j2,
                             const char* noise_json, int n_max, double out[5],
                             double* out_trace_error) {
    if (!pulse || !spec || !noise_json || !out) return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(noise_json);
        } catch (const nlohmann::json::parse_error& e) {
            throw msgate::ValidationError(std::string("noise model: ") + e.what());
        }
        const auto noise = msgate::noise_model_from_json(j, spec->spec.num_modes());
        msgate::LindbladOptions options;
        if (n_max > 0) options.n_max.assign(spec->spec.num_modes(), n_max);
        const auto res = msgate::lindblad_sim(pulse->pulse, spec->spec, msgate::IonPair{j1, j2},
                                              noise, options);
        fill_outputs(res.outputs, out);
        if (out_trace_error) *out_trace_error = res.trace_error;
    });
}

int msg_repeated_gate_fit(const double* gate_counts, const double* fidelities, int count,
                          double* out_error_per_gate, double* out_std_error) {
    if (!gate_counts || !fidelities || !out_error_per_gate)
        return fail(MSG_ERR_CONFIG, "null argument");
    return guarded([&] {
        const std::vector<double> c(gate_counts, gate_counts + count);
        const std::vector<double> f(fidelities, fidelities + count);
        const auto fit = msgate::repeated_gate_fit(c, f);
        *out_error_per_gate = fit.error_per_gate;
        if (out_std_error) *out_std_error = fit.std_error;
    });
}

}  // extern "C"
