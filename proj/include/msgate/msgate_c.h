/*
 * msgate C API: trapped-ion Molmer-Sorensen gate pulse design and analysis.
 *
 * Opaque handles, integer status codes, thread-local error messages. All
 * angular frequencies cross this boundary in rad/s; file formats store cyclic
 * Hz (the library converts). Handles are created by msg_* constructors and
 * released with the matching *_free; accessors never take ownership.
 */

#ifndef MSGATE_C_H
#define MSGATE_C_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MSG_API __declspec(dllexport)
#else
#define MSG_API __attribute__((visibility("default")))
#endif

/* Status codes; nonzero values match the CLI exit codes. */
enum {
    MSG_OK = 0,
    MSG_ERR_CONFIG = 2,     /* invalid input, file or parameter */
    MSG_ERR_INFEASIBLE = 3, /* no solution with the requested structure */
    MSG_ERR_NUMERIC = 4     /* integrator/solver failure */
};

/* Message for the last failing call on this thread. */
MSG_API const char* msg_last_error(void);
MSG_API const char* msg_version(void);
MSG_API void msg_string_free(char* s);

/* ---- mode spec -------------------------------------------------------- */

typedef struct msg_modespec msg_modespec;

MSG_API int msg_modespec_two_ion(double omega_com, double omega_tilt, double eta,
                                 msg_modespec** out);
MSG_API int msg_modespec_chain(int num_ions, double axial_freq, double radial_freq,
                               double eta_com, msg_modespec** out);
MSG_API int msg_modespec_load(const char* path, msg_modespec** out);
MSG_API int msg_modespec_save(const msg_modespec* spec, const char* path,
                              const char* config_hash_or_null);
MSG_API int msg_modespec_num_ions(const msg_modespec* spec);
MSG_API int msg_modespec_num_modes(const msg_modespec* spec);
/* Buffers sized by the caller: freqs/eta/ratios num_modes, coupling row-major
 * num_ions x num_modes. Any pointer may be NULL to skip that field. */
MSG_API int msg_modespec_get(const msg_modespec* spec, double* mode_freqs, double* coupling,
                             double* lamb_dicke, double* drift_ratios);
MSG_API int msg_modespec_set_drift_ratios(msg_modespec* spec, const double* ratios, int count);
MSG_API void msg_modespec_free(msg_modespec* spec);

/* ---- pulse programs ---------------------------------------------------- */

typedef struct msg_pulse msg_pulse;

MSG_API int msg_pulse_create(const double* durations, const double* detunings,
                             const double* amplitudes, int num_segments, double scale,
                             msg_pulse** out);
MSG_API int msg_pulse_load(const char* path, msg_pulse** out);
MSG_API int msg_pulse_save(const msg_pulse* pulse, const char* path,
                           const char* config_hash_or_null);
MSG_API int msg_pulse_num_segments(const msg_pulse* pulse);
MSG_API int msg_pulse_get(const msg_pulse* pulse, double* durations, double* detunings,
                          double* amplitudes, double* scale);
MSG_API double msg_pulse_total_duration(const msg_pulse* pulse);
MSG_API int msg_pulse_mirror(const msg_pulse* pulse, double omega1, double omega2,
                             msg_pulse** out);
MSG_API int msg_pulse_concatenate(const msg_pulse* first, const msg_pulse* second,
                                  msg_pulse** out);
MSG_API int msg_pulse_repeat(const msg_pulse* pulse, int count, msg_pulse** out);
MSG_API int msg_pulse_scale_amplitude(const msg_pulse* pulse, double beta, msg_pulse** out);
MSG_API int msg_pulse_apply_offset(const msg_pulse* pulse, double epsilon, msg_pulse** out);
MSG_API void msg_pulse_free(msg_pulse* pulse);

/* ---- gate kernel ------------------------------------------------------- */

typedef struct msg_diag msg_diag;

MSG_API int msg_displacement(const msg_pulse* pulse, const msg_modespec* spec, int ion,
                             int mode, double t_end, double out_re_im[2]);
MSG_API int msg_avg_displacement(const msg_pulse* pulse, const msg_modespec* spec, int ion,
                                 int mode, double out_re_im[2]);
MSG_API int msg_alpha_derivative(const msg_pulse* pulse, const msg_modespec* spec, int ion,
                                 int mode, double out_re_im[2]);
MSG_API int msg_rotation_angle(const msg_pulse* pulse, const msg_modespec* spec, int j1, int j2,
                               double* out_theta);
/* out has one entry per mode: d^order Theta / d omega_k^order. */
MSG_API int msg_theta_derivative(const msg_pulse* pulse, const msg_modespec* spec, int j1,
                                 int j2, int order, double* out);
MSG_API int msg_integrated_phase(const msg_pulse* pulse, double mode_freq, double t,
                                 double* out_theta);

MSG_API int msg_diag_compute(const msg_pulse* pulse, const msg_modespec* spec, int j1, int j2,
                             int max_order, msg_diag** out);
MSG_API double msg_diag_theta(const msg_diag* d);
MSG_API double msg_diag_err_alpha(const msg_diag* d);
MSG_API double msg_diag_err_theta(const msg_diag* d);
MSG_API double msg_diag_dtheta_weighted(const msg_diag* d);
MSG_API int msg_diag_alpha(const msg_diag* d, int pair_ion, int mode, double out_re_im[2]);
MSG_API int msg_diag_dalpha(const msg_diag* d, int pair_ion, int mode, double out_re_im[2]);
MSG_API int msg_diag_dtheta(const msg_diag* d, int mode, double* out);
/* Weighted response of order j >= 2, as filled by msg_diag_compute. */
MSG_API int msg_diag_higher(const msg_diag* d, int order, double* out);
/* Serialized diagnostics: JSON string (free with msg_string_free). */
MSG_API int msg_diag_to_json(const msg_diag* d, char** out_json);
/* Flat CSV export (quantity,ion,mode,re,im rows). */
MSG_API int msg_diag_write_csv(const msg_diag* d, const char* path,
                               const char* config_hash_or_null);
MSG_API void msg_diag_free(msg_diag* d);

/* ---- robust optimizer --------------------------------------------------- */

/* config_json uses the optimizer file schema (see README). On success returns
 * the calibrated pulse and, optionally, the full report as JSON. */
MSG_API int msg_optimize_fm(const msg_modespec* spec, int j1, int j2, const char* config_json,
                            msg_pulse** out_pulse, char** out_report_json);
MSG_API int msg_calibrate_angle(const msg_pulse* pulse, const msg_modespec* spec, int j1,
                                int j2, double target, msg_pulse** out);

/* ---- A-robust constructions --------------------------------------------- */

MSG_API int msg_arobust_two_ion(const msg_pulse* half, const msg_modespec* spec, int j1, int j2,
                                msg_pulse** out_composite, char** out_solution_json);
MSG_API int msg_arobust_am(const msg_pulse* p1, const msg_pulse* p2, const msg_modespec* spec,
                           int j1, int j2, const double* ratios_or_null,
                           msg_pulse** out_composite, char** out_solution_json);
MSG_API int msg_arobust_nth(const msg_pulse* const* pulses, int count, int order,
                            const msg_modespec* spec, int j1, int j2,
                            const double* ratios_or_null, msg_pulse** out_composite,
                            char** out_solution_json);

/* ---- filter functions ---------------------------------------------------- */

MSG_API int msg_filter_functions(const msg_pulse* pulse, const msg_modespec* spec, int j1,
                                 int j2, const double* freqs_hz, int count, double* out_f_alpha,
                                 double* out_f_theta);
MSG_API int msg_spectral_error(const double* freqs_hz, const double* f_alpha,
                               const double* f_theta, int count, const char* spectrum_json,
                               double* out_err_alpha, double* out_err_theta,
                               int* out_accuracy_warning);
/* freq_hz,f_alpha,f_theta CSV. */
MSG_API int msg_ff_write_csv(const double* freqs_hz, const double* f_alpha,
                             const double* f_theta, int count, const char* path,
                             const char* config_hash_or_null);

/* ---- scans and simulation ------------------------------------------------ */

typedef struct msg_scan msg_scan;

MSG_API int msg_ideal_populations(const msg_pulse* pulse, const msg_modespec* spec, int j1,
                                  int j2, const double* nbar_or_null,
                                  double out_p00_p11_podd_contrast_fidelity[5]);
/* noise_json may be NULL (noiseless). n_max <= 0 selects the default (15). */
MSG_API int msg_detuning_scan(const msg_pulse* pulse, const msg_modespec* spec, int j1, int j2,
                              const double* offsets, int count, int repeats,
                              const char* noise_json_or_null, int n_max, msg_scan** out);
MSG_API int msg_scan_size(const msg_scan* scan);
/* Row: offset, p00, p11, p01_10, contrast, fidelity, err_alpha, err_theta. */
MSG_API int msg_scan_row(const msg_scan* scan, int index, double out_row[8]);
MSG_API int msg_scan_write_csv(const msg_scan* scan, const char* path,
                               const char* config_hash_or_null);
MSG_API void msg_scan_free(msg_scan* scan);

MSG_API int msg_lindblad_observables(const msg_pulse* pulse, const msg_modespec* spec, int j1,
                                     int j2, const char* noise_json, int n_max,
                                     double out_p00_p11_podd_contrast_fidelity[5],
                                     double* out_trace_error);

MSG_API int msg_repeated_gate_fit(const double* gate_counts, const double* fidelities,
                                  int count, double* out_error_per_gate, double* out_std_error);

#ifdef __cplusplus
}
#endif

#endif /* MSGATE_C_H */
