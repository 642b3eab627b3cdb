#include "msgate/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "msgate/errors.hpp"
#include "msgate/units.hpp"

namespace msgate {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

const json& require(const json& j, const char* key, const char* context) {
    const auto it = j.find(key);
    if (it == j.end())
        throw ValidationError(std::string(context) + ": missing field '" + key + "'");
    return *it;
}

double require_number(const json& j, const char* key, const char* context) {
    const json& v = require(j, key, context);
    if (!v.is_number())
        throw ValidationError(std::string(context) + ": field '" + key + "' must be a number");
    return v.get<double>();
}

std::vector<double> require_array(const json& j, const char* key, const char* context) {
    const json& v = require(j, key, context);
    if (!v.is_array())
        throw ValidationError(std::string(context) + ": field '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            throw ValidationError(std::string(context) + ": field '" + key +
                                  "' must contain numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

json complex_to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

}  // namespace

json FileMeta::to_json(const char* units) const {
    return json{{"tool", "msgate"},
                {"version", version},
                {"config_hash", config_hash},
                {"units", units}};
}

std::string FileMeta::csv_comment(const char* units) const {
    std::string out;
    out += "# msgate " + version + "\n";
    out += "# config " + config_hash + "\n";
    out += std::string("# units ") + units + "\n";
    return out;
}

std::string config_hash(const json& config) {
    const std::string dump = config.dump();  // nlohmann dumps objects with sorted keys
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("parse failure in " + path + ": " + e.what());
    }
    return j;
}

void save_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

// --------------------------------------------------------------------------
// Mode spec: {num_ions, mode_freqs_hz, coupling (ion-major rows), lamb_dicke,
// drift_ratios?}. Hz on disk, rad/s in memory.
// --------------------------------------------------------------------------

json mode_spec_to_json(const ModeSpec& spec) {
    json j;
    j["num_ions"] = spec.num_ions;
    json freqs = json::array();
    for (double w : spec.mode_freqs) freqs.push_back(rad_to_hz(w));
    j["mode_freqs_hz"] = freqs;
    json rows = json::array();
    for (int i = 0; i < spec.num_ions; ++i) {
        json row = json::array();
        for (int k = 0; k < spec.num_modes(); ++k) row.push_back(spec.coupling(i, k));
        rows.push_back(row);
    }
    j["coupling"] = rows;
    j["lamb_dicke"] = spec.lamb_dicke;
    j["drift_ratios"] = spec.drift_ratios;
    return j;
}

ModeSpec mode_spec_from_json(const json& j) {
    const char* ctx = "mode spec";
    ModeSpec spec;
    const json& ni = require(j, "num_ions", ctx);
    if (!ni.is_number_integer() || ni.get<int>() < 1)
        throw ValidationError("mode spec: field 'num_ions' must be a positive integer");
    spec.num_ions = ni.get<int>();
    const auto freqs_hz = require_array(j, "mode_freqs_hz", ctx);
    for (double f : freqs_hz) spec.mode_freqs.push_back(hz_to_rad(f));
    spec.lamb_dicke = require_array(j, "lamb_dicke", ctx);
    if (j.contains("drift_ratios"))
        spec.drift_ratios = require_array(j, "drift_ratios", ctx);
    else
        spec.drift_ratios.assign(spec.mode_freqs.size(), 1.0);

    const json& rows = require(j, "coupling", ctx);
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(spec.num_ions))
        throw ValidationError("mode spec: field 'coupling' must have one row per ion");
    spec.coupling.resize(spec.num_ions, static_cast<Eigen::Index>(spec.mode_freqs.size()));
    for (int i = 0; i < spec.num_ions; ++i) {
        const json& row = rows[i];
        if (!row.is_array() || row.size() != spec.mode_freqs.size())
            throw ValidationError("mode spec: field 'coupling' row " + std::to_string(i) +
                                  " must have one entry per mode");
        for (std::size_t k = 0; k < spec.mode_freqs.size(); ++k)
            spec.coupling(i, static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
    spec.validate();
    return spec;
}

void save_mode_spec(const ModeSpec& spec, const std::string& path,
                    const std::optional<FileMeta>& meta) {
    json j = mode_spec_to_json(spec);
    if (meta) j["meta"] = meta->to_json("mode_freqs_hz=Hz lamb_dicke=1 coupling=1");
    save_json_file(j, path);
}

ModeSpec load_mode_spec(const std::string& path) {
    return mode_spec_from_json(load_json_file(path));
}

// --------------------------------------------------------------------------
// Pulse: {segments: [{duration_s, detuning_hz, amplitude_hz}], scale}.
// --------------------------------------------------------------------------

json pulse_to_json(const PulseProgram& pulse) {
    json segs = json::array();
    for (const Segment& s : pulse.segments())
        segs.push_back(json{{"duration_s", s.duration},
                            {"detuning_hz", rad_to_hz(s.detuning)},
                            {"amplitude_hz", rad_to_hz(s.amplitude)}});
    return json{{"segments", segs}, {"scale", pulse.scale()}};
}

PulseProgram pulse_from_json(const json& j) {
    const char* ctx = "pulse";
    const json& segs = require(j, "segments", ctx);
    if (!segs.is_array() || segs.empty())
        throw ValidationError("pulse: field 'segments' must be a non-empty array");
    std::vector<Segment> out;
    for (const json& s : segs) {
        Segment seg;
        seg.duration = require_number(s, "duration_s", ctx);
        seg.detuning = hz_to_rad(require_number(s, "detuning_hz", ctx));
        seg.amplitude = hz_to_rad(require_number(s, "amplitude_hz", ctx));
        out.push_back(seg);
    }
    const double scale = j.contains("scale") ? require_number(j, "scale", ctx) : 1.0;
    return PulseProgram(std::move(out), scale);
}

void save_pulse(const PulseProgram& pulse, const std::string& path,
                const std::optional<FileMeta>& meta) {
    json j = pulse_to_json(pulse);
    if (meta) j["meta"] = meta->to_json("duration_s=s detuning_hz=Hz amplitude_hz=Hz scale=1");
    save_json_file(j, path);
}

PulseProgram load_pulse(const std::string& path) {
    return pulse_from_json(load_json_file(path));
}

// --------------------------------------------------------------------------
// Noise model and spectra.
// --------------------------------------------------------------------------

NoiseModel noise_model_from_json(const json& j, int num_modes) {
    const char* ctx = "noise model";
    NoiseModel noise;
    if (j.contains("heating_rates_qps"))
        noise.heating_rates = require_array(j, "heating_rates_qps", ctx);
    if (j.contains("motional_T2_s") && !j["motional_T2_s"].is_null())
        noise.motional_T2 = require_number(j, "motional_T2_s", ctx);
    if (j.contains("carrier_T2_s") && !j["carrier_T2_s"].is_null())
        noise.carrier_T2 = require_number(j, "carrier_T2_s", ctx);
    if (j.contains("initial_nbar")) {
        if (j["initial_nbar"].is_number())
            noise.initial_nbar.assign(num_modes, j["initial_nbar"].get<double>());
        else
            noise.initial_nbar = require_array(j, "initial_nbar", ctx);
    }
    noise.validate(num_modes);
    return noise;
}

json noise_model_to_json(const NoiseModel& noise) {
    json j;
    j["heating_rates_qps"] = noise.heating_rates;
    if (noise.motional_T2 < std::numeric_limits<double>::infinity())
        j["motional_T2_s"] = noise.motional_T2;
    if (noise.carrier_T2 < std::numeric_limits<double>::infinity())
        j["carrier_T2_s"] = noise.carrier_T2;
    j["initial_nbar"] = noise.initial_nbar;
    return j;
}

NoiseSpectrum spectrum_from_json(const json& j) {
    const char* ctx = "noise spectrum";
    NoiseSpectrum s;
    const json& kind = require(j, "kind", ctx);
    const std::string k = kind.get<std::string>();
    if (k == "static_offset")
        s.kind = NoiseSpectrum::Kind::static_offset;
    else if (k == "white")
        s.kind = NoiseSpectrum::Kind::white;
    else if (k == "one_over_f")
        s.kind = NoiseSpectrum::Kind::one_over_f;
    else if (k == "tabulated")
        s.kind = NoiseSpectrum::Kind::tabulated;
    else
        throw ValidationError("noise spectrum: unknown kind '" + k + "'");
    if (j.contains("amplitude")) s.amplitude = require_number(j, "amplitude", ctx);
    if (j.contains("exponent")) s.exponent = require_number(j, "exponent", ctx);
    if (j.contains("corner_hz")) s.corner_hz = require_number(j, "corner_hz", ctx);
    if (s.kind == NoiseSpectrum::Kind::tabulated) {
        s.freqs_hz = require_array(j, "freqs_hz", ctx);
        s.psd = require_array(j, "psd", ctx);
    }
    s.validate();
    return s;
}

// --------------------------------------------------------------------------
// Optimizer config / report.
// --------------------------------------------------------------------------

OptimizerConfig optimizer_config_from_json(const json& j) {
    const char* ctx = "optimizer config";
    OptimizerConfig cfg;
    if (j.contains("num_segments")) cfg.num_segments = require(j, "num_segments", ctx).get<int>();
    cfg.gate_time = require_number(j, "gate_time_s", ctx);
    if (j.contains("target_angle_rad")) cfg.target_angle = require_number(j, "target_angle_rad", ctx);
    cfg.max_amplitude = hz_to_rad(require_number(j, "max_amplitude_hz", ctx));
    const auto bounds = require_array(j, "detuning_bounds_hz", ctx);
    if (bounds.size() != 2)
        throw ValidationError("optimizer config: detuning_bounds_hz must have 2 entries");
    cfg.detuning_lo = hz_to_rad(bounds[0]);
    cfg.detuning_hi = hz_to_rad(bounds[1]);
    if (j.contains("initial_center_hz"))
        cfg.initial_center = hz_to_rad(require_number(j, "initial_center_hz", ctx));
    if (j.contains("initial_half_hz")) {
        std::vector<double> half = require_array(j, "initial_half_hz", ctx);
        for (double& v : half) v = hz_to_rad(v);
        cfg.initial_half = half;
    }
    if (j.contains("ff_suppression")) {
        const json& f = j["ff_suppression"];
        OptimizerConfig::FfSuppression sup;
        sup.freq_hz = require_number(f, "freq_hz", "ff_suppression");
        if (f.contains("weight")) sup.weight = require_number(f, "weight", "ff_suppression");
        cfg.ff_suppression = sup;
    }
    if (j.contains("avg_weight")) cfg.avg_weight = require_number(j, "avg_weight", ctx);
    if (j.contains("num_starts")) cfg.num_starts = require(j, "num_starts", ctx).get<int>();
    if (j.contains("seed")) cfg.seed = require(j, "seed", ctx).get<std::uint64_t>();
    if (j.contains("max_iters")) cfg.max_iters = require(j, "max_iters", ctx).get<int>();
    if (j.contains("tolerance")) cfg.tolerance = require_number(j, "tolerance", ctx);
    cfg.validate();
    return cfg;
}

json diagnostics_to_json(const GateDiagnostics& d) {
    json j;
    auto matrix = [](const Eigen::MatrixXcd& m) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
            rows.push_back(row);
        }
        return rows;
    };
    j["alpha"] = matrix(d.alpha);
    j["dalpha_domega"] = matrix(d.dalpha_domega);
    j["theta"] = d.theta;
    j["dtheta_domega"] = d.dtheta_domega;
    j["dtheta_weighted"] = d.dtheta_weighted;
    j["higher_dtheta"] = d.higher_dtheta;
    j["err_alpha"] = d.err_alpha;
    j["err_theta"] = d.err_theta;
    return j;
}

void write_diagnostics_csv(std::ostream& os, const GateDiagnostics& d,
                           const std::optional<FileMeta>& meta) {
    if (meta) os << meta->csv_comment("alpha=1 dalpha_domega=s theta=rad dtheta=s^j err=1");
    os << "quantity,ion,mode,re,im\n";
    for (int r = 0; r < 2; ++r)
        for (Eigen::Index k = 0; k < d.alpha.cols(); ++k)
            os << "alpha," << r << "," << k << "," << fmt(d.alpha(r, k).real()) << ","
               << fmt(d.alpha(r, k).imag()) << "\n";
    for (int r = 0; r < 2; ++r)
        for (Eigen::Index k = 0; k < d.dalpha_domega.cols(); ++k)
            os << "dalpha_domega," << r << "," << k << "," << fmt(d.dalpha_domega(r, k).real())
               << "," << fmt(d.dalpha_domega(r, k).imag()) << "\n";
    os << "theta,,," << fmt(d.theta) << ",0\n";
    for (std::size_t k = 0; k < d.dtheta_domega.size(); ++k)
        os << "dtheta_domega,," << k << "," << fmt(d.dtheta_domega[k]) << ",0\n";
    os << "dtheta_weighted,,," << fmt(d.dtheta_weighted) << ",0\n";
    for (std::size_t i = 0; i < d.higher_dtheta.size(); ++i)
        os << "dtheta_weighted_order" << (i + 2) << ",,," << fmt(d.higher_dtheta[i]) << ",0\n";
    os << "err_alpha,,," << fmt(d.err_alpha) << ",0\n";
    os << "err_theta,,," << fmt(d.err_theta) << ",0\n";
}

json optimizer_report_to_json(const OptimizerReport& report) {
    json j;
    j["pulse"] = pulse_to_json(report.pulse);
    j["cost_history"] = report.cost_history;
    j["converged"] = report.converged;
    j["final_cost"] = report.final_cost;
    j["required_amplitude_hz"] = rad_to_hz(report.required_amplitude);
    j["best_start"] = report.best_start;
    j["robustness_check"] = report.robustness_check;
    j["diagnostics"] = diagnostics_to_json(report.final_diagnostics);
    return j;
}

json am_solution_to_json(const AmSolution& s) {
    json j;
    j["betas"] = s.betas;
    j["residual_theta"] = s.residual_theta;
    j["residual_orders"] = s.residual_orders;
    j["solve_residuals"] = s.solve_residuals;
    j["condition_number"] = s.condition_number;
    j["seed_thetas"] = s.seed_thetas;
    j["seed_gradients"] = s.seed_gradients;
    j["composite"] = pulse_to_json(s.composite);
    return j;
}

void write_scan_csv(std::ostream& os, const ScanResult& scan,
                    const std::optional<FileMeta>& meta) {
    if (meta)
        os << meta->csv_comment(
            "offset_hz=Hz populations=1 contrast=1 fidelity=1 err_alpha=1 err_theta=rad^2");
    os << "offset_hz,p00,p11,p01_10,contrast,fidelity,err_alpha,err_theta\n";
    for (const ScanPoint& p : scan.points) {
        os << fmt(rad_to_hz(p.offset)) << "," << fmt(p.p00) << "," << fmt(p.p11) << ","
           << fmt(p.p01_10) << "," << fmt(p.contrast) << "," << fmt(p.fidelity) << ","
           << fmt(p.err_alpha) << "," << fmt(p.err_theta) << "\n";
    }
}

void write_ff_csv(std::ostream& os, const FilterFunctionCurve& curve,
                  const std::optional<FileMeta>& meta) {
    if (meta) os << meta->csv_comment("freq_hz=Hz f_alpha=1 f_theta=1");
    os << "freq_hz,f_alpha,f_theta\n";
    for (std::size_t i = 0; i < curve.freqs_hz.size(); ++i)
        os << fmt(curve.freqs_hz[i]) << "," << fmt(curve.f_alpha[i]) << ","
           << fmt(curve.f_theta[i]) << "\n";
}

}  // namespace msgate
