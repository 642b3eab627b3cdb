// msgate command-line front end. Links the shared C API only; JSON job
// configs and argument handling are local concerns. Frequencies are cyclic Hz
// on every flag and in every file; the library converts internally.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "msgate/msgate_c.h"

using nlohmann::json;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
double hz_to_rad(double f) { return kTwoPi * f; }

struct CliError {
    int code;
    std::string message;
};

void check(int rc) {
    if (rc != MSG_OK) throw CliError{rc, msg_last_error()};
}

[[noreturn]] void die_config(const std::string& msg) { throw CliError{MSG_ERR_CONFIG, msg}; }

template <typename T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    explicit Handle(T* q) : p(q) {}
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    Handle(Handle&& other) noexcept : p(other.p) { other.p = nullptr; }
    Handle& operator=(Handle&& other) noexcept {
        if (this != &other) {
            reset();
            p = other.p;
            other.p = nullptr;
        }
        return *this;
    }
    ~Handle() { reset(); }
    void reset() {
        if (p) Free(p);
        p = nullptr;
    }
    T** out() {
        reset();
        return &p;
    }
    T* get() const { return p; }
};

using ModeSpecH = Handle<msg_modespec, msg_modespec_free>;
using PulseH = Handle<msg_pulse, msg_pulse_free>;
using DiagH = Handle<msg_diag, msg_diag_free>;
using ScanH = Handle<msg_scan, msg_scan_free>;

struct OwnedString {
    char* p = nullptr;
    ~OwnedString() { msg_string_free(p); }
    char** out() { return &p; }
    std::string str() const { return p ? p : ""; }
};

std::string fnv_hash(const std::string& data) {
    unsigned long long h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", h);
    return buf;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) die_config("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        die_config("parse failure in " + path + ": " + e.what());
    }
    return j;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) die_config("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

json meta_block(const std::string& hash, const char* units) {
    return json{{"tool", "msgate"}, {"version", msg_version()}, {"config_hash", hash},
                {"units", units}};
}

std::vector<int> parse_ions(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    if (out.size() != 2) die_config("--ions expects two comma-separated indices, e.g. 0,1");
    return out;
}

std::vector<double> parse_offsets_hz(const json& spec) {
    std::vector<double> out;
    if (spec.is_array()) {
        for (const auto& v : spec) out.push_back(v.get<double>());
        return out;
    }
    const std::string s = spec.get<std::string>();
    const auto c1 = s.find(':');
    const auto c2 = s.rfind(':');
    if (c1 == std::string::npos || c2 == c1) {
        // comma list
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
        if (out.empty()) die_config("offsets: empty list");
        return out;
    }
    const double start = std::stod(s.substr(0, c1));
    const double step = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
    const double stop = std::stod(s.substr(c2 + 1));
    if (step <= 0.0) die_config("offsets: step must be > 0");
    for (double v = start; v <= stop + 0.5 * step; v += step) out.push_back(v);
    return out;
}

ModeSpecH load_modes(const json& cfg) {
    if (!cfg.contains("modes")) die_config("missing 'modes' input path");
    ModeSpecH modes;
    check(msg_modespec_load(cfg["modes"].get<std::string>().c_str(), modes.out()));
    return modes;
}

PulseH load_pulse_file(const std::string& path) {
    PulseH pulse;
    check(msg_pulse_load(path.c_str(), pulse.out()));
    return pulse;
}

std::pair<int, int> ion_pair(const json& cfg) {
    if (!cfg.contains("ions")) die_config("missing 'ions' (e.g. \"0,1\")");
    if (cfg["ions"].is_array()) return {cfg["ions"][0].get<int>(), cfg["ions"][1].get<int>()};
    const auto v = parse_ions(cfg["ions"].get<std::string>());
    return {v[0], v[1]};
}

// ---- command handlers; each takes the normalized job config ---------------

int cmd_modes(const json& cfg, const std::string& hash) {
    if (!cfg.contains("output")) die_config("missing 'output' path");
    ModeSpecH modes;
    const std::string kind = cfg.value("kind", "two_ion");
    if (kind == "two_ion") {
        check(msg_modespec_two_ion(hz_to_rad(cfg.at("com_hz").get<double>()),
                                   hz_to_rad(cfg.at("tilt_hz").get<double>()),
                                   cfg.at("eta").get<double>(), modes.out()));
    } else if (kind == "chain") {
        check(msg_modespec_chain(cfg.at("num_ions").get<int>(),
                                 hz_to_rad(cfg.at("axial_hz").get<double>()),
                                 hz_to_rad(cfg.at("radial_hz").get<double>()),
                                 cfg.at("eta_com").get<double>(), modes.out()));
    } else {
        die_config("modes: kind must be 'two_ion' or 'chain'");
    }
    if (cfg.contains("drift_ratios")) {
        const auto r = cfg["drift_ratios"].get<std::vector<double>>();
        check(msg_modespec_set_drift_ratios(modes.get(), r.data(), (int)r.size()));
    }
    check(msg_modespec_save(modes.get(), cfg["output"].get<std::string>().c_str(), hash.c_str()));
    std::cout << "wrote " << cfg["output"].get<std::string>() << "\n";
    return 0;
}

int cmd_design(const json& cfg, const std::string& hash) {
    if (!cfg.contains("output")) die_config("missing 'output' path");
    const ModeSpecH modes = load_modes(cfg);
    const auto [j1, j2] = ion_pair(cfg);
    json opt_cfg;
    if (cfg.contains("config"))
        opt_cfg = load_json(cfg["config"].get<std::string>());
    else if (cfg.contains("optimizer"))
        opt_cfg = cfg["optimizer"];
    else
        die_config("design: provide 'config' (path) or an inline 'optimizer' block");

    PulseH pulse;
    OwnedString report;
    check(msg_optimize_fm(modes.get(), j1, j2, opt_cfg.dump().c_str(), pulse.out(),
                          report.out()));
    check(msg_pulse_save(pulse.get(), cfg["output"].get<std::string>().c_str(), hash.c_str()));
    if (cfg.contains("report")) {
        json rep = json::parse(report.str());
        rep["meta"] = meta_block(hash, "cost=1 required_amplitude_hz=Hz theta=rad");
        write_json(rep, cfg["report"].get<std::string>());
    }
    const json rep = json::parse(report.str());
    std::cout << "wrote " << cfg["output"].get<std::string>()
              << " (converged=" << (rep["converged"].get<bool>() ? "yes" : "no")
              << ", final_cost=" << rep["final_cost"].get<double>() << ")\n";
    return 0;
}

int cmd_arobust(const json& cfg, const std::string& hash) {
    if (!cfg.contains("output")) die_config("missing 'output' path");
    const ModeSpecH modes = load_modes(cfg);
    const auto [j1, j2] = ion_pair(cfg);

    std::vector<double> ratios;
    const double* ratios_ptr = nullptr;
    if (cfg.contains("ratios")) {
        ratios = cfg["ratios"].get<std::vector<double>>();
        ratios_ptr = ratios.data();
    }

    PulseH composite;
    OwnedString solution;
    if (cfg.contains("half")) {
        const PulseH half = load_pulse_file(cfg["half"].get<std::string>());
        check(msg_arobust_two_ion(half.get(), modes.get(), j1, j2, composite.out(),
                                  solution.out()));
    } else if (cfg.contains("p1") && cfg.contains("p2")) {
        const PulseH p1 = load_pulse_file(cfg["p1"].get<std::string>());
        const PulseH p2 = load_pulse_file(cfg["p2"].get<std::string>());
        check(msg_arobust_am(p1.get(), p2.get(), modes.get(), j1, j2, ratios_ptr,
                             composite.out(), solution.out()));
    } else if (cfg.contains("pulses")) {
        std::vector<PulseH> seeds;
        std::vector<const msg_pulse*> raw;
        for (const auto& p : cfg["pulses"]) {
            seeds.push_back(load_pulse_file(p.get<std::string>()));
            raw.push_back(seeds.back().get());
        }
        const int order = cfg.value("order", (int)raw.size() - 1);
        check(msg_arobust_nth(raw.data(), (int)raw.size(), order, modes.get(), j1, j2,
                              ratios_ptr, composite.out(), solution.out()));
    } else {
        die_config("arobust: provide 'half', 'p1'+'p2', or 'pulses'");
    }
    check(msg_pulse_save(composite.get(), cfg["output"].get<std::string>().c_str(),
                         hash.c_str()));
    if (cfg.contains("solution")) {
        json sol = json::parse(solution.str());
        sol["meta"] = meta_block(hash, "betas=1 residuals=rad,s^j condition_number=1");
        write_json(sol, cfg["solution"].get<std::string>());
    }
    std::cout << "wrote " << cfg["output"].get<std::string>() << "\n";
    return 0;
}

int cmd_diagnose(const json& cfg, const std::string& hash) {
    if (!cfg.contains("output")) die_config("missing 'output' path");
    const ModeSpecH modes = load_modes(cfg);
    if (!cfg.contains("pulse")) die_config("missing 'pulse' input path");
    const PulseH pulse = load_pulse_file(cfg["pulse"].get<std::string>());
    const auto [j1, j2] = ion_pair(cfg);
    const int max_order = cfg.value("max_order", 1);

    DiagH diag;
    check(msg_diag_compute(pulse.get(), modes.get(), j1, j2, max_order, diag.out()));
    const std::string out = cfg["output"].get<std::string>();
    const std::string format = cfg.value("format", out.ends_with(".csv") ? "csv" : "json");
    if (format == "csv") {
        check(msg_diag_write_csv(diag.get(), out.c_str(), hash.c_str()));
    } else {
        OwnedString js;
        check(msg_diag_to_json(diag.get(), js.out()));
        json j = json::parse(js.str());
        j["meta"] = meta_block(hash, "alpha=1 dalpha_domega=s theta=rad dtheta=s^j err=1");
        write_json(j, out);
    }
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_scan(const json& cfg, const std::string& hash) {
    if (!cfg.contains("output")) die_config("missing 'output' path");
    const ModeSpecH modes = load_modes(cfg);
    if (!cfg.contains("pulse")) die_config("missing 'pulse' input path");
    const PulseH pulse = load_pulse_file(cfg["pulse"].get<std::string>());
    const auto [j1, j2] = ion_pair(cfg);
    if (!cfg.contains("offsets")) die_config("missing 'offsets' (start:step:stop in Hz)");
    std::vector<double> offsets = parse_offsets_hz(cfg["offsets"]);
    for (double& v : offsets) v = hz_to_rad(v);
    const int repeats = cfg.value("repeats", 1);
    const int n_max = cfg.value("n_max", 0);

    std::string noise_json;
    if (cfg.contains("noise")) noise_json = load_json(cfg["noise"].get<std::string>()).dump();

    ScanH scan;
    check(msg_detuning_scan(pulse.get(), modes.get(), j1, j2, offsets.data(),
                            (int)offsets.size(), repeats,
                            noise_json.empty() ? nullptr : noise_json.c_str(), n_max,
                            scan.out()));
    check(msg_scan_write_csv(scan.get(), cfg["output"].get<std::string>().c_str(),
                             hash.c_str()));
    std::cout << "wrote " << cfg["output"].get<std::string>() << " (" << msg_scan_size(scan.get())
              << " points, repeats=" << repeats << ")\n";
    return 0;
}

int cmd_ff(const json& cfg, const std::string& hash) {
    if (!cfg.contains("output")) die_config("missing 'output' path");
    const ModeSpecH modes = load_modes(cfg);
    if (!cfg.contains("pulse")) die_config("missing 'pulse' input path");
    const PulseH pulse = load_pulse_file(cfg["pulse"].get<std::string>());
    const auto [j1, j2] = ion_pair(cfg);

    const double fmin = cfg.value("fmin_hz", 10.0);
    const double fmax = cfg.value("fmax_hz", 1e6);
    const int points = cfg.value("points", 200);
    if (!(fmin > 0.0) || !(fmax > fmin) || points < 2) die_config("ff: bad frequency grid");
    std::vector<double> freqs(points);
    const double step = std::log(fmax / fmin) / (points - 1);
    for (int i = 0; i < points; ++i) freqs[i] = fmin * std::exp(step * i);

    std::vector<double> fa(points), ft(points);
    check(msg_filter_functions(pulse.get(), modes.get(), j1, j2, freqs.data(), points,
                               fa.data(), ft.data()));
    check(msg_ff_write_csv(freqs.data(), fa.data(), ft.data(), points,
                           cfg["output"].get<std::string>().c_str(), hash.c_str()));

    if (cfg.contains("spectrum")) {
        if (!cfg.contains("error_output"))
            die_config("ff: 'spectrum' requires 'error_output'");
        const json spec = load_json(cfg["spectrum"].get<std::string>());
        double ea = 0.0, et = 0.0;
        int warn = 0;
        check(msg_spectral_error(freqs.data(), fa.data(), ft.data(), points,
                                 spec.dump().c_str(), &ea, &et, &warn));
        json out{{"err_alpha", ea}, {"err_theta", et}, {"accuracy_warning", warn != 0}};
        out["meta"] = meta_block(hash, "err=1");
        write_json(out, cfg["error_output"].get<std::string>());
    }
    std::cout << "wrote " << cfg["output"].get<std::string>() << "\n";
    return 0;
}

int cmd_simulate(const json& cfg, const std::string& hash) {
    if (!cfg.contains("output")) die_config("missing 'output' path");
    const ModeSpecH modes = load_modes(cfg);
    if (!cfg.contains("pulse")) die_config("missing 'pulse' input path");
    const PulseH pulse = load_pulse_file(cfg["pulse"].get<std::string>());
    const auto [j1, j2] = ion_pair(cfg);
    if (!cfg.contains("noise")) die_config("simulate: missing 'noise' input path");
    const std::string noise_json = load_json(cfg["noise"].get<std::string>()).dump();
    const int n_max = cfg.value("n_max", 0);

    std::vector<int> counts = {1};
    if (cfg.contains("counts")) counts = cfg["counts"].get<std::vector<int>>();

    json runs = json::array();
    std::vector<double> xs, fs;
    for (int count : counts) {
        PulseH seq;
        const msg_pulse* target = pulse.get();
        if (count > 1) {
            check(msg_pulse_repeat(pulse.get(), count, seq.out()));
            target = seq.get();
        }
        double obs[5];
        double trace_err = 0.0;
        check(msg_lindblad_observables(target, modes.get(), j1, j2, noise_json.c_str(), n_max,
                                       obs, &trace_err));
        runs.push_back(json{{"gates", count},
                            {"p00", obs[0]},
                            {"p11", obs[1]},
                            {"p01_10", obs[2]},
                            {"contrast", obs[3]},
                            {"fidelity", obs[4]},
                            {"trace_error", trace_err}});
        xs.push_back(count);
        fs.push_back(obs[4]);
    }

    json out{{"runs", runs}};
    if (counts.size() >= 2) {
        double err = 0.0, stderr_ = 0.0;
        check(msg_repeated_gate_fit(xs.data(), fs.data(), (int)xs.size(), &err, &stderr_));
        out["fit"] = json{{"error_per_gate", err}, {"std_error", stderr_}};
    }
    out["meta"] = meta_block(hash, "populations=1 fidelity=1 error_per_gate=1");
    write_json(out, cfg["output"].get<std::string>());
    std::cout << "wrote " << cfg["output"].get<std::string>() << "\n";
    return 0;
}

int dispatch(const std::string& command, json cfg) {
    cfg["command"] = command;
    const std::string hash = fnv_hash(cfg.dump());
    if (command == "modes") return cmd_modes(cfg, hash);
    if (command == "design") return cmd_design(cfg, hash);
    if (command == "arobust") return cmd_arobust(cfg, hash);
    if (command == "diagnose") return cmd_diagnose(cfg, hash);
    if (command == "scan") return cmd_scan(cfg, hash);
    if (command == "ff") return cmd_ff(cfg, hash);
    if (command == "simulate") return cmd_simulate(cfg, hash);
    die_config("unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"msgate: robust and angle-robust Molmer-Sorensen gate pulse toolkit"};
    app.set_version_flag("--version", std::string("msgate ") + msg_version());
    app.require_subcommand(1);

    // modes
    auto* modes_cmd = app.add_subcommand("modes", "construct or convert a mode spec");
    double com_hz = 0, tilt_hz = 0, eta = 0.1, axial_hz = 0, radial_hz = 0, eta_com = 0.1;
    int chain_n = 0;
    std::string modes_out, ratios_csv;
    modes_cmd->add_option("--com-hz", com_hz, "two-ion COM mode frequency (Hz)");
    modes_cmd->add_option("--tilt-hz", tilt_hz, "two-ion tilt mode frequency (Hz)");
    modes_cmd->add_option("--eta", eta, "two-ion Lamb-Dicke parameter");
    modes_cmd->add_option("--chain", chain_n, "chain constructor: number of ions");
    modes_cmd->add_option("--axial-hz", axial_hz, "chain axial frequency (Hz)");
    modes_cmd->add_option("--radial-hz", radial_hz, "chain radial frequency (Hz)");
    modes_cmd->add_option("--eta-com", eta_com, "chain COM Lamb-Dicke parameter");
    modes_cmd->add_option("--drift-ratios", ratios_csv, "comma-separated drift ratios");
    modes_cmd->add_option("-o,--output", modes_out, "output mode-spec JSON")->required();

    // design
    auto* design_cmd = app.add_subcommand("design", "optimize a robust FM pulse");
    std::string d_modes, d_config, d_ions = "0,1", d_out, d_report;
    design_cmd->add_option("--modes", d_modes, "mode-spec JSON")->required();
    design_cmd->add_option("--config", d_config, "optimizer config JSON")->required();
    design_cmd->add_option("--ions", d_ions, "target ion pair, e.g. 0,1");
    design_cmd->add_option("-o,--output", d_out, "output pulse JSON")->required();
    design_cmd->add_option("--report", d_report, "optimizer report JSON");

    // arobust
    auto* aro_cmd = app.add_subcommand("arobust", "build an A-robust composite");
    std::string a_modes, a_ions = "0,1", a_half, a_p1, a_p2, a_pulses, a_out, a_sol, a_ratios;
    int a_order = 0;
    aro_cmd->add_option("--modes", a_modes, "mode-spec JSON")->required();
    aro_cmd->add_option("--ions", a_ions, "target ion pair");
    aro_cmd->add_option("--half", a_half, "robust XX(pi/8) half pulse (two-ion mirror)");
    aro_cmd->add_option("--p1", a_p1, "first robust seed pulse (AM concatenation)");
    aro_cmd->add_option("--p2", a_p2, "second robust seed pulse");
    aro_cmd->add_option("--pulses", a_pulses, "comma-separated seed pulses (n-th order)");
    aro_cmd->add_option("--order", a_order, "suppression order for --pulses");
    aro_cmd->add_option("--ratios", a_ratios, "comma-separated drift ratios r_k");
    aro_cmd->add_option("-o,--output", a_out, "output composite pulse JSON")->required();
    aro_cmd->add_option("--solution", a_sol, "AM solution JSON");

    // diagnose
    auto* diag_cmd = app.add_subcommand("diagnose", "gate diagnostics for a pulse");
    std::string g_modes, g_pulse, g_ions = "0,1", g_out, g_format;
    int g_order = 1;
    diag_cmd->add_option("--modes", g_modes, "mode-spec JSON")->required();
    diag_cmd->add_option("--pulse", g_pulse, "pulse JSON")->required();
    diag_cmd->add_option("--ions", g_ions, "target ion pair");
    diag_cmd->add_option("--max-order", g_order, "highest weighted angle-derivative order");
    diag_cmd->add_option("--format", g_format, "json or csv (default from extension)");
    diag_cmd->add_option("-o,--output", g_out, "output path")->required();

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "detuning scan");
    std::string s_modes, s_pulse, s_ions = "0,1", s_offsets, s_noise, s_out;
    int s_repeats = 1, s_nmax = 0;
    scan_cmd->add_option("--modes", s_modes, "mode-spec JSON")->required();
    scan_cmd->add_option("--pulse", s_pulse, "pulse JSON")->required();
    scan_cmd->add_option("--ions", s_ions, "target ion pair");
    scan_cmd->add_option("--offsets", s_offsets, "start:step:stop or comma list (Hz)")
        ->required();
    scan_cmd->add_option("--repeats", s_repeats, "concatenated gate count");
    scan_cmd->add_option("--noise", s_noise, "noise model JSON (switches to master equation)");
    scan_cmd->add_option("--n-max", s_nmax, "Fock truncation for the noisy path");
    scan_cmd->add_option("-o,--output", s_out, "output CSV")->required();

    // ff
    auto* ff_cmd = app.add_subcommand("ff", "filter functions");
    std::string f_modes, f_pulse, f_ions = "0,1", f_out, f_spec, f_err;
    double f_min = 10.0, f_max = 1e6;
    int f_points = 200;
    ff_cmd->add_option("--modes", f_modes, "mode-spec JSON")->required();
    ff_cmd->add_option("--pulse", f_pulse, "pulse JSON")->required();
    ff_cmd->add_option("--ions", f_ions, "target ion pair");
    ff_cmd->add_option("--fmin", f_min, "grid minimum (Hz)");
    ff_cmd->add_option("--fmax", f_max, "grid maximum (Hz)");
    ff_cmd->add_option("--points", f_points, "grid points");
    ff_cmd->add_option("--spectrum", f_spec, "noise spectrum JSON (adds error integral)");
    ff_cmd->add_option("--error-out", f_err, "spectral error output JSON");
    ff_cmd->add_option("-o,--output", f_out, "output CSV")->required();

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "master-equation simulation");
    std::string m_modes, m_pulse, m_ions = "0,1", m_noise, m_out, m_counts;
    int m_nmax = 0;
    sim_cmd->add_option("--modes", m_modes, "mode-spec JSON")->required();
    sim_cmd->add_option("--pulse", m_pulse, "pulse JSON")->required();
    sim_cmd->add_option("--ions", m_ions, "target ion pair");
    sim_cmd->add_option("--noise", m_noise, "noise model JSON")->required();
    sim_cmd->add_option("--n-max", m_nmax, "Fock truncation per mode");
    sim_cmd->add_option("--counts", m_counts, "gate-count schedule, e.g. 1,5,9,13");
    sim_cmd->add_option("-o,--output", m_out, "output JSON")->required();

    // run
    auto* run_cmd = app.add_subcommand("run", "run a job config file");
    std::string job_path;
    run_cmd->add_option("job", job_path, "job config JSON with a 'command' field")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (modes_cmd->parsed()) {
            json cfg{{"output", modes_out}};
            if (chain_n > 0) {
                cfg["kind"] = "chain";
                cfg["num_ions"] = chain_n;
                cfg["axial_hz"] = axial_hz;
                cfg["radial_hz"] = radial_hz;
                cfg["eta_com"] = eta_com;
            } else {
                cfg["kind"] = "two_ion";
                cfg["com_hz"] = com_hz;
                cfg["tilt_hz"] = tilt_hz;
                cfg["eta"] = eta;
            }
            if (!ratios_csv.empty()) {
                std::vector<double> r;
                std::stringstream ss(ratios_csv);
                std::string item;
                while (std::getline(ss, item, ',')) r.push_back(std::stod(item));
                cfg["drift_ratios"] = r;
            }
            return dispatch("modes", cfg);
        }
        if (design_cmd->parsed()) {
            json cfg{{"modes", d_modes}, {"config", d_config}, {"ions", d_ions},
                     {"output", d_out}};
            if (!d_report.empty()) cfg["report"] = d_report;
            return dispatch("design", cfg);
        }
        if (aro_cmd->parsed()) {
            json cfg{{"modes", a_modes}, {"ions", a_ions}, {"output", a_out}};
            if (!a_half.empty()) cfg["half"] = a_half;
            if (!a_p1.empty()) cfg["p1"] = a_p1;
            if (!a_p2.empty()) cfg["p2"] = a_p2;
            if (!a_pulses.empty()) {
                json arr = json::array();
                std::stringstream ss(a_pulses);
                std::string item;
                while (std::getline(ss, item, ',')) arr.push_back(item);
                cfg["pulses"] = arr;
                if (a_order > 0) cfg["order"] = a_order;
            }
            if (!a_ratios.empty()) {
                std::vector<double> r;
                std::stringstream ss(a_ratios);
                std::string item;
                while (std::getline(ss, item, ',')) r.push_back(std::stod(item));
                cfg["ratios"] = r;
            }
            if (!a_sol.empty()) cfg["solution"] = a_sol;
            return dispatch("arobust", cfg);
        }
        if (diag_cmd->parsed()) {
            json cfg{{"modes", g_modes}, {"pulse", g_pulse}, {"ions", g_ions},
                     {"max_order", g_order}, {"output", g_out}};
            if (!g_format.empty()) cfg["format"] = g_format;
            return dispatch("diagnose", cfg);
        }
        if (scan_cmd->parsed()) {
            json cfg{{"modes", s_modes},   {"pulse", s_pulse},  {"ions", s_ions},
                     {"offsets", s_offsets}, {"repeats", s_repeats}, {"output", s_out}};
            if (!s_noise.empty()) cfg["noise"] = s_noise;
            if (s_nmax > 0) cfg["n_max"] = s_nmax;
            return dispatch("scan", cfg);
        }
        if (ff_cmd->parsed()) {
            json cfg{{"modes", f_modes}, {"pulse", f_pulse},   {"ions", f_ions},
                     {"fmin_hz", f_min}, {"fmax_hz", f_max},   {"points", f_points},
                     {"output", f_out}};
            if (!f_spec.empty()) cfg["spectrum"] = f_spec;
            if (!f_err.empty()) cfg["error_output"] = f_err;
            return dispatch("ff", cfg);
        }
        if (sim_cmd->parsed()) {
            json cfg{{"modes", m_modes}, {"pulse", m_pulse}, {"ions", m_ions},
                     {"noise", m_noise}, {"output", m_out}};
            if (m_nmax > 0) cfg["n_max"] = m_nmax;
            if (!m_counts.empty()) {
                std::vector<int> counts;
                std::stringstream ss(m_counts);
                std::string item;
                while (std::getline(ss, item, ',')) counts.push_back(std::stoi(item));
                cfg["counts"] = counts;
            }
            return dispatch("simulate", cfg);
        }
        if (run_cmd->parsed()) {
            json cfg = load_json(job_path);
            if (!cfg.contains("command")) die_config("job config: missing 'command'");
            const std::string command = cfg["command"].get<std::string>();
            cfg.erase("command");
            return dispatch(command, cfg);
        }
    } catch (const CliError& e) {
        const char* tag = e.code == MSG_ERR_INFEASIBLE ? "E_INFEASIBLE"
                          : e.code == MSG_ERR_NUMERIC  ? "E_NUMERIC"
                                                       : "E_CONFIG";
        std::cerr << tag << ": " << e.message << "\n";
        return e.code;
    } catch (const json::exception& e) {
        std::cerr << "E_CONFIG: " << e.what() << "\n";
        return MSG_ERR_CONFIG;
    } catch (const std::exception& e) {
        std::cerr << "E_NUMERIC: " << e.what() << "\n";
        return MSG_ERR_NUMERIC;
    }
    return 0;
}
