#pragma once

#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>

#include "msgate/arobust.hpp"
#include "msgate/filter_function.hpp"
#include "msgate/mode_model.hpp"
#include "msgate/pulse.hpp"
#include "msgate/robust_optimizer.hpp"
#include "msgate/scan_sim.hpp"

namespace msgate {

// Header stamped into every output file: tool version, a hash of the producing
// configuration and the unit conventions of the format. JSON files carry it as
// a "meta" object, CSV files as leading '#' comment lines.
struct FileMeta {
    std::string version;
    std::string config_hash;

    nlohmann::json to_json(const char* units) const;
    std::string csv_comment(const char* units) const;
};

// FNV-1a over the canonical (sorted-key) dump of a JSON value, 16 hex digits.
std::string config_hash(const nlohmann::json& config);

// Frequencies are cyclic Hz on disk and rad/s in memory; these converters are
// the only crossing point.
nlohmann::json mode_spec_to_json(const ModeSpec& spec);
ModeSpec mode_spec_from_json(const nlohmann::json& j);
void save_mode_spec(const ModeSpec& spec, const std::string& path,
                    const std::optional<FileMeta>& meta = {});
ModeSpec load_mode_spec(const std::string& path);

nlohmann::json pulse_to_json(const PulseProgram& pulse);
PulseProgram pulse_from_json(const nlohmann::json& j);
void save_pulse(const PulseProgram& pulse, const std::string& path,
                const std::optional<FileMeta>& meta = {});
PulseProgram load_pulse(const std::string& path);

NoiseModel noise_model_from_json(const nlohmann::json& j, int num_modes);
nlohmann::json noise_model_to_json(const NoiseModel& noise);

NoiseSpectrum spectrum_from_json(const nlohmann::json& j);

OptimizerConfig optimizer_config_from_json(const nlohmann::json& j);
nlohmann::json optimizer_report_to_json(const OptimizerReport& report);

// Complex numbers exported as [re, im] pairs.
nlohmann::json diagnostics_to_json(const GateDiagnostics& d);
void write_diagnostics_csv(std::ostream& os, const GateDiagnostics& d,
                           const std::optional<FileMeta>& meta = {});

nlohmann::json am_solution_to_json(const AmSolution& s);

// offset_hz,p00,p11,p01_10,contrast,fidelity,err_alpha,err_theta
void write_scan_csv(std::ostream& os, const ScanResult& scan,
                    const std::optional<FileMeta>& meta = {});

// freq_hz,f_alpha,f_theta
void write_ff_csv(std::ostream& os, const FilterFunctionCurve& curve,
                  const std::optional<FileMeta>& meta = {});

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const nlohmann::json& j, const std::string& path);

}  // namespace msgate
