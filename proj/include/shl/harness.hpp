// Scenario runner: config files, output files and the run manifest.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace shl {

inline constexpr const char* version = "0.1.0";
inline constexpr std::uint64_t default_seed = 20240611;

enum ExitCode : int { exit_pass = 0, exit_verdict = 1, exit_config = 2, exit_compute = 3 };

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what) : std::runtime_error(what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class OutputFormat { csv, json };

// Scenario parameters live in `params` under "section.key" names; run-level
// settings have their own fields. Values are kept as text and typed on use.
struct RunConfig {
    std::string scenario;
    std::uint64_t seed = default_seed;
    bool seed_set = false;  // seed came from a file or flag
    int samples = 0;  // 0: scenario default
    std::string out_dir = "shl_out";
    OutputFormat format = OutputFormat::csv;
    std::map<std::string, std::string> params;

    double number(const std::string& key, double fallback) const;
    int integer(const std::string& key, int fallback) const;
    std::string text(const std::string& key, const std::string& fallback) const;
    std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const;
    int samples_or(int fallback) const { return samples > 0 ? samples : fallback; }
};

enum class KeyType { number, integer, text, list };

struct KeySpec {
    std::string key;  // "section.key"
    KeyType type;
    std::string help;
};

const std::vector<KeySpec>& known_keys();

// `[section]` headers and `key = value` lines; '#' starts a comment. Keys in
// the [run] section set scenario, seed, samples, out and format.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Sets one "section.key" with type checking; throws ConfigError naming the key.
void set_key(RunConfig& c, const std::string& key, const std::string& value);

// Scenario known, every value in range. Runs before any compute.
void validate(const RunConfig& c);

nlohmann::json config_echo(const RunConfig& c);

struct ScenarioInfo {
    std::string name;
    std::string exercises;
    std::string defaults;
};

const std::vector<ScenarioInfo>& scenario_table();
std::string list_scenarios_text();
nlohmann::json list_scenarios_json();

struct Check {
    std::string name;
    bool pass = false;
    nlohmann::json detail;
};

// Per-run state handed to a scenario: seeds, checks and written files.
class RunContext {
public:
    RunContext(const RunConfig& c, std::filesystem::path dir);

    const RunConfig& config() const { return cfg_; }

    // Seed for a named operation, derived from the master seed and recorded.
    std::uint64_t op_seed(const std::string& op);

    void check(const std::string& name, bool pass, nlohmann::json detail = nlohmann::json::object());

    // Table in the configured format: <stem>.csv or <stem>.json (array of row objects).
    void write_table(const std::string& stem, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);
    // Always CSV: <stem>_curve.csv.
    void write_curve(const std::string& stem, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);
    void write_json(const std::string& stem, const nlohmann::json& j);

    const std::vector<Check>& checks() const { return checks_; }
    const std::vector<std::filesystem::path>& files() const { return files_; }
    const std::map<std::string, std::uint64_t>& op_seeds() const { return seeds_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    void write_text(const std::filesystem::path& name, const std::string& body);

    RunConfig cfg_;
    std::filesystem::path dir_;
    std::vector<Check> checks_;
    std::vector<std::filesystem::path> files_;
    std::map<std::string, std::uint64_t> seeds_;
};

using ScenarioFn = void (*)(RunContext&);
ScenarioFn find_scenario(const std::string& name);

struct RunResult {
    int exit_code = exit_pass;
    std::vector<Check> checks;
    std::filesystem::path manifest;
    std::string error;
};

// Validates, runs the scenario into <out>/<scenario>/, writes verdicts and
// manifest.json. A config error returns exit 2 before anything is written.
RunResult run_scenario(const RunConfig& c);

std::string sha256_file(const std::filesystem::path& p);

}  // namespace shl
