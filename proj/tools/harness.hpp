#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace rvml::harness {

using json = nlohmann::ordered_json;

/** One named comparison. `relation` is "<", "<=", ">", "==" and reads value REL threshold. */
struct Check {
    std::string name;
    int criterion = 0;   // acceptance criterion number, 0 for supporting checks
    double value = 0.0;
    double threshold = 0.0;
    std::string relation = "<";
    bool pass = false;
};

struct Timing {
    std::string name;
    int criterion = 0;
    double seconds = 0.0;
    double limit = 0.0;
    bool pass = false;
};

struct RunReport {
    std::string subcommand;
    json config;                  // echo without run-placement keys (threads, output_dir)
    std::vector<Check> checks;
    std::vector<Timing> timings;
    json values = json::object(); // computed artifacts worth keeping (K2 values, delta_hat, ...)
    std::vector<std::string> outputs;

    bool all_pass() const;
    const Check* find(const std::string& name) const;
    json to_json() const;         // deterministic given (config, seed)
    json timings_json() const;    // wall-clock data kept apart
};

std::string version_stamp();

// The embedded defaults and schema (copies of config/defaults.json and config/schema.json).
json default_config();
json config_schema();

// Subset of JSON Schema: type, properties, additionalProperties, enum, items,
// minItems, maxItems, minimum, maximum, exclusiveMinimum, exclusiveMaximum.
// Throws ConfigError naming the offending path, e.g. "/relax/dtt: unknown key".
void validate(const json& doc, const json& schema, const std::string& path = "");

// Validate `user` on its own, merge it over the defaults, validate the result.
json merge_config(const json& user);

// Environment overrides: RVML_OUTPUT_DIR and RVML_THREADS.
void apply_environment(json& cfg);

const std::vector<std::string>& subcommands();

/**
 * Run one subcommand ("constants", "kernel-check", "assemble", "momentfn",
 * "relax", "billiard", "cavity", "all"). Writes report.json, timings.json and
 * the subcommand's data files into cfg["output_dir"]. ConfigError and
 * NumericalError propagate.
 */
RunReport run(const std::string& subcommand, const json& cfg);

// 0 when every check and timing passes, 1 otherwise.
int exit_code(const RunReport& r);

} // namespace rvml::harness
