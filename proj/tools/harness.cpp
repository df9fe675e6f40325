#include "harness.hpp"
#include "suites.hpp"

#include "rvml_embedded.hpp"

#include <rvml/common.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace rvml::harness {

namespace {

std::string type_of(const json& v)
{
    if (v.is_object()) return "object";
    if (v.is_array()) return "array";
    if (v.is_string()) return "string";
    if (v.is_boolean()) return "boolean";
    if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
    if (v.is_number_float()) return "number";
    return "null";
}

bool type_matches(const json& v, const std::string& want)
{
    const std::string have = type_of(v);
    if (want == have) return true;
    if (want == "number" && have == "integer") return true;
    // 3.0 is acceptable where an integer is expected.
    if (want == "integer" && have == "number") {
        const double d = v.get<double>();
        return std::isfinite(d) && d == std::floor(d);
    }
    return false;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

} // namespace

bool RunReport::all_pass() const
{
    for (const auto& c : checks)
        if (!c.pass) return false;
    for (const auto& t : timings)
        if (!t.pass) return false;
    return true;
}

const Check* RunReport::find(const std::string& name) const
{
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

json RunReport::to_json() const
{
    json j;
    j["tool"] = "rvml";
    j["version"] = version_stamp();
    j["subcommand"] = subcommand;
    j["config"] = config;
    json cs = json::array();
    bool pass = true;
    for (const auto& c : checks) {
        cs.push_back({{"name", c.name}, {"criterion", c.criterion}, {"value", c.value},
                      {"relation", c.relation}, {"threshold", c.threshold}, {"pass", c.pass}});
        pass = pass && c.pass;
    }
    j["checks"] = cs;
    j["values"] = values;
    j["outputs"] = outputs;
    j["checks_pass"] = pass;
    return j;
}

json RunReport::timings_json() const
{
    json ts = json::array();
    bool pass = true;
    for (const auto& t : timings) {
        ts.push_back({{"name", t.name}, {"criterion", t.criterion}, {"seconds", t.seconds},
                      {"limit", t.limit}, {"pass", t.pass}});
        pass = pass && t.pass;
    }
    return {{"subcommand", subcommand}, {"threads", thread_budget()}, {"timings", ts}, {"timings_pass", pass}};
}

std::string version_stamp()
{
    return std::string(embedded::version) + "+" + embedded::commit;
}

json default_config() { return json::parse(embedded::defaults_json); }
json config_schema() { return json::parse(embedded::schema_json); }

void validate(const json& doc, const json& schema, const std::string& path)
{
    const std::string where = path.empty() ? "/" : path;
    if (schema.contains("type") && !type_matches(doc, schema["type"].get<std::string>()))
        throw ConfigError(where + ": expected " + schema["type"].get<std::string>() + ", got " + type_of(doc));
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& e : schema["enum"]) found = found || e == doc;
        if (!found) throw ConfigError(where + ": value " + doc.dump() + " not in " + schema["enum"].dump());
    }
    if (doc.is_number()) {
        const double v = doc.get<double>();
        if (schema.contains("minimum") && v < schema["minimum"].get<double>())
            throw ConfigError(where + ": " + doc.dump() + " below minimum " + schema["minimum"].dump());
        if (schema.contains("maximum") && v > schema["maximum"].get<double>())
            throw ConfigError(where + ": " + doc.dump() + " above maximum " + schema["maximum"].dump());
        if (schema.contains("exclusiveMinimum") && v <= schema["exclusiveMinimum"].get<double>())
            throw ConfigError(where + ": " + doc.dump() + " must exceed " + schema["exclusiveMinimum"].dump());
        if (schema.contains("exclusiveMaximum") && v >= schema["exclusiveMaximum"].get<double>())
            throw ConfigError(where + ": " + doc.dump() + " must be below " + schema["exclusiveMaximum"].dump());
    }
    if (doc.is_object()) {
        const json props = schema.value("properties", json::object());
        const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"] == false;
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            const std::string sub = path + "/" + it.key();
            if (props.contains(it.key()))
                validate(it.value(), props[it.key()], sub);
            else if (closed)
                throw ConfigError(sub + ": unknown key");
        }
    }
    if (doc.is_array()) {
        if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>())
            throw ConfigError(where + ": needs at least " + schema["minItems"].dump() + " items");
        if (schema.contains("maxItems") && doc.size() > schema["maxItems"].get<std::size_t>())
            throw ConfigError(where + ": allows at most " + schema["maxItems"].dump() + " items");
        if (schema.contains("items"))
            for (std::size_t i = 0; i < doc.size(); ++i)
                validate(doc[i], schema["items"], path + "/" + std::to_string(i));
    }
}

json merge_config(const json& user)
{
    const json schema = config_schema();
    validate(user, schema);
    json cfg = default_config();
    cfg.merge_patch(user);
    validate(cfg, schema);
    return cfg;
}

void apply_environment(json& cfg)
{
    if (const char* dir = std::getenv("RVML_OUTPUT_DIR"); dir && *dir) cfg["output_dir"] = dir;
    if (const char* th = std::getenv("RVML_THREADS"); th && *th) {
        char* end = nullptr;
        const long n = std::strtol(th, &end, 10);
        if (*end != '\0' || n < 1 || n > 256) throw ConfigError(std::string("RVML_THREADS: bad value '") + th + "'");
        cfg["threads"] = n;
    }
}

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names{"constants", "kernel-check", "momentfn", "assemble",
                                                "relax",     "billiard",     "cavity",   "all"};
    return names;
}

RunReport run(const std::string& subcommand, const json& cfg_in)
{
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), subcommand) == names.end())
        throw ConfigError("unknown subcommand '" + subcommand + "'");
    validate(cfg_in, config_schema());

    RunReport rep;
    rep.subcommand = subcommand;
    rep.config = cfg_in;
    rep.config.erase("threads");
    rep.config.erase("output_dir");

    set_thread_budget(cfg_in["threads"].get<int>());
    const std::filesystem::path out = cfg_in["output_dir"].get<std::string>();
    std::filesystem::create_directories(out);

    SuiteContext ctx(cfg_in, rep, out.string());
    const bool all = subcommand == "all";
    if (all || subcommand == "constants") suite_constants(ctx);
    if (all || subcommand == "kernel-check") suite_kernel(ctx);
    if (all || subcommand == "momentfn") suite_momentfn(ctx);
    if (all || subcommand == "assemble") suite_assemble(ctx);
    if (all || subcommand == "relax") suite_relax(ctx);
    if (all || subcommand == "billiard") suite_billiard(ctx);
    if (all || subcommand == "cavity") suite_cavity(ctx);

    rep.outputs.push_back("report.json");
    rep.outputs.push_back("timings.json");
    write_text((out / "report.json").string(), rep.to_json().dump(2) + "\n");
    write_text((out / "timings.json").string(), rep.timings_json().dump(2) + "\n");
    return rep;
}

int exit_code(const RunReport& r) { return r.all_pass() ? 0 : 1; }

} // namespace rvml::harness
