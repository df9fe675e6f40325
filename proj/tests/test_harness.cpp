#include <doctest.h>

#include "harness.hpp"

#include <rvml/common.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rvml;
using namespace rvml::harness;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string error_of(const json& user)
{
    try {
        merge_config(user);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("defaults validate against the schema")
{
    CHECK_NOTHROW(validate(default_config(), config_schema()));
    CHECK(merge_config(json::object()) == default_config());
}

TEST_CASE("schema rejects bad configs and names the path")
{
    CHECK(error_of({{"relax", {{"dtt", 0.1}}}}).find("/relax/dtt: unknown key") != std::string::npos);
    CHECK(error_of({{"seed", "abc"}}).find("/seed: expected integer") != std::string::npos);
    CHECK(error_of({{"relax", {{"recipe", "chaos"}}}}).find("/relax/recipe") != std::string::npos);
    CHECK(error_of({{"cavity", {{"cfl", 1.5}}}}).find("/cavity/cfl") != std::string::npos);
    CHECK(error_of({{"operator", {{"n", 0}}}}).find("/operator/n") != std::string::npos);
    CHECK(error_of({{"momentfn", {{"probes", json::array()}}}}).find("/momentfn/probes") != std::string::npos);
    CHECK(error_of({{"threads", 2.0}}).empty());
}

TEST_CASE("merge keeps untouched defaults")
{
    const json cfg = merge_config({{"billiard", {{"particles", 10}}}, {"seed", 3}});
    CHECK(cfg["billiard"]["particles"] == 10);
    CHECK(cfg["billiard"]["reflections"] == default_config()["billiard"]["reflections"]);
    CHECK(cfg["seed"] == 3);
}

TEST_CASE("environment overrides")
{
    json cfg = default_config();
    ::setenv("RVML_OUTPUT_DIR", "/tmp/rvml-env", 1);
    ::setenv("RVML_THREADS", "3", 1);
    apply_environment(cfg);
    CHECK(cfg["output_dir"] == "/tmp/rvml-env");
    CHECK(cfg["threads"] == 3);
    ::setenv("RVML_THREADS", "zero", 1);
    CHECK_THROWS_AS(apply_environment(cfg), ConfigError);
    ::unsetenv("RVML_OUTPUT_DIR");
    ::unsetenv("RVML_THREADS");
}

TEST_CASE("reports are deterministic and exclude run placement")
{
    const auto base = std::filesystem::temp_directory_path() / "rvml-unit-harness";
    json cfg = default_config();
    cfg["output_dir"] = (base / "a").string();
    cfg["threads"] = 1;
    const RunReport r1 = run("kernel-check", cfg);
    cfg["output_dir"] = (base / "b").string();
    cfg["threads"] = 2;
    const RunReport r2 = run("kernel-check", cfg);
    CHECK(slurp(base / "a" / "report.json") == slurp(base / "b" / "report.json"));
    CHECK_FALSE(r1.config.contains("threads"));
    CHECK_FALSE(r1.config.contains("output_dir"));
    CHECK(exit_code(r1) == 0);
    CHECK(r1.find("kernel.null_vector") != nullptr);
    CHECK(std::filesystem::exists(base / "a" / "timings.json"));

    cfg["seed"] = 99;
    run("kernel-check", cfg);
    CHECK(slurp(base / "a" / "report.json") != slurp(base / "b" / "report.json"));
    CHECK_THROWS_AS(run("nonsense", cfg), ConfigError);
}

TEST_CASE("exit code follows the checks")
{
    RunReport r;
    r.checks.push_back({"x", 0, 1.0, 2.0, "<", true});
    CHECK(exit_code(r) == 0);
    r.timings.push_back({"t", 0, 5.0, 1.0, false});
    CHECK(exit_code(r) == 1);
    CHECK(!version_stamp().empty());
}

}
