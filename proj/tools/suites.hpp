#pragma once

#include "harness.hpp"

#include <rvml/landau.hpp>

#include <chrono>
#include <optional>
#include <string>

namespace rvml::harness {

class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_;
};

/** State shared by the suites of one run; `all` reuses the operator between assemble and relax. */
struct SuiteContext {
    SuiteContext(const json& c, RunReport& r, std::string dir);

    const json& cfg;
    RunReport& rep;
    std::string out_dir;
    std::uint64_t seed;
    PlasmaPair pair;
    CollisionParams params;

    std::optional<LinearizedOperator> L_base;
    std::optional<GapResult> gap_base;

    const json& section(const char* name) const { return cfg.at(name); }
    std::string path(const std::string& file) const;
    void output(const std::string& file) { rep.outputs.push_back(file); }

    // value REL threshold; NaN never passes.
    void check(const std::string& name, int criterion, double value, const std::string& rel, double threshold);
    void timing(const std::string& name, int criterion, double seconds, double limit);
    void value(const std::string& key, json v) { rep.values[key] = std::move(v); }
};

void suite_constants(SuiteContext& c);
void suite_kernel(SuiteContext& c);
void suite_momentfn(SuiteContext& c);
void suite_assemble(SuiteContext& c);
void suite_relax(SuiteContext& c);
void suite_billiard(SuiteContext& c);
void suite_cavity(SuiteContext& c);

} // namespace rvml::harness
