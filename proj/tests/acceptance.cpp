// Acceptance run: the full `all` suite twice (1 and 2 worker threads), the
// harness checks grouped by criterion, plus oracles that live only here.

#include "harness.hpp"

#include <rvml/momentfn.hpp>

#include <CLI11.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

using namespace rvml;
using namespace rvml::harness;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            notes.push_back(what);
        }
    }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// i_j by double-exponential quadrature, independent of the library's Gauss-Kronrod.
double i_oracle(int j)
{
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate(
        [j](double r) {
            return 2.0 * (r > 60 ? 0.0 : std::pow(r, 2 * j) * std::sqrt(1 + r * r) * std::exp(-0.5 * r * r)) /
                   std::sqrt(2 * std::numbers::pi);
        },
        0.0, std::numeric_limits<double>::infinity());
}

long double cofactor_det(const std::array<std::array<double, 4>, 4>& C)
{
    long double d = 0;
    for (int j = 0; j < 4; ++j) {
        int cols[3], c = 0;
        for (int k = 0; k < 4; ++k)
            if (k != j) cols[c++] = k;
        auto e = [&](int r, int k) { return static_cast<long double>(C[r + 1][cols[k]]); };
        const long double minor = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) -
                                  e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
                                  e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
        d += (j % 2 ? -1.0L : 1.0L) * C[0][j] * minor;
    }
    return d;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rvml acceptance run"};
    std::string work = "acceptance-out", expected_csv;
    app.add_option("--work-dir", work, "Scratch directory for the two runs");
    app.add_option("--expected-failures", expected_csv, "Criteria known to fail, comma separated");
    CLI11_PARSE(app, argc, argv);
    std::set<int> expected;
    {
        std::stringstream ss(expected_csv);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) expected.insert(std::stoi(tok));
    }

    std::map<int, Verdict> v;
    for (int c = 1; c <= 12; ++c) v[c];

    const fs::path dir1 = fs::path(work) / "threads-1", dir2 = fs::path(work) / "threads-2";
    fs::remove_all(work);
    json cfg = default_config();
    cfg["output_dir"] = dir1.string();
    cfg["threads"] = 1;
    const auto t0 = std::chrono::steady_clock::now();
    const RunReport rep = run("all", cfg);
    const double first = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    cfg["output_dir"] = dir2.string();
    cfg["threads"] = 2;
    const RunReport rep2 = run("all", cfg);

    for (const auto& c : rep.checks)
        if (c.criterion > 0)
            v[c.criterion].require(c.pass, c.name + "=" + fmt(c.value) + " (" + c.relation + " " + fmt(c.threshold) + ")");
    for (const auto& t : rep.timings)
        if (t.criterion > 0)
            v[t.criterion].require(t.pass, t.name + "=" + fmt(t.seconds) + "s (< " + fmt(t.limit) + "s)");

    // 1: exact moments and an independent quadrature of the i_j.
    {
        const MomentTables t = i_tables(1e-12);
        long long df = 1;
        for (int n = 1; n <= 7; ++n) {
            df *= 2 * n - 1;
            if (n >= 2) v[1].require(t.m[n] == df, "m_" + std::to_string(n) + " differs from (2n-1)!!");
        }
        for (int j = 2; j <= 6; ++j) {
            const double o = i_oracle(j);
            v[1].require(std::abs(t.i_value(j) - o) / o < 1e-7, "i_" + std::to_string(j) + " vs double-exponential quadrature");
        }
        // frozen high-precision values
        v[1].require(std::abs(rep.values["i0"].get<double>() - 1.35453080648131530205) < 1e-12, "i0 frozen value");
        v[1].require(std::abs(rep.values["i1"].get<double>() - 1.91942165372697352134) < 1e-12, "i1 frozen value");
    }

    // 2: cofactor determinant against the closed form.
    {
        const MomentTables t = i_tables(1e-12);
        const double probes[][2] = {{t.i0, t.i1}, {1.0, 2.0}, {0.7, 3.5}};
        for (const auto& p : probes) {
            const double closed = 14364000.0 * p[0] - 15649200.0 * p[1];
            const double d = static_cast<double>(cofactor_det(moment_matrix(t, p[0], p[1])));
            v[2].require(std::abs(d - closed) / std::abs(closed) < 1e-9, "cofactor det at (" + fmt(p[0]) + ", " + fmt(p[1]) + ")");
        }
        v[2].require(rep.values["detC"].get<double>() < 0, "det C sign");
    }

    // 4: K2 against the library Bessel function.
    for (const auto& e : rep.values["k2"]) {
        const double s = e["s"].get<double>(), k = e["K2"].get<double>();
        const double o = boost::math::cyl_bessel_k(2, s);
        v[4].require(std::abs(k - o) / o < 1e-8, "K2(" + fmt(s) + ") vs Bessel oracle");
    }

    // 6: operator values frozen from the first verified run.
    {
        const json& op = rep.values["operator"];
        v[6].require(std::abs(op["delta_hat"].get<double>() / 2.622247 - 1) < 1e-5, "delta_hat(12) frozen value");
        v[6].require(std::abs(op["delta_hat_refined"].get<double>() / 2.629845 - 1) < 1e-5, "delta_hat(16) frozen value");
    }

    // 12: byte-identical outputs across thread budgets.
    {
        v[12].require(rep.outputs == rep2.outputs, "output lists differ");
        for (const auto& f : rep.outputs) {
            if (f == "timings.json") continue;
            const std::string a = slurp(dir1 / f), b = slurp(dir2 / f);
            v[12].require(!a.empty() && a == b, f + " differs");
        }
    }

    int unexpected = 0;
    for (const auto& [c, verdict] : v) {
        std::string line = "criterion " + std::to_string(c) + (c < 10 ? "  " : " ");
        if (verdict.pass) {
            line += expected.count(c) ? "PASS (listed as expected failure)" : "PASS";
        } else {
            line += expected.count(c) ? "FAIL (expected)" : "FAIL";
            if (!expected.count(c)) ++unexpected;
            for (const auto& n : verdict.notes) line += "  " + n;
        }
        std::printf("%s\n", line.c_str());
    }
    std::printf("all suite: %.1f s for the first run; %d unexpected failure(s)\n", first, unexpected);
    return unexpected == 0 ? 0 : 1;
}
