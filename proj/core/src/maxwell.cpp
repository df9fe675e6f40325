#include "rvml/maxwell.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rvml {

namespace {

constexpr double four_pi = 4.0 * std::numbers::pi;

struct Range {
    int lo, hi;   // half-open
};

bool periodic(const EMFieldState& s) { return s.boundary == Boundary::periodic; }

// Index ranges of the active entries of each layout.
std::array<Range, 3> e_range(const EMFieldState& s, int c)
{
    std::array<Range, 3> r{};
    for (int m = 0; m < 3; ++m) r[m] = (m == c || periodic(s)) ? Range{0, s.n[m]} : Range{1, s.n[m]};
    return r;
}

std::array<Range, 3> b_range(const EMFieldState& s, int c)
{
    std::array<Range, 3> r{};
    for (int m = 0; m < 3; ++m) r[m] = (m != c || periodic(s)) ? Range{0, s.n[m]} : Range{1, s.n[m]};
    return r;
}

std::array<Range, 3> node_range(const EMFieldState& s)
{
    std::array<Range, 3> r{};
    for (int m = 0; m < 3; ++m) r[m] = periodic(s) ? Range{0, s.n[m]} : Range{1, s.n[m]};
    return r;
}

bool in(const std::array<Range, 3>& r, int i, int j, int k)
{
    return i >= r[0].lo && i < r[0].hi && j >= r[1].lo && j < r[1].hi && k >= r[2].lo && k < r[2].hi;
}

// Neighbour index along m by +-1 with wrapping in periodic mode.
struct Shift {
    const EMFieldState& s;
    int wrap(int v, int m) const
    {
        if (!periodic(s)) return v;
        const int n = s.n[m];
        return v < 0 ? v + n : (v >= n ? v - n : v);
    }
    std::size_t at(std::array<int, 3> x, int m, int delta) const
    {
        x[m] = wrap(x[m] + delta, m);
        return s.idx(x[0], x[1], x[2]);
    }
};

template <class F>
void for_range(const std::array<Range, 3>& r, F&& f)
{
    const int n0 = r[0].hi - r[0].lo;
    if (n0 <= 0) return;
    parallel_for(static_cast<std::size_t>(n0), [&](std::size_t b, std::size_t e) {
        for (int i = r[0].lo + static_cast<int>(b); i < r[0].lo + static_cast<int>(e); ++i)
            for (int j = r[1].lo; j < r[1].hi; ++j)
                for (int k = r[2].lo; k < r[2].hi; ++k) f(i, j, k);
    });
}

void fill_zero(std::array<std::vector<double>, 3>& a, std::size_t n)
{
    for (auto& v : a) v.assign(n, 0.0);
}

} // namespace

Vec3 EMFieldState::e_pos(int c, int i, int j_, int k) const
{
    Vec3 x = node_pos(i, j_, k);
    x[c] += 0.5 * d[c];
    return x;
}

Vec3 EMFieldState::b_pos(int c, int i, int j_, int k) const
{
    Vec3 x = node_pos(i, j_, k);
    for (int m = 0; m < 3; ++m)
        if (m != c) x[m] += 0.5 * d[m];
    return x;
}

bool e_active(const EMFieldState& s, int c, int i, int j_, int k) { return in(e_range(s, c), i, j_, k); }
bool b_active(const EMFieldState& s, int c, int i, int j_, int k) { return in(b_range(s, c), i, j_, k); }
bool node_active(const EMFieldState& s, int i, int j_, int k) { return in(node_range(s), i, j_, k); }

EMFieldState make_state(std::array<int, 3> n, std::array<double, 3> L, double dt, Boundary b, double cfl_factor)
{
    EMFieldState s;
    for (int m = 0; m < 3; ++m) {
        if (n[m] < 2) throw ConfigError("maxwell: need at least 2 cells per axis");
        if (!(L[m] > 0.0)) throw ConfigError("maxwell: box lengths must be positive");
        s.d[m] = L[m] / n[m];
    }
    if (!(cfl_factor > 0.0 && cfl_factor <= 1.0)) throw ConfigError("maxwell: cfl factor must lie in (0, 1]");
    const double inv = std::sqrt(1.0 / (s.d[0] * s.d[0]) + 1.0 / (s.d[1] * s.d[1]) + 1.0 / (s.d[2] * s.d[2]));
    const double dt_max = cfl_factor / inv;
    if (!(dt > 0.0) || dt > dt_max) {
        std::ostringstream os;
        os << "maxwell: dt = " << dt << " violates the CFL bound " << dt_max;
        throw ConfigError(os.str());
    }
    s.n = n;
    s.L = L;
    s.dt = dt;
    s.boundary = b;
    const std::size_t sz = s.size();
    fill_zero(s.E, sz);
    fill_zero(s.B, sz);
    fill_zero(s.j, sz);
    s.rho.assign(sz, 0.0);
    return s;
}

void curl_e(const EMFieldState& s, const std::array<std::vector<double>, 3>& E, std::array<std::vector<double>, 3>& out)
{
    fill_zero(out, s.size());
    const Shift sh{s};
    for (int c = 0; c < 3; ++c) {
        const int a = (c + 1) % 3, b = (c + 2) % 3;
        auto& o = out[c];
        for_range(b_range(s, c), [&](int i, int j, int k) {
            const std::array<int, 3> x{i, j, k};
            const std::size_t p = s.idx(i, j, k);
            o[p] = (E[b][sh.at(x, a, 1)] - E[b][p]) / s.d[a] - (E[a][sh.at(x, b, 1)] - E[a][p]) / s.d[b];
        });
    }
}

void curl_b(const EMFieldState& s, const std::array<std::vector<double>, 3>& B, std::array<std::vector<double>, 3>& out)
{
    fill_zero(out, s.size());
    const Shift sh{s};
    for (int c = 0; c < 3; ++c) {
        const int a = (c + 1) % 3, b = (c + 2) % 3;
        auto& o = out[c];
        for_range(e_range(s, c), [&](int i, int j, int k) {
            const std::array<int, 3> x{i, j, k};
            const std::size_t p = s.idx(i, j, k);
            o[p] = (B[b][p] - B[b][sh.at(x, a, -1)]) / s.d[a] - (B[a][p] - B[a][sh.at(x, b, -1)]) / s.d[b];
        });
    }
}

void grad_node(const EMFieldState& s, const std::vector<double>& phi, std::array<std::vector<double>, 3>& out)
{
    fill_zero(out, s.size());
    const Shift sh{s};
    for (int c = 0; c < 3; ++c) {
        auto& o = out[c];
        for_range(e_range(s, c), [&](int i, int j, int k) {
            const std::size_t p = s.idx(i, j, k);
            o[p] = (phi[sh.at({i, j, k}, c, 1)] - phi[p]) / s.d[c];
        });
    }
}

void div_e(const EMFieldState& s, const std::array<std::vector<double>, 3>& E, std::vector<double>& out)
{
    out.assign(s.size(), 0.0);
    const Shift sh{s};
    for_range(node_range(s), [&](int i, int j, int k) {
        const std::size_t p = s.idx(i, j, k);
        double v = 0.0;
        for (int c = 0; c < 3; ++c) v += (E[c][p] - E[c][sh.at({i, j, k}, c, -1)]) / s.d[c];
        out[p] = v;
    });
}

void div_b(const EMFieldState& s, const std::array<std::vector<double>, 3>& B, std::vector<double>& out)
{
    out.assign(s.size(), 0.0);
    const Shift sh{s};
    for_range({Range{0, s.n[0]}, Range{0, s.n[1]}, Range{0, s.n[2]}}, [&](int i, int j, int k) {
        const std::size_t p = s.idx(i, j, k);
        double v = 0.0;
        for (int c = 0; c < 3; ++c) v += (B[c][sh.at({i, j, k}, c, 1)] - B[c][p]) / s.d[c];
        out[p] = v;
    });
}

void apply_boundary(EMFieldState& s)
{
    for (int c = 0; c < 3; ++c) {
        const auto re = e_range(s, c), rb = b_range(s, c);
        for (int i = 0; i <= s.n[0]; ++i)
            for (int j = 0; j <= s.n[1]; ++j)
                for (int k = 0; k <= s.n[2]; ++k) {
                    const std::size_t p = s.idx(i, j, k);
                    if (!in(re, i, j, k)) {
                        s.E[c][p] = 0.0;
                        s.j[c][p] = 0.0;
                    }
                    if (!in(rb, i, j, k)) s.B[c][p] = 0.0;
                }
    }
    const auto rn = node_range(s);
    for (int i = 0; i <= s.n[0]; ++i)
        for (int j = 0; j <= s.n[1]; ++j)
            for (int k = 0; k <= s.n[2]; ++k)
                if (!in(rn, i, j, k) && periodic(s)) s.rho[s.idx(i, j, k)] = 0.0;
}

void step(EMFieldState& s, const SourceFn& sources)
{
    const double dt = s.dt;
    const Shift sh{s};
    SourceSample src;
    if (sources) sources(s, s.t + 0.5 * dt, s.t + dt, src);

    // B^{n+1/2} = B^{n-1/2} - dt curl E^n, written in place on active entries.
    for (int c = 0; c < 3; ++c) {
        const int a = (c + 1) % 3, b = (c + 2) % 3;
        auto& Bc = s.B[c];
        const auto& Ea = s.E[a];
        const auto& Eb = s.E[b];
        for_range(b_range(s, c), [&](int i, int j, int k) {
            const std::array<int, 3> x{i, j, k};
            const std::size_t p = s.idx(i, j, k);
            Bc[p] -= dt * ((Eb[sh.at(x, a, 1)] - Eb[p]) / s.d[a] - (Ea[sh.at(x, b, 1)] - Ea[p]) / s.d[b]);
        });
    }
    for (int c = 0; c < 3; ++c) {
        if (src.j[c].empty()) s.j[c].assign(s.size(), 0.0);
        else s.j[c] = src.j[c];
    }
    for (int c = 0; c < 3; ++c) {
        const int a = (c + 1) % 3, b = (c + 2) % 3;
        auto& Ec = s.E[c];
        const auto& Ba = s.B[a];
        const auto& Bb = s.B[b];
        const auto& jc = s.j[c];
        for_range(e_range(s, c), [&](int i, int j, int k) {
            const std::array<int, 3> x{i, j, k};
            const std::size_t p = s.idx(i, j, k);
            const double curl = (Bb[p] - Bb[sh.at(x, a, -1)]) / s.d[a] - (Ba[p] - Ba[sh.at(x, b, -1)]) / s.d[b];
            Ec[p] += dt * (curl - four_pi * jc[p]);
        });
    }
    if (src.rho.empty()) s.rho.assign(s.size(), 0.0);
    else s.rho = src.rho;
    s.t += dt;
    ++s.step_count;
    apply_boundary(s);
}

} // namespace rvml
