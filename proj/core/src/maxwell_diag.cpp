#include "rvml/maxwell.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace rvml {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double four_pi = 4.0 * pi;

int wrap(const EMFieldState& s, int v, int m)
{
    if (s.boundary != Boundary::periodic) return v;
    const int n = s.n[m];
    return ((v % n) + n) % n;
}

std::size_t at(const EMFieldState& s, int i, int j, int k)
{
    return s.idx(wrap(s, i, 0), wrap(s, j, 1), wrap(s, k, 2));
}

// Average of an E-type component over the four edges around cell (i,j,k).
double edge_avg(const EMFieldState& s, const std::vector<double>& f, int c, int i, int j, int k)
{
    const int a = (c + 1) % 3, b = (c + 2) % 3;
    double v = 0.0;
    for (int da = 0; da < 2; ++da)
        for (int db = 0; db < 2; ++db) {
            std::array<int, 3> x{i, j, k};
            x[a] += da;
            x[b] += db;
            v += f[at(s, x[0], x[1], x[2])];
        }
    return 0.25 * v;
}

double face_avg(const EMFieldState& s, const std::vector<double>& f, int c, int i, int j, int k)
{
    std::array<int, 3> x{i, j, k};
    const double v0 = f[at(s, x[0], x[1], x[2])];
    x[c] += 1;
    return 0.5 * (v0 + f[at(s, x[0], x[1], x[2])]);
}

double node_avg(const EMFieldState& s, const std::vector<double>& f, int i, int j, int k)
{
    double v = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) v += f[at(s, i + a, j + b, k + c)];
    return 0.125 * v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    double v = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * b[i];
    return v;
}

std::array<std::vector<double>, 3> b_next(const EMFieldState& s)
{
    std::array<std::vector<double>, 3> c;
    curl_e(s, s.E, c);
    for (int m = 0; m < 3; ++m)
        for (std::size_t p = 0; p < c[m].size(); ++p) c[m][p] = s.B[m][p] - s.dt * c[m][p];
    return c;
}

struct CellData {
    std::vector<Vec3> E, B, j, x;
    std::vector<double> rho;
};

// Cell-centred fields at time t given B at both half steps and j at both half steps.
CellData cells(const EMFieldState& s, const std::array<std::vector<double>, 3>& B_lo,
               const std::array<std::vector<double>, 3>& B_hi, const std::array<std::vector<double>, 3>* j_lo,
               const std::array<std::vector<double>, 3>* j_hi)
{
    CellData d;
    const std::size_t nc = static_cast<std::size_t>(s.n[0]) * s.n[1] * s.n[2];
    d.E.resize(nc);
    d.B.resize(nc);
    d.x.resize(nc);
    d.j.assign(nc, Vec3::Zero());
    d.rho.assign(nc, 0.0);
    std::size_t q = 0;
    for (int i = 0; i < s.n[0]; ++i)
        for (int j = 0; j < s.n[1]; ++j)
            for (int k = 0; k < s.n[2]; ++k, ++q) {
                for (int c = 0; c < 3; ++c) {
                    d.E[q][c] = edge_avg(s, s.E[c], c, i, j, k);
                    d.B[q][c] = 0.5 * (face_avg(s, B_lo[c], c, i, j, k) + face_avg(s, B_hi[c], c, i, j, k));
                    if (j_lo && j_hi)
                        d.j[q][c] = 0.5 * (edge_avg(s, (*j_lo)[c], c, i, j, k) + edge_avg(s, (*j_hi)[c], c, i, j, k));
                }
                d.rho[q] = node_avg(s, s.rho, i, j, k);
                d.x[q] = Vec3((i + 0.5) * s.d[0], (j + 0.5) * s.d[1], (k + 0.5) * s.d[2]);
            }
    return d;
}

} // namespace

MaxwellDiagnostics diagnostics(const EMFieldState& s, const Vec3& x0, const Vec3& axis)
{
    MaxwellDiagnostics m;
    const double dV = s.cell_volume();
    const auto Bh = b_next(s);
    double e2 = 0.0, bb = 0.0, b2 = 0.0;
    for (int c = 0; c < 3; ++c) {
        e2 += dot(s.E[c], s.E[c]);
        bb += dot(s.B[c], Bh[c]);
        b2 += dot(s.B[c], s.B[c]);
    }
    m.energy = (e2 + bb) * dV / (8.0 * pi);
    m.energy_naive = (e2 + b2) * dV / (8.0 * pi);

    const CellData d = cells(s, s.B, Bh, nullptr, nullptr);
    for (std::size_t q = 0; q < d.E.size(); ++q) {
        const Vec3 g = d.E[q].cross(d.B[q]) * dV / four_pi;
        m.momentum += g;
        m.angular_momentum += axis.cross(d.x[q] - x0).dot(g);
    }

    std::vector<double> dv;
    div_e(s, s.E, dv);
    for (int i = 0; i <= s.n[0]; ++i)
        for (int j = 0; j <= s.n[1]; ++j)
            for (int k = 0; k <= s.n[2]; ++k)
                if (node_active(s, i, j, k)) {
                    const std::size_t p = s.idx(i, j, k);
                    m.gauss_residual = std::max(m.gauss_residual, std::abs(dv[p] - four_pi * s.rho[p]));
                }
    div_b(s, s.B, dv);
    for (double v : dv) m.divB_residual = std::max(m.divB_residual, std::abs(v));
    return m;
}

void cell_fields(const EMFieldState& s, std::vector<Vec3>& E, std::vector<Vec3>& B, std::vector<Vec3>& centers)
{
    CellData d = cells(s, s.B, b_next(s), nullptr, nullptr);
    E = std::move(d.E);
    B = std::move(d.B);
    centers = std::move(d.x);
}

SourceFn continuity_source(double q, double m, double omega, const Vec3& center, double width)
{
    return [=](const EMFieldState& s, double t_half, double t_new, SourceSample& out) {
        const double dt = s.dt, t_old = t_half - 0.5 * dt;
        auto g = [&](const Vec3& x) { return std::exp(-(x - center).squaredNorm() / (2.0 * width * width)); };
        std::vector<double> chi_new(s.size(), 0.0), dchi(s.size(), 0.0);
        std::array<std::vector<double>, 3> a;
        for (auto& v : a) v.assign(s.size(), 0.0);
        for (int i = 0; i <= s.n[0]; ++i)
            for (int j = 0; j <= s.n[1]; ++j)
                for (int k = 0; k <= s.n[2]; ++k) {
                    const std::size_t p = s.idx(i, j, k);
                    const double gn = g(s.node_pos(i, j, k));
                    chi_new[p] = q * gn * std::sin(omega * t_new);
                    dchi[p] = chi_new[p] - q * gn * std::sin(omega * t_old);
                    if (b_active(s, 2, i, j, k)) a[2][p] = m * g(s.b_pos(2, i, j, k)) * std::cos(omega * t_half);
                }
        std::array<std::vector<double>, 3> gr, cu;
        grad_node(s, dchi, gr);
        curl_b(s, a, cu);
        for (int c = 0; c < 3; ++c) {
            out.j[c].assign(s.size(), 0.0);
            for (std::size_t p = 0; p < s.size(); ++p) out.j[c][p] = -gr[c][p] / (four_pi * dt) + cu[c][p];
        }
        grad_node(s, chi_new, gr);
        div_e(s, gr, out.rho);
        for (double& v : out.rho) v /= four_pi;
    };
}

ManufacturedEM manufactured_potential_solution()
{
    ManufacturedEM m;
    m.E = [](const Vec3& x, double t) -> Vec3 {
        return Vec3(std::sin(x[0]) * std::sin(x[2]), 0.0,
                    -std::cos(x[0]) * std::cos(x[2]) + std::sin(x[0]) * std::cos(x[1])) *
               std::sin(t);
    };
    m.B = [](const Vec3& x, double t) -> Vec3 {
        return Vec3(-std::sin(x[0]) * std::sin(x[1]), -std::cos(x[0]) * std::cos(x[1]), 0.0) * std::cos(t);
    };
    m.rho = [](const Vec3& x, double t) { return 2.0 * std::cos(x[0]) * std::sin(x[2]) * std::sin(t) / four_pi; };
    m.j = [](const Vec3& x, double t) -> Vec3 {
        return Vec3(-std::sin(x[0]) * std::sin(x[2]), 0.0,
                    std::sin(x[0]) * std::cos(x[1]) + std::cos(x[0]) * std::cos(x[2])) *
               (std::cos(t) / four_pi);
    };
    return m;
}

double momentum_identity_residual(const ManufacturedEM& m, const Vec3& lo, const Vec3& hi, double h, double t)
{
    if (!(h > 0.0)) throw ConfigError("momentum identity: h must be positive");
    auto g = [&](const Vec3& x, double tt) { return Vec3(m.E(x, tt).cross(m.B(x, tt)) / four_pi); };
    auto T = [&](const Vec3& x) {
        const Vec3 E = m.E(x, t), B = m.B(x, t);
        Mat3 M = (E * E.transpose() + B * B.transpose() - 0.5 * (E.squaredNorm() + B.squaredNorm()) * Mat3::Identity());
        return Mat3(M / four_pi);
    };
    std::array<int, 3> cnt{};
    for (int c = 0; c < 3; ++c) cnt[c] = std::max(1, static_cast<int>(std::floor((hi[c] - lo[c]) / h)) + 1);
    double worst = 0.0;
    for (int a = 0; a < cnt[0]; ++a)
        for (int b = 0; b < cnt[1]; ++b)
            for (int c = 0; c < cnt[2]; ++c) {
                const Vec3 x = lo + h * Vec3(a, b, c);
                const Vec3 dg = (g(x, t + h) - g(x, t - h)) / (2.0 * h);
                Vec3 divT = Vec3::Zero();
                for (int jd = 0; jd < 3; ++jd) {
                    const Vec3 e = h * Vec3::Unit(jd);
                    divT += (T(x + e).col(jd) - T(x - e).col(jd)) / (2.0 * h);
                }
                const Vec3 E = m.E(x, t), B = m.B(x, t);
                const Vec3 r = dg - divT + m.rho(x, t) * E + m.j(x, t).cross(B);
                worst = std::max(worst, r.lpNorm<Eigen::Infinity>());
            }
    return worst;
}

AngularMomentumRateCheck::AngularMomentumRateCheck(const Vec3& omega, const Vec3& x0, const Vec3& delta)
    : omega_(omega), x0_(x0), delta_(delta)
{
}

void AngularMomentumRateCheck::push(const EMFieldState& s)
{
    window_.push_back(s);
    if (window_.size() < 2) return;
    // Field momentum and source torque at the time of the previous state.
    const EMFieldState& a = window_[window_.size() - 2];
    const EMFieldState& b = window_.back();
    dt_ = a.dt;
    const double dV = a.cell_volume();
    const Vec3 shift = omega_.cross(delta_);
    const CellData d = cells(a, a.B, b.B, &a.j, &b.j);
    Sample sm{a.t, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t q = 0; q < d.E.size(); ++q) {
        const Vec3 g = d.E[q].cross(d.B[q]) / four_pi;
        const Vec3 f = d.rho[q] * d.E[q] + d.j[q].cross(d.B[q]);
        const Vec3 R = omega_.cross(d.x[q] - x0_);
        sm.L += R.dot(g);
        sm.P += shift.dot(g);
        sm.torque -= R.dot(f);
        sm.torque_linear -= shift.dot(f);
    }
    sm.L *= dV;
    sm.P *= dV;
    sm.torque *= dV;
    sm.torque_linear *= dV;
    samples_.push_back(sm);
    window_.erase(window_.begin());
}

AngularMomentumReport AngularMomentumRateCheck::report() const
{
    if (samples_.size() < 3) throw ConfigError("angular momentum check: need at least 4 consecutive states");
    AngularMomentumReport rep;
    double num = 0.0, den = 0.0;
    for (std::size_t n = 1; n + 1 < samples_.size(); ++n) {
        rep.times.push_back(samples_[n].t);
        rep.lhs.push_back((samples_[n + 1].L - samples_[n - 1].L) / (2.0 * dt_));
        rep.rhs.push_back(samples_[n].torque);
        rep.lhs_linear.push_back((samples_[n + 1].P - samples_[n - 1].P) / (2.0 * dt_));
        rep.rhs_linear.push_back(samples_[n].torque_linear);
        num = std::max(num, std::abs(rep.lhs.back() - rep.rhs.back()));
        den = std::max(den, std::abs(rep.rhs.back()));
    }
    rep.mismatch = den > 0.0 ? num / den : num;
    return rep;
}

AngularMomentumReport angular_momentum_rate_check(const std::vector<EMFieldState>& states, const Vec3& omega,
                                                  const Vec3& x0, const Vec3& delta)
{
    AngularMomentumRateCheck chk(omega, x0, delta);
    for (const auto& s : states) chk.push(s);
    return chk.report();
}

namespace {

// Conjugate gradients for A x = rhs with A symmetric positive (semi)definite on the range of rhs.
int conjugate_gradient(const std::function<void(const std::vector<double>&, std::vector<double>&)>& A,
                       const std::vector<double>& rhs, std::vector<double>& x, double tol)
{
    std::vector<double> r = rhs, p, Ap;
    x.assign(rhs.size(), 0.0);
    p = r;
    double rr = dot(r, r);
    const double stop = tol * tol * std::max(rr, 1e-300);
    int it = 0;
    const int max_it = 10 * static_cast<int>(rhs.size());
    while (rr > stop && it < max_it) {
        A(p, Ap);
        const double alpha = rr / dot(p, Ap);
        for (std::size_t q = 0; q < x.size(); ++q) {
            x[q] += alpha * p[q];
            r[q] -= alpha * Ap[q];
        }
        const double rr_new = dot(r, r);
        for (std::size_t q = 0; q < x.size(); ++q) p[q] = r[q] + (rr_new / rr) * p[q];
        rr = rr_new;
        ++it;
    }
    return it;
}

// Gradient of a cell-centred potential onto active B-type faces.
void grad_cell(const EMFieldState& s, const std::vector<double>& psi, std::array<std::vector<double>, 3>& out)
{
    for (int c = 0; c < 3; ++c) out[c].assign(s.size(), 0.0);
    for (int i = 0; i <= s.n[0]; ++i)
        for (int j = 0; j <= s.n[1]; ++j)
            for (int k = 0; k <= s.n[2]; ++k)
                for (int c = 0; c < 3; ++c) {
                    if (!b_active(s, c, i, j, k)) continue;
                    std::array<int, 3> x{i, j, k};
                    x[c] -= 1;
                    out[c][s.idx(i, j, k)] = (psi[s.idx(i, j, k)] - psi[at(s, x[0], x[1], x[2])]) / s.d[c];
                }
}

void remove_cell_mean(const EMFieldState& s, std::vector<double>& v)
{
    double mean = 0.0;
    for (int i = 0; i < s.n[0]; ++i)
        for (int j = 0; j < s.n[1]; ++j)
            for (int k = 0; k < s.n[2]; ++k) mean += v[s.idx(i, j, k)];
    mean /= static_cast<double>(s.n[0]) * s.n[1] * s.n[2];
    for (int i = 0; i < s.n[0]; ++i)
        for (int j = 0; j < s.n[1]; ++j)
            for (int k = 0; k < s.n[2]; ++k) v[s.idx(i, j, k)] -= mean;
}

HelmholtzSplit finish_split(const std::array<std::vector<double>, 3>& field, std::array<std::vector<double>, 3> grad,
                            int iterations)
{
    HelmholtzSplit out;
    out.iterations = iterations;
    out.gradient = std::move(grad);
    for (int c = 0; c < 3; ++c) {
        out.remainder[c] = field[c];
        for (std::size_t q = 0; q < field[c].size(); ++q) out.remainder[c][q] -= out.gradient[c][q];
    }
    return out;
}

} // namespace

HelmholtzSplit helmholtz_split_e(const EMFieldState& s, double tol)
{
    std::vector<double> rhs, x;
    div_e(s, s.E, rhs);
    if (s.boundary == Boundary::periodic) remove_cell_mean(s, rhs);
    // -lap phi = -div E
    for (double& v : rhs) v = -v;
    const int it = conjugate_gradient(
        [&](const std::vector<double>& v, std::vector<double>& o) {
            std::array<std::vector<double>, 3> g;
            grad_node(s, v, g);
            div_e(s, g, o);
            for (double& z : o) z = -z;
        },
        rhs, x, tol);
    std::array<std::vector<double>, 3> g;
    grad_node(s, x, g);
    HelmholtzSplit out = finish_split(s.E, std::move(g), it);
    std::vector<double> dv;
    div_e(s, out.remainder, dv);
    for (double v : dv) out.remainder_divergence = std::max(out.remainder_divergence, std::abs(v));
    return out;
}

HelmholtzSplit helmholtz_split_b(const EMFieldState& s, double tol)
{
    std::vector<double> rhs, x;
    div_b(s, s.B, rhs);
    remove_cell_mean(s, rhs);
    for (double& v : rhs) v = -v;
    const int it = conjugate_gradient(
        [&](const std::vector<double>& v, std::vector<double>& o) {
            std::array<std::vector<double>, 3> g;
            grad_cell(s, v, g);
            div_b(s, g, o);
            for (double& z : o) z = -z;
        },
        rhs, x, tol);
    std::array<std::vector<double>, 3> g;
    grad_cell(s, x, g);
    HelmholtzSplit out = finish_split(s.B, std::move(g), it);
    std::vector<double> dv;
    div_b(s, out.remainder, dv);
    for (double v : dv) out.remainder_divergence = std::max(out.remainder_divergence, std::abs(v));
    return out;
}

void export_snapshot(const EMFieldState& s, const std::string& path_stem)
{
    const std::string bin = path_stem + ".bin";
    std::ofstream f(bin, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + bin);
    nlohmann::ordered_json meta;
    meta["format"] = "float64-le";
    meta["shape"] = {s.n[0] + 1, s.n[1] + 1, s.n[2] + 1};
    meta["order"] = "C";
    meta["cells"] = s.n;
    meta["lengths"] = s.L;
    meta["dt"] = s.dt;
    meta["t"] = s.t;
    meta["step"] = s.step_count;
    meta["boundary"] = s.boundary == Boundary::pec ? "pec" : "periodic";
    meta["B_time"] = "t - dt/2";
    std::vector<std::string> names;
    auto put = [&](const std::string& name, const std::vector<double>& v) {
        f.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
        names.push_back(name);
    };
    const char* comp = "xyz";
    for (int c = 0; c < 3; ++c) put(std::string("E") + comp[c], s.E[c]);
    for (int c = 0; c < 3; ++c) put(std::string("B") + comp[c], s.B[c]);
    for (int c = 0; c < 3; ++c) put(std::string("j") + comp[c], s.j[c]);
    put("rho", s.rho);
    meta["arrays"] = names;
    std::ofstream js(path_stem + ".json");
    js << meta.dump(2) << "\n";
}

} // namespace rvml
