#include "rvml/scenarios.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

namespace rvml {

namespace {

std::ofstream open_out(const std::string& path, bool binary = false)
{
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw ConfigError("cannot write " + path);
    return f;
}

// Round-trip formatting, independent of locale and stream state.
std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_relaxation_csv(const RelaxationResult& r, const std::string& path)
{
    auto f = open_out(path);
    f << "t,I_par,D_par,a_plus,a_minus,bx,by,bz,c,micro_norm,fitted_rate,fit_intercept,delta_hat\n";
    for (const auto& d : r.records) {
        f << num(d.t) << ',' << num(d.I_parallel) << ',' << num(d.D_parallel) << ',' << num(d.moments.a_plus) << ','
          << num(d.moments.a_minus) << ',' << num(d.moments.b[0]) << ',' << num(d.moments.b[1]) << ','
          << num(d.moments.b[2]) << ',' << num(d.moments.c) << ',' << num(d.norm_micro) << ',' << num(r.fitted_rate)
          << ',' << num(r.fit_intercept) << ',' << num(r.delta_hat) << '\n';
    }
}

void write_billiard_json(const BilliardReport& r, const std::string& path)
{
    nlohmann::ordered_json j;
    j["max_dp_norm"] = r.max_dp_norm;
    j["max_dL_axial"] = r.max_dL_axial;
    j["max_dL_all"] = r.max_dL_all;
    j["max_reversal"] = r.max_reversal;
    j["max_involution"] = r.max_involution;
    j["total_reflections"] = r.total_reflections;
    auto& ps = j["particles"] = nlohmann::ordered_json::array();
    for (const auto& p : r.particles)
        ps.push_back({{"reflections", p.reflections},
                      {"t_stop", p.t_stop},
                      {"dp_norm", p.max_dp_norm},
                      {"dL", {p.max_dL[0], p.max_dL[1], p.max_dL[2]}},
                      {"reversal_error", p.reversal_error}});
    open_out(path) << j.dump(1) << '\n';
}

void write_maxwell_csv(const std::vector<double>& t, const std::vector<MaxwellDiagnostics>& d, const std::string& path)
{
    auto f = open_out(path);
    f << "t,energy,px,py,pz,Lz,gauss_res,divB_res\n";
    for (std::size_t i = 0; i < d.size() && i < t.size(); ++i)
        f << num(t[i]) << ',' << num(d[i].energy) << ',' << num(d[i].momentum[0]) << ',' << num(d[i].momentum[1]) << ','
          << num(d[i].momentum[2]) << ',' << num(d[i].angular_momentum) << ',' << num(d[i].gauss_residual) << ','
          << num(d[i].divB_residual) << '\n';
}

void export_operator(const LinearizedOperator& L, const std::vector<double>& eigenvalues, const std::string& stem,
                     bool include_matrix)
{
    {
        auto f = open_out(stem + "_spectrum.csv");
        f << "index,eigenvalue\n";
        for (std::size_t i = 0; i < eigenvalues.size(); ++i) f << i << ',' << num(eigenvalues[i]) << '\n';
    }
    if (!include_matrix) return;
    const Eigen::MatrixXd M = L.dense();
    {
        auto f = open_out(stem + "_L.bin", true);
        // column-major, which for a symmetric matrix equals row-major
        f.write(reinterpret_cast<const char*>(M.data()), static_cast<std::streamsize>(M.size() * sizeof(double)));
    }
    nlohmann::ordered_json j;
    j["format"] = "float64-le";
    j["rows"] = M.rows();
    j["cols"] = M.cols();
    j["unknowns"] = "[f+ nodes; f- nodes], node (i,j,k) at (i*n + j)*n + k";
    j["grid_n"] = L.grid.n;
    j["p_max"] = L.grid.p_max;
    j["h"] = L.grid.h;
    j["assembly_asymmetry"] = L.assembly_asymmetry;
    open_out(stem + "_L.json") << j.dump(2) << '\n';
}

} // namespace rvml
