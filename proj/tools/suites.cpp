#include "suites.hpp"

#include <rvml/equilibria.hpp>
#include <rvml/kernel.hpp>
#include <rvml/maxwell.hpp>
#include <rvml/momentfn.hpp>
#include <rvml/rng.hpp>
#include <rvml/scenarios.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

namespace rvml::harness {

namespace {

constexpr double pi = std::numbers::pi;

Vec3 vec3(const json& a) { return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()}; }

SpeciesParams species(const json& s, int sign)
{
    SpeciesParams sp;
    sp.m = s["m"].get<double>();
    sp.e = s["e"].get<double>();
    sp.kT = s["kT"].get<double>();
    sp.sign = sign;
    return sp;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

SuiteContext::SuiteContext(const json& c, RunReport& r, std::string dir) : cfg(c), rep(r), out_dir(std::move(dir))
{
    seed = cfg["seed"].get<std::uint64_t>();
    pair.plus = species(cfg["species"]["plus"], +1);
    pair.minus = species(cfg["species"]["minus"], -1);
    pair.validate();
    const double lnL = cfg["coulomb_log"].get<double>();
    params.coulomb_log = {{{lnL, lnL}, {lnL, lnL}}};
    params.memory_budget_mb = cfg["operator"]["memory_budget_mb"].get<double>();
}

std::string SuiteContext::path(const std::string& file) const
{
    return (std::filesystem::path(out_dir) / file).string();
}

void SuiteContext::check(const std::string& name, int criterion, double value, const std::string& relation,
                         double threshold)
{
    bool pass = false;
    if (std::isfinite(value)) {
        if (relation == "<") pass = value < threshold;
        else if (relation == "<=") pass = value <= threshold;
        else if (relation == ">") pass = value > threshold;
        else if (relation == ">=") pass = value >= threshold;
        else if (relation == "==") pass = value == threshold;
    }
    rep.checks.push_back({name, criterion, value, threshold, relation, pass});
}

void SuiteContext::timing(const std::string& name, int criterion, double seconds, double limit)
{
    rep.timings.push_back({name, criterion, seconds, limit, seconds < limit});
}

// ------------------------------------------------------------------ constants

void suite_constants(SuiteContext& c)
{
    const json& s = c.section("constants");
    const double tol = s["quad_tol"].get<double>();
    Stopwatch sw;
    for (int a = 0; a < 2; ++a) {
        const SpeciesParams& sp = c.pair[a];
        const std::string tag = a == 0 ? "plus" : "minus";
        const Juttner J(sp);
        const double M = mass_constant(sp, tol);
        c.check("equilibria.normalization_" + tag, 4, std::abs(sp.e * M - 1.0), "<", s["normalization_tol"].get<double>());
        // (1/3) int |p|^2/p0 J = kT M by isotropy
        const double second = radial_moment(
            J, [&](double r) { return r * r / (3.0 * sp.p0(r)); }, tol, 1);
        c.check("equilibria.second_moment_" + tag, 4, rel(second, sp.kT * M), "<", s["second_moment_tol"].get<double>());
    }
    c.check("equilibria.neutrality", 4, check_neutrality(c.pair, tol), "<", s["neutrality_tol"].get<double>());

    json k2 = json::array();
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    for (const auto& x : s["k2_points"]) {
        const double sv = x.get<double>();
        const double v = bessel_k2(sv, tol);
        k2.push_back({{"s", sv}, {"K2", v}});
        decreasing = decreasing && v < prev;
        prev = v;
    }
    c.value("k2", k2);
    c.check("equilibria.k2_decreasing", 0, decreasing ? 1.0 : 0.0, "==", 1.0);
    // Two-term large-s form K2 ~ sqrt(pi/2s) e^{-s} (1 + 15/8s).
    const double sa = s["k2_asymptotic_s"].get<double>();
    const double leading = bessel_k2(sa, tol) * std::exp(sa) * std::sqrt(2.0 * sa / pi);
    c.value("k2_leading_order_ratio", leading);
    c.check("equilibria.k2_asymptotic", 0, std::abs(leading / (1.0 + 15.0 / (8.0 * sa)) - 1.0), "<",
            s["k2_asymptotic_tol"].get<double>());
    c.timing("constants.runtime", 4, sw.seconds(), s["runtime_s"].get<double>());
}

// ------------------------------------------------------------------ kernel

void suite_kernel(SuiteContext& c)
{
    const json& s = c.section("kernel");
    const int pairs = s["pairs"].get<int>();
    const double box = s["sample_box"].get<double>();
    Stopwatch sw;
    CounterRng rng(c.seed, "kernel-check");
    auto draw = [&] { return Vec3(rng.uniform(-box, box), rng.uniform(-box, box), rng.uniform(-box, box)); };
    KernelParams kp{c.pair.plus.m, c.pair.minus.m, c.pair.plus.e, c.pair.minus.e, c.cfg["coulomb_log"].get<double>()};
    const double m = c.pair.plus.m;

    double diag = 0, null_res = 0, rot = 0, sym = 0;
    for (int k = 0; k < pairs; ++k) {
        const Vec3 p = draw(), q = draw();
        diag = std::max(diag, s_matrix(p, p, m, m).cwiseAbs().maxCoeff());

        const KernelValue kv = eval_kernel(p, q, kp);
        const double nf = kv.phi.norm();
        const Vec3 w = p / std::sqrt(kp.m_p * kp.m_p + p.squaredNorm()) - q / std::sqrt(kp.m_q * kp.m_q + q.squaredNorm());
        null_res = std::max(null_res, (kv.phi * w).norm() / (nf * w.norm()));
        sym = std::max(sym, (kv.phi - kv.phi.transpose()).norm() / nf);

        Eigen::Quaterniond qr(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        qr.normalize();
        const Mat3 O = qr.toRotationMatrix();
        const Mat3 rotated = eval_kernel(O * p, O * q, kp).phi;
        rot = std::max(rot, (rotated - O * kv.phi * O.transpose()).norm() / nf);
    }
    c.check("kernel.S_diagonal", 5, diag, "<", s["diagonal_tol"].get<double>());
    c.check("kernel.null_vector", 5, null_res, "<", s["null_tol"].get<double>());
    c.check("kernel.rotation_covariance", 5, rot, "<", s["rotation_tol"].get<double>());
    c.check("kernel.symmetry", 0, sym, "<", s["symmetry_tol"].get<double>());
    c.check("kernel.kappa_origin", 0, rel(kappa(Vec3::Zero()), std::pow(2.0, 4.5) * pi), "<", 1e-12);
    c.timing("kernel.runtime", 5, sw.seconds(), s["runtime_s"].get<double>());
}

// ------------------------------------------------------------------ momentfn

void suite_momentfn(SuiteContext& c)
{
    const json& s = c.section("momentfn");
    const double tol = s["tol"].get<double>();

    Stopwatch sw1;
    const MomentTables t = i_tables(tol);
    static const std::int64_t expect_m[] = {3, 15, 105, 945, 10395, 135135};
    bool exact = true;
    for (int n = 2; n <= 7; ++n) exact = exact && t.m[n] == static_cast<BigInt>(expect_m[n - 2]);
    c.check("momentfn.gaussian_moments_exact", 1, exact ? 1.0 : 0.0, "==", 1.0);
    static const std::int64_t expect_i[][2] = {{1, 3}, {5, 18}, {40, 141}, {395, 1395}, {4705, 16614}};
    bool comb = true;
    double i_err = 0;
    for (int j = 2; j <= 6; ++j) {
        comb = comb && t.i_comb[j][0] == expect_i[j - 2][0] && t.i_comb[j][1] == expect_i[j - 2][1];
        i_err = std::max(i_err, rel(t.i_recurrence[j], t.i_direct[j]));
    }
    c.check("momentfn.i_combinations_exact", 1, comb ? 1.0 : 0.0, "==", 1.0);
    c.check("momentfn.i_combination_vs_quadrature", 1, i_err, "<", s["i_tol"].get<double>());
    c.timing("momentfn.tables_runtime", 1, sw1.seconds(), s["runtime_tables_s"].get<double>());
    c.value("i0", t.i0);
    c.value("i1", t.i1);

    Stopwatch sw2;
    const auto coeff = det_coefficients_exact(t);
    c.check("momentfn.det_coefficients_exact", 2,
            coeff[0] == static_cast<BigInt>(14364000) && coeff[1] == static_cast<BigInt>(-15649200) ? 1.0 : 0.0, "==",
            1.0);
    auto closed = [](double i0, double i1) { return 14364000.0 * i0 - 15649200.0 * i1; };
    auto det_err = [&](double i0, double i1) {
        const double d = closed(i0, i1);
        return std::abs(det4(moment_matrix(t, i0, i1)) - d) / std::abs(d);
    };
    const double det_tol = s["det_tol"].get<double>();
    c.check("momentfn.det_closed_form_quadrature", 2, det_err(t.i0, t.i1), "<", det_tol);
    int probe = 1;
    for (const auto& pr : s["probes"]) {
        c.check("momentfn.det_closed_form_probe" + std::to_string(probe++), 2,
                det_err(pr[0].get<double>(), pr[1].get<double>()), "<", det_tol);
    }
    // Signs must survive the quadrature error bounds.
    const double det = closed(t.i0, t.i1);
    const double det_bound = 14364000.0 * t.i0_err + 15649200.0 * t.i1_err;
    c.check("momentfn.det_negative", 2, det + det_bound, "<", 0.0);
    c.check("momentfn.i1_gt_i0", 2, (t.i1 - t.i0) - (t.i0_err + t.i1_err), ">", 0.0);
    c.value("detC", det);
    c.timing("momentfn.det_runtime", 2, sw2.seconds(), s["runtime_det_s"].get<double>());

    Stopwatch sw3;
    const MomentFunctionCoeffs k = solve_k(t, tol, c.seed);
    const MomentResiduals& r = k.residuals;
    const double res_tol = s["residual_tol"].get<double>();
    c.check("momentfn.B_orth_sqrtJ", 3, r.orth_sqrtJ, "<", res_tol);
    c.check("momentfn.B_orth_p_sqrtJ", 3, r.orth_p_sqrtJ, "<", res_tol);
    c.check("momentfn.B_orth_p0_sqrtJ", 3, r.orth_p0_sqrtJ, "<", res_tol);
    c.check("momentfn.B_vel_sqrtJ", 3, r.vel_sqrtJ, "<", res_tol);
    c.check("momentfn.B_vel_p0_sqrtJ", 3, r.vel_p0_sqrtJ, "<", res_tol);
    c.check("momentfn.contraction", 3, r.contraction, "<", res_tol);
    const double lam_tol = s["lambda_tol"].get<double>();
    c.check("momentfn.lambda1", 3, std::abs(r.lambda1 - 0.5), "<", lam_tol);
    c.check("momentfn.lambda2", 3, std::abs(r.lambda2 - 1.5), "<", lam_tol);
    c.check("momentfn.lambda3", 3, std::abs(r.lambda3 - 0.5), "<", lam_tol);
    c.value("k", {k.k[0], k.k[1], k.k[2], k.k[3]});
    c.timing("momentfn.bij_runtime", 3, sw3.seconds(), s["runtime_bij_s"].get<double>());

    const VelocityGrid g8 = build_grid(s["section8_n"].get<int>(), s["section8_p_max"].get<double>());
    const Section8Functions f8 = rho0_and_Ci(c.pair.plus, g8, tol);
    const double s8 = s["section8_tol"].get<double>();
    c.check("momentfn.rho0_defining", 0, f8.defining_residual, "<", s8);
    c.check("momentfn.rho0_component", 0, f8.component_residual, "<", s8);
    c.check("momentfn.Ci_orthogonality", 0, f8.orthogonality, "<", s8);
    c.check("momentfn.Ci_off_diagonal", 0, f8.off_diagonal, "<", s8);
    c.check("momentfn.rho_c_positive", 0, f8.rho_c, ">", 0.0);
    c.value("rho0", f8.rho0);
    c.value("rho_c", f8.rho_c);

    std::ofstream(c.path("momentfn.json")) << momentfn_report_json(t, k) << '\n';
    c.output("momentfn.json");
}

// ------------------------------------------------------------------ operator, Gamma, integration by parts

namespace {

double null_residual(const LinearizedOperator& L, double norm_L)
{
    double worst = 0;
    for (const auto& chi : L.basis.chi)
        worst = std::max(worst, norm(L.grid, L.apply(chi)) / (norm_L * norm(L.grid, chi)));
    return worst;
}

struct GammaResiduals {
    double chi = 0, mass = 0, momentum = 0, energy = 0;
};

GammaResiduals gamma_residuals(const SuiteContext& c, int n)
{
    const json& s = c.section("gamma");
    const VelocityGrid g = build_grid(n, s["p_max"].get<double>());
    const CollisionContext ctx = make_context(g, c.pair, c.params);
    const ProjectionBasis B = build_basis(g, c.pair, BasisConstants::grid);
    const std::size_t N = g.size();
    const Vec3 center = vec3(s["bump_center"]);
    const double w = s["bump_width"].get<double>();
    const double eps = s["perturbation"].get<double>();

    DistributionVector f(N), F(N);
    for (int a = 0; a < 2; ++a) {
        const double scale = a == 0 ? 1.0 : 0.7;
        for (std::size_t k = 0; k < N; ++k) {
            const double bump = scale * std::exp(-(g.nodes[k] - center).squaredNorm() / (2 * w * w));
            const double sj = B.sqrt_j[a][k];
            f.values[a * N + k] = sj * bump;
            F.values[a * N + k] = sj * sj * (1.0 + eps * bump);
        }
    }
    GammaResiduals r;
    const DistributionVector G = apply_gamma(f, f, ctx);
    const double gn = norm(g, G);
    for (const auto& chi : B.chi) r.chi = std::max(r.chi, std::abs(inner(g, G, chi)) / (gn * norm(g, chi)));

    const DistributionVector C = collision_form(F, ctx);
    double mass[2] = {0, 0}, mass_abs[2] = {0, 0}, mom_abs = 0, en = 0, en_abs = 0;
    Vec3 mom = Vec3::Zero();
    for (int a = 0; a < 2; ++a)
        for (std::size_t k = 0; k < N; ++k) {
            const double v = C.values[a * N + k] * g.weights[k];
            const Vec3& p = g.nodes[k];
            const double p0 = c.pair[a].p0(p);
            mass[a] += v;
            mass_abs[a] += std::abs(v);
            mom += v * p;
            mom_abs += std::abs(v) * p.norm();
            en += v * p0;
            en_abs += std::abs(v) * p0;
        }
    r.mass = std::max(std::abs(mass[0]) / mass_abs[0], std::abs(mass[1]) / mass_abs[1]);
    r.momentum = mom.norm() / mom_abs;
    r.energy = std::abs(en) / en_abs;
    return r;
}

} // namespace

void suite_assemble(SuiteContext& c)
{
    const json& s = c.section("operator");
    const double tol_null = s["tol_null"].get<double>();
    const double p_max = s["p_max"].get<double>();
    const int n = s["n"].get<int>(), n2 = s["n_refined"].get<int>();

    Stopwatch sw;
    const VelocityGrid g = build_grid(n, p_max);
    c.L_base = assemble_L(g, staggered_companion(g), c.pair, c.params);
    c.gap_base = coercivity_gap(*c.L_base, tol_null, 12);
    const LinearizedOperator& L = *c.L_base;
    const GapResult& gap = *c.gap_base;
    const std::string sn = std::to_string(n), sn2 = std::to_string(n2);

    c.check("operator.symmetry_" + sn, 6, L.assembly_asymmetry, "<", s["symmetry_tol"].get<double>());
    const double null12 = null_residual(L, gap.norm_L);
    c.check("operator.null_residual_" + sn, 6, null12, "<", tol_null);
    c.check("operator.near_zero_count_" + sn, 6, static_cast<double>(gap.near_zero.size()), "==",
            s["null_count"].get<double>());
    c.check("operator.delta_hat_" + sn, 6, gap.delta_hat, ">", 0.0);

    CounterRng rng(c.seed, "semipositivity");
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < s["semipositivity_samples"].get<int>(); ++k) {
        DistributionVector u(g.size());
        for (Eigen::Index i = 0; i < u.values.size(); ++i) u.values[i] = rng.uniform(-1, 1);
        worst = std::min(worst, inner(g, L.apply(u), u) / inner(g, u, u));
    }
    c.check("operator.semipositivity", 0, worst, ">=", -tol_null);

    const std::string stem = "operator_" + sn;
    export_operator(L, gap.spectrum_head, c.path(stem), s["export_matrix"].get<bool>());
    c.output(stem + "_spectrum.csv");
    if (s["export_matrix"].get<bool>()) {
        c.output(stem + "_L.bin");
        c.output(stem + "_L.json");
    }

    // The refined grid needs only the gap and the norm; the full spectrum there costs minutes.
    const VelocityGrid g2 = build_grid(n2, p_max);
    double null16 = 0, delta16 = 0;
    {
        const LinearizedOperator L2 = assemble_L(g2, staggered_companion(g2), c.pair, c.params);
        const GapResult gap2 = coercivity_gap(L2, tol_null, 0);
        null16 = null_residual(L2, gap2.norm_L);
        delta16 = gap2.delta_hat;
        c.value("operator", {{"n", n},
                             {"delta_hat", gap.delta_hat},
                             {"norm_L", gap.norm_L},
                             {"spectrum_head", gap.spectrum_head},
                             {"null_residual", null12},
                             {"n_refined", n2},
                             {"delta_hat_refined", delta16},
                             {"norm_L_refined", gap2.norm_L},
                             {"null_residual_refined", null16}});
    }
    c.check("operator.null_residual_" + sn2, 0, null16, "<", tol_null);
    // The discrete null space is exact, so both residuals can sit at rounding.
    c.check("operator.null_residual_improves", 6, null16 / std::max(null12, s["rounding_floor"].get<double>()), "<=",
            1.0);
    c.check("operator.delta_hat_" + sn2, 0, delta16, ">", 0.0);
    c.check("operator.delta_hat_stability", 6, rel(delta16, gap.delta_hat), "<=", s["gap_stability"].get<double>());
    c.timing("operator.runtime", 6, sw.seconds(), s["runtime_s"].get<double>());

    const json& gs = c.section("gamma");
    Stopwatch swg;
    const GammaResiduals r1 = gamma_residuals(c, gs["n"].get<int>());
    const GammaResiduals r2 = gamma_residuals(c, gs["n_refined"].get<int>());
    const double gtol = gs["tol"].get<double>(), floor = gs["rounding_floor"].get<double>();
    // Refinement passes when the residual halves or is already at the rounding floor.
    auto refined = [&](double a, double b) { return b / std::max(0.5 * a, floor); };
    c.check("gamma.chi_orthogonality", 7, r1.chi, "<", gtol);
    c.check("gamma.mass", 7, r1.mass, "<", gtol);
    c.check("gamma.momentum", 7, r1.momentum, "<", gtol);
    c.check("gamma.energy", 0, r1.energy, "<", gtol);
    c.check("gamma.chi_orthogonality_refined", 7, refined(r1.chi, r2.chi), "<=", 1.0);
    c.check("gamma.mass_refined", 7, refined(r1.mass, r2.mass), "<=", 1.0);
    c.check("gamma.momentum_refined", 7, refined(r1.momentum, r2.momentum), "<=", 1.0);
    c.value("gamma", {{"chi", {r1.chi, r2.chi}},
                      {"mass", {r1.mass, r2.mass}},
                      {"momentum", {r1.momentum, r2.momentum}},
                      {"energy", {r1.energy, r2.energy}}});
    c.timing("gamma.runtime", 7, swg.seconds(), gs["runtime_s"].get<double>());

    const json& is = c.section("ibp");
    Stopwatch swi;
    auto ibp = [&](int m) {
        const VelocityGrid gi = build_grid(m, is["p_max"].get<double>());
        return ibp_identity_check(gi, staggered_companion(gi), is["support_radius"].get<double>(),
                                  is["eval_radius"].get<double>());
    };
    const IbpCheck coarse = ibp(is["n_coarse"].get<int>());
    const IbpCheck fine = ibp(is["n"].get<int>());
    c.check("ibp.relative_error", 11, fine.relative_error, "<", is["tol"].get<double>());
    c.check("ibp.improves", 11, fine.relative_error / coarse.relative_error, "<", 1.0);
    c.value("ibp", {{"relative_error", {coarse.relative_error, fine.relative_error}},
                    {"kappa_fit", {coarse.kappa_fit, fine.kappa_fit}},
                    {"relative_error_fitted", {coarse.relative_error_fitted, fine.relative_error_fitted}},
                    {"nodes", fine.nodes.size()}});
    c.timing("ibp.runtime", 11, swi.seconds(), is["runtime_s"].get<double>());
}

// ------------------------------------------------------------------ relaxation

void suite_relax(SuiteContext& c)
{
    const json& os = c.section("operator");
    const json& s = c.section("relax");
    const double tol_null = os["tol_null"].get<double>();

    RelaxationConfig rc;
    rc.n = os["n"].get<int>();
    rc.p_max = os["p_max"].get<double>();
    const std::string recipe = s["recipe"].get<std::string>();
    rc.recipe = recipe == "basis_element" ? InitialRecipe::basis_element
              : recipe == "juttner_bump"  ? InitialRecipe::juttner_bump
                                          : InitialRecipe::random_microscopic;
    rc.integrator = s["integrator"].get<std::string>() == "implicit_midpoint" ? Integrator::implicit_midpoint
                                                                              : Integrator::exact_exponential;
    rc.dt = s["dt"].get<double>();
    rc.stride = s["stride"].get<int>();
    rc.k_max = s["k_max"].get<int>();
    rc.nonlinear_epsilon = s["nonlinear_epsilon"].get<double>();
    rc.tol_null = tol_null;
    rc.seed = c.seed;
    if (rc.nonlinear_epsilon > 0 && rc.integrator == Integrator::exact_exponential)
        throw ConfigError("/relax/nonlinear_epsilon: the exact exponential is linear; use implicit_midpoint");

    if (!c.L_base || c.L_base->grid.n != rc.n) {
        Stopwatch swa;
        const VelocityGrid g = build_grid(rc.n, rc.p_max);
        c.L_base = assemble_L(g, staggered_companion(g), c.pair, c.params);
        c.gap_base = coercivity_gap(*c.L_base, tol_null, 0);
        c.timing("relax.operator_runtime", 0, swa.seconds(), os["runtime_s"].get<double>());
    }
    const double delta = c.gap_base->delta_hat;
    rc.t_end = s["t_end_over_gap"].get<double>() / delta;

    Stopwatch sw;
    std::optional<CollisionContext> ctx;
    if (rc.nonlinear_epsilon > 0) ctx = make_context(c.L_base->grid, c.pair, c.params);
    const RelaxationResult r = run_relaxation(rc, *c.L_base, ctx ? &*ctx : nullptr, delta);
    c.timing("relax.runtime", 8, sw.seconds(), s["runtime_s"].get<double>());

    c.check("relax.moment_drift", 8, r.max_moment_drift, "<=", tol_null);
    const double rate_err = rel(r.fitted_rate, delta);
    if (rc.recipe == InitialRecipe::random_microscopic && rc.nonlinear_epsilon == 0)
        c.check("relax.decay_rate", 8, rate_err, "<", s["rate_tol"].get<double>());
    c.check("relax.I_monotone", 8, r.monotone_I ? 1.0 : 0.0, "==", 1.0);
    c.value("relax", {{"delta_hat", delta},
                      {"fitted_rate", r.fitted_rate},
                      {"rate_error", rate_err},
                      {"energy_closure", r.energy_closure},
                      {"records", r.records.size()}});
    write_relaxation_csv(r, c.path("relax.csv"));
    c.output("relax.csv");
}

// ------------------------------------------------------------------ billiards

void suite_billiard(SuiteContext& c)
{
    const json& s = c.section("billiard");
    const std::string which = s["domain"].get<std::string>();
    const double R = s["radius"].get<double>();
    const std::size_t n = s["particles"].get<std::size_t>();

    for (const char* name : {"disk", "ball"}) {
        if (which != "both" && which != name) continue;
        const BilliardDomain dom = std::string(name) == "disk" ? BilliardDomain::disk : BilliardDomain::ball;
        const std::string tag = std::string("billiard.") + name;
        Stopwatch sw;
        BilliardConfig bc;
        bc.domain = dom;
        bc.radius = R;
        bc.mass = c.pair.plus.m;
        bc.max_reflections = s["reflections"].get<long>();
        bc.particles = random_particles(dom, R, n, c.seed);
        const BilliardReport r = run_billiard(bc);
        c.timing(tag + ".runtime", 9, sw.seconds(), s["runtime_s"].get<double>());

        c.check(tag + ".dp_norm", 9, r.max_dp_norm, "<", s["p_tol"].get<double>());
        c.check(tag + ".dL_axial", 9, r.max_dL_axial, "<", s["L_axial_tol"].get<double>());
        // The cylinder conserves only the axial component.
        if (dom == BilliardDomain::ball) c.check(tag + ".dL_all", 0, r.max_dL_all, "<", s["L_all_tol"].get<double>());
        c.check(tag + ".reversal", 9, r.max_reversal, "<", s["reversal_tol"].get<double>());
        c.check(tag + ".involution", 0, r.max_involution, "<", s["p_tol"].get<double>());
        c.value(tag, {{"particles", r.particles.size()}, {"total_reflections", r.total_reflections}});

        // A radial shot stays on its diameter: no angular momentum is ever created.
        BilliardConfig radial = bc;
        radial.particles = {Particle{Vec3(0.3 * R, 0, 0), Vec3(1.0, 0, 0)}};
        radial.max_reflections = 1000;
        const BilliardReport rr = run_billiard(radial);
        const Vec3 pf = rr.particles[0].final_state.p;
        c.check(tag + ".radial_shot", 0, rr.max_dL_all + std::abs(pf[1]) + std::abs(pf[2]), "==", 0.0);

        const std::string file = std::string("billiard_") + name + ".json";
        write_billiard_json(r, c.path(file));
        c.output(file);
    }
}

// ------------------------------------------------------------------ cavity

namespace {

// Cavity eigenmode on [0, pi]^3: E_c = a_c cos(k_c x_c) prod_{m != c} sin(k_m x_m), with
// a chosen so the discrete divergence vanishes. Returns the discrete frequency.
double add_mode(EMFieldState& s, const std::array<int, 3>& k, double amplitude)
{
    Vec3 kap;
    for (int m = 0; m < 3; ++m) kap[m] = 2.0 / s.d[m] * std::sin(k[m] * s.d[m] / 2);
    Vec3 a(kap[1], -kap[0], 0.0);
    a *= amplitude / a.norm();
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i <= s.n[0]; ++i)
            for (int j = 0; j <= s.n[1]; ++j)
                for (int l = 0; l <= s.n[2]; ++l) {
                    if (!e_active(s, c, i, j, l)) continue;
                    const Vec3 x = s.e_pos(c, i, j, l);
                    double v = a[c];
                    for (int m = 0; m < 3; ++m) v *= m == c ? std::cos(k[m] * x[m]) : std::sin(k[m] * x[m]);
                    s.E[c][s.idx(i, j, l)] += v;
                }
    return kap.norm();
}

double max_abs(const std::vector<double>& v)
{
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void gauss_vector(const EMFieldState& s, std::vector<double>& r)
{
    div_e(s, s.E, r);
    for (int i = 0; i <= s.n[0]; ++i)
        for (int j = 0; j <= s.n[1]; ++j)
            for (int k = 0; k <= s.n[2]; ++k) {
                const std::size_t p = s.idx(i, j, k);
                r[p] = node_active(s, i, j, k) ? r[p] - 4 * pi * s.rho[p] : 0.0;
            }
}

double time_step(double L, int n, double cfl) { return cfl * (L / n) / std::sqrt(3.0); }

} // namespace

void suite_cavity(SuiteContext& c)
{
    const json& s = c.section("cavity");
    const double cfl = s["cfl"].get<double>();
    Stopwatch sw;

    // Long source-free run: PEC invariant, div B and energy.
    {
        const int n = s["n"].get<int>();
        EMFieldState st = make_state({n, n, n}, {pi, pi, pi}, time_step(pi, n, cfl));
        add_mode(st, {1, 1, 1}, 1.0);
        add_mode(st, {2, 1, 1}, 0.5);

        std::vector<std::size_t> inactive_e[3], inactive_b[3];
        for (int cc = 0; cc < 3; ++cc)
            for (int i = 0; i <= n; ++i)
                for (int j = 0; j <= n; ++j)
                    for (int k = 0; k <= n; ++k) {
                        if (!e_active(st, cc, i, j, k)) inactive_e[cc].push_back(st.idx(i, j, k));
                        if (!b_active(st, cc, i, j, k)) inactive_b[cc].push_back(st.idx(i, j, k));
                    }
        const long steps = s["steps"].get<long>();
        const long stride = s["diagnostic_stride"].get<long>();
        std::vector<double> times;
        std::vector<MaxwellDiagnostics> diags;
        times.push_back(st.t);
        diags.push_back(diagnostics(st));
        const double W0 = diags[0].energy;
        double drift = 0, divb = 0;
        long pec_violations = 0;
        std::vector<double> div;
        for (long k = 1; k <= steps; ++k) {
            step(st);
            for (int cc = 0; cc < 3; ++cc) {
                for (std::size_t p : inactive_e[cc]) pec_violations += st.E[cc][p] != 0.0;
                for (std::size_t p : inactive_b[cc]) pec_violations += st.B[cc][p] != 0.0;
            }
            div_b(st, st.B, div);
            divb = std::max(divb, max_abs(div));
            if (k % stride == 0 || k == steps) {
                times.push_back(st.t);
                diags.push_back(diagnostics(st));
                drift = std::max(drift, std::abs(diags.back().energy - W0) / W0);
            }
        }
        c.check("cavity.pec_bit_exact", 10, static_cast<double>(pec_violations), "==", 0.0);
        c.check("cavity.divB_max", 10, divb, "<", s["divB_tol"].get<double>());
        c.check("cavity.energy_drift", 10, drift, "<", s["energy_tol"].get<double>());
        write_maxwell_csv(times, diags, c.path("cavity.csv"));
        c.output("cavity.csv");
        export_snapshot(st, c.path("cavity_snapshot"));
        c.output("cavity_snapshot.bin");
        c.output("cavity_snapshot.json");
    }

    // Temporal order on one mode over one period.
    {
        const int n = s["mode_n"].get<int>();
        double prev = 0, order = std::numeric_limits<double>::infinity();
        json errs = json::array();
        for (int level = 0; level < 3; ++level) {
            EMFieldState st = make_state({n, n, n}, {pi, pi, pi}, time_step(pi, n, cfl));
            const double Om = add_mode(st, {1, 1, 1}, 1.0);
            const auto E0 = st.E;
            const long N = static_cast<long>(std::ceil(2 * pi / Om / st.dt)) << level;
            st.dt = 2 * pi / Om / N;
            std::array<std::vector<double>, 3> cu;
            curl_e(st, E0, cu);
            for (int cc = 0; cc < 3; ++cc)
                for (std::size_t p = 0; p < st.size(); ++p) st.B[cc][p] = std::sin(Om * st.dt / 2) / Om * cu[cc][p];
            for (long k = 0; k < N; ++k) step(st);
            double err = 0, nrm = 0;
            for (int cc = 0; cc < 3; ++cc)
                for (std::size_t p = 0; p < st.size(); ++p) {
                    err = std::max(err, std::abs(st.E[cc][p] - E0[cc][p]));
                    nrm = std::max(nrm, std::abs(E0[cc][p]));
                }
            err /= nrm;
            errs.push_back(err);
            if (level > 0) order = std::min(order, std::log2(prev / err));
            prev = err;
        }
        c.value("cavity.mode_errors", errs);
        c.check("cavity.mode_time_order", 0, order, ">=", s["mode_order_min"].get<double>());
    }

    // Gauss law with discrete-continuity sources, and a control that breaks continuity.
    {
        const int n = s["n"].get<int>();
        const double L = 2 * pi;
        const SourceFn src = continuity_source(1.0, 0.5, 2.0, Vec3(pi, pi, pi), 0.5);
        EMFieldState st = make_state({n, n, n}, {L, L, L}, time_step(L, n, cfl));
        std::vector<double> r0, r;
        gauss_vector(st, r0);
        double worst = 0;
        for (long k = 0; k < s["gauss_steps"].get<long>(); ++k) {
            step(st, src);
            gauss_vector(st, r);
            for (std::size_t p = 0; p < r.size(); ++p) worst = std::max(worst, std::abs(r[p] - r0[p]));
        }
        c.check("cavity.gauss_constant", 10, worst, "<", s["gauss_tol"].get<double>());
        const HelmholtzSplit hs = helmholtz_split_e(st);
        c.check("cavity.helmholtz_remainder", 0, hs.remainder_divergence, "<", 1e-10);

        const SourceFn broken = [&](const EMFieldState& e, double th, double tn, SourceSample& out) {
            src(e, th, tn, out);
            for (auto& comp : out.j)
                for (double& v : comp) v *= 1.1;
        };
        EMFieldState bad = make_state({n, n, n}, {L, L, L}, time_step(L, n, cfl));
        double grown = 0;
        for (int k = 0; k < 100; ++k) {
            step(bad, broken);
            gauss_vector(bad, r);
            grown = std::max(grown, max_abs(r));
        }
        c.check("cavity.gauss_negative_control", 0, grown, ">", 1e3 * s["gauss_tol"].get<double>());
    }

    // Momentum identity on the manufactured solution.
    {
        const ManufacturedEM m = manufactured_potential_solution();
        std::vector<double> hs, res;
        for (const auto& h : s["mms_h"]) {
            hs.push_back(h.get<double>());
            res.push_back(momentum_identity_residual(m, Vec3::Zero(), Vec3::Ones(), hs.back(), 0.7));
        }
        double order = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < hs.size(); ++i)
            order = std::min(order, std::log(res[i - 1] / res[i]) / std::log(hs[i - 1] / hs[i]));
        c.value("cavity.mms_residuals", res);
        c.check("cavity.mms_order", 10, order, ">=", s["mms_order_min"].get<double>());
    }

    // Angular momentum rate on a periodic patch under refinement.
    {
        const double L = 2 * pi;
        const Vec3 x0(pi, pi, pi), shift(0.3, -0.2, 0.1);
        const SourceFn src = continuity_source(1.0, 0.5, 2.0, x0, 0.4);
        const auto& levels = s["patch_levels"];
        json mism = json::array();
        double ratio = std::numeric_limits<double>::infinity();
        double prev = 0;
        for (std::size_t li = 0; li < levels.size(); ++li) {
            const int n = levels[li].get<int>();
            EMFieldState st = make_state({n, n, n}, {L, L, L}, time_step(L, n, cfl), Boundary::periodic);
            const bool translate = li == 1 || levels.size() == 1;
            AngularMomentumRateCheck base(Vec3::UnitZ(), x0), moved(Vec3::UnitZ(), x0 + shift),
                linear(Vec3::UnitZ(), x0, shift);
            auto push = [&] {
                base.push(st);
                if (translate) {
                    moved.push(st);
                    linear.push(st);
                }
            };
            push();
            const long N = std::lround(s["patch_t_end"].get<double>() / st.dt);
            for (long k = 0; k < N; ++k) {
                step(st, src);
                push();
            }
            const AngularMomentumReport r = base.report();
            mism.push_back(r.mismatch);
            if (li > 0) ratio = std::min(ratio, prev / r.mismatch);
            prev = r.mismatch;
            if (translate) {
                const AngularMomentumReport r2 = moved.report(), rl = linear.report();
                double worst = 0, scale = 0;
                for (std::size_t k = 0; k < r.lhs.size(); ++k) {
                    worst = std::max(worst, std::abs((r.lhs[k] - r2.lhs[k]) - rl.lhs_linear[k]));
                    worst = std::max(worst, std::abs((r.rhs[k] - r2.rhs[k]) - rl.rhs_linear[k]));
                    scale = std::max(scale, std::abs(r.rhs[k]));
                }
                c.check("cavity.angular_momentum_translation", 0, worst / scale, "<", s["translation_tol"].get<double>());
            }
        }
        c.value("cavity.angular_momentum_mismatch", mism);
        c.check("cavity.angular_momentum_convergence", 10, ratio, ">", 1.0);
    }
    c.timing("cavity.runtime", 10, sw.seconds(), s["runtime_s"].get<double>());
}

} // namespace rvml::harness
