#include "rvml/faces.hpp"

#include <map>

namespace rvml {

namespace {

// Transverse difference weights at node index i along an axis of length n.
void transverse_weights(int i, int n, double h, std::vector<std::pair<int, double>>& out)
{
    out.clear();
    if (i == 0) {
        out = {{0, -1.0 / h}, {1, 1.0 / h}};
    } else if (i == n - 1) {
        out = {{-1, -1.0 / h}, {0, 1.0 / h}};
    } else {
        out = {{-1, -0.5 / h}, {1, 0.5 / h}};
    }
}

} // namespace

FaceSet build_faces(const VelocityGrid& grid)
{
    const int n = grid.n;
    const double h = grid.h;
    FaceSet fs;
    fs.color_classes.assign(81, {});
    std::vector<std::pair<int, double>> tw;
    for (int d = 0; d < 3; ++d) {
        fs.family_begin[d] = fs.size();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const std::array<int, 3> idx{i, j, k};
                    if (idx[d] == n - 1) continue;
                    std::array<int, 3> up = idx;
                    ++up[d];
                    const int a = static_cast<int>(grid.index(idx[0], idx[1], idx[2]));
                    const int b = static_cast<int>(grid.index(up[0], up[1], up[2]));

                    std::map<int, Vec3> st;
                    auto add = [&](int node, int axis, double w) {
                        auto it = st.try_emplace(node, Vec3::Zero()).first;
                        it->second[axis] += w;
                    };
                    add(a, d, -1.0 / h);
                    add(b, d, 1.0 / h);
                    for (int e = 0; e < 3; ++e) {
                        if (e == d) continue;
                        transverse_weights(idx[e], n, h, tw);
                        for (const auto& base : {idx, up})
                            for (auto [off, w] : tw) {
                                std::array<int, 3> m = base;
                                m[e] += off;
                                add(static_cast<int>(grid.index(m[0], m[1], m[2])), e, 0.5 * w);
                            }
                    }

                    std::array<int, FaceSet::max_stencil> nodes{};
                    std::array<Vec3, FaceSet::max_stencil> coefs;
                    int c = 0;
                    for (const auto& [nd, v] : st) {
                        nodes[c] = nd;
                        coefs[c] = v;
                        ++c;
                    }
                    const int id = static_cast<int>(fs.size());
                    fs.family.push_back(d);
                    fs.pos.push_back(0.5 * (grid.nodes[a] + grid.nodes[b]));
                    fs.lo.push_back(a);
                    fs.hi.push_back(b);
                    fs.count.push_back(c);
                    fs.node.push_back(nodes);
                    fs.coef.push_back(coefs);
                    fs.color_classes[27 * d + 9 * (i % 3) + 3 * (j % 3) + (k % 3)].push_back(id);
                }
    }
    fs.family_begin[3] = fs.size();
    return fs;
}

CollisionContext make_context(const VelocityGrid& grid, const PlasmaPair& pair, const CollisionParams& params)
{
    pair.validate();
    if (!grid.unstaggered()) throw ConfigError("collision context: base grid must be unstaggered");
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            if (!(params.coulomb_log[a][b] > 0.0) || params.coulomb_log[a][b] != params.coulomb_log[b][a])
                throw ConfigError("collision context: Coulomb logarithms must be positive and symmetric");

    CollisionContext ctx;
    ctx.grid = grid;
    ctx.pair = pair;
    ctx.params = params;
    ctx.faces = build_faces(grid);
    const double L0 = params.coulomb_log[0][0];
    ctx.uniform = pair.plus.m == pair.minus.m && params.coulomb_log[0][1] == L0 && params.coulomb_log[1][1] == L0;

    const std::size_t N = grid.size(), F = ctx.faces.size();
    for (int a = 0; a < 2; ++a) {
        const SpeciesParams& sp = pair[a];
        const Juttner J(sp);
        std::vector<double> p0(N);
        ctx.sqrt_j[a].resize(N);
        for (std::size_t k = 0; k < N; ++k) {
            p0[k] = sp.p0(grid.nodes[k]);
            ctx.sqrt_j[a][k] = J.sqrt_at(grid.nodes[k]);
        }
        ctx.weight[a].resize(F);
        ctx.grad_p0[a].resize(F);
        for (std::size_t s = 0; s < F; ++s) {
            ctx.weight[a][s] = sp.e * J(ctx.faces.pos[s]);
            ctx.grad_p0[a][s] = ctx.faces.gradient(s, p0);
        }
    }
    return ctx;
}

} // namespace rvml
