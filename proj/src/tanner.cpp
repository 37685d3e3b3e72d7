#include "wbplab/tanner.hpp"

#include "wbplab/errors.hpp"

namespace wbplab {

TannerGraph build_graph(const BitMatrix& h) {
    TannerGraph g;
    g.n_checks = h.rows();
    g.n_vars = h.cols();
    for (std::size_t c = 0; c < h.rows(); ++c)
        for (std::size_t v = 0; v < h.cols(); ++v)
            if (h.get(c, v))
                g.edges.push_back({static_cast<std::uint32_t>(v),
                                   static_cast<std::uint32_t>(c)});
    if (g.edges.empty()) throw StructuralError("build_graph: all-zero matrix");

    g.var_off.assign(g.n_vars + 1, 0);
    g.check_off.assign(g.n_checks + 1, 0);
    for (const auto& e : g.edges) {
        ++g.var_off[e.v + 1];
        ++g.check_off[e.c + 1];
    }
    for (std::size_t v = 0; v < g.n_vars; ++v) g.var_off[v + 1] += g.var_off[v];
    for (std::size_t c = 0; c < g.n_checks; ++c)
        g.check_off[c + 1] += g.check_off[c];

    g.var_adj.resize(g.edges.size());
    g.check_adj.resize(g.edges.size());
    std::vector<std::uint32_t> vpos(g.var_off.begin(), g.var_off.end() - 1);
    std::vector<std::uint32_t> cpos(g.check_off.begin(), g.check_off.end() - 1);
    for (std::uint32_t e = 0; e < g.edges.size(); ++e) {
        g.var_adj[vpos[g.edges[e].v]++] = e;
        g.check_adj[cpos[g.edges[e].c]++] = e;
    }

    for (std::uint32_t v = 0; v < g.n_vars; ++v)
        if (g.var_degree(v) == 0) g.degenerate_vars.push_back(v);
    for (std::uint32_t c = 0; c < g.n_checks; ++c)
        if (g.check_degree(c) == 0) g.degenerate_checks.push_back(c);
    return g;
}

DegreeProfile degree_profile(const TannerGraph& g) {
    DegreeProfile p;
    for (std::size_t v = 0; v < g.n_vars; ++v) ++p.var_hist[g.var_degree(v)];
    for (std::size_t c = 0; c < g.n_checks; ++c) ++p.check_hist[g.check_degree(c)];
    return p;
}

}  // namespace wbplab
