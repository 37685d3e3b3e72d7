#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "wbplab/gf2codes.hpp"

namespace wbplab {

// Bipartite Tanner graph with flat edge indexing. Messages are addressed by
// edge id into contiguous arrays; the adjacency lists hold edge ids in CSR
// form. Edge ids follow row-major order over H (check outer, variable
// inner), so both adjacency lists come out sorted.
struct TannerGraph {
    struct Edge {
        std::uint32_t v, c;
    };

    std::size_t n_vars = 0;
    std::size_t n_checks = 0;
    std::vector<Edge> edges;
    std::vector<std::uint32_t> var_off, var_adj;      // per variable
    std::vector<std::uint32_t> check_off, check_adj;  // per check
    std::vector<std::uint32_t> degenerate_vars;       // degree-0 nodes
    std::vector<std::uint32_t> degenerate_checks;

    std::size_t n_edges() const { return edges.size(); }
    std::size_t var_degree(std::size_t v) const { return var_off[v + 1] - var_off[v]; }
    std::size_t check_degree(std::size_t c) const {
        return check_off[c + 1] - check_off[c];
    }
    std::span<const std::uint32_t> var_edges(std::size_t v) const {
        return {var_adj.data() + var_off[v], var_degree(v)};
    }
    std::span<const std::uint32_t> check_edges(std::size_t c) const {
        return {check_adj.data() + check_off[c], check_degree(c)};
    }
    bool has_degenerate_nodes() const {
        return !degenerate_vars.empty() || !degenerate_checks.empty();
    }
};

TannerGraph build_graph(const BitMatrix& h);

struct DegreeProfile {
    std::map<std::size_t, std::size_t> var_hist;
    std::map<std::size_t, std::size_t> check_hist;
};

DegreeProfile degree_profile(const TannerGraph& g);

}  // namespace wbplab
