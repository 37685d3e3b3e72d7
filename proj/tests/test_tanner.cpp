#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wbplab/errors.hpp"
#include "wbplab/tanner.hpp"

using namespace wbplab;

namespace {

BitMatrix small_h() {
    // [[1,1,0],[0,1,1]]
    BitMatrix h(2, 3);
    h.set(0, 0, true);
    h.set(0, 1, true);
    h.set(1, 1, true);
    h.set(1, 2, true);
    return h;
}

}  // namespace

TEST_CASE("build_graph small example") {
    const TannerGraph g = build_graph(small_h());
    CHECK(g.n_vars == 3);
    CHECK(g.n_checks == 2);
    CHECK(g.n_edges() == 4);
    CHECK(g.var_degree(1) == 2);
    CHECK(g.var_degree(0) == 1);
    // row-major edge order: (v0,c0), (v1,c0), (v1,c1), (v2,c1)
    CHECK(g.edges[0].v == 0);
    CHECK(g.edges[0].c == 0);
    CHECK(g.edges[1].v == 1);
    CHECK(g.edges[2].c == 1);
    CHECK(g.edges[3].v == 2);
    CHECK_FALSE(g.has_degenerate_nodes());
}

TEST_CASE("adjacency matches matrix supports") {
    const BitMatrix h = small_h();
    const TannerGraph g = build_graph(h);
    for (std::size_t v = 0; v < g.n_vars; ++v)
        for (const std::uint32_t e : g.var_edges(v)) {
            CHECK(g.edges[e].v == v);
            CHECK(h.get(g.edges[e].c, v));
        }
    for (std::size_t c = 0; c < g.n_checks; ++c)
        for (const std::uint32_t e : g.check_edges(c)) {
            CHECK(g.edges[e].c == c);
            CHECK(h.get(c, g.edges[e].v));
        }
}

TEST_CASE("identity matrix gives unit degrees") {
    const TannerGraph g = build_graph(BitMatrix::identity(3));
    CHECK(g.n_edges() == 3);
    const DegreeProfile p = degree_profile(g);
    CHECK(p.var_hist.at(1) == 3);
    CHECK(p.check_hist.at(1) == 3);
}

TEST_CASE("single-row matrix profile") {
    BitMatrix h(1, 3);
    for (std::size_t c = 0; c < 3; ++c) h.set(0, c, true);
    const DegreeProfile p = degree_profile(build_graph(h));
    CHECK(p.check_hist.size() == 1);
    CHECK(p.check_hist.at(3) == 1);
    CHECK(p.var_hist.at(1) == 3);
}

TEST_CASE("degenerate nodes are flagged, not fatal") {
    BitMatrix h(2, 3);
    h.set(0, 0, true);
    h.set(0, 2, true);  // row 1 and column 1 stay empty
    const TannerGraph g = build_graph(h);
    CHECK(g.has_degenerate_nodes());
    CHECK(g.degenerate_vars == std::vector<std::uint32_t>{1});
    CHECK(g.degenerate_checks == std::vector<std::uint32_t>{1});
}

TEST_CASE("all-zero matrix is rejected") {
    BitMatrix h(2, 2);
    CHECK_THROWS_AS(build_graph(h), StructuralError);
}

TEST_CASE("identical matrices build identical graphs") {
    const TannerGraph a = build_graph(small_h());
    const TannerGraph b = build_graph(small_h());
    REQUIRE(a.n_edges() == b.n_edges());
    for (std::size_t e = 0; e < a.n_edges(); ++e) {
        CHECK(a.edges[e].v == b.edges[e].v);
        CHECK(a.edges[e].c == b.edges[e].c);
    }
    CHECK(a.var_adj == b.var_adj);
    CHECK(a.check_adj == b.check_adj);
}

TEST_CASE("edge count equals degree sums") {
    const TannerGraph g = build_graph(small_h());
    std::size_t var_sum = 0, check_sum = 0;
    for (std::size_t v = 0; v < g.n_vars; ++v) var_sum += g.var_degree(v);
    for (std::size_t c = 0; c < g.n_checks; ++c) check_sum += g.check_degree(c);
    CHECK(var_sum == g.n_edges());
    CHECK(check_sum == g.n_edges());
}
