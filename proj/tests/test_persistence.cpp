#include <catch2/catch_amalgamated.hpp>

#include <phclust/persistence.hpp>

#include <numeric>
#include <set>

#include "oracles.hpp"

using namespace phclust;

namespace {

const double kSqrt2 = std::sqrt(2.0);

struct Interval {
    double birth, death;
};

std::vector<Interval> intervals(const Barcode& b, int k, bool keep_zero_length = true) {
    std::vector<Interval> out;
    for (const auto& p : b.in_dimension(k))
        if (keep_zero_length || !p.zero_length()) out.push_back({p.birth, p.death});
    return out;
}

std::vector<Simplex> square_loop() { return {Simplex{0, 1}, Simplex{1, 2}, Simplex{2, 3}, Simplex{0, 3}}; }

std::vector<double> critical_values(const FilteredComplex& c) {
    std::vector<double> v;
    for (const auto& s : c.simplices()) v.push_back(s.value);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::vector<oracle::Cell> cells_of(const FilteredComplex& c) {
    std::vector<oracle::Cell> out;
    for (const auto& s : c.simplices()) out.push_back({{s.simplex.vertices().begin(), s.simplex.vertices().end()}, s.value});
    return out;
}

} // namespace

TEST_CASE("reduction of known complexes", "[persistence]") {
    SECTION("two points") {
        auto [b, r] = reduce(build_rips(DistanceMatrix(2, {0, 3, 3, 0}), 1));
        auto h0 = intervals(b, 0);
        REQUIRE(h0.size() == 2);
        CHECK(h0[0].birth == 0.0);
        CHECK(h0[0].death == 3.0);
        CHECK(std::isinf(h0[1].death));
    }
    SECTION("unit square") {
        auto [b, r] = reduce(build_rips(pairwise_distances(oracle::unit_square()), 2));
        auto h0 = intervals(b, 0);
        REQUIRE(h0.size() == 4);
        for (int i = 0; i < 3; ++i) {
            CHECK(h0[i].birth == 0.0);
            CHECK(h0[i].death == 1.0);
        }
        CHECK(std::isinf(h0[3].death));
        auto h1 = intervals(b, 1, false);
        REQUIRE(h1.size() == 1);
        CHECK(h1[0].birth == 1.0);
        CHECK(h1[0].death == Catch::Approx(kSqrt2).epsilon(1e-12));
    }
    SECTION("hollow triangle") {
        FilteredComplex c({{Simplex{0}, 0}, {Simplex{1}, 0}, {Simplex{2}, 0}, {Simplex{0, 1}, 1}, {Simplex{0, 2}, 1},
                           {Simplex{1, 2}, 1}},
                          3, 1);
        auto [b, r] = reduce(c);
        auto h1 = intervals(b, 1);
        REQUIRE(h1.size() == 1);
        CHECK(h1[0].birth == 1.0);
        CHECK(std::isinf(h1[0].death));
        const auto rep = b.in_dimension(1)[0].representative;
        CHECK(rep.size() == 3);
        CHECK(boundary_membership(rep, r) == kInfinity);
    }
    SECTION("structural defects are rejected before reduction") {
        FilteredComplex c({{Simplex{0}, 0}, {Simplex{0, 1}, 1}}, 2, 1);
        REQUIRE_THROWS_AS(reduce(c), ValidationError);
    }
    SECTION("coincident points give a flagged zero-length bar") {
        auto [b, r] = reduce(build_rips(pairwise_distances(PointCloud({{0.0}, {0.0}, {1.0}})), 1));
        auto h0 = b.in_dimension(0);
        REQUIRE(h0.size() == 3);
        CHECK(h0[0].zero_length());
        CHECK_FALSE(h0[1].zero_length());
    }
}

TEST_CASE("Betti numbers", "[persistence]") {
    auto [b, r] = reduce(build_rips(pairwise_distances(oracle::unit_square()), 2));
    auto at = betti_numbers(b, 1.2);
    CHECK(at[0] == 1);
    CHECK(at[1] == 1);
    auto late = betti_numbers(b, 10.0);
    CHECK(late[0] == 1);
    CHECK(late[1] == 0);
    CHECK(betti_numbers(b, 0.0)[0] == 4);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto cloud = oracle::random_cloud(7, seed);
        auto [bb, rr] = reduce(build_rips(pairwise_distances(cloud), 2));
        auto end = betti_numbers(bb, 100.0);
        CHECK(betti_numbers(bb, 0.0)[0] == 7);
        CHECK(end[0] == 1);
        for (int k = 1; k <= bb.complete_dimension(); ++k) CHECK(end[k] == 0);
    }
}

TEST_CASE("Betti numbers match dense Z/2 ranks", "[persistence][oracle]") {
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        const std::size_t n = 4 + seed % 5;
        auto cloud = oracle::random_cloud(n, seed);
        auto complex = build_rips(pairwise_distances(cloud), 2);
        auto [b, r] = reduce(complex);
        const auto cells = cells_of(complex);
        for (double eps : critical_values(complex)) {
            REQUIRE(betti_numbers(b, eps) == oracle::betti_dense(cells, 2, eps));
        }
    }
}

TEST_CASE("reduction invariants", "[persistence][property]") {
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
        auto d = pairwise_distances(oracle::random_cloud(4 + seed % 6, seed));
        auto complex = build_rips(d, 2);
        auto [b, r] = reduce(complex);

        // distinct lows
        std::set<std::size_t> lows;
        for (std::size_t j = 0; j < r.size(); ++j)
            if (!r.column(j).empty()) REQUIRE(lows.insert(r.column(j).back()).second);

        std::size_t finite = 0, infinite = 0;
        for (const auto& p : b.pairs) {
            REQUIRE(p.birth <= p.death);
            (p.infinite() ? infinite : finite)++;
            REQUIRE_NOTHROW(r.require_cycle(r.to_chain(p.representative)));
            if (!p.infinite() && p.dimension > 0) REQUIRE(boundary_membership(p.representative, r) == p.death);
        }
        REQUIRE(complex.size() == 2 * finite + infinite);
        REQUIRE(intervals(b, 0).size() == d.size());
        REQUIRE(std::count_if(b.pairs.begin(), b.pairs.end(),
                              [](const auto& p) { return p.dimension == 0 && p.infinite(); }) == 1);
    }
}

TEST_CASE("elder rule for dimension-0 bars", "[persistence][property]") {
    for (std::uint64_t seed = 300; seed < 320; ++seed) {
        auto d = pairwise_distances(oracle::random_cloud(9, seed));
        auto complex = build_rips(d, 1);
        auto [b, r] = reduce(complex);
        // Replay the merges: each finite bar's vertex must be the younger root.
        std::vector<int> root(d.size());
        std::iota(root.begin(), root.end(), 0);
        const auto find = [&](int x) {
            while (root[x] != x) x = root[x];
            return x;
        };
        std::map<std::size_t, Vertex> death_of;
        for (const auto& p : b.in_dimension(0))
            if (p.death_index) death_of[*p.death_index] = p.birth_simplex.vertices()[0];
        for (std::size_t j = 0; j < complex.size(); ++j) {
            const auto& s = complex[j].simplex;
            if (s.dimension() != 1) continue;
            const int a = find(s.vertices()[0]), c = find(s.vertices()[1]);
            if (a == c) {
                REQUIRE_FALSE(death_of.count(j));
                continue;
            }
            REQUIRE(death_of.count(j));
            REQUIRE(death_of[j] == std::max(a, c));
            root[std::max(a, c)] = std::min(a, c);
        }
    }
}

TEST_CASE("boundary membership", "[persistence]") {
    auto [b, r] = reduce(build_rips(pairwise_distances(oracle::unit_square()), 2));
    CHECK(boundary_membership({}, r) == 0.0);
    CHECK(boundary_membership(square_loop(), r) == Catch::Approx(kSqrt2).epsilon(1e-12));
    auto twice = square_loop();
    auto loop = square_loop();
    twice.insert(twice.end(), loop.begin(), loop.end());
    CHECK(boundary_membership(twice, r) == 0.0);
    REQUIRE_THROWS_AS(boundary_membership({Simplex{0, 1}}, r), ValidationError);
    REQUIRE_THROWS_AS(boundary_membership({Simplex{0, 1}, Simplex{2}}, r), ValidationError);
}

TEST_CASE("homological cophenetic distance", "[persistence][hcd]") {
    SECTION("two points on a line") {
        auto [b, r] = reduce(build_rips(pairwise_distances(PointCloud({{0.0}, {1.0}})), 1));
        auto h0 = b.in_dimension(0);
        CHECK(hcd(h0[0], h0[1], r) == 1.0);
    }
    SECTION("two squares") {
        auto [b, r] = reduce(build_rips(pairwise_distances(oracle::two_squares()), 2));
        std::vector<PersistencePair> loops;
        for (const auto& p : b.in_dimension(1))
            if (!p.zero_length()) loops.push_back(p);
        REQUIRE(loops.size() == 2);
        CHECK(hcd(loops[0], loops[1], r) == Catch::Approx(kSqrt2 - 1).epsilon(1e-12));
        CHECK(hcd(loops[1], loops[0], r) == hcd(loops[0], loops[1], r));
        REQUIRE_THROWS_AS(hcd(loops[0], b.in_dimension(0)[0], r), ValidationError);
    }
    SECTION("disjoint lifespans give 0") {
        // side 1 loop lives on [1, sqrt2); side 3 loop on [3, 3 sqrt2)
        std::vector<std::vector<double>> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        for (auto [x, y] : {std::pair{0.0, 0.0}, {3.0, 0.0}, {3.0, 3.0}, {0.0, 3.0}}) pts.push_back({x + 30, y + 30});
        auto [b, r] = reduce(build_rips(pairwise_distances(PointCloud(pts)), 2));
        const PersistencePair* small = nullptr;
        const PersistencePair* large = nullptr;
        for (const auto& p : b.pairs) {
            if (p.dimension != 1 || p.zero_length()) continue;
            if (p.birth == 1.0) small = &p;
            if (p.birth == 3.0) large = &p;
        }
        REQUIRE(small);
        REQUIRE(large);
        CHECK(hcd(*small, *large, r) == 0.0);
    }
}

TEST_CASE("D_k matrices", "[persistence][hcd]") {
    SECTION("collinear 0,1,3") {
        auto d = pairwise_distances(PointCloud({{0.0}, {1.0}, {3.0}}));
        auto [b, r] = reduce(build_rips(d, 1));
        auto m = hcd_matrix(b, r, 0);
        CHECK(m(0, 1) == 1.0);
        CHECK(m(0, 2) == 2.0);
        CHECK(m(1, 2) == 2.0);
        CHECK(m.labels() == d.labels());
        CHECK(m == h0_cophenetic(d));
    }
    SECTION("single point") {
        auto [b, r] = reduce(build_rips(DistanceMatrix(1, {0.0}), 0));
        auto m = hcd_matrix(b, r, 0);
        REQUIRE(m.size() == 1);
        CHECK(m(0, 0) == 0.0);
    }
    SECTION("k = 1 on two squares") {
        auto [b, r] = reduce(build_rips(pairwise_distances(oracle::two_squares()), 2));
        auto m = hcd_matrix(b, r, 1);
        REQUIRE(m.size() == 2);
        CHECK(m(0, 1) == Catch::Approx(kSqrt2 - 1).epsilon(1e-12));
        CHECK(m.labels() == std::vector<std::string>{"1:0", "1:1"});
    }
    SECTION("k too large") {
        auto [b, r] = reduce(build_rips(pairwise_distances(oracle::unit_square()), 2));
        REQUIRE_THROWS_AS(hcd_matrix(b, r, 2), ValidationError);
        REQUIRE_THROWS_AS(hcd_matrix(b, r, -1), ValidationError);
    }
}

TEST_CASE("C_0 fast path", "[persistence][h0]") {
    CHECK(h0_cophenetic(DistanceMatrix(2, {0, 5, 5, 0}))(0, 1) == 5.0);
    auto eq = h0_cophenetic(DistanceMatrix(4, {0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0}));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(eq(i, j) == (i == j ? 0.0 : 1.0));

    for (std::uint64_t seed = 400; seed < 425; ++seed) {
        auto d = pairwise_distances(oracle::random_cloud(3 + seed % 10, seed));
        auto c0 = h0_cophenetic(d);
        auto [b, r] = reduce(build_rips(d, 1));
        REQUIRE(c0 == hcd_matrix(b, r, 0));
        REQUIRE(c0 == oracle::mst_path_max(d));
        for (std::size_t i = 0; i < d.size(); ++i)
            for (std::size_t j = 0; j < d.size(); ++j)
                for (std::size_t k = 0; k < d.size(); ++k) REQUIRE(c0(i, k) <= std::max(c0(i, j), c0(j, k)));
    }
}

TEST_CASE("barcode JSON", "[persistence][json]") {
    auto [b, r] = reduce(build_rips(pairwise_distances(oracle::unit_square()), 2));
    auto j = barcode_to_json(b.up_to_dimension(1));
    CHECK(j["complex_size"] == b.complex_size);
    const auto& bars = j["bars"];
    // 4 H0 bars, the loop, and one zero-length H1 bar per diagonal
    REQUIRE(bars.size() == 7);
    CHECK(bars[0]["dim"] == 0);
    CHECK(bars[3]["death"].is_null());
    for (std::size_t i = 1; i < bars.size(); ++i) {
        auto key = [](const auto& x) {
            return std::tuple(x["dim"].template get<int>(), x["birth"].template get<double>(),
                              x["death"].is_null() ? kInfinity : x["death"].template get<double>());
        };
        REQUIRE(key(bars[i - 1]) <= key(bars[i]));
    }
    auto back = barcode_from_json(nlohmann::json::parse(j.dump()));
    REQUIRE(back.pairs.size() == bars.size());
    CHECK(back.in_dimension(0)[0].birth_simplex == b.in_dimension(0)[0].birth_simplex);
    REQUIRE_THROWS_AS(barcode_from_json(nlohmann::json::parse(R"({"bars": 3})")), ValidationError);
}
