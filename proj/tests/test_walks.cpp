#include <catch_amalgamated.hpp>

#include <set>

#include "gsaw/sampling.hpp"
#include "gsaw/walks.hpp"
#include "oracles.hpp"

using namespace gsaw;

namespace {

std::size_t falling(std::size_t n, std::size_t k) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < k; ++i) r *= n - i;
    return r;
}

std::vector<Site> all_sites(std::size_t m) {
    std::vector<Site> s(m);
    for (Site x = 0; x < m; ++x) s[x] = x;
    return s;
}

}  // namespace

TEST_CASE("site sets", "[walks]") {
    SiteSet s{0, 2, 5};
    CHECK(s.size() == 3);
    CHECK(s.contains(2));
    CHECK_FALSE(s.contains(1));
    CHECK(s.sites() == std::vector<Site>{0, 2, 5});
    CHECK((s - SiteSet{2}).sites() == std::vector<Site>{0, 5});
    CHECK(SiteSet::all(3).mask() == 7U);
}

TEST_CASE("walk visits and edges", "[walks]") {
    Walk w{{0, 1, 0, 2}};
    CHECK(w.length() == 3);
    CHECK(w.visits(3) == std::vector<std::size_t>{2, 1, 1});
    CHECK(w.edges() == std::vector<Edge>{{0, 1}, {1, 0}, {0, 2}});
}

TEST_CASE("walk enumeration counts", "[walks]") {
    for (std::size_t m = 1; m <= 3; ++m)
        for (std::size_t maxlen = 0; maxlen <= 4; ++maxlen) {
            auto walks = enumerate_walks_upto(m, 0, m - 1, maxlen);
            std::size_t expected = (m == 1) ? 1 : 0;
            std::size_t layer = 1;
            for (std::size_t n = 1; n <= maxlen; ++n) {
                expected += layer;
                layer *= m;
            }
            CHECK(walks.size() == expected);
            std::set<Walk> unique(walks.begin(), walks.end());
            CHECK(unique.size() == walks.size());
            for (const auto& w : walks) {
                CHECK(w.vertices.front() == 0);
                CHECK(w.vertices.back() == m - 1);
                CHECK(w.length() <= maxlen);
            }
        }
}

TEST_CASE("self-avoiding walk invariant", "[walks]") {
    CHECK(SelfAvoidingWalk::satisfies_invariant(std::vector<Site>{0, 1, 2}));
    CHECK(SelfAvoidingWalk::satisfies_invariant(std::vector<Site>{0, 0}));
    CHECK(SelfAvoidingWalk::satisfies_invariant(std::vector<Site>{0, 1, 0}));
    CHECK_FALSE(SelfAvoidingWalk::satisfies_invariant(std::vector<Site>{0, 1, 1, 2}));
    CHECK_FALSE(SelfAvoidingWalk::satisfies_invariant(std::vector<Site>{0, 2, 1, 2}));
    CHECK_FALSE(SelfAvoidingWalk::satisfies_invariant(std::vector<Site>{0}));
    CHECK_THROWS_AS(SelfAvoidingWalk({0, 1, 1, 2}), PreconditionError);

    for (std::size_t n = 0; n <= 4; ++n) {
        SiteSet interior;
        for (Site x = 2; x < 2 + n; ++x) interior.insert(x);
        for (auto [a, b] : {std::pair<Site, Site>{0, 1}, {0, 0}}) {
            auto saws = enumerate_saws(a, b, interior);
            std::size_t expected = 0;
            for (std::size_t k = 0; k <= n; ++k) expected += falling(n, k);
            CHECK(saws.size() == expected);
            for (const auto& w : saws) {
                CHECK(SelfAvoidingWalk::satisfies_invariant(w.vertices));
                CHECK(w.vertices.front() == a);
                CHECK(w.vertices.back() == b);
            }
        }
    }
}

TEST_CASE("loops are stored in canonical rotation", "[walks]") {
    Loop l({2, 0, 1});
    CHECK(l.vertices() == std::vector<Site>{0, 1, 2});
    CHECK(Loop({1, 2, 0}) == l);
    CHECK_FALSE(Loop({0, 2, 1}) == l);
    CHECK(l.edges() == std::vector<Edge>{{0, 1}, {1, 2}, {2, 0}});
    Loop self({3});
    CHECK(self.is_self_loop());
    CHECK(self.edges() == std::vector<Edge>{{3, 3}});
    CHECK_THROWS_AS(Loop({0, 1, 0}), PreconditionError);
}

TEST_CASE("loop configurations correspond to partial permutations", "[walks]") {
    for (std::size_t n = 0; n <= 5; ++n) {
        auto configs = enumerate_loop_configs(SiteSet::all(n));
        std::size_t expected = 0;
        for (std::size_t k = 0; k <= n; ++k) expected += falling(n, k);
        CHECK(configs.size() == expected);
        for (std::size_t i = 1; i < configs.size(); ++i) CHECK(configs[i - 1] < configs[i]);
        for (const auto& cfg : configs) {
            CHECK(cfg.vertex_set().size() == cfg.total_length());
            CHECK((cfg.vertex_set() - SiteSet::all(n)).empty());
        }
    }
    CHECK_THROWS_AS(LoopConfig({Loop({0, 1}), Loop({1, 2})}), PreconditionError);
}

TEST_CASE("two-point functions against subset-permutation oracles", "[walks]") {
    RandomInputs rnd(21);
    for (int trial = 0; trial < 25; ++trial) {
        std::size_t m = static_cast<std::size_t>(rnd.integer(1, 5));
        CouplingModel model = rnd.dominant_model(m, trial % 3 == 0);
        auto c = model_covariance<ExactComplex>(model);
        Site a = static_cast<Site>(rnd.integer(0, static_cast<long>(m) - 1));
        Site b = static_cast<Site>(rnd.integer(0, static_cast<long>(m) - 1));
        CHECK(saw_two_point(c, a, b) == oracle::saw_loop_sum(c.entries(), a, b, std::nullopt));
        CHECK(loop_two_point(c, a, b, false) == oracle::saw_loop_sum(c.entries(), a, b, false));
        CHECK(loop_two_point(c, a, b, true) == oracle::saw_loop_sum(c.entries(), a, b, true));
        CHECK(loop_config_sum(c.entries(), SiteSet::all(m), false) == oracle::loop_sum(c.entries(), all_sites(m), false));
    }
}

TEST_CASE("fixture two-point values", "[walks]") {
    auto c3 = model_covariance<ExactComplex>(fixtures::i3());
    CHECK(saw_two_point(c3, 0, 2) == ExactComplex(Rational(5, 16)));
    CHECK(loop_two_point(c3, 0, 2, false) == ExactComplex(Rational(7, 16)));
    auto c2 = model_covariance<ExactComplex>(fixtures::i2());
    CHECK(saw_two_point(c2, 0, 0) == ExactComplex(Rational(25, 64)));
}

TEST_CASE("walk series partial sums equal explicit walk sums", "[walks]") {
    RandomInputs rnd(22);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t m = static_cast<std::size_t>(rnd.integer(1, 3));
        CouplingModel model = rnd.dominant_model(m, trial % 2 == 0);
        Site a = 0, b = m - 1;
        for (std::size_t maxlen : {0U, 1U, 3U, 5U}) {
            ExactComplex sum(0);
            for (const auto& w : enumerate_walks_upto(m, a, b, maxlen)) sum += srw_walk_weight(model, w);
            CHECK(srw_two_point_series<ExactComplex>(model, a, b, maxlen).partial == sum);
        }
    }
}

TEST_CASE("walk series converges within its tail bound", "[walks]") {
    RandomInputs rnd(23);
    std::vector<CouplingModel> models{fixtures::i1(), fixtures::i2(), fixtures::i3()};
    for (int i = 0; i < 10; ++i) models.push_back(rnd.dominant_model(static_cast<std::size_t>(rnd.integer(1, 4)), i % 2 == 1));
    for (const auto& model : models) {
        if (!validate_model(model).walk_series_ok()) continue;
        auto c = model_covariance<ExactComplex>(model);
        for (Site a = 0; a < model.size(); ++a)
            for (Site b = 0; b < model.size(); ++b)
                for (std::size_t maxlen = 0; maxlen <= 20; ++maxlen) {
                    auto s = srw_two_point_series<ExactComplex>(model, a, b, maxlen);
                    ExactComplex err = s.partial - c(a, b);
                    if (s.tail_bound_exact) CHECK(err.norm() <= *s.tail_bound_exact * *s.tail_bound_exact);
                    CHECK(std::abs(err.to_float()) <= s.tail_bound * (1 + 1e-12));
                    auto f = srw_two_point_series<FloatComplex>(model, a, b, maxlen);
                    CHECK(std::abs(f.partial - s.partial.to_float()) < 1e-12);
                }
    }
}

TEST_CASE("walk series closed form on the two-site fixture", "[walks]") {
    for (std::size_t maxlen = 0; maxlen <= 20; ++maxlen) {
        std::size_t odd_terms = (maxlen + 1) / 2;
        Rational ninth_power(1);
        for (std::size_t i = 0; i < odd_terms; ++i) ninth_power /= 9;
        Rational expected = Rational(1, 8) * (1 - ninth_power);
        CHECK(srw_two_point_series<ExactComplex>(fixtures::i2(), 0, 1, maxlen).partial == ExactComplex(expected));
    }
}

TEST_CASE("walk series rejects rho at least one", "[walks]") {
    ExactComplex one(1), two(2), zero(0);
    CouplingModel bad({one, one}, ExactMatrix{{zero, two}, {two, zero}});
    CHECK_THROWS_AS(srw_two_point_series<ExactComplex>(bad, 0, 1, 5), PreconditionError);
}
