#include <catch_amalgamated.hpp>

#include <cstdlib>

#include "gsaw/gaussian.hpp"
#include "gsaw/markov.hpp"
#include "gsaw/sampling.hpp"
#include "oracles.hpp"

using namespace gsaw;

namespace {

constexpr double z_tol = 3.5;

void check_estimate(const Estimate& e, double target, double slack = 0.0) {
    INFO("mean " << e.mean << " +- " << e.std_error << " target " << target);
    CHECK(std::abs(e.mean - target) <= z_tol * e.std_error + slack + 1e-12);
}

double cov(const CouplingModel& m, Site x, Site y) { return model_covariance<FloatComplex>(m)(x, y).real(); }

class ThreadsEnv {
public:
    explicit ThreadsEnv(const char* value) { setenv("GSAW_THREADS", value, 1); }
    ~ThreadsEnv() { unsetenv("GSAW_THREADS"); }
};

}  // namespace

TEST_CASE("random streams are deterministic and in range", "[rng]") {
    Rng a = Rng::stream(12345, 7), b = Rng::stream(12345, 7), c = Rng::stream(12345, 8);
    bool differ = false;
    for (int i = 0; i < 100; ++i) {
        std::uint64_t x = a.next();
        CHECK(x == b.next());
        differ = differ || x != c.next();
    }
    CHECK(differ);
    Rng r(1);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u <= 1.0);
        sum += r.exponential(4.0);
    }
    // Mean 1/4, standard deviation 1/4 per sample.
    CHECK(std::abs(sum / n - 0.25) < 4 * 0.25 / std::sqrt(n));
}

TEST_CASE("chain parameters", "[markov]") {
    CtmcParams k(fixtures::i2(), ChainVariant::killed);
    CHECK(k.size() == 2);
    CHECK(k.rate(0) == 3.0);
    CHECK(k.jump_probability(0, 1) == Catch::Approx(1.0 / 3));
    CHECK(k.kill_probability(0) == Catch::Approx(2.0 / 3));
    CHECK(k.kill_rate(1) == Catch::Approx(2.0));
    CHECK(k.min_kill_rate() == Catch::Approx(2.0));
    CtmcParams u(fixtures::i2(), ChainVariant::unkilled);
    CHECK(u.rate(0) == 1.0);
    CHECK(u.jump_probability(0, 1) == 1.0);
    CHECK(u.kill_probability(0) == 0.0);

    RandomInputs rnd(61);
    for (int i = 0; i < 10; ++i) {
        CtmcParams p(rnd.dominant_model(static_cast<std::size_t>(rnd.integer(1, 5))), ChainVariant::killed);
        for (Site x = 0; x < p.size(); ++x) {
            double row = p.kill_probability(x);
            for (Site y = 0; y < p.size(); ++y) row += p.jump_probability(x, y);
            CHECK(row == Catch::Approx(1.0));
        }
    }
}

TEST_CASE("chain guards", "[markov]") {
    ExactComplex one(1), two(2), zero(0), i(Rational(0), Rational(1));
    CouplingModel heavy({one, one}, ExactMatrix{{zero, two}, {two, zero}});
    CHECK_THROWS_AS(CtmcParams(heavy, ChainVariant::killed), PreconditionError);
    CHECK_NOTHROW(CtmcParams(heavy, ChainVariant::unkilled));
    CouplingModel negative({two, two}, ExactMatrix{{zero, -one}, {-one, zero}});
    CHECK_THROWS_AS(CtmcParams(negative, ChainVariant::killed), PreconditionError);
    CouplingModel complex({two, two}, ExactMatrix{{zero, i}, {i, zero}});
    CHECK_THROWS_AS(CtmcParams(complex, ChainVariant::killed), PreconditionError);

    CtmcParams k(fixtures::i2(), ChainVariant::killed);
    Rng rng(1);
    CHECK_THROWS_AS(simulate_path(k, 0, 1.0, rng), PreconditionError);
    CHECK_THROWS_AS(simulate_path(k, 5, std::nullopt, rng), PreconditionError);
    CtmcParams u(fixtures::i2(), ChainVariant::unkilled);
    CHECK_THROWS_AS(simulate_path(u, 0, std::nullopt, rng), PreconditionError);
    std::vector<double> v{0.0, 0.0};
    CHECK_THROWS_AS(estimate_fk(k, 0, 1, v, 10, 1, 5.0), PreconditionError);
    CHECK_THROWS_AS(estimate_fk(k, 0, 1, v, 10, 1, 0.0), PreconditionError);
    CHECK_THROWS_AS(estimate_wsaw(k, 0, 1, -1.0, 0.0, 10, 1), PreconditionError);
    CHECK_THROWS_AS(estimate_wsaw(k, 0, 1, 1.0, -3.0, 10, 1), PreconditionError);
    CHECK_THROWS_AS(monte_carlo(0, 1, [](Rng&) { return 0.0; }), PreconditionError);
    CHECK_THROWS_AS(gamma_weight_integral(2, -1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(wsaw_walk_sum(RandomInputs(3).dominant_model(3), 0, 1, 1.0, 0.0, 5), PreconditionError);
}

TEST_CASE("path structure", "[markov]") {
    CtmcParams k1(fixtures::i1(), ChainVariant::killed);
    CtmcParams k3(fixtures::i3(), ChainVariant::killed);
    CtmcParams u3(fixtures::i3(), ChainVariant::unkilled);
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        auto p1 = simulate_path(k1, 0, std::nullopt, rng);
        CHECK(p1.skeleton == std::vector<Site>{0});
        CHECK(p1.local_times[0] == Catch::Approx(p1.zeta));

        auto p = simulate_path(k3, 1, std::nullopt, rng);
        REQUIRE(p.skeleton.size() == p.holds.size());
        CHECK(p.skeleton.front() == 1);
        CHECK(p.last_site == p.skeleton.back());
        double total = 0, holds = 0;
        for (double l : p.local_times) total += l;
        for (double h : p.holds) holds += h;
        CHECK(total == Catch::Approx(p.zeta));
        CHECK(holds == Catch::Approx(p.zeta));
        for (std::size_t j = 1; j < p.skeleton.size(); ++j) CHECK(p.skeleton[j] != p.skeleton[j - 1]);

        auto q = simulate_path(u3, 2, 1.5, rng);
        double tq = 0;
        for (double l : q.local_times) tq += l;
        CHECK(q.zeta == 1.5);
        CHECK(tq == Catch::Approx(1.5));
        CHECK(q.last_site == q.skeleton.back());
    }
    // Without outgoing rate the unkilled chain stays put.
    CtmcParams u1(fixtures::i1(), ChainVariant::unkilled);
    auto still = simulate_path(u1, 0, 2.0, rng);
    CHECK(still.skeleton == std::vector<Site>{0});
    CHECK(still.local_times[0] == 2.0);
}

TEST_CASE("local-time moments of the killed chain", "[markov]") {
    const CouplingModel m = fixtures::i3();
    CtmcParams k(m, ChainVariant::killed);
    const Site a = 0;
    for (Site x = 0; x < 3; ++x) {
        auto first = monte_carlo(200000, 71 + x, [&](Rng& r) { return simulate_path(k, a, std::nullopt, r).local_times[x]; });
        check_estimate(first, cov(m, a, x));
        auto second = monte_carlo(200000, 81 + x, [&](Rng& r) {
            double l = simulate_path(k, a, std::nullopt, r).local_times[x];
            return l * l;
        });
        check_estimate(second, 2 * cov(m, a, x) * cov(m, x, x));
    }
    auto zeta = monte_carlo(200000, 91, [&](Rng& r) { return simulate_path(k, a, std::nullopt, r).zeta; });
    check_estimate(zeta, cov(m, a, 0) + cov(m, a, 1) + cov(m, a, 2));
    for (Site b = 0; b < 3; ++b) {
        auto last = monte_carlo(200000, 101 + b, [&](Rng& r) {
            return simulate_path(k, a, std::nullopt, r).last_site == b ? 1.0 : 0.0;
        });
        check_estimate(last, cov(m, a, b) * k.kill_rate(b));
    }
}

TEST_CASE("estimators hit covariance targets", "[markov]") {
    const std::uint64_t n = 200000;
    CtmcParams k1(fixtures::i1(), ChainVariant::killed), k2(fixtures::i2(), ChainVariant::killed);
    CtmcParams u1(fixtures::i1(), ChainVariant::unkilled), u2(fixtures::i2(), ChainVariant::unkilled);
    std::vector<double> v0{0.0}, v00{0.0, 0.0}, v11{1.0, 1.0};
    check_estimate(estimate_dynkin(k1, 0, 0, v0, n, 1), 0.5);
    check_estimate(estimate_dynkin(k2, 0, 1, v00, n, 2), 0.125);
    check_estimate(estimate_dynkin(k2, 0, 1, v11, n, 3), 1.0 / 15);
    check_estimate(estimate_fk(u1, 0, 0, v0, n, 4), 0.5);
    check_estimate(estimate_fk(u2, 0, 1, v00, n, 5), 0.125);
    check_estimate(estimate_fk(u2, 0, 1, v11, n, 6), 1.0 / 15);
    check_estimate(estimate_fk(u2, 0, 1, v11, n, 7, 0.5), 1.0 / 15);

    RandomInputs rnd(62);
    for (int i = 0; i < 3; ++i) {
        CouplingModel m = rnd.dominant_model(3);
        CtmcParams k(m, ChainVariant::killed), u(m, ChainVariant::unkilled);
        std::vector<double> v{0.0, 0.5, 0.25};
        double target = model_covariance<FloatComplex>(m.with_potential({ExactComplex(0), ExactComplex(Rational(1, 2)),
                                                                          ExactComplex(Rational(1, 4))}))(0, 2).real();
        check_estimate(estimate_dynkin(k, 0, 2, v, n, 200 + i), target);
        check_estimate(estimate_fk(u, 0, 2, v, n, 300 + i), target);
    }
}

TEST_CASE("killed and horizon representations agree on an indicator functional", "[markov]") {
    CtmcParams k(fixtures::i3(), ChainVariant::killed), u(fixtures::i3(), ChainVariant::unkilled);
    auto indicator = [](std::span<const double> l) { return l[1] > 0.1 ? 1.0 : 0.0; };
    auto killed = estimate_killed_functional(k, 0, 2, [&](std::span<const double> l, double) { return indicator(l); },
                                             400000, 11);
    auto horizon = estimate_fk_functional(u, 0, 2, indicator, 400000, 12);
    double sigma = std::hypot(killed.std_error, horizon.std_error);
    CHECK(std::abs(killed.mean - horizon.mean) <= z_tol * sigma);
}

TEST_CASE("results do not depend on the thread count", "[markov]") {
    CtmcParams k(fixtures::i3(), ChainVariant::killed);
    std::vector<double> v{0.2, 0.0, 0.1};
    Estimate one, many;
    {
        ThreadsEnv env("1");
        CHECK(worker_threads() == 1);
        one = estimate_dynkin(k, 0, 1, v, 50000, 9);
    }
    {
        ThreadsEnv env("7");
        CHECK(worker_threads() == 7);
        many = estimate_dynkin(k, 0, 1, v, 50000, 9);
    }
    CHECK(one.mean == many.mean);
    CHECK(one.std_error == many.std_error);
    CHECK(one.n_samples == 50000);
    CHECK(one.seed == 9);
}

TEST_CASE("gamma weight integral", "[markov]") {
    CHECK(gamma_weight_integral(0, 1.0, 2.0) == 1.0);
    CHECK(gamma_weight_integral(3, 0.0, 2.0) == Catch::Approx(0.125).epsilon(1e-14));
    CHECK(gamma_weight_integral(3, 1.0, 0.5) == Catch::Approx(0.12950989602372154).epsilon(1e-12));
    for (unsigned n : {1U, 2U, 4U, 7U})
        for (double g : {0.1, 0.5, 1.0, 3.0})
            for (double beta : {0.0, 1.0, 3.0}) {
                INFO("n=" << n << " g=" << g << " beta=" << beta);
                CHECK(gamma_weight_integral(n, g, beta) == Catch::Approx(oracle::gamma_weight_simpson(n, g, beta)).epsilon(1e-9));
            }
}

TEST_CASE("walk sums", "[markov]") {
    for (const auto& m : {fixtures::i1(), fixtures::i2(), fixtures::i3()}) {
        for (Site b = 0; b < m.size(); ++b) {
            auto s = wsaw_walk_sum(m, 0, b, 0.0, 0.0, 30);
            CHECK(std::isfinite(s.tail_bound));
            CHECK(std::abs(s.value - cov(m, 0, b)) <= s.tail_bound + 1e-15);
            auto shifted = wsaw_walk_sum(m, 0, b, 0.0, 1.0, 30);
            double target = model_covariance<FloatComplex>(m.with_diagonal_shift(ExactComplex(1)))(0, b).real();
            CHECK(std::abs(shifted.value - target) <= shifted.tail_bound + 1e-15);
            // Self-avoidance penalties only lower the weights.
            CHECK(wsaw_walk_sum(m, 0, b, 1.0, 0.0, 30).value < s.value);
        }
    }
    // One site: the series is the single gamma integral with n = 1.
    CHECK(wsaw_walk_sum(fixtures::i1(), 0, 0, 1.0, 0.0, 10).value ==
          Catch::Approx(oracle::gamma_weight_simpson(1, 1.0, 2.0)).epsilon(1e-9));
}

TEST_CASE("weakly self-avoiding walk estimator", "[markov]") {
    for (const auto& m : {fixtures::i2(), fixtures::i3()}) {
        CtmcParams k(m, ChainVariant::killed);
        for (double g : {0.5, 1.0}) {
            auto sum = wsaw_walk_sum(m, 0, 1, g, 0.0, 60);
            REQUIRE(sum.tail_bound < 1e-6);
            check_estimate(estimate_wsaw(k, 0, 1, g, 0.0, 200000, 400 + static_cast<std::uint64_t>(g * 10)), sum.value,
                           sum.tail_bound);
        }
    }
    CtmcParams k1(fixtures::i1(), ChainVariant::killed);
    check_estimate(estimate_wsaw(k1, 0, 0, 1.0, 0.0, 200000, 410), oracle::gamma_weight_simpson(1, 1.0, 2.0));
}

TEST_CASE("finite-difference derivative in g matches the first Taylor coefficient", "[markov]") {
    // The weight is -S - h^3 S^4 / 18 + ..., so the bias stays below h^3 E[S^4] / 18.
    const double h = 0.005;
    for (const auto& m : {fixtures::i2(), fixtures::i3()}) {
        CtmcParams k(m, ChainVariant::killed);
        double first = wsaw_g_taylor(m, 0, 1, ExactComplex(0), 1).local_time_side[1].to_float().real();
        auto est = estimate_killed_functional(
            k, 0, 1,
            [h](std::span<const double> l, double) {
                double s = 0;
                for (double x : l) s += x * x;
                return (4 * std::expm1(-h * s) / h - std::expm1(-2 * h * s) / (2 * h)) / 3;
            },
            400000, 500 + m.size());
        check_estimate(est, first, 1e-4);
    }
}
