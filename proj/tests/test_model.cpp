#include <catch_amalgamated.hpp>

#include "gsaw/linalg.hpp"
#include "gsaw/model.hpp"
#include "gsaw/model_io.hpp"
#include "gsaw/sampling.hpp"
#include "oracles.hpp"

using namespace gsaw;
using Catch::Matchers::ContainsSubstring;

namespace {

ExactComplex q(const char* s) { return ExactComplex(parse_rational(s)); }

ExactMatrix random_matrix(RandomInputs& rnd, std::size_t n, bool complex) {
    ExactMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = rnd.scalar(complex);
    return a;
}

}  // namespace

TEST_CASE("rational parsing and printing", "[scalar]") {
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational("-6/8") == Rational(-3, 4));
    CHECK(parse_rational("0.125") == Rational(1, 8));
    CHECK(parse_rational("-2.5") == Rational(-5, 2));
    CHECK(parse_rational("7") == Rational(7));
    CHECK(to_string(parse_rational("10/512")) == "5/256");
    CHECK(to_string(Rational(3)) == "3");
    CHECK_THROWS(parse_rational("1/0"));
    CHECK_THROWS(parse_rational("abc"));
}

TEST_CASE("exact complex arithmetic", "[scalar]") {
    ExactComplex i(Rational(0), Rational(1));
    CHECK(i * i == ExactComplex(-1));
    ExactComplex z(Rational(3), Rational(4));
    CHECK(z * z.conj() == ExactComplex(25));
    CHECK(z.norm() == Rational(25));
    CHECK(z / z == ExactComplex(1));
    CHECK((ExactComplex(1) / z) * z == ExactComplex(1));
    CHECK_THROWS_AS(z / ExactComplex(0), Error);
    CHECK(to_string(ExactComplex(Rational(1, 2), Rational(-1, 3))) == "1/2-1/3i");
}

TEST_CASE("determinant routes agree with Laplace expansion", "[linalg]") {
    RandomInputs rnd(11);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t n = static_cast<std::size_t>(rnd.integer(1, 5));
        ExactMatrix a = random_matrix(rnd, n, trial % 2 == 1);
        ExactComplex ref = oracle::det_laplace(a);
        CHECK(determinant(a) == ref);
        CHECK(determinant_cofactor(a) == ref);
    }
    ExactMatrix singular{{q("1"), q("2")}, {q("2"), q("4")}};
    CHECK(determinant(singular).is_zero());
    CHECK_THROWS_AS(inverse(singular), SingularMatrixError);
}

TEST_CASE("float determinant matches exact", "[linalg]") {
    RandomInputs rnd(12);
    for (int trial = 0; trial < 20; ++trial) {
        ExactMatrix a = random_matrix(rnd, 4, true);
        FloatComplex d = determinant(a.cast<FloatComplex>());
        CHECK(std::abs(d - determinant(a).to_float()) < 1e-9 * std::max(1.0, std::abs(d)));
    }
}

TEST_CASE("inverse times matrix is identity", "[linalg]") {
    RandomInputs rnd(13);
    for (int trial = 0; trial < 20; ++trial) {
        ExactMatrix a = random_matrix(rnd, static_cast<std::size_t>(rnd.integer(1, 5)), trial % 2 == 0);
        if (determinant(a).is_zero()) continue;
        CHECK(inverse(a) * a == ExactMatrix::identity(a.rows()));
    }
}

TEST_CASE("Ryser permanent agrees with permutation sum", "[linalg]") {
    RandomInputs rnd(14);
    for (int trial = 0; trial < 30; ++trial) {
        ExactMatrix a = random_matrix(rnd, static_cast<std::size_t>(rnd.integer(1, 6)), trial % 3 == 0);
        CHECK(permanent(a) == oracle::perm_naive(a));
    }
}

TEST_CASE("permutation sign", "[linalg]") {
    std::vector<std::size_t> id{0, 1, 2}, swap{1, 0, 2}, cyc{1, 2, 0};
    CHECK(permutation_sign(id) == 1);
    CHECK(permutation_sign(swap) == -1);
    CHECK(permutation_sign(cyc) == 1);
}

TEST_CASE("model validation rejects malformed input", "[model]") {
    ExactMatrix j{{q("0"), q("1")}, {q("1"), q("0")}};
    CHECK_THROWS_AS(CouplingModel({q("0"), q("3")}, j), ModelError);
    ExactMatrix diag_j{{q("1"), q("1")}, {q("1"), q("0")}};
    CHECK_THROWS_AS(CouplingModel({q("3"), q("3")}, diag_j), ModelError);
    CHECK_THROWS_AS(CouplingModel({q("3")}, j), ModelError);
    CHECK_THROWS_AS(CouplingModel({q("3"), q("3")}, j, {q("1")}), ModelError);
}

TEST_CASE("fixture hypotheses and covariances", "[model]") {
    auto i2 = validate_model(fixtures::i2());
    REQUIRE(i2.rho_exact);
    CHECK(*i2.rho_exact == Rational(1, 3));
    CHECK(i2.markov_ok());
    auto i3 = validate_model(fixtures::i3());
    CHECK(*i3.rho_exact == Rational(2, 3));
    CHECK(i3.passed(hypothesis::hermitian));

    auto c2 = model_covariance<ExactComplex>(fixtures::i2());
    CHECK(c2(0, 0) == q("3/8"));
    CHECK(c2(0, 1) == q("1/8"));
    auto c3 = model_covariance<ExactComplex>(fixtures::i3());
    CHECK(c3(1, 1) == q("1/2"));
    CHECK(c3(0, 2) == q("1/4"));
    CHECK(model_covariance<ExactComplex>(fixtures::i1())(0, 0) == q("1/2"));

    auto f3 = model_covariance<FloatComplex>(fixtures::i3());
    CHECK(f3.residual() < 1e-14);
    CHECK(std::abs(f3(0, 1) - 0.25) < 1e-14);
}

TEST_CASE("covariance against the 2x2 adjugate", "[model]") {
    RandomInputs rnd(15);
    for (int trial = 0; trial < 20; ++trial) {
        CouplingModel m = rnd.dominant_model(2, trial % 2 == 1);
        CHECK(model_covariance<ExactComplex>(m).entries() == oracle::inverse_2x2(m.quadratic_matrix()));
    }
}

TEST_CASE("diagonal dominance implies positive Hermitian part for real symmetric J", "[model]") {
    RandomInputs rnd(16);
    for (int trial = 0; trial < 30; ++trial) {
        CouplingModel m = rnd.dominant_model(static_cast<std::size_t>(rnd.integer(1, 5)));
        auto r = validate_model(m);
        CHECK(r.passed(hypothesis::dominance));
        CHECK(r.rho < 1.0);
        // Dominance with positive diagonal gives a positive definite Hermitian part.
        CHECK(r.passed(hypothesis::hermitian));
    }
}

TEST_CASE("Hermitian certification", "[model]") {
    ExactMatrix pos{{q("2"), q("1")}, {q("1"), q("2")}};
    ExactMatrix neg{{q("1"), q("2")}, {q("2"), q("1")}};
    CHECK(hermitian_part_certification(pos) == Certification::yes);
    CHECK(hermitian_part_certification(neg) == Certification::no);
    CHECK(hermitian_part_certification(pos.cast<FloatComplex>()) == Certification::yes);
    CHECK(hermitian_part_certification(neg.cast<FloatComplex>()) == Certification::no);
    // Antisymmetric parts do not count.
    ExactMatrix skew{{q("1"), q("5")}, {q("-5"), q("1")}};
    CHECK(hermitian_part_certification(skew) == Certification::yes);
}

TEST_CASE("bad model reports unmet hypotheses without throwing", "[model]") {
    CouplingModel bad({q("1"), q("1")}, ExactMatrix{{q("0"), q("2")}, {q("2"), q("0")}});
    auto r = validate_model(bad);
    CHECK_FALSE(r.passed(hypothesis::dominance));
    CHECK_FALSE(r.walk_series_ok());
    CHECK_FALSE(r.passed(hypothesis::hermitian));
    CHECK(r.passed(hypothesis::zero_diagonal));
}

TEST_CASE("model files", "[model_io]") {
    const std::string text = R"({
  "size": 2,
  "diag": ["3", 3],
  "offdiag": [["0", "1/2"], [0.5, "0"]],
  "potential": [["1", "1/3"], "0"]
})";
    CouplingModel m = parse_model_text(text);
    CHECK(m.size() == 2);
    CHECK(m.offdiag()(1, 0) == q("1/2"));
    CHECK(m.potential()[0] == ExactComplex(Rational(1), Rational(1, 3)));
    CHECK_FALSE(m.is_real());

    CouplingModel back = parse_model(model_to_json(m));
    CHECK(back.quadratic_matrix() == m.quadratic_matrix());

    CHECK_THROWS_WITH(parse_model_text("{\"size\": 2,\n \"diag\": [1 2]}"), ContainsSubstring("line 2"));
    CHECK_THROWS_AS(parse_model_text(R"({"size": 1, "diag": ["x"], "offdiag": [["0"]]})"), ModelError);
    CHECK_THROWS_AS(parse_model_text(R"({"size": 1, "diag": ["1"]})"), ModelError);
    CHECK_THROWS_AS(parse_model_text(R"({"size": 1, "diag": ["1"], "offdiag": [["0"]], "arithmetic": "fast"})"), ModelError);
    CHECK(parse_model_text(R"({"size": 1, "diag": ["1"], "offdiag": [["0"]], "arithmetic": "float"})").arithmetic() ==
          Arithmetic::floating);
}

TEST_CASE("model transforms", "[model]") {
    CouplingModel i2 = fixtures::i2();
    CouplingModel shifted = i2.with_diagonal_shift(ExactComplex(1));
    CHECK(shifted.diag()[0] == ExactComplex(4));
    CouplingModel pot = i2.with_potential({q("1"), q("1")});
    CHECK(pot.quadratic_matrix() == shifted.quadratic_matrix());
    CHECK(pot.quadratic_matrix(false) == i2.quadratic_matrix());
    // The shifted covariance is the v = (1,1) target 1/15.
    CHECK(model_covariance<ExactComplex>(pot)(0, 1) == q("1/15"));
}
