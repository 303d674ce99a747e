#ifndef GSAW_POLYNOMIAL_HPP
#define GSAW_POLYNOMIAL_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gsaw/matrix.hpp"
#include "gsaw/scalar.hpp"

namespace gsaw {

/// Exponent vector over commuting variables, trailing zeros trimmed so that each
/// monomial has exactly one representation.
using Monomial = std::vector<std::uint16_t>;

Monomial monomial_product(const Monomial& a, const Monomial& b);
std::size_t monomial_degree(const Monomial& m);

/// Commuting variable layout for field polynomials: phi_x is 2x, phibar_x is 2x+1.
/// Polynomials in the local times t_x simply use variable x.
constexpr std::size_t phi_var(Site x) { return 2 * x; }
constexpr std::size_t phibar_var(Site x) { return 2 * x + 1; }

enum class VariableNames { fields, local_times };

/// Sparse polynomial with exact complex coefficients. No stored zero coefficients.
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(ExactComplex c);  // NOLINT(google-explicit-constructor)
    Polynomial(long c) : Polynomial(ExactComplex(c)) {}  // NOLINT(google-explicit-constructor)

    static Polynomial variable(std::size_t var, unsigned power = 1);
    static Polynomial term(Monomial m, ExactComplex c);

    const std::map<Monomial, ExactComplex>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    ExactComplex constant_term() const;
    std::size_t degree() const;

    void add_term(const Monomial& m, const ExactComplex& c);
    Polynomial derivative(std::size_t var) const;
    /// Replaces every t_x by phi_x phibar_x.
    Polynomial substitute_local_times() const;

    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    Polynomial& operator*=(const ExactComplex& c);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, const ExactComplex& c) { return a *= c; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    Polynomial operator-() const { return *this * ExactComplex(-1); }
    friend bool operator==(const Polynomial&, const Polynomial&) = default;

    Polynomial pow(unsigned k) const;

private:
    std::map<Monomial, ExactComplex> terms_;
};

std::string to_string(const Polynomial& p, VariableNames names = VariableNames::fields);

}  // namespace gsaw

#endif
