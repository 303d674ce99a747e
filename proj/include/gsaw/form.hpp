#ifndef GSAW_FORM_HPP
#define GSAW_FORM_HPP

#include <bit>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gsaw/polynomial.hpp"

namespace gsaw {

/// Anticommuting generators in the global order psi_1 < psibar_1 < psi_2 < ...
/// psi_x is generator 2x and psibar_x is generator 2x+1.
constexpr unsigned psi_gen(Site x) { return static_cast<unsigned>(2 * x); }
constexpr unsigned psibar_gen(Site x) { return static_cast<unsigned>(2 * x + 1); }

/// A product of distinct generators, written in increasing generator order.
struct FermionWord {
    std::uint32_t mask = 0;

    static FermionWord of(std::initializer_list<unsigned> gens);
    /// psi_x psibar_x for every x in the list, which is already in sorted order.
    static FermionWord pairs(std::span<const Site> sites);
    /// psi_1 psibar_1 ... psi_M psibar_M.
    static FermionWord top(std::size_t m);

    std::size_t degree() const { return static_cast<std::size_t>(std::popcount(mask)); }
    bool contains(unsigned g) const { return (mask >> g) & 1U; }
    std::vector<unsigned> generators() const;
    /// Sites carrying psi (resp. psibar), in increasing order.
    std::vector<Site> psi_sites() const;
    std::vector<Site> psibar_sites() const;
    bool balanced() const { return psi_sites().size() == psibar_sites().size(); }

    friend auto operator<=>(const FermionWord&, const FermionWord&) = default;
};

/// Sign of a ^ b relative to the sorted word a | b; zero if they share a generator.
int wedge_sign(FermionWord a, FermionWord b);

/// Element of the exterior algebra over {psi_x, psibar_x} with polynomial
/// coefficients in {phi_x, phibar_x}.
class Form {
public:
    Form() = default;
    Form(Polynomial p);  // NOLINT(google-explicit-constructor)
    Form(ExactComplex c) : Form(Polynomial(std::move(c))) {}  // NOLINT(google-explicit-constructor)
    Form(long c) : Form(Polynomial(c)) {}  // NOLINT(google-explicit-constructor)
    Form(FermionWord w, Polynomial coefficient);

    static Form phi(Site x) { return Polynomial::variable(phi_var(x)); }
    static Form phibar(Site x) { return Polynomial::variable(phibar_var(x)); }
    static Form psi(Site x) { return Form(FermionWord::of({psi_gen(x)}), Polynomial(1)); }
    static Form psibar(Site x) { return Form(FermionWord::of({psibar_gen(x)}), Polynomial(1)); }

    const std::map<FermionWord, Polynomial>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    /// Coefficient of a word (zero polynomial when absent).
    Polynomial coefficient(FermionWord w) const;
    /// True when every word has even degree.
    bool is_even() const;
    /// Part of degree exactly p.
    Form degree_part(std::size_t p) const;
    /// Degree-zero part as a polynomial.
    Polynomial zero_form() const { return coefficient(FermionWord{}); }

    void add_term(FermionWord w, const Polynomial& p);

    Form& operator+=(const Form& o);
    Form& operator-=(const Form& o);
    Form& operator*=(const ExactComplex& c);
    friend Form operator+(Form a, const Form& b) { return a += b; }
    friend Form operator-(Form a, const Form& b) { return a -= b; }
    friend Form operator*(Form a, const ExactComplex& c) { return a *= c; }
    Form operator-() const { return *this * ExactComplex(-1); }
    friend bool operator==(const Form&, const Form&) = default;

    /// Wedge product; polynomial coefficients multiply commutatively.
    friend Form operator*(const Form& a, const Form& b);
    Form pow(unsigned k) const;

private:
    std::map<FermionWord, Polynomial> terms_;
};

Form wedge_product(const Form& f, const Form& g);

/// Canonical text: words in generator order, monomials in exponent order, e.g.
/// "(1)*phi1 psi1 psibar1 + (-2)".
std::string to_string(const Form& f);

/// tau_x = phi_x phibar_x + psi_x psibar_x.
Form tau(Site x);
/// S_A = phi A phibar + psi A psibar.
Form action_form(const ExactMatrix& a);
/// psi A psibar.
Form fermionic_action(const ExactMatrix& a);
/// The invariant one-form v_{x,y} = phi_x psibar_y (normalized so that Q v_{x,x} = tau_x).
Form invariant_v(Site x, Site y);
/// sum_{x,y} A_xy v_{x,y}, whose Q-image is S_A.
Form action_potential(const ExactMatrix& a);

/// d: antiderivation of degree +1 with d phi_x = psi_x, d phibar_x = psibar_x and d psi = 0.
Form exterior_derivative(const Form& f);
/// Contraction with the rotation field: iota psi_x = -phi_x, iota psibar_x = phibar_x.
Form interior_product(const Form& f);
/// Q = d + iota.
Form supersymmetry_Q(const Form& f);
/// Lie derivative of the rotation flow: phi_x, psi_x carry charge -1, phibar_x, psibar_x carry +1.
Form lie_derivative(const Form& f);
/// Partial derivative with respect to phi_x (resp. phibar_x) acting on the coefficients.
Form partial_phi(const Form& f, Site x);
Form partial_phibar(const Form& f, Site x);

/// F(tau) for a polynomial F(t_1, ..., t_M): the nilpotent Taylor expansion about
/// t_x = phi_x phibar_x, sum over alpha in {0,1}^M of F^(alpha)(phi phibar) prod (psi_x psibar_x)^alpha_x.
Form form_of_tau_function(const Polynomial& f, std::size_t m);

/// F(K) for a polynomial F and a family of even forms K_i, by substituting the K_i
/// into F with the wedge product (well defined because even forms commute).
Form compose(const Polynomial& f, std::span<const Form> k);

/// Finite fermionic expansion of exp(-S_A): layers[n] = (-1)^n / n! (psi A psibar)^n,
/// n = 0..M. The bosonic factor exp(-phi A phibar) is kept as the tag `bosonic_matrix`.
struct ActionExpansion {
    ExactMatrix bosonic_matrix;
    std::vector<Form> layers;

    Form total() const;
};

ActionExpansion exp_action_expansion(const ExactMatrix& a);

}  // namespace gsaw

#endif
