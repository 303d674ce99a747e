#ifndef GSAW_GAUSSIAN_HPP
#define GSAW_GAUSSIAN_HPP

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "gsaw/form.hpp"
#include "gsaw/linalg.hpp"
#include "gsaw/model.hpp"
#include "gsaw/walks.hpp"

namespace gsaw {

/// E[prod_l phibar_{x_l} prod_m phi_{y_m}] under the Gaussian measure with covariance C:
/// the permanent of [C_{x_l, y_m}]. Repeated sites are allowed. Zero when the lengths differ.
template <class T>
T boson_moment(const Matrix<T>& c, std::span<const Site> phibar_sites, std::span<const Site> phi_sites) {
    if (phibar_sites.size() != phi_sites.size()) return T(0);
    if (phibar_sites.empty()) return T(1);
    return permanent(c.select(phibar_sites, phi_sites));
}

/// Expectation of a sorted fermion word. The word is rearranged as
/// psibar_{i_1} psi_{j_1} ... psibar_{i_p} psi_{j_p} with both index lists increasing,
/// which integrates to det C_{i;j}.
template <class T>
T fermion_moment(const Matrix<T>& c, FermionWord w) {
    const auto is = w.psibar_sites();
    const auto js = w.psi_sites();
    if (is.size() != js.size()) return T(0);
    if (is.empty()) return T(1);
    const auto gens = w.generators();
    std::vector<std::size_t> target;
    target.reserve(gens.size());
    for (std::size_t k = 0; k < is.size(); ++k) {
        for (unsigned g : {psibar_gen(is[k]), psi_gen(js[k])})
            target.push_back(static_cast<std::size_t>(std::find(gens.begin(), gens.end(), g) - gens.begin()));
    }
    T d = determinant(c.select(is, js));
    return permutation_sign(target) > 0 ? d : T(0) - d;
}

/// Monomial expectation of a field polynomial, term by term.
template <class T>
T polynomial_expectation(const Matrix<T>& c, const Polynomial& p) {
    T sum(0);
    std::vector<Site> bars, plain;
    for (const auto& [mono, coef] : p.terms()) {
        bars.clear();
        plain.clear();
        for (std::size_t var = 0; var < mono.size(); ++var)
            for (unsigned k = 0; k < mono[var]; ++k) (var % 2 == 0 ? plain : bars).push_back(var / 2);
        if (bars.size() != plain.size()) continue;
        sum += scalar_cast<T>(coef) * boson_moment(c, bars, plain);
    }
    return sum;
}

/// int e^{-S_A} f, using the factorization into bosonic and fermionic moments.
template <class T>
T mixed_expectation(const Covariance<T>& c, const Form& f) {
    T sum(0);
    for (const auto& [w, p] : f.terms()) {
        T fer = fermion_moment(c.entries(), w);
        if (ScalarTraits<T>::exact && ScalarTraits<T>::is_zero(fer)) continue;
        sum += fer * polynomial_expectation(c.entries(), p);
    }
    return sum;
}

/// Independent evaluation of int e^{-S_A} f: expand the fermionic part of e^{-S_A},
/// keep the coefficient of the top word of e^{-S_A} ^ f, evaluate it by recursive
/// Wick pairing, and divide by the same coefficient for f = 1. Limited to M <= 6.
class MixedOracle {
public:
    explicit MixedOracle(const ExactMatrix& a);
    explicit MixedOracle(const CouplingModel& model) : MixedOracle(model.quadratic_matrix()) {}

    ExactComplex operator()(const Form& f) const;
    /// Top-word coefficient of the unit form, fixed once per model.
    const ExactComplex& calibration() const { return kappa_; }

    static constexpr std::size_t max_sites = 6;

private:
    ExactComplex top_expectation(const Form& f) const;

    std::size_t m_;
    ExactMatrix cov_;
    Form expansion_;
    ExactComplex kappa_;
};

ExactComplex mixed_expectation_oracle(const CouplingModel& model, const Form& f);

/// The unnormalized integral of exp(-S_A): the top-word coefficient of the fermionic
/// expansion, with Berezin sign (-1)^M, times the bosonic normalization 1/det A.
ExactComplex gaussian_normalization(const ExactMatrix& a);

/// Wick pairing sum for prod phibar_{x_l} prod phi_{y_m}, by recursion on the first phibar.
ExactComplex wick_pairing(const ExactMatrix& c, std::span<const Site> phibar_sites, std::span<const Site> phi_sites);

/// int e^{-S_A} F(tau) for a polynomial F in the local times.
template <class T>
T tau_expectation(const Covariance<T>& c, const Polynomial& f) {
    return mixed_expectation(c, form_of_tau_function(f, c.size()));
}

/// int e^{-S_A} F(tau) phibar_a phi_b.
template <class T>
T tau_weighted_two_point(const Covariance<T>& c, const Polynomial& f, Site a, Site b) {
    return mixed_expectation(c, form_of_tau_function(f, c.size()) * (Form::phibar(a) * Form::phi(b)));
}

/// Moment orders k_x of the local times for a walk from a to b.
struct MomentRequest {
    Site a = 0;
    Site b = 0;
    std::vector<unsigned> powers;

    unsigned total() const { return std::accumulate(powers.begin(), powers.end(), 0U); }
};

inline constexpr unsigned default_moment_cap = 6;

/// (d_b pi_{b,cemetery})^{-1} E_a[prod L_x^{k_x} 1_{X(zeta-)=b}] as the sum over all K!
/// orderings of the K labelled insertions of C_{a,x1} C_{x1,x2} ... C_{xK,b}.
template <class T>
T local_time_moment_oracle(const Matrix<T>& c, const MomentRequest& req, unsigned cap = default_moment_cap) {
    if (req.total() > cap)
        throw PreconditionError("moment order " + std::to_string(req.total()) + " exceeds cap " + std::to_string(cap));
    if (req.powers.size() > c.rows()) throw PreconditionError("moment request has more sites than the model");
    std::vector<Site> labels;
    for (Site x = 0; x < req.powers.size(); ++x) labels.insert(labels.end(), req.powers[x], x);
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    T sum(0);
    do {
        Site prev = req.a;
        T term(1);
        for (std::size_t i : order) {
            term *= c(prev, labels[i]);
            prev = labels[i];
        }
        sum += term * c(prev, req.b);
    } while (std::next_permutation(order.begin(), order.end()));
    return sum;
}

/// Both sides of the generalized Cramer rule for C = A^{-1}:
/// lhs = det C_{i;j}, rhs = eps(i) eps(j) det(A without rows j and columns i) / det A.
struct CramerSides {
    ExactComplex lhs;
    ExactComplex rhs;
};

CramerSides generalized_cramer_check(const ExactMatrix& a, std::span<const Site> rows, std::span<const Site> cols);

/// Sign of the permutation that moves the listed indices to the front, in the listed
/// order, followed by the remaining indices of 0..n-1 in increasing order.
int front_permutation_sign(std::span<const Site> idx, std::size_t n);

/// One permutation sigma of a nonempty set Y, with the weight W_c of each cycle and the
/// sum over all boson/fermion assignments of its cycles (cycle weight +W_c or -W_c).
struct LoopLedgerEntry {
    SiteSet support;
    LoopConfig cycles;
    std::vector<ExactComplex> cycle_weights;
    ExactComplex boson_total;
    ExactComplex fermion_total;
    ExactComplex assignment_sum;
};

struct LoopLedger {
    std::vector<LoopLedgerEntry> entries;
    /// sum over disjoint X1, X2 in X of E[prod_{X1} phi phibar] int e^{-S} prod_{X2} psi psibar.
    ExactComplex expansion_total;
};

LoopLedger loop_cancellation_ledger(const Covariance<ExactComplex>& c, SiteSet x);

/// int e^{-S_A} phibar_a phi_b prod_{x != a,b} (1 + tau_x).
template <class T>
T saw_integral(const Covariance<T>& c, Site a, Site b) {
    Form f = Form::phibar(a) * Form::phi(b);
    for (Site x = 0; x < c.size(); ++x)
        if (x != a && x != b) f = f * (Form(1) + tau(x));
    return mixed_expectation(c, f);
}

/// E[phibar_a phi_b prod_{x != a,b} (1 + phi_x phibar_x)], or with the Wick-ordered
/// factors 1 + phi_x phibar_x - C_xx.
template <class T>
T loop_integral(const Covariance<T>& c, Site a, Site b, bool wick_ordered) {
    Polynomial p = Polynomial::variable(phibar_var(a)) * Polynomial::variable(phi_var(b));
    for (Site x = 0; x < c.size(); ++x) {
        if (x == a || x == b) continue;
        p = p * (Polynomial(1) + Polynomial::variable(phi_var(x)) * Polynomial::variable(phibar_var(x)));
    }
    if (!wick_ordered) return polynomial_expectation(c.entries(), p);
    // :phi phibar: = phi phibar - C_xx changes only the constant of each factor.
    T sum(0);
    std::vector<Site> rest;
    for (Site x = 0; x < c.size(); ++x)
        if (x != a && x != b) rest.push_back(x);
    for (std::uint32_t s = 0; s < (std::uint32_t{1} << rest.size()); ++s) {
        std::vector<Site> bars{a}, plain{b};
        T shift(1);
        for (std::size_t k = 0; k < rest.size(); ++k) {
            if ((s >> k) & 1U) {
                bars.push_back(rest[k]);
                plain.push_back(rest[k]);
            } else {
                shift *= T(1) - c(rest[k], rest[k]);
            }
        }
        sum += shift * boson_moment(c.entries(), bars, plain);
    }
    return sum;
}

/// Taylor coefficients in g of the weakly self-avoiding two-point function at g = 0,
/// computed two ways on the model with diagonal shifted by lambda.
struct WsawTaylor {
    std::vector<ExactComplex> local_time_side;
    std::vector<ExactComplex> grassmann_side;
};

inline constexpr unsigned max_taylor_order = 3;

WsawTaylor wsaw_g_taylor(const CouplingModel& model, Site a, Site b, const ExactComplex& lambda, unsigned order);

extern template ExactComplex mixed_expectation(const Covariance<ExactComplex>&, const Form&);
extern template FloatComplex mixed_expectation(const Covariance<FloatComplex>&, const Form&);

}  // namespace gsaw

#endif
