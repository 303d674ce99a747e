#include "gsaw/form.hpp"

#include <sstream>

namespace gsaw {

FermionWord FermionWord::of(std::initializer_list<unsigned> gens) {
    FermionWord w;
    for (unsigned g : gens) w.mask |= std::uint32_t{1} << g;
    return w;
}

FermionWord FermionWord::pairs(std::span<const Site> sites) {
    FermionWord w;
    for (Site x : sites) w.mask |= (std::uint32_t{1} << psi_gen(x)) | (std::uint32_t{1} << psibar_gen(x));
    return w;
}

FermionWord FermionWord::top(std::size_t m) {
    return FermionWord{m >= 16 ? ~std::uint32_t{0} : (std::uint32_t{1} << (2 * m)) - 1};
}

std::vector<unsigned> FermionWord::generators() const {
    std::vector<unsigned> out;
    for (std::uint32_t m = mask; m != 0; m &= m - 1) out.push_back(static_cast<unsigned>(std::countr_zero(m)));
    return out;
}

std::vector<Site> FermionWord::psi_sites() const {
    std::vector<Site> out;
    for (unsigned g : generators())
        if (g % 2 == 0) out.push_back(g / 2);
    return out;
}

std::vector<Site> FermionWord::psibar_sites() const {
    std::vector<Site> out;
    for (unsigned g : generators())
        if (g % 2 == 1) out.push_back(g / 2);
    return out;
}

int wedge_sign(FermionWord a, FermionWord b) {
    if (a.mask & b.mask) return 0;
    // Moving each generator of b left past the larger generators of a.
    unsigned swaps = 0;
    for (std::uint32_t m = b.mask; m != 0; m &= m - 1) {
        unsigned g = static_cast<unsigned>(std::countr_zero(m));
        std::uint32_t above = g >= 31 ? 0 : (a.mask >> (g + 1));
        swaps += static_cast<unsigned>(std::popcount(above));
    }
    return swaps % 2 == 0 ? 1 : -1;
}

Form::Form(Polynomial p) {
    if (!p.is_zero()) terms_.emplace(FermionWord{}, std::move(p));
}

Form::Form(FermionWord w, Polynomial coefficient) {
    if (!coefficient.is_zero()) terms_.emplace(w, std::move(coefficient));
}

Polynomial Form::coefficient(FermionWord w) const {
    auto it = terms_.find(w);
    return it == terms_.end() ? Polynomial() : it->second;
}

bool Form::is_even() const {
    for (const auto& [w, p] : terms_)
        if (w.degree() % 2 != 0) return false;
    return true;
}

Form Form::degree_part(std::size_t p) const {
    Form out;
    for (const auto& [w, c] : terms_)
        if (w.degree() == p) out.terms_.emplace(w, c);
    return out;
}

void Form::add_term(FermionWord w, const Polynomial& p) {
    if (p.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(w, p);
    if (!inserted) {
        it->second += p;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

Form& Form::operator+=(const Form& o) {
    for (const auto& [w, p] : o.terms_) add_term(w, p);
    return *this;
}

Form& Form::operator-=(const Form& o) {
    for (const auto& [w, p] : o.terms_) add_term(w, -p);
    return *this;
}

Form& Form::operator*=(const ExactComplex& c) {
    if (c.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto& [w, p] : terms_) p *= c;
    return *this;
}

Form operator*(const Form& a, const Form& b) {
    Form out;
    for (const auto& [wa, pa] : a.terms_)
        for (const auto& [wb, pb] : b.terms_) {
            int s = wedge_sign(wa, wb);
            if (s == 0) continue;
            Polynomial p = pa * pb;
            if (s < 0) p = -p;
            out.add_term(FermionWord{wa.mask | wb.mask}, p);
        }
    return out;
}

Form Form::pow(unsigned k) const {
    Form out(1);
    for (unsigned i = 0; i < k; ++i) out = out * *this;
    return out;
}

Form wedge_product(const Form& f, const Form& g) { return f * g; }

std::string to_string(const Form& f) {
    if (f.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [w, p] : f.terms()) {
        if (!first) os << " + ";
        first = false;
        os << "[" << to_string(p) << "]";
        for (unsigned g : w.generators()) os << " " << (g % 2 == 0 ? "psi" : "psibar") << (g / 2 + 1);
    }
    return os.str();
}

Form tau(Site x) { return Form::phi(x) * Form::phibar(x) + Form::psi(x) * Form::psibar(x); }

Form fermionic_action(const ExactMatrix& a) {
    Form s;
    for (std::size_t x = 0; x < a.rows(); ++x)
        for (std::size_t y = 0; y < a.cols(); ++y)
            if (!a(x, y).is_zero()) s += Form::psi(x) * Form::psibar(y) * a(x, y);
    return s;
}

Form action_form(const ExactMatrix& a) {
    Form s = fermionic_action(a);
    for (std::size_t x = 0; x < a.rows(); ++x)
        for (std::size_t y = 0; y < a.cols(); ++y)
            if (!a(x, y).is_zero()) s += Form::phi(x) * Form::phibar(y) * a(x, y);
    return s;
}

Form invariant_v(Site x, Site y) { return Form::phi(x) * Form::psibar(y); }

Form action_potential(const ExactMatrix& a) {
    Form v;
    for (std::size_t x = 0; x < a.rows(); ++x)
        for (std::size_t y = 0; y < a.cols(); ++y)
            if (!a(x, y).is_zero()) v += invariant_v(x, y) * a(x, y);
    return v;
}

Form exterior_derivative(const Form& f) {
    // d(p w) = dp ^ w since every generator is closed.
    Form out;
    for (const auto& [w, p] : f.terms()) {
        for (const auto& [mono, c] : p.terms()) {
            for (std::size_t var = 0; var < mono.size(); ++var) {
                if (mono[var] == 0) continue;
                unsigned g = static_cast<unsigned>(var);  // d phi_x = psi_x, d phibar_x = psibar_x
                FermionWord dg{std::uint32_t{1} << g};
                int s = wedge_sign(dg, w);
                if (s == 0) continue;
                Monomial reduced = mono;
                --reduced[var];
                ExactComplex coef = c * ExactComplex(static_cast<long>(mono[var]) * s);
                out.add_term(FermionWord{dg.mask | w.mask}, Polynomial::term(reduced, coef));
            }
        }
    }
    return out;
}

Form interior_product(const Form& f) {
    Form out;
    for (const auto& [w, p] : f.terms()) {
        auto gens = w.generators();
        for (std::size_t i = 0; i < gens.size(); ++i) {
            unsigned g = gens[i];
            Site x = g / 2;
            // iota psi_x = -phi_x, iota psibar_x = +phibar_x
            Polynomial contracted = g % 2 == 0 ? -Polynomial::variable(phi_var(x)) : Polynomial::variable(phibar_var(x));
            if (i % 2 == 1) contracted = -contracted;
            out.add_term(FermionWord{w.mask & ~(std::uint32_t{1} << g)}, contracted * p);
        }
    }
    return out;
}

Form supersymmetry_Q(const Form& f) { return exterior_derivative(f) + interior_product(f); }

Form lie_derivative(const Form& f) {
    Form out;
    for (const auto& [w, p] : f.terms()) {
        long fermion_charge = 0;
        for (unsigned g : w.generators()) fermion_charge += g % 2 == 0 ? -1 : 1;
        Polynomial q;
        for (const auto& [mono, c] : p.terms()) {
            long charge = fermion_charge;
            for (std::size_t var = 0; var < mono.size(); ++var) charge += (var % 2 == 0 ? -1L : 1L) * mono[var];
            q.add_term(mono, c * ExactComplex(charge));
        }
        out.add_term(w, q);
    }
    return out;
}

Form partial_phi(const Form& f, Site x) {
    Form out;
    for (const auto& [w, p] : f.terms()) out.add_term(w, p.derivative(phi_var(x)));
    return out;
}

Form partial_phibar(const Form& f, Site x) {
    Form out;
    for (const auto& [w, p] : f.terms()) out.add_term(w, p.derivative(phibar_var(x)));
    return out;
}

Form form_of_tau_function(const Polynomial& f, std::size_t m) {
    Form out;
    std::vector<Site> sites;
    for (std::uint32_t subset = 0; subset < (std::uint32_t{1} << m); ++subset) {
        Polynomial g = f;
        sites.clear();
        for (Site x = 0; x < m && !g.is_zero(); ++x)
            if ((subset >> x) & 1U) {
                g = g.derivative(x);
                sites.push_back(x);
            }
        if (g.is_zero()) continue;
        // prod_x psi_x psibar_x over increasing x is already in generator order.
        out.add_term(FermionWord::pairs(sites), g.substitute_local_times());
    }
    return out;
}

Form compose(const Polynomial& f, std::span<const Form> k) {
    Form out;
    for (const auto& [mono, c] : f.terms()) {
        Form term(c);
        for (std::size_t i = 0; i < mono.size(); ++i) {
            if (mono[i] == 0) continue;
            if (i >= k.size()) throw PreconditionError("compose: polynomial uses more variables than forms given");
            term = term * k[i].pow(mono[i]);
        }
        out += term;
    }
    return out;
}

Form ActionExpansion::total() const {
    Form t;
    for (const auto& l : layers) t += l;
    return t;
}

ActionExpansion exp_action_expansion(const ExactMatrix& a) {
    const std::size_t m = a.rows();
    ActionExpansion e{a, {}};
    const Form s = fermionic_action(a);
    Form power(1);
    Rational factorial(1);
    for (std::size_t n = 0; n <= m; ++n) {
        if (n > 0) {
            power = power * s;
            factorial *= static_cast<long>(n);
        }
        Rational c = Rational(1) / factorial;
        if (n % 2 == 1) c = -c;
        e.layers.push_back(power * ExactComplex(c));
    }
    return e;
}

}  // namespace gsaw
