#include "gsaw/polynomial.hpp"

#include <sstream>

namespace gsaw {

namespace {

void trim(Monomial& m) {
    while (!m.empty() && m.back() == 0) m.pop_back();
}

std::string variable_name(std::size_t var, VariableNames names) {
    if (names == VariableNames::local_times) return "t" + std::to_string(var + 1);
    return (var % 2 == 0 ? "phi" : "phibar") + std::to_string(var / 2 + 1);
}

}  // namespace

Monomial monomial_product(const Monomial& a, const Monomial& b) {
    Monomial m(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < a.size(); ++i) m[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) m[i] += b[i];
    return m;
}

std::size_t monomial_degree(const Monomial& m) {
    std::size_t d = 0;
    for (auto e : m) d += e;
    return d;
}

Polynomial::Polynomial(ExactComplex c) {
    if (!c.is_zero()) terms_.emplace(Monomial{}, std::move(c));
}

Polynomial Polynomial::variable(std::size_t var, unsigned power) {
    Monomial m(var + 1, 0);
    m[var] = static_cast<std::uint16_t>(power);
    trim(m);
    return term(std::move(m), ExactComplex(1));
}

Polynomial Polynomial::term(Monomial m, ExactComplex c) {
    Polynomial p;
    trim(m);
    p.add_term(m, c);
    return p;
}

ExactComplex Polynomial::constant_term() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? ExactComplex(0) : it->second;
}

std::size_t Polynomial::degree() const {
    std::size_t d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, monomial_degree(m));
    return d;
}

void Polynomial::add_term(const Monomial& m, const ExactComplex& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

Polynomial Polynomial::derivative(std::size_t var) const {
    Polynomial out;
    for (const auto& [m, c] : terms_) {
        if (var >= m.size() || m[var] == 0) continue;
        Monomial d = m;
        --d[var];
        trim(d);
        out.add_term(d, c * ExactComplex(static_cast<long>(m[var])));
    }
    return out;
}

Polynomial Polynomial::substitute_local_times() const {
    Polynomial out;
    for (const auto& [m, c] : terms_) {
        Monomial f(2 * m.size(), 0);
        for (std::size_t x = 0; x < m.size(); ++x) {
            f[phi_var(x)] = m[x];
            f[phibar_var(x)] = m[x];
        }
        trim(f);
        out.add_term(f, c);
    }
    return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

Polynomial& Polynomial::operator*=(const ExactComplex& c) {
    if (c.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, v] : terms_) v *= c;
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_) out.add_term(monomial_product(ma, mb), ca * cb);
    return out;
}

Polynomial Polynomial::pow(unsigned k) const {
    Polynomial out(1);
    for (unsigned i = 0; i < k; ++i) out = out * *this;
    return out;
}

std::string to_string(const Polynomial& p, VariableNames names) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : p.terms()) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c << ")";
        for (std::size_t v = 0; v < m.size(); ++v) {
            if (m[v] == 0) continue;
            os << "*" << variable_name(v, names);
            if (m[v] > 1) os << "^" << m[v];
        }
    }
    return os.str();
}

}  // namespace gsaw
