#include "gsaw/sampling.hpp"

namespace gsaw {

Rational RandomInputs::rational(long num, long den) {
    Rational q(integer(-num, num), integer(1, den));
    q.canonicalize();
    return q;
}

ExactComplex RandomInputs::scalar(bool complex) {
    return complex ? ExactComplex(rational(5, 4), rational(5, 4)) : ExactComplex(rational(5, 4));
}

CouplingModel RandomInputs::dominant_model(std::size_t m, bool complex) {
    std::vector<ExactComplex> diag(m);
    ExactMatrix j(m, m);
    for (Site x = 0; x < m; ++x) {
        Rational row(0);
        for (Site y = 0; y < m; ++y) {
            if (x == y) continue;
            if (integer(0, 4) == 0) continue;
            Rational re(integer(0, 6), integer(1, 4));
            re.canonicalize();
            Rational im = complex ? rational(3, 4) : Rational(0);
            j(x, y) = ExactComplex(re, im);
            row += abs(re) + abs(im);  // |z| <= |re| + |im|
        }
        // d_x exceeds the row sum by a random positive margin.
        Rational margin(integer(1, 8), integer(1, 4));
        margin.canonicalize();
        diag[x] = ExactComplex(row + margin);
    }
    return CouplingModel(std::move(diag), std::move(j));
}

Polynomial RandomInputs::tau_polynomial(std::size_t m, unsigned max_degree, unsigned max_terms) {
    Polynomial p;
    unsigned terms = static_cast<unsigned>(integer(1, max_terms));
    for (unsigned t = 0; t < terms; ++t) {
        Monomial mono(m, 0);
        unsigned deg = static_cast<unsigned>(integer(0, max_degree));
        for (unsigned k = 0; k < deg; ++k) ++mono[static_cast<std::size_t>(integer(0, static_cast<long>(m) - 1))];
        p += Polynomial::term(mono, ExactComplex(rational(6, 3)));
    }
    return p;
}

Polynomial RandomInputs::field_polynomial(std::size_t m, unsigned max_degree, unsigned max_terms) {
    Polynomial p;
    unsigned terms = static_cast<unsigned>(integer(1, max_terms));
    for (unsigned t = 0; t < terms; ++t) {
        Monomial mono(2 * m, 0);
        unsigned deg = static_cast<unsigned>(integer(0, max_degree));
        for (unsigned k = 0; k < deg; ++k) ++mono[static_cast<std::size_t>(integer(0, 2 * static_cast<long>(m) - 1))];
        p += Polynomial::term(mono, ExactComplex(rational(6, 3)));
    }
    return p;
}

Form RandomInputs::form(std::size_t m, unsigned max_word_degree, unsigned max_coeff_degree, unsigned max_terms) {
    Form f;
    unsigned terms = static_cast<unsigned>(integer(1, max_terms));
    const long gens = 2 * static_cast<long>(m);
    for (unsigned t = 0; t < terms; ++t) {
        FermionWord w;
        unsigned deg = static_cast<unsigned>(integer(0, std::min<long>(max_word_degree, gens)));
        while (w.degree() < deg) w.mask |= std::uint32_t{1} << integer(0, gens - 1);
        f.add_term(w, field_polynomial(m, max_coeff_degree, 2));
    }
    return f;
}

}  // namespace gsaw
