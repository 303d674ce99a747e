#ifndef GSAW_SAMPLING_HPP
#define GSAW_SAMPLING_HPP

#include <random>

#include "gsaw/form.hpp"
#include "gsaw/model.hpp"

namespace gsaw {

/// Seeded generators of random exact inputs.
class RandomInputs {
public:
    explicit RandomInputs(std::uint64_t seed) : eng_(seed) {}

    std::mt19937_64& engine() { return eng_; }
    long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(eng_); }
    /// p/q with |p| <= num, 1 <= q <= den.
    Rational rational(long num, long den);
    ExactComplex scalar(bool complex);

    /// Diagonally dominant model of size m: J_xy >= 0 (real case) with row sums below d_x.
    CouplingModel dominant_model(std::size_t m, bool complex = false);
    /// Polynomial in the local times t_1..t_m.
    Polynomial tau_polynomial(std::size_t m, unsigned max_degree, unsigned max_terms);
    /// Polynomial in phi, phibar over m sites.
    Polynomial field_polynomial(std::size_t m, unsigned max_degree, unsigned max_terms);
    /// Form with up to max_terms words of degree <= max_word_degree.
    Form form(std::size_t m, unsigned max_word_degree, unsigned max_coeff_degree, unsigned max_terms);

private:
    std::mt19937_64 eng_;
};

}  // namespace gsaw

#endif
