#ifndef GSAW_MODEL_HPP
#define GSAW_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "gsaw/linalg.hpp"
#include "gsaw/matrix.hpp"
#include "gsaw/scalar.hpp"

namespace gsaw {

enum class Arithmetic { exact, floating };

class ModelError : public Error {
public:
    using Error::Error;
};

/// Site set {0,...,M-1} with diagonal D, zero-diagonal hopping matrix J and diagonal
/// potential V. Entries are stored exactly; the arithmetic mode selects which scalar
/// the evaluators use.
class CouplingModel {
public:
    /// Throws ModelError if J has a nonzero diagonal entry, some d_x is zero, or the
    /// shapes disagree. An empty potential means V = 0.
    CouplingModel(std::vector<ExactComplex> diag, ExactMatrix offdiag, std::vector<ExactComplex> potential = {},
                  Arithmetic arithmetic = Arithmetic::exact);

    std::size_t size() const { return diag_.size(); }
    const std::vector<ExactComplex>& diag() const { return diag_; }
    const ExactMatrix& offdiag() const { return offdiag_; }
    const std::vector<ExactComplex>& potential() const { return potential_; }
    Arithmetic arithmetic() const { return arithmetic_; }

    /// True when every entry of D, J and V has zero imaginary part.
    bool is_real() const;
    bool has_potential() const;

    /// D + V - J (or D - J when include_potential is false).
    ExactMatrix quadratic_matrix(bool include_potential = true) const;

    /// Copy with V replaced.
    CouplingModel with_potential(std::vector<ExactComplex> potential) const;
    /// Copy with every d_x shifted by `shift` (V dropped).
    CouplingModel with_diagonal_shift(const ExactComplex& shift) const;
    CouplingModel with_arithmetic(Arithmetic arithmetic) const;

private:
    std::vector<ExactComplex> diag_;
    ExactMatrix offdiag_;
    std::vector<ExactComplex> potential_;
    Arithmetic arithmetic_;
};

enum class Certification { yes, no, indeterminate };
std::string to_string(Certification c);

/// Positivity of the Hermitian part (A + A^dagger)/2. Exact scalars: sign of the
/// leading principal minors from one fraction-free pass. Floating scalars: an LDL^dagger
/// factorization; a pivot within 1e-12 of zero makes the answer indeterminate.
template <class T>
Certification hermitian_part_certification(const Matrix<T>& a);

/// max_x sum_{y != x} |A_xy / A_xx|; infinity if some A_xx vanishes.
template <class T>
double dominance_ratio(const Matrix<T>& a);

/// The quadratic form A of the action, with cached hypothesis checks.
template <class T>
class QuadraticForm {
public:
    explicit QuadraticForm(Matrix<T> entries);

    const Matrix<T>& entries() const { return entries_; }
    std::size_t size() const { return entries_.rows(); }
    Certification hermitian_positive() const { return hermitian_; }
    double dominance() const { return rho_; }
    bool diagonally_dominant() const { return rho_ < 1.0; }

private:
    Matrix<T> entries_;
    Certification hermitian_;
    double rho_;
};

/// C = A^{-1} together with its generating form.
template <class T>
class Covariance {
public:
    Covariance(QuadraticForm<T> form, Matrix<T> entries, double residual)
        : form_(std::move(form)), entries_(std::move(entries)), residual_(residual) {}

    const Matrix<T>& entries() const { return entries_; }
    const QuadraticForm<T>& form() const { return form_; }
    const T& operator()(Site x, Site y) const { return entries_(x, y); }
    std::size_t size() const { return entries_.rows(); }
    /// max |(A C - I)_xy|; exactly zero for exact scalars.
    double residual() const { return residual_; }

private:
    QuadraticForm<T> form_;
    Matrix<T> entries_;
    double residual_;
};

/// Throws SingularMatrixError when A is singular (exact zero pivot).
template <class T>
Covariance<T> covariance(const QuadraticForm<T>& form);

template <class T>
QuadraticForm<T> quadratic_form(const CouplingModel& model, bool include_potential = true) {
    return QuadraticForm<T>(model.quadratic_matrix(include_potential).template cast<T>());
}

/// Covariance of D + V - J for the model, in the scalar T.
template <class T>
Covariance<T> model_covariance(const CouplingModel& model, bool include_potential = true) {
    return covariance(quadratic_form<T>(model, include_potential));
}

bool hermitian_part_positive(const QuadraticForm<ExactComplex>& form);

enum class Verdict { pass, fail, indeterminate };
std::string to_string(Verdict v);

struct HypothesisCheck {
    std::string name;
    Verdict verdict;
    std::string detail;
};

/// Per-hypothesis pass/fail for the model. Never throws on a failed hypothesis.
struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    /// max_x sum_y |J_xy / d_x|.
    double rho = 0.0;
    /// rho as an exact rational when D and J are real.
    std::optional<Rational> rho_exact;

    const HypothesisCheck& at(const std::string& name) const;
    bool passed(const std::string& name) const { return at(name).verdict == Verdict::pass; }
    /// Diagonal dominance, nonzero d_x and zero diagonal of J.
    bool walk_series_ok() const;
    /// Walk series hypotheses plus d_x > 0 and J_xy >= 0.
    bool markov_ok() const;
};

namespace hypothesis {
inline constexpr const char* zero_diagonal = "zero_diagonal_J";
inline constexpr const char* nonzero_diagonal = "nonzero_diagonal_D";
inline constexpr const char* dominance = "diagonal_dominance";
inline constexpr const char* hermitian = "positive_hermitian_part";
inline constexpr const char* markov = "markov_positivity";
}  // namespace hypothesis

ValidationReport validate_model(const CouplingModel& model);

/// Canonical fixtures shared by the test suite.
namespace fixtures {
/// M = 1, d = 2, J = 0.
CouplingModel i1();
/// M = 2, D = diag(3, 3), J_12 = J_21 = 1.
CouplingModel i2();
/// M = 3, D = 3 Id, J_xy = 1 for x != y.
CouplingModel i3();
}  // namespace fixtures

extern template class QuadraticForm<ExactComplex>;
extern template class QuadraticForm<FloatComplex>;
extern template Covariance<ExactComplex> covariance(const QuadraticForm<ExactComplex>&);
extern template Covariance<FloatComplex> covariance(const QuadraticForm<FloatComplex>&);
extern template Certification hermitian_part_certification(const Matrix<ExactComplex>&);
extern template Certification hermitian_part_certification(const Matrix<FloatComplex>&);
extern template double dominance_ratio(const Matrix<ExactComplex>&);
extern template double dominance_ratio(const Matrix<FloatComplex>&);

}  // namespace gsaw

#endif
