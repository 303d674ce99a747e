#include "gsaw/model.hpp"

#include <limits>
#include <sstream>

namespace gsaw {

CouplingModel::CouplingModel(std::vector<ExactComplex> diag, ExactMatrix offdiag, std::vector<ExactComplex> potential,
                             Arithmetic arithmetic)
    : diag_(std::move(diag)), offdiag_(std::move(offdiag)), potential_(std::move(potential)), arithmetic_(arithmetic) {
    const std::size_t m = diag_.size();
    if (m == 0) throw ModelError("model must have at least one site");
    if (offdiag_.rows() != m || offdiag_.cols() != m)
        throw ModelError("offdiag must be " + std::to_string(m) + "x" + std::to_string(m));
    if (potential_.empty()) potential_.assign(m, ExactComplex(0));
    if (potential_.size() != m) throw ModelError("potential must have " + std::to_string(m) + " entries");
    for (std::size_t x = 0; x < m; ++x) {
        if (diag_[x].is_zero()) throw ModelError("d_" + std::to_string(x + 1) + " must be nonzero");
        if (!offdiag_(x, x).is_zero()) throw ModelError("J must have zero diagonal (site " + std::to_string(x + 1) + ")");
    }
}

bool CouplingModel::is_real() const {
    for (std::size_t x = 0; x < size(); ++x) {
        if (!diag_[x].is_real() || !potential_[x].is_real()) return false;
        for (std::size_t y = 0; y < size(); ++y)
            if (!offdiag_(x, y).is_real()) return false;
    }
    return true;
}

bool CouplingModel::has_potential() const {
    for (const auto& v : potential_)
        if (!v.is_zero()) return true;
    return false;
}

ExactMatrix CouplingModel::quadratic_matrix(bool include_potential) const {
    const std::size_t m = size();
    ExactMatrix a(m, m);
    for (std::size_t x = 0; x < m; ++x)
        for (std::size_t y = 0; y < m; ++y) a(x, y) = -offdiag_(x, y);
    for (std::size_t x = 0; x < m; ++x) {
        a(x, x) = diag_[x];
        if (include_potential) a(x, x) += potential_[x];
    }
    return a;
}

CouplingModel CouplingModel::with_potential(std::vector<ExactComplex> potential) const {
    return CouplingModel(diag_, offdiag_, std::move(potential), arithmetic_);
}

CouplingModel CouplingModel::with_diagonal_shift(const ExactComplex& shift) const {
    std::vector<ExactComplex> d = diag_;
    for (auto& v : d) v += shift;
    return CouplingModel(std::move(d), offdiag_, {}, arithmetic_);
}

CouplingModel CouplingModel::with_arithmetic(Arithmetic arithmetic) const {
    return CouplingModel(diag_, offdiag_, potential_, arithmetic);
}

std::string to_string(Certification c) {
    switch (c) {
        case Certification::yes: return "yes";
        case Certification::no: return "no";
        case Certification::indeterminate: return "indeterminate";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::indeterminate: return "indeterminate";
    }
    return "?";
}

template <class T>
Certification hermitian_part_certification(const Matrix<T>& a) {
    using Tr = ScalarTraits<T>;
    const std::size_t n = a.rows();
    Matrix<T> h = a + a.adjoint();  // 2 x Hermitian part; positivity is scale free
    if constexpr (Tr::exact) {
        // Fraction-free elimination without pivoting: h(k,k) becomes the (k+1)-th
        // leading principal minor.
        T prev(1);
        for (std::size_t k = 0; k < n; ++k) {
            if (sgn(h(k, k).real()) <= 0) return Certification::no;
            for (std::size_t i = k + 1; i < n; ++i) {
                for (std::size_t j = k + 1; j < n; ++j) h(i, j) = (h(k, k) * h(i, j) - h(i, k) * h(k, j)) / prev;
                h(i, k) = T(0);
            }
            prev = h(k, k);
        }
        return Certification::yes;
    } else {
        double scale = 1.0;
        for (std::size_t k = 0; k < n; ++k) scale = std::max(scale, std::abs(h(k, k)));
        const double threshold = 1e-12 * scale;
        bool borderline = false;
        for (std::size_t k = 0; k < n; ++k) {
            double pivot = h(k, k).real();
            if (pivot < -threshold) return Certification::no;
            if (pivot <= threshold) {
                borderline = true;
                // Cannot divide by a vanishing pivot; whatever follows is undecidable at this precision.
                break;
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                T f = h(i, k) / h(k, k);
                for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= f * h(k, j);
            }
        }
        return borderline ? Certification::indeterminate : Certification::yes;
    }
}

template <class T>
double dominance_ratio(const Matrix<T>& a) {
    double rho = 0.0;
    for (std::size_t x = 0; x < a.rows(); ++x) {
        double d = ScalarTraits<T>::abs(a(x, x));
        if (d == 0.0) return std::numeric_limits<double>::infinity();
        double row = 0.0;
        for (std::size_t y = 0; y < a.cols(); ++y)
            if (y != x) row += ScalarTraits<T>::abs(a(x, y));
        rho = std::max(rho, row / d);
    }
    return rho;
}

template <class T>
QuadraticForm<T>::QuadraticForm(Matrix<T> entries)
    : entries_(std::move(entries)),
      hermitian_(hermitian_part_certification(entries_)),
      rho_(dominance_ratio(entries_)) {
    if (!entries_.square()) throw PreconditionError("quadratic form must be square");
}

template <class T>
Covariance<T> covariance(const QuadraticForm<T>& form) {
    Matrix<T> c = inverse(form.entries());
    double residual = 0.0;
    if constexpr (!ScalarTraits<T>::exact) {
        Matrix<T> r = form.entries() * c;
        for (std::size_t i = 0; i < r.rows(); ++i)
            for (std::size_t j = 0; j < r.cols(); ++j)
                residual = std::max(residual, std::abs(r(i, j) - (i == j ? T(1) : T(0))));
    }
    return Covariance<T>(form, std::move(c), residual);
}

bool hermitian_part_positive(const QuadraticForm<ExactComplex>& form) {
    return form.hermitian_positive() == Certification::yes;
}

template class QuadraticForm<ExactComplex>;
template class QuadraticForm<FloatComplex>;
template Covariance<ExactComplex> covariance(const QuadraticForm<ExactComplex>&);
template Covariance<FloatComplex> covariance(const QuadraticForm<FloatComplex>&);
template Certification hermitian_part_certification(const Matrix<ExactComplex>&);
template Certification hermitian_part_certification(const Matrix<FloatComplex>&);
template double dominance_ratio(const Matrix<ExactComplex>&);
template double dominance_ratio(const Matrix<FloatComplex>&);

const HypothesisCheck& ValidationReport::at(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw Error("no hypothesis named " + name);
}

bool ValidationReport::walk_series_ok() const {
    return passed(hypothesis::zero_diagonal) && passed(hypothesis::nonzero_diagonal) && passed(hypothesis::dominance);
}

bool ValidationReport::markov_ok() const { return walk_series_ok() && passed(hypothesis::markov); }

ValidationReport validate_model(const CouplingModel& model) {
    ValidationReport report;
    const std::size_t m = model.size();
    const auto& d = model.diag();
    const auto& j = model.offdiag();
    auto verdict = [](bool ok) { return ok ? Verdict::pass : Verdict::fail; };

    bool zero_diag = true;
    for (std::size_t x = 0; x < m; ++x) zero_diag = zero_diag && j(x, x).is_zero();
    report.checks.push_back({hypothesis::zero_diagonal, verdict(zero_diag), ""});

    bool nonzero = true;
    for (const auto& v : d) nonzero = nonzero && !v.is_zero();
    report.checks.push_back({hypothesis::nonzero_diagonal, verdict(nonzero), ""});

    double rho = 0.0;
    bool real = true;
    for (std::size_t x = 0; x < m; ++x) {
        real = real && d[x].is_real();
        for (std::size_t y = 0; y < m; ++y) real = real && j(x, y).is_real();
    }
    std::optional<Rational> rho_exact;
    if (real) rho_exact = Rational(0);
    for (std::size_t x = 0; x < m; ++x) {
        double row = 0.0;
        Rational row_exact(0);
        for (std::size_t y = 0; y < m; ++y) {
            row += j(x, y).abs() / d[x].abs();
            if (real) row_exact += Rational(abs(j(x, y).real())) / Rational(abs(d[x].real()));
        }
        rho = std::max(rho, row);
        if (real && row_exact > *rho_exact) rho_exact = row_exact;
    }
    report.rho = rho_exact ? rho_exact->get_d() : rho;
    report.rho_exact = rho_exact;
    {
        std::ostringstream detail;
        detail << "rho = " << (rho_exact ? to_string(*rho_exact) : std::to_string(rho));
        bool ok = rho_exact ? (*rho_exact < 1) : (rho < 1.0);
        report.checks.push_back({hypothesis::dominance, verdict(ok), detail.str()});
    }

    const ExactMatrix a = model.quadratic_matrix(false);
    const Certification herm = model.arithmetic() == Arithmetic::floating
                                   ? hermitian_part_certification(a.cast<FloatComplex>())
                                   : hermitian_part_certification(a);
    report.checks.push_back({hypothesis::hermitian,
                             herm == Certification::yes  ? Verdict::pass
                             : herm == Certification::no ? Verdict::fail
                                                         : Verdict::indeterminate,
                             to_string(herm)});

    bool markov = real;
    std::string why = real ? "" : "complex entries";
    for (std::size_t x = 0; x < m && markov; ++x) {
        if (sgn(d[x].real()) <= 0) {
            markov = false;
            why = "d_" + std::to_string(x + 1) + " <= 0";
        }
        for (std::size_t y = 0; y < m && markov; ++y)
            if (sgn(j(x, y).real()) < 0) {
                markov = false;
                why = "J_" + std::to_string(x + 1) + "," + std::to_string(y + 1) + " < 0";
            }
    }
    report.checks.push_back({hypothesis::markov, verdict(markov), why});
    return report;
}

namespace fixtures {

CouplingModel i1() { return CouplingModel({ExactComplex(2)}, ExactMatrix(1, 1)); }

CouplingModel i2() {
    ExactMatrix j(2, 2);
    j(0, 1) = 1;
    j(1, 0) = 1;
    return CouplingModel({ExactComplex(3), ExactComplex(3)}, j);
}

CouplingModel i3() {
    ExactMatrix j(3, 3);
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t y = 0; y < 3; ++y)
            if (x != y) j(x, y) = 1;
    return CouplingModel({ExactComplex(3), ExactComplex(3), ExactComplex(3)}, j);
}

}  // namespace fixtures

}  // namespace gsaw
