#ifndef GSAW_SCALAR_HPP
#define GSAW_SCALAR_HPP

#include <complex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace gsaw {

using Rational = mpq_class;
using FloatComplex = std::complex<double>;

/// Base of every error this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrixError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Parses "p/q", "p", or a decimal literal such as "0.25" or "-1.5e-3".
/// Decimal literals are converted exactly (0.1 becomes 1/10, not the binary double).
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);

/// Complex number whose real and imaginary parts are arbitrary-precision rationals.
class ExactComplex {
public:
    ExactComplex() = default;
    ExactComplex(long v) : re_(v) {}  // NOLINT(google-explicit-constructor)
    ExactComplex(Rational re) : re_(std::move(re)) {}  // NOLINT(google-explicit-constructor)
    ExactComplex(Rational re, Rational im) : re_(std::move(re)), im_(std::move(im)) {}

    const Rational& real() const { return re_; }
    const Rational& imag() const { return im_; }

    bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
    bool is_real() const { return sgn(im_) == 0; }

    ExactComplex conj() const { return {re_, -im_}; }
    /// |z|^2, exact.
    Rational norm() const { return re_ * re_ + im_ * im_; }
    double abs() const { return std::abs(to_float()); }
    FloatComplex to_float() const { return {re_.get_d(), im_.get_d()}; }

    ExactComplex operator-() const { return {-re_, -im_}; }
    ExactComplex& operator+=(const ExactComplex& o) {
        re_ += o.re_;
        im_ += o.im_;
        return *this;
    }
    ExactComplex& operator-=(const ExactComplex& o) {
        re_ -= o.re_;
        im_ -= o.im_;
        return *this;
    }
    ExactComplex& operator*=(const ExactComplex& o) {
        if (sgn(im_) == 0 && sgn(o.im_) == 0) {
            re_ *= o.re_;
            return *this;
        }
        Rational r = re_ * o.re_ - im_ * o.im_;
        im_ = re_ * o.im_ + im_ * o.re_;
        re_ = std::move(r);
        return *this;
    }
    ExactComplex& operator/=(const ExactComplex& o);

    friend ExactComplex operator+(ExactComplex a, const ExactComplex& b) { return a += b; }
    friend ExactComplex operator-(ExactComplex a, const ExactComplex& b) { return a -= b; }
    friend ExactComplex operator*(ExactComplex a, const ExactComplex& b) { return a *= b; }
    friend ExactComplex operator/(ExactComplex a, const ExactComplex& b) { return a /= b; }
    friend bool operator==(const ExactComplex& a, const ExactComplex& b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }
    friend bool operator!=(const ExactComplex& a, const ExactComplex& b) { return !(a == b); }

private:
    Rational re_{0};
    Rational im_{0};
};

std::string to_string(const ExactComplex& z);
std::ostream& operator<<(std::ostream& os, const ExactComplex& z);

/// Comparison tolerance used by floating-mode equality checks (default 1e-10).
double float_tolerance();
void set_float_tolerance(double tol);

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<ExactComplex> {
    static constexpr bool exact = true;
    static bool is_zero(const ExactComplex& z) { return z.is_zero(); }
    static bool near(const ExactComplex& a, const ExactComplex& b) { return a == b; }
    static double abs(const ExactComplex& z) { return z.abs(); }
    static FloatComplex to_float(const ExactComplex& z) { return z.to_float(); }
    static ExactComplex from_exact(const ExactComplex& z) { return z; }
    static ExactComplex conj(const ExactComplex& z) { return z.conj(); }
    static ExactComplex from_int(long v) { return ExactComplex(v); }
};

template <>
struct ScalarTraits<FloatComplex> {
    static constexpr bool exact = false;
    static bool is_zero(const FloatComplex& z) { return std::abs(z) <= float_tolerance(); }
    static bool near(const FloatComplex& a, const FloatComplex& b) {
        return std::abs(a - b) <= float_tolerance() * std::max(1.0, std::abs(b));
    }
    static double abs(const FloatComplex& z) { return std::abs(z); }
    static FloatComplex to_float(const FloatComplex& z) { return z; }
    static FloatComplex from_exact(const ExactComplex& z) { return z.to_float(); }
    static FloatComplex conj(const FloatComplex& z) { return std::conj(z); }
    static FloatComplex from_int(long v) { return {static_cast<double>(v), 0.0}; }
};

template <class T>
T scalar_cast(const ExactComplex& z) {
    return ScalarTraits<T>::from_exact(z);
}

}  // namespace gsaw

#endif
