#include "gsaw/scalar.hpp"

#include <atomic>
#include <cctype>
#include <sstream>

namespace gsaw {

namespace {

std::atomic<double> g_float_tolerance{1e-10};

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

Rational pow10(long e) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
    return e < 0 ? Rational(mpz_class(1), p) : Rational(p);
}

Rational parse_decimal(std::string_view text) {
    std::string_view s = text;
    bool negative = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
        std::string_view exp_part = s.substr(e + 1);
        bool exp_negative = false;
        if (!exp_part.empty() && (exp_part.front() == '+' || exp_part.front() == '-')) {
            exp_negative = exp_part.front() == '-';
            exp_part.remove_prefix(1);
        }
        if (!all_digits(exp_part)) throw Error("malformed rational: '" + std::string(text) + "'");
        exponent = std::stol(std::string(exp_part));
        if (exp_negative) exponent = -exponent;
        s = s.substr(0, e);
    }
    std::string digits;
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        std::string_view int_part = s.substr(0, dot);
        std::string_view frac_part = s.substr(dot + 1);
        if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part)) ||
            (int_part.empty() && frac_part.empty()))
            throw Error("malformed rational: '" + std::string(text) + "'");
        digits = std::string(int_part) + std::string(frac_part);
        exponent -= static_cast<long>(frac_part.size());
    } else {
        if (!all_digits(s)) throw Error("malformed rational: '" + std::string(text) + "'");
        digits = std::string(s);
    }
    Rational q{mpz_class(digits, 10)};
    q *= pow10(exponent);
    q.canonicalize();
    return negative ? Rational(-q) : q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return parse_decimal(text);
    Rational num = parse_decimal(trim(text.substr(0, slash)));
    Rational den = parse_decimal(trim(text.substr(slash + 1)));
    if (sgn(den) == 0) throw Error("zero denominator in rational: '" + std::string(text) + "'");
    Rational q = num / den;
    q.canonicalize();
    return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

ExactComplex& ExactComplex::operator/=(const ExactComplex& o) {
    if (o.is_zero()) throw SingularMatrixError("division by exact zero");
    if (sgn(im_) == 0 && sgn(o.im_) == 0) {
        re_ /= o.re_;
        return *this;
    }
    Rational n = o.norm();
    Rational r = (re_ * o.re_ + im_ * o.im_) / n;
    im_ = (im_ * o.re_ - re_ * o.im_) / n;
    re_ = std::move(r);
    return *this;
}

std::string to_string(const ExactComplex& z) {
    if (z.is_real()) return to_string(z.real());
    std::ostringstream os;
    os << to_string(z.real()) << (sgn(z.imag()) < 0 ? "-" : "+") << to_string(Rational(abs(z.imag()))) << "i";
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const ExactComplex& z) { return os << to_string(z); }

double float_tolerance() { return g_float_tolerance.load(std::memory_order_relaxed); }
void set_float_tolerance(double tol) { g_float_tolerance.store(tol, std::memory_order_relaxed); }

}  // namespace gsaw
