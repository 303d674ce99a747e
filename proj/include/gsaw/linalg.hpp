#ifndef GSAW_LINALG_HPP
#define GSAW_LINALG_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "gsaw/matrix.hpp"

namespace gsaw {

/// Sign (+1/-1) of the permutation p of {0,...,n-1}, by cycle counting.
inline int permutation_sign(std::span<const std::size_t> p) {
    std::vector<bool> seen(p.size(), false);
    int sign = 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (seen[i]) continue;
        std::size_t len = 0;
        for (std::size_t j = i; !seen[j]; j = p[j]) {
            seen[j] = true;
            ++len;
        }
        if (len % 2 == 0) sign = -sign;
    }
    return sign;
}

namespace detail {

// Row with the best pivot in column k at or below row k; exact mode takes the first nonzero.
template <class T>
std::size_t pick_pivot(const Matrix<T>& m, std::size_t k) {
    std::size_t best = k;
    if constexpr (ScalarTraits<T>::exact) {
        while (best < m.rows() && m(best, k).is_zero()) ++best;
        return best;
    } else {
        double best_abs = -1.0;
        for (std::size_t r = k; r < m.rows(); ++r) {
            double a = std::abs(m(r, k));
            if (a > best_abs) {
                best_abs = a;
                best = r;
            }
        }
        return best_abs == 0.0 ? m.rows() : best;
    }
}

template <class T>
void swap_rows(Matrix<T>& m, std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(a, c), m(b, c));
}

}  // namespace detail

/// Determinant. Exact scalars use fraction-free (Bareiss) elimination, floats use
/// partially pivoted LU.
template <class T>
T determinant(Matrix<T> m) {
    const std::size_t n = m.rows();
    if (n == 0) return T(1);
    bool negate = false;
    if constexpr (ScalarTraits<T>::exact) {
        T prev(1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            std::size_t p = detail::pick_pivot(m, k);
            if (p == n) return T(0);
            if (p != k) {
                detail::swap_rows(m, p, k);
                negate = !negate;
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                for (std::size_t j = k + 1; j < n; ++j) {
                    T v = m(k, k) * m(i, j) - m(i, k) * m(k, j);
                    m(i, j) = v / prev;
                }
                m(i, k) = T(0);
            }
            prev = m(k, k);
        }
        T det = m(n - 1, n - 1);
        return negate ? -det : det;
    } else {
        T det(1);
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = detail::pick_pivot(m, k);
            if (p == n) return T(0);
            if (p != k) {
                detail::swap_rows(m, p, k);
                negate = !negate;
            }
            det *= m(k, k);
            for (std::size_t i = k + 1; i < n; ++i) {
                T f = m(i, k) / m(k, k);
                for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
            }
        }
        return negate ? -det : det;
    }
}

/// Determinant by cofactor expansion along the first row. Exponential cost; used as
/// the second, independent determinant route for small minors.
template <class T>
T determinant_cofactor(const Matrix<T>& m) {
    const std::size_t n = m.rows();
    if (n == 0) return T(1);
    if (n == 1) return m(0, 0);
    T sum(0);
    std::vector<Site> rows(n - 1), cols;
    std::iota(rows.begin(), rows.end(), Site{1});
    for (std::size_t j = 0; j < n; ++j) {
        if (ScalarTraits<T>::exact && ScalarTraits<T>::is_zero(m(0, j))) continue;
        cols.clear();
        for (std::size_t c = 0; c < n; ++c)
            if (c != j) cols.push_back(c);
        T term = m(0, j) * determinant_cofactor(m.select(rows, cols));
        if (j % 2 == 0)
            sum += term;
        else
            sum -= term;
    }
    return sum;
}

/// Inverse by Gauss-Jordan elimination. Throws SingularMatrixError on a zero pivot
/// (exact) or a pivot below 1e-300 relative scale (floating).
template <class T>
Matrix<T> inverse(Matrix<T> m) {
    const std::size_t n = m.rows();
    if (!m.square()) throw PreconditionError("inverse of a non-square matrix");
    Matrix<T> inv = Matrix<T>::identity(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = detail::pick_pivot(m, k);
        if (p == n) throw SingularMatrixError("singular matrix: zero pivot in column " + std::to_string(k));
        if constexpr (!ScalarTraits<T>::exact) {
            if (std::abs(m(p, k)) < 1e-300) throw SingularMatrixError("singular matrix: vanishing pivot");
        }
        detail::swap_rows(m, p, k);
        detail::swap_rows(inv, p, k);
        T piv = m(k, k);
        for (std::size_t j = 0; j < n; ++j) {
            m(k, j) /= piv;
            inv(k, j) /= piv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            T f = m(i, k);
            if (ScalarTraits<T>::exact && ScalarTraits<T>::is_zero(f)) continue;
            for (std::size_t j = 0; j < n; ++j) {
                m(i, j) -= f * m(k, j);
                inv(i, j) -= f * inv(k, j);
            }
        }
    }
    return inv;
}

/// Permanent by Ryser's inclusion-exclusion formula with Gray-code column updates,
/// O(2^n n). Empty matrix has permanent 1.
template <class T>
T permanent(const Matrix<T>& m) {
    const std::size_t n = m.rows();
    if (n == 0) return T(1);
    std::vector<T> row_sums(n, T(0));
    T total(0);
    std::uint64_t gray = 0;
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t k = 1; k < count; ++k) {
        std::uint64_t next = k ^ (k >> 1);
        std::uint64_t flipped = next ^ gray;
        std::size_t col = static_cast<std::size_t>(std::countr_zero(flipped));
        bool added = (next & flipped) != 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (added)
                row_sums[i] += m(i, col);
            else
                row_sums[i] -= m(i, col);
        }
        gray = next;
        T prod = row_sums[0];
        for (std::size_t i = 1; i < n; ++i) prod *= row_sums[i];
        // (-1)^(n - |S|)
        if ((n - static_cast<std::size_t>(std::popcount(gray))) % 2 == 0)
            total += prod;
        else
            total -= prod;
    }
    return total;
}

}  // namespace gsaw

#endif
