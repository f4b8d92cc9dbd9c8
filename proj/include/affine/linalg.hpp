#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "affine/rational.hpp"

namespace affine {

using RatVec = std::vector<Rational>;
using RatMat = std::vector<std::vector<Rational>>;

namespace linalg {

/// In-place Gauss-Jordan elimination to reduced row echelon form.
/// Returns the pivot column of each pivot row, in order; the rank is the
/// number of pivots. Exact over rationals, partial pivoting on first nonzero.
inline std::vector<std::size_t> rref(RatMat& m) {
    std::vector<std::size_t> pivots;
    if (m.empty()) return pivots;
    const std::size_t rows = m.size(), cols = m[0].size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t sel = r;
        while (sel < rows && m[sel][c].is_zero()) ++sel;
        if (sel == rows) continue;
        std::swap(m[sel], m[r]);
        const Rational inv_pivot = Rational(1) / m[r][c];
        for (std::size_t j = c; j < cols; ++j) m[r][j] *= inv_pivot;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c].is_zero()) continue;
            const Rational f = m[i][c];
            for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

inline std::size_t rank(RatMat m) { return rref(m).size(); }

/// Basis of the right nullspace of m (vectors v with m·v = 0).
inline std::vector<RatVec> nullspace(RatMat m, std::size_t cols) {
    if (m.empty()) {
        // No constraints: the whole space.
        std::vector<RatVec> basis;
        for (std::size_t j = 0; j < cols; ++j) {
            RatVec v(cols, Rational(0));
            v[j] = Rational(1);
            basis.push_back(std::move(v));
        }
        return basis;
    }
    const auto pivots = rref(m);
    std::vector<bool> is_pivot(cols, false);
    for (auto c : pivots) is_pivot[c] = true;
    std::vector<RatVec> basis;
    for (std::size_t free_col = 0; free_col < cols; ++free_col) {
        if (is_pivot[free_col]) continue;
        RatVec v(cols, Rational(0));
        v[free_col] = Rational(1);
        for (std::size_t i = 0; i < pivots.size(); ++i)
            v[pivots[i]] = -m[i][free_col];
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Solves A x = b exactly; nullopt when inconsistent. With multiple
/// solutions, free variables are set to zero.
inline std::optional<RatVec> solve(RatMat a, const RatVec& b) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows == 0 ? 0 : a[0].size();
    for (std::size_t i = 0; i < rows; ++i) a[i].push_back(b[i]);
    const auto pivots = rref(a);
    if (!pivots.empty() && pivots.back() == cols) return std::nullopt; // 0 = 1 row
    RatVec x(cols, Rational(0));
    for (std::size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = a[i][cols];
    return x;
}

inline Rational determinant(RatMat m) {
    const std::size_t n = m.size();
    Rational det(1);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t sel = c;
        while (sel < n && m[sel][c].is_zero()) ++sel;
        if (sel == n) return Rational(0);
        if (sel != c) {
            std::swap(m[sel], m[c]);
            det = -det;
        }
        det *= m[c][c];
        const Rational inv_pivot = Rational(1) / m[c][c];
        for (std::size_t i = c + 1; i < n; ++i) {
            if (m[i][c].is_zero()) continue;
            const Rational f = m[i][c] * inv_pivot;
            for (std::size_t j = c; j < n; ++j) m[i][j] -= f * m[c][j];
        }
    }
    return det;
}

/// Exact inverse of a square matrix; nullopt when singular.
inline std::optional<RatMat> inverse(const RatMat& m) {
    const std::size_t n = m.size();
    RatMat aug(n, RatVec(2 * n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = m[i][j];
        aug[i][n + i] = Rational(1);
    }
    const auto pivots = rref(aug);
    if (pivots.size() != n || pivots.back() != n - 1) return std::nullopt;
    RatMat inv(n, RatVec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = aug[i][n + j];
    return inv;
}

inline RatVec mat_vec(const RatMat& m, const RatVec& v) {
    RatVec out(m.size(), Rational(0));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
    return out;
}

inline RatMat mat_mul(const RatMat& a, const RatMat& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    RatMat out(n, RatVec(m, Rational(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            if (a[i][l].is_zero()) continue;
            for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][l] * b[l][j];
        }
    return out;
}

} // namespace linalg
} // namespace affine
