#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "affine/linalg.hpp"
#include "affine/rational.hpp"

namespace affine {

/// Integer lattice point in Z^d.
using Point = std::vector<std::int64_t>;

inline std::string point_to_string(const Point& p) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
    os << ")";
    return os.str();
}

inline Point point_add(const Point& a, const Point& b) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Point point_sub(const Point& a, const Point& b) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Point point_neg(const Point& a) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
    return r;
}

inline bool point_is_zero(const Point& a) {
    for (auto v : a)
        if (v != 0) return false;
    return true;
}

/// Exact affine functional x -> <linear, x> + offset.
struct AffineFunctional {
    RatVec linear;
    Rational offset;

    AffineFunctional() = default;
    AffineFunctional(RatVec lin, Rational off) : linear(std::move(lin)), offset(off) {}

    std::size_t dimension() const { return linear.size(); }

    Rational operator()(const Point& x) const {
        Rational v = offset;
        for (std::size_t i = 0; i < linear.size(); ++i) v += linear[i] * Rational(x[i]);
        return v;
    }

    Rational operator()(const RatVec& x) const {
        Rational v = offset;
        for (std::size_t i = 0; i < linear.size(); ++i) v += linear[i] * x[i];
        return v;
    }

    /// Value of the linear part at a direction vector, i.e. psi(x+u) - psi(x).
    Rational increment(const Point& u) const {
        Rational v(0);
        for (std::size_t i = 0; i < linear.size(); ++i) v += linear[i] * Rational(u[i]);
        return v;
    }

    bool is_identically_zero() const {
        if (!offset.is_zero()) return false;
        for (const auto& c : linear)
            if (!c.is_zero()) return false;
        return true;
    }

    friend AffineFunctional operator+(const AffineFunctional& a, const AffineFunctional& b) {
        AffineFunctional r = a;
        for (std::size_t i = 0; i < r.linear.size(); ++i) r.linear[i] += b.linear[i];
        r.offset += b.offset;
        return r;
    }

    friend AffineFunctional operator*(const Rational& s, const AffineFunctional& f) {
        AffineFunctional r = f;
        for (auto& c : r.linear) c *= s;
        r.offset *= s;
        return r;
    }

    friend bool operator==(const AffineFunctional& a, const AffineFunctional& b) {
        return a.linear == b.linear && a.offset == b.offset;
    }
    friend bool operator!=(const AffineFunctional& a, const AffineFunctional& b) {
        return !(a == b);
    }

    /// Coordinate projection pi_j (1-based j), as a functional on R^d.
    static AffineFunctional coordinate(std::size_t d, std::size_t j) {
        RatVec lin(d, Rational(0));
        lin[j - 1] = Rational(1);
        return {std::move(lin), Rational(0)};
    }

    std::string to_string() const {
        std::ostringstream os;
        bool printed = false;
        for (std::size_t i = 0; i < linear.size(); ++i) {
            if (linear[i].is_zero()) continue;
            if (printed) os << " + ";
            os << linear[i].to_string() << "*x" << (i + 1);
            printed = true;
        }
        if (!printed || !offset.is_zero()) {
            if (printed) os << " + ";
            os << offset.to_string();
        }
        return os.str();
    }
};

/// Exact affine map x -> A x + b on R^d.
struct AffineMap {
    RatMat matrix;
    RatVec offset;

    AffineMap() = default;
    AffineMap(RatMat m, RatVec b) : matrix(std::move(m)), offset(std::move(b)) {}

    std::size_t dimension() const { return matrix.size(); }

    static AffineMap identity(std::size_t d) {
        RatMat m(d, RatVec(d, Rational(0)));
        for (std::size_t i = 0; i < d; ++i) m[i][i] = Rational(1);
        return {std::move(m), RatVec(d, Rational(0))};
    }

    bool is_identity() const {
        const std::size_t d = dimension();
        for (std::size_t i = 0; i < d; ++i) {
            if (!offset[i].is_zero()) return false;
            for (std::size_t j = 0; j < d; ++j)
                if (matrix[i][j] != Rational(i == j ? 1 : 0)) return false;
        }
        return true;
    }

    Rational determinant() const { return linalg::determinant(matrix); }
    bool invertible() const { return !determinant().is_zero(); }

    RatVec apply(const Point& x) const {
        RatVec xv(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) xv[i] = Rational(x[i]);
        return apply(xv);
    }

    RatVec apply(const RatVec& x) const {
        RatVec out = linalg::mat_vec(matrix, x);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += offset[i];
        return out;
    }

    /// Image of a lattice point, required to land on the lattice.
    Point apply_lattice(const Point& x) const {
        RatVec v = apply(x);
        Point out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_integer())
                throw Error("NonLatticeImage", "affine map sends " + point_to_string(x) +
                                                   " off the integer lattice");
            out[i] = v[i].as_integer();
        }
        return out;
    }

    /// Image of a difference vector under the linear part (offsets cancel).
    Point apply_jump(const Point& u) const {
        RatVec uv(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) uv[i] = Rational(u[i]);
        RatVec v = linalg::mat_vec(matrix, uv);
        Point out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_integer())
                throw Error("NonLatticeImage", "linear part sends jump " + point_to_string(u) +
                                                   " off the integer lattice");
            out[i] = v[i].as_integer();
        }
        return out;
    }

    AffineMap inverse() const {
        auto inv = linalg::inverse(matrix);
        if (!inv) throw Error("SingularMap", "affine map is not invertible");
        RatVec b = linalg::mat_vec(*inv, offset);
        for (auto& c : b) c = -c;
        return {std::move(*inv), std::move(b)};
    }

    /// this ∘ other, i.e. x -> this(other(x)).
    AffineMap compose(const AffineMap& other) const {
        RatMat m = linalg::mat_mul(matrix, other.matrix);
        RatVec b = linalg::mat_vec(matrix, other.offset);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] += offset[i];
        return {std::move(m), std::move(b)};
    }

    friend bool operator==(const AffineMap& a, const AffineMap& b) {
        return a.matrix == b.matrix && a.offset == b.offset;
    }
};

/// psi ∘ m as an affine functional: x -> psi(m(x)).
inline AffineFunctional compose(const AffineFunctional& psi, const AffineMap& m) {
    const std::size_t d = m.dimension();
    RatVec lin(d, Rational(0));
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) lin[j] += psi.linear[i] * m.matrix[i][j];
    Rational off = psi.offset;
    for (std::size_t i = 0; i < d; ++i) off += psi.linear[i] * m.offset[i];
    return {std::move(lin), off};
}

} // namespace affine
