#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "affine/errors.hpp"
#include "affine/model.hpp"
#include "affine/polynomial.hpp"

namespace affine {

using Complex = std::complex<double>;

/// Kernel in coefficient form: lambda_u(x) = nu0(u) + sum_j x_j nu_j(u).
/// The nu_j are signed atom lists; only their combination on E is a measure.
struct KernelDecomposition {
    std::size_t k = 0;
    std::map<Point, Rational> nu0;
    std::vector<std::map<Point, Rational>> nuj;
};

/// The transform ODE system: d/dt Phi = Phi * phi_rhs(Psi),
/// d/dt Psi_j = psi_rhs[j](Psi). All right-hand sides are polynomials.
struct RiccatiSystem {
    std::size_t k = 0;
    SparsePolynomial phi_rhs{0};
    std::vector<SparsePolynomial> psi_rhs;
};

/// Value of the conditional transform factors at one (u, t):
/// E_x[exp(<u, X_t>)] = phi * prod_j psi_j^{x_j}, with 0^0 = 1.
struct TransformValue {
    Complex phi;
    std::vector<Complex> psi;
};

/// z^n for n in N with the 0^0 = 1 convention; state coordinates are
/// nonnegative integers, so only integer powers ever appear.
inline Complex pow_n(Complex z, std::int64_t n) {
    Complex out(1.0);
    for (std::int64_t i = 0; i < n; ++i) out *= z;
    return out;
}

inline Complex transform_value_at(const TransformValue& tv, const Point& x) {
    Complex out = tv.phi;
    for (std::size_t j = 0; j < tv.psi.size(); ++j) out *= pow_n(tv.psi[j], x[j]);
    return out;
}

/// Reads the affine coefficients of every channel intensity. Requires the
/// model to be in counter coordinates: the pure-jump case k = d with
/// E inside N^k. The reconstruction identity
/// nu0(u) + sum_j x_j nu_j(u) = lambda_u(x) holds exactly by construction.
inline KernelDecomposition decompose_kernel(const AffineModel& model, std::size_t k) {
    const std::size_t d = model.dimension();
    if (k != d)
        throw NotCounterCoordinates("pure-jump decomposition requires k = d (got k = " +
                                    std::to_string(k) + ", d = " + std::to_string(d) + ")");
    for (const auto& x : model.space().points())
        for (auto c : x)
            if (c < 0)
                throw NotCounterCoordinates("state " + point_to_string(x) +
                                            " has a negative coordinate; E must lie in N^k");
    KernelDecomposition out;
    out.k = k;
    out.nuj.resize(k);
    for (const auto& ch : model.kernel().channels()) {
        if (!ch.intensity.offset.is_zero()) out.nu0[ch.jump] = ch.intensity.offset;
        for (std::size_t j = 0; j < k; ++j)
            if (!ch.intensity.linear[j].is_zero()) out.nuj[j][ch.jump] = ch.intensity.linear[j];
    }
    return out;
}

/// Generator matching for f(t,x) = Phi(t) Psi(t)^x gives
///   d/dt Phi / Phi   = sum_u nu0(u) (Psi^u - 1)
///   d/dt Psi_j       = sum_u nu_j(u) (Psi^{u+e_j} - Psi_j),
/// which is polynomial exactly when every nu0 atom lies in N^k and every
/// nu_j atom u has u + e_j in N^k. Atoms violating that clearing condition
/// signal jumps incompatible with the counter structure.
inline RiccatiSystem build_riccati(const KernelDecomposition& decomp) {
    const std::size_t k = decomp.k;
    RiccatiSystem sys;
    sys.k = k;
    sys.phi_rhs = SparsePolynomial(k);
    sys.psi_rhs.assign(k, SparsePolynomial(k));

    const auto exps_of = [&](const Point& u, int bump_j) {
        SparsePolynomial::Exponents e(k);
        for (std::size_t j = 0; j < k; ++j) {
            std::int64_t v = u[j] + (static_cast<int>(j) == bump_j ? 1 : 0);
            if (v < 0)
                throw NonPolynomialSystem(
                    "atom " + point_to_string(u) +
                    (bump_j >= 0 ? " of nu_" + std::to_string(bump_j + 1) : " of nu_0") +
                    " violates the polynomial clearing condition");
            e[j] = static_cast<int>(v);
        }
        return e;
    };

    const SparsePolynomial::Exponents zero(k, 0);
    for (const auto& [u, w] : decomp.nu0) {
        const double c = w.to_double();
        sys.phi_rhs.add_term(exps_of(u, -1), Complex(c));
        sys.phi_rhs.add_term(zero, Complex(-c));
    }
    for (std::size_t j = 0; j < k; ++j) {
        SparsePolynomial::Exponents ej(k, 0);
        ej[j] = 1;
        for (const auto& [u, w] : decomp.nuj[j]) {
            const double c = w.to_double();
            sys.psi_rhs[j].add_term(exps_of(u, static_cast<int>(j)), Complex(c));
            sys.psi_rhs[j].add_term(ej, Complex(-c));
        }
    }
    return sys;
}

namespace detail {

// Dormand-Prince 5(4) embedded pair on a complex state vector.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // 4th-order weights for the error estimate.
    static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                            e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;
};

template <typename Rhs>
void integrate_dopri5(Rhs&& rhs, std::vector<Complex>& y, double t_end, double abs_tol) {
    using D = Dopri5;
    const std::size_t n = y.size();
    if (t_end == 0.0) return;
    double t = 0.0;
    double h = std::min(1e-2, t_end);
    std::vector<Complex> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y5(n);
    rhs(y, k1);
    std::size_t steps = 0;
    const std::size_t max_steps = 2000000;
    while (t < t_end) {
        if (++steps > max_steps)
            throw ToleranceNotMet("step budget exhausted before reaching t");
        if (h < 1e-14 * std::max(1.0, t_end))
            throw ToleranceNotMet("step size underflow at t = " + std::to_string(t));
        h = std::min(h, t_end - t);

        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (D::a21 * k1[i]);
        rhs(tmp, k2);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (D::a31 * k1[i] + D::a32 * k2[i]);
        rhs(tmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (D::a41 * k1[i] + D::a42 * k2[i] + D::a43 * k3[i]);
        rhs(tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (D::a51 * k1[i] + D::a52 * k2[i] + D::a53 * k3[i] +
                                 D::a54 * k4[i]);
        rhs(tmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (D::a61 * k1[i] + D::a62 * k2[i] + D::a63 * k3[i] +
                                 D::a64 * k4[i] + D::a65 * k5[i]);
        rhs(tmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            y5[i] = y[i] + h * (D::b1 * k1[i] + D::b3 * k3[i] + D::b4 * k4[i] + D::b5 * k5[i] +
                                D::b6 * k6[i]);
        rhs(y5, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Complex y4 = y[i] + h * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] +
                                           D::e5 * k5[i] + D::e6 * k6[i] + D::e7 * k7[i]);
            err = std::max(err, std::abs(y5[i] - y4));
        }
        if (err <= abs_tol) {
            t += h;
            y = y5;
            k1 = k7; // first-same-as-last
        }
        const double factor =
            err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(abs_tol / err, 0.2), 0.2, 5.0);
        h *= factor;
    }
}

} // namespace detail

/// Integrates the transform ODEs from (1, e^{u_1}, ..., e^{u_k}) to time t
/// with an embedded adaptive Runge-Kutta pair at the given absolute
/// tolerance.
inline TransformValue solve_riccati(const RiccatiSystem& sys, const std::vector<Complex>& u,
                                    double t, double abs_tol = 1e-10) {
    if (u.size() != sys.k) throw std::invalid_argument("solve_riccati: u has wrong arity");
    if (t < 0.0) throw std::invalid_argument("solve_riccati: t must be nonnegative");

    std::vector<Complex> y(sys.k + 1);
    y[0] = Complex(1.0);
    for (std::size_t j = 0; j < sys.k; ++j) y[j + 1] = std::exp(u[j]);

    const auto rhs = [&](const std::vector<Complex>& state, std::vector<Complex>& dy) {
        const std::vector<Complex> psi(state.begin() + 1, state.end());
        dy[0] = state[0] * sys.phi_rhs.eval(psi);
        for (std::size_t j = 0; j < sys.k; ++j) dy[j + 1] = sys.psi_rhs[j].eval(psi);
    };
    detail::integrate_dopri5(rhs, y, t, abs_tol);

    TransformValue out;
    out.phi = y[0];
    out.psi.assign(y.begin() + 1, y.end());
    return out;
}

/// Closed-form transform of the birth-death model on {0,...,N} with death
/// rate x*alpha and birth rate (N-x)*beta:
///   Phi(u,t) = ((alpha + beta(e^u + (1-e^u) e^{-t(alpha+beta)}))/(alpha+beta))^N
///   Psi(u,t) = 1 + (alpha+beta)(e^u-1) / ((beta e^u + alpha) e^{t(alpha+beta)}
///                                         - beta(e^u-1)).
/// Both stay finite as beta -> 0.
inline TransformValue closed_form_1d(std::int64_t n, double alpha, double beta, Complex u,
                                     double t) {
    if (!(alpha > 0.0)) throw std::invalid_argument("closed_form_1d: alpha > 0 required");
    if (beta < 0.0) throw std::invalid_argument("closed_form_1d: beta >= 0 required");
    if (t < 0.0) throw std::invalid_argument("closed_form_1d: t >= 0 required");
    const Complex eu = std::exp(u);
    const double rate = alpha + beta;
    const double decay = std::exp(-t * rate);
    const Complex phi_base = (alpha + beta * (eu + (1.0 - eu) * decay)) / rate;
    const Complex psi =
        1.0 + rate * (eu - 1.0) / ((beta * eu + alpha) / decay - beta * (eu - 1.0));
    return {pow_n(phi_base, n), {psi}};
}

/// Brute-force transform oracle: builds the CTMC generator of the model and
/// evaluates e^{tQ} g, g(y) = e^{<u,y>}, by uniformization. Poisson weights
/// are computed in log space so large Lambda*t cannot underflow; summation
/// stops once the accumulated weight reaches 1 - 1e-13, which bounds the
/// truncation error by 1e-13 * max|g|.
/// Returns values aligned with model.space().points().
inline std::vector<Complex> transform_oracle(const AffineModel& model,
                                             const std::vector<Complex>& u, double t) {
    const auto& pts = model.space().points();
    const std::size_t n = pts.size();
    if (u.size() != model.dimension())
        throw std::invalid_argument("transform_oracle: u has wrong arity");

    std::vector<Complex> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        Complex dot(0.0);
        for (std::size_t j = 0; j < u.size(); ++j) dot += u[j] * static_cast<double>(pts[i][j]);
        g[i] = std::exp(dot);
    }
    if (t == 0.0) return g;

    Rational lambda_max(0);
    std::vector<Rational> lambda(n);
    for (std::size_t i = 0; i < n; ++i) {
        lambda[i] = model.total_intensity(pts[i]);
        lambda_max = std::max(lambda_max, lambda[i]);
    }
    if (lambda_max.is_zero()) return g;

    // P = I + Q / lambda_max, entries exact before conversion.
    std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        p[i][i] = (Rational(1) - lambda[i] / lambda_max).to_double();
        for (const auto& ch : model.kernel().channels()) {
            const Rational rate = ch.intensity(pts[i]);
            if (rate > Rational(0))
                p[i][model.space().index_of(point_add(pts[i], ch.jump))] +=
                    (rate / lambda_max).to_double();
        }
    }

    const double lt = lambda_max.to_double() * t;
    std::vector<Complex> v = g, next(n), acc(n, Complex(0.0));
    double cumulative = 0.0;
    const std::size_t m_cap =
        static_cast<std::size_t>(lt + 60.0 * std::sqrt(lt + 1.0) + 200.0);
    for (std::size_t m = 0; m <= m_cap; ++m) {
        const double logw = -lt + static_cast<double>(m) * std::log(lt) -
                            std::lgamma(static_cast<double>(m) + 1.0);
        const double w = std::exp(logw);
        if (w > 0.0) {
            for (std::size_t i = 0; i < n; ++i) acc[i] += w * v[i];
            cumulative += w;
        }
        if (cumulative >= 1.0 - 1e-13) break;
        for (std::size_t i = 0; i < n; ++i) {
            Complex s(0.0);
            for (std::size_t j = 0; j < n; ++j) s += p[i][j] * v[j];
            next[i] = s;
        }
        v.swap(next);
    }
    return acc;
}

/// Rectangle in the complex u-plane.
struct ComplexRect {
    double re_min, re_max, im_min, im_max;
};

/// Searches a rectangle for a zero of Psi(u, t) of a k = 1 system by grid
/// scan with iterated local refinement of |Psi|. Returns the located u, or
/// nullopt when the refined minimum stays above the threshold.
inline std::optional<Complex> find_psi_zero(const RiccatiSystem& sys, double t,
                                            const ComplexRect& rect, double threshold = 1e-8) {
    if (sys.k != 1) throw std::invalid_argument("find_psi_zero: system must have k = 1");
    if (!(t > 0.0)) throw std::invalid_argument("find_psi_zero: t must be positive");

    const auto abs_psi = [&](double re, double im, double tol) {
        return std::abs(solve_riccati(sys, {Complex(re, im)}, t, tol).psi[0]);
    };

    double best_re = rect.re_min, best_im = rect.im_min;
    double best = std::numeric_limits<double>::infinity();
    const int coarse = 32;
    for (int i = 0; i <= coarse; ++i) {
        for (int j = 0; j <= coarse; ++j) {
            const double re = rect.re_min + (rect.re_max - rect.re_min) * i / coarse;
            const double im = rect.im_min + (rect.im_max - rect.im_min) * j / coarse;
            const double v = abs_psi(re, im, 1e-9);
            if (v < best) {
                best = v;
                best_re = re;
                best_im = im;
            }
        }
    }

    double span_re = (rect.re_max - rect.re_min) / coarse;
    double span_im = (rect.im_max - rect.im_min) / coarse;
    for (int round = 0; round < 14 && best > 1e-13; ++round) {
        const int fine = 8;
        double next_best = best, next_re = best_re, next_im = best_im;
        for (int i = -fine; i <= fine; ++i) {
            for (int j = -fine; j <= fine; ++j) {
                const double re =
                    std::clamp(best_re + span_re * i / fine, rect.re_min, rect.re_max);
                const double im =
                    std::clamp(best_im + span_im * j / fine, rect.im_min, rect.im_max);
                const double v = abs_psi(re, im, 1e-12);
                if (v < next_best) {
                    next_best = v;
                    next_re = re;
                    next_im = im;
                }
            }
        }
        best = next_best;
        best_re = next_re;
        best_im = next_im;
        span_re /= 4.0;
        span_im /= 4.0;
    }
    if (best < threshold) return Complex(best_re, best_im);
    return std::nullopt;
}

} // namespace affine
