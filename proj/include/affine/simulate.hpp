#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "affine/counters.hpp"
#include "affine/model.hpp"
#include "affine/rng.hpp"
#include "affine/transforms.hpp"

namespace affine {

/// Timestamped jump path. The first event is (0, x0); consecutive states
/// differ by a channel jump vector.
struct Trajectory {
    std::vector<std::pair<double, Point>> events;
    double horizon = 0.0;

    const Point& state_at(double t) const {
        std::size_t i = events.size();
        while (i > 1 && events[i - 1].first > t) --i;
        return events[i - 1].second;
    }
};

namespace detail {

inline unsigned simulation_threads() {
    if (const char* env = std::getenv("AFFINE_NUM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(std::min(v, 256l));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs f(i) for i in [0, n), partitioned into contiguous chunks per thread.
/// Work items must be independent; results keyed by i stay deterministic.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
    const unsigned threads = std::min<std::size_t>(simulation_threads(), n == 0 ? 1 : n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&f, begin, end] {
            for (std::size_t i = begin; i < end; ++i) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Per-state jump rates of a model, precomputed in double precision with
/// target state indices resolved. Shared read-only across simulation paths.
struct IntensityTable {
    std::vector<std::vector<double>> rates;        // [state][channel]
    std::vector<std::vector<std::size_t>> target;  // [state][channel], npos if off-space
    std::vector<double> totals;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    explicit IntensityTable(const AffineModel& model) {
        const auto& pts = model.space().points();
        const auto& chans = model.kernel().channels();
        rates.assign(pts.size(), std::vector<double>(chans.size(), 0.0));
        target.assign(pts.size(), std::vector<std::size_t>(chans.size(), npos));
        totals.assign(pts.size(), 0.0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t c = 0; c < chans.size(); ++c) {
                const Rational r = chans[c].intensity(pts[i]);
                if (r > Rational(0)) {
                    const Point to = point_add(pts[i], chans[c].jump);
                    if (!model.space().contains(to))
                        throw InconsistentModel("positive rate exits the state space at " +
                                                point_to_string(pts[i]));
                    rates[i][c] = r.to_double();
                    target[i][c] = model.space().index_of(to);
                    totals[i] += rates[i][c];
                }
            }
        }
    }
};

/// One exact-simulation step sequence from state index `i` up to `horizon`,
/// invoking visit(t, next_index) after each executed jump.
template <typename Visit>
void ssa_run(const IntensityTable& table, std::size_t i, double horizon, Rng& rng,
             Visit&& visit) {
    double t = 0.0;
    while (true) {
        const double total = table.totals[i];
        if (total <= 0.0) return; // absorbing
        t += rng.exponential(total);
        if (t > horizon) return;
        double r = rng.uniform01() * total;
        const auto& row = table.rates[i];
        std::size_t c = 0;
        for (; c + 1 < row.size(); ++c) {
            r -= row[c];
            if (r < 0.0) break;
        }
        i = table.target[i][c];
        visit(t, i);
    }
}

} // namespace detail

/// Exact stochastic simulation: exponential holding times with the state's
/// total rate, jump selection proportional to channel intensity. The event
/// list is a deterministic function of (model, x0, horizon, seed).
inline Trajectory simulate_ssa(const AffineModel& model, const Point& x0, double horizon,
                               std::uint64_t seed) {
    const detail::IntensityTable table(model);
    const auto& pts = model.space().points();
    Trajectory traj;
    traj.horizon = horizon;
    traj.events.emplace_back(0.0, x0);
    Rng rng(seed, 0);
    detail::ssa_run(table, model.space().index_of(x0), horizon, rng,
                    [&](double t, std::size_t idx) { traj.events.emplace_back(t, pts[idx]); });
    return traj;
}

/// Endpoint samples of n independent paths at time t. Path i draws from
/// stream (seed, i), so the multiset does not depend on thread scheduling.
inline std::vector<Point> sample_at(const AffineModel& model, const Point& x0, double t,
                                    std::size_t n_paths, std::uint64_t seed) {
    if (n_paths < 1) throw std::invalid_argument("sample_at: n_paths >= 1 required");
    const detail::IntensityTable table(model);
    const auto& pts = model.space().points();
    const std::size_t start = model.space().index_of(x0);
    std::vector<std::size_t> end_index(n_paths, start);
    detail::parallel_for(n_paths, [&](std::size_t p) {
        Rng rng(seed, p);
        std::size_t cur = start;
        detail::ssa_run(table, start, t, rng, [&](double, std::size_t idx) { cur = idx; });
        end_index[p] = cur;
    });
    std::vector<Point> out;
    out.reserve(n_paths);
    for (auto idx : end_index) out.push_back(pts[idx]);
    return out;
}

namespace detail {

/// Pairwise (cascade) summation in index order: associativity-stable, so the
/// reduction is identical regardless of thread count.
inline Complex pairwise_sum(const std::vector<Complex>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return v[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

inline double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return v[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

} // namespace detail

/// Sample mean of e^{<u,x>} with standard errors for the real and imaginary
/// parts.
struct EmpiricalTransform {
    Complex mean;
    double se_re = 0.0;
    double se_im = 0.0;
    std::size_t n = 0;
};

inline EmpiricalTransform empirical_transform(const std::vector<Point>& samples,
                                              const std::vector<Complex>& u) {
    if (samples.empty()) throw std::invalid_argument("empirical_transform: no samples");
    const std::size_t n = samples.size();
    std::vector<Complex> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        Complex dot(0.0);
        for (std::size_t j = 0; j < u.size(); ++j)
            dot += u[j] * static_cast<double>(samples[i][j]);
        values[i] = std::exp(dot);
    }
    EmpiricalTransform out;
    out.n = n;
    bool constant = true;
    for (std::size_t i = 1; i < n && constant; ++i) constant = values[i] == values[0];
    if (constant) {
        // Constant data carries no sampling error; avoid the rounding dust a
        // mean-then-deviate pass would produce.
        out.mean = values[0];
        return out;
    }
    out.mean = detail::pairwise_sum(values, 0, n) / static_cast<double>(n);
    if (n > 1) {
        std::vector<double> dev_re(n), dev_im(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Complex d = values[i] - out.mean;
            dev_re[i] = d.real() * d.real();
            dev_im[i] = d.imag() * d.imag();
        }
        const double var_re = detail::pairwise_sum(dev_re, 0, n) / static_cast<double>(n - 1);
        const double var_im = detail::pairwise_sum(dev_im, 0, n) / static_cast<double>(n - 1);
        out.se_re = std::sqrt(var_re / static_cast<double>(n));
        out.se_im = std::sqrt(var_im / static_cast<double>(n));
    }
    return out;
}

/// Layered hybrid model: a one-dimensional jump component Y with a continuous
/// companion Z. Between Y-jumps, Z follows dZ = (b0 + b1 Y + b2 Z) dt, solved
/// in closed form; at a Y-jump through channel c, Z jumps by z_jumps[c]
/// (a constant or a uniform draw). z_bounds[y] records the admissible Z-range
/// of layer y for containment checks.
struct HybridModel {
    struct ZJump {
        enum class Kind { Constant, Uniform };
        Kind kind = Kind::Constant;
        double c = 0.0;
    };

    AffineModel layer_model;
    std::array<double, 3> z_drift{0.0, 0.0, 0.0}; // (b0, b1, b2)
    std::vector<ZJump> z_jumps;                   // aligned with layer_model channels
    std::vector<std::pair<double, double>> z_bounds; // indexed by layer y

    HybridModel(AffineModel layer, std::array<double, 3> drift, std::vector<ZJump> jumps,
                std::vector<std::pair<double, double>> bounds)
        : layer_model(std::move(layer)),
          z_drift(drift),
          z_jumps(std::move(jumps)),
          z_bounds(std::move(bounds)) {
        if (layer_model.dimension() != 1)
            throw std::invalid_argument("HybridModel: layer model must be one-dimensional");
        if (z_jumps.size() != layer_model.kernel().channels().size())
            throw std::invalid_argument("HybridModel: one z-jump law per channel required");
    }
};

/// Closed-form flow of dZ = (b0 + b1 y + b2 Z) dt on one layer:
/// exponential relaxation toward the fixed point when b2 != 0, a straight
/// line otherwise. In both shapes z is monotone in time, so segment extrema
/// sit at the endpoints.
struct ZFlow {
    bool exponential = false;
    double offset = 0.0; // fixed point (exponential) or z0 (linear)
    double coeff = 0.0;  // z0 - fixed point (exponential) or slope (linear)
    double rate = 0.0;

    static ZFlow make(double z0, double drive, double b2) {
        ZFlow f;
        if (b2 != 0.0) {
            f.exponential = true;
            f.offset = -drive / b2;
            f.coeff = z0 - f.offset;
            f.rate = b2;
        } else {
            f.offset = z0;
            f.coeff = drive;
        }
        return f;
    }

    double at(double dt) const {
        return exponential ? offset + coeff * std::exp(rate * dt) : offset + coeff * dt;
    }
};

struct HybridSegment {
    double t_start;
    std::int64_t y;
    double z_start;
    ZFlow flow;
};

/// Piecewise-deterministic path: Z is continuous inside segments and may be
/// discontinuous only across segment boundaries, which are exactly the
/// Y-jump times.
struct HybridTrajectory {
    std::vector<HybridSegment> segments;
    double horizon = 0.0;

    double segment_end(std::size_t i) const {
        return i + 1 < segments.size() ? segments[i + 1].t_start : horizon;
    }

    std::int64_t y_at(double t) const {
        std::size_t i = segments.size();
        while (i > 1 && segments[i - 1].t_start > t) --i;
        return segments[i - 1].y;
    }

    double z_at(double t) const {
        std::size_t i = segments.size();
        while (i > 1 && segments[i - 1].t_start > t) --i;
        return segments[i - 1].flow.at(t - segments[i - 1].t_start);
    }
};

/// Simulates the hybrid pair (Y, Z): Y-jump times are exact exponential draws
/// (the intensity is constant between jumps because it depends on Y alone),
/// Z follows the closed-form flow within a layer and jumps only together
/// with Y.
inline HybridTrajectory simulate_hybrid(const HybridModel& hmodel, std::int64_t y0, double z0,
                                        double horizon, std::uint64_t seed,
                                        std::uint64_t stream = 0) {
    const auto& chans = hmodel.layer_model.kernel().channels();
    Rng rng(seed, stream);
    HybridTrajectory traj;
    traj.horizon = horizon;

    double t = 0.0, z = z0;
    std::int64_t y = y0;
    while (true) {
        const double drive = hmodel.z_drift[0] + hmodel.z_drift[1] * static_cast<double>(y);
        traj.segments.push_back({t, y, z, ZFlow::make(z, drive, hmodel.z_drift[2])});

        double total = 0.0;
        std::vector<double> rates(chans.size(), 0.0);
        for (std::size_t c = 0; c < chans.size(); ++c) {
            const Rational r = chans[c].intensity(Point{y});
            if (r > Rational(0)) {
                rates[c] = r.to_double();
                total += rates[c];
            }
        }
        if (total <= 0.0) return traj;
        const double wait = rng.exponential(total);
        const double t_next = t + wait;
        if (t_next > horizon) return traj;

        double r = rng.uniform01() * total;
        std::size_t c = 0;
        for (; c + 1 < rates.size(); ++c) {
            r -= rates[c];
            if (r < 0.0) break;
        }
        // Evaluate the flow at the stored-time difference so that replaying
        // the segment from its recorded t_start reproduces z bit-for-bit.
        z = traj.segments.back().flow.at(t_next - t);
        t = t_next;
        y += chans[c].jump[0];
        const auto& law = hmodel.z_jumps[c];
        z += law.kind == HybridModel::ZJump::Kind::Uniform ? law.c * rng.uniform01() : law.c;
    }
}

/// Layered state space with layers {y} x [0, N-y]: Y dies at unit per-capita
/// rate, Z decays toward zero and takes a uniform [0,1] up-jump at every
/// Y-step.
inline HybridModel make_uniform_jump_hybrid(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("make_uniform_jump_hybrid: N >= 1 required");
    std::vector<JumpChannel> channels{{{-1}, AffineFunctional({Rational(1)}, Rational(0))}};
    AffineModel layer(StateSpace::interval(n), JumpKernel(std::move(channels)));
    std::vector<HybridModel::ZJump> jumps{{HybridModel::ZJump::Kind::Uniform, 1.0}};
    std::vector<std::pair<double, double>> bounds;
    for (std::int64_t y = 0; y <= n; ++y) bounds.emplace_back(0.0, static_cast<double>(n - y));
    return HybridModel(std::move(layer), {0.0, 0.0, -1.0}, std::move(jumps), std::move(bounds));
}

/// Product state space {0,...,N} x [0,1]: Y is a symmetric birth-death chain
/// and Z is continuous, relaxing toward Y/N.
inline HybridModel make_mean_reverting_hybrid(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("make_mean_reverting_hybrid: N >= 1 required");
    std::vector<JumpChannel> channels{
        {{-1}, AffineFunctional({Rational(1)}, Rational(0))},
        {{1}, AffineFunctional({Rational(-1)}, Rational(n))}};
    AffineModel layer(StateSpace::interval(n), JumpKernel(std::move(channels)));
    std::vector<HybridModel::ZJump> jumps{{HybridModel::ZJump::Kind::Constant, 0.0},
                                          {HybridModel::ZJump::Kind::Constant, 0.0}};
    std::vector<std::pair<double, double>> bounds(static_cast<std::size_t>(n) + 1, {0.0, 1.0});
    return HybridModel(std::move(layer), {0.0, 1.0 / static_cast<double>(n), -1.0},
                       std::move(jumps), std::move(bounds));
}

/// Monte Carlo check of the martingale M_u(t) = Phi(u,T-t) prod_j
/// Psi_j(u,T-t)^{X_j(t)}: estimates E[M_u(t)] on the grid and reports the
/// largest deviation from M_u(0) together with standard errors.
struct MartingaleReport {
    std::vector<double> grid;
    std::vector<Complex> means;
    std::vector<double> se_re;
    std::vector<double> se_im;
    Complex m0;
    double max_deviation = 0.0;
};

inline MartingaleReport martingale_check(const AffineModel& model, const Point& x0,
                                         const std::vector<Complex>& u, double horizon,
                                         const std::vector<double>& time_grid,
                                         std::size_t n_paths, std::uint64_t seed,
                                         double ode_tol = 1e-12) {
    const KernelDecomposition decomp = decompose_kernel(model, model.dimension());
    const RiccatiSystem sys = build_riccati(decomp);

    MartingaleReport report;
    report.grid = time_grid;
    std::vector<TransformValue> factors;
    for (double t : time_grid) {
        if (t < 0.0 || t > horizon)
            throw std::invalid_argument("martingale_check: grid point outside [0, T]");
        factors.push_back(solve_riccati(sys, u, horizon - t, ode_tol));
    }
    report.m0 = transform_value_at(solve_riccati(sys, u, horizon, ode_tol), x0);

    const detail::IntensityTable table(model);
    const auto& pts = model.space().points();
    const std::size_t start = model.space().index_of(x0);
    const std::size_t g = time_grid.size();
    std::vector<std::vector<Complex>> values(g, std::vector<Complex>(n_paths));
    detail::parallel_for(n_paths, [&](std::size_t p) {
        Rng rng(seed, p);
        std::vector<std::size_t> at_grid(g, start);
        detail::ssa_run(table, start, horizon, rng, [&](double t, std::size_t idx) {
            for (std::size_t i = 0; i < g; ++i)
                if (t <= time_grid[i]) at_grid[i] = idx;
        });
        for (std::size_t i = 0; i < g; ++i)
            values[i][p] = transform_value_at(factors[i], pts[at_grid[i]]);
    });

    for (std::size_t i = 0; i < g; ++i) {
        const std::size_t n = n_paths;
        const Complex mean = detail::pairwise_sum(values[i], 0, n) / static_cast<double>(n);
        report.means.push_back(mean);
        double se_re = 0.0, se_im = 0.0;
        if (n > 1) {
            std::vector<double> dev_re(n), dev_im(n);
            for (std::size_t p = 0; p < n; ++p) {
                const Complex d = values[i][p] - mean;
                dev_re[p] = d.real() * d.real();
                dev_im[p] = d.imag() * d.imag();
            }
            se_re = std::sqrt(detail::pairwise_sum(dev_re, 0, n) / static_cast<double>(n - 1) /
                              static_cast<double>(n));
            se_im = std::sqrt(detail::pairwise_sum(dev_im, 0, n) / static_cast<double>(n - 1) /
                              static_cast<double>(n));
        }
        report.se_re.push_back(se_re);
        report.se_im.push_back(se_im);
        report.max_deviation = std::max(report.max_deviation, std::abs(mean - report.m0));
    }
    return report;
}

} // namespace affine
