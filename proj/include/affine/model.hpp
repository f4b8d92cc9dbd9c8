#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "affine/affine_map.hpp"
#include "affine/errors.hpp"
#include "affine/linalg.hpp"

namespace affine {

/// Dimension of the affine hull of a nonempty set of lattice points,
/// computed exactly over rationals.
inline std::size_t affine_span_dim(const std::vector<Point>& points) {
    if (points.empty()) throw std::invalid_argument("affine_span_dim: empty point set");
    const std::size_t d = points[0].size();
    RatMat diffs;
    for (std::size_t i = 1; i < points.size(); ++i) {
        RatVec row(d);
        for (std::size_t j = 0; j < d; ++j) row[j] = Rational(points[i][j] - points[0][j]);
        diffs.push_back(std::move(row));
    }
    return linalg::rank(std::move(diffs));
}

/// Finite set of integer lattice points in Z^d. Points are stored sorted and
/// deduplicated; the affine span dimension is recorded at construction.
class StateSpace {
public:
    StateSpace(std::size_t dimension, std::vector<Point> points)
        : dimension_(dimension), points_(std::move(points)) {
        if (dimension_ == 0) throw std::invalid_argument("StateSpace: dimension must be positive");
        if (points_.empty()) throw std::invalid_argument("StateSpace: empty state space");
        for (const auto& p : points_)
            if (p.size() != dimension_)
                throw std::invalid_argument("StateSpace: point dimension mismatch at " +
                                            point_to_string(p));
        std::sort(points_.begin(), points_.end());
        points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
        span_dim_ = affine_span_dim(points_);
    }

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return points_.size(); }
    std::size_t span_dim() const noexcept { return span_dim_; }
    const std::vector<Point>& points() const noexcept { return points_; }

    bool contains(const Point& p) const {
        return std::binary_search(points_.begin(), points_.end(), p);
    }

    /// Index of p in the sorted point list; throws when absent.
    std::size_t index_of(const Point& p) const {
        auto it = std::lower_bound(points_.begin(), points_.end(), p);
        if (it == points_.end() || *it != p)
            throw std::invalid_argument("state " + point_to_string(p) + " not in state space");
        return static_cast<std::size_t>(it - points_.begin());
    }

    /// {0,...,N} in Z^1.
    static StateSpace interval(std::int64_t n) {
        if (n < 0) throw std::invalid_argument("interval: N must be nonnegative");
        std::vector<Point> pts;
        for (std::int64_t i = 0; i <= n; ++i) pts.push_back({i});
        return {1, std::move(pts)};
    }

    /// {x in N^d : x_1 + ... + x_d <= N}.
    static StateSpace simplex(std::size_t d, std::int64_t n) {
        if (d == 0) throw std::invalid_argument("simplex: dimension must be positive");
        if (n < 0) throw std::invalid_argument("simplex: N must be nonnegative");
        std::vector<Point> pts;
        Point cur(d, 0);
        enumerate_simplex(pts, cur, 0, n);
        return {d, std::move(pts)};
    }

private:
    static void enumerate_simplex(std::vector<Point>& out, Point& cur, std::size_t idx,
                                  std::int64_t budget) {
        if (idx == cur.size()) {
            out.push_back(cur);
            return;
        }
        for (std::int64_t v = 0; v <= budget; ++v) {
            cur[idx] = v;
            enumerate_simplex(out, cur, idx + 1, budget - v);
        }
        cur[idx] = 0;
    }

    std::size_t dimension_;
    std::vector<Point> points_;
    std::size_t span_dim_ = 0;
};

/// One atom of the jump kernel: a nonzero lattice jump vector together with
/// its affine intensity x -> lambda_u(x).
struct JumpChannel {
    Point jump;
    AffineFunctional intensity;
};

/// Finite-atom jump kernel F(x,.) = sum_u lambda_u(x) delta_u. Duplicate jump
/// vectors are merged by summing intensities at construction (measures add).
class JumpKernel {
public:
    JumpKernel() = default;

    explicit JumpKernel(std::vector<JumpChannel> channels) {
        for (auto& ch : channels) {
            if (point_is_zero(ch.jump))
                throw std::invalid_argument("JumpKernel: zero jump vector");
            auto it = std::find_if(channels_.begin(), channels_.end(),
                                   [&](const JumpChannel& c) { return c.jump == ch.jump; });
            if (it == channels_.end())
                channels_.push_back(std::move(ch));
            else
                it->intensity = it->intensity + ch.intensity;
        }
    }

    const std::vector<JumpChannel>& channels() const noexcept { return channels_; }
    bool empty() const noexcept { return channels_.empty(); }

private:
    std::vector<JumpChannel> channels_;
};

/// Affine model (b, 0, F) on a finite lattice state space. There is no
/// diffusion field: compact state spaces admit none, so it is absent by
/// construction. The optional drift map is carried only for the hybrid
/// extension and ignored by the pure-jump machinery.
///
/// Channels whose intensity vanishes identically on E are dropped at
/// construction: they contribute nothing to the supports of F(x,.), so their
/// jump vectors are not jump sizes of the model.
class AffineModel {
public:
    AffineModel(StateSpace space, JumpKernel kernel,
                std::optional<AffineMap> drift = std::nullopt)
        : space_(std::move(space)), drift_(std::move(drift)) {
        std::vector<JumpChannel> effective;
        for (const auto& ch : kernel.channels()) {
            if (ch.intensity.dimension() != space_.dimension())
                throw std::invalid_argument("channel intensity dimension mismatch");
            if (ch.jump.size() != space_.dimension())
                throw std::invalid_argument("channel jump dimension mismatch");
            bool nonzero_on_space = false;
            for (const auto& x : space_.points()) {
                if (!ch.intensity(x).is_zero()) {
                    nonzero_on_space = true;
                    break;
                }
            }
            if (nonzero_on_space) effective.push_back(ch);
        }
        kernel_ = JumpKernel(std::move(effective));
    }

    const StateSpace& space() const noexcept { return space_; }
    const JumpKernel& kernel() const noexcept { return kernel_; }
    const std::optional<AffineMap>& drift() const noexcept { return drift_; }
    std::size_t dimension() const noexcept { return space_.dimension(); }

    /// Jump sizes S = union over x of supp F(x,.), in channel order.
    std::vector<Point> jump_sizes() const {
        std::vector<Point> s;
        for (const auto& ch : kernel_.channels()) s.push_back(ch.jump);
        return s;
    }

    /// Total intensity Lambda(x), exact.
    Rational total_intensity(const Point& x) const {
        Rational sum(0);
        for (const auto& ch : kernel_.channels()) sum += ch.intensity(x);
        return sum;
    }

private:
    StateSpace space_;
    JumpKernel kernel_;
    std::optional<AffineMap> drift_;
};

/// Structural validation report. `errors` invalidate the model; `warnings`
/// flag degeneracies (affine span below the ambient dimension) that block the
/// counter machinery but not simulation -- the canonical Markov-chain
/// embedding lives on the unit vectors, whose span is one short of full.
struct ValidationReport {
    enum class IssueKind { NegativeIntensity, SupportViolation, DegenerateSpan };

    struct Issue {
        IssueKind kind;
        std::optional<Point> state;
        std::optional<Point> jump;
        std::string detail;
    };

    bool valid = true;
    std::size_t dimension = 0;
    std::size_t num_states = 0;
    std::size_t num_channels = 0;
    std::size_t span_dim = 0;
    // Finite-support kernels always have a finite second moment near zero.
    bool levy_integrable = true;
    std::vector<Issue> errors;
    std::vector<Issue> warnings;
};

inline const char* issue_kind_name(ValidationReport::IssueKind k) {
    switch (k) {
        case ValidationReport::IssueKind::NegativeIntensity: return "NegativeIntensity";
        case ValidationReport::IssueKind::SupportViolation: return "SupportViolation";
        case ValidationReport::IssueKind::DegenerateSpan: return "DegenerateSpan";
    }
    return "Unknown";
}

/// Checks, for every x in E and channel (u, lambda_u): lambda_u(x) >= 0, and
/// lambda_u(x) > 0 implies x + u in E. All checks are exact.
inline ValidationReport validate_model(const AffineModel& model) {
    ValidationReport report;
    report.dimension = model.dimension();
    report.num_states = model.space().size();
    report.num_channels = model.kernel().channels().size();
    report.span_dim = model.space().span_dim();

    for (const auto& ch : model.kernel().channels()) {
        for (const auto& x : model.space().points()) {
            const Rational v = ch.intensity(x);
            if (v < Rational(0)) {
                report.errors.push_back({ValidationReport::IssueKind::NegativeIntensity, x,
                                         ch.jump,
                                         "lambda_" + point_to_string(ch.jump) + "(" +
                                             point_to_string(x) + ") = " + v.to_string()});
            } else if (v > Rational(0) && !model.space().contains(point_add(x, ch.jump))) {
                report.errors.push_back({ValidationReport::IssueKind::SupportViolation, x,
                                         ch.jump,
                                         "lambda_" + point_to_string(ch.jump) + "(" +
                                             point_to_string(x) + ") = " + v.to_string() +
                                             " > 0 but " +
                                             point_to_string(point_add(x, ch.jump)) +
                                             " is not a state"});
            }
        }
    }
    if (report.span_dim < report.dimension) {
        report.warnings.push_back({ValidationReport::IssueKind::DegenerateSpan, std::nullopt,
                                   std::nullopt,
                                   "affine span has dimension " +
                                       std::to_string(report.span_dim) + " < " +
                                       std::to_string(report.dimension)});
    }
    report.valid = report.errors.empty();
    return report;
}

/// Views an n-state Markov chain with rate matrix Q as an n-dimensional
/// affine model on the unit vectors: one channel per ordered pair (i,j) with
/// q_ij > 0, jump e_j - e_i and intensity q_ij * x_i.
inline AffineModel embed_markov_chain(const RatMat& q) {
    const std::size_t n = q.size();
    if (n == 0) throw MalformedRateMatrix("rate matrix is empty");
    for (std::size_t i = 0; i < n; ++i) {
        if (q[i].size() != n) throw MalformedRateMatrix("rate matrix is not square");
        Rational row_sum(0);
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && q[i][j] < Rational(0))
                throw MalformedRateMatrix("negative off-diagonal rate q[" + std::to_string(i) +
                                          "][" + std::to_string(j) + "] = " +
                                          q[i][j].to_string());
            row_sum += q[i][j];
        }
        if (!row_sum.is_zero())
            throw MalformedRateMatrix("row " + std::to_string(i) + " sums to " +
                                      row_sum.to_string() + ", expected 0");
    }

    std::vector<Point> states;
    for (std::size_t i = 0; i < n; ++i) {
        Point e(n, 0);
        e[i] = 1;
        states.push_back(std::move(e));
    }
    std::vector<JumpChannel> channels;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || q[i][j].is_zero()) continue;
            Point jump(n, 0);
            jump[j] = 1;
            jump[i] = -1;
            RatVec lin(n, Rational(0));
            lin[i] = q[i][j];
            channels.push_back({std::move(jump), AffineFunctional(std::move(lin), Rational(0))});
        }
    }
    return AffineModel(StateSpace(n, std::move(states)), JumpKernel(std::move(channels)));
}

/// Pushes a model through an invertible affine map: states T(x), jumps A u,
/// intensities lambda ∘ T^{-1}. Images must stay on the lattice.
inline AffineModel apply_transform(const AffineModel& model, const AffineMap& map) {
    if (!map.invertible())
        throw std::invalid_argument("apply_transform: map is not invertible");
    const AffineMap inv = map.inverse();
    std::vector<Point> states;
    for (const auto& x : model.space().points()) states.push_back(map.apply_lattice(x));
    std::vector<JumpChannel> channels;
    for (const auto& ch : model.kernel().channels())
        channels.push_back({map.apply_jump(ch.jump), compose(ch.intensity, inv)});
    return AffineModel(StateSpace(model.dimension(), std::move(states)),
                       JumpKernel(std::move(channels)));
}

} // namespace affine
