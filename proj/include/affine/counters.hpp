#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "affine/errors.hpp"
#include "affine/model.hpp"

namespace affine {

/// A normalized jump counter: an affine functional psi_u, nonnegative and
/// integer-valued on E, with psi_u(u) - psi_u(0) = -1, whose positivity at x
/// guarantees x + u stays in E. It counts the jumps of size u that can still
/// occur before the process reaches ker psi_u.
struct JumpCounter {
    Point jump;
    AffineFunctional functional;
};

/// K0 = {x in E : x + u not in E}: the states from which a jump of size u
/// would exit the state space. For a valid counter this is exactly the
/// intersection of E with the counter's kernel hyperplane.
inline std::vector<Point> boundary_set(const StateSpace& space, const Point& u) {
    if (point_is_zero(u)) throw std::invalid_argument("boundary_set: u must be nonzero");
    std::vector<Point> out;
    for (const auto& x : space.points())
        if (!space.contains(point_add(x, u))) out.push_back(x);
    return out;
}

/// Solves for the affine functional vanishing on the given boundary points,
/// normalized so its increment along u is -1. Exposed separately so the
/// uniqueness property (any spanning subset of the boundary set yields the
/// same functional) can be exercised directly.
inline AffineFunctional counter_from_boundary(const std::vector<Point>& boundary, const Point& u,
                                              std::size_t d) {
    // Rows [x | 1] acting on unknowns (a, c): <a,x> + c = 0 for all boundary x.
    RatMat constraints;
    for (const auto& x : boundary) {
        RatVec row(d + 1);
        for (std::size_t j = 0; j < d; ++j) row[j] = Rational(x[j]);
        row[d] = Rational(1);
        constraints.push_back(std::move(row));
    }
    auto basis = linalg::nullspace(std::move(constraints), d + 1);
    if (basis.size() != 1) {
        std::ostringstream os;
        os << "jump " << point_to_string(u) << ": boundary set of size " << boundary.size()
           << " has affine hull of dimension != d-1 (nullspace dimension " << basis.size()
           << ")";
        throw NoCounter(os.str());
    }
    AffineFunctional psi(RatVec(basis[0].begin(), basis[0].begin() + d), basis[0][d]);
    const Rational inc = psi.increment(u);
    if (inc.is_zero())
        throw NoCounter("jump " + point_to_string(u) +
                        ": kernel hyperplane is parallel to the jump direction");
    return (Rational(-1) / inc) * psi;
}

/// The unique normalized jump counter for u on the given state space.
/// All counter invariants are verified exactly before returning; any failure
/// signals that u cannot be a jump size of an affine process on E.
inline JumpCounter compute_jump_counter(const StateSpace& space, const Point& u) {
    if (point_is_zero(u))
        throw std::invalid_argument("compute_jump_counter: u must be nonzero");
    const std::size_t d = space.dimension();
    AffineFunctional psi = counter_from_boundary(boundary_set(space, u), u, d);

    bool attains_one = false;
    for (const auto& x : space.points()) {
        const Rational v = psi(x);
        if (v < Rational(0) || !v.is_integer())
            throw NoCounter("jump " + point_to_string(u) + ": counter value " + v.to_string() +
                            " at " + point_to_string(x) + " is not a nonnegative integer");
        if (v > Rational(0) && !space.contains(point_add(x, u)))
            throw NoCounter("jump " + point_to_string(u) + ": counter is positive at " +
                            point_to_string(x) + " but the jump exits the state space");
        if (v == Rational(1)) attains_one = true;
    }
    if (!attains_one)
        throw NoCounter("jump " + point_to_string(u) +
                        ": counter never attains the value 1 on the state space");
    return {u, std::move(psi)};
}

/// The three allowed interaction patterns between two normalized counters,
/// with alpha = psi_u(v) - psi_u(0) and beta = psi_v(u) - psi_v(0):
/// identical counters (alpha = beta = -1), opposite jumps (alpha = beta = 1,
/// u = -v), or orthogonal (one of them ignores the other's jump).
struct PairwiseCase {
    enum class Kind { SameCounter, Opposite, Orthogonal };
    std::int64_t alpha;
    std::int64_t beta;
    Kind kind;
};

inline const char* pairwise_kind_name(PairwiseCase::Kind k) {
    switch (k) {
        case PairwiseCase::Kind::SameCounter: return "SameCounter";
        case PairwiseCase::Kind::Opposite: return "Opposite";
        case PairwiseCase::Kind::Orthogonal: return "Orthogonal";
    }
    return "Unknown";
}

inline PairwiseCase pairwise_case(const JumpCounter& cu, const JumpCounter& cv) {
    const Rational alpha_r = cu.functional.increment(cv.jump);
    const Rational beta_r = cv.functional.increment(cu.jump);
    const auto describe = [&](const std::string& why) {
        return "jumps " + point_to_string(cu.jump) + ", " + point_to_string(cv.jump) +
               " with (alpha, beta) = (" + alpha_r.to_string() + ", " + beta_r.to_string() +
               "): " + why;
    };
    if (!alpha_r.is_integer() || !beta_r.is_integer())
        throw TrichotomyViolation(describe("non-integer increment"));
    const std::int64_t alpha = alpha_r.as_integer();
    const std::int64_t beta = beta_r.as_integer();

    if (alpha == -1 && beta == -1) {
        if (cu.functional != cv.functional)
            throw TrichotomyViolation(describe("both decrements are -1 but counters differ"));
        return {alpha, beta, PairwiseCase::Kind::SameCounter};
    }
    if (alpha == 1 && beta == 1) {
        if (cu.jump != point_neg(cv.jump))
            throw TrichotomyViolation(describe("(1, 1) requires opposite jumps"));
        return {alpha, beta, PairwiseCase::Kind::Opposite};
    }
    if (alpha >= 0 && beta >= 0 && (alpha == 0 || beta == 0))
        return {alpha, beta, PairwiseCase::Kind::Orthogonal};
    throw TrichotomyViolation(describe("no admissible case matches"));
}

/// The structural transform of a valid model: an invertible affine map T with
/// T(E) inside N^k x Z^(d-k), whose first k components are a basis of jump
/// counters. Every normalized counter of the model is an affine combination
/// of {1, basis counters}.
struct TransformResult {
    AffineMap map;
    std::size_t k = 0;
    std::vector<JumpCounter> counter_basis;
};

namespace detail {

// Rank of the functional family {1} ∪ fs, as rows [linear | offset].
inline std::size_t functional_family_rank(const std::vector<AffineFunctional>& fs,
                                          std::size_t d) {
    RatMat rows;
    RatVec one(d + 1, Rational(0));
    one[d] = Rational(1);
    rows.push_back(std::move(one));
    for (const auto& f : fs) {
        RatVec row(d + 1);
        for (std::size_t j = 0; j < d; ++j) row[j] = f.linear[j];
        row[d] = f.offset;
        rows.push_back(std::move(row));
    }
    return linalg::rank(std::move(rows));
}

} // namespace detail

/// Computes the counter of every channel jump, checks the pairwise
/// trichotomy, selects a maximal independent counter basis (greedy in channel
/// declaration order), and extends it to an invertible T by appending the
/// standard basis directions with smallest indices that keep the matrix
/// nonsingular. A model without jumps gets k = 0 and T = identity.
inline TransformResult build_transform(const AffineModel& model) {
    const std::size_t d = model.dimension();
    std::vector<JumpCounter> counters;
    for (const auto& ch : model.kernel().channels())
        counters.push_back(compute_jump_counter(model.space(), ch.jump));

    for (std::size_t i = 0; i < counters.size(); ++i) {
        for (std::size_t j = i + 1; j < counters.size(); ++j) {
            try {
                pairwise_case(counters[i], counters[j]);
            } catch (const TrichotomyViolation& e) {
                throw InconsistentModel(e.what());
            }
        }
    }

    TransformResult result;
    std::vector<AffineFunctional> selected;
    for (const auto& c : counters) {
        auto candidate = selected;
        candidate.push_back(c.functional);
        if (detail::functional_family_rank(candidate, d) == candidate.size() + 1) {
            selected = std::move(candidate);
            result.counter_basis.push_back(c);
        }
    }
    result.k = result.counter_basis.size();

    // First k rows of T are the basis counters; the linear parts of an
    // independent counter family are themselves independent.
    RatMat rows;
    RatVec offsets;
    for (const auto& c : result.counter_basis) {
        rows.push_back(c.functional.linear);
        offsets.push_back(c.functional.offset);
    }
    for (std::size_t i = 0; i < d && rows.size() < d; ++i) {
        RatVec e(d, Rational(0));
        e[i] = Rational(1);
        auto candidate = rows;
        candidate.push_back(e);
        if (linalg::rank(candidate) == rows.size() + 1) {
            rows.push_back(std::move(e));
            offsets.push_back(Rational(0));
        }
    }
    result.map = AffineMap(std::move(rows), std::move(offsets));
    if (!result.map.invertible())
        throw InconsistentModel("transform extension failed to produce an invertible map");
    return result;
}

} // namespace affine
