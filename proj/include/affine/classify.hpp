#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "affine/counters.hpp"
#include "affine/model.hpp"

namespace affine {

/// Verdict for d = 1: up to an affine normalization, a compact-state-space
/// model is deterministic or a birth-death chain on {0,...,N} with death rate
/// x*alpha and birth rate (N-x)*beta.
struct Classification1D {
    enum class Kind { Deterministic, BirthDeath };
    Kind kind;
    std::int64_t n = 0;
    Rational alpha_rate = Rational(0);
    Rational beta_rate = Rational(0);
    AffineMap normalizing_map;
};

/// Verdict for d = 2 models in counter coordinates: layered (all vertical
/// movement is downward, possibly after a witness transform), a product of
/// two independent one-dimensional processes, or the lattice-simplex type.
struct Classification2D {
    enum class Case { Layered, IndependentProduct, SimplexType };
    Case kind;
    AffineMap witness_map;
    std::vector<Point> jump_set;       // in witness coordinates
    std::vector<JumpCounter> counters; // aligned with jump_set, witness coordinates
};

inline const char* classification2d_name(Classification2D::Case c) {
    switch (c) {
        case Classification2D::Case::Layered: return "Layered";
        case Classification2D::Case::IndependentProduct: return "IndependentProduct";
        case Classification2D::Case::SimplexType: return "SimplexType";
    }
    return "Unknown";
}

inline Classification1D classify_1d(const AffineModel& model) {
    if (model.dimension() != 1)
        throw std::invalid_argument("classify_1d: model dimension must be 1");

    Classification1D out;
    if (model.kernel().empty()) {
        out.kind = Classification1D::Kind::Deterministic;
        const auto& pts = model.space().points();
        const std::int64_t lo = pts.front()[0];
        out.n = pts.back()[0] - lo;
        out.normalizing_map = AffineMap({{Rational(1)}}, {Rational(-lo)});
        return out;
    }

    const TransformResult tr = build_transform(model);
    const AffineModel normal = apply_transform(model, tr.map);

    const auto& pts = normal.space().points();
    const std::int64_t n = pts.back()[0];
    if (pts.front()[0] != 0 || static_cast<std::int64_t>(pts.size()) != n + 1)
        throw NotAffine1D("transformed state space is not {0,...,N}");

    out.kind = Classification1D::Kind::BirthDeath;
    out.n = n;
    out.normalizing_map = tr.map;
    bool seen_down = false;
    for (const auto& ch : normal.kernel().channels()) {
        const auto& f = ch.intensity;
        if (ch.jump == Point{-1}) {
            // x * alpha: zero offset, positive slope.
            if (!f.offset.is_zero() || !(f.linear[0] > Rational(0)))
                throw NotAffine1D("down-jump intensity " + f.to_string() +
                                  " is not of the form alpha*x");
            out.alpha_rate = f.linear[0];
            seen_down = true;
        } else if (ch.jump == Point{1}) {
            // (N - x) * beta.
            const Rational beta = -f.linear[0];
            if (!(beta > Rational(0)) || f.offset != beta * Rational(n))
                throw NotAffine1D("up-jump intensity " + f.to_string() +
                                  " is not of the form beta*(N-x)");
            out.beta_rate = beta;
        } else {
            throw NotAffine1D("transformed jump " + point_to_string(ch.jump) +
                              " is not a unit step");
        }
    }
    if (!seen_down)
        throw NotAffine1D("no unit down-jump after normalization");
    return out;
}

namespace detail {

inline bool is_coordinate(const AffineFunctional& f, std::size_t j) {
    return f == AffineFunctional::coordinate(f.dimension(), j);
}

inline std::int64_t linf_norm(const Point& u) {
    std::int64_t m = 0;
    for (auto v : u) m = std::max(m, v < 0 ? -v : v);
    return m;
}

} // namespace detail

/// Classifies a valid two-dimensional lattice model whose coordinate
/// projections are both normalized jump counters (i.e. already normalized via
/// build_transform; this function never re-normalizes). The decision order
/// follows the structure theory: a jump of sup-norm >= 2 forces the layered
/// case; otherwise the shape of the counter set decides.
inline Classification2D classify_2d(const AffineModel& model) {
    if (model.dimension() != 2)
        throw std::invalid_argument("classify_2d: model dimension must be 2");
    if (model.kernel().empty())
        throw NotCounterCoordinates("model has no jumps; nothing to classify");

    std::vector<JumpCounter> counters;
    for (const auto& ch : model.kernel().channels())
        counters.push_back(compute_jump_counter(model.space(), ch.jump));

    const AffineFunctional pi1 = AffineFunctional::coordinate(2, 1);
    const AffineFunctional pi2 = AffineFunctional::coordinate(2, 2);
    bool pi1_is_counter = false, pi2_is_counter = false;
    for (const auto& c : counters) {
        pi1_is_counter = pi1_is_counter || c.functional == pi1;
        pi2_is_counter = pi2_is_counter || c.functional == pi2;
    }
    if (!pi1_is_counter || !pi2_is_counter)
        throw NotCounterCoordinates(
            "coordinate projections are not both jump counters; apply build_transform first");

    const auto finish = [&](Classification2D::Case kind, const AffineMap& witness) {
        Classification2D out;
        out.kind = kind;
        out.witness_map = witness;
        const bool ident = witness.is_identity();
        const AffineMap inv = ident ? witness : witness.inverse();
        for (const auto& c : counters) {
            Point jump = ident ? c.jump : witness.apply_jump(c.jump);
            AffineFunctional psi = ident ? c.functional : compose(c.functional, inv);
            out.jump_set.push_back(jump);
            out.counters.push_back({std::move(jump), std::move(psi)});
        }
        return out;
    };

    const auto check_layered = [&](Classification2D out) {
        bool has_left_step = false;
        for (const auto& u : out.jump_set) {
            if (u == Point{-1, 0}) has_left_step = true;
            const bool horizontal = u[1] == 0 && (u[0] == -1 || u[0] == 1);
            const bool downward = u[1] == -1 && u[0] >= 0;
            if (!horizontal && !downward)
                throw UnclassifiableModel("layered witness leaves jump " + point_to_string(u) +
                                          " outside {(-1,0),(1,0)} ∪ {(K,-1)}");
        }
        if (!has_left_step)
            throw UnclassifiableModel("layered case without the unit left step (-1,0)");
        return out;
    };

    // Large jump: the witness pairs the untouched coordinate with the jump's
    // own counter; every other jump then moves weakly downward in it.
    for (const auto& c : counters) {
        if (detail::linf_norm(c.jump) < 2) continue;
        const bool wide = std::llabs(c.jump[0]) >= 2;
        AffineMap witness({wide ? pi1.linear : pi2.linear, c.functional.linear},
                          {Rational(0), c.functional.offset});
        if (!witness.invertible())
            throw UnclassifiableModel("witness (pi, psi_u) for large jump " +
                                      point_to_string(c.jump) + " is singular");
        return check_layered(finish(Classification2D::Case::Layered, witness));
    }

    // No large jumps. Split counters by shape.
    std::vector<const JumpCounter*> extra;
    for (const auto& c : counters)
        if (c.functional != pi1 && c.functional != pi2) extra.push_back(&c);

    if (extra.empty()) {
        // Counter set {pi1, pi2}: sub-simplex kernel on four possible jumps.
        auto out = finish(Classification2D::Case::SimplexType, AffineMap::identity(2));
        for (std::size_t i = 0; i < out.jump_set.size(); ++i) {
            const auto& u = out.jump_set[i];
            const bool ok = out.counters[i].functional == pi1
                                ? (u == Point{-1, 0} || u == Point{-1, 1})
                                : (u == Point{0, -1} || u == Point{1, -1});
            if (!ok)
                throw UnclassifiableModel("jump " + point_to_string(u) +
                                          " incompatible with its coordinate counter");
        }
        return out;
    }

    // A diagonal up-jump forces the layered case via its own counter.
    for (const auto& c : counters) {
        if (c.jump != Point{1, 1}) continue;
        AffineMap witness({pi1.linear, c.functional.linear}, {Rational(0), c.functional.offset});
        if (!witness.invertible())
            throw UnclassifiableModel("witness (pi1, psi_(1,1)) is singular");
        return check_layered(finish(Classification2D::Case::Layered, witness));
    }

    const RatVec diag{Rational(-1), Rational(-1)};
    const RatVec left{Rational(-1), Rational(0)};
    const RatVec down{Rational(0), Rational(-1)};
    const bool all_diag = std::all_of(extra.begin(), extra.end(),
                                      [&](const JumpCounter* c) { return c->functional.linear == diag; });
    if (all_diag) {
        // Extra counters are all N - pi1 - pi2 with one shared level N.
        for (const auto* c : extra)
            if (c->functional.offset != extra.front()->functional.offset)
                throw UnclassifiableModel("two distinct simplex levels among counters");
        auto out = finish(Classification2D::Case::SimplexType, AffineMap::identity(2));
        const std::vector<Point> allowed{{-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}};
        for (const auto& u : out.jump_set)
            if (std::find(allowed.begin(), allowed.end(), u) == allowed.end())
                throw UnclassifiableModel("jump " + point_to_string(u) +
                                          " outside the simplex jump set");
        return out;
    }

    const bool all_axis = std::all_of(extra.begin(), extra.end(), [&](const JumpCounter* c) {
        return (c->functional.linear == left || c->functional.linear == down) &&
               c->functional.offset.is_integer() && c->functional.offset >= Rational(0);
    });
    if (all_axis) {
        auto out = finish(Classification2D::Case::IndependentProduct, AffineMap::identity(2));
        const std::vector<Point> allowed{{-1, 0}, {0, -1}, {1, 0}, {0, 1}};
        for (const auto& u : out.jump_set)
            if (std::find(allowed.begin(), allowed.end(), u) == allowed.end())
                throw UnclassifiableModel("jump " + point_to_string(u) +
                                          " incompatible with an independent product");
        return out;
    }

    std::ostringstream os;
    os << "counter shapes fit no case; offending jump/counter pairs:";
    for (const auto* c : extra)
        os << " " << point_to_string(c->jump) << " -> " << c->functional.to_string() << ";";
    throw UnclassifiableModel(os.str());
}

/// Birth-death model on {0,...,N}: death rate x*alpha, birth rate (N-x)*beta.
inline AffineModel make_birth_death(std::int64_t n, const Rational& alpha_rate,
                                    const Rational& beta_rate) {
    if (n < 1) throw std::invalid_argument("make_birth_death: N >= 1 required");
    if (!(alpha_rate > Rational(0)))
        throw std::invalid_argument("make_birth_death: alpha_rate > 0 required");
    if (beta_rate < Rational(0))
        throw std::invalid_argument("make_birth_death: beta_rate >= 0 required");
    std::vector<JumpChannel> channels;
    channels.push_back({{-1}, AffineFunctional({alpha_rate}, Rational(0))});
    if (beta_rate > Rational(0))
        channels.push_back({{1}, AffineFunctional({-beta_rate}, beta_rate * Rational(n))});
    return AffineModel(StateSpace::interval(n), JumpKernel(std::move(channels)));
}

/// Rates for the simplex model, keyed by ordered pairs (j,k), j != k, of
/// vertex indices 0..d; the jump e_j - e_k (with e_0 = 0) fires with
/// intensity lambda(j,k) * pi_k(x), where pi_0 = N - x_1 - ... - x_d.
using SimplexRates = std::map<std::pair<std::size_t, std::size_t>, Rational>;

/// The lattice-simplex model on {x in N^d : sum x_j <= N}. Channels are laid
/// out with the coordinate counters pi_1, ..., pi_d first, so the computed
/// structural transform is the identity whenever those counters are active.
inline AffineModel make_simplex(std::size_t d, std::int64_t n, const SimplexRates& rates) {
    if (d < 1) throw std::invalid_argument("make_simplex: d >= 1 required");
    if (n < 1) throw std::invalid_argument("make_simplex: N >= 1 required");
    for (const auto& [jk, rate] : rates) {
        if (jk.first > d || jk.second > d || jk.first == jk.second)
            throw std::invalid_argument("make_simplex: rate index out of range");
        if (rate < Rational(0))
            throw std::invalid_argument("make_simplex: rates must be nonnegative");
    }

    const auto rate_of = [&](std::size_t j, std::size_t k) {
        auto it = rates.find({j, k});
        return it == rates.end() ? Rational(0) : it->second;
    };
    const auto counter_of = [&](std::size_t k) {
        if (k == 0) {
            RatVec lin(d, Rational(-1));
            return AffineFunctional(std::move(lin), Rational(n));
        }
        return AffineFunctional::coordinate(d, k);
    };
    const auto jump_of = [&](std::size_t j, std::size_t k) {
        Point u(d, 0);
        if (j >= 1) u[j - 1] += 1;
        if (k >= 1) u[k - 1] -= 1;
        return u;
    };

    std::vector<JumpChannel> channels;
    // k ascending with pi_0 channels last, j ascending within each k.
    std::vector<std::size_t> k_order;
    for (std::size_t k = 1; k <= d; ++k) k_order.push_back(k);
    k_order.push_back(0);
    for (std::size_t k : k_order) {
        for (std::size_t j = 0; j <= d; ++j) {
            if (j == k) continue;
            const Rational rate = rate_of(j, k);
            if (rate.is_zero()) continue;
            channels.push_back({jump_of(j, k), rate * counter_of(k)});
        }
    }
    return AffineModel(StateSpace::simplex(d, n), JumpKernel(std::move(channels)));
}

/// The 13-state, three-layer model with jump sizes
/// {(-1,0),(0,-1),(2,-1),(3,-1)}, all at unit rates: the left step counts
/// down pi_1, every other jump counts down pi_2.
inline AffineModel make_layer_example() {
    std::vector<Point> states{{0, 2}, {0, 1}, {1, 1}, {2, 1}, {3, 1}, {0, 0}, {1, 0},
                              {2, 0}, {3, 0}, {4, 0}, {5, 0}, {6, 0}, {7, 0}};
    const AffineFunctional pi1 = AffineFunctional::coordinate(2, 1);
    const AffineFunctional pi2 = AffineFunctional::coordinate(2, 2);
    std::vector<JumpChannel> channels{{{-1, 0}, pi1},
                                      {{0, -1}, pi2},
                                      {{2, -1}, pi2},
                                      {{3, -1}, pi2}};
    return AffineModel(StateSpace(2, std::move(states)), JumpKernel(std::move(channels)));
}

/// Best-effort structural diagnostics. Neither check gates classification:
/// irreducibility is decided by reachability on the finite jump graph, and
/// the autonomy probe only tests the candidate directions given by counters
/// and coordinates.
struct ModelDiagnostics {
    bool irreducible = false;
    std::optional<RatVec> autonomous_direction;
};

inline ModelDiagnostics model_diagnostics(const AffineModel& model) {
    ModelDiagnostics diag;
    const auto& pts = model.space().points();
    const std::size_t n = pts.size();

    // Reachability from each state along positive-intensity edges.
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& ch : model.kernel().channels())
            if (ch.intensity(pts[i]) > Rational(0))
                adj[i].push_back(model.space().index_of(point_add(pts[i], ch.jump)));
    diag.irreducible = true;
    for (std::size_t s = 0; s < n && diag.irreducible; ++s) {
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{s};
        seen[s] = true;
        std::size_t count = 1;
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (auto w : adj[v])
                if (!seen[w]) {
                    seen[w] = true;
                    ++count;
                    stack.push_back(w);
                }
        }
        diag.irreducible = count == n;
    }

    // Autonomy probe: direction a is autonomous when, for each projected jump
    // height s = <a,u> != 0, the total intensity of the channels attaining s
    // is an affine function of <a,x> alone.
    std::vector<RatVec> candidates;
    for (std::size_t j = 1; j <= model.dimension(); ++j)
        candidates.push_back(AffineFunctional::coordinate(model.dimension(), j).linear);
    for (const auto& ch : model.kernel().channels()) {
        try {
            candidates.push_back(compute_jump_counter(model.space(), ch.jump).functional.linear);
        } catch (const NoCounter&) {
            // Direction probe only; a missing counter is not an error here.
        }
    }
    for (const auto& a : candidates) {
        std::map<Rational, AffineFunctional> grouped;
        const AffineFunctional a_fun(a, Rational(0));
        bool ok = true;
        for (const auto& ch : model.kernel().channels()) {
            const Rational s = a_fun.increment(ch.jump);
            if (s.is_zero()) continue;
            auto [it, fresh] = grouped.try_emplace(
                s, AffineFunctional(RatVec(model.dimension(), Rational(0)), Rational(0)));
            it->second = fresh ? ch.intensity : it->second + ch.intensity;
        }
        for (const auto& [s, total] : grouped) {
            // total.linear must be proportional to a.
            RatMat rows{total.linear, a};
            if (linalg::rank(rows) > 1) {
                ok = false;
                break;
            }
        }
        if (ok && !grouped.empty()) {
            diag.autonomous_direction = a;
            break;
        }
    }
    return diag;
}

} // namespace affine
