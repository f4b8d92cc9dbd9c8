#include <catch2/catch_amalgamated.hpp>

#include "affine/classify.hpp"
#include "affine/counters.hpp"
#include "affine/rng.hpp"

using namespace affine;

namespace {

SimplexRates uniform_rates(std::size_t d, const Rational& value) {
    SimplexRates r;
    for (std::size_t j = 0; j <= d; ++j)
        for (std::size_t k = 0; k <= d; ++k)
            if (j != k) r[{j, k}] = value;
    return r;
}

/// Two independent birth-death components stacked into one 2-d model.
AffineModel independent_product(std::int64_t n1, Rational a1, Rational b1, std::int64_t n2,
                                Rational a2, Rational b2) {
    std::vector<Point> pts;
    for (std::int64_t x = 0; x <= n1; ++x)
        for (std::int64_t y = 0; y <= n2; ++y) pts.push_back({x, y});
    std::vector<JumpChannel> chans;
    chans.push_back({{-1, 0}, AffineFunctional({a1, Rational(0)}, Rational(0))});
    if (b1 > Rational(0))
        chans.push_back({{1, 0}, AffineFunctional({-b1, Rational(0)}, b1 * Rational(n1))});
    chans.push_back({{0, -1}, AffineFunctional({Rational(0), a2}, Rational(0))});
    if (b2 > Rational(0))
        chans.push_back({{0, 1}, AffineFunctional({Rational(0), -b2}, b2 * Rational(n2))});
    return AffineModel(StateSpace(2, std::move(pts)), JumpKernel(std::move(chans)));
}

/// Parity lattice carrying the jump set {(-1,1),(1,-1),(1,1)}; the diagonal
/// up-jump's counter is 2 - (x1+x2)/2, which forces the layered reading.
AffineModel diagonal_jump_model() {
    std::vector<Point> pts{{0, 0}, {1, 1}, {0, 2}, {2, 0}, {2, 2},
                           {1, 3}, {3, 1}, {0, 4}, {4, 0}};
    std::vector<JumpChannel> chans{
        {{-1, 1}, AffineFunctional({Rational(1), Rational(0)}, Rational(0))},
        {{1, -1}, AffineFunctional({Rational(0), Rational(1)}, Rational(0))},
        {{1, 1}, AffineFunctional({Rational(-1, 2), Rational(-1, 2)}, Rational(2))},
    };
    return AffineModel(StateSpace(2, std::move(pts)), JumpKernel(std::move(chans)));
}

} // namespace

TEST_CASE("classify_1d: deterministic") {
    AffineModel m(StateSpace(1, {{2}, {5}}), JumpKernel{});
    const Classification1D c = classify_1d(m);
    CHECK(c.kind == Classification1D::Kind::Deterministic);
}

TEST_CASE("classify_1d: birth-death in normal coordinates") {
    std::vector<JumpChannel> chans{
        {{-1}, AffineFunctional({Rational(2)}, Rational(0))},
        {{1}, AffineFunctional({Rational(-1)}, Rational(3))},
    };
    AffineModel m(StateSpace::interval(3), JumpKernel(std::move(chans)));
    const Classification1D c = classify_1d(m);
    CHECK(c.kind == Classification1D::Kind::BirthDeath);
    CHECK(c.n == 3);
    CHECK(c.alpha_rate == Rational(2));
    CHECK(c.beta_rate == Rational(1));
    CHECK(c.normalizing_map.is_identity());
}

TEST_CASE("classify_1d: shifted and scaled lattice") {
    // E = {5,7,9} with jumps ±2 at rates (x-5)/2 down and (9-x)/2 up.
    std::vector<JumpChannel> chans{
        {{-2}, AffineFunctional({Rational(1, 2)}, Rational(-5, 2))},
        {{2}, AffineFunctional({Rational(-1, 2)}, Rational(9, 2))},
    };
    AffineModel m(StateSpace(1, {{5}, {7}, {9}}), JumpKernel(std::move(chans)));
    REQUIRE(validate_model(m).valid);
    const Classification1D c = classify_1d(m);
    CHECK(c.kind == Classification1D::Kind::BirthDeath);
    CHECK(c.n == 2);
    CHECK(c.alpha_rate == Rational(1));
    CHECK(c.beta_rate == Rational(1));
    CHECK(c.normalizing_map.matrix[0][0] == Rational(1, 2));
    CHECK(c.normalizing_map.offset[0] == Rational(-5, 2));
}

TEST_CASE("classify_1d: pure birth normalizes to a death chain under reflection") {
    std::vector<JumpChannel> chans{{{1}, AffineFunctional({Rational(-2)}, Rational(6))}};
    AffineModel m(StateSpace::interval(3), JumpKernel(std::move(chans)));
    const Classification1D c = classify_1d(m);
    CHECK(c.kind == Classification1D::Kind::BirthDeath);
    CHECK(c.n == 3);
    CHECK(c.alpha_rate == Rational(2));
    CHECK(c.beta_rate == Rational(0));
    CHECK(c.normalizing_map.matrix[0][0] == Rational(-1)); // x -> 3 - x
    CHECK(c.normalizing_map.offset[0] == Rational(3));
}

TEST_CASE("classify_1d round-trips generated parameters exactly") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::int64_t n = 1 + static_cast<std::int64_t>(rng.next_u64() % 5);
        const Rational alpha(1 + static_cast<std::int64_t>(rng.next_u64() % 9),
                             1 + static_cast<std::int64_t>(rng.next_u64() % 3));
        const Rational beta(static_cast<std::int64_t>(rng.next_u64() % 9),
                            1 + static_cast<std::int64_t>(rng.next_u64() % 3));
        const Classification1D c = classify_1d(make_birth_death(n, alpha, beta));
        CHECK(c.kind == Classification1D::Kind::BirthDeath);
        CHECK(c.n == n);
        CHECK(c.alpha_rate == alpha);
        CHECK(c.beta_rate == beta);
    }
}

TEST_CASE("classify_2d: layer example is Layered with identity witness") {
    const Classification2D c = classify_2d(make_layer_example());
    CHECK(c.kind == Classification2D::Case::Layered);
    CHECK(c.witness_map.is_identity());
    // No upward movement in the second coordinate.
    for (const auto& u : c.jump_set) CHECK(u[1] <= 0);
}

TEST_CASE("classify_2d: independent product") {
    const AffineModel m =
        independent_product(3, Rational(2), Rational(1), 2, Rational(1), Rational(1));
    REQUIRE(validate_model(m).valid);
    const Classification2D c = classify_2d(m);
    CHECK(c.kind == Classification2D::Case::IndependentProduct);
    const std::vector<Point> allowed{{-1, 0}, {0, -1}, {1, 0}, {0, 1}};
    for (const auto& u : c.jump_set)
        CHECK(std::find(allowed.begin(), allowed.end(), u) != allowed.end());
    // Non-coordinate counters have the promised shapes N - pi1 or K - pi2.
    for (const auto& jc : c.counters) {
        const auto& lin = jc.functional.linear;
        const bool pi_shape = (lin == RatVec{Rational(1), Rational(0)} ||
                               lin == RatVec{Rational(0), Rational(1)}) &&
                              jc.functional.offset == Rational(0);
        const bool reflected = (lin == RatVec{Rational(-1), Rational(0)} ||
                                lin == RatVec{Rational(0), Rational(-1)}) &&
                               jc.functional.offset.is_integer() &&
                               jc.functional.offset >= Rational(0);
        CHECK((pi_shape || reflected));
    }
}

TEST_CASE("classify_2d: simplex models") {
    const Classification2D full = classify_2d(make_simplex(2, 3, uniform_rates(2, Rational(1))));
    CHECK(full.kind == Classification2D::Case::SimplexType);
    CHECK(full.witness_map.is_identity());
    const std::vector<Point> six{{-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}};
    CHECK(full.jump_set.size() == 6);
    for (const auto& u : full.jump_set)
        CHECK(std::find(six.begin(), six.end(), u) != six.end());

    // Down-jumps only: counter set is exactly {pi1, pi2}.
    SimplexRates down_only;
    down_only[{0, 1}] = Rational(2);
    down_only[{2, 1}] = Rational(1);
    down_only[{0, 2}] = Rational(1);
    down_only[{1, 2}] = Rational(3);
    const Classification2D sub = classify_2d(make_simplex(2, 2, down_only));
    CHECK(sub.kind == Classification2D::Case::SimplexType);
}

TEST_CASE("classify_2d: simplex verdict is stable over sizes and random rates") {
    Rng rng(99);
    for (std::int64_t n = 1; n <= 4; ++n) {
        for (int trial = 0; trial < 8; ++trial) {
            SimplexRates rates;
            const auto draw = [&] {
                return Rational(static_cast<std::int64_t>(rng.next_u64() % 4),
                                1 + static_cast<std::int64_t>(rng.next_u64() % 3));
            };
            for (std::size_t j = 0; j <= 2; ++j)
                for (std::size_t k = 0; k <= 2; ++k)
                    if (j != k) rates[{j, k}] = draw();
            // Keep pi1 and pi2 jump counters alive.
            rates[{0, 1}] = rates[{0, 1}] + Rational(1, 7);
            rates[{0, 2}] = rates[{0, 2}] + Rational(1, 7);
            const AffineModel m = make_simplex(2, n, rates);
            REQUIRE(validate_model(m).valid);
            CHECK(classify_2d(m).kind == Classification2D::Case::SimplexType);
        }
    }
}

TEST_CASE("classify_2d: layered detection with the large jump in the second coordinate") {
    // Swap the two coordinates of the layer example; the witness must then
    // pair pi2 with the large jump's counter.
    const AffineMap swap(RatMat{{Rational(0), Rational(1)}, {Rational(1), Rational(0)}},
                         RatVec{Rational(0), Rational(0)});
    const AffineModel m = apply_transform(make_layer_example(), swap);
    REQUIRE(validate_model(m).valid);
    const Classification2D c = classify_2d(m);
    CHECK(c.kind == Classification2D::Case::Layered);
    for (const auto& u : c.jump_set) CHECK(u[1] <= 0);
    CHECK(std::find(c.jump_set.begin(), c.jump_set.end(), Point{-1, 0}) != c.jump_set.end());
}

TEST_CASE("classify_2d: diagonal up-jump resolves to the layered case") {
    const AffineModel m = diagonal_jump_model();
    REQUIRE(validate_model(m).valid);
    const Classification2D c = classify_2d(m);
    CHECK(c.kind == Classification2D::Case::Layered);
    CHECK_FALSE(c.witness_map.is_identity());
    for (const auto& u : c.jump_set) CHECK(u[1] <= 0);
    const std::vector<Point> expected{{-1, 0}, {1, 0}, {1, -1}};
    for (const auto& u : expected)
        CHECK(std::find(c.jump_set.begin(), c.jump_set.end(), u) != c.jump_set.end());
}

TEST_CASE("classify_2d rejects non-normalized input") {
    // Shift the simplex away from the origin: coordinates stop being counters.
    const AffineModel m = make_simplex(2, 2, uniform_rates(2, Rational(1)));
    const AffineMap shift(AffineMap::identity(2).matrix, {Rational(1), Rational(0)});
    CHECK_THROWS_AS(classify_2d(apply_transform(m, shift)), NotCounterCoordinates);
    CHECK_THROWS_AS(classify_2d(AffineModel(StateSpace::simplex(2, 1), JumpKernel{})),
                    NotCounterCoordinates);
}

TEST_CASE("generator constructors enforce parameter domains") {
    CHECK_THROWS_AS(make_birth_death(0, Rational(1), Rational(0)), std::invalid_argument);
    CHECK_THROWS_AS(make_birth_death(1, Rational(0), Rational(0)), std::invalid_argument);
    CHECK_THROWS_AS(make_birth_death(1, Rational(1), Rational(-1)), std::invalid_argument);
    const AffineModel unit = make_birth_death(1, Rational(1), Rational(0));
    CHECK(unit.space().size() == 2);
    CHECK(unit.kernel().channels().size() == 1);

    SimplexRates bad;
    bad[{0, 3}] = Rational(1);
    CHECK_THROWS_AS(make_simplex(2, 1, bad), std::invalid_argument);
    SimplexRates neg;
    neg[{0, 1}] = Rational(-1);
    CHECK_THROWS_AS(make_simplex(2, 1, neg), std::invalid_argument);
}

TEST_CASE("make_simplex with d = 1 reproduces birth-death") {
    SimplexRates rates;
    rates[{0, 1}] = Rational(2); // jump e0 - e1 = -1 at rate 2 x
    rates[{1, 0}] = Rational(1); // jump e1 - e0 = +1 at rate (N - x)
    const AffineModel via_simplex = make_simplex(1, 4, rates);
    const AffineModel direct = make_birth_death(4, Rational(2), Rational(1));
    REQUIRE(via_simplex.kernel().channels().size() == direct.kernel().channels().size());
    for (std::size_t i = 0; i < direct.kernel().channels().size(); ++i) {
        CHECK(via_simplex.kernel().channels()[i].jump == direct.kernel().channels()[i].jump);
        CHECK(via_simplex.kernel().channels()[i].intensity ==
              direct.kernel().channels()[i].intensity);
    }
}

TEST_CASE("make_simplex with all rates zero is deterministic") {
    const AffineModel m = make_simplex(2, 1, SimplexRates{});
    CHECK(m.kernel().empty());
    CHECK(validate_model(m).valid);
}

TEST_CASE("layer example matches its printed description") {
    const AffineModel m = make_layer_example();
    CHECK(m.space().size() == 13);
    CHECK(validate_model(m).valid);
    CHECK(m.jump_sizes().size() == 4);
}

TEST_CASE("diagnostics: reachability and autonomy probes") {
    // The layer example drains into (0,0): not irreducible.
    CHECK_FALSE(model_diagnostics(make_layer_example()).irreducible);
    // The full simplex with positive rates is irreducible.
    const AffineModel simplex = make_simplex(2, 2, uniform_rates(2, Rational(1)));
    const ModelDiagnostics diag = model_diagnostics(simplex);
    CHECK(diag.irreducible);
    // An independent product has an autonomous coordinate.
    const ModelDiagnostics prod = model_diagnostics(
        independent_product(2, Rational(1), Rational(1), 2, Rational(1), Rational(1)));
    CHECK(prod.autonomous_direction.has_value());
}
