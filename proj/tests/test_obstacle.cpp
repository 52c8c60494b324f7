#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "panocnav/obstacle.hpp"

using namespace panocnav;

namespace {

std::vector<ConstraintExpr> parse_all(std::initializer_list<const char*> texts) {
    std::vector<ConstraintExpr> out;
    for (const char* t : texts) out.push_back(ConstraintExpr::parse(t));
    return out;
}

ObstacleSpec unit_disc() {
    return ObstacleSpec::from_pair(parse_all({"1 - x^2 - y^2"}),
                                   parse_all({"1 - x^2 - y^2"}), "disc");
}

ObstacleSpec half_disc() {
    auto exprs = parse_all({"x^2 + y^2 - 1", "4 - x^2 - y^2", "x"});
    return ObstacleSpec::from_pair(exprs, exprs, "half_disc");
}

// independent oracle: central finite differences of 0.5*mu*psi^2
void check_penalty_gradient_fd(const ObstacleSpec& ob, const Position& z, double mu,
                               double tol = 1e-5) {
    auto value = [&](double x, double y) {
        double psi = eval_psi(ob, {x, y});
        return 0.5 * mu * psi * psi;
    };
    const double h = 1e-6;
    double fdx = (value(z.x + h, z.y) - value(z.x - h, z.y)) / (2 * h);
    double fdy = (value(z.x, z.y + h) - value(z.x, z.y - h)) / (2 * h);
    PenaltyEval pe = eval_penalty_gradient(ob, z, mu);
    double scale_x = std::max({1.0, std::abs(fdx), std::abs(pe.grad_x)});
    double scale_y = std::max({1.0, std::abs(fdy), std::abs(pe.grad_y)});
    CHECK(std::abs(pe.grad_x - fdx) / scale_x <= tol);
    CHECK(std::abs(pe.grad_y - fdy) / scale_y <= tol);
}

}  // namespace

TEST_CASE("psi of the unit disc") {
    ObstacleSpec disc = unit_disc();
    CHECK(eval_psi(disc, {2.0, 0.0}) == 0.0);
    CHECK(eval_psi(disc, {0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(eval_psi(disc, {1.0, 0.0}) == 0.0);  // boundary contributes a zero hinge
}

TEST_CASE("psi of the half disc at (1.5, 0)") {
    // hand evaluation: 1.25 * 1.75 * 1.5
    CHECK(eval_psi(half_disc(), {1.5, 0.0}) == doctest::Approx(3.28125).epsilon(1e-14));
}

TEST_CASE("penalty value and gradient") {
    ObstacleSpec disc = unit_disc();

    SUBCASE("outside: both vanish") {
        PenaltyEval pe = eval_penalty_gradient(disc, {2.0, 0.0}, 10.0);
        CHECK(pe.value == 0.0);
        CHECK(pe.grad_x == 0.0);
        CHECK(pe.grad_y == 0.0);
    }
    SUBCASE("inside at (0.5, 0), mu = 1") {
        PenaltyEval pe = eval_penalty_gradient(disc, {0.5, 0.0}, 1.0);
        CHECK(pe.value == doctest::Approx(0.28125).epsilon(1e-14));
        // mu * psi * grad psi = 0.75 * (-1, 0)
        CHECK(pe.grad_x == doctest::Approx(-0.75).epsilon(1e-12));
        CHECK(pe.grad_y == doctest::Approx(0.0));
        check_penalty_gradient_fd(disc, {0.5, 0.0}, 1.0);
    }
    SUBCASE("symmetry center: zero gradient") {
        PenaltyEval pe = eval_penalty_gradient(disc, {0.0, 0.0}, 5.0);
        CHECK(pe.grad_x == 0.0);
        CHECK(pe.grad_y == 0.0);
        CHECK(pe.value == doctest::Approx(2.5));
    }
}

TEST_CASE("penalty gradient matches finite differences per obstacle family") {
    struct Family {
        const char* name;
        ObstacleSpec spec;
        double range;
    };
    auto crescent_exprs = parse_all({"y - x^2", "1 + x^2/2 - y"});
    auto rack_exprs = parse_all(
        {"sin(2*3.141592653589793*x - 1.5707963267948966) + 2 - y", "y", "x", "3 - x"});
    auto box_exprs = parse_all({"x + 1", "1 - x", "y + 1", "1 - y"});
    auto ellipse_exprs = parse_all({"1 - (x - 0.2)^2/2.25 - (y + 0.1)^2/0.64"});
    Family families[] = {
        {"disc", unit_disc(), 1.6},
        {"ellipse", ObstacleSpec::from_pair(ellipse_exprs, ellipse_exprs, ""), 2.2},
        {"polytope", ObstacleSpec::from_pair(box_exprs, box_exprs, ""), 1.6},
        {"crescent", ObstacleSpec::from_pair(crescent_exprs, crescent_exprs, ""), 2.0},
        {"rack", ObstacleSpec::from_pair(rack_exprs, rack_exprs, ""), 3.2},
    };

    std::mt19937 rng(17);
    for (const Family& family : families) {
        CAPTURE(family.name);
        std::uniform_real_distribution<double> point(-family.range, family.range);
        int accepted = 0;
        while (accepted < 1000) {
            Position z{point(rng), point(rng)};
            // keep a margin from the hinge kinks {h_i = 0}
            bool near_kink = false;
            for (const auto& h : family.spec.constraints)
                if (std::abs(h.eval(z.x, z.y)) < 1e-4) near_kink = true;
            if (near_kink) continue;
            check_penalty_gradient_fd(family.spec, z, 100.0);
            ++accepted;
        }
    }
}

TEST_CASE("psi is nonnegative and vanishes exactly outside") {
    auto crescent_exprs = parse_all({"y - x^2", "1 + x^2/2 - y"});
    ObstacleSpec crescent = ObstacleSpec::from_pair(crescent_exprs, crescent_exprs, "");
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> point(-3.0, 3.0);
    for (int i = 0; i < 2000; ++i) {
        Position z{point(rng), point(rng)};
        double psi = eval_psi(crescent, z);
        CHECK(psi >= 0.0);
        bool inside = true;
        for (const auto& h : crescent.constraints)
            if (h.eval(z.x, z.y) <= 0.0) inside = false;
        if (inside)
            CHECK(psi > 0.0);
        else
            CHECK(psi == 0.0);
    }
}

TEST_CASE("penalty is continuous across the boundary") {
    ObstacleSpec disc = unit_disc();
    // points just outside the circle r = 1
    for (int i = 0; i < 64; ++i) {
        double angle = i * 0.1;
        double r = 1.0 + 1e-7;
        Position z{r * std::cos(angle), r * std::sin(angle)};
        PenaltyEval pe = eval_penalty_gradient(disc, z, 1e4);
        CHECK(std::abs(pe.value) <= 1e-12);
    }
}

TEST_CASE("scaling mu scales the penalty exactly") {
    ObstacleSpec hd = half_disc();
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> point(-2.5, 2.5);
    std::uniform_real_distribution<double> factor(0.25, 8.0);
    for (int i = 0; i < 500; ++i) {
        Position z{point(rng), point(rng)};
        double c = factor(rng);
        PenaltyEval base = eval_penalty_gradient(hd, z, 1.0);
        PenaltyEval scaled = eval_penalty_gradient(hd, z, c);
        CHECK(scaled.value == doctest::Approx(c * base.value).epsilon(1e-14));
        CHECK(scaled.grad_x == doctest::Approx(c * base.grad_x).epsilon(1e-14));
        CHECK(scaled.grad_y == doctest::Approx(c * base.grad_y).epsilon(1e-14));
    }
}

TEST_CASE("enlargement: disc radius offset") {
    ObstacleSpec disc = ObstacleSpec::from_true(parse_all({"1 - x^2 - y^2"}), 0.2, "disc");
    // the solver set is the disc of radius 1.2
    CHECK(eval_psi(disc, {1.15, 0.0}) > 0.0);
    CHECK(eval_psi(disc, {0.0, 1.19}) > 0.0);
    CHECK(eval_psi(disc, {1.21, 0.0}) == 0.0);
    CHECK(eval_psi(disc, {1.2 / std::sqrt(2.0) + 1e-3, 1.2 / std::sqrt(2.0) + 1e-3}) == 0.0);
    // the physical set stays the unit disc
    CHECK(eval_psi_true(disc, {1.05, 0.0}) == 0.0);
    CHECK(eval_psi_true(disc, {0.95, 0.0}) > 0.0);
}

TEST_CASE("enlargement: ellipse semi-axis offset") {
    // semi-axes 2 (x) and 1 (y), centered at (1, -0.5)
    ObstacleSpec ell = ObstacleSpec::from_true(
        parse_all({"1 - (x - 1)^2/4 - (y + 0.5)^2"}), 0.3, "ellipse");
    CHECK(eval_psi(ell, {1.0 + 2.29, -0.5}) > 0.0);
    CHECK(eval_psi(ell, {1.0 + 2.31, -0.5}) == 0.0);
    CHECK(eval_psi(ell, {1.0, -0.5 + 1.29}) > 0.0);
    CHECK(eval_psi(ell, {1.0, -0.5 + 1.31}) == 0.0);
}

TEST_CASE("enlargement: halfspace constant offset") {
    ObstacleSpec strip =
        ObstacleSpec::from_true(parse_all({"1 - x", "x + 1"}), 0.2, "strip");
    // each face moves out by 0.2 along its unit normal
    CHECK(eval_psi(strip, {1.19, 0.0}) > 0.0);
    CHECK(eval_psi(strip, {1.21, 0.0}) == 0.0);
    CHECK(eval_psi(strip, {-1.19, 0.0}) > 0.0);
    CHECK(eval_psi(strip, {-1.21, 0.0}) == 0.0);

    // non-unit normal: margin scales with |a|
    ObstacleSpec scaled = ObstacleSpec::from_true(parse_all({"2 - 2*x", "x + 1"}), 0.2, "");
    CHECK(scaled.constraints[0].eval(1.19, 0.0) > 0.0);
    CHECK(scaled.constraints[0].eval(1.21, 0.0) < 0.0);
}

TEST_CASE("enlargement: zero margin is the identity") {
    auto exprs = parse_all({"y - x^2", "1 + x^2/2 - y"});
    ObstacleSpec ob = ObstacleSpec::from_true(exprs, 0.0, "crescent");
    REQUIRE(ob.constraints.size() == 2);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> point(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        Position z{point(rng), point(rng)};
        CHECK(eval_psi(ob, z) == eval_psi_true(ob, z));
    }
}

TEST_CASE("enlargement: unsupported families are rejected") {
    auto rack = parse_all({"sin(x) + 2 - y"});
    CHECK_THROWS_AS(ObstacleSpec::from_true(rack, 0.1, "rack"), UnsupportedEnlargement);
    auto cubic = parse_all({"1 - x^3 - y^2"});
    CHECK_THROWS_AS(ObstacleSpec::from_true(cubic, 0.1, ""), UnsupportedEnlargement);
    auto hyperbola = parse_all({"x^2 - y^2 - 1"});
    CHECK_THROWS_AS(ObstacleSpec::from_true(hyperbola, 0.1, ""), UnsupportedEnlargement);
    // zero margin passes everything through untouched
    CHECK_NOTHROW(ObstacleSpec::from_true(rack, 0.0, "rack"));
}

TEST_CASE("the enlarged set contains the true set") {
    ObstacleSpec specs[] = {
        ObstacleSpec::from_true(parse_all({"1 - x^2 - y^2"}), 0.15, ""),
        ObstacleSpec::from_true(parse_all({"x + 1", "1 - x", "y + 1", "1 - y"}), 0.1, ""),
        ObstacleSpec::from_true(parse_all({"1 - (x - 1)^2/4 - (y + 0.5)^2"}), 0.25, ""),
    };
    std::mt19937 rng(61);
    std::uniform_real_distribution<double> point(-3.5, 3.5);
    for (const auto& ob : specs) {
        for (int i = 0; i < 3000; ++i) {
            Position z{point(rng), point(rng)};
            if (eval_psi_true(ob, z) > 0.0) CHECK(eval_psi(ob, z) > 0.0);
        }
    }
}

TEST_CASE("obstacle construction guards") {
    CHECK_THROWS_AS(ObstacleSpec::from_true({}, 0.1, ""), std::invalid_argument);
    CHECK_THROWS_AS(ObstacleSpec::from_true(parse_all({"1 - x^2 - y^2"}), -0.1, ""),
                    std::invalid_argument);
    ObstacleSpec disc = unit_disc();
    CHECK_THROWS_AS(eval_penalty_gradient(disc, {0.0, 0.0}, -1.0), std::invalid_argument);
}
