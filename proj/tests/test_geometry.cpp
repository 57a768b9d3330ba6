#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/LU>

#include "stab/geometry.hpp"
#include "test_util.hpp"

using namespace stab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("joint_rotation is the identity at the home pose") {
    const Mat3 r = joint_rotation({0.0, 0.0});
    CHECK((r - Mat3::Identity()).norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("a quarter turn about y maps the z-axis onto the x-axis") {
    const Mat3 r = joint_rotation({0.0, kPi / 2.0});
    const Vec3 mapped = r * Vec3::UnitZ();
    CHECK((mapped - Vec3::UnitX()).norm() < 1e-15);
}

TEST_CASE("joint_rotation stays orthonormal with determinant +1") {
    std::mt19937 rng(91);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int i = 0; i < 1000; ++i) {
        const Mat3 r = joint_rotation({angle(rng), angle(rng)});
        CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-12);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("aligned placements stack each platform point above its base point at home") {
    MechanismGeometry g;
    const SpringEndpoints pts = spring_endpoints(g, {0.0, 0.0});
    const auto lengths = spring_lengths(g, {0.0, 0.0});
    for (int i = 0; i < 3; ++i) {
        CHECK(pts.platform[i][0] == doctest::Approx(pts.base[i][0]).epsilon(1e-12));
        CHECK(pts.platform[i][1] == doctest::Approx(pts.base[i][1]).epsilon(1e-12));
        CHECK(pts.base[i][2] == -g.base_offset);
        CHECK(pts.platform[i][2] == doctest::Approx(g.platform_offset).epsilon(1e-12));
        CHECK(lengths[i] == doctest::Approx(lengths[0]).epsilon(1e-12));
    }
}

TEST_CASE("platform attachments stay on their circle for any tilt") {
    MechanismGeometry g;
    g.r_f = 11.0;
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> angle(-1.4, 1.4);
    for (int i = 0; i < 200; ++i) {
        const TiltConfig cfg{angle(rng), angle(rng)};
        const Mat3 r = joint_rotation(cfg);
        const Vec3 center = r * Vec3(0.0, 0.0, g.platform_offset);
        const SpringEndpoints pts = spring_endpoints(g, cfg);
        for (int s = 0; s < 3; ++s) {
            CHECK((pts.platform[s] - center).norm() == doctest::Approx(11.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("sum of squared lengths matches the symbolic expansion on the beta axis") {
    // For the aligned equally spaced placement at alpha = 0:
    //   sum l_i^2 = 3 r^2 (1 - cos b) + 3 (p^2 + g^2) + 6 p g cos b
    MechanismGeometry g;
    g.platform_offset = 7.5;
    g.base_offset = 5.0;
    const double r = g.r_f, p = g.platform_offset, q = g.base_offset;
    for (double beta : {-1.3, -0.8, -0.1, 0.0, 0.2, 0.6, 1.1, 1.5}) {
        const auto lengths = spring_lengths(g, {0.0, beta});
        const double sum_sq =
            lengths[0] * lengths[0] + lengths[1] * lengths[1] + lengths[2] * lengths[2];
        const double expansion =
            3.0 * r * r * (1.0 - std::cos(beta)) + 3.0 * (p * p + q * q) + 6.0 * p * q * std::cos(beta);
        CHECK(sum_sq == doctest::Approx(expansion).epsilon(1e-12));
    }
}

TEST_CASE("lengths match endpoints rebuilt from first principles") {
    std::mt19937 rng(4242);
    for (int i = 0; i < 100; ++i) {
        const MechanismGeometry g = oracle::random_geometry(rng);
        const TiltConfig cfg = oracle::random_tilt(rng);
        const auto expected = oracle::lengths(g, cfg.alpha, cfg.beta);
        const auto actual = spring_lengths(g, cfg);
        for (int s = 0; s < 3; ++s) {
            CHECK(std::abs(actual[s] - expected[s]) < 1e-12 * (1.0 + expected[s]));
        }
    }
}

TEST_CASE("coincident endpoints give zero lengths") {
    MechanismGeometry g;
    g.platform_offset = 4.0;
    g.base_offset = -4.0;  // base plane and home platform plane coincide
    const auto lengths = spring_lengths(g, {0.0, 0.0});
    for (double l : lengths) CHECK(l == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("pure axial separation gives the gap as every length") {
    MechanismGeometry g;
    g.platform_offset = 3.25;
    g.base_offset = 4.75;
    const auto lengths = spring_lengths(g, {0.0, 0.0});
    for (double l : lengths) CHECK(l == doctest::Approx(8.0).epsilon(1e-13));
}

TEST_CASE("spring lengths are 2*pi periodic in both tilt angles") {
    std::mt19937 rng(5150);
    for (int i = 0; i < 50; ++i) {
        const MechanismGeometry g = oracle::random_geometry(rng);
        const TiltConfig cfg = oracle::random_tilt(rng);
        const auto base = spring_lengths(g, cfg);
        const auto shift_a = spring_lengths(g, {cfg.alpha + 2.0 * kPi, cfg.beta});
        const auto shift_b = spring_lengths(g, {cfg.alpha, cfg.beta - 2.0 * kPi});
        for (int s = 0; s < 3; ++s) {
            CHECK(shift_a[s] == doctest::Approx(base[s]).epsilon(1e-9));
            CHECK(shift_b[s] == doctest::Approx(base[s]).epsilon(1e-9));
        }
    }
}

TEST_CASE("lengths at -beta are the reflected multiset of lengths at +beta") {
    // The default placement's attachment cosines are {0, +s, -s}, so flipping
    // beta permutes springs 2 and 3; the multiset, and hence sum l^2, is even.
    MechanismGeometry g;
    for (double beta : {0.05, 0.3, 0.7, 1.2}) {
        auto plus = spring_lengths(g, {0.0, beta});
        auto minus = spring_lengths(g, {0.0, -beta});
        std::sort(plus.begin(), plus.end());
        std::sort(minus.begin(), minus.end());
        for (int i = 0; i < 3; ++i)
            CHECK(plus[i] == doctest::Approx(minus[i]).epsilon(1e-12));

        const double sum_plus = plus[0] * plus[0] + plus[1] * plus[1] + plus[2] * plus[2];
        const double sum_minus =
            minus[0] * minus[0] + minus[1] * minus[1] + minus[2] * minus[2];
        CHECK(sum_plus == doctest::Approx(sum_minus).epsilon(1e-12));
    }
}

TEST_CASE("wrap_angle lands in (-pi, pi]") {
    CHECK(wrap_angle(0.0) == 0.0);
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(2.0 * kPi) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(wrap_angle(-1.5 * kPi) == doctest::Approx(0.5 * kPi));
    CHECK(wrap_angle(0.25) == doctest::Approx(0.25));
}

TEST_CASE("tilt_magnitude reduces to |beta| and |alpha| on the axes") {
    CHECK(tilt_magnitude({0.0, -0.7}) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(tilt_magnitude({0.4, 0.0}) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(tilt_magnitude({0.3, 0.4}) ==
          doctest::Approx(std::acos(std::cos(0.3) * std::cos(0.4))).epsilon(1e-12));
}

TEST_CASE("validation names the offending field") {
    MechanismGeometry g;

    SUBCASE("r_f must be positive") {
        g.r_f = 0.0;
        CHECK_THROWS_WITH_AS(g.validate(),
                             "MechanismGeometry: r_f must be a positive finite length",
                             std::invalid_argument);
    }
    SUBCASE("base angles must be distinct") {
        g.base_angles = {0.0, 0.0, 1.0};
        CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    }
    SUBCASE("angle distinctness is modulo 2*pi") {
        g.platform_angles = {0.3, 0.3 + 2.0 * kPi, 2.0};
        CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    }
    SUBCASE("weight cannot be negative") {
        g.w = -1.0;
        CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    }
    SUBCASE("free length cannot be negative") {
        g.l_o = -0.1;
        CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    }
    SUBCASE("gravity lever cannot be negative") {
        g.h = -1.0;
        g.cg_lever = 0.0;
        CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    }
    SUBCASE("non-finite fields are rejected") {
        g.platform_offset = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    }
    SUBCASE("the default geometry is valid") { CHECK_NOTHROW(g.validate()); }
}
