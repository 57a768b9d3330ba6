#include "stab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDistinctAngleTol = 1e-9;
}  // namespace

double wrap_angle(double angle_rad) {
    double w = std::remainder(angle_rad, kTwoPi);
    if (w <= -std::numbers::pi) w += kTwoPi;
    return w;
}

void MechanismGeometry::validate() const {
    const auto bad = [](double v) { return !std::isfinite(v); };

    if (bad(r_f) || r_f <= 0.0)
        throw std::invalid_argument("MechanismGeometry: r_f must be a positive finite length");
    if (bad(platform_offset))
        throw std::invalid_argument("MechanismGeometry: platform_offset must be finite");
    if (bad(base_offset))
        throw std::invalid_argument("MechanismGeometry: base_offset must be finite");
    if (bad(h)) throw std::invalid_argument("MechanismGeometry: h must be finite");
    if (bad(cg_lever)) throw std::invalid_argument("MechanismGeometry: cg_lever must be finite");
    if (bad(w) || w < 0.0)
        throw std::invalid_argument("MechanismGeometry: w must be finite and >= 0");
    if (bad(l_o) || l_o < 0.0)
        throw std::invalid_argument("MechanismGeometry: l_o must be finite and >= 0");

    const auto check_distinct = [&](const std::array<double, 3>& angles, const char* name) {
        for (double a : angles) {
            if (bad(a))
                throw std::invalid_argument(std::string("MechanismGeometry: ") + name +
                                            " must be finite");
        }
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                if (std::abs(wrap_angle(angles[i] - angles[j])) <= kDistinctAngleTol)
                    throw std::invalid_argument(std::string("MechanismGeometry: ") + name +
                                                " must be pairwise distinct modulo 2*pi");
            }
        }
    };
    check_distinct(base_angles, "base_angles");
    check_distinct(platform_angles, "platform_angles");

    if (gravity_lever() < 0.0)
        throw std::invalid_argument(
            "MechanismGeometry: gravity lever r_f*h + cg_lever must be >= 0");
}

Mat3 joint_rotation(const TiltConfig& cfg) {
    const double ca = std::cos(cfg.alpha), sa = std::sin(cfg.alpha);
    const double cb = std::cos(cfg.beta), sb = std::sin(cfg.beta);
    Mat3 r;
    r << cb, 0.0, sb,                //
        sa * sb, ca, -sa * cb,       //
        -ca * sb, sa, ca * cb;
    return r;
}

SpringEndpoints spring_endpoints(const MechanismGeometry& geom, const TiltConfig& cfg) {
    const Mat3 rot = joint_rotation(cfg);
    SpringEndpoints pts;
    for (int i = 0; i < 3; ++i) {
        pts.base[i] = Vec3(geom.r_f * std::cos(geom.base_angles[i]),
                           geom.r_f * std::sin(geom.base_angles[i]), -geom.base_offset);
        const Vec3 anchor(geom.r_f * std::cos(geom.platform_angles[i]),
                          geom.r_f * std::sin(geom.platform_angles[i]), geom.platform_offset);
        pts.platform[i] = rot * anchor;
    }
    return pts;
}

std::array<double, 3> spring_lengths(const MechanismGeometry& geom, const TiltConfig& cfg) {
    const SpringEndpoints pts = spring_endpoints(geom, cfg);
    std::array<double, 3> lengths{};
    for (int i = 0; i < 3; ++i) lengths[i] = (pts.platform[i] - pts.base[i]).norm();
    return lengths;
}

double tilt_magnitude(const TiltConfig& cfg) {
    const double c = std::cos(cfg.alpha) * std::cos(cfg.beta);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace stab
