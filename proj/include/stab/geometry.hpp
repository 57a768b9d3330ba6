#pragma once

#include <array>

#include <Eigen/Core>

namespace stab {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Wrap an angle to the canonical reporting range (-pi, pi].
double wrap_angle(double angle_rad);

// Universal-joint tilt angles: alpha rotates about the base x-axis, beta about
// the rotated y-axis. Radians.
struct TiltConfig {
    double alpha = 0.0;
    double beta = 0.0;

    bool operator==(const TiltConfig&) const = default;
};

// 90, 210, 330 degrees: equally spaced, with the first spring lying in the
// tilt plane of a pure-beta rotation.
inline constexpr std::array<double, 3> kDefaultAttachmentAngles = {
    1.5707963267948966, 3.6651914291880923, 5.759586531581287};

// Two triangular platforms joined by a passive universal joint at the origin,
// three springs attached at radius r_f on each platform. Lengths in mm,
// forces in N.
struct MechanismGeometry {
    double r_f = 11.0;                                          // attachment radius, mm
    std::array<double, 3> base_angles = kDefaultAttachmentAngles;
    std::array<double, 3> platform_angles = kDefaultAttachmentAngles;
    double platform_offset = 6.6;  // joint to moving-platform plane, mm
    double base_offset = 6.6;      // joint to base plane, mm
    double h = 0.6;                // static-stability factor applied to r_f
    double cg_lever = 2.2;         // additive CG lever arm, mm
    double w = 4.0;                // lumped self-weight, N
    double l_o = 0.0;              // spring free length, mm
    bool tension_only = false;     // clamp (l - l_o) at zero: cables cannot push

    // Lever arm of the gravity term, r_f*h + cg_lever (mm).
    double gravity_lever() const { return r_f * h + cg_lever; }

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    bool operator==(const MechanismGeometry&) const = default;
};

// R = R_x(alpha) * R_y(beta); orthonormal, det +1.
Mat3 joint_rotation(const TiltConfig& cfg);

struct SpringEndpoints {
    std::array<Vec3, 3> base;      // B_i, fixed in the base frame
    std::array<Vec3, 3> platform;  // C_i, carried by the joint rotation
};

// B_i on the circle of radius r_f in the plane z = -base_offset; C_i is the
// rotated image of the platform anchor r_f*u(theta_i) + platform_offset*z.
// The joint sits at the origin.
SpringEndpoints spring_endpoints(const MechanismGeometry& geom, const TiltConfig& cfg);

// Euclidean distances |C_i - B_i|, mm.
std::array<double, 3> spring_lengths(const MechanismGeometry& geom, const TiltConfig& cfg);

// Tilt of the platform axis away from the base z-axis: acos((R z) . z), >= 0.
double tilt_magnitude(const TiltConfig& cfg);

}  // namespace stab
