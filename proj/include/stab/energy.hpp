#pragma once

#include <span>
#include <stdexcept>
#include <variant>

#include <Eigen/Core>

#include "stab/geometry.hpp"

namespace stab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Coefficients of the reduced energy U(beta) = A sin(beta) + B*k - C*k*cos(beta).
// A = gravity_amplitude (N*mm); B = spring_const (mm^2); C = spring_cos_amp
// (mm^2, stored positive; the minus sign lives in the formula).
struct ReducedCoefficients {
    double gravity_amplitude = 35.2;
    double spring_const = 312.8;
    double spring_cos_amp = 50.82;

    bool operator==(const ReducedCoefficients&) const = default;
};

struct ReducedModel {
    ReducedCoefficients coef;
    double k = 1.0;  // N/mm

    bool operator==(const ReducedModel&) const = default;
};

struct GeometricModel {
    MechanismGeometry geom;
    double k = 1.0;  // N/mm

    bool operator==(const GeometricModel&) const = default;
};

using EnergyModel = std::variant<GeometricModel, ReducedModel>;

double model_stiffness(const EnergyModel& model);
EnergyModel with_stiffness(EnergyModel model, double k);

// Throws std::invalid_argument if k <= 0 or the geometry is invalid.
void validate_model(const EnergyModel& model);

struct EnergyEval {
    double u_spring = 0.0;   // N*mm
    double u_gravity = 0.0;  // N*mm
    double u_total = 0.0;    // always u_spring + u_gravity
    Vec2 grad = Vec2::Zero();     // dU/d(alpha, beta), N*mm/rad
    Mat2 hessian = Mat2::Zero();  // symmetric, N*mm/rad^2
};

double spring_energy(const EnergyModel& model, const TiltConfig& cfg);
double gravity_energy(const EnergyModel& model, const TiltConfig& cfg);
EnergyEval total_energy(const EnergyModel& model, const TiltConfig& cfg);

// Central-difference oracles over u_total / the analytic gradient.
// step must lie in (0, 1e-2).
Vec2 fd_gradient(const EnergyModel& model, const TiltConfig& cfg, double step);
Mat2 fd_hessian(const EnergyModel& model, const TiltConfig& cfg, double step);

struct ReducedFit {
    ReducedCoefficients coef;
    double max_residual = 0.0;  // max |U_sample - U_fit| over the samples, N*mm
};

// Raised when the sample angles cannot separate the {sin, const, cos} basis.
class DegenerateFitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Least-squares fit of sampled energies against the basis
// {sin(beta), k, k*cos(beta)}. Needs >= 3 well-separated angles.
ReducedFit fit_reduced_coefficients(std::span<const double> betas,
                                    std::span<const double> energies, double k);

// Samples the model along the beta axis (alpha = 0) and fits.
ReducedFit fit_reduced_coefficients(const EnergyModel& model, std::span<const double> betas);

}  // namespace stab
