#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stab/energy.hpp"

namespace stab {

enum class Classification { Stable, Unstable, Saddle, Degenerate };
const char* to_string(Classification c);

struct SolverOptions {
    double grad_tol = 1e-9;   // N*mm/rad
    double eig_tol = 1e-9;    // N*mm/rad^2
    double dedup_tol = 1e-6;  // rad
    int max_iter = 200;
};

// A stationary point of the total potential energy. 1-D solves pin alpha at 0,
// report |dU/dbeta| as grad_norm, and carry the single curvature d2U/dbeta2;
// 2-D solves report the full gradient norm and both Hessian eigenvalues.
struct Equilibrium {
    TiltConfig cfg;
    double u_total = 0.0;
    double grad_norm = 0.0;
    Classification classification = Classification::Degenerate;
    std::vector<double> hessian_eigs;
};

// Scans dU/dbeta on a uniform seed grid over beta_range (alpha = 0), polishes
// every sign change with safeguarded Newton/bisection, and classifies by the
// beta curvature. Runs of seeds that are all below grad_tol come back as a
// single Degenerate entry at the run midpoint. An empty result is a valid
// finding, not an error.
std::vector<Equilibrium> find_equilibria_1d(const EnergyModel& model,
                                            std::pair<double, double> beta_range,
                                            int n_seeds = 64, const SolverOptions& opts = {});

struct Grid2d {
    int n_alpha = 24;
    int n_beta = 24;
};

// Multi-start 2-D Newton on the gradient. Divergent seeds are skipped (count
// returned through seeds_skipped when non-null), never fatal.
std::vector<Equilibrium> find_equilibria_2d(const GeometricModel& model,
                                            std::pair<double, double> alpha_range,
                                            std::pair<double, double> beta_range,
                                            Grid2d grid = {}, const SolverOptions& opts = {},
                                            int* seeds_skipped = nullptr);

struct ZeroRestCheck {
    double slope_at_zero = 0.0;  // dU/dbeta at (0, 0), N*mm/rad
    bool is_stationary = false;
};

// Slope of the energy at the upright pose; any nonzero gravity amplitude makes
// it non-stationary.
ZeroRestCheck no_rest_at_zero_check(const EnergyModel& model, double grad_tol = 1e-9);

struct SweepRow {
    double k = 0.0;
    bool has_stable = false;
    double beta_star = std::numeric_limits<double>::quiet_NaN();
    double u_star = std::numeric_limits<double>::quiet_NaN();
    Classification classification = Classification::Degenerate;
    bool within_operational_range = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // strictly increasing k
    double beta_max = 0.3;       // rad
};

// For each stiffness, rebuilds the model and records the lowest-energy Stable
// equilibrium (ties within 1e-12 N*mm broken toward smaller |beta|). Rows are
// produced in ascending k regardless of worker scheduling; max_threads = 0
// fans out one worker per stiffness value.
SweepResult stiffness_sweep(const EnergyModel& model_template, std::span<const double> k_list,
                            std::pair<double, double> beta_range, double beta_max = 0.3,
                            int n_seeds = 64, const SolverOptions& opts = {},
                            unsigned max_threads = 0);

class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Minimal stiffness whose equilibrium deflection satisfies |beta*| <= beta_tol,
// bisected to relative width 1e-6. Returns k_bracket.first immediately when the
// bound is already met there; throws BracketError when k_bracket.second fails it.
double critical_stiffness(const EnergyModel& model_template, double beta_tol,
                          std::pair<double, double> k_bracket,
                          std::pair<double, double> beta_range, int n_seeds = 64,
                          const SolverOptions& opts = {});

}  // namespace stab
