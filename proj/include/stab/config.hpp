#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stab/energy.hpp"

namespace stab {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Tolerances {
    double grad_tol = 1e-9;
    double eig_tol = 1e-9;

    bool operator==(const Tolerances&) const = default;
};

// Everything a run needs: exactly one backend (reduced coefficients or full
// mechanism geometry), the stiffness values to analyse, ranges, tolerances and
// output settings. Angles are radians in files and flags alike.
struct AnalysisConfig {
    std::optional<ReducedCoefficients> reduced;
    std::optional<MechanismGeometry> geometric;
    std::vector<double> k_list;  // sorted ascending, strictly positive, no duplicates
    std::pair<double, double> beta_range{-1.5707963267948966, 1.5707963267948966};
    std::pair<double, double> alpha_range{-1.5707963267948966, 1.5707963267948966};
    double beta_max = 0.3;  // operational joint-travel limit, rad (assumption, overridable)
    Tolerances tolerances;
    int n_seeds = 64;
    int landscape_points = 721;
    std::pair<int, int> grid{24, 24};  // 2-D seed counts (alpha, beta)
    double beta_tol = 0.05;            // critical-k deflection bound, rad
    std::pair<double, double> k_bracket{0.5, 200.0};
    int fit_samples = 25;
    ReducedCoefficients fit_reference{35.2, 312.8, 50.82};
    std::string out_dir = ".";

    bool uses_reduced() const { return reduced.has_value(); }

    bool operator==(const AnalysisConfig&) const = default;
};

// Parses and validates a JSON config. Unknown keys are rejected, defaults are
// applied; when default_notes is non-null it receives one line per defaulted
// field. Throws ConfigError with file/line context on parse errors and the
// offending field name on validation errors.
AnalysisConfig load_config(const std::filesystem::path& path,
                           std::vector<std::string>* default_notes = nullptr);

AnalysisConfig parse_config(const std::string& text, const std::string& source_name,
                            std::vector<std::string>* default_notes = nullptr);

// Serializes every effective field; load_config(write_config(cfg)) == cfg.
std::string config_to_json(const AnalysisConfig& cfg);
void write_config(const AnalysisConfig& cfg, const std::filesystem::path& path);

// Model instance for one stiffness value.
EnergyModel make_model(const AnalysisConfig& cfg, double k);

// Human-readable summary of the effective configuration.
std::string describe(const AnalysisConfig& cfg);

}  // namespace stab
