#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>

#include "stab/config.hpp"

namespace stab {

struct CommandOptions {
    std::filesystem::path out_dir;  // empty: use cfg.out_dir
    bool svg = false;
    bool degrees = false;   // display conversion only; files stay in radians
    bool verify = false;    // re-check analytic gradients against finite differences
};

// Subcommand bodies. Return the process exit code: 0 on success, 1 on
// input/validation/bracketing errors, 2 when --verify finds a mismatch.
int cmd_landscape(const AnalysisConfig& cfg, const CommandOptions& opt, std::ostream& out,
                  std::ostream& err);
int cmd_equilibria(const AnalysisConfig& cfg, const CommandOptions& opt, std::ostream& out,
                   std::ostream& err);
int cmd_sweep(const AnalysisConfig& cfg, const CommandOptions& opt, std::ostream& out,
              std::ostream& err);
int cmd_critical_k(const AnalysisConfig& cfg, const CommandOptions& opt, std::ostream& out,
                   std::ostream& err);
int cmd_fit(const AnalysisConfig& cfg, const CommandOptions& opt, std::ostream& out,
            std::ostream& err);

// Samples random configurations for every configured stiffness and compares
// analytic gradients against central differences. Prints a verdict to log;
// false means a mismatch was found.
bool verify_derivatives(const AnalysisConfig& cfg, std::ostream& log);

// Worker cap for the sweep: STAB_THREADS when set to a positive integer,
// otherwise one worker per stiffness value.
unsigned sweep_thread_cap(std::size_t n_k);

}  // namespace stab
