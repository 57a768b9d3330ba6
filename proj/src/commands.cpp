#include "stab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <vector>

#include "stab/csv.hpp"
#include "stab/stability.hpp"
#include "stab/svg.hpp"

namespace stab {

namespace {

namespace fs = std::filesystem;

SolverOptions solver_options(const AnalysisConfig& cfg) {
    SolverOptions opts;
    opts.grad_tol = cfg.tolerances.grad_tol;
    opts.eig_tol = cfg.tolerances.eig_tol;
    return opts;
}

fs::path resolve_out_dir(const AnalysisConfig& cfg, const CommandOptions& opt) {
    fs::path dir = opt.out_dir.empty() ? fs::path(cfg.out_dir) : opt.out_dir;
    fs::create_directories(dir);
    return dir;
}

std::string angle_str(double rad, bool degrees) {
    if (degrees) return format_g9(rad * 180.0 / std::numbers::pi) + " deg";
    return format_g9(rad) + " rad";
}

const char* bool_str(bool b) { return b ? "true" : "false"; }

// Scale-floored relative error for derivative checks: near-stationary points
// otherwise divide FD roundoff by a vanishing gradient.
double relative_error(const Vec2& analytic, const Vec2& fd, double energy_scale) {
    const double denom =
        std::max({analytic.norm(), fd.norm(), 1e-3 * (std::abs(energy_scale) + 1.0)});
    return (analytic - fd).norm() / denom;
}

int verify_gate(const AnalysisConfig& cfg, const CommandOptions& opt, std::ostream& err) {
    if (!opt.verify) return 0;
    return verify_derivatives(cfg, err) ? 0 : 2;
}

}  // namespace

bool verify_derivatives(const AnalysisConfig& cfg, std::ostream& log) {
    std::mt19937 rng(327411u);
    std::uniform_real_distribution<double> beta_dist(cfg.beta_range.first,
                                                     cfg.beta_range.second);
    std::uniform_real_distribution<double> alpha_dist(cfg.alpha_range.first,
                                                      cfg.alpha_range.second);
    constexpr int kSamplesPerStiffness = 200;
    constexpr double kTol = 1e-6;

    double worst = 0.0;
    TiltConfig worst_cfg;
    double worst_k = 0.0;
    int checked = 0;

    for (double k : cfg.k_list) {
        const EnergyModel model = make_model(cfg, k);
        for (int i = 0; i < kSamplesPerStiffness; ++i) {
            TiltConfig tc;
            if (cfg.uses_reduced()) {
                tc = {0.0, beta_dist(rng)};
            } else {
                // Gravity's sign convention flips across beta = 0 for alpha != 0;
                // derivatives are checked off that line.
                do {
                    tc = {alpha_dist(rng), beta_dist(rng)};
                } while (std::abs(tc.beta) < 1e-2);
            }
            const EnergyEval e = total_energy(model, tc);
            const Vec2 fd = fd_gradient(model, tc, 1e-6);
            const double rel = relative_error(e.grad, fd, e.u_spring + std::abs(e.u_gravity));
            ++checked;
            if (rel > worst) {
                worst = rel;
                worst_cfg = tc;
                worst_k = k;
            }
        }
    }

    if (worst < kTol) {
        log << "verify: gradient check passed (" << checked
            << " samples, max relative error " << format_g9(worst) << ")\n";
        return true;
    }
    log << "verify: FAILED: analytic gradient disagrees with finite differences "
        << "(relative error " << format_g9(worst) << " at alpha = " << format_g9(worst_cfg.alpha)
        << ", beta = " << format_g9(worst_cfg.beta) << ", k = " << format_g9(worst_k) << ")\n";
    return false;
}

unsigned sweep_thread_cap(std::size_t n_k) {
    if (const char* env = std::getenv("STAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
    }
    return static_cast<unsigned>(n_k);
}

int cmd_landscape(const AnalysisConfig& cfg, const CommandOptions& opt, std::ostream& out,
                  std::ostream& err) {
    if (const int rc = verify_gate(cfg, opt, err)) return rc;
    const fs::path dir = resolve_out_dir(cfg, opt);
    const auto [lo, hi] = cfg.beta_range;
    const int n = cfg.landscape_points;

    for (double k : cfg.k_list) {
        const EnergyModel model = make_model(cfg, k);
        std::string csv = "beta_rad,u_total,u_spring,u_gravity\n";
        std::vector<double> xs(n), ys(n);
        std::size_t argmin = 0;
        for (int i = 0; i < n; ++i) {
            const double beta = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
            const EnergyEval e = total_energy(model, {0.0, beta});
            xs[i] = beta;
            ys[i] = e.u_total;
            if (e.u_total < ys[argmin]) argmin = i;
            csv += format_g9(beta);
            csv += ',';
            csv += format_g9(e.u_total);
            csv += ',';
            csv += format_g9(e.u_spring);
            csv += ',';
            csv += format_g9(e.u_gravity);
            csv += '\n';
        }
        const std::string stem = "landscape_k" + format_g9(k);
        write_text_atomic(dir / (stem + ".csv"), csv);
        out << "landscape: k = " << format_g9(k) << " N/mm -> " << (dir / (stem + ".csv")).string()
            << " (minimum U = " << format_g9(ys[argmin]) << " N*mm at beta = "
            << angle_str(xs[argmin], opt.degrees) << ")\n";

        if (opt.svg) {
            LineChart chart;
            chart.title = "Total potential energy, k = " + format_g9(k) + " N/mm";
            chart.x_label = "beta (rad)";
            chart.y_label = "U_total (N*mm)";
            chart.x = xs;
            chart.y = ys;
            chart.marker_index = argmin;
            chart.marker_label = "min at " + format_g9(xs[argmin]) + " rad";
            write_line_chart(dir / (stem + ".svg"), chart);
            out << "landscape: wrote " << (dir / (stem + ".svg")).string() << "\n";
        }
    }
    return 0;
}

int cmd_equilibria(const AnalysisConfig& cfg, const CommandOptions& opt, std::ostream& out,
                   std::ostream& err) {
    if (const int rc = verify_gate(cfg, opt, err)) return rc;
    const fs::path dir = resolve_out_dir(cfg, opt);
    const SolverOptions opts = solver_options(cfg);

    for (double k : cfg.k_list) {
        const EnergyModel model = make_model(cfg, k);
        std::vector<Equilibrium> eqs;
        if (cfg.uses_reduced()) {
            eqs = find_equilibria_1d(model, cfg.beta_range, cfg.n_seeds, opts);
        } else {
            int skipped = 0;
            eqs = find_equilibria_2d(std::get<GeometricModel>(model), cfg.alpha_range,
                                     cfg.beta_range, {cfg.grid.first, cfg.grid.second}, opts,
                                     &skipped);
            if (skipped > 0)
                err << "equilibria: k = " << format_g9(k) << ": " << skipped
                    << " Newton seed(s) diverged and were skipped\n";
        }

        std::string csv =
            "alpha_rad,beta_rad,u_total,classification,grad_norm,within_operational_range\n";
        for (const Equilibrium& e : eqs) {
            const bool within = tilt_magnitude(e.cfg) <= cfg.beta_max;
            csv += format_g9(e.cfg.alpha);
            csv += ',';
            csv += format_g9(e.cfg.beta);
            csv += ',';
            csv += format_g9(e.u_total);
            csv += ',';
            csv += to_string(e.classification);
            csv += ',';
            csv += format_g9(e.grad_norm);
            csv += ',';
            csv += bool_str(within);
            csv += '\n';
        }
        const fs::path file = dir / ("equilibria_k" + format_g9(k) + ".csv");
        write_text_atomic(file, csv);

        out << "equilibria: k = " << format_g9(k) << " N/mm -> " << eqs.size()
            << " point(s), " << file.string() << "\n";
        for (const Equilibrium& e : eqs) {
            const bool within = tilt_magnitude(e.cfg) <= cfg.beta_max;
            out << "  alpha = " << angle_str(e.cfg.alpha, opt.degrees)
                << ", beta = " << angle_str(e.cfg.beta, opt.degrees) << ", U = "
                << format_g9(e.u_total) << " N*mm, " << to_string(e.classification)
                << (within ? ", within" : ", outside") << " operational range\n";
        }
    }
    return 0;
}

int cmd_sweep(const AnalysisConfig& cfg, const CommandOptions& opt, std::ostream& out,
              std::ostream& err) {
    if (const int rc = verify_gate(cfg, opt, err)) return rc;
    const fs::path dir = resolve_out_dir(cfg, opt);

    const EnergyModel tmpl = make_model(cfg, cfg.k_list.front());
    const SweepResult result =
        stiffness_sweep(tmpl, cfg.k_list, cfg.beta_range, cfg.beta_max, cfg.n_seeds,
                        solver_options(cfg), sweep_thread_cap(cfg.k_list.size()));

    std::string csv = "k,beta_star,u_star,classification,within_operational_range\n";
    for (const SweepRow& row : result.rows) {
        csv += format_g9(row.k);
        csv += ',';
        if (row.has_stable) {
            csv += format_g9(row.beta_star);
            csv += ',';
            csv += format_g9(row.u_star);
            csv += ',';
            csv += to_string(row.classification);
            csv += ',';
            csv += bool_str(row.within_operational_range);
        } else {
            csv += "nan,nan,None,false";
        }
        csv += '\n';
    }
    const fs::path file = dir / "sweep.csv";
    write_text_atomic(file, csv);

    std::size_t stable = 0, within = 0;
    for (const SweepRow& row : result.rows) {
        stable += row.has_stable;
        within += row.within_operational_range;
    }
    out << "sweep: " << result.rows.size() << " stiffness value(s), " << stable
        << " with a stable equilibrium, " << within << " within |beta| <= "
        << angle_str(result.beta_max, opt.degrees) << " -> " << file.string() << "\n";
    return 0;
}

int cmd_critical_k(const AnalysisConfig& cfg, const CommandOptions& opt, std::ostream& out,
                   std::ostream& err) {
    if (const int rc = verify_gate(cfg, opt, err)) return rc;

    const EnergyModel tmpl = make_model(cfg, cfg.k_list.front());
    double k_star = 0.0;
    try {
        k_star = critical_stiffness(tmpl, cfg.beta_tol, cfg.k_bracket, cfg.beta_range,
                                    cfg.n_seeds, solver_options(cfg));
    } catch (const BracketError& e) {
        err << "critical-k: " << e.what() << "\n";
        return 1;
    }

    out << "critical stiffness k* = " << format_g9(k_star) << " N/mm for |beta*| <= "
        << angle_str(cfg.beta_tol, opt.degrees) << "\n";
    if (cfg.uses_reduced()) {
        const double closed = cfg.reduced->gravity_amplitude /
                              (cfg.reduced->spring_cos_amp * std::tan(cfg.beta_tol));
        out << "closed-form check: A/(C*tan(beta_tol)) = " << format_g9(closed)
            << " N/mm (relative difference " << format_g9((k_star - closed) / closed) << ")\n";
    }
    return 0;
}

int cmd_fit(const AnalysisConfig& cfg, const CommandOptions& opt, std::ostream& out,
            std::ostream& err) {
    if (const int rc = verify_gate(cfg, opt, err)) return rc;
    if (cfg.uses_reduced()) {
        err << "fit: the geometric backend is required (the reduced backend already is the "
               "fitted form)\n";
        return 1;
    }

    const double k = cfg.k_list.front();
    const EnergyModel model = make_model(cfg, k);
    std::vector<double> betas(cfg.fit_samples);
    for (int i = 0; i < cfg.fit_samples; ++i) {
        betas[i] = cfg.beta_range.first + (cfg.beta_range.second - cfg.beta_range.first) *
                                              static_cast<double>(i) / (cfg.fit_samples - 1);
    }

    ReducedFit fit;
    try {
        fit = fit_reduced_coefficients(model, betas);
    } catch (const DegenerateFitError& e) {
        err << "fit: " << e.what() << "\n";
        return 1;
    }

    const auto rel = [](double fitted, double ref) -> std::string {
        if (ref == 0.0) return "n/a";
        return format_g9((fitted - ref) / std::abs(ref));
    };
    const ReducedCoefficients& ref = cfg.fit_reference;
    out << "fit of U(beta) = A sin(beta) + B k - C k cos(beta) at k = " << format_g9(k)
        << " N/mm, " << cfg.fit_samples << " samples over [" << format_g9(cfg.beta_range.first)
        << ", " << format_g9(cfg.beta_range.second) << "] rad\n";
    out << "  coefficient            fitted          reference       rel diff\n";
    out << "  A (N*mm)               " << format_g9(fit.coef.gravity_amplitude) << "\t"
        << format_g9(ref.gravity_amplitude) << "\t"
        << rel(fit.coef.gravity_amplitude, ref.gravity_amplitude) << "\n";
    out << "  B (mm^2)               " << format_g9(fit.coef.spring_const) << "\t"
        << format_g9(ref.spring_const) << "\t" << rel(fit.coef.spring_const, ref.spring_const)
        << "\n";
    out << "  C (mm^2)               " << format_g9(fit.coef.spring_cos_amp) << "\t"
        << format_g9(ref.spring_cos_amp) << "\t"
        << rel(fit.coef.spring_cos_amp, ref.spring_cos_amp) << "\n";
    out << "  max residual           " << format_g9(fit.max_residual) << " N*mm\n";
    return 0;
}

}  // namespace stab
