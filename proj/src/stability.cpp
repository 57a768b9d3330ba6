#include "stab/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace stab {

namespace {

std::array<double, 2> symmetric_eigenvalues(const Mat2& h) {
    const double mean = 0.5 * (h(0, 0) + h(1, 1));
    const double radius = std::hypot(0.5 * (h(0, 0) - h(1, 1)), h(0, 1));
    return {mean - radius, mean + radius};
}

Classification classify(std::span<const double> eigs, double eig_tol) {
    bool all_pos = true, all_neg = true;
    for (double e : eigs) {
        if (std::abs(e) <= eig_tol) return Classification::Degenerate;
        all_pos = all_pos && e > 0.0;
        all_neg = all_neg && e < 0.0;
    }
    if (all_pos) return Classification::Stable;
    if (all_neg) return Classification::Unstable;
    return Classification::Saddle;
}

Equilibrium make_equilibrium_1d(const EnergyModel& model, double beta,
                                const SolverOptions& opts) {
    const EnergyEval e = total_energy(model, {0.0, beta});
    Equilibrium eq;
    eq.cfg = {0.0, wrap_angle(beta)};
    eq.u_total = e.u_total;
    eq.grad_norm = std::abs(e.grad[1]);
    eq.hessian_eigs = {e.hessian(1, 1)};
    eq.classification = classify(eq.hessian_eigs, opts.eig_tol);
    return eq;
}

// Safeguarded Newton on g(beta) = dU/dbeta inside a sign-change bracket.
// Falls back to bisection whenever the Newton step leaves the bracket.
std::optional<double> polish_root_1d(const EnergyModel& model, double lo, double hi,
                                     double g_lo, const SolverOptions& opts) {
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < opts.max_iter; ++it) {
        const EnergyEval e = total_energy(model, {0.0, x});
        const double g = e.grad[1];
        if (std::abs(g) < opts.grad_tol) return x;
        if ((g < 0.0) == (g_lo < 0.0)) {
            lo = x;
            g_lo = g;
        } else {
            hi = x;
        }
        const double curvature = e.hessian(1, 1);
        double next = (curvature != 0.0) ? x - g / curvature
                                         : std::numeric_limits<double>::quiet_NaN();
        if (!(next > lo && next < hi) || next == x) next = 0.5 * (lo + hi);
        x = next;
        if (hi - lo < 4.0 * std::numeric_limits<double>::epsilon() *
                          std::max(1.0, std::abs(x))) {
            const double g_final = total_energy(model, {0.0, x}).grad[1];
            if (std::abs(g_final) < opts.grad_tol) return x;
            break;
        }
    }
    return std::nullopt;
}

}  // namespace

const char* to_string(Classification c) {
    switch (c) {
        case Classification::Stable: return "Stable";
        case Classification::Unstable: return "Unstable";
        case Classification::Saddle: return "Saddle";
        case Classification::Degenerate: return "Degenerate";
    }
    return "Unknown";
}

std::vector<Equilibrium> find_equilibria_1d(const EnergyModel& model,
                                            std::pair<double, double> beta_range, int n_seeds,
                                            const SolverOptions& opts) {
    validate_model(model);
    const auto [lo, hi] = beta_range;
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
        throw std::invalid_argument("beta_range must be a finite interval with lo < hi");
    if (n_seeds < 8) throw std::invalid_argument("n_seeds must be >= 8");

    std::vector<double> seed(n_seeds), grad(n_seeds);
    for (int i = 0; i < n_seeds; ++i) {
        seed[i] = lo + (hi - lo) * static_cast<double>(i) / (n_seeds - 1);
        const EnergyEval e = total_energy(model, {0.0, seed[i]});
        if (!std::isfinite(e.u_total) || !std::isfinite(e.grad[1]))
            throw std::invalid_argument("model produced non-finite energy at beta = " +
                                        std::to_string(seed[i]));
        grad[i] = e.grad[1];
    }

    std::vector<Equilibrium> flats;
    std::vector<double> roots;

    // Seeds already below grad_tol: a run of two or more is a flat stretch and
    // is reported once, as Degenerate, at its midpoint.
    std::vector<bool> flagged(n_seeds);
    for (int i = 0; i < n_seeds; ++i) flagged[i] = std::abs(grad[i]) < opts.grad_tol;
    for (int i = 0; i < n_seeds;) {
        if (!flagged[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < n_seeds && flagged[j + 1]) ++j;
        if (j > i) {
            Equilibrium eq = make_equilibrium_1d(model, 0.5 * (seed[i] + seed[j]), opts);
            eq.classification = Classification::Degenerate;
            flats.push_back(std::move(eq));
        } else {
            roots.push_back(seed[i]);
        }
        i = j + 1;
    }

    for (int i = 0; i + 1 < n_seeds; ++i) {
        if (flagged[i] || flagged[i + 1]) continue;
        if (grad[i] * grad[i + 1] >= 0.0) continue;
        if (auto r = polish_root_1d(model, seed[i], seed[i + 1], grad[i], opts)) {
            roots.push_back(*r);
        }
    }

    std::sort(roots.begin(), roots.end());
    std::vector<Equilibrium> out = std::move(flats);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (i > 0 && roots[i] - roots[i - 1] < opts.dedup_tol) continue;
        out.push_back(make_equilibrium_1d(model, roots[i], opts));
    }

    // Reporting is canonical in (-pi, pi], so roots a full period apart are the
    // same configuration; dedup once more on the wrapped coordinate.
    std::sort(out.begin(), out.end(),
              [](const Equilibrium& a, const Equilibrium& b) { return a.cfg.beta < b.cfg.beta; });
    std::vector<Equilibrium> unique;
    for (Equilibrium& eq : out) {
        if (!unique.empty() && eq.cfg.beta - unique.back().cfg.beta < opts.dedup_tol) {
            if (eq.grad_norm < unique.back().grad_norm) unique.back() = std::move(eq);
            continue;
        }
        unique.push_back(std::move(eq));
    }
    return unique;
}

std::vector<Equilibrium> find_equilibria_2d(const GeometricModel& model,
                                            std::pair<double, double> alpha_range,
                                            std::pair<double, double> beta_range, Grid2d grid,
                                            const SolverOptions& opts, int* seeds_skipped) {
    const EnergyModel m = model;
    validate_model(m);
    if (grid.n_alpha < 8 || grid.n_beta < 8)
        throw std::invalid_argument("2-D seed grid must be at least 8x8");
    const auto [a_lo, a_hi] = alpha_range;
    const auto [b_lo, b_hi] = beta_range;
    if (!(std::isfinite(a_lo) && std::isfinite(a_hi) && a_lo < a_hi))
        throw std::invalid_argument("alpha_range must be a finite interval with lo < hi");
    if (!(std::isfinite(b_lo) && std::isfinite(b_hi) && b_lo < b_hi))
        throw std::invalid_argument("beta_range must be a finite interval with lo < hi");

    const double margin = 1.0;  // rad beyond the box before a seed counts as divergent
    int skipped = 0;
    std::vector<Equilibrium> found;

    for (int ia = 0; ia < grid.n_alpha; ++ia) {
        for (int ib = 0; ib < grid.n_beta; ++ib) {
            Vec2 x(a_lo + (a_hi - a_lo) * static_cast<double>(ia) / (grid.n_alpha - 1),
                   b_lo + (b_hi - b_lo) * static_cast<double>(ib) / (grid.n_beta - 1));
            bool converged = false;
            for (int it = 0; it < opts.max_iter; ++it) {
                const EnergyEval e = total_energy(m, {x[0], x[1]});
                const double gn = e.grad.norm();
                if (!std::isfinite(gn) || !std::isfinite(e.u_total)) break;
                if (gn < opts.grad_tol) {
                    converged = true;
                    break;
                }
                const Mat2& h = e.hessian;
                const double det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
                const double scale = h.cwiseAbs().maxCoeff();
                if (scale == 0.0 || std::abs(det) <= 1e-12 * scale * scale) break;
                Vec2 step((-h(1, 1) * e.grad[0] + h(0, 1) * e.grad[1]) / det,
                          (h(1, 0) * e.grad[0] - h(0, 0) * e.grad[1]) / det);
                const double inf_norm = step.cwiseAbs().maxCoeff();
                if (inf_norm > 0.5) step *= 0.5 / inf_norm;

                // Backtrack on the gradient norm so wild steps cannot cycle.
                bool accepted = false;
                double t = 1.0;
                for (int bt = 0; bt < 12; ++bt, t *= 0.5) {
                    const Vec2 trial = x + t * step;
                    const double g_trial = total_energy(m, {trial[0], trial[1]}).grad.norm();
                    if (std::isfinite(g_trial) && g_trial < gn) {
                        x = trial;
                        accepted = true;
                        break;
                    }
                }
                if (!accepted) break;
                if (x[0] < a_lo - margin || x[0] > a_hi + margin || x[1] < b_lo - margin ||
                    x[1] > b_hi + margin)
                    break;
            }
            if (!converged) {
                ++skipped;
                continue;
            }

            const TiltConfig cfg{wrap_angle(x[0]), wrap_angle(x[1])};
            // The margin only gives Newton room to move; results must lie in
            // the requested box.
            if (cfg.alpha < a_lo - opts.dedup_tol || cfg.alpha > a_hi + opts.dedup_tol ||
                cfg.beta < b_lo - opts.dedup_tol || cfg.beta > b_hi + opts.dedup_tol)
                continue;
            const EnergyEval e = total_energy(m, cfg);
            Equilibrium eq;
            eq.cfg = cfg;
            eq.u_total = e.u_total;
            eq.grad_norm = e.grad.norm();
            const auto eigs = symmetric_eigenvalues(e.hessian);
            eq.hessian_eigs = {eigs[0], eigs[1]};
            eq.classification = classify(eq.hessian_eigs, opts.eig_tol);

            bool duplicate = false;
            for (Equilibrium& prev : found) {
                if (std::abs(prev.cfg.alpha - eq.cfg.alpha) < opts.dedup_tol &&
                    std::abs(prev.cfg.beta - eq.cfg.beta) < opts.dedup_tol) {
                    if (eq.grad_norm < prev.grad_norm) prev = eq;
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) found.push_back(std::move(eq));
        }
    }

    if (seeds_skipped) *seeds_skipped = skipped;
    std::sort(found.begin(), found.end(), [](const Equilibrium& a, const Equilibrium& b) {
        return a.cfg.beta != b.cfg.beta ? a.cfg.beta < b.cfg.beta : a.cfg.alpha < b.cfg.alpha;
    });
    return found;
}

ZeroRestCheck no_rest_at_zero_check(const EnergyModel& model, double grad_tol) {
    validate_model(model);
    const double slope = total_energy(model, {0.0, 0.0}).grad[1];
    return {slope, std::abs(slope) < grad_tol};
}

namespace {

SweepRow sweep_one(const EnergyModel& model_template, double k,
                   std::pair<double, double> beta_range, double beta_max, int n_seeds,
                   const SolverOptions& opts) {
    const EnergyModel model = with_stiffness(model_template, k);
    const std::vector<Equilibrium> eqs = find_equilibria_1d(model, beta_range, n_seeds, opts);

    const Equilibrium* best = nullptr;
    for (const Equilibrium& e : eqs) {
        if (e.classification != Classification::Stable) continue;
        if (!best || e.u_total < best->u_total - 1e-12) {
            best = &e;
        } else if (std::abs(e.u_total - best->u_total) <= 1e-12 &&
                   std::abs(e.cfg.beta) < std::abs(best->cfg.beta)) {
            best = &e;
        }
    }

    SweepRow row;
    row.k = k;
    if (best) {
        row.has_stable = true;
        row.beta_star = best->cfg.beta;
        row.u_star = best->u_total;
        row.classification = best->classification;
        row.within_operational_range = std::abs(best->cfg.beta) <= beta_max;
    }
    return row;
}

}  // namespace

SweepResult stiffness_sweep(const EnergyModel& model_template, std::span<const double> k_list,
                            std::pair<double, double> beta_range, double beta_max, int n_seeds,
                            const SolverOptions& opts, unsigned max_threads) {
    if (k_list.empty()) throw std::invalid_argument("k_list must not be empty");
    for (double k : k_list) {
        if (!std::isfinite(k) || k <= 0.0)
            throw std::invalid_argument("k_list entries must be finite and > 0");
    }
    std::vector<double> ks(k_list.begin(), k_list.end());
    std::sort(ks.begin(), ks.end());
    if (std::adjacent_find(ks.begin(), ks.end()) != ks.end())
        throw std::invalid_argument("k_list contains duplicate entries");

    SweepResult result;
    result.beta_max = beta_max;
    result.rows.resize(ks.size());

    const std::size_t n = ks.size();
    unsigned workers = (max_threads == 0) ? static_cast<unsigned>(n)
                                          : std::min<unsigned>(max_threads, n);
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i)
            result.rows[i] = sweep_one(model_template, ks[i], beta_range, beta_max, n_seeds, opts);
        return result;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                result.rows[i] =
                    sweep_one(model_template, ks[i], beta_range, beta_max, n_seeds, opts);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return result;
}

double critical_stiffness(const EnergyModel& model_template, double beta_tol,
                          std::pair<double, double> k_bracket,
                          std::pair<double, double> beta_range, int n_seeds,
                          const SolverOptions& opts) {
    if (!(std::isfinite(beta_tol) && beta_tol > 0.0))
        throw std::invalid_argument("beta_tol must be finite and > 0");
    auto [k_lo, k_hi] = k_bracket;
    if (!(std::isfinite(k_lo) && std::isfinite(k_hi) && 0.0 < k_lo && k_lo < k_hi))
        throw std::invalid_argument("k_bracket must satisfy 0 < lo < hi");

    const auto deflection = [&](double k) {
        const SweepRow row = sweep_one(model_template, k, beta_range, 1e300, n_seeds, opts);
        if (!row.has_stable)
            throw std::runtime_error("no stable equilibrium at k = " + std::to_string(k));
        return std::abs(row.beta_star);
    };

    if (deflection(k_lo) <= beta_tol) return k_lo;  // bound already met at the lower edge
    const double d_hi = deflection(k_hi);
    if (d_hi > beta_tol)
        throw BracketError("deflection " + std::to_string(d_hi) + " rad at k_hi = " +
                           std::to_string(k_hi) + " still exceeds beta_tol = " +
                           std::to_string(beta_tol) + "; widen the bracket (try k_hi = " +
                           std::to_string(10.0 * k_hi) + ")");

    while (k_hi - k_lo > 1e-6 * k_hi) {
        const double mid = 0.5 * (k_lo + k_hi);
        if (deflection(mid) <= beta_tol)
            k_hi = mid;
        else
            k_lo = mid;
    }
    return k_hi;
}

}  // namespace stab
