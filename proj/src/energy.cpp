#include "stab/energy.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace stab {

namespace {

struct RotationDerivs {
    Mat3 r, r_a, r_b, r_aa, r_ab, r_bb;
};

RotationDerivs rotation_derivs(const TiltConfig& cfg) {
    const double ca = std::cos(cfg.alpha), sa = std::sin(cfg.alpha);
    const double cb = std::cos(cfg.beta), sb = std::sin(cfg.beta);
    RotationDerivs d;
    d.r << cb, 0, sb,            //
        sa * sb, ca, -sa * cb,   //
        -ca * sb, sa, ca * cb;
    d.r_a << 0, 0, 0,            //
        ca * sb, -sa, -ca * cb,  //
        sa * sb, ca, -sa * cb;
    d.r_b << -sb, 0, cb,         //
        sa * cb, 0, sa * sb,     //
        -ca * cb, 0, -ca * sb;
    d.r_aa << 0, 0, 0,           //
        -sa * sb, -ca, sa * cb,  //
        ca * sb, -sa, -ca * cb;
    d.r_ab << 0, 0, 0,           //
        ca * cb, 0, ca * sb,     //
        sa * cb, 0, sa * sb;
    d.r_bb << -cb, 0, -sb,       //
        -sa * sb, 0, sa * cb,    //
        ca * sb, 0, -ca * cb;
    return d;
}

struct Terms {
    double energy = 0.0;
    double g_a = 0.0, g_b = 0.0;
    double h_aa = 0.0, h_ab = 0.0, h_bb = 0.0;
};

// Spring term of the geometric backend: 0.5*k*sum (l_i - l_o)^2 with the
// optional tension-only clamp, plus its chain-rule derivatives in (alpha, beta).
Terms spring_terms(const MechanismGeometry& geom, double k, const TiltConfig& cfg,
                   bool with_derivs) {
    const RotationDerivs d = rotation_derivs(cfg);
    Terms t;
    for (int i = 0; i < 3; ++i) {
        const Vec3 anchor(geom.r_f * std::cos(geom.platform_angles[i]),
                          geom.r_f * std::sin(geom.platform_angles[i]), geom.platform_offset);
        const Vec3 base(geom.r_f * std::cos(geom.base_angles[i]),
                        geom.r_f * std::sin(geom.base_angles[i]), -geom.base_offset);
        const Vec3 c = d.r * anchor;
        const Vec3 sep = c - base;

        if (geom.l_o == 0.0) {
            // Zero free length: the energy is polynomial in the endpoints, no
            // sqrt and no clamp (l >= 0 = l_o always).
            t.energy += 0.5 * k * sep.squaredNorm();
            if (!with_derivs) continue;
            const Vec3 c_a = d.r_a * anchor, c_b = d.r_b * anchor;
            t.g_a += k * sep.dot(c_a);
            t.g_b += k * sep.dot(c_b);
            t.h_aa += k * (c_a.dot(c_a) + sep.dot(d.r_aa * anchor));
            t.h_ab += k * (c_a.dot(c_b) + sep.dot(d.r_ab * anchor));
            t.h_bb += k * (c_b.dot(c_b) + sep.dot(d.r_bb * anchor));
            continue;
        }

        const double len = sep.norm();
        const double ext = len - geom.l_o;
        if (geom.tension_only && ext <= 0.0) continue;  // slack cable
        t.energy += 0.5 * k * ext * ext;
        if (!with_derivs) continue;
        if (len < 1e-12) continue;  // coincident endpoints: length direction undefined
        const Vec3 dir = sep / len;
        const Vec3 c_a = d.r_a * anchor, c_b = d.r_b * anchor;
        const double l_a = dir.dot(c_a), l_b = dir.dot(c_b);
        const double l_aa = (c_a.dot(c_a) - l_a * l_a) / len + dir.dot(d.r_aa * anchor);
        const double l_ab = (c_a.dot(c_b) - l_a * l_b) / len + dir.dot(d.r_ab * anchor);
        const double l_bb = (c_b.dot(c_b) - l_b * l_b) / len + dir.dot(d.r_bb * anchor);
        t.g_a += k * ext * l_a;
        t.g_b += k * ext * l_b;
        t.h_aa += k * (l_a * l_a + ext * l_aa);
        t.h_ab += k * (l_a * l_b + ext * l_ab);
        t.h_bb += k * (l_b * l_b + ext * l_bb);
    }
    return t;
}

// Gravity term w * sin(phi) * (r_f*h + cg_lever) where sin(phi) is the signed
// platform-axis tilt: |(R z) x z| with the sign of sin(beta). On the alpha = 0
// slice this is exactly w*lever*sin(beta). For alpha != 0 the sign flips across
// beta = 0, so derivative-based callers must stay off that line.
Terms gravity_terms(const MechanismGeometry& geom, const TiltConfig& cfg, bool with_derivs) {
    const double amplitude = geom.w * geom.gravity_lever();  // N*mm
    const double ca = std::cos(cfg.alpha), sa = std::sin(cfg.alpha);
    const double cb = std::cos(cfg.beta), sb = std::sin(cfg.beta);
    const double m = sb * sb + sa * sa * cb * cb;

    Terms t;
    if (m == 0.0) {
        // Exact home pose: use the limit along the smooth beta line. The alpha
        // curvature of the tilt cone is undefined here and reported as zero.
        t.energy = 0.0;
        if (with_derivs) t.g_b = amplitude;
        return t;
    }

    const double sign = (sb >= 0.0) ? 1.0 : -1.0;
    const double rt = std::sqrt(m);
    t.energy = amplitude * sign * rt;
    if (!with_derivs) return t;

    const double sin2a = 2.0 * sa * ca, sin2b = 2.0 * sb * cb;
    const double m_a = sin2a * cb * cb;
    const double m_b = sin2b * ca * ca;
    const double m_aa = 2.0 * (ca * ca - sa * sa) * cb * cb;
    const double m_bb = 2.0 * (cb * cb - sb * sb) * ca * ca;
    const double m_ab = -sin2a * sin2b;

    const double c1 = amplitude * sign / (2.0 * rt);
    t.g_a = c1 * m_a;
    t.g_b = c1 * m_b;
    t.h_aa = c1 * (m_aa - m_a * m_a / (2.0 * m));
    t.h_ab = c1 * (m_ab - m_a * m_b / (2.0 * m));
    t.h_bb = c1 * (m_bb - m_b * m_b / (2.0 * m));
    return t;
}

EnergyEval eval_geometric(const GeometricModel& model, const TiltConfig& cfg) {
    const Terms s = spring_terms(model.geom, model.k, cfg, true);
    const Terms g = gravity_terms(model.geom, cfg, true);
    EnergyEval e;
    e.u_spring = s.energy;
    e.u_gravity = g.energy;
    e.u_total = e.u_spring + e.u_gravity;
    e.grad << s.g_a + g.g_a, s.g_b + g.g_b;
    e.hessian << s.h_aa + g.h_aa, s.h_ab + g.h_ab,  //
        s.h_ab + g.h_ab, s.h_bb + g.h_bb;
    return e;
}

EnergyEval eval_reduced(const ReducedModel& model, const TiltConfig& cfg) {
    const double cb = std::cos(cfg.beta), sb = std::sin(cfg.beta);
    const ReducedCoefficients& c = model.coef;
    EnergyEval e;
    e.u_spring = model.k * (c.spring_const - c.spring_cos_amp * cb);
    e.u_gravity = c.gravity_amplitude * sb;
    e.u_total = e.u_spring + e.u_gravity;
    e.grad << 0.0, c.gravity_amplitude * cb + c.spring_cos_amp * model.k * sb;
    e.hessian << 0.0, 0.0,  //
        0.0, -c.gravity_amplitude * sb + c.spring_cos_amp * model.k * cb;
    return e;
}

void check_fd_step(double step) {
    if (!(step > 0.0 && step < 1e-2))
        throw std::invalid_argument("finite-difference step must lie in (0, 1e-2)");
}

}  // namespace

double model_stiffness(const EnergyModel& model) {
    return std::visit([](const auto& m) { return m.k; }, model);
}

EnergyModel with_stiffness(EnergyModel model, double k) {
    std::visit([k](auto& m) { m.k = k; }, model);
    return model;
}

void validate_model(const EnergyModel& model) {
    const double k = model_stiffness(model);
    if (!std::isfinite(k) || k <= 0.0)
        throw std::invalid_argument("EnergyModel: stiffness k must be finite and > 0");
    if (const auto* gm = std::get_if<GeometricModel>(&model)) gm->geom.validate();
}

double spring_energy(const EnergyModel& model, const TiltConfig& cfg) {
    if (const auto* gm = std::get_if<GeometricModel>(&model))
        return spring_terms(gm->geom, gm->k, cfg, false).energy;
    const auto& rm = std::get<ReducedModel>(model);
    return rm.k * (rm.coef.spring_const - rm.coef.spring_cos_amp * std::cos(cfg.beta));
}

double gravity_energy(const EnergyModel& model, const TiltConfig& cfg) {
    if (const auto* gm = std::get_if<GeometricModel>(&model))
        return gravity_terms(gm->geom, cfg, false).energy;
    return std::get<ReducedModel>(model).coef.gravity_amplitude * std::sin(cfg.beta);
}

EnergyEval total_energy(const EnergyModel& model, const TiltConfig& cfg) {
    if (const auto* gm = std::get_if<GeometricModel>(&model)) return eval_geometric(*gm, cfg);
    return eval_reduced(std::get<ReducedModel>(model), cfg);
}

Vec2 fd_gradient(const EnergyModel& model, const TiltConfig& cfg, double step) {
    check_fd_step(step);
    const auto u = [&](double a, double b) { return total_energy(model, {a, b}).u_total; };
    return Vec2(
        (u(cfg.alpha + step, cfg.beta) - u(cfg.alpha - step, cfg.beta)) / (2.0 * step),
        (u(cfg.alpha, cfg.beta + step) - u(cfg.alpha, cfg.beta - step)) / (2.0 * step));
}

Mat2 fd_hessian(const EnergyModel& model, const TiltConfig& cfg, double step) {
    check_fd_step(step);
    const auto g = [&](double a, double b) { return total_energy(model, {a, b}).grad; };
    const Vec2 d_da =
        (g(cfg.alpha + step, cfg.beta) - g(cfg.alpha - step, cfg.beta)) / (2.0 * step);
    const Vec2 d_db =
        (g(cfg.alpha, cfg.beta + step) - g(cfg.alpha, cfg.beta - step)) / (2.0 * step);
    Mat2 h;
    h.col(0) = d_da;
    h.col(1) = d_db;
    return h;
}

ReducedFit fit_reduced_coefficients(std::span<const double> betas,
                                    std::span<const double> energies, double k) {
    if (!(std::isfinite(k) && k > 0.0))
        throw std::invalid_argument("fit_reduced_coefficients: k must be finite and > 0");
    if (betas.size() != energies.size())
        throw std::invalid_argument("fit_reduced_coefficients: sample size mismatch");
    if (betas.size() < 3)
        throw DegenerateFitError("fit needs at least 3 sample angles");
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!std::isfinite(betas[i]) || !std::isfinite(energies[i]))
            throw std::invalid_argument("fit_reduced_coefficients: samples must be finite");
    }

    const auto n = static_cast<Eigen::Index>(betas.size());
    Eigen::MatrixXd basis(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        basis(i, 0) = std::sin(betas[i]);
        basis(i, 1) = k;
        basis(i, 2) = k * std::cos(betas[i]);
        rhs(i) = energies[i];
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(2) <= 1e-10 * sv(0))
        throw DegenerateFitError(
            "sample angles do not separate the {sin, const, cos} basis (rank-deficient fit)");

    const Eigen::Vector3d coef = svd.solve(rhs);
    ReducedFit fit;
    fit.coef.gravity_amplitude = coef(0);
    fit.coef.spring_const = coef(1);
    fit.coef.spring_cos_amp = -coef(2);
    fit.max_residual = (basis * coef - rhs).cwiseAbs().maxCoeff();
    return fit;
}

ReducedFit fit_reduced_coefficients(const EnergyModel& model, std::span<const double> betas) {
    validate_model(model);
    std::vector<double> energies(betas.size());
    for (std::size_t i = 0; i < betas.size(); ++i)
        energies[i] = total_energy(model, {0.0, betas[i]}).u_total;
    return fit_reduced_coefficients(betas, energies, model_stiffness(model));
}

}  // namespace stab
