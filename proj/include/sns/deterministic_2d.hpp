#pragma once

// Two-dimensional inequalities, the shifted deterministic problem
//   dv/dt = P_n[-A v + v + z - B(v + z) + f],  v(0) = P_n u0,
// and the pathwise-uniqueness experiment.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "sns/ensemble.hpp"
#include "sns/estimates.hpp"
#include "sns/galerkin.hpp"
#include "sns/physical.hpp"

namespace sns {

/// Constant of the energy inequality for the shifted problem: the Young chain
/// run with the split that leaves (1/2)||v||^2 on the left.
inline constexpr double kShiftedEnergyConstant = 128.0;

namespace detail {

inline void require_2d(const ModeBasis& b) { require(b.dimension() == 2, "operation requires d = 2"); }

inline int l4_grid(const ModeBasis& b) { return exact_quadrature_grid(b.max_wavenumber(), 4); }

} // namespace detail

/// ||u||_{L^4}^4 by quadrature; G defaults to a grid exact for quartics.
inline double l4_norm_pow4(const SpectralField& u, int G = 0) {
    const auto& b = u.basis();
    if (G == 0) G = detail::l4_grid(b);
    const PhysicalField p = eval_physical(u, G);
    double s = 0.0;
    for (std::size_t i = 0; i < p.points(); ++i) {
        double m = 0.0;
        for (int j = 0; j < p.dimension; ++j) m += p.component[j][i] * p.component[j][i];
        s += m * m;
    }
    return s * b.domain().volume() / static_cast<double>(p.points());
}

/// ||u||_{L^4} / (2^{1/4} |u|_H^{1/2} ||u||^{1/2}).
inline double ladyzhenskaya_check(const SpectralField& u, int G = 0) {
    detail::require_2d(u.basis());
    const double h = norm(u, Space::H), d = norm(u, Space::D);
    detail::require(h > 0.0 && d > 0.0, "ladyzhenskaya check needs a nonzero field");
    return std::pow(l4_norm_pow4(u, G), 0.25) / (std::pow(2.0, 0.25) * std::sqrt(h * d));
}

/// |b(u, v, w)| / (2^{1/2} |u|^{1/2} ||u||^{1/2} ||v|| |w|^{1/2} ||w||^{1/2});
/// empty when the denominator vanishes.
inline std::optional<double> trilinear_2d_bound(const SpectralField& u, const SpectralField& v, const SpectralField& w,
                                                TrilinearWorkspace& ws) {
    detail::require_2d(u.basis());
    const double den = std::sqrt(2.0) * std::sqrt(norm(u, Space::H) * norm(u, Space::D)) * norm(v, Space::D) *
                       std::sqrt(norm(w, Space::H) * norm(w, Space::D));
    if (!(den > 0.0)) return std::nullopt;
    return std::abs(trilinear_b(u, v, w, ws)) / den;
}

struct PathBound {
    double lhs = 0.0; ///< ||B(u)||_{L^2(0,T;V')}
    double rhs = 0.0; ///< 2^{1/2} |u|_{L^inf(0,T;H)} ||u||_{L^2(0,T;V)}
    bool holds() const { return lhs <= rhs; }
};

/// Left-endpoint time integrals over the record's snapshots; ||u|| is the
/// Dirichlet seminorm.
inline PathBound path_bound_B(const TrajectoryRecord& rec, const BasisPtr& basis, TrilinearWorkspace& ws) {
    detail::require_2d(*basis);
    detail::require(rec.snapshots.size() >= 2, "path bound needs snapshots");
    PathBound pb;
    double sup_h = 0.0, int_b = 0.0, int_d = 0.0;
    SpectralField u(basis);
    for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
        const auto& s = rec.snapshots[k];
        for (std::size_t i = 0; i < rec.n; ++i) u[i] = s.u[i];
        sup_h = std::max(sup_h, norm(u, Space::H));
        if (k + 1 == rec.snapshots.size()) break;
        const double h = rec.dt * static_cast<double>(rec.snapshots[k + 1].step - s.step);
        int_b += h * std::pow(norm(bilinear_B(u, u, ws), Space::Vdual), 2);
        int_d += h * norm_sq(u, Space::D);
    }
    pb.lhs = std::sqrt(int_b);
    pb.rhs = std::sqrt(2.0) * sup_h * std::sqrt(int_d);
    return pb;
}

struct ShiftedProblem {
    BasisPtr basis;
    std::size_t n = 16;
    double dt = 1e-3;
    std::size_t steps = 0;
    std::vector<SpectralField> z; ///< grid samples, empty for z = 0
    Forcing f;
    SpectralField u0;
    bool nonlinear = true;

    void validate() const {
        detail::require(basis != nullptr, "shifted problem needs a basis");
        detail::require_2d(*basis);
        check_level(*basis, n);
        detail::require(dt > 0.0 && steps > 0, "shifted problem needs dt > 0 and steps > 0");
        detail::require(z.empty() || z.size() == steps + 1, "z must be sampled on every grid time");
    }
    double time(std::size_t k) const { return dt * static_cast<double>(k); }
};

namespace detail {

/// z at t_k + frac * dt, linear in between.
inline SpectralField z_at(const ShiftedProblem& p, std::size_t k, double frac) {
    if (p.z.empty()) return SpectralField(p.basis);
    if (frac == 0.0) return p.z[k];
    SpectralField out = (1.0 - frac) * p.z[k];
    out.axpy(frac, p.z[k + 1]);
    return out;
}

} // namespace detail

class ShiftedSolver {
public:
    explicit ShiftedSolver(const ShiftedProblem& p) : p_(p), ws_(p.basis) {
        p_.validate();
        if (!p_.f.is_zero()) fn_ = project_Pn(p_.f.shape, p_.n);
    }

    /// P_n[-Acal v + z - B(v + z) + f(t)].
    SpectralField rhs(const SpectralField& v, const SpectralField& z, double t) {
        SpectralField out(p_.basis);
        for (std::size_t i = 0; i < p_.n; ++i) out[i] = -p_.basis->mode(i).k2 * v[i] + z[i];
        if (p_.nonlinear) {
            const SpectralField w = v + z;
            out -= project_Pn(ws_.apply(w, w, p_.n), p_.n);
        }
        if (!fn_.empty()) out.axpy(p_.f.factor(t), fn_);
        return project_Pn(out, p_.n);
    }

    std::vector<SpectralField> solve() {
        std::vector<SpectralField> path;
        path.reserve(p_.steps + 1);
        path.push_back(p_.u0.empty() ? SpectralField(p_.basis) : project_Pn(p_.u0, p_.n));
        const double h = p_.dt;
        for (std::size_t k = 0; k < p_.steps; ++k) {
            const double t = p_.time(k);
            const SpectralField& v = path.back();
            const SpectralField z0 = detail::z_at(p_, k, 0.0), zh = detail::z_at(p_, k, 0.5), z1 = detail::z_at(p_, k, 1.0);
            const SpectralField k1 = rhs(v, z0, t);
            const SpectralField k2 = rhs(v + (0.5 * h) * k1, zh, t + 0.5 * h);
            const SpectralField k3 = rhs(v + (0.5 * h) * k2, zh, t + 0.5 * h);
            const SpectralField k4 = rhs(v + h * k3, z1, t + h);
            SpectralField next = v;
            next.axpy(h / 6.0, k1);
            next.axpy(h / 3.0, k2);
            next.axpy(h / 3.0, k3);
            next.axpy(h / 6.0, k4);
            if (!next.all_finite()) throw IntegrationAborted("non-finite shifted state", k + 1, p_.time(k + 1));
            path.push_back(std::move(next));
        }
        return path;
    }

    TrilinearWorkspace& workspace() { return ws_; }

private:
    ShiftedProblem p_;
    TrilinearWorkspace ws_;
    SpectralField fn_;
};

inline std::vector<SpectralField> solve_shifted(const ShiftedProblem& p) { return ShiftedSolver(p).solve(); }

struct EnergyInequalityReport {
    double worst_margin = std::numeric_limits<double>::infinity();
    std::size_t worst_step = 0;
    std::size_t violations = 0;
};

/// Per step, with trapezoid averages of the pointwise terms,
///   margin = avg(a + theta |v|^2 - (1/2)||v||^2) - (|v_{k+1}|^2 - |v_k|^2) / dt,
/// a = |z|^2 + |f|^2_{V'} + C ||z||^4_{L4}, theta = 2 + C ||z||^4_{L4}.
inline EnergyInequalityReport energy_inequality_check(const std::vector<SpectralField>& v, const ShiftedProblem& p) {
    p.validate();
    detail::require(v.size() == p.steps + 1, "path and problem are not aligned");
    const double C = kShiftedEnergyConstant;
    const SpectralField fn = p.f.is_zero() ? SpectralField() : p.f.shape;
    const double f_dual_sq = p.f.is_zero() ? 0.0 : norm_sq(fn, Space::Vdual);
    auto pointwise = [&](std::size_t k) {
        double z2 = 0.0, z4 = 0.0;
        if (!p.z.empty()) {
            z2 = norm_sq(p.z[k], Space::H);
            z4 = l4_norm_pow4(p.z[k]);
        }
        const double fc = p.f.factor(p.time(k));
        const double a = z2 + fc * fc * f_dual_sq + C * z4;
        const double theta = 2.0 + C * z4;
        return a + theta * norm_sq(v[k], Space::H) - 0.5 * norm_sq(v[k], Space::D);
    };
    EnergyInequalityReport r;
    double prev = pointwise(0);
    for (std::size_t k = 0; k < p.steps; ++k) {
        const double next = pointwise(k + 1);
        const double margin = 0.5 * (prev + next) - (norm_sq(v[k + 1], Space::H) - norm_sq(v[k], Space::H)) / p.dt;
        if (margin < r.worst_margin) {
            r.worst_margin = margin;
            r.worst_step = k;
        }
        if (margin < 0.0) ++r.violations;
        prev = next;
    }
    return r;
}

struct UniquenessReport {
    std::vector<double> distance_sq; ///< |v1 - v2|^2_H on the grid
    std::vector<double> envelope;    ///< Gronwall envelope with a = 0, theta = 2||v2 + z||^2
    double worst_ratio = 0.0;        ///< max distance / envelope where envelope > 0
    bool identical = false;          ///< bitwise identical paths
    bool under_envelope = true;
};

/// tol is the relative slack allowed above the envelope.
inline UniquenessReport uniqueness_shifted(const ShiftedProblem& p, const SpectralField& v10, const SpectralField& v20,
                                           double tol = 1e-9) {
    ShiftedProblem p1 = p, p2 = p;
    p1.u0 = v10;
    p2.u0 = v20;
    const auto a = solve_shifted(p1), b = solve_shifted(p2);
    UniquenessReport r;
    r.identical = true;
    std::vector<double> theta, zero(p.steps, 0.0);
    for (std::size_t k = 0; k <= p.steps; ++k) {
        r.identical = r.identical && a[k] == b[k];
        r.distance_sq.push_back(norm_sq(a[k] - b[k], Space::H));
        if (k < p.steps) theta.push_back(2.0 * norm_sq(p.z.empty() ? b[k] : b[k] + p.z[k], Space::D));
    }
    r.envelope = gronwall_eval(zero, theta, r.distance_sq[0], uniform_grid(p.dt * static_cast<double>(p.steps), p.steps));
    for (std::size_t k = 0; k <= p.steps; ++k) {
        if (r.distance_sq[k] > r.envelope[k] * (1.0 + tol)) r.under_envelope = false;
        if (r.envelope[k] > 0.0) r.worst_ratio = std::max(r.worst_ratio, r.distance_sq[k] / r.envelope[k]);
    }
    return r;
}

/// Stokes-plus-noise companion path: the Galerkin system with B disabled,
/// sampled at every step.
inline std::vector<SpectralField> stokes_companion(const BasisPtr& basis, GalerkinConfig cfg,
                                                   const std::optional<NoiseModel>& noise, const WienerPath& path) {
    cfg.nonlinear = false;
    cfg.snapshot_stride = 1;
    GalerkinSystem sys(basis, cfg, noise);
    const auto rec = sys.integrate(path);
    std::vector<SpectralField> z;
    z.reserve(rec.snapshots.size());
    for (const auto& s : rec.snapshots) {
        SpectralField f(basis);
        for (std::size_t i = 0; i < rec.n; ++i) f[i] = s.u[i];
        z.push_back(std::move(f));
    }
    return z;
}

struct UniquenessExperiment {
    double lipschitz_L = 0.0;
    double epsilon = 0.0; ///< Young split, (2 - L) / 2
    double a = 0.0;       ///< weight in r(t) = a int ||u2||^2, equal to 2 / epsilon
    double gamma = 0.0;
    std::vector<double> ratios; ///< e^{-r(T)} |U(T)|^2 / |U(0)|^2 per trajectory (gamma > 0)
    std::vector<double> sup_distance; ///< sup_t |u1 - u2|_H per trajectory
    double median_ratio = 0.0;
    double max_ratio = 0.0;
    bool all_identical = true; ///< bitwise identical pairs (meaningful for gamma = 0)
};

/// Twin runs from u0 and u0 + gamma e_0 on the same Wiener path.
inline UniquenessExperiment pathwise_uniqueness_experiment(const BasisPtr& basis, const GalerkinConfig& cfg,
                                                           const std::optional<NoiseModel>& noise, double lipschitz_L,
                                                           double gamma, std::size_t trajectories,
                                                           std::size_t workers = 1) {
    detail::require_2d(*basis);
    detail::require(lipschitz_L < 2.0, "pathwise uniqueness requires a certified Lipschitz constant L < 2");
    detail::require(gamma >= 0.0 && trajectories >= 1, "uniqueness experiment needs gamma >= 0 and trajectories >= 1");
    UniquenessExperiment ex;
    ex.lipschitz_L = lipschitz_L;
    ex.epsilon = 0.5 * (2.0 - lipschitz_L);
    ex.a = 2.0 / ex.epsilon;
    ex.gamma = gamma;
    GalerkinConfig c1 = cfg;
    c1.snapshot_stride = 1;
    GalerkinConfig c2 = c1;
    if (c2.u0.empty()) c2.u0 = SpectralField(basis);
    c2.u0[0] += gamma;
    struct Pair {
        bool identical = false;
        double ratio = 0.0;
        double sup = 0.0;
    };
    const std::size_t M = noise ? noise->directions.size() : 0;
    const auto res = parallel_map<Pair>(trajectories, resolve_workers(workers), [&](std::size_t j) {
        GalerkinSystem s1(basis, c1, noise), s2(basis, c2, noise);
        const WienerPath w = generate_wiener(c1.steps(), M, c1.dt, c1.seed, j);
        const auto r1 = s1.integrate(w), r2 = s2.integrate(w);
        Pair out;
        out.identical = r1.energy == r2.energy;
        std::vector<double> U(r1.snapshots.size(), 0.0);
        for (std::size_t k = 0; k < U.size(); ++k) {
            out.identical = out.identical && r1.snapshots[k].u == r2.snapshots[k].u;
            for (std::size_t i = 0; i < c1.n; ++i) U[k] += std::pow(r1.snapshots[k].u[i] - r2.snapshots[k].u[i], 2);
            out.sup = std::max(out.sup, std::sqrt(U[k]));
        }
        const double r = ex.a * r2.integral_dirichlet();
        out.ratio = U.front() > 0.0 ? std::exp(-r) * U.back() / U.front() : 0.0;
        return out;
    });
    for (const auto& p : res) {
        ex.all_identical = ex.all_identical && p.identical;
        ex.sup_distance.push_back(p.sup);
        if (gamma > 0.0) ex.ratios.push_back(p.ratio);
    }
    if (!ex.ratios.empty()) {
        std::vector<double> s = ex.ratios;
        std::sort(s.begin(), s.end());
        ex.median_ratio = s.size() % 2 ? s[s.size() / 2] : 0.5 * (s[s.size() / 2 - 1] + s[s.size() / 2]);
        ex.max_ratio = s.back();
    }
    return ex;
}

} // namespace sns
