#pragma once

// Euler-Maruyama integration of the Galerkin system
//   du = -[P_n Acal u + B_n(u) - P_n f] dt + P_n G(u) dW,   u(0) = P_n u0
// with a per-step energy ledger and the drift/martingale decomposition
//   u(t) = u(0) + J2(t) + J3(t) + J4(t) + J5(t).

#include <cmath>
#include <cstdint>
#include <limits>
#include <algorithm>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sns/noise.hpp"
#include "sns/nonlinearity.hpp"

namespace sns {

enum class Scheme { EulerMaruyama, ExponentialEuler };

/// f(t) = shape * cos(omega t); an empty shape means f = 0.
struct Forcing {
    SpectralField shape;
    double omega = 0.0;

    bool is_zero() const { return shape.empty() || shape.support() == 0; }
    double factor(double t) const { return omega == 0.0 ? 1.0 : std::cos(omega * t); }
};

struct GalerkinConfig {
    std::size_t n = 16;
    double dt = 1e-3;
    double T = 1.0;
    CutoffSpec cutoff{1e6};
    bool nonlinear = true;
    Scheme scheme = Scheme::EulerMaruyama;
    Forcing forcing;
    SpectralField u0;
    std::uint64_t seed = 0;
    std::size_t snapshot_stride = 0; ///< 0 disables snapshots

    std::size_t steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

    void validate(const ModeBasis& basis) const {
        detail::require(dt > 0.0 && std::isfinite(dt), "galerkin.dt must be positive");
        detail::require(T >= dt, "galerkin.T must be at least galerkin.dt");
        detail::require(std::abs(steps() * dt - T) <= 1e-9 * T, "galerkin.T must be an integer multiple of galerkin.dt");
        check_level(basis, n);
        detail::require(cutoff.level > 0.0, "galerkin.cutoff must be positive");
        if (scheme == Scheme::EulerMaruyama)
            detail::require(dt * basis.max_k2(n) < 1.0, "CFL gate violated: dt * max |k|^2 over active modes must be < 1");
    }
};

struct WienerPath {
    std::size_t steps = 0;
    std::size_t M = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t trajectory = 0;
    std::vector<double> increments; ///< row major, steps x M

    std::span<const double> row(std::size_t step) const { return {increments.data() + step * M, M}; }
};

/// Increment (s, i) is sqrt(dt) times the normal variate keyed by
/// (seed, trajectory, step s, direction i).
inline WienerPath generate_wiener(std::size_t steps, std::size_t M, double dt, std::uint64_t seed,
                                  std::uint64_t trajectory = 0) {
    detail::require(dt > 0.0, "dt must be positive");
    WienerPath w;
    w.steps = steps;
    w.M = M;
    w.dt = dt;
    w.seed = seed;
    w.trajectory = trajectory;
    w.increments.resize(steps * M);
    const CounterRng rng(seed, trajectory);
    const double sq = std::sqrt(dt);
    for (std::size_t s = 0; s < steps; ++s)
        for (std::size_t i = 0; i < M; ++i)
            w.increments[s * M + i] = sq * rng.normal(static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(i));
    return w;
}

struct StepLedger {
    double energy_before = 0.0;  ///< |u|^2_H
    double energy_after = 0.0;   ///< |u+|^2_H
    double drift_work = 0.0;     ///< 2 <u, linear + nonlinear increment>
    double forcing_work = 0.0;   ///< 2 <u, dt P_n f>
    double martingale = 0.0;     ///< 2 <u, xi>
    double increment_sq = 0.0;   ///< |u+ - u|^2_H
    double noise_sq = 0.0;       ///< |xi|^2_H
    double ito_expected = 0.0;   ///< dt |P_n G(u)|^2_HS
};

/// Truncated coefficient vectors (first n entries) at one grid time.
struct Snapshot {
    std::size_t step = 0;
    double t = 0.0;
    std::vector<double> u, J2, J3, J4, J5;
};

struct TrajectoryRecord {
    std::size_t n = 0;
    double dt = 0.0;
    std::size_t steps = 0;
    std::uint64_t seed = 0;
    std::uint64_t trajectory = 0;
    std::uint64_t config_hash = 0;
    std::vector<double> energy;    ///< |u|^2_H at every grid time
    std::vector<double> dirichlet; ///< ||u||^2 at every grid time
    std::vector<double> udual;     ///< |u|_{U'} at every grid time
    std::vector<StepLedger> ledger;
    std::vector<Snapshot> snapshots;

    double time(std::size_t k) const { return static_cast<double>(k) * dt; }
    double sup_energy() const {
        double m = 0.0;
        for (double e : energy) m = std::max(m, e);
        return m;
    }
    /// Left-endpoint integral of ||u||^2.
    double integral_dirichlet() const {
        double s = 0.0;
        for (std::size_t k = 0; k < steps; ++k) s += dt * dirichlet[k];
        return s;
    }
};

struct StepParts {
    SpectralField linear;    ///< -dt P_n Acal u, or (exp(-|k|^2 dt) - 1) u
    SpectralField nonlinear; ///< -dt B_n(u)
    SpectralField forcing;   ///< dt P_n f(t)
    SpectralField noise;     ///< P_n G(u) dW
    double hs_sq = 0.0;      ///< |P_n G(u)|^2_HS
};

/// Per-worker integrator state. The noise operator and trilinear workspace
/// hold scratch buffers, so a system must not be shared between threads.
class GalerkinSystem {
public:
    GalerkinSystem(BasisPtr basis, GalerkinConfig config, std::optional<NoiseModel> noise)
        : basis_(std::move(basis)), cfg_(std::move(config)), ws_(basis_) {
        cfg_.validate(*basis_);
        if (noise && !noise->directions.empty()) G_.emplace(basis_, *noise);
        if (!cfg_.forcing.is_zero()) forcing_n_ = project_Pn(cfg_.forcing.shape, cfg_.n);
    }

    const ModeBasis& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    const GalerkinConfig& config() const { return cfg_; }
    std::size_t noise_dimension() const { return G_ ? G_->size() : 0; }
    NoiseOperator* noise() { return G_ ? &*G_ : nullptr; }
    TrilinearWorkspace& workspace() { return ws_; }

    StepParts parts(const SpectralField& u, double t, std::span<const double> dW) {
        const std::size_t n = cfg_.n;
        const double dt = cfg_.dt;
        StepParts p{SpectralField(basis_), SpectralField(basis_), SpectralField(basis_), SpectralField(basis_), 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            const double k2 = basis_->mode(i).k2;
            p.linear[i] = cfg_.scheme == Scheme::EulerMaruyama ? -dt * k2 * u[i] : std::expm1(-k2 * dt) * u[i];
        }
        if (cfg_.nonlinear) {
            p.nonlinear = truncated_Bn(u, n, cfg_.cutoff, ws_);
            p.nonlinear *= -dt;
        }
        if (!forcing_n_.empty()) p.forcing.axpy(dt * cfg_.forcing.factor(t), forcing_n_);
        if (G_) {
            detail::require(dW.size() == G_->size(), "Wiener increment has the wrong number of directions");
            for (std::size_t i = 0; i < G_->size(); ++i) {
                const SpectralField g = G_->direction(u, i, n);
                p.hs_sq += norm_sq(g, Space::H);
                if (dW[i] != 0.0) p.noise.axpy(dW[i], g);
            }
        }
        return p;
    }

    SpectralField step(const SpectralField& u, double t, std::span<const double> dW) {
        const StepParts p = parts(u, t, dW);
        SpectralField next = u;
        next += p.linear;
        next += p.nonlinear;
        next += p.forcing;
        next += p.noise;
        return next;
    }

    /// Integrates from P_n u0 along the given path.
    TrajectoryRecord integrate(const WienerPath& path) {
        const std::size_t steps = cfg_.steps();
        const std::size_t M = noise_dimension();
        detail::require(path.steps >= steps && path.M == M, "Wiener path does not match the configuration");
        const std::size_t n = cfg_.n;
        TrajectoryRecord rec;
        rec.n = n;
        rec.dt = cfg_.dt;
        rec.steps = steps;
        rec.seed = path.seed;
        rec.trajectory = path.trajectory;
        rec.energy.reserve(steps + 1);
        rec.dirichlet.reserve(steps + 1);
        rec.udual.reserve(steps + 1);
        rec.ledger.reserve(steps);

        SpectralField u = cfg_.u0.empty() ? SpectralField(basis_) : project_Pn(cfg_.u0, n);
        SpectralField J2(basis_), J3(basis_), J4(basis_), J5(basis_);
        auto observe = [&](std::size_t k) {
            rec.energy.push_back(norm_sq(u, Space::H));
            rec.dirichlet.push_back(norm_sq(u, Space::D));
            rec.udual.push_back(norm(u, Space::Udual));
            if (cfg_.snapshot_stride > 0 && (k % cfg_.snapshot_stride == 0 || k == steps)) {
                auto head = [n](const SpectralField& f) { return std::vector<double>(f.coeffs().begin(), f.coeffs().begin() + n); };
                rec.snapshots.push_back({k, rec.time(k), head(u), head(J2), head(J3), head(J4), head(J5)});
            }
        };
        observe(0);
        const std::vector<double> no_noise;
        for (std::size_t k = 0; k < steps; ++k) {
            const double t = rec.time(k);
            const StepParts p = parts(u, t, M > 0 ? path.row(k) : std::span<const double>(no_noise));
            StepLedger L;
            L.energy_before = rec.energy.back();
            L.drift_work = 2.0 * (inner(u, p.linear, Space::H) + inner(u, p.nonlinear, Space::H));
            L.forcing_work = 2.0 * inner(u, p.forcing, Space::H);
            L.martingale = 2.0 * inner(u, p.noise, Space::H);
            L.noise_sq = norm_sq(p.noise, Space::H);
            L.ito_expected = cfg_.dt * p.hs_sq;
            SpectralField du = p.linear;
            du += p.nonlinear;
            du += p.forcing;
            du += p.noise;
            L.increment_sq = norm_sq(du, Space::H);
            u += du;
            J2 += p.linear;
            J3 += p.nonlinear;
            J4 += p.forcing;
            J5 += p.noise;
            if (!u.all_finite()) throw IntegrationAborted("non-finite Galerkin state", k + 1, rec.time(k + 1));
            L.energy_after = norm_sq(u, Space::H);
            rec.ledger.push_back(L);
            observe(k + 1);
        }
        return rec;
    }

private:
    BasisPtr basis_;
    GalerkinConfig cfg_;
    std::optional<NoiseOperator> G_;
    TrilinearWorkspace ws_;
    SpectralField forcing_n_;
};

inline SpectralField em_step(const SpectralField& u, double t, std::span<const double> dW, GalerkinSystem& sys) {
    return sys.step(u, t, dW);
}

inline TrajectoryRecord integrate_trajectory(GalerkinSystem& sys, const WienerPath& path) {
    return sys.integrate(path);
}

struct EnergyBudget {
    double max_residual = 0.0;  ///< worst relative per-step residual of the algebraic identity
    double noise_sq_sum = 0.0;  ///< sum |xi|^2
    double ito_sum = 0.0;       ///< sum dt |P_n G|^2_HS
    double martingale_sum = 0.0;
};

/// Checks |u+|^2 - |u|^2 = 2<u, du> + |du|^2 on every step, with 2<u, du>
/// assembled from the separately recorded drift, forcing and noise work.
inline EnergyBudget energy_budget_check(const TrajectoryRecord& rec) {
    EnergyBudget b;
    for (const auto& L : rec.ledger) {
        const double lhs = L.energy_after - L.energy_before;
        const double rhs = L.drift_work + L.forcing_work + L.martingale + L.increment_sq;
        const double scale = std::max({L.energy_after, L.energy_before, 1e-300});
        b.max_residual = std::max(b.max_residual, std::abs(lhs - rhs) / scale);
        b.noise_sq_sum += L.noise_sq;
        b.ito_sum += L.ito_expected;
        b.martingale_sum += L.martingale;
    }
    return b;
}

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    std::size_t count = 0;

    double z() const { return se > 0.0 ? mean / se : (mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean)); }
};

/// Sample mean with the standard error of the mean, summed in index order.
inline MeanSE mean_se(std::span<const double> x) {
    MeanSE r;
    r.count = x.size();
    if (x.empty()) return r;
    double s = 0.0;
    for (double v : x) s += v;
    r.mean = s / static_cast<double>(x.size());
    if (x.size() < 2) return r;
    double q = 0.0;
    for (double v : x) q += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(q / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
    return r;
}

/// Ito comparison: per trajectory X = sum |xi|^2 - sum dt |P_n G|^2_HS has
/// mean zero.
inline MeanSE ito_comparison(std::span<const EnergyBudget> budgets) {
    std::vector<double> x;
    x.reserve(budgets.size());
    for (const auto& b : budgets) x.push_back(b.noise_sq_sum - b.ito_sum);
    return mean_se(x);
}

enum class TestFunctional { One, CosFirstMode, EnergyDecay };

inline double test_functional(TestFunctional h, std::span<const double> u_s) {
    switch (h) {
    case TestFunctional::One: return 1.0;
    case TestFunctional::CosFirstMode: return u_s.empty() ? 1.0 : std::cos(u_s[0]);
    case TestFunctional::EnergyDecay: {
        double e = 0.0;
        for (double x : u_s) e += x * x;
        return std::exp(-e);
    }
    }
    return 1.0;
}

/// Probe for the martingale identities on [s, t] (grid indices).
struct MartingaleProbe {
    std::vector<double> psi, zeta; ///< full-basis coefficients
    std::size_t s = 0, t = 0;
    TestFunctional h = TestFunctional::One;
};

struct MartingaleSample {
    double mean_term = 0.0;       ///< <M(t) - M(s), psi> h
    double qv_term = 0.0;         ///< (<dM, psi><dM, zeta> - int sum_i <G e_i, psi><G e_i, zeta>) h
    double reconstruction = 0.0;  ///< max |M - J5| over the two snapshot times
};

/// Requires snapshots at every step in [s, t]. M is reconstructed from the
/// drift integrals, M = u - u(0) - J2 - J3 - J4.
inline MartingaleSample martingale_sample(const TrajectoryRecord& rec, const MartingaleProbe& probe, GalerkinSystem& sys) {
    detail::require(probe.s < probe.t && probe.t <= rec.steps, "martingale probe needs s < t <= steps");
    auto find = [&](std::size_t k) -> const Snapshot& {
        const std::size_t stride = sys.config().snapshot_stride;
        detail::require(stride == 1 && rec.snapshots.size() == rec.steps + 1, "insufficient snapshots: stride 1 required");
        return rec.snapshots[k];
    };
    const std::size_t n = rec.n;
    const Snapshot& s0 = find(0);
    auto M_at = [&](const Snapshot& sn, std::vector<double>& M) {
        M.assign(n, 0.0);
        double rec_err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            M[i] = sn.u[i] - s0.u[i] - sn.J2[i] - sn.J3[i] - sn.J4[i];
            rec_err = std::max(rec_err, std::abs(M[i] - sn.J5[i]));
        }
        return rec_err;
    };
    std::vector<double> Ms, Mt;
    MartingaleSample out;
    out.reconstruction = std::max(M_at(find(probe.s), Ms), M_at(find(probe.t), Mt));
    double dpsi = 0.0, dzeta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dpsi += (Mt[i] - Ms[i]) * probe.psi[i];
        dzeta += (Mt[i] - Ms[i]) * probe.zeta[i];
    }
    double qv = 0.0;
    if (NoiseOperator* G = sys.noise()) {
        SpectralField u(sys.basis_ptr());
        for (std::size_t k = probe.s; k < probe.t; ++k) {
            const Snapshot& sn = find(k);
            for (std::size_t i = 0; i < n; ++i) u[i] = sn.u[i];
            for (std::size_t d = 0; d < G->size(); ++d) {
                const SpectralField g = G->direction(u, d, n);
                double a = 0.0, b = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    a += g[i] * probe.psi[i];
                    b += g[i] * probe.zeta[i];
                }
                qv += rec.dt * a * b;
            }
        }
    }
    const double h = test_functional(probe.h, find(probe.s).u);
    out.mean_term = dpsi * h;
    out.qv_term = (dpsi * dzeta - qv) * h;
    return out;
}

struct MartingaleDiagnostic {
    MeanSE mean;
    MeanSE qv;
    double max_reconstruction = 0.0;
};

inline MartingaleDiagnostic martingale_diagnostic(std::span<const MartingaleSample> samples) {
    detail::require(samples.size() >= 100, "martingale diagnostic needs at least 100 trajectories");
    std::vector<double> a, b;
    MartingaleDiagnostic d;
    for (const auto& s : samples) {
        a.push_back(s.mean_term);
        b.push_back(s.qv_term);
        d.max_reconstruction = std::max(d.max_reconstruction, s.reconstruction);
    }
    d.mean = mean_se(a);
    d.qv = mean_se(b);
    return d;
}

} // namespace sns
