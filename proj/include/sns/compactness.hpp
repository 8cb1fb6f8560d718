#pragma once

// Empirical compactness diagnostics on families of Galerkin paths, and the
// Holly-Wiciak nested weighted space.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sns/galerkin.hpp"

namespace sns {

/// First-n coefficient trajectory on a uniform time grid, row major.
struct CoefficientPath {
    std::size_t n = 0;
    double dt = 0.0;
    std::vector<double> data;

    std::size_t times() const { return n == 0 ? 0 : data.size() / n; }
    std::span<const double> at(std::size_t k) const { return {data.data() + k * n, n}; }
    double horizon() const { return dt * static_cast<double>(times() - 1); }
};

/// Path sampled at the record's snapshot times; requires a uniform stride.
inline CoefficientPath path_from_record(const TrajectoryRecord& rec) {
    detail::require(rec.snapshots.size() >= 2, "trajectory record has no snapshots");
    CoefficientPath p;
    p.n = rec.n;
    const std::size_t stride = rec.snapshots[1].step - rec.snapshots[0].step;
    for (std::size_t k = 0; k + 1 < rec.snapshots.size(); ++k)
        detail::require(rec.snapshots[k + 1].step - rec.snapshots[k].step == stride, "snapshots must be uniformly spaced");
    p.dt = rec.dt * static_cast<double>(stride);
    for (const auto& s : rec.snapshots) p.data.insert(p.data.end(), s.u.begin(), s.u.end());
    return p;
}

/// Weighted distance sqrt(sum w_i (a_i - b_i)^2) with weights of one space.
class CoefficientMetric {
public:
    CoefficientMetric(const ModeBasis& basis, Space space, std::size_t n)
        : w_(basis.weights(space).begin(), basis.weights(space).begin() + static_cast<std::ptrdiff_t>(n)) {}

    double operator()(std::span<const double> a, std::span<const double> b) const {
        double s = 0.0;
        for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s);
    }
    double norm(std::span<const double> a) const {
        double s = 0.0;
        for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * a[i] * a[i];
        return std::sqrt(s);
    }

private:
    std::vector<double> w_;
};

/// lag_sup[l] = max_k d(u(t_{k+l}), u(t_k)) for l = 0..max_lag.
inline std::vector<double> lag_sup_curve(const CoefficientPath& u, const CoefficientMetric& d, std::size_t max_lag) {
    const std::size_t N = u.times();
    max_lag = std::min(max_lag, N == 0 ? 0 : N - 1);
    std::vector<double> out(max_lag + 1, 0.0);
    for (std::size_t l = 1; l <= max_lag; ++l)
        for (std::size_t k = 0; k + l < N; ++k) out[l] = std::max(out[l], d(u.at(k + l), u.at(k)));
    return out;
}

inline std::size_t lag_for(double delta, double dt) {
    return static_cast<std::size_t>(std::floor(delta / dt * (1.0 + 1e-12)));
}

/// Grid sup of |u(t) - u(s)|_{U'} over |t - s| <= delta.
inline double modulus_of_continuity(const CoefficientPath& u, const ModeBasis& basis, double delta) {
    detail::require(delta > 0.0, "modulus of continuity needs delta > 0");
    const auto curve = lag_sup_curve(u, CoefficientMetric(basis, Space::Udual, u.n), lag_for(delta, u.dt));
    return *std::max_element(curve.begin(), curve.end());
}

/// Least-squares slope of log y against log x over entries with y > 0.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) return std::numeric_limits<double>::quiet_NaN();
    const double den = m * sxx - sx * sx;
    return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : (m * sxy - sx * sy) / den;
}

inline double median(std::vector<double> x) {
    detail::require(!x.empty(), "median of an empty sample");
    const std::size_t h = x.size() / 2;
    std::nth_element(x.begin(), x.begin() + h, x.end());
    if (x.size() % 2 == 1) return x[h];
    const double hi = x[h];
    return 0.5 * (hi + *std::max_element(x.begin(), x.begin() + h));
}

inline double quantile(std::vector<double> x, double q) {
    detail::require(!x.empty() && q >= 0.0 && q <= 1.0, "quantile needs a nonempty sample and q in [0, 1]");
    std::sort(x.begin(), x.end());
    const double pos = q * static_cast<double>(x.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= x.size()) return x.back();
    return x[i] + (pos - static_cast<double>(i)) * (x[i + 1] - x[i]);
}

enum class FamilyStatistic { Sup, Median };

struct DubinskyReport {
    double sup_int_V = 0.0; ///< sup_u int |u|^2_V dt
    double sup_H = 0.0;     ///< sup_u sup_t |u|_H
    std::vector<double> deltas;
    std::vector<double> sup_curve;    ///< sup_u omega(u, delta)
    std::vector<double> median_curve; ///< median_u omega(u, delta)
    double sup_slope = 0.0;
    double median_slope = 0.0;
    double threshold = 0.4;
    FamilyStatistic statistic = FamilyStatistic::Sup;
    bool pass = false;
};

/// All paths must share n and dt. The verdict uses the chosen statistic: the
/// curve must be identically zero or have a fitted log-log slope of at least
/// the threshold.
inline DubinskyReport dubinsky_diagnostic(std::span<const CoefficientPath> family, const ModeBasis& basis,
                                          std::span<const double> deltas, double threshold = 0.4,
                                          FamilyStatistic statistic = FamilyStatistic::Sup) {
    detail::require(!family.empty(), "dubinsky diagnostic needs a nonempty family");
    detail::require(!deltas.empty(), "dubinsky diagnostic needs at least one delta");
    const std::size_t n = family[0].n;
    const double dt = family[0].dt;
    for (const auto& u : family) detail::require(u.n == n && u.dt == dt, "family members must share n and dt");
    DubinskyReport rep;
    rep.deltas.assign(deltas.begin(), deltas.end());
    rep.threshold = threshold;
    rep.statistic = statistic;
    const CoefficientMetric Ud(basis, Space::Udual, n), V(basis, Space::V, n), H(basis, Space::H, n);
    std::size_t max_lag = 0;
    for (double d : deltas) {
        detail::require(d > 0.0, "deltas must be positive");
        max_lag = std::max(max_lag, lag_for(d, dt));
    }
    std::vector<std::vector<double>> per_delta(deltas.size());
    for (const auto& u : family) {
        double iv = 0.0;
        for (std::size_t k = 0; k + 1 < u.times(); ++k) iv += dt * std::pow(V.norm(u.at(k)), 2);
        rep.sup_int_V = std::max(rep.sup_int_V, iv);
        for (std::size_t k = 0; k < u.times(); ++k) rep.sup_H = std::max(rep.sup_H, H.norm(u.at(k)));
        auto curve = lag_sup_curve(u, Ud, max_lag);
        for (std::size_t l = 1; l < curve.size(); ++l) curve[l] = std::max(curve[l], curve[l - 1]);
        for (std::size_t j = 0; j < deltas.size(); ++j)
            per_delta[j].push_back(curve[std::min(lag_for(deltas[j], dt), curve.size() - 1)]);
    }
    for (const auto& v : per_delta) {
        rep.sup_curve.push_back(*std::max_element(v.begin(), v.end()));
        rep.median_curve.push_back(median(v));
    }
    rep.sup_slope = loglog_slope(rep.deltas, rep.sup_curve);
    rep.median_slope = loglog_slope(rep.deltas, rep.median_curve);
    const auto& curve = statistic == FamilyStatistic::Sup ? rep.sup_curve : rep.median_curve;
    const double slope = statistic == FamilyStatistic::Sup ? rep.sup_slope : rep.median_slope;
    const bool all_zero = std::all_of(curve.begin(), curve.end(), [](double x) { return x == 0.0; });
    rep.pass = all_zero || (std::isfinite(slope) && slope >= threshold);
    return rep;
}

/// Stopping rule for the Aldous check: deterministic grid indices, or the
/// first grid time at which |u|_H reaches a level (the final time if never).
struct StoppingRule {
    enum class Kind { FixedTimes, FirstHitting } kind = Kind::FixedTimes;
    std::vector<std::size_t> times; ///< grid indices for FixedTimes
    double level = 0.0;             ///< |u|_H level for FirstHitting

    std::vector<std::size_t> stopping_times(const CoefficientPath& u, const CoefficientMetric& H) const {
        if (kind == Kind::FixedTimes) return times;
        for (std::size_t k = 0; k < u.times(); ++k)
            if (H.norm(u.at(k)) >= level) return {k};
        return {u.times() - 1};
    }
};

struct AldousTable {
    std::vector<double> thetas;
    std::vector<double> probability; ///< per theta
    std::vector<double> se;          ///< binomial standard error
    std::size_t samples = 0;
    bool monotone = true; ///< probability nondecreasing in theta
};

/// Exceedance frequency of |u(tau + theta) - u(tau)|_{U'} >= eta over all
/// paths and stopping times. Each tau is replaced by min(tau, T - max theta),
/// itself a stopping time, so every increment lies inside the path.
inline AldousTable aldous_check(std::span<const CoefficientPath> paths, const ModeBasis& basis, const StoppingRule& rule,
                                std::span<const double> thetas, double eta) {
    detail::require(!paths.empty(), "aldous check needs a nonempty ensemble");
    AldousTable t;
    t.thetas.assign(thetas.begin(), thetas.end());
    std::vector<std::size_t> hits(thetas.size(), 0);
    const std::size_t n = paths[0].n;
    const CoefficientMetric Ud(basis, Space::Udual, n), H(basis, Space::H, n);
    for (const auto& u : paths) {
        detail::require(u.n == n && u.times() > 0, "ensemble paths must share n");
        std::size_t max_lag = 0;
        for (double th : thetas) max_lag = std::max(max_lag, lag_for(th, u.dt));
        detail::require(max_lag < u.times(), "largest theta exceeds the path horizon");
        const std::size_t cap = u.times() - 1 - max_lag;
        for (std::size_t tau : rule.stopping_times(u, H)) {
            detail::require(tau < u.times(), "stopping time beyond the path");
            tau = std::min(tau, cap);
            ++t.samples;
            for (std::size_t j = 0; j < thetas.size(); ++j) {
                const std::size_t end = tau + lag_for(thetas[j], u.dt);
                if (Ud(u.at(end), u.at(tau)) >= eta) ++hits[j];
            }
        }
    }
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        const double p = t.samples ? static_cast<double>(hits[j]) / static_cast<double>(t.samples) : 0.0;
        t.probability.push_back(p);
        t.se.push_back(t.samples ? std::sqrt(p * (1.0 - p) / static_cast<double>(t.samples)) : 0.0);
    }
    std::vector<std::size_t> order(thetas.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return thetas[a] < thetas[b]; });
    for (std::size_t j = 1; j < order.size(); ++j)
        t.monotone = t.monotone && t.probability[order[j]] >= t.probability[order[j - 1]];
    return t;
}

/// |J_i(tau + theta) - J_i(tau)|_{U'} for i = 2..5 and of u itself.
struct TermIncrements {
    double J[4] = {0, 0, 0, 0};
    double total = 0.0;
    double identity_residual = 0.0; ///< |du - sum dJ_i|_{U'}
};

inline TermIncrements term_increments(const TrajectoryRecord& rec, const ModeBasis& basis, std::size_t tau, std::size_t lag) {
    detail::require(rec.snapshots.size() == rec.steps + 1, "term bounds need the per-step J ledger (snapshot stride 1)");
    detail::require(tau + lag <= rec.steps, "tau + theta beyond the final time");
    const Snapshot& a = rec.snapshots[tau];
    const Snapshot& b = rec.snapshots[tau + lag];
    const std::size_t n = rec.n;
    const CoefficientMetric Ud(basis, Space::Udual, n);
    TermIncrements out;
    const std::vector<double>* A[4] = {&a.J2, &a.J3, &a.J4, &a.J5};
    const std::vector<double>* B[4] = {&b.J2, &b.J3, &b.J4, &b.J5};
    std::vector<double> resid(n), zero(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) resid[i] = b.u[i] - a.u[i];
    for (int j = 0; j < 4; ++j) {
        out.J[j] = Ud(*B[j], *A[j]);
        for (std::size_t i = 0; i < n; ++i) resid[i] -= (*B[j])[i] - (*A[j])[i];
    }
    out.total = Ud(b.u, a.u);
    out.identity_residual = Ud.norm(resid);
    return out;
}

struct TermScaling {
    std::vector<double> thetas;
    std::vector<std::array<double, 4>> median_increment; ///< per theta, J2..J5
    std::array<double, 4> exponent{};                     ///< fitted log-log slopes
    double max_identity_residual = 0.0;
};

/// Ensemble-median increments over a set of lags from a common tau.
inline TermScaling term_bounds_J(std::span<const TrajectoryRecord> records, const ModeBasis& basis, std::size_t tau,
                                 std::span<const std::size_t> lags) {
    detail::require(!records.empty() && !lags.empty(), "term bounds need records and lags");
    TermScaling s;
    for (std::size_t lag : lags) {
        std::array<std::vector<double>, 4> v;
        for (const auto& r : records) {
            const auto inc = term_increments(r, basis, tau, lag);
            for (int j = 0; j < 4; ++j) v[j].push_back(inc.J[j]);
            s.max_identity_residual = std::max(s.max_identity_residual, inc.identity_residual);
        }
        std::array<double, 4> m{};
        for (int j = 0; j < 4; ++j) m[j] = median(v[j]);
        s.median_increment.push_back(m);
        s.thetas.push_back(records[0].dt * static_cast<double>(lag));
    }
    for (int j = 0; j < 4; ++j) {
        std::vector<double> y;
        for (const auto& m : s.median_increment) y.push_back(m[j]);
        s.exponent[j] = loglog_slope(s.thetas, y);
    }
    return s;
}

struct RefinementTable {
    std::vector<std::size_t> levels;
    std::vector<double> integrals;   ///< I_n
    std::vector<double> differences; ///< |I_{n_{j+1}} - I_{n_j}|
    bool pass = true;                ///< differences nonincreasing
};

/// I_n = int_0^T <B(u_n, u_n), P_n psi> dt, left endpoint over snapshots.
inline RefinementTable nonlinear_refinement_check(std::span<const TrajectoryRecord> records, const SpectralField& psi,
                                                  TrilinearWorkspace& ws) {
    detail::require(records.size() >= 2, "refinement check needs at least two levels");
    RefinementTable t;
    const auto& basis = psi.basis_ptr();
    for (std::size_t j = 0; j < records.size(); ++j) {
        const auto& r = records[j];
        const auto& r0 = records[0];
        detail::require(r.seed == r0.seed && r.trajectory == r0.trajectory && r.dt == r0.dt && r.steps == r0.steps,
                        "refinement levels must share the Wiener path");
        detail::require(j == 0 || r.n > records[j - 1].n, "levels must be strictly increasing in n");
        const CoefficientPath p = path_from_record(r);
        const SpectralField psi_n = project_Pn(psi, r.n);
        double I = 0.0;
        SpectralField u(basis);
        for (std::size_t k = 0; k + 1 < p.times(); ++k) {
            const auto row = p.at(k);
            for (std::size_t i = 0; i < r.n; ++i) u[i] = row[i];
            I += p.dt * trilinear_b(u, u, psi_n, ws);
        }
        t.levels.push_back(r.n);
        t.integrals.push_back(I);
        if (j > 0) t.differences.push_back(std::abs(I - t.integrals[j - 1]));
    }
    for (std::size_t j = 1; j < t.differences.size(); ++j) t.pass = t.pass && t.differences[j] <= t.differences[j - 1];
    return t;
}

/// Weighted space with |x|^2 = sum r_i^{-2} (x|h_i)^2 and the Phi-norm
/// |x|_Phi = sum |(x|h_i)| |h_i|_Phi. Index i runs from 1.
struct NestedSpaceSpec {
    double eta0 = 0.5;
    std::vector<double> eta;       ///< eta_1..eta_N
    std::vector<double> deficit;   ///< 1 - eta_1..1 - eta_N, kept separately since eta_i rounds to 1
    std::vector<double> phi_norms; ///< |h_1|_Phi..|h_N|_Phi
    std::vector<double> radii;     ///< r_1..r_N

    double norm(std::span<const double> c) const {
        double s = 0.0;
        for (std::size_t i = 0; i < radii.size(); ++i) s += c[i] * c[i] / (radii[i] * radii[i]);
        return std::sqrt(s);
    }
    double phi_norm(std::span<const double> c, std::size_t from = 0, std::size_t to = SIZE_MAX) const {
        double s = 0.0;
        for (std::size_t i = from; i < std::min(to, radii.size()); ++i) s += std::abs(c[i]) * phi_norms[i];
        return s;
    }
    /// eta_m with eta_0 at m = 0.
    double eta_at(std::size_t m) const { return m == 0 ? eta0 : eta[m - 1]; }
    double deficit_at(std::size_t m) const { return m == 0 ? 1.0 - eta0 : deficit[m - 1]; }
    /// eta_to - eta_from without cancellation.
    double eta_gap(std::size_t from, std::size_t to) const { return deficit_at(from) - deficit_at(to); }
};

struct HollyWiciakCertificate {
    std::size_t samples = 0;
    double embedding_sampled = 0.0;  ///< max |x|_Phi over sampled unit-ball points
    double embedding_exact = 0.0;    ///< sqrt(sum (r_i |h_i|_Phi)^2), the sup for the truncation
    double embedding_bound = 0.0;    ///< 1 - eta0
    std::size_t embedding_violations = 0;
    std::size_t tail_checks = 0;
    std::size_t tail_violations = 0;
    double worst_tail_margin = std::numeric_limits<double>::infinity(); ///< min (eta_N - eta_m) - |s_N - s_m|_Phi
};

inline NestedSpaceSpec holly_wiciak_build(std::span<const double> phi_norms, double eta0, std::size_t N) {
    detail::require(eta0 > 0.0 && eta0 < 1.0, "eta0 must lie in (0, 1)");
    detail::require(N >= 1 && phi_norms.size() >= N, "phi_norms must cover the truncation");
    NestedSpaceSpec s;
    s.eta0 = eta0;
    double prev = 1.0 - eta0;
    for (std::size_t i = 0; i < N; ++i) {
        detail::require(phi_norms[i] > 0.0, "phi_norms must be positive");
        const double dfc = 0.5 * prev;
        s.deficit.push_back(dfc);
        s.eta.push_back(1.0 - dfc);
        s.phi_norms.push_back(phi_norms[i]);
        s.radii.push_back(dfc / (2.0 * phi_norms[i]));
        prev = dfc;
    }
    return s;
}

/// Phi-norms |e_i|_{V_s} of the first N basis modes.
inline std::vector<double> vs_phi_norms(const ModeBasis& basis, std::size_t N) {
    check_level(basis, N);
    std::vector<double> out(N);
    for (std::size_t i = 0; i < N; ++i) out[i] = std::sqrt(basis.weight(Space::Vs, i));
    return out;
}

/// Unit-ball samples c_i = r_i y_i with y uniform in the Euclidean unit ball.
/// Each sample also checks the tail bound at every m < N.
inline HollyWiciakCertificate holly_wiciak_certify(const NestedSpaceSpec& s, std::size_t samples, std::uint64_t seed) {
    HollyWiciakCertificate c;
    const std::size_t N = s.radii.size();
    c.embedding_bound = 1.0 - s.eta0;
    for (std::size_t i = 0; i < N; ++i) c.embedding_exact += std::pow(s.radii[i] * s.phi_norms[i], 2);
    c.embedding_exact = std::sqrt(c.embedding_exact);
    const CounterRng rng(seed, 0xC0);
    std::vector<double> x(N);
    for (std::size_t j = 0; j < samples; ++j) {
        const auto draw = static_cast<std::uint32_t>(j);
        double r2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            x[i] = rng.normal(draw, static_cast<std::uint32_t>(i));
            r2 += x[i] * x[i];
        }
        const double radius = std::pow(rng.uniform(draw, static_cast<std::uint32_t>(N)), 1.0 / static_cast<double>(N));
        const double scale = r2 > 0.0 ? radius / std::sqrt(r2) : 0.0;
        for (std::size_t i = 0; i < N; ++i) x[i] *= scale * s.radii[i];
        ++c.samples;
        const double phi = s.phi_norm(x);
        c.embedding_sampled = std::max(c.embedding_sampled, phi);
        if (phi > c.embedding_bound) ++c.embedding_violations;
        for (std::size_t m = 0; m < N; ++m) {
            const double tail = s.phi_norm(x, m, N);
            const double margin = s.eta_gap(m, N) - tail;
            c.worst_tail_margin = std::min(c.worst_tail_margin, margin);
            ++c.tail_checks;
            if (margin < 0.0) ++c.tail_violations;
        }
    }
    return c;
}

} // namespace sns
