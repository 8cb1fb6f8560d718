#pragma once

// Moment exponents, ensemble statistics across Galerkin levels, the
// uniformity-in-n verdict and the discrete Gronwall envelope.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "sns/galerkin.hpp"

namespace sns {

/// [lo, hi); hi is +inf when unbounded.
struct HalfOpen {
    double lo = 0.0;
    double hi = 0.0;

    bool bounded() const { return std::isfinite(hi); }
    bool contains(double x) const { return x >= lo && x < hi; }
    bool empty() const { return !(hi > lo); }
};

/// Open interval (lo, hi).
struct OpenInterval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return x > lo && x < hi; }
    bool empty() const { return !(hi > lo); }
};

inline HalfOpen p_range(double eta) {
    detail::require(eta > 0.0 && eta <= 2.0, "eta must lie in (0, 2]");
    if (eta == 2.0) return {2.0, std::numeric_limits<double>::infinity()};
    return {2.0, 2.0 + eta / (2.0 - eta)};
}

inline OpenInterval epsilon_for_p(double p, double eta) {
    detail::require(p_range(eta).contains(p), "p lies outside the admissible range for eta");
    return {0.0, 1.0 - 0.5 * (p - 1.0) * (2.0 - eta)};
}

/// Per-trajectory functionals on the step grid.
struct TrajectoryFunctionals {
    double sup_energy = 0.0;          ///< sup_k |u_k|^2_H
    double int_dirichlet = 0.0;       ///< sum dt ||u_k||^2
    std::vector<double> int_weighted; ///< per p: sum dt |u_k|^{p-2} ||u_k||^2
};

inline TrajectoryFunctionals trajectory_functionals(const TrajectoryRecord& rec, std::span<const double> ps) {
    TrajectoryFunctionals f;
    f.sup_energy = rec.sup_energy();
    f.int_dirichlet = rec.integral_dirichlet();
    f.int_weighted.assign(ps.size(), 0.0);
    for (std::size_t j = 0; j < ps.size(); ++j)
        for (std::size_t k = 0; k < rec.steps; ++k)
            f.int_weighted[j] += rec.dt * std::pow(rec.energy[k], 0.5 * (ps[j] - 2.0)) * rec.dirichlet[k];
    return f;
}

/// Runs at one Galerkin level.
struct LevelRuns {
    std::vector<TrajectoryFunctionals> runs;
    std::size_t aborts = 0;
    std::uint64_t physics_hash = 0; ///< hash of the n-independent parameters
};

struct MomentStat {
    double p = 2.0;
    MeanSE sup_moment;   ///< E sup |u|^p_H
    MeanSE int_weighted; ///< E int |u|^{p-2} ||u||^2
};

struct LevelStats {
    std::vector<MomentStat> moments;
    MeanSE int_dirichlet;
    std::size_t count = 0;
    std::size_t aborts = 0;
    std::uint64_t physics_hash = 0;
};

struct EnsembleStats {
    std::map<std::size_t, LevelStats> levels;
    std::vector<std::string> warnings;
};

namespace detail {

/// Mean and SE summed in sorted order, so the result does not depend on the
/// order of the trajectories.
inline MeanSE sorted_mean_se(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    return mean_se(x);
}

inline std::string short_num(double x) {
    std::ostringstream o;
    o << x;
    return o.str();
}

} // namespace detail

/// eta <= 0 skips the admissibility check.
inline EnsembleStats aggregate(const std::map<std::size_t, LevelRuns>& levels, std::span<const double> ps, double eta = 0.0) {
    EnsembleStats out;
    if (eta > 0.0) {
        const HalfOpen range = p_range(eta);
        for (double p : ps)
            if (!range.contains(p))
                out.warnings.push_back("p = " + detail::short_num(p) + " lies outside the admissible range for eta = " + detail::short_num(eta));
    }
    for (const auto& [n, lv] : levels) {
        detail::require(lv.runs.size() >= 2, "aggregate needs at least 2 trajectories per level");
        LevelStats s;
        s.count = lv.runs.size();
        s.aborts = lv.aborts;
        s.physics_hash = lv.physics_hash;
        std::vector<double> v;
        for (const auto& r : lv.runs) v.push_back(r.int_dirichlet);
        s.int_dirichlet = detail::sorted_mean_se(v);
        for (std::size_t j = 0; j < ps.size(); ++j) {
            std::vector<double> sup, wt;
            for (const auto& r : lv.runs) {
                detail::require(r.int_weighted.size() == ps.size(), "trajectory functionals do not match the p list");
                sup.push_back(std::pow(r.sup_energy, 0.5 * ps[j]));
                wt.push_back(r.int_weighted[j]);
            }
            s.moments.push_back({ps[j], detail::sorted_mean_se(sup), detail::sorted_mean_se(wt)});
        }
        out.levels.emplace(n, std::move(s));
    }
    return out;
}

/// Exact upper-tail probability P(S >= s) of the Kendall statistic
/// S = concordant - discordant for m untied items under independence.
inline double kendall_upper_p(std::size_t m, long s) {
    // Inversion counts of random permutations (Mahonian numbers).
    std::vector<double> dist{1.0};
    for (std::size_t k = 2; k <= m; ++k) {
        std::vector<double> next(dist.size() + k - 1, 0.0);
        for (std::size_t i = 0; i < dist.size(); ++i)
            for (std::size_t j = 0; j < k; ++j) next[i + j] += dist[i];
        dist.swap(next);
    }
    double total = 0.0, tail = 0.0;
    const long pairs = static_cast<long>(m * (m - 1) / 2);
    for (std::size_t inv = 0; inv < dist.size(); ++inv) {
        total += dist[inv];
        if (pairs - 2 * static_cast<long>(inv) >= s) tail += dist[inv];
    }
    return tail / total;
}

struct KendallResult {
    double tau = 0.0;
    long S = 0;
    double p_upper = 1.0; ///< one-sided p for a positive trend
};

/// Kendall tau of y against its index; ties contribute 0.
inline KendallResult kendall_trend(std::span<const double> y) {
    KendallResult r;
    const std::size_t m = y.size();
    if (m < 2) return r;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) r.S += (y[j] > y[i]) - (y[j] < y[i]);
    r.tau = static_cast<double>(r.S) / static_cast<double>(m * (m - 1) / 2);
    r.p_upper = kendall_upper_p(m, r.S);
    return r;
}

struct FunctionalVerdict {
    std::string name;
    std::vector<double> means;
    double ratio = 1.0; ///< max / min of the level means
    KendallResult trend;
    bool positive_trend = false;
    bool pass = true;
};

struct UniformityReport {
    std::vector<FunctionalVerdict> functionals;
    bool pass = true;
};

/// A positive trend is flagged when the exact Kendall p-value is below alpha
/// and the largest-n mean exceeds the smallest-n mean by more than twice the
/// combined standard error.
inline UniformityReport uniformity_report(const EnsembleStats& stats, double ratio_bound = 1.5, double alpha = 0.05) {
    detail::require(stats.levels.size() >= 3, "uniformity report needs at least 3 Galerkin levels");
    const std::uint64_t h = stats.levels.begin()->second.physics_hash;
    for (const auto& [n, s] : stats.levels)
        detail::require(s.physics_hash == h, "physical parameters differ across Galerkin levels");

    UniformityReport rep;
    auto judge = [&](std::string name, auto&& pick) {
        FunctionalVerdict v;
        v.name = std::move(name);
        std::vector<MeanSE> ms;
        for (const auto& [n, s] : stats.levels) ms.push_back(pick(s));
        for (const auto& m : ms) v.means.push_back(m.mean);
        const auto [lo, hi] = std::minmax_element(v.means.begin(), v.means.end());
        v.ratio = *lo > 0.0 ? *hi / *lo : (*hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
        v.trend = kendall_trend(v.means);
        const double diff = ms.back().mean - ms.front().mean;
        const double noise = 2.0 * std::hypot(ms.back().se, ms.front().se);
        v.positive_trend = v.trend.S > 0 && v.trend.p_upper < alpha && diff > noise;
        v.pass = v.ratio <= ratio_bound && !v.positive_trend;
        rep.pass = rep.pass && v.pass;
        rep.functionals.push_back(std::move(v));
    };
    const auto& first = stats.levels.begin()->second;
    for (std::size_t j = 0; j < first.moments.size(); ++j) {
        const double p = first.moments[j].p;
        judge("E sup |u|^" + detail::short_num(p), [j](const LevelStats& s) { return s.moments.at(j).sup_moment; });
        judge("E int |u|^(p-2) ||u||^2, p=" + detail::short_num(p), [j](const LevelStats& s) { return s.moments.at(j).int_weighted; });
    }
    judge("E int ||u||^2", [](const LevelStats& s) { return s.int_dirichlet; });
    return rep;
}

/// y(t_k) = y0 exp(int_0^t theta) + int_0^t a(s) exp(int_s^t theta) ds for
/// step functions a, theta on [t_j, t_{j+1}), with left-endpoint quadrature
/// in s. Returns the values at every grid time.
inline std::vector<double> gronwall_eval(std::span<const double> a, std::span<const double> theta, double y0,
                                         std::span<const double> grid) {
    detail::require(grid.size() >= 1 && a.size() + 1 == grid.size() && theta.size() + 1 == grid.size(),
                    "gronwall_eval needs one a and theta value per grid interval");
    detail::require(y0 >= 0.0, "gronwall_eval needs y0 >= 0");
    std::vector<double> y{y0};
    y.reserve(grid.size());
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double h = grid[k + 1] - grid[k];
        detail::require(h > 0.0, "grid must be strictly increasing");
        detail::require(a[k] >= 0.0 && theta[k] >= 0.0, "gronwall_eval needs nonnegative a and theta");
        y.push_back(std::exp(theta[k] * h) * (y.back() + a[k] * h));
    }
    return y;
}

inline std::vector<double> uniform_grid(double T, std::size_t steps) {
    std::vector<double> g(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) g[k] = T * static_cast<double>(k) / static_cast<double>(steps);
    return g;
}

} // namespace sns
