#pragma once

// Verb dispatch. Every verb writes summary.json plus its CSV tables into the
// output directory and reports pass/fail. Worker count never reaches the
// written files, so bundles are identical for any worker count.

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sns/compactness.hpp"
#include "sns/deterministic_2d.hpp"
#include "sns/ensemble.hpp"
#include "sns/estimates.hpp"
#include "sns/galerkin.hpp"
#include "sns/io/bundle.hpp"
#include "sns/io/config.hpp"
#include "sns/noise.hpp"
#include "sns/nonlinearity.hpp"

namespace sns::io {

namespace fs = std::filesystem;

struct Check {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

inline json to_json(const Check& c) { return {{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}}; }
inline json to_json(const MeanSE& m) { return {{"mean", m.mean}, {"se", m.se}, {"count", m.count}, {"z", m.z()}}; }

struct CommandResult {
    json summary;
    bool pass = false;
};

namespace checks {

inline double rel(double a, double b, double scale) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), scale, 1e-300}); }

/// Operator identities over random fields; values are max relative errors.
inline std::vector<Check> operator_identities(const BasisPtr& b, std::size_t samples, std::uint64_t seed, double tol = 1e-12) {
    const CounterRng rng(seed, 0x0b5);
    double e_av = 0, e_lu = 0, e_acal = 0, e_pn = 0, e_lambda = 0;
    const std::size_t N = b->size();
    for (std::uint32_t s = 0; s < samples; ++s) {
        const SpectralField u = random_field(b, N, rng, 2 * s, 1.0), v = random_field(b, N, rng, 2 * s + 1, 1.0);
        const SpectralField Au = apply_operator(u, Operator::A), Lu = apply_operator(u, Operator::L);
        e_av = std::max(e_av, rel(inner(Au, v, Space::H), inner(u, v, Space::V), norm(u, Space::V) * norm(v, Space::V)));
        e_lu = std::max(e_lu, rel(inner(Lu, v, Space::H), inner(u, v, Space::U), norm(u, Space::U) * norm(v, Space::U)));
        const SpectralField diff = Au - u - apply_operator(u, Operator::Acal);
        e_acal = std::max(e_acal, norm(diff, Space::H) / std::max(norm(Au, Space::H), 1e-300));
        const std::size_t n = 1 + s % N;
        const DualField ustar = DualField::riesz(u);
        const double lhs = inner(project_Pn(ustar, n), v, Space::H);
        const double rhs = pair(ustar, project_Pn(v, n));
        e_pn = std::max(e_pn, rel(lhs, rhs, norm(u, Space::H) * norm(v, Space::H)));
    }
    for (std::size_t i = 0; i < N; ++i)
        e_lambda = std::max(e_lambda, rel(b->mode(i).lambda, norm_sq(SpectralField::unit(b, i), Space::U), 0.0));
    return {{"<Au,v>_H = <u,v>_V", e_av, tol, e_av <= tol},
            {"<Lu,v>_H = <u,v>_U", e_lu, tol, e_lu <= tol},
            {"(A - I)u = Acal u", e_acal, tol, e_acal <= tol},
            {"(P_n u*|v)_H = <u*, P_n v>", e_pn, tol, e_pn <= tol},
            {"lambda_i = |e_i|^2_U", e_lambda, tol, e_lambda <= tol}};
}

/// Trilinear antisymmetry and cancellation over random triples.
inline std::vector<Check> trilinear_structure(const BasisPtr& b, std::size_t samples, std::uint64_t seed, double tol = 1e-12) {
    TrilinearWorkspace ws(b);
    const CounterRng rng(seed, 0x7e1);
    double e_anti = 0, e_cancel = 0;
    for (std::uint32_t s = 0; s < samples; ++s) {
        const auto u = random_field(b, b->size(), rng, 3 * s, 1.0);
        const auto v = random_field(b, b->size(), rng, 3 * s + 1, 1.0);
        const auto w = random_field(b, b->size(), rng, 3 * s + 2, 1.0);
        const double scale = norm(u, Space::H) * norm(v, Space::V) * norm(w, Space::V);
        e_anti = std::max(e_anti, std::abs(trilinear_b(u, v, w, ws) + trilinear_b(u, w, v, ws)) / scale);
        e_cancel = std::max(e_cancel, std::abs(trilinear_b(u, v, v, ws)) / (norm(u, Space::H) * norm_sq(v, Space::V)));
    }
    return {{"b(u,v,w) = -b(u,w,v)", e_anti, tol, e_anti <= tol}, {"b(u,v,v) = 0", e_cancel, tol, e_cancel <= tol}};
}

} // namespace checks

namespace detail {

inline json checks_json(const std::vector<Check>& cs, bool& pass) {
    json a = json::array();
    for (const auto& c : cs) {
        a.push_back(to_json(c));
        pass = pass && c.pass;
    }
    return a;
}

inline json report_json(const NoiseConditionReport& r) {
    return {{"C1", r.C1},
            {"a", r.a},
            {"accepted", r.accepted},
            {"rejection", r.rejection},
            {"epsilon", r.epsilon},
            {"eta", r.eta},
            {"lambda0", r.lambda0},
            {"rho", r.rho},
            {"gstar_constant", r.gstar_constant},
            {"gstar_measured", r.gstar_measured},
            {"gstar_violations", r.gstar_violations},
            {"lipschitz_L", r.lipschitz_L},
            {"empirical_violations", r.empirical_violations},
            {"worst_margin", r.worst_margin},
            {"samples", r.samples},
            {"sup_grid", r.sup_grid}};
}

inline NoiseConditionReport certify(const RunConfig& c, const BasisPtr& b, std::size_t samples) {
    NoiseOperator G(b, c.noise);
    return certify_conditions(G, c.epsilon, samples, c.seed);
}

inline WienerPath path_for(const RunConfig& c, std::size_t trajectory) {
    return generate_wiener(static_cast<std::size_t>(std::llround(c.T / c.dt)), c.noise.size(), c.dt, c.seed, trajectory);
}

} // namespace detail

/// Martingale probes used by the ensemble verb, on a grid of `steps`. The
/// indices pick modes with a nonzero first wavenumber component so constant
/// transport along the first axis moves them.
inline std::vector<MartingaleProbe> default_probes(std::size_t basis_size, std::size_t steps) {
    auto unit = [&](std::size_t i) {
        std::vector<double> v(basis_size, 0.0);
        v[std::min(i, basis_size - 1)] = 1.0;
        return v;
    };
    return {{unit(0), unit(0), 0, steps / 2, TestFunctional::One},
            {unit(3), unit(7), steps / 4, steps, TestFunctional::CosFirstMode},
            {unit(6), unit(6), steps / 2, steps, TestFunctional::EnergyDecay}};
}

inline CommandResult cmd_verify_operators(const RunConfig& c, const fs::path& out) {
    const BasisPtr b = c.basis();
    bool pass = true;
    auto ops = checks::operator_identities(b, 100, c.seed);
    auto tri = checks::trilinear_structure(b, 100, c.seed);
    ops.insert(ops.end(), tri.begin(), tri.end());
    CsvWriter csv(out / "operators.csv", {"check", "max_rel_error", "bound", "pass"});
    for (const auto& k : ops) csv.row(k.name, k.value, k.bound, k.pass);
    json s;
    s["checks"] = detail::checks_json(ops, pass);
    s["basis_size"] = b->size();
    return {s, pass};
}

inline CommandResult cmd_certify_noise(const RunConfig& c, const fs::path& out) {
    const BasisPtr b = c.basis();
    const auto rep = detail::certify(c, b, c.noise_samples);
    CsvWriter csv(out / "certificate.csv", {"quantity", "value"});
    const json j = detail::report_json(rep);
    for (auto it = j.begin(); it != j.end(); ++it)
        csv.row(it.key(), it.value().is_string() ? it.value().get<std::string>() : it.value().dump());
    json s;
    s["certificate"] = j;
    const bool pass = rep.accepted && rep.empirical_violations == 0 && rep.gstar_violations == 0;
    return {s, pass};
}

inline CommandResult cmd_simulate(const RunConfig& c, const fs::path& out) {
    const BasisPtr b = c.basis();
    CsvWriter csv(out / "series.csv", {"n", "step", "t", "energy", "dirichlet", "udual"});
    json levels = json::array();
    bool pass = true;
    for (std::size_t n : c.levels) {
        GalerkinSystem sys(b, c.galerkin(b, n), c.noise_model());
        json lv{{"n", n}};
        try {
            const auto rec = sys.integrate(detail::path_for(c, 0));
            for (std::size_t k = 0; k <= rec.steps; ++k) csv.row(n, k, rec.time(k), rec.energy[k], rec.dirichlet[k], rec.udual[k]);
            const auto bud = energy_budget_check(rec);
            lv["sup_energy"] = rec.sup_energy();
            lv["integral_dirichlet"] = rec.integral_dirichlet();
            lv["budget_residual"] = bud.max_residual;
            pass = pass && bud.max_residual <= 1e-10;
            if (!rec.snapshots.empty()) {
                std::vector<SnapshotFrame> frames;
                for (const auto& sn : rec.snapshots) {
                    SpectralField u(b);
                    for (std::size_t i = 0; i < n; ++i) u[i] = sn.u[i];
                    frames.push_back({sn.step, sn.t, u});
                }
                const std::string name = "snapshots_n" + std::to_string(n) + ".bin";
                write_snapshots(out / name, *b, n, frames);
                lv["snapshots"] = name;
            }
        } catch (const IntegrationAborted& e) {
            lv["aborted"] = e.what();
            pass = false;
        }
        levels.push_back(lv);
    }
    return {{{"levels", levels}}, pass};
}

inline CommandResult cmd_ensemble(const RunConfig& c, const fs::path& out, std::size_t workers) {
    const BasisPtr b = c.basis();
    CsvWriter csv(out / "ensemble.csv", {"n", "trajectory", "sup_energy", "int_dirichlet", "noise_sq_sum", "ito_sum", "budget_residual"});
    json levels = json::array();
    bool pass = true;
    struct Out {
        EnergyBudget budget;
        double sup = 0.0, intd = 0.0;
        std::vector<MartingaleSample> mart;
        bool aborted = false;
    };
    for (std::size_t n : c.levels) {
        GalerkinConfig g = c.galerkin(b, n);
        g.snapshot_stride = 1;
        const auto probes = default_probes(b->size(), g.steps());
        const auto res = parallel_map<Out>(c.trajectories, workers, [&](std::size_t j) {
            Out o;
            GalerkinSystem sys(b, g, c.noise_model());
            try {
                const auto rec = sys.integrate(detail::path_for(c, j));
                o.budget = energy_budget_check(rec);
                o.sup = rec.sup_energy();
                o.intd = rec.integral_dirichlet();
                for (const auto& p : probes) o.mart.push_back(martingale_sample(rec, p, sys));
            } catch (const IntegrationAborted&) {
                o.aborted = true;
            }
            return o;
        });
        std::vector<EnergyBudget> budgets;
        std::vector<std::vector<MartingaleSample>> per_probe(probes.size());
        std::size_t aborts = 0;
        double worst = 0.0;
        for (std::size_t j = 0; j < res.size(); ++j) {
            const auto& o = res[j];
            if (o.aborted) {
                ++aborts;
                continue;
            }
            csv.row(n, j, o.sup, o.intd, o.budget.noise_sq_sum, o.budget.ito_sum, o.budget.max_residual);
            budgets.push_back(o.budget);
            worst = std::max(worst, o.budget.max_residual);
            for (std::size_t p = 0; p < probes.size(); ++p) per_probe[p].push_back(o.mart[p]);
        }
        const MeanSE ito = ito_comparison(budgets);
        json lv{{"n", n}, {"aborts", aborts}, {"budget_residual", worst}, {"ito", to_json(ito)}};
        bool ok = aborts == 0 && worst <= 1e-10 && std::abs(ito.z()) <= 3.0;
        json mj = json::array();
        if (per_probe[0].size() >= 100) {
            for (std::size_t p = 0; p < probes.size(); ++p) {
                const auto d = martingale_diagnostic(per_probe[p]);
                mj.push_back({{"probe", p}, {"mean", to_json(d.mean)}, {"qv", to_json(d.qv)}, {"reconstruction", d.max_reconstruction}});
                ok = ok && std::abs(d.mean.z()) <= 3.0 && std::abs(d.qv.z()) <= 3.0;
            }
        }
        lv["martingale"] = mj;
        lv["pass"] = ok;
        pass = pass && ok;
        levels.push_back(lv);
    }
    return {{{"levels", levels}}, pass};
}

/// Physical parameters other than n, hashed to guard level comparisons.
inline std::uint64_t physics_hash(const RunConfig& c) {
    json j = c.resolved;
    j["galerkin"].erase("n");
    j["ensemble"].erase("workers");
    j.erase("experiment");
    return fnv1a64(j.dump());
}

inline CommandResult cmd_estimates(const RunConfig& c, const fs::path& out, std::size_t workers) {
    const BasisPtr b = c.basis();
    const auto cert = detail::certify(c, b, 100);
    std::map<std::size_t, LevelRuns> runs;
    const std::uint64_t ph = physics_hash(c);
    for (std::size_t n : c.levels) {
        GalerkinConfig g = c.galerkin(b, n);
        g.snapshot_stride = 0;
        const auto res = parallel_map<std::optional<TrajectoryFunctionals>>(c.trajectories, workers, [&](std::size_t j) {
            GalerkinSystem sys(b, g, c.noise_model());
            try {
                return std::optional<TrajectoryFunctionals>(trajectory_functionals(sys.integrate(detail::path_for(c, j)), c.moments));
            } catch (const IntegrationAborted&) {
                return std::optional<TrajectoryFunctionals>();
            }
        });
        LevelRuns& lv = runs[n];
        lv.physics_hash = ph;
        for (const auto& r : res) {
            if (r) lv.runs.push_back(*r);
            else ++lv.aborts;
        }
    }
    const EnsembleStats st = aggregate(runs, c.moments, cert.accepted ? cert.eta : 0.0);
    CsvWriter csv(out / "estimates.csv", {"n", "functional", "p", "mean", "se", "count", "aborts"});
    for (const auto& [n, s] : st.levels) {
        for (const auto& m : s.moments) {
            csv.row(n, "E_sup_H_p", m.p, m.sup_moment.mean, m.sup_moment.se, s.count, s.aborts);
            csv.row(n, "E_int_H_p-2_D", m.p, m.int_weighted.mean, m.int_weighted.se, s.count, s.aborts);
        }
        csv.row(n, "E_int_D", 2.0, s.int_dirichlet.mean, s.int_dirichlet.se, s.count, s.aborts);
    }
    json s{{"eta", cert.eta}, {"warnings", st.warnings}};
    if (cert.accepted && cert.eta > 0.0) {
        const HalfOpen pr = p_range(cert.eta);
        s["p_range"] = {pr.lo, pr.bounded() ? json(pr.hi) : json("inf")};
    }
    bool pass = true;
    if (st.levels.size() >= 3) {
        const auto rep = uniformity_report(st, c.ratio_bound);
        json fs = json::array();
        for (const auto& f : rep.functionals)
            fs.push_back({{"name", f.name}, {"means", f.means}, {"ratio", f.ratio}, {"kendall_tau", f.trend.tau},
                          {"kendall_p", f.trend.p_upper}, {"positive_trend", f.positive_trend}, {"pass", f.pass}});
        s["uniformity"] = fs;
        pass = rep.pass;
    } else {
        s["uniformity"] = "needs at least 3 levels";
    }
    for (const auto& [n, l] : st.levels) pass = pass && l.aborts == 0;
    return {s, pass};
}

struct TightnessLevel {
    DubinskyReport dubinsky;
    std::vector<std::pair<std::string, AldousTable>> aldous;
    TermScaling terms;
    double aldous_eta = 0.0;
};

/// Tightness diagnostics for one level from a set of stride-1 records.
inline TightnessLevel tightness_level(const std::vector<TrajectoryRecord>& recs, const ModeBasis& basis, double T,
                                      int delta_min_exp, int delta_max_exp, double aldous_eta, double threshold) {
    TightnessLevel out;
    std::vector<CoefficientPath> paths;
    for (const auto& r : recs) paths.push_back(path_from_record(r));
    std::vector<double> deltas;
    for (int e = delta_min_exp; e <= delta_max_exp; ++e) deltas.push_back(std::ldexp(T, e));
    out.dubinsky = dubinsky_diagnostic(paths, basis, deltas, threshold, FamilyStatistic::Median);

    const double dt = paths[0].dt;
    const std::size_t N = paths[0].times() - 1;
    StoppingRule fixed;
    fixed.times = {0, N / 4, N / 2};
    if (aldous_eta <= 0.0) {
        const CoefficientMetric Ud(basis, Space::Udual, paths[0].n);
        const std::size_t mid = lag_for(deltas[deltas.size() / 2], dt);
        std::vector<double> inc;
        for (const auto& p : paths)
            for (std::size_t tau : fixed.times) inc.push_back(Ud(p.at(std::min(N, tau + mid)), p.at(tau)));
        aldous_eta = median(inc);
    }
    out.aldous_eta = aldous_eta;
    out.aldous.emplace_back("fixed", aldous_check(paths, basis, fixed, deltas, aldous_eta));
    std::vector<double> sup_h;
    const CoefficientMetric H(basis, Space::H, paths[0].n);
    for (const auto& p : paths) {
        double m = 0.0;
        for (std::size_t k = 0; k <= N; ++k) m = std::max(m, H.norm(p.at(k)));
        sup_h.push_back(m);
    }
    for (double q : {0.5, 0.9}) {
        StoppingRule hit;
        hit.kind = StoppingRule::Kind::FirstHitting;
        hit.level = quantile(sup_h, q);
        out.aldous.emplace_back("hit_q" + std::to_string(static_cast<int>(q * 100)), aldous_check(paths, basis, hit, deltas, aldous_eta));
    }
    std::vector<std::size_t> lags;
    for (double d : deltas) lags.push_back(lag_for(d, recs[0].dt));
    const std::size_t tau = std::min(N / 4, recs[0].steps - lags.back());
    out.terms = term_bounds_J(recs, basis, tau, lags);
    return out;
}

inline CommandResult cmd_tightness(const RunConfig& c, const fs::path& out, std::size_t workers) {
    const BasisPtr b = c.basis();
    CsvWriter mod(out / "modulus.csv", {"n", "delta", "sup_modulus", "median_modulus"});
    CsvWriter ald(out / "aldous.csv", {"n", "rule", "theta", "probability", "se"});
    CsvWriter trm(out / "terms.csv", {"n", "theta", "J2", "J3", "J4", "J5"});
    json levels = json::array();
    bool pass = true;
    for (std::size_t n : c.levels) {
        GalerkinConfig g = c.galerkin(b, n);
        g.snapshot_stride = 1;
        const auto recs = parallel_map<TrajectoryRecord>(c.trajectories, workers, [&](std::size_t j) {
            GalerkinSystem sys(b, g, c.noise_model());
            return sys.integrate(detail::path_for(c, j));
        });
        const auto t = tightness_level(recs, *b, c.T, c.delta_min_exp, c.delta_max_exp, c.aldous_eta, c.slope_threshold);
        for (std::size_t j = 0; j < t.dubinsky.deltas.size(); ++j)
            mod.row(n, t.dubinsky.deltas[j], t.dubinsky.sup_curve[j], t.dubinsky.median_curve[j]);
        bool monotone = true;
        json aj = json::array();
        for (const auto& [name, tab] : t.aldous) {
            for (std::size_t j = 0; j < tab.thetas.size(); ++j) ald.row(n, name, tab.thetas[j], tab.probability[j], tab.se[j]);
            aj.push_back({{"rule", name}, {"monotone", tab.monotone}, {"samples", tab.samples}});
            monotone = monotone && tab.monotone;
        }
        for (std::size_t j = 0; j < t.terms.thetas.size(); ++j) {
            const auto& m = t.terms.median_increment[j];
            trm.row(n, t.terms.thetas[j], m[0], m[1], m[2], m[3]);
        }
        const double j5 = t.terms.exponent[3];
        const bool j5_ok = c.noise.is_zero() || (j5 >= 0.4 && j5 <= 0.6);
        const bool ok = t.dubinsky.pass && monotone && j5_ok;
        levels.push_back({{"n", n},
                          {"sup_int_V", t.dubinsky.sup_int_V},
                          {"sup_H", t.dubinsky.sup_H},
                          {"median_slope", t.dubinsky.median_slope},
                          {"sup_slope", t.dubinsky.sup_slope},
                          {"slope_threshold", c.slope_threshold},
                          {"aldous_eta", t.aldous_eta},
                          {"aldous", aj},
                          {"term_exponents", t.terms.exponent},
                          {"identity_residual", t.terms.max_identity_residual},
                          {"pass", ok}});
        pass = pass && ok;
    }
    json s{{"levels", levels}};
    if (c.levels.size() >= 2) {
        std::vector<TrajectoryRecord> refine;
        for (std::size_t n : c.levels) {
            GalerkinConfig g = c.galerkin(b, n);
            g.snapshot_stride = 1;
            GalerkinSystem sys(b, g, c.noise_model());
            refine.push_back(sys.integrate(detail::path_for(c, 0)));
        }
        TrilinearWorkspace ws(b);
        const auto tab = nonlinear_refinement_check(refine, SpectralField::unit(b, 0), ws);
        s["refinement"] = {{"levels", tab.levels}, {"integrals", tab.integrals}, {"differences", tab.differences}, {"decreasing", tab.pass}};
    }
    return {s, pass};
}

inline CommandResult cmd_uniqueness(const RunConfig& c, const fs::path& out, std::size_t workers) {
    const BasisPtr b = c.basis();
    const auto cert = detail::certify(c, b, 1000);
    const std::size_t n = c.levels.front();
    GalerkinConfig g = c.galerkin(b, n);
    const auto noise = c.noise_model();
    const auto twin = pathwise_uniqueness_experiment(b, g, noise, cert.lipschitz_L, 0.0, std::min<std::size_t>(c.trajectories, 20), workers);
    const auto ex = pathwise_uniqueness_experiment(b, g, noise, cert.lipschitz_L, c.gamma, c.trajectories, workers);
    CsvWriter csv(out / "uniqueness.csv", {"trajectory", "ratio", "sup_distance"});
    for (std::size_t j = 0; j < ex.ratios.size(); ++j) csv.row(j, ex.ratios[j], ex.sup_distance[j]);
    const bool pass = twin.all_identical && (c.gamma == 0.0 || ex.median_ratio <= 1.1);
    json s{{"n", n},
           {"lipschitz_L", ex.lipschitz_L},
           {"epsilon", ex.epsilon},
           {"a", ex.a},
           {"gamma", ex.gamma},
           {"twin_identical", twin.all_identical},
           {"median_ratio", ex.median_ratio},
           {"max_ratio", ex.max_ratio}};
    return {s, pass};
}

inline CommandResult cmd_spaces(const RunConfig& c, const fs::path& out) {
    const BasisPtr b = c.basis();
    const auto spec = holly_wiciak_build(vs_phi_norms(*b, c.spaces_N), c.eta0, c.spaces_N);
    const auto cert = holly_wiciak_certify(spec, c.spaces_samples, c.seed);
    CsvWriter csv(out / "spaces.csv", {"i", "eta", "radius", "phi_norm"});
    for (std::size_t i = 0; i < spec.radii.size(); ++i) csv.row(i + 1, spec.eta[i], spec.radii[i], spec.phi_norms[i]);
    const bool pass = cert.embedding_violations == 0 && cert.tail_violations == 0;
    json s{{"eta0", spec.eta0},
           {"N", c.spaces_N},
           {"samples", cert.samples},
           {"embedding_sampled", cert.embedding_sampled},
           {"embedding_exact", cert.embedding_exact},
           {"embedding_bound", cert.embedding_bound},
           {"embedding_violations", cert.embedding_violations},
           {"tail_checks", cert.tail_checks},
           {"tail_violations", cert.tail_violations},
           {"worst_tail_margin", cert.worst_tail_margin}};
    return {s, pass};
}

/// Runs a verb and writes summary.json. Exceptions propagate to the caller.
inline CommandResult run_command(const std::string& verb, const RunConfig& c, const fs::path& out) {
    fs::create_directories(out);
    const std::size_t workers = resolve_workers(c.workers);
    CommandResult r;
    if (verb == "verify-operators") r = cmd_verify_operators(c, out);
    else if (verb == "certify-noise") r = cmd_certify_noise(c, out);
    else if (verb == "simulate") r = cmd_simulate(c, out);
    else if (verb == "ensemble") r = cmd_ensemble(c, out, workers);
    else if (verb == "estimates") r = cmd_estimates(c, out, workers);
    else if (verb == "tightness") r = cmd_tightness(c, out, workers);
    else if (verb == "uniqueness") r = cmd_uniqueness(c, out, workers);
    else if (verb == "spaces") r = cmd_spaces(c, out);
    else throw std::invalid_argument("unknown verb '" + verb + "'");
    json doc;
    doc["verb"] = verb;
    doc["config_hash"] = hex64(c.hash);
    doc["seed"] = c.seed;
    json cfg = c.resolved;
    cfg["ensemble"].erase("workers");
    doc["config"] = cfg;
    doc["results"] = r.summary;
    doc["pass"] = r.pass;
    write_summary(out / "summary.json", doc);
    r.summary = doc;
    return r;
}

} // namespace sns::io
