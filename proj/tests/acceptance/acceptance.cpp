// Acceptance suite: twelve criteria, one PASS/FAIL line each. A criterion
// fails when its check fails or when it exceeds its runtime budget.
//
//   acceptance [criterion ids...] [--json path]

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "../unit/oracles.hpp"
#include "sns.hpp"

using namespace sns;
using namespace sns::io;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    json data;
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

fs::path workdir() {
    const fs::path p = fs::temp_directory_path() / "sns_acceptance";
    fs::create_directories(p);
    return p;
}

BasisPtr default_basis() { return ModeBasis::create(TorusDomain{}); }

json modes_json(std::initializer_list<std::pair<int, double>> m) {
    json a = json::array();
    for (const auto& [i, v] : m) a.push_back({{"mode", i}, {"value", v}});
    return {{"modes", a}};
}

/// Runs a verb on an in-memory config, in a fresh directory.
CommandResult run_verb(const std::string& verb, json doc) {
    doc["experiment"] = verb;
    const RunConfig c = parse_config(doc);
    const fs::path out = workdir() / verb;
    fs::remove_all(out);
    return run_command(verb, c, out);
}

// 1 ------------------------------------------------------------------------

Outcome operator_identities() {
    const auto cs = checks::operator_identities(default_basis(), 100, 2024);
    Outcome o{true, "", json::array()};
    for (const auto& c : cs) {
        o.pass = o.pass && c.pass;
        o.detail += (o.detail.empty() ? "" : ", ") + fmt(c.value);
        o.data.push_back(to_json(c));
    }
    o.detail = "max rel errors " + o.detail + " (bound 1e-12)";
    return o;
}

// 2 ------------------------------------------------------------------------

Outcome trilinear_structure() {
    const BasisPtr b = default_basis();
    auto cs = checks::trilinear_structure(b, 100, 2025);
    TrilinearWorkspace ws(b);
    const CounterRng rng(2026, 3);
    const int G = 3 * b->max_wavenumber() + 1;
    double worst = 0.0;
    for (std::uint32_t s = 0; s < 100; ++s) {
        const auto u = random_field(b, b->size(), rng, 3 * s, 1.0), w = random_field(b, b->size(), rng, 3 * s + 1, 1.0),
                   v = random_field(b, b->size(), rng, 3 * s + 2, 1.0);
        const double quad = oracle::trilinear(u, w, v, G);
        worst = std::max(worst, std::abs(trilinear_b(u, w, v, ws) - quad) / std::abs(quad));
    }
    cs.push_back({"spectral vs quadrature", worst, 1e-10, worst <= 1e-10});
    Outcome o{true, "", json::array()};
    for (const auto& c : cs) {
        o.pass = o.pass && c.pass;
        o.data.push_back(to_json(c));
    }
    o.detail = "antisymmetry " + fmt(cs[0].value) + ", cancellation " + fmt(cs[1].value) + " (1e-12); quadrature " + fmt(worst) +
               " (1e-10)";
    return o;
}

// 3 ------------------------------------------------------------------------

Outcome noise_certification() {
    const BasisPtr b = default_basis();
    const NoiseModel m = NoiseModel::constant_transport(b->domain(), 1.0);
    // Eigenvalue oracle: closed-form largest eigenvalue of the 2x2 matrix
    // sum_i b_i b_i^T on a grid.
    double lmax = 0.0;
    const int G = 64;
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) {
            const RealVec x{b->domain().period[0] * i / G, b->domain().period[1] * j / G, 0.0};
            double s00 = 0, s01 = 0, s11 = 0;
            for (const auto& d : m.directions) {
                const double b0 = sns::detail::series_value(d.b[0], m.domain, x), b1 = sns::detail::series_value(d.b[1], m.domain, x);
                s00 += b0 * b0;
                s01 += b0 * b1;
                s11 += b1 * b1;
            }
            lmax = std::max(lmax, 0.5 * (s00 + s11 + std::sqrt((s00 - s11) * (s00 - s11) + 4 * s01 * s01)));
        }
    const double a_oracle = 2.0 - lmax;
    NoiseOperator Gop(b, m);
    const auto rep = certify_conditions(Gop, 0.5, 10000, 77);
    Outcome o;
    o.pass = rep.accepted && rep.a == 1.0 && rep.a == a_oracle && std::abs(rep.eta - 0.5) <= 1e-15 &&
             std::abs(rep.lambda0 - 1.5) <= 1e-15 && rep.samples == 10000 && rep.empirical_violations == 0 &&
             rep.gstar_violations == 0 && rep.gstar_measured <= rep.gstar_constant;
    o.detail = "a = " + fmt(rep.a) + " (oracle " + fmt(a_oracle) + "), eta = " + fmt(rep.eta) + ", lambda0 = " + fmt(rep.lambda0) +
               ", (G) violations " + std::to_string(rep.empirical_violations) + "/" + std::to_string(rep.samples) +
               ", (G*) ratio " + fmt(rep.gstar_measured) + " <= " + fmt(rep.gstar_constant) + " violations " +
               std::to_string(rep.gstar_violations);
    o.data = {{"a", rep.a}, {"a_oracle", a_oracle}, {"eta", rep.eta}, {"lambda0", rep.lambda0},
              {"violations", rep.empirical_violations}, {"gstar_measured", rep.gstar_measured},
              {"gstar_constant", rep.gstar_constant}, {"gstar_violations", rep.gstar_violations}};
    return o;
}

// 4 ------------------------------------------------------------------------

Outcome integrator_orders() {
    const BasisPtr b = default_basis();
    SpectralField u0(b);
    for (std::size_t i = 0; i < 12; ++i) u0[i] = 1.0 / (1.0 + i);
    std::vector<double> em;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        GalerkinConfig c;
        c.n = 12;
        c.dt = dt;
        c.T = 1.0;
        c.nonlinear = false;
        c.u0 = u0;
        GalerkinSystem sys(b, c, std::nullopt);
        const auto rec = sys.integrate(generate_wiener(c.steps(), 0, dt, 1));
        double exact = 0.0;
        for (std::size_t i = 0; i < c.n; ++i) exact += u0[i] * u0[i] * std::exp(-2.0 * b->mode(i).k2 * c.T);
        em.push_back(std::abs(rec.energy.back() - exact) / exact);
    }
    std::vector<double> rk;
    for (double dt : {0.04, 0.02, 0.01}) {
        ShiftedProblem p;
        p.basis = b;
        p.n = 12;
        p.dt = dt;
        p.steps = static_cast<std::size_t>(std::llround(1.0 / dt));
        p.nonlinear = false;
        p.u0 = u0;
        const auto v = solve_shifted(p);
        double e = 0.0;
        for (std::size_t i = 0; i < 12; ++i) e = std::max(e, std::abs(v.back()[i] - u0[i] * std::exp(-b->mode(i).k2)));
        rk.push_back(e);
    }
    const double em1 = std::log2(em[0] / em[1]), em2 = std::log2(em[1] / em[2]);
    const double rk1 = std::log2(rk[0] / rk[1]), rk2 = std::log2(rk[1] / rk[2]);
    Outcome o;
    o.pass = std::abs(em1 - 1.0) <= 0.1 && std::abs(em2 - 1.0) <= 0.1 && std::abs(rk1 - 4.0) <= 0.3 && std::abs(rk2 - 4.0) <= 0.3;
    o.detail = "Stokes energy error " + fmt(em[2]) + " at dt=1e-3, orders " + fmt(em1) + ", " + fmt(em2) + " (1 +- 0.1); RK4 orders " +
               fmt(rk1) + ", " + fmt(rk2) + " (4 +- 0.3)";
    o.data = {{"em_errors", em}, {"rk4_errors", rk}};
    return o;
}

// 5, 6 -------------------------------------------------------------------

json ensemble_doc() {
    return {{"galerkin", {{"n", 16}, {"dt", 1e-3}, {"T", 1.0}, {"u0", modes_json({{3, 1.0}, {7, 0.6}, {16, 0.4}})}}},
            {"ensemble", {{"trajectories", 1000}, {"seed", 101}}}};
}

const json& ensemble_summary() {
    static const json s = run_verb("ensemble", ensemble_doc()).summary;
    return s;
}

Outcome energy_budget() {
    const json& lv = ensemble_summary()["results"]["levels"][0];
    // A single stochastic run checked step by step.
    const RunConfig c = parse_config(ensemble_doc());
    const BasisPtr b = c.basis();
    GalerkinSystem sys(b, c.galerkin(b, 16), c.noise_model());
    const auto bud = energy_budget_check(sys.integrate(generate_wiener(c.galerkin(b, 16).steps(), 1, c.dt, c.seed, 0)));
    const double z = lv["ito"]["z"];
    Outcome o;
    o.pass = bud.max_residual <= 1e-10 && lv["budget_residual"].get<double>() <= 1e-10 && lv["aborts"] == 0 && std::abs(z) <= 3.0;
    o.detail = "single-run residual " + fmt(bud.max_residual) + ", ensemble residual " + fmt(lv["budget_residual"]) +
               " (1e-10); Ito z = " + fmt(z) + " over " + lv["ito"]["count"].dump() + " trajectories";
    o.data = lv;
    return o;
}

Outcome martingale() {
    const json& lv = ensemble_summary()["results"]["levels"][0];
    Outcome o{true, "", lv["martingale"]};
    if (lv["martingale"].size() != 3) return {false, "expected 3 probes", {}};
    for (const auto& p : lv["martingale"]) {
        const double zm = p["mean"]["z"], zq = p["qv"]["z"];
        o.pass = o.pass && std::abs(zm) <= 3.0 && std::abs(zq) <= 3.0 && p["qv"]["se"].get<double>() > 0.0;
        o.detail += (o.detail.empty() ? "" : "; ") + std::string("probe ") + p["probe"].dump() + ": mean z " + fmt(zm) + ", qv z " + fmt(zq);
    }
    return o;
}

// 7 ------------------------------------------------------------------------

/// Transport along x plus a sheared transport along y; couples shells so the
/// Galerkin level matters, with a = 1.
json coupled_noise() {
    json x, y, term;
    x["b"] = json::array({1.0, 0.0});
    term["k"] = json::array({1, 0});
    term["cos"] = 0.0;
    term["sin"] = 0.5;
    y["b"] = json::array({json(0.0), json::array({term})});
    json n;
    n["directions"] = json::array({x, y});
    return n;
}

Outcome uniform_moments() {
    const json doc = {{"noise", coupled_noise()},
                      {"galerkin", {{"n", {4, 8, 16, 32}}, {"dt", 1e-3}, {"T", 1.0}, {"u0", modes_json({{3, 1.0}, {2, 0.6}})}}},
                      {"ensemble", {{"trajectories", 500}, {"seed", 202}}},
                      {"estimates", {{"p", {2.0}}, {"ratio_bound", 1.5}}}};
    const auto r = run_verb("estimates", doc);
    const json& u = r.summary["results"]["uniformity"];
    Outcome o{r.pass, "", u};
    for (const auto& f : u)
        o.detail += (o.detail.empty() ? "" : "; ") + f["name"].get<std::string>() + ": ratio " + fmt(f["ratio"]) + ", tau " +
                    fmt(f["kendall_tau"]) + ", p " + fmt(f["kendall_p"]) + (f["positive_trend"].get<bool>() ? ", TREND" : "");
    return o;
}

// 8 ------------------------------------------------------------------------

Outcome tightness() {
    const json doc = {{"galerkin",
                       {{"n", {8, 16}},
                        {"dt", std::ldexp(1.0, -11)},
                        {"T", 1.0},
                        {"u0", modes_json({{3, 0.2}, {7, 0.12}, {16, 0.08}})},
                        {"forcing", modes_json({{5, 2.0}})}}},
                      {"ensemble", {{"trajectories", 150}, {"seed", 303}}},
                      {"tightness", {{"delta_min_exp", -10}, {"delta_max_exp", -4}, {"slope_threshold", 0.4}}}};
    const auto r = run_verb("tightness", doc);
    Outcome o{r.pass, "", r.summary["results"]};
    for (const auto& l : r.summary["results"]["levels"]) {
        bool mono = true;
        for (const auto& a : l["aldous"]) mono = mono && a["monotone"].get<bool>();
        o.detail += (o.detail.empty() ? "" : "; ") + std::string("n=") + l["n"].dump() + ": median slope " + fmt(l["median_slope"]) +
                    " (>= 0.4), Aldous " + (mono ? "monotone" : "NOT monotone") + ", J5 exponent " + fmt(l["term_exponents"][3]) +
                    " ([0.4, 0.6])";
    }
    return o;
}

// 9 ------------------------------------------------------------------------

Outcome holly_wiciak() {
    const BasisPtr b = default_basis();
    const auto spec = holly_wiciak_build(vs_phi_norms(*b, 64), 0.5, 64);
    const auto c = holly_wiciak_certify(spec, 10000, 404);
    Outcome o;
    o.pass = c.samples == 10000 && c.embedding_violations == 0 && c.embedding_sampled <= 0.5 && c.tail_violations == 0;
    o.detail = "sampled embedding " + fmt(c.embedding_sampled) + " (exact sup " + fmt(c.embedding_exact) + ") <= 0.5, tail checks " +
               std::to_string(c.tail_checks) + " with " + std::to_string(c.tail_violations) + " violations, worst margin " +
               fmt(c.worst_tail_margin);
    o.data = {{"embedding_sampled", c.embedding_sampled}, {"embedding_exact", c.embedding_exact}, {"tail_violations", c.tail_violations}};
    return o;
}

// 10 -----------------------------------------------------------------------

Outcome inequalities_2d() {
    const BasisPtr b = default_basis();
    const int K = b->max_wavenumber();
    const int G4 = 4 * K + 1, G3 = 3 * K + 1;
    TrilinearWorkspace ws1(b, Strategy::DealiasedGrid, G3), ws2(b, Strategy::DealiasedGrid, 2 * G3);
    const CounterRng rng(505, 1);
    double lad1 = 0, lad2 = 0, tri1 = 0, tri2 = 0;
    for (std::uint32_t s = 0; s < 10000; ++s) {
        const auto u = random_field(b, b->size(), rng, 3 * s, 1.0);
        lad1 = std::max(lad1, ladyzhenskaya_check(u, G4));
        lad2 = std::max(lad2, ladyzhenskaya_check(u, 2 * G4));
        const auto v = random_field(b, b->size(), rng, 3 * s + 1, 1.0), w = random_field(b, b->size(), rng, 3 * s + 2, 1.0);
        tri1 = std::max(tri1, trilinear_2d_bound(u, v, w, ws1).value_or(0.0));
        tri2 = std::max(tri2, trilinear_2d_bound(u, v, w, ws2).value_or(0.0));
    }
    const double dl = std::abs(lad2 - lad1) / lad1, dt = std::abs(tri2 - tri1) / tri1;

    const RunConfig c = parse_config(ensemble_doc());
    GalerkinConfig g = c.galerkin(b, 16);
    g.T = 0.5;
    g.snapshot_stride = 5;
    const auto noise = c.noise_model();
    const auto bounds = parallel_map<PathBound>(100, resolve_workers(1), [&](std::size_t j) {
        TrilinearWorkspace ws(b);
        GalerkinSystem sys(b, g, noise);
        return path_bound_B(sys.integrate(generate_wiener(g.steps(), 1, g.dt, 606, j)), b, ws);
    });
    std::size_t held = 0;
    double worst = 0.0;
    for (const auto& pb : bounds) {
        held += pb.holds();
        worst = std::max(worst, pb.lhs / pb.rhs);
    }
    Outcome o;
    o.pass = dl <= 0.02 && dt <= 0.02 && held == bounds.size();
    o.detail = "Ladyzhenskaya max ratio " + fmt(lad1) + " -> " + fmt(lad2) + " (change " + fmt(dl) + "), trilinear max ratio " + fmt(tri1) +
               " -> " + fmt(tri2) + " (change " + fmt(dt) + ") under grid doubling (<= 0.02); path bound held on " + std::to_string(held) +
               "/100, worst lhs/rhs " + fmt(worst);
    o.data = {{"ladyzhenskaya", {lad1, lad2}}, {"trilinear", {tri1, tri2}}, {"path_bound_held", held}, {"path_bound_worst", worst}};
    return o;
}

// 11 -----------------------------------------------------------------------

Outcome pathwise_uniqueness() {
    json doc = ensemble_doc();
    doc["ensemble"] = {{"trajectories", 500}, {"seed", 707}};
    doc["uniqueness"] = {{"gamma", 1e-8}};
    const auto r = run_verb("uniqueness", doc);
    const json& s = r.summary["results"];
    Outcome o{r.pass && s["lipschitz_L"].get<double>() < 2.0, "", s};
    o.detail = "L = " + fmt(s["lipschitz_L"]) + " (< 2), twins " + (s["twin_identical"].get<bool>() ? "bitwise identical" : "DIFFER") +
               ", median ratio " + fmt(s["median_ratio"]) + " (<= 1.1), max " + fmt(s["max_ratio"]);
    return o;
}

// 12 -----------------------------------------------------------------------

/// Coarsens a Wiener path by summing groups of `factor` increments.
WienerPath coarsen(const WienerPath& w, std::size_t factor) {
    WienerPath c = w;
    c.steps = w.steps / factor;
    c.dt = w.dt * static_cast<double>(factor);
    c.increments.assign(c.steps * w.M, 0.0);
    for (std::size_t k = 0; k < c.steps; ++k)
        for (std::size_t f = 0; f < factor; ++f)
            for (std::size_t m = 0; m < w.M; ++m) c.increments[k * w.M + m] += w.increments[(k * factor + f) * w.M + m];
    return c;
}

Outcome appendix_d() {
    const BasisPtr b = default_basis();
    const NoiseModel model = NoiseModel::constant_transport(b->domain(), 1.0);
    const CounterRng rng(808, 2);
    const double T = 0.5, dt_fine = 2.5e-4;
    const WienerPath fine = generate_wiener(static_cast<std::size_t>(std::llround(T / dt_fine)), 1, dt_fine, 808, 0);
    std::vector<double> margins, cs;
    for (std::size_t factor : {4u, 2u, 1u}) {
        const WienerPath w = coarsen(fine, factor);
        GalerkinConfig g;
        g.n = 16;
        g.dt = w.dt;
        g.T = T;
        g.u0 = random_field(b, 16, rng, 0, 1.0);
        ShiftedProblem p;
        p.basis = b;
        p.n = 16;
        p.dt = w.dt;
        p.steps = w.steps;
        p.z = stokes_companion(b, g, model, w);
        p.f.shape = 0.5 * SpectralField::unit(b, 5);
        p.f.omega = 2.0;
        p.u0 = random_field(b, 16, rng, 1, 1.0);
        const auto rep = energy_inequality_check(solve_shifted(p), p);
        margins.push_back(rep.worst_margin);
        cs.push_back(std::max(0.0, -rep.worst_margin) / w.dt);
    }
    // c is stable when every estimate stays within a factor 2 of the finest;
    // all-nonnegative margins give c = 0 throughout.
    bool c_stable = true;
    for (double c : cs) c_stable = c_stable && (cs.back() == 0.0 ? c == 0.0 : (c <= 2.0 * cs.back() && c >= 0.5 * cs.back()));
    const double c_final = cs.back();
    bool margins_ok = true;
    for (std::size_t j = 0; j < margins.size(); ++j) margins_ok = margins_ok && margins[j] >= -c_final * (dt_fine * (j == 0 ? 4 : j == 1 ? 2 : 1));

    std::size_t under = 0;
    double worst_ratio = 0.0;
    for (std::uint32_t j = 0; j < 20; ++j) {
        GalerkinConfig g;
        g.n = 16;
        g.dt = 1e-3;
        g.T = 0.3;
        g.u0 = random_field(b, 16, rng, 10 + 3 * j, 1.0);
        ShiftedProblem p;
        p.basis = b;
        p.n = 16;
        p.dt = g.dt;
        p.steps = g.steps();
        p.z = stokes_companion(b, g, model, generate_wiener(g.steps(), 1, g.dt, 909, j));
        const SpectralField v0 = random_field(b, 16, rng, 11 + 3 * j, 1.0);
        SpectralField v1 = v0;
        v1.axpy(1e-6, random_field(b, 16, rng, 12 + 3 * j, 1.0));
        const auto r = uniqueness_shifted(p, v1, v0);
        under += r.under_envelope;
        worst_ratio = std::max(worst_ratio, r.worst_ratio);
    }
    Outcome o;
    o.pass = c_stable && margins_ok && under == 20;
    o.detail = "worst margins " + fmt(margins[0]) + ", " + fmt(margins[1]) + ", " + fmt(margins[2]) + " at dt " + fmt(4 * dt_fine) + ", " +
               fmt(2 * dt_fine) + ", " + fmt(dt_fine) + " (c = " + fmt(cs[0]) + ", " + fmt(cs[1]) + ", " + fmt(cs[2]) + "); under envelope " +
               std::to_string(under) + "/20, worst ratio " + fmt(worst_ratio);
    o.data = {{"margins", margins}, {"c", cs}, {"under_envelope", under}, {"worst_ratio", worst_ratio}};
    return o;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    std::string json_path;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--json" && i + 1 < argc) json_path = argv[++i];
        else only.insert(std::stoi(a));
    }
    const std::vector<Criterion> all{
        {1, "operator identities", 10, operator_identities},
        {2, "trilinear structure", 30, trilinear_structure},
        {3, "noise certification", 30, noise_certification},
        {4, "integrator orders", 60, integrator_orders},
        {5, "energy budget", 300, energy_budget},
        {6, "martingale diagnostics", 300, martingale},
        {7, "uniform-in-n moments", 900, uniform_moments},
        {8, "tightness diagnostics", 900, tightness},
        {9, "Holly-Wiciak space", 30, holly_wiciak},
        {10, "2D inequalities", 120, inequalities_2d},
        {11, "pathwise uniqueness", 600, pathwise_uniqueness},
        {12, "shifted energy and uniqueness", 120, appendix_d},
    };
    bool all_pass = true;
    json report = json::array();
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what(), {}};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        all_pass = all_pass && pass;
        std::cout << (pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail << "  [" << fmt(secs) << " s / "
                  << c.budget_s << " s" << (in_time ? "" : ", OVER BUDGET") << "]" << std::endl;
        report.push_back({{"id", c.id}, {"name", c.name}, {"pass", pass}, {"seconds", secs}, {"detail", o.detail}, {"data", o.data}});
    }
    if (!json_path.empty()) std::ofstream(json_path) << report.dump(2) << '\n';
    return all_pass ? 0 : 1;
}
