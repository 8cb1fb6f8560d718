#pragma once

// JSON run configuration. Loading resolves defaults, rejects unknown keys and
// collects every violation with its key path before failing.

#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sns/galerkin.hpp"
#include "sns/noise.hpp"

namespace sns::io {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "invalid configuration:";
        for (const auto& x : v) s += "\n  " + x;
        return s;
    }
    std::vector<std::string> violations_;
};

inline const std::vector<std::string>& verbs() {
    static const std::vector<std::string> v{"verify-operators", "certify-noise", "simulate", "ensemble",
                                            "estimates",        "tightness",     "uniqueness", "spaces"};
    return v;
}

/// Coefficient assignment by basis index.
struct ModeValue {
    std::size_t mode = 0;
    double value = 0.0;
};

/// Field given by explicit modes, or a random draw scaled to an H norm.
struct FieldSpec {
    std::vector<ModeValue> modes;
    bool random = false;
    std::uint64_t seed = 0;
    std::size_t random_modes = 0; ///< 0 means the first galerkin level
    double decay = 1.0;
    double h_norm = 1.0;

    bool is_zero() const { return !random && modes.empty(); }
};

struct RunConfig {
    std::string experiment = "simulate";
    TorusDomain domain;
    SpaceScale scale;
    NoiseModel noise;
    double epsilon = 0.0; ///< 0 selects a / 2
    std::size_t noise_samples = 10000;

    std::vector<std::size_t> levels{16};
    double dt = 1e-3;
    double T = 1.0;
    double cutoff = 1e6;
    bool nonlinear = true;
    Scheme scheme = Scheme::EulerMaruyama;
    FieldSpec forcing;
    double forcing_omega = 0.0;
    FieldSpec u0;
    std::size_t snapshot_stride = 0;

    std::size_t trajectories = 100;
    std::uint64_t seed = 1;
    std::size_t workers = 1;

    std::vector<double> moments{2.0};
    double ratio_bound = 1.5;

    int delta_min_exp = -10;
    int delta_max_exp = -4;
    double aldous_eta = 0.0; ///< 0 selects the median lag-one increment scale
    double slope_threshold = 0.4;

    double gamma = 1e-8;

    double eta0 = 0.5;
    std::size_t spaces_N = 64;
    std::size_t spaces_samples = 10000;

    json resolved;          ///< fully resolved document
    std::uint64_t hash = 0; ///< FNV-1a of the canonical dump, workers excluded

    BasisPtr basis() const { return ModeBasis::create(domain, scale); }

    SpectralField field(const FieldSpec& f, const BasisPtr& b) const {
        SpectralField out(b);
        if (f.random) {
            const std::size_t n = f.random_modes == 0 ? levels.front() : f.random_modes;
            out = random_field(b, n, CounterRng(f.seed, 0xF1E1D), 0, f.decay);
            const double h = norm(out, Space::H);
            if (h > 0.0) out *= f.h_norm / h;
        }
        for (const auto& m : f.modes) out[m.mode] += m.value;
        return out;
    }

    GalerkinConfig galerkin(const BasisPtr& b, std::size_t n) const {
        GalerkinConfig c;
        c.n = n;
        c.dt = dt;
        c.T = T;
        c.cutoff = CutoffSpec{cutoff};
        c.nonlinear = nonlinear;
        c.scheme = scheme;
        if (!forcing.is_zero()) c.forcing.shape = field(forcing, b);
        c.forcing.omega = forcing_omega;
        c.u0 = field(u0, b);
        c.seed = seed;
        c.snapshot_stride = snapshot_stride;
        return c;
    }

    std::optional<NoiseModel> noise_model() const {
        if (noise.directions.empty()) return std::nullopt;
        return noise;
    }
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace detail {

class Reader {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

    /// Flags keys of obj that are not in allowed.
    void keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!obj.is_object()) {
            fail(path.empty() ? "<root>" : path, "expected an object");
            return;
        }
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || it.key() == a;
            if (!ok) fail(join(path, it.key()), "unknown key");
        }
    }

    static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

    template <class T>
    void get(const json& obj, const std::string& path, const char* key, T& out) {
        if (!obj.is_object() || !obj.contains(key)) return;
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            fail(join(path, key), "wrong type");
        }
    }
};

inline json series_to_json(const ScalarSeries& s) {
    json a = json::array();
    for (const auto& t : s.terms) a.push_back({{"k", t.k}, {"cos", t.cos}, {"sin", t.sin}});
    return a;
}

inline ScalarSeries read_series(Reader& r, const json& j, const std::string& path) {
    ScalarSeries s;
    if (j.is_number()) return ScalarSeries::constant(j.get<double>());
    if (!j.is_array()) {
        r.fail(path, "expected a number or a list of {k, cos, sin} terms");
        return s;
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        r.keys(j[i], p, {"k", "cos", "sin"});
        ScalarSeries::Term t;
        std::vector<int> k;
        r.get(j[i], p, "k", k);
        if (k.size() > 3) r.fail(p + ".k", "at most 3 components");
        for (std::size_t c = 0; c < std::min<std::size_t>(3, k.size()); ++c) t.k[c] = k[c];
        r.get(j[i], p, "cos", t.cos);
        r.get(j[i], p, "sin", t.sin);
        s.terms.push_back(t);
    }
    return s;
}

inline FieldSpec read_field(Reader& r, const json& j, const std::string& path) {
    FieldSpec f;
    r.keys(j, path, {"modes", "random"});
    if (j.contains("modes")) {
        const json& m = j["modes"];
        if (!m.is_array()) r.fail(path + ".modes", "expected a list");
        else
            for (std::size_t i = 0; i < m.size(); ++i) {
                const std::string p = path + ".modes[" + std::to_string(i) + "]";
                r.keys(m[i], p, {"mode", "value"});
                ModeValue mv;
                r.get(m[i], p, "mode", mv.mode);
                r.get(m[i], p, "value", mv.value);
                f.modes.push_back(mv);
            }
    }
    if (j.contains("random")) {
        const json& q = j["random"];
        const std::string p = path + ".random";
        r.keys(q, p, {"seed", "modes", "decay", "h_norm"});
        f.random = true;
        r.get(q, p, "seed", f.seed);
        r.get(q, p, "modes", f.random_modes);
        r.get(q, p, "decay", f.decay);
        r.get(q, p, "h_norm", f.h_norm);
    }
    return f;
}

inline json field_to_json(const FieldSpec& f) {
    json j = json::object();
    json m = json::array();
    for (const auto& x : f.modes) m.push_back({{"mode", x.mode}, {"value", x.value}});
    j["modes"] = m;
    if (f.random) j["random"] = {{"seed", f.seed}, {"modes", f.random_modes}, {"decay", f.decay}, {"h_norm", f.h_norm}};
    return j;
}

} // namespace detail

/// Parses and validates a document. Throws ConfigError with every violation.
inline RunConfig parse_config(const json& doc) {
    detail::Reader r;
    RunConfig c;
    r.keys(doc, "", {"experiment", "domain", "scale", "noise", "galerkin", "ensemble", "estimates", "tightness",
                     "uniqueness", "spaces"});
    if (!doc.is_object()) throw ConfigError(r.errors);
    r.get(doc, "", "experiment", c.experiment);
    if (std::find(verbs().begin(), verbs().end(), c.experiment) == verbs().end())
        r.fail("experiment", "unknown experiment '" + c.experiment + "'");

    const json empty = json::object();
    auto section = [&](const char* name) -> const json& { return doc.contains(name) ? doc[name] : empty; };

    const json& dom = section("domain");
    r.keys(dom, "domain", {"d", "K", "period"});
    r.get(dom, "domain", "d", c.domain.dimension);
    r.get(dom, "domain", "K", c.domain.max_wavenumber);
    if (c.domain.dimension != 2 && c.domain.dimension != 3) r.fail("domain.d", "must be 2 or 3");
    if (c.domain.max_wavenumber < 1) r.fail("domain.K", "must be >= 1");
    if (dom.contains("period")) {
        std::vector<double> p;
        r.get(dom, "domain", "period", p);
        if (p.size() != static_cast<std::size_t>(c.domain.dimension)) r.fail("domain.period", "needs one entry per dimension");
        for (std::size_t j = 0; j < std::min<std::size_t>(3, p.size()); ++j) {
            if (!(p[j] > 0.0)) r.fail("domain.period", "entries must be positive");
            c.domain.period[j] = p[j];
        }
    }

    const int d = (c.domain.dimension == 2 || c.domain.dimension == 3) ? c.domain.dimension : 2;
    c.scale = SpaceScale::defaults(d);
    const json& sc = section("scale");
    r.keys(sc, "scale", {"s", "s_U"});
    r.get(sc, "scale", "s", c.scale.s);
    r.get(sc, "scale", "s_U", c.scale.s_U);
    if (!(c.scale.s > d / 2.0 + 1.0)) r.fail("scale.s", "must exceed d/2 + 1");
    if (!(c.scale.s_U > c.scale.s)) r.fail("scale.s_U", "must exceed scale.s");

    const json& nz = section("noise");
    r.keys(nz, "noise", {"directions", "M", "epsilon", "samples"});
    c.noise.domain = c.domain;
    if (nz.contains("directions")) {
        const json& ds = nz["directions"];
        if (!ds.is_array()) r.fail("noise.directions", "expected a list");
        else
            for (std::size_t i = 0; i < ds.size(); ++i) {
                const std::string p = "noise.directions[" + std::to_string(i) + "]";
                r.keys(ds[i], p, {"b", "c"});
                NoiseDirection dir;
                if (ds[i].contains("b")) {
                    const json& b = ds[i]["b"];
                    if (!b.is_array() || b.size() != static_cast<std::size_t>(d)) r.fail(p + ".b", "needs one series per dimension");
                    else
                        for (int j = 0; j < d; ++j) dir.b[j] = detail::read_series(r, b[j], p + ".b[" + std::to_string(j) + "]");
                }
                if (ds[i].contains("c")) dir.c = detail::read_series(r, ds[i]["c"], p + ".c");
                c.noise.directions.push_back(dir);
            }
    } else {
        c.noise = NoiseModel::constant_transport(c.domain, 1.0);
    }
    if (nz.contains("M")) {
        std::size_t M = 0;
        r.get(nz, "noise", "M", M);
        if (M != c.noise.directions.size()) r.fail("noise.M", "must equal the number of directions");
    }
    r.get(nz, "noise", "epsilon", c.epsilon);
    r.get(nz, "noise", "samples", c.noise_samples);
    if (c.epsilon < 0.0) r.fail("noise.epsilon", "must be >= 0 (0 selects a/2)");
    try {
        c.noise.validate();
        if (!c.noise.is_zero()) {
            const double a = coercivity_constant(c.noise);
            if (c.epsilon == 0.0 && a > 0.0) c.epsilon = 0.5 * a;
            else if (a > 0.0 && c.epsilon >= a) r.fail("noise.epsilon", "must be below the coercivity constant a");
        }
    } catch (const std::invalid_argument& e) {
        r.fail("noise.directions", e.what());
    }

    const json& g = section("galerkin");
    r.keys(g, "galerkin", {"n", "dt", "T", "cutoff", "nonlinear", "scheme", "forcing", "u0", "snapshot_stride"});
    if (g.contains("n")) {
        if (g["n"].is_number_integer() && g["n"].get<long long>() >= 0) c.levels = {g["n"].get<std::size_t>()};
        else r.get(g, "galerkin", "n", c.levels);
    }
    r.get(g, "galerkin", "dt", c.dt);
    r.get(g, "galerkin", "T", c.T);
    r.get(g, "galerkin", "cutoff", c.cutoff);
    r.get(g, "galerkin", "nonlinear", c.nonlinear);
    std::string scheme = "euler-maruyama";
    r.get(g, "galerkin", "scheme", scheme);
    if (scheme == "euler-maruyama") c.scheme = Scheme::EulerMaruyama;
    else if (scheme == "exponential-euler") c.scheme = Scheme::ExponentialEuler;
    else r.fail("galerkin.scheme", "must be euler-maruyama or exponential-euler");
    if (g.contains("forcing")) {
        const json& f = g["forcing"];
        json shape = f;
        if (f.is_object() && f.contains("omega")) {
            r.get(f, "galerkin.forcing", "omega", c.forcing_omega);
            shape.erase("omega");
        }
        c.forcing = detail::read_field(r, shape, "galerkin.forcing");
    }
    if (g.contains("u0")) c.u0 = detail::read_field(r, g["u0"], "galerkin.u0");
    r.get(g, "galerkin", "snapshot_stride", c.snapshot_stride);

    const json& en = section("ensemble");
    r.keys(en, "ensemble", {"trajectories", "seed", "workers"});
    r.get(en, "ensemble", "trajectories", c.trajectories);
    r.get(en, "ensemble", "seed", c.seed);
    r.get(en, "ensemble", "workers", c.workers);
    if (c.trajectories < 2) r.fail("ensemble.trajectories", "must be >= 2");
    if (c.workers < 1) r.fail("ensemble.workers", "must be >= 1");

    const json& es = section("estimates");
    r.keys(es, "estimates", {"p", "ratio_bound"});
    r.get(es, "estimates", "p", c.moments);
    r.get(es, "estimates", "ratio_bound", c.ratio_bound);
    for (double p : c.moments)
        if (!(p >= 2.0)) r.fail("estimates.p", "moments must be >= 2");

    const json& ti = section("tightness");
    r.keys(ti, "tightness", {"delta_min_exp", "delta_max_exp", "aldous_eta", "slope_threshold"});
    r.get(ti, "tightness", "delta_min_exp", c.delta_min_exp);
    r.get(ti, "tightness", "delta_max_exp", c.delta_max_exp);
    r.get(ti, "tightness", "aldous_eta", c.aldous_eta);
    r.get(ti, "tightness", "slope_threshold", c.slope_threshold);
    if (c.delta_min_exp >= c.delta_max_exp || c.delta_max_exp > 0)
        r.fail("tightness", "need delta_min_exp < delta_max_exp <= 0");

    const json& un = section("uniqueness");
    r.keys(un, "uniqueness", {"gamma"});
    r.get(un, "uniqueness", "gamma", c.gamma);
    if (c.gamma < 0.0) r.fail("uniqueness.gamma", "must be >= 0");

    const json& sp = section("spaces");
    r.keys(sp, "spaces", {"eta0", "N", "samples"});
    r.get(sp, "spaces", "eta0", c.eta0);
    r.get(sp, "spaces", "N", c.spaces_N);
    r.get(sp, "spaces", "samples", c.spaces_samples);
    if (!(c.eta0 > 0.0 && c.eta0 < 1.0)) r.fail("spaces.eta0", "must lie in (0, 1)");

    // Checks that need a basis.
    if (r.errors.empty()) {
        const BasisPtr b = c.basis();
        if (c.levels.empty()) r.fail("galerkin.n", "needs at least one level");
        for (std::size_t n : c.levels)
            if (n < 1 || n > b->size()) r.fail("galerkin.n", "level " + std::to_string(n) + " outside [1, " + std::to_string(b->size()) + "]");
        if (c.spaces_N < 1 || c.spaces_N > b->size()) r.fail("spaces.N", "must lie in [1, basis size]");
        auto check_modes = [&](const FieldSpec& f, const std::string& path) {
            for (const auto& m : f.modes)
                if (m.mode >= b->size()) r.fail(path, "mode index " + std::to_string(m.mode) + " outside the basis");
            if (f.random && f.random_modes > b->size()) r.fail(path + ".random.modes", "exceeds the basis size");
        };
        check_modes(c.forcing, "galerkin.forcing.modes");
        check_modes(c.u0, "galerkin.u0.modes");
        if (r.errors.empty()) {
            for (std::size_t n : c.levels) {
                try {
                    c.galerkin(b, n).validate(*b);
                } catch (const std::invalid_argument& e) {
                    r.fail("galerkin", std::string(e.what()) + " (n = " + std::to_string(n) + ")");
                }
            }
        }
    }
    if (!r.errors.empty()) throw ConfigError(r.errors);

    json res;
    res["experiment"] = c.experiment;
    std::vector<double> period(c.domain.period.begin(), c.domain.period.begin() + c.domain.dimension);
    res["domain"] = {{"d", c.domain.dimension}, {"K", c.domain.max_wavenumber}, {"period", period}};
    res["scale"] = {{"s", c.scale.s}, {"s_U", c.scale.s_U}};
    json dirs = json::array();
    for (const auto& dir : c.noise.directions) {
        json b = json::array();
        for (int j = 0; j < d; ++j) b.push_back(detail::series_to_json(dir.b[j]));
        dirs.push_back({{"b", b}, {"c", detail::series_to_json(dir.c)}});
    }
    res["noise"] = {{"directions", dirs}, {"M", c.noise.directions.size()}, {"epsilon", c.epsilon}, {"samples", c.noise_samples}};
    json forcing = detail::field_to_json(c.forcing);
    forcing["omega"] = c.forcing_omega;
    res["galerkin"] = {{"n", c.levels},
                       {"dt", c.dt},
                       {"T", c.T},
                       {"cutoff", c.cutoff},
                       {"nonlinear", c.nonlinear},
                       {"scheme", c.scheme == Scheme::EulerMaruyama ? "euler-maruyama" : "exponential-euler"},
                       {"forcing", forcing},
                       {"u0", detail::field_to_json(c.u0)},
                       {"snapshot_stride", c.snapshot_stride}};
    res["ensemble"] = {{"trajectories", c.trajectories}, {"seed", c.seed}, {"workers", c.workers}};
    res["estimates"] = {{"p", c.moments}, {"ratio_bound", c.ratio_bound}};
    res["tightness"] = {{"delta_min_exp", c.delta_min_exp},
                        {"delta_max_exp", c.delta_max_exp},
                        {"aldous_eta", c.aldous_eta},
                        {"slope_threshold", c.slope_threshold}};
    res["uniqueness"] = {{"gamma", c.gamma}};
    res["spaces"] = {{"eta0", c.eta0}, {"N", c.spaces_N}, {"samples", c.spaces_samples}};
    c.resolved = res;
    json hashed = res;
    hashed["ensemble"].erase("workers");
    c.hash = fnv1a64(hashed.dump());
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open"});
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError({path + ": parse error: " + e.what()});
    }
    return parse_config(doc);
}

/// Recomputes the hash after command-line overrides of seed or workers.
inline void apply_overrides(RunConfig& c, std::optional<std::uint64_t> seed, std::optional<std::size_t> workers) {
    if (seed) {
        c.seed = *seed;
        c.resolved["ensemble"]["seed"] = *seed;
    }
    if (workers) {
        c.workers = *workers;
        c.resolved["ensemble"]["workers"] = *workers;
    }
    json hashed = c.resolved;
    hashed["ensemble"].erase("workers");
    c.hash = fnv1a64(hashed.dump());
}

inline std::string hex64(std::uint64_t h) {
    std::ostringstream s;
    s << std::hex;
    s.width(16);
    s.fill('0');
    s << h;
    return s.str();
}

} // namespace sns::io
