#pragma once

// Transport-plus-reaction noise G(u)h = sum_i h_i [(b_i . grad) u + c_i u]
// and the checks of its coercivity, growth and continuity conditions.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sns/operators.hpp"
#include "sns/random.hpp"

namespace sns {

/// Real scalar field sum_t cos_t cos(kappa_t . x) + sin_t sin(kappa_t . x).
/// A term with k = 0 contributes the constant cos_t.
struct ScalarSeries {
    struct Term {
        IntVec k{};
        double cos = 0.0;
        double sin = 0.0;
    };
    std::vector<Term> terms;

    static ScalarSeries constant(double value) {
        ScalarSeries s;
        if (value != 0.0) s.terms.push_back({IntVec{}, value, 0.0});
        return s;
    }

    bool is_zero() const {
        return std::all_of(terms.begin(), terms.end(), [](const Term& t) {
            const bool k0 = t.k == IntVec{};
            return t.cos == 0.0 && (k0 || t.sin == 0.0);
        });
    }
    bool is_constant() const {
        return std::all_of(terms.begin(), terms.end(), [](const Term& t) {
            return t.k == IntVec{} || (t.cos == 0.0 && t.sin == 0.0);
        });
    }
};

struct NoiseDirection {
    std::array<ScalarSeries, 3> b; ///< components of the transport field
    ScalarSeries c;
};

struct NoiseModel {
    TorusDomain domain;
    std::vector<NoiseDirection> directions;

    std::size_t size() const noexcept { return directions.size(); }

    bool constant_coefficients() const {
        for (const auto& dir : directions) {
            for (int j = 0; j < domain.dimension; ++j)
                if (!dir.b[j].is_constant()) return false;
            if (!dir.c.is_constant()) return false;
        }
        return true;
    }
    bool is_zero() const {
        for (const auto& dir : directions) {
            for (int j = 0; j < domain.dimension; ++j)
                if (!dir.b[j].is_zero()) return false;
            if (!dir.c.is_zero()) return false;
        }
        return true;
    }
    bool has_transport() const {
        for (const auto& dir : directions)
            for (int j = 0; j < domain.dimension; ++j)
                if (!dir.b[j].is_zero()) return true;
        return false;
    }

    void validate() const {
        domain.validate();
        for (const auto& dir : directions) {
            auto check = [&](const ScalarSeries& s) {
                for (const auto& t : s.terms)
                    for (int j = 0; j < domain.dimension; ++j)
                        detail::require(std::abs(t.k[j]) <= domain.max_wavenumber,
                                        "noise coefficient wave vectors must satisfy |k_j| <= K");
            };
            for (int j = 0; j < domain.dimension; ++j) check(dir.b[j]);
            check(dir.c);
        }
    }

    /// b_1 = (beta, 0[, 0]), c_1 = gamma, constant.
    static NoiseModel constant_transport(const TorusDomain& domain, double beta, double gamma = 0.0) {
        NoiseModel m;
        m.domain = domain;
        NoiseDirection dir;
        dir.b[0] = ScalarSeries::constant(beta);
        dir.c = ScalarSeries::constant(gamma);
        m.directions.push_back(dir);
        return m;
    }
};

namespace detail {

struct ScalarSpectrumEntry {
    IntVec k{};
    RealVec kappa{};
    std::complex<double> value;
};

inline std::vector<ScalarSpectrumEntry> scalar_spectrum(const ScalarSeries& s, const TorusDomain& dom) {
    std::vector<ScalarSpectrumEntry> out;
    for (const auto& t : s.terms) {
        RealVec kap{};
        for (int j = 0; j < dom.dimension; ++j) kap[j] = 2.0 * std::numbers::pi * t.k[j] / dom.period[j];
        if (t.k == IntVec{}) {
            if (t.cos != 0.0) out.push_back({t.k, kap, {t.cos, 0.0}});
            continue;
        }
        if (t.cos == 0.0 && t.sin == 0.0) continue;
        IntVec nk{};
        RealVec nkap{};
        for (int j = 0; j < dom.dimension; ++j) {
            nk[j] = -t.k[j];
            nkap[j] = -kap[j];
        }
        out.push_back({t.k, kap, {t.cos / 2.0, -t.sin / 2.0}});
        out.push_back({nk, nkap, {t.cos / 2.0, t.sin / 2.0}});
    }
    return out;
}

inline double series_value(const ScalarSeries& s, const TorusDomain& dom, const RealVec& x) {
    double v = 0.0;
    for (const auto& t : s.terms) {
        double ph = 0.0;
        for (int j = 0; j < dom.dimension; ++j) ph += 2.0 * std::numbers::pi * t.k[j] / dom.period[j] * x[j];
        v += t.cos * std::cos(ph) + t.sin * std::sin(ph);
    }
    return v;
}

inline double series_partial(const ScalarSeries& s, const TorusDomain& dom, const RealVec& x, int axis) {
    double v = 0.0;
    for (const auto& t : s.terms) {
        double ph = 0.0;
        for (int j = 0; j < dom.dimension; ++j) ph += 2.0 * std::numbers::pi * t.k[j] / dom.period[j] * x[j];
        const double kap = 2.0 * std::numbers::pi * t.k[axis] / dom.period[axis];
        v += kap * (-t.cos * std::sin(ph) + t.sin * std::cos(ph));
    }
    return v;
}

/// Calls fn(x) at every point of a G^d grid.
template <class Fn>
void for_each_grid_point(const TorusDomain& dom, int G, Fn&& fn) {
    const int d = dom.dimension;
    std::size_t total = 1;
    for (int j = 0; j < d; ++j) total *= static_cast<std::size_t>(G);
    for (std::size_t idx = 0; idx < total; ++idx) {
        RealVec x{};
        std::size_t rem = idx;
        for (int j = d - 1; j >= 0; --j) {
            x[j] = dom.period[j] * static_cast<double>(rem % static_cast<std::size_t>(G)) / G;
            rem /= static_cast<std::size_t>(G);
        }
        fn(x);
    }
}

inline int max_series_wavenumber(const NoiseModel& m) {
    int kmax = 0;
    for (const auto& dir : m.directions) {
        auto scan = [&](const ScalarSeries& s) {
            for (const auto& t : s.terms)
                for (int j = 0; j < m.domain.dimension; ++j) kmax = std::max(kmax, std::abs(t.k[j]));
        };
        for (int j = 0; j < m.domain.dimension; ++j) scan(dir.b[j]);
        scan(dir.c);
    }
    return kmax;
}

/// Maximizes fn over the torus: a G^d grid sweep, doubled until successive
/// maxima agree to tol (relative) or G reaches g_max, then a compass search
/// started from the best grid point. Constant coefficients stop after the
/// first sweep, which is exact for them.
template <class Fn>
double refined_grid_max(const NoiseModel& m, Fn&& fn, int& grid_used, double tol = 1e-9) {
    const int d = m.domain.dimension;
    const int g_max = d == 2 ? 256 : 32;
    int G = std::max(8, 8 * max_series_wavenumber(m));
    double prev = -std::numeric_limits<double>::infinity();
    double best = prev;
    RealVec arg{};
    for (;;) {
        best = -std::numeric_limits<double>::infinity();
        for_each_grid_point(m.domain, G, [&](const RealVec& x) {
            const double v = fn(x);
            if (v > best) {
                best = v;
                arg = x;
            }
        });
        grid_used = G;
        if (m.constant_coefficients()) return best;
        if (std::abs(best - prev) <= tol * std::max(1.0, std::abs(best)) || 2 * G > g_max) break;
        prev = best;
        G *= 2;
    }
    double step = m.domain.period[0] / G;
    while (step > 1e-12) {
        bool moved = false;
        for (int j = 0; j < d && !moved; ++j)
            for (double sgn : {1.0, -1.0}) {
                RealVec y = arg;
                y[j] += sgn * step;
                const double v = fn(y);
                if (v > best) {
                    best = v;
                    arg = y;
                    moved = true;
                    break;
                }
            }
        if (!moved) step /= 2.0;
    }
    return best;
}

} // namespace detail

/// Compiled form of a model on a basis: Fourier coefficients of b_i and c_i.
class NoiseOperator {
public:
    NoiseOperator(BasisPtr basis, NoiseModel model) : basis_(std::move(basis)), model_(std::move(model)) {
        model_.validate();
        detail::require(model_.domain == basis_->domain(), "noise model and basis use different domains");
        const int d = basis_->dimension();
        for (const auto& dir : model_.directions) {
            Compiled c;
            for (int j = 0; j < d; ++j)
                for (const auto& e : detail::scalar_spectrum(dir.b[j], model_.domain)) {
                    auto it = std::find_if(c.terms.begin(), c.terms.end(), [&](const Term& t) { return t.k == e.k; });
                    if (it == c.terms.end()) {
                        c.terms.push_back(Term{e.k, e.kappa, CVec{}, 0.0});
                        it = c.terms.end() - 1;
                    }
                    it->b[j] += e.value;
                }
            for (const auto& e : detail::scalar_spectrum(dir.c, model_.domain)) {
                auto it = std::find_if(c.terms.begin(), c.terms.end(), [&](const Term& t) { return t.k == e.k; });
                if (it == c.terms.end()) {
                    c.terms.push_back(Term{e.k, e.kappa, CVec{}, 0.0});
                    it = c.terms.end() - 1;
                }
                it->c += e.value;
            }
            compiled_.push_back(std::move(c));
        }
        acc_.assign(basis_->pairs().size(), CVec{});
        needed_.assign(basis_->pairs().size(), 0);
    }

    const NoiseModel& model() const noexcept { return model_; }
    const BasisPtr& basis_ptr() const noexcept { return basis_; }
    std::size_t size() const noexcept { return compiled_.size(); }

    /// P_{n_out} of the Leray projection of (b_i . grad) u + c_i u.
    SpectralField direction(const SpectralField& u, std::size_t i, std::size_t n_out) {
        const auto& basis = *basis_;
        const int d = basis.dimension();
        n_out = std::min(n_out, basis.size());
        SpectralField out(basis_);
        if (n_out == 0) return out;
        std::fill(acc_.begin(), acc_.end(), CVec{});
        std::fill(needed_.begin(), needed_.end(), 0);
        for (std::size_t m = 0; m < n_out; ++m) needed_[basis.mode(m).pair] = 1;

        const std::complex<double> I(0.0, 1.0);
        const auto& pairs = basis.pairs();
        for (const auto& t : compiled_.at(i).terms) {
            for (std::size_t q = 0; q < pairs.size(); ++q) {
                const auto& pr = pairs[q];
                CVec plus{};
                bool any = false;
                for (int p = 0; p < basis.polarizations(); ++p) {
                    const double a = u[pr.cos_mode[p]];
                    const double b = u[pr.sin_mode[p]];
                    if (a == 0.0 && b == 0.0) continue;
                    any = true;
                    const std::complex<double> hp(a / 2.0, -b / 2.0);
                    for (int j = 0; j < d; ++j) plus[j] += basis.norm_factor() * pr.eps[p][j] * hp;
                }
                if (!any) continue;
                for (int sgn : {1, -1}) {
                    IntVec k{};
                    std::complex<double> adv = t.c;
                    for (int j = 0; j < d; ++j) {
                        k[j] = t.k[j] + sgn * pr.k[j];
                        adv += t.b[j] * I * (sgn * pr.kappa[j]);
                    }
                    const LatticeSlot slot = basis.lookup(k);
                    if (slot.pair < 0 || !slot.plus || !needed_[slot.pair]) continue;
                    CVec& dst = acc_[slot.pair];
                    for (int j = 0; j < d; ++j) dst[j] += adv * (sgn > 0 ? plus[j] : std::conj(plus[j]));
                }
            }
        }
        for (std::size_t m = 0; m < n_out; ++m) out[m] = project_plus(basis, acc_, m);
        return out;
    }

    /// G(u)h truncated to the first n_out modes.
    SpectralField apply(const SpectralField& u, std::span<const double> h, std::size_t n_out) {
        detail::require(h.size() == size(), "noise vector length must equal the number of directions");
        SpectralField out(basis_);
        for (std::size_t i = 0; i < size(); ++i)
            if (h[i] != 0.0) out.axpy(h[i], direction(u, i, n_out));
        return out;
    }

    /// Squared Hilbert-Schmidt norm of G(u) into the target space.
    double hs_norm_sq(const SpectralField& u, Space target, std::size_t n_out) {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += norm_sq(direction(u, i, n_out), target);
        return s;
    }

private:
    struct Term {
        IntVec k{};
        RealVec kappa{};
        CVec b{};
        std::complex<double> c;
    };
    struct Compiled {
        std::vector<Term> terms;
    };

    BasisPtr basis_;
    NoiseModel model_;
    std::vector<Compiled> compiled_;
    std::vector<CVec> acc_;
    std::vector<char> needed_;
};

inline SpectralField apply_G(const SpectralField& u, std::span<const double> h, NoiseOperator& G) {
    return G.apply(u, h, u.basis().size());
}

/// Target must be H or V_dual.
inline double hs_norm_G(const SpectralField& u, NoiseOperator& G, Space target) {
    detail::require(target == Space::H || target == Space::Vdual, "Hilbert-Schmidt target must be H or V_dual");
    return std::sqrt(G.hs_norm_sq(u, target, u.basis().size()));
}

/// Per-direction sup-norm data used by C_1 and the growth bound.
struct SupNorms {
    std::vector<double> b_sq;   ///< sup |b_i|^2
    std::vector<double> div_sq; ///< sup |div b_i|^2
    std::vector<double> c_sq;   ///< sup |c_i|^2
    int grid = 0;
};

inline SupNorms sup_norms(const NoiseModel& m) {
    SupNorms s;
    const int d = m.domain.dimension;
    for (const auto& dir : m.directions) {
        int g = 0;
        s.b_sq.push_back(detail::refined_grid_max(
            m,
            [&](const RealVec& x) {
                double v = 0.0;
                for (int j = 0; j < d; ++j) v += std::pow(detail::series_value(dir.b[j], m.domain, x), 2);
                return v;
            },
            g));
        s.grid = std::max(s.grid, g);
        s.div_sq.push_back(detail::refined_grid_max(
            m,
            [&](const RealVec& x) {
                double v = 0.0;
                for (int j = 0; j < d; ++j) v += detail::series_partial(dir.b[j], m.domain, x, j);
                return v * v;
            },
            g));
        s.grid = std::max(s.grid, g);
        s.c_sq.push_back(detail::refined_grid_max(
            m, [&](const RealVec& x) { return std::pow(detail::series_value(dir.c, m.domain, x), 2); }, g));
        s.grid = std::max(s.grid, g);
    }
    return s;
}

/// C_1 = sum_i (|b_i|^2_inf + |div b_i|^2_inf + |c_i|^2_inf).
inline double c1_constant(const NoiseModel& m) {
    const SupNorms s = sup_norms(m);
    double c = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) c += s.b_sq[i] + s.div_sq[i] + s.c_sq[i];
    return c;
}

/// a = min_x (2 - lambda_max(sum_i b_i(x) b_i(x)^T)).
inline double coercivity_constant(const NoiseModel& m) {
    const int d = m.domain.dimension;
    int g = 0;
    const double worst = detail::refined_grid_max(
        m,
        [&](const RealVec& x) {
            Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
            for (const auto& dir : m.directions) {
                Eigen::VectorXd b(d);
                for (int j = 0; j < d; ++j) b[j] = detail::series_value(dir.b[j], m.domain, x);
                S += b * b.transpose();
            }
            return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
        },
        g);
    return 2.0 - worst;
}

struct NoiseConditionReport {
    double C1 = 0.0;
    double a = 0.0;
    bool accepted = false;
    std::string rejection; ///< empty when accepted
    double epsilon = 0.0;
    double eta = 0.0;
    double lambda0 = 0.0;
    double rho = 0.0;
    double gstar_constant = 0.0; ///< analytic growth bound 2 sum (2|b|^2 + 2|div b|^2 + |c|^2)
    double gstar_measured = 0.0; ///< sampled sup of |G(u)|^2_{HS(Y,V')} / (1 + |u|^2_H)
    std::size_t gstar_violations = 0;
    double lipschitz_L = 0.0;    ///< sampled sup of |G(w)|^2_{HS(Y,H)} / ||w||^2
    std::size_t empirical_violations = 0;
    double worst_margin = 0.0;   ///< min over samples of lhs - rhs, relative
    std::size_t samples = 0;
    int sup_grid = 0;
};

/// Fills the report and samples the coercivity inequality
///   2||u||^2 - |G(u)|^2_HS >= eta ||u||^2 - lambda0 |u|^2_H
/// and the growth bound on `samples` random fields over the first `modes`
/// modes. epsilon <= 0 selects a / 2.
inline NoiseConditionReport certify_conditions(NoiseOperator& G, double epsilon, std::size_t samples,
                                               std::uint64_t seed, std::size_t modes = 0) {
    const NoiseModel& m = G.model();
    const BasisPtr& basis = G.basis_ptr();
    const std::size_t n = modes == 0 ? basis->size() : std::min(modes, basis->size());
    NoiseConditionReport rep;
    const SupNorms sn = sup_norms(m);
    rep.sup_grid = sn.grid;
    for (std::size_t i = 0; i < m.size(); ++i) {
        rep.C1 += sn.b_sq[i] + sn.div_sq[i] + sn.c_sq[i];
        rep.gstar_constant += 2.0 * (2.0 * sn.b_sq[i] + 2.0 * sn.div_sq[i] + sn.c_sq[i]);
    }
    rep.a = coercivity_constant(m);
    if (m.is_zero()) {
        rep.accepted = true;
        rep.eta = 2.0;
        rep.lambda0 = 0.0;
        rep.epsilon = 0.0;
    } else if (rep.a <= 0.0) {
        rep.accepted = false;
        rep.rejection = "coercivity condition fails: a = " + std::to_string(rep.a) + " <= 0";
        return rep;
    } else {
        rep.epsilon = epsilon > 0.0 ? epsilon : rep.a / 2.0;
        detail::require(rep.epsilon > 0.0 && rep.epsilon < rep.a, "epsilon must lie in (0, a)");
        rep.accepted = true;
        rep.eta = rep.a - rep.epsilon;
        rep.lambda0 = rep.C1 * rep.C1 / (4.0 * rep.epsilon) + rep.C1;
    }

    const CounterRng rng(seed, 0x4e4f495345ull);
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples; ++s) {
        const auto draw = static_cast<std::uint32_t>(s);
        SpectralField u = random_field(basis, n, rng, draw, (s % 3) * 1.0);
        u *= 3.0 * rng.uniform(draw, 0) / std::max(norm(u, Space::H), 1e-300);
        const double d2 = norm_sq(u, Space::D);
        const double h2 = norm_sq(u, Space::H);
        const double hsH = G.hs_norm_sq(u, Space::H, basis->size());
        const double lhs = 2.0 * d2 - hsH;
        const double rhs = rep.eta * d2 - rep.lambda0 * h2;
        const double scale = 2.0 * d2 + hsH + rep.lambda0 * h2;
        const double margin = scale > 0.0 ? (lhs - rhs) / scale : 0.0;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -1e-12) ++rep.empirical_violations;

        const double ratio = G.hs_norm_sq(u, Space::Vdual, basis->size()) / (1.0 + h2);
        rep.gstar_measured = std::max(rep.gstar_measured, ratio);
        if (ratio > rep.gstar_constant * (1.0 + 1e-12)) ++rep.gstar_violations;
        if (d2 > 0.0) rep.lipschitz_L = std::max(rep.lipschitz_L, hsH / d2);
        ++rep.samples;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const SpectralField e = SpectralField::unit(basis, i);
        rep.lipschitz_L = std::max(rep.lipschitz_L, G.hs_norm_sq(e, Space::H, basis->size()) / basis->mode(i).k2);
    }
    if (samples == 0) rep.worst_margin = 0.0;
    return rep;
}

struct ContinuityReport {
    double deviation = 0.0; ///< |<G(u) - G(v), psi>|_Y
    double constant = 0.0;  ///< deviation / (|u - v|_H ||psi||_V)
};

/// Quantitative continuity of u -> <G(u), psi> from H into Y.
inline ContinuityReport continuity_surrogate_Gstarstar(NoiseOperator& G, const SpectralField& psi,
                                                       const SpectralField& u, const SpectralField& v) {
    const SpectralField w = u - v;
    ContinuityReport rep;
    double s = 0.0;
    for (std::size_t i = 0; i < G.size(); ++i) {
        const double x = inner(G.direction(w, i, psi.basis().size()), psi, Space::H);
        s += x * x;
    }
    rep.deviation = std::sqrt(s);
    const double den = norm(w, Space::H) * norm(psi, Space::V);
    rep.constant = den > 0.0 ? rep.deviation / den : 0.0;
    return rep;
}

} // namespace sns
