#pragma once

// Trilinear form b(u, w, v) = int (u . grad w) . v and the operators B, B_n.
//
// The default strategy convolves the sparse Fourier supports of u and w
// directly, so b is exact on the mode set and the cancellation identities
// hold to roundoff. The dealiased grid strategy is a cross-check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "sns/physical.hpp"
#include "sns/random.hpp"

namespace sns {

enum class Strategy { DirectConvolution, DealiasedGrid };

/// Nonzero Fourier coefficients of a real field, both k+ and -k+.
struct SparseSpectrum {
    std::vector<IntVec> k;
    std::vector<RealVec> kappa;
    std::vector<CVec> F;
};

inline SparseSpectrum sparse_spectrum(const SpectralField& u) {
    const auto& basis = u.basis();
    const int d = basis.dimension();
    const double N = basis.norm_factor();
    SparseSpectrum s;
    for (const auto& pr : basis.pairs()) {
        CVec plus{};
        bool any = false;
        for (int p = 0; p < basis.polarizations(); ++p) {
            const double a = u[pr.cos_mode[p]];
            const double b = u[pr.sin_mode[p]];
            if (a == 0.0 && b == 0.0) continue;
            any = true;
            const std::complex<double> hp(a / 2.0, -b / 2.0);
            for (int j = 0; j < d; ++j) plus[j] += N * pr.eps[p][j] * hp;
        }
        if (!any) continue;
        CVec minus{};
        IntVec nk{};
        RealVec nkap{};
        for (int j = 0; j < d; ++j) {
            minus[j] = std::conj(plus[j]);
            nk[j] = -pr.k[j];
            nkap[j] = -pr.kappa[j];
        }
        s.k.push_back(pr.k);
        s.kappa.push_back(pr.kappa);
        s.F.push_back(plus);
        s.k.push_back(nk);
        s.kappa.push_back(nkap);
        s.F.push_back(minus);
    }
    return s;
}

class TrilinearWorkspace {
public:
    explicit TrilinearWorkspace(BasisPtr basis, Strategy strategy = Strategy::DirectConvolution, int grid = 0)
        : basis_(std::move(basis)), strategy_(strategy) {
        const int K = basis_->max_wavenumber();
        grid_ = grid > 0 ? grid : 3 * K + 1;
        if (strategy_ == Strategy::DealiasedGrid)
            detail::require(grid_ >= 3 * K + 1, "dealiased grid needs at least 3K + 1 points per axis");
        acc_.assign(basis_->pairs().size(), CVec{});
        needed_.assign(basis_->pairs().size(), 0);
    }

    const BasisPtr& basis_ptr() const noexcept { return basis_; }
    Strategy strategy() const noexcept { return strategy_; }
    int grid() const noexcept { return grid_; }

    /// Values <B(u, w), e_i> for i < n_out; later entries are left at zero.
    DualField apply(const SpectralField& u, const SpectralField& w, std::size_t n_out) {
        detail::require(same_basis(*basis_, u.basis()) && same_basis(*basis_, w.basis()),
                        "workspace and fields live on different domains");
        n_out = std::min(n_out, basis_->size());
        return strategy_ == Strategy::DirectConvolution ? direct(u, w, n_out) : dealiased(u, w, n_out);
    }

private:
    DualField direct(const SpectralField& u, const SpectralField& w, std::size_t n_out) {
        const auto& basis = *basis_;
        const int d = basis.dimension();
        DualField out(basis_);
        if (n_out == 0) return out;
        std::fill(acc_.begin(), acc_.end(), CVec{});
        std::fill(needed_.begin(), needed_.end(), 0);
        for (std::size_t i = 0; i < n_out; ++i) needed_[basis.mode(i).pair] = 1;

        const SparseSpectrum su = sparse_spectrum(u);
        const SparseSpectrum sw = sparse_spectrum(w);
        const std::complex<double> I(0.0, 1.0);
        for (std::size_t a = 0; a < su.k.size(); ++a) {
            for (std::size_t b = 0; b < sw.k.size(); ++b) {
                IntVec k{};
                for (int j = 0; j < d; ++j) k[j] = su.k[a][j] + sw.k[b][j];
                const LatticeSlot slot = basis.lookup(k);
                if (slot.pair < 0 || !slot.plus || !needed_[slot.pair]) continue;
                std::complex<double> adv = 0.0;
                for (int j = 0; j < d; ++j) adv += su.F[a][j] * sw.kappa[b][j];
                adv *= I;
                CVec& dst = acc_[slot.pair];
                for (int j = 0; j < d; ++j) dst[j] += adv * sw.F[b][j];
            }
        }
        for (std::size_t i = 0; i < n_out; ++i) out[i] = project_plus(basis, acc_, i);
        return out;
    }

    DualField dealiased(const SpectralField& u, const SpectralField& w, std::size_t n_out) {
        const int d = basis_->dimension();
        const PhysicalField pu = eval_physical(u, grid_);
        const auto gw = eval_gradient(w, grid_);
        VectorSpectrum spec(d, basis_->max_wavenumber());
        const std::size_t total = pu.points();
        std::vector<double> comp(total);
        for (int i = 0; i < d; ++i) {
            std::fill(comp.begin(), comp.end(), 0.0);
            for (int j = 0; j < d; ++j)
                for (std::size_t x = 0; x < total; ++x) comp[x] += pu.component[j][x] * gw[j][i][x];
            analyze_into(comp, grid_, i, spec);
        }
        const SpectralField proj = leray_project(basis_, spec);
        DualField out(basis_);
        for (std::size_t i = 0; i < n_out; ++i) out[i] = proj[i];
        return out;
    }

    BasisPtr basis_;
    Strategy strategy_;
    int grid_ = 0;
    std::vector<CVec> acc_;
    std::vector<char> needed_;
};

/// B(u, w) as a functional on the span.
inline DualField bilinear_B(const SpectralField& u, const SpectralField& w, TrilinearWorkspace& ws) {
    return ws.apply(u, w, u.basis().size());
}

/// |B(u, w)|_{V'} / (||u||_V ||w||_V); zero when a factor vanishes.
inline double bilinear_ratio(const DualField& Buw, const SpectralField& u, const SpectralField& w) {
    const double den = norm(u, Space::V) * norm(w, Space::V);
    return den > 0.0 ? norm(Buw, Space::Vdual) / den : 0.0;
}

inline double trilinear_b(const SpectralField& u, const SpectralField& w, const SpectralField& v,
                          TrilinearWorkspace& ws) {
    const std::size_t n = v.support();
    if (n == 0) return 0.0;
    return pair(ws.apply(u, w, n), v);
}

/// theta_n: 1 below level, 0 above level + 1, quintic smoothstep in between.
struct CutoffSpec {
    double level = 1.0;

    double theta(double r) const {
        if (r <= level) return 1.0;
        if (r >= level + 1.0) return 0.0;
        const double t = r - level;
        return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    }
    double theta_derivative(double r) const {
        if (r <= level || r >= level + 1.0) return 0.0;
        const double t = r - level;
        return -30.0 * t * t * (1.0 - t) * (1.0 - t);
    }
};

/// B_n(u) = P_n B(theta_n(|u|_{U'}) u, u).
inline SpectralField truncated_Bn(const SpectralField& u, std::size_t n, const CutoffSpec& cutoff,
                                  TrilinearWorkspace& ws) {
    check_level(u.basis(), n);
    const double th = cutoff.theta(norm(u, Space::Udual));
    SpectralField out(u.basis_ptr());
    if (th == 0.0) return out;
    const DualField b = ws.apply(u, u, n);
    for (std::size_t i = 0; i < n; ++i) out[i] = th * b[i];
    return out;
}

struct LocalLipschitzReport {
    double radius = 0.0;
    double max_ratio = 0.0;       ///< sampled |B(u) - B(v)|_{V'} / ||u - v||_V
    double bilinear_norm = 0.0;   ///< sampled sup |B(x, y)|_{V'} / (||x||_V ||y||_V)
    double certified_bound = 0.0; ///< 2 r ||B||
    std::size_t samples = 0;
    std::size_t skipped = 0;
    std::size_t violations = 0;
};

/// Samples pairs in the V-ball of radius r. The bilinear norm is measured on
/// the same pairs that enter B(u) - B(v) = B(u, u - v) + B(u - v, v), so the
/// certified bound is a consequence of the measured one.
inline LocalLipschitzReport local_lipschitz_B(const BasisPtr& basis, double r, std::size_t samples,
                                              std::uint64_t seed, TrilinearWorkspace& ws, std::size_t modes = 0,
                                              double decay = 1.0) {
    detail::require(samples > 0, "local_lipschitz_B needs at least one sample");
    detail::require(r > 0.0, "radius must be positive");
    const std::size_t n = modes == 0 ? basis->size() : std::min(modes, basis->size());
    const CounterRng rng(seed, 0x4c49505348ull);
    LocalLipschitzReport rep;
    rep.radius = r;
    std::vector<double> ratios;
    ratios.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        const auto draw = static_cast<std::uint32_t>(2 * s);
        SpectralField u = random_field(basis, n, rng, draw, decay);
        SpectralField v = random_field(basis, n, rng, draw + 1, decay);
        u *= r * rng.uniform(draw, 0) / norm(u, Space::V);
        v *= r * rng.uniform(draw + 1, 0) / norm(v, Space::V);
        const SpectralField diff = u - v;
        const double dn = norm(diff, Space::V);
        if (dn == 0.0) {
            ++rep.skipped;
            continue;
        }
        const DualField B1 = ws.apply(u, diff, basis->size());
        const DualField B2 = ws.apply(diff, v, basis->size());
        rep.bilinear_norm = std::max({rep.bilinear_norm, bilinear_ratio(B1, u, diff), bilinear_ratio(B2, diff, v)});
        DualField total = B1;
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += B2[i];
        ratios.push_back(norm(total, Space::Vdual) / dn);
        rep.max_ratio = std::max(rep.max_ratio, ratios.back());
        ++rep.samples;
    }
    rep.certified_bound = 2.0 * r * rep.bilinear_norm;
    for (double q : ratios)
        if (q > rep.certified_bound * (1.0 + 1e-12)) ++rep.violations;
    return rep;
}

} // namespace sns
