#pragma once

// Periodic divergence-free Fourier basis and the weighted norm tower.
//
// Every basis element is real: for a representative wave vector k+ (first
// nonzero component positive) and polarization p,
//
//   e(k+, p, cos)(x) = N eps(k+, p) cos(kappa+ . x)
//   e(-k+, p, sin)(x) = N eps(k+, p) sin(kappa+ . x)
//
// with N = sqrt(2 / |Omega|) and kappa+ = 2 pi k+ / period. The system is
// orthonormal in L2 and consists of eigenfunctions of every operator in
// operators.hpp.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "sns/error.hpp"

namespace sns {

using IntVec = std::array<int, 3>;
using RealVec = std::array<double, 3>;

struct TorusDomain {
    int dimension = 2;
    RealVec period{2.0 * std::numbers::pi, 2.0 * std::numbers::pi, 2.0 * std::numbers::pi};
    int max_wavenumber = 8;

    void validate() const {
        detail::require(dimension == 2 || dimension == 3, "domain.d must be 2 or 3");
        detail::require(max_wavenumber >= 1, "domain.K must be >= 1");
        for (int j = 0; j < dimension; ++j)
            detail::require(period[j] > 0.0 && std::isfinite(period[j]), "domain.period must be positive");
    }

    double volume() const {
        double v = 1.0;
        for (int j = 0; j < dimension; ++j) v *= period[j];
        return v;
    }

    friend bool operator==(const TorusDomain&, const TorusDomain&) = default;
};

/// Smoothness indices of the V_s and U spaces.
struct SpaceScale {
    double s = 2.5;
    double s_U = 4.5;

    static SpaceScale defaults(int dimension) {
        SpaceScale sc;
        sc.s = dimension / 2.0 + 1.5;
        sc.s_U = sc.s + 2.0;
        return sc;
    }

    void validate(int dimension) const {
        detail::require(s > dimension / 2.0 + 1.0, "scale.s must exceed d/2 + 1");
        detail::require(s_U > s, "scale.s_U must exceed scale.s");
    }

    friend bool operator==(const SpaceScale&, const SpaceScale&) = default;
};

enum class Space { H, D, V, Vs, U, Vdual, Vsdual, Udual };

inline const char* to_string(Space s) {
    switch (s) {
    case Space::H: return "H";
    case Space::D: return "D";
    case Space::V: return "V";
    case Space::Vs: return "V_s";
    case Space::U: return "U";
    case Space::Vdual: return "V_dual";
    case Space::Vsdual: return "V_s_dual";
    case Space::Udual: return "U_dual";
    }
    return "?";
}

enum class ModeKind { Cosine, Sine };

struct WaveMode {
    IntVec k{};          ///< integer wave vector (unused trailing entries are 0)
    int polarization = 0;
    RealVec eps{};       ///< unit polarization, orthogonal to k
    std::size_t mode_id = 0;
    ModeKind kind = ModeKind::Cosine;
    std::size_t pair = 0;     ///< index into ModeBasis::pairs()
    std::size_t partner = 0;  ///< mode with the same pair/polarization and the other kind
    RealVec kappa{};          ///< physical wave vector 2 pi k / period
    double k2 = 0.0;          ///< |kappa|^2, the Dirichlet multiplier
    int k2_lattice = 0;       ///< integer |k|^2 used for ordering ties
    double lambda = 0.0;      ///< eigenvalue of L, equal to the U weight
};

/// A representative wave vector k+ together with the modes built on it.
struct ModePair {
    IntVec k{};
    RealVec kappa{};
    std::array<RealVec, 2> eps{};
    std::array<std::size_t, 2> cos_mode{};
    std::array<std::size_t, 2> sin_mode{};
};

/// Slot of an integer wave vector in the lattice lookup.
struct LatticeSlot {
    int pair = -1;      ///< -1 when k is not a basis wave vector
    bool plus = true;   ///< k == k+ (otherwise k == -k+)
};

class ModeBasis {
public:
    static std::shared_ptr<const ModeBasis> create(const TorusDomain& domain, SpaceScale scale) {
        domain.validate();
        scale.validate(domain.dimension);
        return std::shared_ptr<const ModeBasis>(new ModeBasis(domain, scale));
    }

    static std::shared_ptr<const ModeBasis> create(const TorusDomain& domain) {
        return create(domain, SpaceScale::defaults(domain.dimension));
    }

    const TorusDomain& domain() const noexcept { return domain_; }
    const SpaceScale& scale() const noexcept { return scale_; }
    int dimension() const noexcept { return domain_.dimension; }
    int max_wavenumber() const noexcept { return domain_.max_wavenumber; }
    std::size_t size() const noexcept { return modes_.size(); }
    const std::vector<WaveMode>& modes() const noexcept { return modes_; }
    const WaveMode& mode(std::size_t i) const { return modes_.at(i); }
    const std::vector<ModePair>& pairs() const noexcept { return pairs_; }
    int polarizations() const noexcept { return domain_.dimension - 1; }

    /// L2 normalization of the real basis functions.
    double norm_factor() const noexcept { return norm_factor_; }

    double weight(Space space, std::size_t i) const { return weights_[static_cast<std::size_t>(space)][i]; }
    const std::vector<double>& weights(Space space) const { return weights_[static_cast<std::size_t>(space)]; }

    /// Lookup for any integer vector with |k_j| <= 2K; vectors outside that box
    /// or outside the basis return pair = -1.
    LatticeSlot lookup(const IntVec& k) const {
        const int box = 2 * domain_.max_wavenumber;
        std::size_t idx = 0;
        for (int j = domain_.dimension - 1; j >= 0; --j) {
            if (k[j] < -box || k[j] > box) return {};
            idx = idx * static_cast<std::size_t>(2 * box + 1) + static_cast<std::size_t>(k[j] + box);
        }
        const int v = lattice_[idx];
        if (v == 0) return {};
        return {std::abs(v) - 1, v > 0};
    }

    /// Largest Dirichlet multiplier among the first n modes.
    double max_k2(std::size_t n) const {
        double m = 0.0;
        for (std::size_t i = 0; i < std::min(n, size()); ++i) m = std::max(m, modes_[i].k2);
        return m;
    }

    friend bool same_basis(const ModeBasis& a, const ModeBasis& b) {
        return &a == &b || (a.domain_ == b.domain_ && a.scale_ == b.scale_);
    }

private:
    ModeBasis(const TorusDomain& domain, SpaceScale scale) : domain_(domain), scale_(scale) {
        const int d = domain.dimension;
        const int K = domain.max_wavenumber;
        norm_factor_ = std::sqrt(2.0 / domain.volume());

        struct Raw {
            WaveMode m;
            IntVec plus_k;
        };
        std::vector<Raw> raw;
        IntVec k{};
        const int span = 2 * K + 1;
        const int total = d == 2 ? span * span : span * span * span;
        for (int idx = 0; idx < total; ++idx) {
            int rem = idx;
            for (int j = 0; j < d; ++j) {
                k[j] = rem % span - K;
                rem /= span;
            }
            bool zero = true;
            bool plus = false;
            for (int j = 0; j < d; ++j) {
                if (k[j] != 0) {
                    if (zero) plus = k[j] > 0;
                    zero = false;
                }
            }
            if (zero) continue;
            IntVec kp = k;
            if (!plus)
                for (int j = 0; j < d; ++j) kp[j] = -k[j];
            const auto eps = polarizations_of(kp, d);
            for (int p = 0; p < d - 1; ++p) {
                Raw r;
                r.m.k = k;
                r.m.polarization = p;
                r.m.eps = eps[p];
                r.m.kind = plus ? ModeKind::Cosine : ModeKind::Sine;
                double k2 = 0.0;
                int k2l = 0;
                for (int j = 0; j < d; ++j) {
                    r.m.kappa[j] = 2.0 * std::numbers::pi * k[j] / domain.period[j];
                    k2 += r.m.kappa[j] * r.m.kappa[j];
                    k2l += k[j] * k[j];
                }
                r.m.k2 = k2;
                r.m.k2_lattice = k2l;
                r.m.lambda = std::pow(1.0 + k2, scale.s_U);
                r.plus_k = kp;
                raw.push_back(r);
            }
        }
        std::sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) {
            if (a.m.lambda != b.m.lambda) return a.m.lambda < b.m.lambda;
            if (a.m.k2_lattice != b.m.k2_lattice) return a.m.k2_lattice < b.m.k2_lattice;
            if (a.m.k != b.m.k) return a.m.k < b.m.k;
            return a.m.polarization < b.m.polarization;
        });

        const int box = 2 * K;
        const std::size_t box_span = static_cast<std::size_t>(2 * box + 1);
        lattice_.assign(d == 2 ? box_span * box_span : box_span * box_span * box_span, 0);
        auto lattice_index = [&](const IntVec& v) {
            std::size_t idx = 0;
            for (int j = d - 1; j >= 0; --j) idx = idx * box_span + static_cast<std::size_t>(v[j] + box);
            return idx;
        };

        modes_.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            WaveMode m = raw[i].m;
            m.mode_id = i;
            const std::size_t lidx = lattice_index(raw[i].plus_k);
            int slot = lattice_[lidx];
            if (slot == 0) {
                ModePair pr;
                pr.k = raw[i].plus_k;
                for (int j = 0; j < d; ++j) pr.kappa[j] = 2.0 * std::numbers::pi * pr.k[j] / domain.period[j];
                pr.eps = polarizations_of(pr.k, d);
                pairs_.push_back(pr);
                slot = static_cast<int>(pairs_.size());
                lattice_[lidx] = slot;
                IntVec neg{};
                for (int j = 0; j < d; ++j) neg[j] = -pr.k[j];
                lattice_[lattice_index(neg)] = -slot;
            }
            m.pair = static_cast<std::size_t>(slot - 1);
            auto& pr = pairs_[m.pair];
            if (m.kind == ModeKind::Cosine)
                pr.cos_mode[m.polarization] = i;
            else
                pr.sin_mode[m.polarization] = i;
            modes_.push_back(m);
        }
        for (auto& m : modes_) {
            const auto& pr = pairs_[m.pair];
            m.partner = m.kind == ModeKind::Cosine ? pr.sin_mode[m.polarization] : pr.cos_mode[m.polarization];
        }

        constexpr std::size_t n_spaces = 8;
        weights_.assign(n_spaces, std::vector<double>(modes_.size()));
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            const double k2 = modes_[i].k2;
            const double v = 1.0 + k2;
            const double vs = std::pow(v, scale.s);
            const double u = modes_[i].lambda;
            weights_[static_cast<std::size_t>(Space::H)][i] = 1.0;
            weights_[static_cast<std::size_t>(Space::D)][i] = k2;
            weights_[static_cast<std::size_t>(Space::V)][i] = v;
            weights_[static_cast<std::size_t>(Space::Vs)][i] = vs;
            weights_[static_cast<std::size_t>(Space::U)][i] = u;
            weights_[static_cast<std::size_t>(Space::Vdual)][i] = 1.0 / v;
            weights_[static_cast<std::size_t>(Space::Vsdual)][i] = 1.0 / vs;
            weights_[static_cast<std::size_t>(Space::Udual)][i] = 1.0 / u;
        }
    }

    static std::array<RealVec, 2> polarizations_of(const IntVec& k, int d) {
        std::array<RealVec, 2> out{};
        double kn = 0.0;
        for (int j = 0; j < d; ++j) kn += double(k[j]) * k[j];
        kn = std::sqrt(kn);
        if (d == 2) {
            out[0] = {-k[1] / kn, k[0] / kn, 0.0};
            return out;
        }
        const RealVec kh{k[0] / kn, k[1] / kn, k[2] / kn};
        int axis = 0;
        for (int j = 1; j < 3; ++j)
            if (std::abs(k[j]) < std::abs(k[axis])) axis = j;
        RealVec ea{};
        ea[axis] = 1.0;
        RealVec e1 = cross(kh, ea);
        const double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
        for (auto& c : e1) c /= n1;
        RealVec e2 = cross(kh, e1);
        const double n2 = std::sqrt(e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]);
        for (auto& c : e2) c /= n2;
        out[0] = e1;
        out[1] = e2;
        return out;
    }

    static RealVec cross(const RealVec& a, const RealVec& b) {
        return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    }

    TorusDomain domain_;
    SpaceScale scale_;
    double norm_factor_ = 0.0;
    std::vector<WaveMode> modes_;
    std::vector<ModePair> pairs_;
    std::vector<int> lattice_;
    std::vector<std::vector<double>> weights_;
};

using BasisPtr = std::shared_ptr<const ModeBasis>;

/// enumerate_modes: the ordered mode table of the domain.
inline std::vector<WaveMode> enumerate_modes(const TorusDomain& domain, SpaceScale scale) {
    return ModeBasis::create(domain, scale)->modes();
}

} // namespace sns
