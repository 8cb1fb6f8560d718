#pragma once

// Diagonal operators, the Galerkin projection and the Leray projection.

#include <cmath>
#include <complex>
#include <vector>

#include "sns/field.hpp"

namespace sns {

enum class Operator { Acal, A, L, As, Ls };

inline double multiplier(const ModeBasis& basis, Operator op, std::size_t i) {
    const auto& m = basis.mode(i);
    switch (op) {
    case Operator::Acal: return m.k2;
    case Operator::A: return 1.0 + m.k2;
    case Operator::L: return m.lambda;
    case Operator::As: return std::pow(1.0 + m.k2, basis.scale().s - 1.0);
    case Operator::Ls: return std::pow(1.0 + m.k2, basis.scale().s_U - basis.scale().s);
    }
    return 0.0;
}

inline SpectralField apply_operator(const SpectralField& u, Operator op) {
    SpectralField out(u.basis_ptr());
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] != 0.0) out[i] = multiplier(u.basis(), op, i) * u[i];
    return out;
}

inline void check_level(const ModeBasis& basis, std::size_t n) {
    detail::require(n >= 1 && n <= basis.size(), "Galerkin level n must lie in [1, mode count]");
}

/// P_n u: keeps the first n coefficients.
inline SpectralField project_Pn(const SpectralField& u, std::size_t n) {
    check_level(u.basis(), n);
    SpectralField out(u.basis_ptr());
    for (std::size_t i = 0; i < n; ++i) out[i] = u[i];
    return out;
}

/// P_n u* = sum_{i<=n} <u*, e_i> e_i.
inline SpectralField project_Pn(const DualField& f, std::size_t n) {
    check_level(f.basis(), n);
    SpectralField out(f.basis_ptr());
    for (std::size_t i = 0; i < n; ++i) out[i] = f[i];
    return out;
}

/// In-place truncation, used inside integrators.
inline void truncate_to(SpectralField& u, std::size_t n) {
    for (std::size_t i = n; i < u.size(); ++i) u[i] = 0.0;
}

using CVec = std::array<std::complex<double>, 3>;

/// Complex vector Fourier coefficients F(k) of a (not necessarily
/// solenoidal) vector field sum_k F(k) exp(i kappa . x), stored densely on
/// the box |k_j| <= radius.
class VectorSpectrum {
public:
    VectorSpectrum(int dimension, int radius) : d_(dimension), radius_(radius), span_(2 * radius + 1) {
        std::size_t total = 1;
        for (int j = 0; j < d_; ++j) total *= static_cast<std::size_t>(span_);
        data_.assign(total, CVec{});
    }

    int dimension() const noexcept { return d_; }
    int radius() const noexcept { return radius_; }

    bool contains(const IntVec& k) const {
        for (int j = 0; j < d_; ++j)
            if (k[j] < -radius_ || k[j] > radius_) return false;
        return true;
    }
    std::size_t index(const IntVec& k) const {
        std::size_t idx = 0;
        for (int j = d_ - 1; j >= 0; --j) idx = idx * static_cast<std::size_t>(span_) + static_cast<std::size_t>(k[j] + radius_);
        return idx;
    }
    IntVec wavevector(std::size_t idx) const {
        IntVec k{};
        for (int j = 0; j < d_; ++j) {
            k[j] = static_cast<int>(idx % static_cast<std::size_t>(span_)) - radius_;
            idx /= static_cast<std::size_t>(span_);
        }
        return k;
    }
    CVec& at(const IntVec& k) { return data_[index(k)]; }
    const CVec& at(const IntVec& k) const { return data_[index(k)]; }
    CVec get(const IntVec& k) const { return contains(k) ? data_[index(k)] : CVec{}; }
    std::size_t size() const noexcept { return data_.size(); }
    CVec& operator[](std::size_t i) { return data_[i]; }
    const CVec& operator[](std::size_t i) const { return data_[i]; }

private:
    int d_;
    int radius_;
    int span_;
    std::vector<CVec> data_;
};

/// Fourier coefficients of the real field represented by u.
inline VectorSpectrum to_lattice(const SpectralField& u, int radius) {
    const auto& basis = u.basis();
    VectorSpectrum out(basis.dimension(), std::max(radius, basis.max_wavenumber()));
    const double N = basis.norm_factor();
    for (const auto& pr : basis.pairs()) {
        IntVec neg{};
        for (int j = 0; j < basis.dimension(); ++j) neg[j] = -pr.k[j];
        CVec& plus = out.at(pr.k);
        CVec& minus = out.at(neg);
        for (int p = 0; p < basis.polarizations(); ++p) {
            const double a = u[pr.cos_mode[p]];
            const double b = u[pr.sin_mode[p]];
            if (a == 0.0 && b == 0.0) continue;
            const std::complex<double> hp(a / 2.0, -b / 2.0);
            for (int j = 0; j < basis.dimension(); ++j) {
                plus[j] += N * pr.eps[p][j] * hp;
                minus[j] += N * pr.eps[p][j] * std::conj(hp);
            }
        }
    }
    return out;
}

/// Projects a vector spectrum onto the divergence-free basis. The value for
/// mode i is the L2 inner product of the field with e_i, which removes the
/// k-parallel part and discards wave vectors outside the basis.
inline SpectralField leray_project(const BasisPtr& basis, const VectorSpectrum& raw) {
    SpectralField out(basis);
    const double scale = basis->norm_factor() * basis->domain().volume() / 2.0;
    const int d = basis->dimension();
    for (const auto& pr : basis->pairs()) {
        IntVec neg{};
        for (int j = 0; j < d; ++j) neg[j] = -pr.k[j];
        const CVec fp = raw.get(pr.k);
        const CVec fm = raw.get(neg);
        for (int p = 0; p < basis->polarizations(); ++p) {
            std::complex<double> sp = 0.0, sm = 0.0;
            for (int j = 0; j < d; ++j) {
                sp += pr.eps[p][j] * fp[j];
                sm += pr.eps[p][j] * fm[j];
            }
            // cos: (F(k+) + F(-k+)) / 2, sin: (F(-k+) - F(k+)) / (2i)
            out[pr.cos_mode[p]] = scale * (sp + sm).real();
            out[pr.sin_mode[p]] = scale * ((sm - sp) / std::complex<double>(0.0, 1.0)).real();
        }
    }
    return out;
}

/// Inner product of a real field with e_i, given the field's Fourier
/// coefficients at the k+ representatives indexed by pair.
inline double project_plus(const ModeBasis& basis, const std::vector<CVec>& plus, std::size_t i) {
    const auto& m = basis.mode(i);
    const CVec& f = plus[m.pair];
    std::complex<double> s = 0.0;
    for (int j = 0; j < basis.dimension(); ++j) s += m.eps[j] * f[j];
    const double scale = basis.norm_factor() * basis.domain().volume();
    return m.kind == ModeKind::Cosine ? scale * s.real() : -scale * s.imag();
}

} // namespace sns
