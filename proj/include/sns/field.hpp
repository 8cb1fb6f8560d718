#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "sns/basis.hpp"

namespace sns {

/// Divergence-free velocity field: real coefficients over the orthonormal
/// basis of ModeBasis. Coefficient i multiplies basis element e_i.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(BasisPtr basis) : basis_(std::move(basis)), c_(basis_->size(), 0.0) {}
    SpectralField(BasisPtr basis, std::vector<double> coeffs) : basis_(std::move(basis)), c_(std::move(coeffs)) {
        detail::require(c_.size() == basis_->size(), "coefficient count does not match the basis");
    }

    static SpectralField unit(BasisPtr basis, std::size_t i) {
        SpectralField f(std::move(basis));
        f.c_.at(i) = 1.0;
        return f;
    }

    const ModeBasis& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    std::size_t size() const noexcept { return c_.size(); }
    bool empty() const noexcept { return !basis_; }

    double operator[](std::size_t i) const { return c_[i]; }
    double& operator[](std::size_t i) { return c_[i]; }
    std::span<const double> coeffs() const noexcept { return c_; }
    std::span<double> coeffs() noexcept { return c_; }

    /// Number of leading coefficients up to the last nonzero one.
    std::size_t support() const {
        std::size_t n = c_.size();
        while (n > 0 && c_[n - 1] == 0.0) --n;
        return n;
    }

    /// Complex Fourier amplitude of mode i: (a - ib)/2 at k+ and (a + ib)/2 at
    /// -k+, where a, b are the cosine and sine coefficients of the pair.
    std::complex<double> amplitude(std::size_t i) const {
        const auto& m = basis_->mode(i);
        const double a = m.kind == ModeKind::Cosine ? c_[i] : c_[m.partner];
        const double b = m.kind == ModeKind::Cosine ? c_[m.partner] : c_[i];
        return m.kind == ModeKind::Cosine ? std::complex<double>(a / 2.0, -b / 2.0)
                                          : std::complex<double>(a / 2.0, b / 2.0);
    }

    static SpectralField from_amplitudes(BasisPtr basis, std::span<const std::complex<double>> amps) {
        detail::require(amps.size() == basis->size(), "amplitude count does not match the basis");
        SpectralField f(basis);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const auto& m = basis->mode(i);
            if (m.kind == ModeKind::Cosine) {
                f.c_[i] = 2.0 * amps[i].real();
                f.c_[m.partner] = -2.0 * amps[i].imag();
            }
        }
        return f;
    }

    SpectralField& operator+=(const SpectralField& o) {
        check_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    SpectralField& operator*=(double a) {
        for (auto& x : c_) x *= a;
        return *this;
    }
    /// this += a * o
    SpectralField& axpy(double a, const SpectralField& o) {
        check_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += a * o.c_[i];
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    bool all_finite() const {
        for (double x : c_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    friend bool operator==(const SpectralField& a, const SpectralField& b) { return a.c_ == b.c_; }

    void check_same(const SpectralField& o) const {
        detail::require(basis_ && o.basis_ && same_basis(*basis_, *o.basis_), "fields live on different domains");
    }

private:
    BasisPtr basis_;
    std::vector<double> c_;
};

/// A functional on the span, stored through its values <u*, e_i>. Elements
/// of H, V', V_s' and U' restricted to the span all have this form.
class DualField {
public:
    DualField() = default;
    explicit DualField(BasisPtr basis) : basis_(std::move(basis)), c_(basis_->size(), 0.0) {}
    DualField(BasisPtr basis, std::vector<double> values) : basis_(std::move(basis)), c_(std::move(values)) {
        detail::require(c_.size() == basis_->size(), "functional size does not match the basis");
    }
    /// The functional v -> (u|v)_H.
    static DualField riesz(const SpectralField& u) {
        return DualField(u.basis_ptr(), std::vector<double>(u.coeffs().begin(), u.coeffs().end()));
    }

    const ModeBasis& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    std::size_t size() const noexcept { return c_.size(); }
    double operator[](std::size_t i) const { return c_[i]; }
    double& operator[](std::size_t i) { return c_[i]; }
    std::span<const double> values() const noexcept { return c_; }

    DualField& operator-=(const DualField& o) {
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    friend DualField operator-(DualField a, const DualField& b) { return a -= b; }

private:
    BasisPtr basis_;
    std::vector<double> c_;
};

inline double weighted_sum_sq(const ModeBasis& basis, Space space, std::span<const double> c) {
    const auto& w = basis.weights(space);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] != 0.0) s += w[i] * c[i] * c[i];
    return s;
}

/// Norm of u in the given space of the tower. Dual spaces use reciprocal
/// weights, which is the Riesz representation on the span.
inline double norm(const SpectralField& u, Space space) {
    return std::sqrt(weighted_sum_sq(u.basis(), space, u.coeffs()));
}

inline double norm_sq(const SpectralField& u, Space space) { return weighted_sum_sq(u.basis(), space, u.coeffs()); }

/// Dual norm of a functional; space must be one of Vdual, Vsdual, Udual, H.
inline double norm(const DualField& f, Space space) {
    detail::require(space == Space::H || space == Space::Vdual || space == Space::Vsdual || space == Space::Udual,
                    "functionals are measured in H or a dual space");
    return std::sqrt(weighted_sum_sq(f.basis(), space, f.values()));
}

inline double inner(const SpectralField& u, const SpectralField& v, Space space) {
    u.check_same(v);
    const auto& w = u.basis().weights(space);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * u[i] * v[i];
    return s;
}

/// Dual pairing <f, v>.
inline double pair(const DualField& f, const SpectralField& v) {
    detail::require(same_basis(f.basis(), v.basis()), "functional and field live on different domains");
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += f[i] * v[i];
    return s;
}

} // namespace sns
