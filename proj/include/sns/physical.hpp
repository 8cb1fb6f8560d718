#pragma once

// Uniform-grid transforms backed by FFTW. Grid index order is row major with
// axis 0 slowest; sample (i0, i1[, i2]) sits at x_j = i_j * period_j / G.

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "sns/operators.hpp"

namespace sns {

namespace detail {

class FftPlans {
public:
    static FftPlans& instance() {
        static FftPlans p;
        return p;
    }

    /// Plan for an unaligned, out-of-place c2c transform of shape G^d.
    fftw_plan get(int d, int G, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        const auto key = std::make_tuple(d, G, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::size_t total = 1;
        for (int j = 0; j < d; ++j) total *= static_cast<std::size_t>(G);
        std::vector<std::complex<double>> a(total), b(total);
        int dims[3] = {G, G, G};
        fftw_plan plan = fftw_plan_dft(d, dims, reinterpret_cast<fftw_complex*>(a.data()),
                                       reinterpret_cast<fftw_complex*>(b.data()), sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

private:
    FftPlans() = default;
    ~FftPlans() {
        for (auto& [k, p] : plans_) fftw_destroy_plan(p);
    }
    std::mutex mu_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline std::size_t grid_total(int d, int G) {
    std::size_t t = 1;
    for (int j = 0; j < d; ++j) t *= static_cast<std::size_t>(G);
    return t;
}

inline std::size_t grid_slot(const IntVec& k, int d, int G) {
    std::size_t idx = 0;
    for (int j = 0; j < d; ++j) idx = idx * static_cast<std::size_t>(G) + static_cast<std::size_t>(((k[j] % G) + G) % G);
    return idx;
}

} // namespace detail

/// Real vector field sampled on a uniform grid.
struct PhysicalField {
    int dimension = 2;
    int grid = 0;
    std::array<std::vector<double>, 3> component;

    std::size_t points() const { return detail::grid_total(dimension, grid); }
};

/// Samples of sum_k F(k) exp(i kappa . x) for one scalar component.
inline std::vector<double> synthesize(const VectorSpectrum& spec, int component, int G) {
    const int d = spec.dimension();
    const std::size_t total = detail::grid_total(d, G);
    std::vector<std::complex<double>> in(total), out(total);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const auto c = spec[i][component];
        if (c == 0.0) continue;
        const IntVec k = spec.wavevector(i);
        in[detail::grid_slot(k, d, G)] += c;
    }
    fftw_execute_dft(detail::FftPlans::instance().get(d, G, FFTW_BACKWARD), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    std::vector<double> r(total);
    for (std::size_t i = 0; i < total; ++i) r[i] = out[i].real();
    return r;
}

/// Adds the Fourier coefficients (wave vectors within spec's box) of the grid
/// samples to component `component` of spec.
inline void analyze_into(const std::vector<double>& samples, int G, int component, VectorSpectrum& spec) {
    const int d = spec.dimension();
    const std::size_t total = detail::grid_total(d, G);
    std::vector<std::complex<double>> in(samples.begin(), samples.end()), out(total);
    fftw_execute_dft(detail::FftPlans::instance().get(d, G, FFTW_FORWARD), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double inv = 1.0 / static_cast<double>(total);
    const int r = std::min(spec.radius(), (G - 1) / 2);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const IntVec k = spec.wavevector(i);
        bool inside = true;
        for (int j = 0; j < d; ++j) inside = inside && std::abs(k[j]) <= r;
        if (inside) spec[i][component] += out[detail::grid_slot(k, d, G)] * inv;
    }
}

/// eval_physical: the real field on a G^d grid.
inline PhysicalField eval_physical(const SpectralField& u, int G) {
    const auto& basis = u.basis();
    detail::require(G >= 2 * basis.max_wavenumber() + 1, "grid too coarse for the mode set");
    const VectorSpectrum spec = to_lattice(u, basis.max_wavenumber());
    PhysicalField out;
    out.dimension = basis.dimension();
    out.grid = G;
    for (int j = 0; j < out.dimension; ++j) out.component[j] = synthesize(spec, j, G);
    return out;
}

/// Samples of the gradient: grad[j][i] = d u_i / d x_j.
inline std::array<std::array<std::vector<double>, 3>, 3> eval_gradient(const SpectralField& u, int G) {
    const auto& basis = u.basis();
    const int d = basis.dimension();
    const VectorSpectrum spec = to_lattice(u, basis.max_wavenumber());
    std::array<std::array<std::vector<double>, 3>, 3> grad;
    const auto& period = basis.domain().period;
    for (int j = 0; j < d; ++j) {
        VectorSpectrum dj(d, spec.radius());
        for (std::size_t idx = 0; idx < spec.size(); ++idx) {
            const IntVec k = spec.wavevector(idx);
            const std::complex<double> f(0.0, 2.0 * std::numbers::pi * k[j] / period[j]);
            for (int i = 0; i < d; ++i) dj[idx][i] = f * spec[idx][i];
        }
        for (int i = 0; i < d; ++i) grad[j][i] = synthesize(dj, i, G);
    }
    return grad;
}

/// Smallest grid on which products of `factors` fields of degree K are
/// integrated exactly.
inline int exact_quadrature_grid(int K, int factors) { return factors * K + 1; }

} // namespace sns
