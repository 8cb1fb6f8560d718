#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "sns/physical.hpp"
#include "sns/random.hpp"

using namespace sns;

namespace {

BasisPtr basis2(int K = 8) {
    TorusDomain d;
    d.max_wavenumber = K;
    return ModeBasis::create(d);
}

SpectralField rnd(const BasisPtr& b, std::uint32_t draw, double decay = 0.0) {
    return random_field(b, b->size(), CounterRng(11, 3), draw, decay);
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

} // namespace

TEST(Modes, CountsInTwoAndThreeDimensions) {
    // The box |k_j| <= 1 holds the four axis vectors and the four diagonals.
    const auto b2 = basis2(1);
    EXPECT_EQ(b2->size(), 8u);
    EXPECT_EQ(b2->pairs().size(), 4u);
    for (IntVec k : {IntVec{1, 0, 0}, IntVec{-1, 0, 0}, IntVec{0, 1, 0}, IntVec{0, -1, 0}})
        EXPECT_GE(b2->lookup(k).pair, 0);
    TorusDomain d3;
    d3.dimension = 3;
    d3.max_wavenumber = 1;
    const auto b3 = ModeBasis::create(d3);
    EXPECT_EQ(b3->size(), 52u);
    std::set<IntVec> ks;
    for (const auto& m : b3->modes()) ks.insert(m.k);
    EXPECT_EQ(ks.size(), 26u);
}

TEST(Modes, FirstModeFollowsLexicographicTieBreak) {
    TorusDomain d;
    d.max_wavenumber = 2;
    const auto b = ModeBasis::create(d, SpaceScale{2.5, 4.0});
    EXPECT_EQ(b->mode(0).k, (IntVec{-1, 0, 0}));
    EXPECT_EQ(b->mode(1).k, (IntVec{0, -1, 0}));
    for (std::size_t i = 1; i < b->size(); ++i) EXPECT_LE(b->mode(i - 1).lambda, b->mode(i).lambda);
}

TEST(Modes, PolarizationsAreOrthonormalAndTransverse) {
    TorusDomain d3;
    d3.dimension = 3;
    d3.max_wavenumber = 3;
    for (const auto& b : {basis2(5), ModeBasis::create(d3)}) {
        for (const auto& pr : b->pairs()) {
            for (int p = 0; p < b->polarizations(); ++p) {
                double kd = 0.0, nn = 0.0, cross = 0.0;
                for (int j = 0; j < 3; ++j) {
                    kd += pr.k[j] * pr.eps[p][j];
                    nn += pr.eps[p][j] * pr.eps[p][j];
                    if (b->polarizations() == 2) cross += pr.eps[0][j] * pr.eps[1][j];
                }
                EXPECT_NEAR(kd, 0.0, 1e-14);
                EXPECT_NEAR(nn, 1.0, 1e-14);
                EXPECT_NEAR(cross, 0.0, 1e-14);
            }
        }
    }
}

TEST(Modes, EnumerationIsDeterministic) {
    const auto a = enumerate_modes(TorusDomain{}, SpaceScale{});
    const auto b = enumerate_modes(TorusDomain{}, SpaceScale{});
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].k, b[i].k);
        EXPECT_EQ(a[i].mode_id, i);
    }
}

TEST(Norms, ZeroAndSingleMode) {
    const auto b = basis2();
    const SpectralField z(b);
    for (Space s : {Space::H, Space::D, Space::V, Space::Vs, Space::U, Space::Udual}) EXPECT_EQ(norm(z, s), 0.0);
    const auto e = SpectralField::unit(b, 0);
    EXPECT_DOUBLE_EQ(norm(e, Space::H), 1.0);
    EXPECT_DOUBLE_EQ(norm(e, Space::D), 1.0);
    EXPECT_DOUBLE_EQ(norm(e, Space::V), std::sqrt(2.0));
}

TEST(Norms, VIsHPlusDirichlet) {
    const auto b = basis2();
    for (std::uint32_t s = 0; s < 20; ++s) {
        const auto u = rnd(b, s, 1.0), v = rnd(b, s + 100, 1.0);
        EXPECT_LT(rel(norm_sq(u, Space::V), norm_sq(u, Space::H) + norm_sq(u, Space::D)), 1e-14);
        EXPECT_NEAR(inner(u, v, Space::V) - inner(u, v, Space::H) - inner(u, v, Space::D), 0.0,
                    1e-12 * norm(u, Space::V) * norm(v, Space::V));
    }
}

TEST(Norms, BasisIsOrthonormalAndUWeightsAreEigenvalues) {
    const auto b = basis2(3);
    for (std::size_t i = 0; i < b->size(); ++i)
        for (std::size_t j = 0; j < b->size(); ++j) {
            const auto ei = SpectralField::unit(b, i), ej = SpectralField::unit(b, j);
            EXPECT_EQ(inner(ei, ej, Space::H), i == j ? 1.0 : 0.0);
            EXPECT_EQ(inner(ei, ej, Space::U), i == j ? b->mode(i).lambda : 0.0);
        }
}

TEST(Norms, TowerIsNested) {
    const auto b = basis2();
    for (std::uint32_t s = 0; s < 20; ++s) {
        const auto u = rnd(b, s);
        EXPECT_LE(norm(u, Space::Udual), norm(u, Space::Vdual));
        EXPECT_LE(norm(u, Space::Vdual), norm(u, Space::H));
        EXPECT_LE(norm(u, Space::H), norm(u, Space::V));
        EXPECT_LE(norm(u, Space::V), norm(u, Space::Vs));
        EXPECT_LE(norm(u, Space::Vs), norm(u, Space::U));
    }
}

TEST(Operators, Multipliers) {
    const auto b = basis2();
    for (std::size_t i = 0; i < b->size(); ++i) {
        const auto& m = b->mode(i);
        if (std::abs(m.k[0]) == 1 && std::abs(m.k[1]) == 1) {
            EXPECT_DOUBLE_EQ(multiplier(*b, Operator::A, i), 3.0);
        }
        const double prod = multiplier(*b, Operator::A, i) * multiplier(*b, Operator::As, i) * multiplier(*b, Operator::Ls, i);
        EXPECT_LT(rel(prod, multiplier(*b, Operator::L, i)), 1e-13);
    }
}

TEST(Operators, DualityIdentities) {
    const auto b = basis2();
    for (std::uint32_t s = 0; s < 20; ++s) {
        const auto u = rnd(b, s, 2.0), v = rnd(b, s + 50, 2.0);
        EXPECT_LT(rel(inner(apply_operator(u, Operator::A), v, Space::H), inner(u, v, Space::V)), 1e-12);
        EXPECT_LT(rel(inner(apply_operator(u, Operator::L), v, Space::H), inner(u, v, Space::U)), 1e-12);
        const auto lhs = apply_operator(u, Operator::A) - u;
        const auto rhs = apply_operator(u, Operator::Acal);
        for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-12 * std::abs(rhs[i]) + 1e-15);
        const DualField Au = DualField::riesz(apply_operator(u, Operator::Acal));
        EXPECT_LE(norm(Au, Space::Vdual), norm(u, Space::D) * (1.0 + 1e-14));
    }
}

TEST(Projection, BasicProperties) {
    const auto b = basis2();
    const std::size_t n = 20;
    EXPECT_THROW(project_Pn(SpectralField(b), 0), std::invalid_argument);
    EXPECT_THROW(project_Pn(SpectralField(b), b->size() + 1), std::invalid_argument);
    EXPECT_EQ(project_Pn(SpectralField::unit(b, 3), n), SpectralField::unit(b, 3));
    EXPECT_EQ(project_Pn(SpectralField::unit(b, n), n), SpectralField(b));
    for (std::uint32_t s = 0; s < 10; ++s) {
        const auto u = rnd(b, s, 3.0);
        EXPECT_LE(norm(project_Pn(u, n), Space::H), norm(u, Space::H));
        EXPECT_LE(norm(project_Pn(u, n), Space::U), norm(u, Space::U));
    }
}

TEST(Projection, DualityWithFunctionals) {
    const auto b = basis2();
    for (std::uint32_t s = 0; s < 20; ++s) {
        const auto w = rnd(b, s);
        const DualField f(b, std::vector<double>(w.coeffs().begin(), w.coeffs().end()));
        const auto v = rnd(b, s + 30);
        for (std::size_t n : {1u, 7u, 40u, 288u}) {
            const double lhs = inner(project_Pn(f, n), v, Space::H);
            const double rhs = pair(f, project_Pn(v, n));
            EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(lhs) + 1.0));
        }
    }
}

TEST(Projection, ConvergesMonotonicallyInU) {
    const auto b = basis2();
    const auto u = rnd(b, 5, 6.0);
    double prev = INFINITY;
    for (std::size_t n = 1; n <= b->size(); ++n) {
        const double e = norm(project_Pn(u, n) - u, Space::U);
        EXPECT_LE(e, prev);
        prev = e;
    }
    EXPECT_EQ(prev, 0.0);
}

TEST(Amplitudes, RoundTrip) {
    const auto b = basis2();
    const auto u = rnd(b, 9);
    std::vector<std::complex<double>> amps(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) amps[i] = u.amplitude(i);
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(amps[i], std::conj(amps[b->mode(i).partner]));
    EXPECT_EQ(SpectralField::from_amplitudes(b, amps), u);
}

TEST(Leray, RemovesGradientsAndKeepsSolenoidalParts) {
    const auto b = basis2();
    VectorSpectrum grad(2, 8), sol(2, 8);
    grad.at({1, 0, 0})[0] = 1.0;
    grad.at({-1, 0, 0})[0] = 1.0;
    EXPECT_EQ(norm(leray_project(b, grad), Space::H), 0.0);
    sol.at({1, 0, 0})[1] = 1.0;
    sol.at({-1, 0, 0})[1] = 1.0;
    const auto p = leray_project(b, sol);
    const auto back = to_lattice(p, 8);
    EXPECT_NEAR(back.at({1, 0, 0})[1].real(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(back.at({1, 0, 0})[0]), 0.0, 1e-15);
}

TEST(Leray, IsIdempotent) {
    const auto b = basis2(4);
    VectorSpectrum raw(2, 4);
    const CounterRng rng(3, 4);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const IntVec k = raw.wavevector(i);
        IntVec nk{-k[0], -k[1], 0};
        if (raw.index(nk) < i) continue;
        for (int j = 0; j < 2; ++j) {
            const std::complex<double> z(rng.normal(i, j), rng.normal(i, j + 2));
            raw[i][j] = z;
            raw.at(nk)[j] = std::conj(z);
            if (raw.index(nk) == i) raw[i][j] = z.real();
        }
    }
    const auto once = leray_project(b, raw);
    const auto twice = leray_project(b, to_lattice(once, 4));
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(once[i], twice[i], 1e-13);
}

TEST(Physical, ZeroFieldAndSingleMode) {
    const auto b = basis2();
    const auto z = eval_physical(SpectralField(b), 18);
    for (double x : z.component[0]) EXPECT_EQ(x, 0.0);
    for (std::size_t i : {0u, 1u, 17u, 101u}) {
        const auto e = SpectralField::unit(b, i);
        const int G = 20;
        const auto ph = eval_physical(e, G);
        std::size_t idx = 0;
        oracle::for_each_point(*b, G, [&](const RealVec& x) {
            const auto s = oracle::evaluate(e, x);
            for (int j = 0; j < 2; ++j) EXPECT_NEAR(ph.component[j][idx], s.value[j], 1e-12);
            ++idx;
        });
    }
}

TEST(Physical, Parseval) {
    const auto b = basis2();
    for (std::uint32_t s = 0; s < 5; ++s) {
        const auto u = rnd(b, s);
        const int G = 17;
        const auto ph = eval_physical(u, G);
        double acc = 0.0;
        for (std::size_t x = 0; x < ph.points(); ++x)
            acc += ph.component[0][x] * ph.component[0][x] + ph.component[1][x] * ph.component[1][x];
        const double l2 = acc / ph.points() * b->domain().volume();
        EXPECT_LT(rel(l2, norm_sq(u, Space::H)), 1e-10);
    }
}

TEST(Physical, GradientMatchesOracle) {
    const auto b = basis2(4);
    const auto u = rnd(b, 2);
    const int G = 9;
    const auto g = eval_gradient(u, G);
    std::size_t idx = 0;
    oracle::for_each_point(*b, G, [&](const RealVec& x) {
        const auto s = oracle::evaluate(u, x);
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) EXPECT_NEAR(g[j][i][idx], s.grad[j][i], 1e-11);
        ++idx;
    });
}
