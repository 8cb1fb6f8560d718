#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "sns/estimates.hpp"

using namespace sns;

TEST(PRange, Examples) {
    EXPECT_FALSE(p_range(2.0).bounded());
    EXPECT_EQ(p_range(2.0).lo, 2.0);
    EXPECT_DOUBLE_EQ(p_range(1.0).hi, 3.0);
    EXPECT_DOUBLE_EQ(p_range(0.5).hi, 7.0 / 3.0);
    EXPECT_THROW(p_range(0.0), std::invalid_argument);
    EXPECT_THROW(p_range(2.5), std::invalid_argument);
}

TEST(EpsilonForP, ExamplesAndConsistency) {
    EXPECT_DOUBLE_EQ(epsilon_for_p(2.0, 2.0).hi, 1.0);
    EXPECT_DOUBLE_EQ(epsilon_for_p(2.0, 1.0).hi, 0.5);
    EXPECT_THROW(epsilon_for_p(3.0, 1.0), std::invalid_argument);
    EXPECT_THROW(epsilon_for_p(1.9, 1.0), std::invalid_argument);
    // Both conditions reduce to (p - 1)(2 - eta) < 2.
    for (double eta : {0.1, 0.5, 1.0, 1.5, 1.9})
        for (double p = 2.0; p < 40.0; p += 0.0625) {
            const bool in = p_range(eta).contains(p);
            const bool nonempty = 1.0 - 0.5 * (p - 1.0) * (2.0 - eta) > 0.0;
            EXPECT_EQ(in, nonempty) << eta << " " << p;
        }
}

namespace {

TrajectoryFunctionals tf(double sup, double v, std::vector<double> w = {}) { return {sup, v, std::move(w)}; }

} // namespace

TEST(Aggregate, DuplicatedTrajectoryHasZeroSe) {
    std::map<std::size_t, LevelRuns> lv;
    lv[8].runs = {tf(4.0, 2.0, {2.0, 3.0}), tf(4.0, 2.0, {2.0, 3.0}), tf(4.0, 2.0, {2.0, 3.0})};
    const std::vector<double> ps{2.0, 3.0};
    const auto st = aggregate(lv, ps);
    const auto& s = st.levels.at(8);
    EXPECT_EQ(s.int_dirichlet.mean, 2.0);
    EXPECT_EQ(s.int_dirichlet.se, 0.0);
    EXPECT_EQ(s.moments[0].sup_moment.mean, 4.0);
    EXPECT_EQ(s.moments[1].sup_moment.mean, 8.0);
    EXPECT_EQ(s.moments[1].int_weighted.mean, 3.0);
    EXPECT_EQ(s.count, 3u);
    EXPECT_TRUE(st.warnings.empty());
    EXPECT_EQ(aggregate(lv, ps, 1.0).warnings.size(), 1u);

    lv[8].runs.resize(1);
    EXPECT_THROW(aggregate(lv, ps), std::invalid_argument);
}

TEST(Aggregate, PermutationInvariant) {
    std::vector<TrajectoryFunctionals> r;
    for (int i = 0; i < 50; ++i) r.push_back(tf(1.0 / (1 + i) + 0.1 * i, std::sin(i) + 2.0, {0.3 * i}));
    std::map<std::size_t, LevelRuns> a, b;
    a[4].runs = r;
    std::reverse(r.begin(), r.end());
    std::rotate(r.begin(), r.begin() + 17, r.end());
    b[4].runs = r;
    const std::vector<double> ps{2.0};
    const auto x = aggregate(a, ps).levels.at(4), y = aggregate(b, ps).levels.at(4);
    EXPECT_EQ(x.int_dirichlet.mean, y.int_dirichlet.mean);
    EXPECT_EQ(x.int_dirichlet.se, y.int_dirichlet.se);
    EXPECT_EQ(x.moments[0].sup_moment.mean, y.moments[0].sup_moment.mean);
    EXPECT_EQ(x.moments[0].int_weighted.se, y.moments[0].int_weighted.se);
}

TEST(Aggregate, ZeroNoiseSupIsInitialEnergy) {
    TorusDomain dom;
    dom.max_wavenumber = 6;
    const auto b = ModeBasis::create(dom);
    GalerkinConfig c;
    c.n = 12;
    c.dt = 1e-3;
    c.T = 0.3;
    c.u0 = SpectralField(b);
    for (std::size_t i = 0; i < 20; ++i) c.u0[i] = 0.3 + 0.05 * i;
    const std::vector<double> ps{2.0};
    std::map<std::size_t, LevelRuns> lv;
    for (int j = 0; j < 2; ++j) {
        GalerkinSystem sys(b, c, std::nullopt);
        lv[12].runs.push_back(trajectory_functionals(sys.integrate(generate_wiener(c.steps(), 0, c.dt, 1)), ps));
    }
    EXPECT_DOUBLE_EQ(aggregate(lv, ps).levels.at(12).moments[0].sup_moment.mean, norm_sq(project_Pn(c.u0, 12), Space::H));
}

TEST(Aggregate, StokesSingleModeDirichletIntegral) {
    TorusDomain dom;
    dom.max_wavenumber = 4;
    const auto b = ModeBasis::create(dom);
    const std::size_t i = 5;
    const double k2 = b->mode(i).k2, a0 = 0.8, T = 0.5;
    const double exact = a0 * a0 * (1.0 - std::exp(-2.0 * k2 * T)) / 2.0;
    std::vector<double> errs;
    for (double dt : {2e-4, 1e-4}) {
        GalerkinConfig c;
        c.n = 8;
        c.dt = dt;
        c.T = T;
        c.nonlinear = false;
        c.u0 = a0 * SpectralField::unit(b, i);
        GalerkinSystem sys(b, c, std::nullopt);
        const auto f = trajectory_functionals(sys.integrate(generate_wiener(c.steps(), 0, dt, 1)), std::vector<double>{});
        errs.push_back(std::abs(f.int_dirichlet - exact) / exact);
    }
    EXPECT_LT(errs[1], 2e-3);
    EXPECT_NEAR(errs[0] / errs[1], 2.0, 0.2);
}

TEST(Kendall, ExactTailProbabilities) {
    EXPECT_DOUBLE_EQ(kendall_upper_p(4, 6), 1.0 / 24.0);
    EXPECT_DOUBLE_EQ(kendall_upper_p(4, -6), 1.0);
    EXPECT_DOUBLE_EQ(kendall_upper_p(3, 1), 0.5);
    // Brute force over permutations of 5.
    std::vector<int> perm{0, 1, 2, 3, 4};
    std::map<long, int> counts;
    do {
        long s = 0;
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j) s += (perm[j] > perm[i]) - (perm[j] < perm[i]);
        ++counts[s];
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (const auto& [s, c] : counts) {
        int tail = 0;
        for (const auto& [t, d] : counts)
            if (t >= s) tail += d;
        EXPECT_DOUBLE_EQ(kendall_upper_p(5, s), tail / 120.0);
    }
    const std::vector<double> up{1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(kendall_trend(up).tau, 1.0);
}

namespace {

EnsembleStats stats_from(const std::vector<std::pair<double, double>>& mean_se_per_n) {
    EnsembleStats s;
    std::size_t n = 4;
    for (const auto& [m, se] : mean_se_per_n) {
        LevelStats l;
        l.int_dirichlet = {m, se, 100};
        l.moments.push_back({2.0, {m, se, 100}, {m, se, 100}});
        s.levels[n] = l;
        n *= 2;
    }
    return s;
}

} // namespace

TEST(Uniformity, Examples) {
    const auto same = uniformity_report(stats_from({{1, 0.1}, {1, 0.1}, {1, 0.1}, {1, 0.1}}));
    EXPECT_TRUE(same.pass);
    for (const auto& f : same.functionals) EXPECT_EQ(f.ratio, 1.0);

    const auto doubling = uniformity_report(stats_from({{1, 0}, {2, 0}, {4, 0}, {8, 0}}));
    EXPECT_FALSE(doubling.pass);
    EXPECT_TRUE(doubling.functionals[0].positive_trend);

    // Monotone but within noise: ratio fine, trend not flagged.
    const auto drift = uniformity_report(stats_from({{1.00, 0.05}, {1.01, 0.05}, {1.02, 0.05}, {1.03, 0.05}}));
    EXPECT_TRUE(drift.pass);

    EXPECT_THROW(uniformity_report(stats_from({{1, 0}, {1, 0}})), std::invalid_argument);
    auto mixed = stats_from({{1, 0}, {1, 0}, {1, 0}});
    mixed.levels.begin()->second.physics_hash = 7;
    EXPECT_THROW(uniformity_report(mixed), std::invalid_argument);
}

TEST(Gronwall, ClosedForms) {
    const std::size_t N = 100;
    const auto grid = uniform_grid(2.0, N);
    const std::vector<double> zero(N, 0.0), th(N, 0.7), a(N, 1.5);
    const auto y = gronwall_eval(zero, th, 3.0, grid);
    for (std::size_t k = 0; k <= N; ++k) EXPECT_NEAR(y[k], 3.0 * std::exp(0.7 * grid[k]), 1e-12 * y[k]);
    const auto z = gronwall_eval(a, zero, 3.0, grid);
    for (std::size_t k = 0; k <= N; ++k) EXPECT_NEAR(z[k], 3.0 + 1.5 * grid[k], 1e-12);
    EXPECT_THROW(gronwall_eval(std::vector<double>(N, -1.0), zero, 1.0, grid), std::invalid_argument);
    EXPECT_THROW(gronwall_eval(a, zero, -1.0, grid), std::invalid_argument);
}

TEST(Gronwall, MonotoneAndDominatesForwardEuler) {
    const std::size_t N = 200;
    const auto grid = uniform_grid(1.0, N);
    std::vector<double> a(N), th(N);
    for (std::size_t k = 0; k < N; ++k) {
        a[k] = 1.0 + std::sin(7.0 * grid[k]) * std::sin(7.0 * grid[k]);
        th[k] = 2.0 * (k < N / 2 ? 1.0 : 0.3);
    }
    const auto y = gronwall_eval(a, th, 0.5, grid);
    double fe = 0.5;
    for (std::size_t k = 0; k < N; ++k) {
        fe += (grid[k + 1] - grid[k]) * (a[k] + th[k] * fe);
        EXPECT_GE(y[k + 1], fe);
    }
    auto a2 = a, th2 = th;
    for (auto& v : a2) v += 0.1;
    for (auto& v : th2) v += 0.1;
    const auto y1 = gronwall_eval(a2, th, 0.5, grid), y2 = gronwall_eval(a, th2, 0.5, grid), y3 = gronwall_eval(a, th, 0.6, grid);
    for (std::size_t k = 1; k <= N; ++k) {
        EXPECT_GE(y1[k], y[k]);
        EXPECT_GE(y2[k], y[k]);
        EXPECT_GE(y3[k], y[k]);
    }
}

TEST(Gronwall, FirstOrderUnderRefinement) {
    auto a_fn = [](double t) { return 1.0 + t * t; };
    auto th_fn = [](double t) { return 1.0 + std::cos(3.0 * t); };
    auto run = [&](std::size_t N) {
        const auto grid = uniform_grid(1.0, N);
        std::vector<double> a(N), th(N);
        for (std::size_t k = 0; k < N; ++k) {
            a[k] = a_fn(grid[k]);
            th[k] = th_fn(grid[k]);
        }
        return gronwall_eval(a, th, 1.0, grid).back();
    };
    const double ref = run(1 << 18);
    const double e1 = std::abs(run(256) - ref), e2 = std::abs(run(512) - ref), e3 = std::abs(run(1024) - ref);
    EXPECT_NEAR(std::log2(e1 / e2), 1.0, 0.1);
    EXPECT_NEAR(std::log2(e2 / e3), 1.0, 0.1);
}
