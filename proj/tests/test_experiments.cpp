#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hardcoreboost.hpp"
#include "oracles.hpp"

using hcb::Loss;

namespace {

/// Exact 2-D max-margin on the l1 sphere: the optimum of a concave piecewise-linear function
/// on each edge sits at an endpoint or where two margin lines cross.
hcb::MaxMarginResult brute_max_margin(const hcb::Sample& s)
{
    const double corners[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    auto min_margin = [&](double a, double b) {
        double t = INFINITY;
        for (std::size_t j = 0; j < s.size(); ++j)
            t = std::min(t, s.label(j) * (a * s.instance(j)[0] + b * s.instance(j)[1]));
        return t;
    };
    double best = -INFINITY, ba = 0, bb = 0;
    auto consider = [&](double a, double b) {
        const double t = min_margin(a, b);
        if (t > best) best = t, ba = a, bb = b;
    };
    for (int e = 0; e < 4; ++e) {
        const double* u = corners[e];
        const double* v = corners[(e + 1) % 4];
        consider(u[0], u[1]);
        // lambda(s) = (1 - s) u + s v; each margin is affine in s.
        for (std::size_t j = 0; j < s.size(); ++j)
            for (std::size_t k = j + 1; k < s.size(); ++k) {
                auto g = [&](std::size_t r, double w0, double w1) {
                    return s.label(r) * (w0 * s.instance(r)[0] + w1 * s.instance(r)[1]);
                };
                const double a0 = g(j, u[0], u[1]), a1 = g(j, v[0], v[1]);
                const double b0 = g(k, u[0], u[1]), b1 = g(k, v[0], v[1]);
                const double denom = (a1 - a0) - (b1 - b0);
                if (std::abs(denom) < 1e-15) continue;
                const double t = (b0 - a0) / denom;
                if (t > 0 && t < 1) consider((1 - t) * u[0] + t * v[0], (1 - t) * u[1] + t * v[1]);
            }
    }
    return {hcb::Weighting{ba, bb}, best};
}

hcb::Sample pick(const hcb::StaggeredWorld& w, std::initializer_list<std::size_t> rows)
{
    hcb::DenseMatrix pts(0, 2);
    std::vector<int> labels;
    for (std::size_t r : rows) {
        pts.append_row(w.support.instance(r));
        labels.push_back(w.support.label(r));
    }
    return hcb::Sample(std::move(pts), std::move(labels));
}

double world_exp_risk(const hcb::StaggeredWorld& w, const hcb::Weighting& lambda)
{
    const auto fm = hcb::materialize(hcb::HypothesisClass::projections(2), w.support);
    return hcb::surrogate_risk(fm, lambda, Loss::exponential());
}

} // namespace

TEST(BuildStaggered, DepthOne)
{
    const auto w = hcb::build_staggered(1);
    ASSERT_EQ(w.support.size(), 2u);
    EXPECT_EQ(w.support.instance(0)[0], -1.0);
    EXPECT_EQ(w.support.instance(0)[1], 1.0);
    EXPECT_EQ(w.support.label(0), 1);
    EXPECT_EQ(w.support.instance(1)[0], 1.0);
    EXPECT_NEAR(w.support.instance(1)[1], -0.2, 1e-15);
    EXPECT_EQ(w.support.label(1), -1);
    EXPECT_EQ(w.support.weight(0), 0.5);
    EXPECT_EQ(w.support.weight(1), 0.5);
}

TEST(BuildStaggered, DepthTwo)
{
    const auto w = hcb::build_staggered(2);
    ASSERT_EQ(w.support.size(), 4u);
    EXPECT_EQ(w.support.instance(2)[0], 0.5);
    EXPECT_EQ(w.support.instance(2)[1], 1.0);
    EXPECT_EQ(w.support.instance(3)[0], 1.0);
    EXPECT_NEAR(w.support.instance(3)[1], 0.7, 1e-15);
    EXPECT_EQ(w.support.weight(0), 0.25);
    EXPECT_EQ(w.support.weight(2), 0.25);
}

TEST(BuildStaggered, MassesSumToOneAndSeparatorMargins)
{
    for (std::size_t depth : {1u, 3u, 10u, 40u, 200u}) {
        const auto w = hcb::build_staggered(depth);
        double total = 0.0;
        for (double v : w.support.weights()) total += v;
        // Partial sums stay exact while the masses fit in the mantissa.
        if (depth <= 50) EXPECT_EQ(total, 1.0) << depth;
        else EXPECT_NEAR(total, 1.0, 1e-15) << depth;
        const auto fm = hcb::materialize(hcb::HypothesisClass::projections(2), w.support);
        const auto mg = hcb::margins(fm, hcb::StaggeredWorld::reference_separator());
        double lowest = INFINITY;
        for (std::size_t i = 1; i <= depth; ++i) {
            const double s = std::pow(4.0, 2.0 - static_cast<double>(i));
            EXPECT_NEAR(mg[2 * i - 2], 0.5 * s, 1e-15 * 16);
            EXPECT_NEAR(mg[2 * i - 1], 0.3 * s, 1e-15 * 16);
            lowest = std::min({lowest, mg[2 * i - 2], mg[2 * i - 1]});
        }
        if (depth <= 20) {
            EXPECT_GT(lowest, 0.0);
            EXPECT_NEAR(lowest, 0.3 * std::pow(4.0, 2.0 - static_cast<double>(depth)), 1e-15);
        }
    }
    EXPECT_THROW(hcb::build_staggered(0), hcb::Error);
}

TEST(BuildStaggered, SpanRiskVanishes)
{
    // Depth 10 and above need c > 2^40 / 4^depth to push the smallest margin far enough.
    for (std::size_t depth = 1; depth <= 9; ++depth) {
        const auto w = hcb::build_staggered(depth);
        const double c = std::ldexp(1.0, 40 - 2 * static_cast<int>(depth));
        EXPECT_LE(world_exp_risk(w, hcb::StaggeredWorld::reference_separator().scaled(c)), 1e-6) << depth;
    }
}

TEST(SampleWorld, DeterministicAndSupported)
{
    const auto w = hcb::build_staggered(5);
    const auto a = hcb::sample_world(w, 50, 7), b = hcb::sample_world(w, 50, 7);
    EXPECT_EQ(a.instances().data(), b.instances().data());
    EXPECT_EQ(a.labels(), b.labels());
    const auto one = hcb::sample_world(hcb::build_staggered(1), 100, 3);
    for (std::size_t j = 0; j < one.size(); ++j) {
        const auto x = one.instance(j);
        const bool p1 = x[0] == -1.0 && x[1] == 1.0 && one.label(j) == 1;
        const bool n1 = x[0] == 1.0 && std::abs(x[1] + 0.2) < 1e-15 && one.label(j) == -1;
        EXPECT_TRUE(p1 || n1);
    }
    EXPECT_THROW(hcb::sample_world(w, 0, 1), hcb::Error);
}

TEST(SampleWorld, EmpiricalMassesConcentrate)
{
    const auto w = hcb::build_staggered(8);
    int good = 0;
    const int seeds = 100;
    for (int seed = 0; seed < seeds; ++seed) {
        const auto s = hcb::sample_world(w, 10000, 100 + seed);
        std::vector<double> freq(w.support.size(), 0.0);
        for (std::size_t j = 0; j < s.size(); ++j)
            for (std::size_t k = 0; k < w.support.size(); ++k)
                if (s.label(j) == w.support.label(k) && s.instance(j)[0] == w.support.instance(k)[0] &&
                    s.instance(j)[1] == w.support.instance(k)[1])
                    freq[k] += 1e-4;
        bool ok = true;
        for (std::size_t k = 0; k < freq.size(); ++k) ok = ok && std::abs(freq[k] - w.support.weight(k)) <= 0.02;
        good += ok;
    }
    EXPECT_GE(good, 99);
}

TEST(MaxMargin, StaggeredPair)
{
    const auto w = hcb::build_staggered(3);
    const auto r = hcb::max_margin_2d(pick(w, {4, 3})); // p_3, n_2
    const double denom = 2 + 0.875 + 0.7;
    EXPECT_NEAR(r.lambda[0], -1.7 / denom, 1e-9);
    EXPECT_NEAR(r.lambda[1], 1.875 / denom, 1e-9);
    EXPECT_NEAR(r.lambda[0], -0.47552, 1e-5);
    EXPECT_NEAR(r.lambda[1], 0.52448, 1e-5);
    EXPECT_NEAR(r.margin, 0.10839, 1e-5);
    EXPECT_NEAR(r.lambda[0] * 0.875 + r.lambda[1], -(r.lambda[0] + 0.7 * r.lambda[1]), 1e-12);
}

TEST(MaxMargin, FirstPairMatchesOracle)
{
    const auto w = hcb::build_staggered(1);
    const auto s = pick(w, {0, 1});
    const auto r = hcb::max_margin_2d(s);
    const auto o = brute_max_margin(s);
    EXPECT_NEAR(r.margin, o.margin, 1e-7);
    EXPECT_NEAR(r.lambda[0], o.lambda[0], 1e-7);
    EXPECT_NEAR(r.lambda[1], o.lambda[1], 1e-7);
}

TEST(MaxMargin, RandomSamplesMatchOracleWithEqualMargins)
{
    const auto w = hcb::build_staggered(6);
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto s = hcb::sample_world(w, 12, seed);
        const auto pos = std::count(s.labels().begin(), s.labels().end(), 1);
        if (pos == 0 || pos == static_cast<long>(s.size())) continue;
        ++checked;
        const auto r = hcb::max_margin_2d(s);
        EXPECT_NEAR(r.lambda.l1_norm(), 1.0, 1e-12);
        EXPECT_NEAR(r.margin, brute_max_margin(s).margin, 1e-7);
        double min_pos = INFINITY, min_neg = INFINITY;
        for (std::size_t j = 0; j < s.size(); ++j) {
            const double m = s.label(j) * (r.lambda[0] * s.instance(j)[0] + r.lambda[1] * s.instance(j)[1]);
            (s.label(j) > 0 ? min_pos : min_neg) = std::min(s.label(j) > 0 ? min_pos : min_neg, m);
        }
        EXPECT_NEAR(min_pos, min_neg, 1e-8);
        EXPECT_NEAR(std::min(min_pos, min_neg), r.margin, 1e-12);
    }
    EXPECT_GT(checked, 40);
}

TEST(MaxMargin, Rejections)
{
    const auto w = hcb::build_staggered(2);
    EXPECT_THROW(hcb::max_margin_2d(pick(w, {0, 2})), hcb::Error);
    hcb::DenseMatrix x(2, 2, 0.5);
    try {
        hcb::max_margin_2d(hcb::Sample(x, {1, -1}));
        FAIL() << "inseparable sample accepted";
    } catch (const hcb::Error& e) {
        EXPECT_EQ(e.kind(), hcb::ErrorKind::infeasible);
    }
}

TEST(Impossibility, ReferenceSeparatorRiskShrinks)
{
    const auto w = hcb::build_staggered(10);
    const auto bar = hcb::StaggeredWorld::reference_separator();
    EXPECT_LT(world_exp_risk(w, bar.scaled(10)), world_exp_risk(w, bar));
}

TEST(Impossibility, ReportInternallyConsistent)
{
    const std::vector<double> scales{1, 2, 4, 8, 16, 32};
    int events = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = hcb::impossibility_report(10, 20, scales, Loss::exponential(), seed);
        ASSERT_EQ(r.rows.size(), scales.size());
        EXPECT_EQ(r.attempts, 1u);
        const auto w = hcb::build_staggered(10);
        const auto fm = hcb::materialize(hcb::HypothesisClass::projections(2), w.support);
        double mass = 0.0;
        const auto mg = hcb::margins(fm, r.lambda_hat);
        for (std::size_t j = 0; j < mg.size(); ++j)
            if (mg[j] < 0) mass += fm.weight(j);
        EXPECT_DOUBLE_EQ(r.misclassified_mass, mass);
        EXPECT_EQ(r.event, mass > 0.0);
        for (const auto& row : r.rows) {
            EXPECT_NEAR(row.risk_hat, world_exp_risk(w, r.lambda_hat.scaled(row.scale)), 1e-12 * row.risk_hat);
            EXPECT_NEAR(row.risk_bar, world_exp_risk(w, hcb::StaggeredWorld::reference_separator().scaled(row.scale)),
                        1e-12);
        }
        for (std::size_t k = 1; k < r.rows.size(); ++k) EXPECT_LT(r.rows[k].risk_bar, r.rows[k - 1].risk_bar);
        if (r.event) {
            ++events;
            EXPECT_GT(r.misclassified_mass, 0.0);
            EXPECT_GT(r.classification_risk, 0.0);
        }
    }
    EXPECT_GT(events, 0);
}

TEST(Impossibility, RiskAtScaleThirtyTwoExceedsScaleOne)
{
    // Depth 10, m = 20: in every misclassification event R(32 lambda_hat) > R(lambda_hat).
    int events = 0, grew = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = hcb::impossibility_report(10, 20, {1.0, 32.0}, Loss::exponential(), seed);
        if (!r.event) continue;
        ++events;
        grew += r.rows[1].risk_hat > r.rows[0].risk_hat;
    }
    ASSERT_GT(events, 0);
    EXPECT_EQ(grew, events);
}

TEST(Impossibility, DivergesAtLargeScale)
{
    // Exponential divergence shows once c outgrows the inverse of the misclassified margin.
    int events = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = hcb::impossibility_report(10, 20, {1.0, 1e12}, Loss::exponential(), seed);
        if (!r.event) continue;
        ++events;
        EXPECT_GT(r.rows[1].risk_hat, 10 * r.rows[0].risk_hat) << seed;
        EXPECT_LT(r.rows[1].risk_bar, 1e-300);
    }
    EXPECT_GT(events, 0);
}

TEST(Impossibility, RetriesAndPreconditions)
{
    EXPECT_THROW(hcb::impossibility_report(2, 20, {1.0}, Loss::exponential(), 1), hcb::Error);
    EXPECT_THROW(hcb::impossibility_report(5, 20, {}, Loss::exponential(), 1), hcb::Error);
    EXPECT_THROW(hcb::impossibility_report(5, 20, {-1.0}, Loss::exponential(), 1), hcb::Error);
    const auto r = hcb::impossibility_report(4, 200, {1.0}, Loss::exponential(), 5, 3);
    EXPECT_EQ(r.attempts, 4u); // a large sample covers the whole depth-4 world, so every attempt fails
    EXPECT_FALSE(r.event);
    const auto a = hcb::impossibility_report(10, 20, {1.0, 2.0}, Loss::exponential(), 9);
    const auto b = hcb::impossibility_report(10, 20, {1.0, 2.0}, Loss::exponential(), 9);
    EXPECT_EQ(a.lambda_hat.vector(), b.lambda_hat.vector());
    EXPECT_EQ(a.rows[1].risk_hat, b.rows[1].risk_hat);
}

TEST(LatticeWorld, RiskOfBayesPredictor)
{
    const auto w = hcb::LatticeWorld1D::alternating();
    EXPECT_NEAR(w.bayes_risk(), 0.2, 1e-15);
    const auto cls = hcb::HypothesisClass::lattice(4, 1);
    std::vector<double> coef(cls.size(), 0.0);
    for (std::size_t k = 0; k < 8; ++k) {
        const double mid = -1.0 + 0.25 * (k + 0.5);
        coef[cls.lattice_cell(std::vector<double>{mid})] = k % 2 == 0 ? 1.0 : -1.0;
    }
    EXPECT_NEAR(hcb::lattice_world_risk(w, cls, hcb::Weighting(coef)), 0.2, 1e-15);
    // Class 1 cannot resolve the cells: any predictor has risk 0.5.
    const auto coarse = hcb::HypothesisClass::lattice(1, 1);
    EXPECT_NEAR(hcb::lattice_world_risk(w, coarse, hcb::Weighting(std::vector<double>(coarse.size(), 1.0))), 0.5,
                1e-15);
    EXPECT_NEAR(hcb::lattice_world_risk(w, cls, hcb::Weighting(std::vector<double>(cls.size(), 0.0))), 0.5, 1e-15);
}

TEST(LatticeWorld, SampleFollowsConditional)
{
    const auto w = hcb::LatticeWorld1D::alternating();
    auto rng = hcb::keyed_rng(4);
    const auto s = hcb::sample_lattice_world(w, 40000, rng);
    double pos_even = 0, even = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        const double x = s.instance(j)[0];
        ASSERT_GE(x, -1.0);
        ASSERT_LT(x, 1.0);
        if (w.cell_of(x) % 2 == 0) {
            even += 1;
            pos_even += s.label(j) > 0;
        }
    }
    EXPECT_NEAR(even / s.size(), 0.5, 0.02);
    EXPECT_NEAR(pos_even / even, 0.8, 0.02);
}

TEST(Sweep, DefaultSchedule)
{
    const auto s = hcb::default_schedule();
    ASSERT_EQ(s.size(), 4u);
    const std::size_t ms[] = {250, 1000, 4000, 16000};
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(s[i].m, ms[i]);
        EXPECT_EQ(s[i].class_index, i + 1);
        EXPECT_EQ(s[i].epsilon, 1.0 / ms[i]);
    }
}

TEST(Sweep, TrivialWorldHasZeroExcess)
{
    hcb::SweepConfig cfg;
    cfg.world.eta = {1.0, 0.0};
    cfg.schedule = {{50, 1, 0.02}, {100, 1, 0.01}, {200, 2, 0.005}};
    cfg.replications = 4;
    cfg.seed = 11;
    const auto curve = hcb::consistency_sweep(cfg);
    ASSERT_EQ(curve.size(), 3u);
    for (const auto& st : curve) {
        EXPECT_EQ(st.failures, 0u);
        ASSERT_EQ(st.excess.size(), 4u);
        for (double e : st.excess) EXPECT_EQ(e, 0.0);
    }
}

TEST(Sweep, DeterministicGivenSeed)
{
    hcb::SweepConfig cfg;
    cfg.schedule = {{100, 1, 0.01}, {120, 4, 0.005}};
    cfg.replications = 30;
    cfg.seed = 12;
    const auto a = hcb::consistency_sweep(cfg);
    const auto b = hcb::consistency_sweep(cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        EXPECT_EQ(a[s].excess, b[s].excess);
        EXPECT_EQ(a[s].median, b[s].median);
        EXPECT_EQ(a[s].class_size, hcb::HypothesisClass::lattice(cfg.schedule[s].class_index, 1).size());
    }
    cfg.seed = 13;
    EXPECT_NE(hcb::consistency_sweep(cfg)[1].excess, a[1].excess);
}

TEST(Sweep, ValidatesSchedule)
{
    hcb::SweepConfig cfg;
    cfg.schedule = {{100, 1, 0.01}, {100, 2, 0.001}};
    EXPECT_THROW(hcb::consistency_sweep(cfg), hcb::Error);
    cfg.schedule = {{100, 1, 0.01}, {200, 2, 0.01}};
    EXPECT_THROW(hcb::consistency_sweep(cfg), hcb::Error);
    cfg.schedule = hcb::default_schedule(1);
    cfg.optimizer.method = hcb::Method::subgradient;
    EXPECT_THROW(hcb::consistency_sweep(cfg), hcb::Error);
}

TEST(Quantile, Type7)
{
    EXPECT_EQ(hcb::quantile({3, 1, 2}, 0.5), 2.0);
    EXPECT_NEAR(hcb::quantile({1, 2, 3, 4}, 0.9), 3.7, 1e-15);
    EXPECT_THROW(hcb::quantile({}, 0.5), hcb::Error);
}
