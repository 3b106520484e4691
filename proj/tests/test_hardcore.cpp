#include <gtest/gtest.h>

#include <random>

#include "hardcoreboost.hpp"
#include "oracles.hpp"

using hcb::FeatureMatrix;
using hcb::RegionMask;
using hcb::Weighting;

namespace {

FeatureMatrix duplicated_point()
{
    hcb::DenseMatrix x(2, 1, 1.0);
    return FeatureMatrix(x, {1, -1});
}

FeatureMatrix three_point()
{
    hcb::DenseMatrix x(3, 1);
    x(0, 0) = 0.5;
    x(1, 0) = 0.5;
    x(2, 0) = 1.0;
    return FeatureMatrix(x, {1, -1, 1});
}

std::set<std::size_t> as_set(const RegionMask& r) { return {r.indices().begin(), r.indices().end()}; }

} // namespace

TEST(ComputeHardcore, StrictlySeparableSampleHasEmptyCore)
{
    hcb::DenseMatrix x(3, 2);
    x(0, 0) = 1.0, x(0, 1) = 0.2;
    x(1, 0) = -0.5, x(1, 1) = 1.0;
    x(2, 0) = -1.0, x(2, 1) = -0.3;
    const FeatureMatrix fm(x, {1, -1, -1});
    const auto cert = hcb::compute_hardcore(fm);
    EXPECT_TRUE(cert.core.empty());
    for (double p : cert.p) EXPECT_EQ(p, 0.0);
    EXPECT_GT(cert.margin, 0.0);
    // The separator is the l1 max-margin weighting.
    const auto mm = hcb::max_margin_2d(hcb::Sample(x, {1, -1, -1}));
    EXPECT_NEAR(cert.margin, mm.margin, 1e-8);
    EXPECT_LE(cert.separator.l1_norm(), 1.0 + 1e-9);
}

TEST(ComputeHardcore, DuplicatedPointWithBothLabels)
{
    const auto cert = hcb::compute_hardcore(duplicated_point());
    EXPECT_EQ(as_set(cert.core), (std::set<std::size_t>{0, 1}));
    EXPECT_NEAR(cert.p[0], 1.0, 1e-12);
    EXPECT_NEAR(cert.p[1], 1.0, 1e-12);
    EXPECT_EQ(cert.separator[0], 0.0);
    EXPECT_TRUE(std::isinf(cert.margin));
}

TEST(ComputeHardcore, ThreePointExample)
{
    const auto fm = three_point();
    const auto cert = hcb::compute_hardcore(fm);
    EXPECT_EQ(as_set(cert.core), (std::set<std::size_t>{0, 1, 2}));
    EXPECT_EQ(as_set(cert.core), oracle::max_decorrelating_support(fm));
    EXPECT_NEAR(0.5 * cert.p[0] - 0.5 * cert.p[1] + cert.p[2], 0.0, 1e-9);
    for (double p : cert.p) EXPECT_GT(p, 1e-7);
    EXPECT_NEAR(*std::max_element(cert.p.begin(), cert.p.end()), 1.0, 1e-12);
}

TEST(ComputeHardcore, CertificateInvariantsOnRandomProblems)
{
    std::mt19937_64 rng(41);
    for (int t = 0; t < 150; ++t) {
        const auto fm = oracle::random_problem(rng, 2 + rng() % 7, 1 + rng() % 3, {-1.0, 0.0, 1.0});
        const auto cert = hcb::compute_hardcore(fm);
        const auto checks = hcb::check_certificate(fm, cert, 1e-7);
        EXPECT_TRUE(checks.passed);
        EXPECT_LE(checks.decorrelation_max, 1e-7);
        EXPECT_LE(checks.core_margin_max, 1e-7);
        for (std::size_t j = 0; j < fm.points(); ++j) {
            if (cert.core.contains(j)) EXPECT_GT(cert.p[j], 1e-7);
            else EXPECT_EQ(cert.p[j], 0.0);
        }
        const auto mg = hcb::margins(fm, cert.separator);
        for (std::size_t j = 0; j < fm.points(); ++j)
            if (!cert.core.contains(j)) {
                EXPECT_GE(mg[j], cert.margin - 1e-12);
            }
        EXPECT_EQ(as_set(cert.core), oracle::max_decorrelating_support(fm)) << "trial " << t;
    }
}

TEST(ComputeHardcore, ContinuousFeaturesMatchOracle)
{
    std::mt19937_64 rng(42);
    for (int t = 0; t < 60; ++t) {
        const auto fm = oracle::random_problem(rng, 3 + rng() % 5, 1 + rng() % 3, {-1.0, -0.6, -0.25, 0.0, 0.5, 0.75, 1.0});
        EXPECT_EQ(as_set(hcb::compute_hardcore(fm).core), oracle::max_decorrelating_support(fm)) << "trial " << t;
    }
}

TEST(ComputeHardcore, InvariantUnderColumnScalingAndDuplication)
{
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> scale(0.1, 1.0);
    for (int t = 0; t < 40; ++t) {
        const auto fm = oracle::random_problem(rng, 6, 2, {-1.0, 0.0, 1.0});
        const auto core = as_set(hcb::compute_hardcore(fm).core);

        hcb::DenseMatrix scaled = fm.values();
        const double s0 = scale(rng), s1 = scale(rng);
        for (std::size_t j = 0; j < fm.points(); ++j) scaled(j, 0) *= s0, scaled(j, 1) *= s1;
        EXPECT_EQ(as_set(hcb::compute_hardcore(FeatureMatrix(scaled, fm.labels())).core), core);

        hcb::DenseMatrix doubled = fm.values();
        std::vector<int> labels = fm.labels();
        for (std::size_t j = 0; j < fm.points(); ++j) {
            doubled.append_row(fm.row(j));
            labels.push_back(fm.label(j));
        }
        const auto big = as_set(hcb::compute_hardcore(FeatureMatrix(doubled, labels)).core);
        std::set<std::size_t> expected = core;
        for (std::size_t j : core) expected.insert(j + fm.points());
        EXPECT_EQ(big, expected);
    }
}

TEST(ComputeHardcore, ZeroWeightPointsStayOutside)
{
    hcb::DenseMatrix x(3, 1, 1.0);
    const FeatureMatrix fm(x, {1, -1, -1}, {0.5, 0.5, 0.0});
    const auto cert = hcb::compute_hardcore(fm);
    EXPECT_EQ(as_set(cert.core), (std::set<std::size_t>{0, 1}));
}

TEST(SeparatorCertificate, EmptyComplementGivesZeroAndInfinity)
{
    const auto sep = hcb::separator_certificate(duplicated_point(), RegionMask({0, 1}, 2));
    EXPECT_EQ(sep.lambda[0], 0.0);
    EXPECT_TRUE(std::isinf(sep.margin));
}

TEST(SeparatorCertificate, StaggeredSampleMatchesMaxMargin)
{
    const auto world = hcb::build_staggered(5);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto sample = hcb::sample_world(world, 15, seed);
        const auto& y = sample.labels();
        if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), -1) == 0) continue;
        const auto fm = hcb::materialize(hcb::HypothesisClass::projections(2), sample);
        const auto sep = hcb::separator_certificate(fm, RegionMask());
        const auto mm = hcb::max_margin_2d(sample);
        EXPECT_NEAR(sep.margin, mm.margin, 1e-8);
        EXPECT_NEAR(sep.lambda[0], mm.lambda[0], 1e-7);
        EXPECT_NEAR(sep.lambda[1], mm.lambda[1], 1e-7);
    }
}

TEST(SeparatorCertificate, WrongCoreIsAnInconsistency)
{
    // Claiming an empty core on a problem whose core is everything.
    EXPECT_THROW(hcb::separator_certificate(duplicated_point(), RegionMask()), hcb::Error);
}

TEST(VerifyDichotomy, EmptyCoreIsVacuous)
{
    EXPECT_EQ(hcb::verify_dichotomy(three_point(), RegionMask(), 100, 1).violations, 0u);
}

TEST(VerifyDichotomy, DuplicatedPoint)
{
    const auto r = hcb::verify_dichotomy(duplicated_point(), RegionMask({0, 1}, 2), 500, 2);
    EXPECT_EQ(r.violations, 0u);
    EXPECT_EQ(r.erring, 500u);
}

TEST(VerifyDichotomy, ThreePointExample)
{
    const auto fm = three_point();
    const auto r = hcb::verify_dichotomy(fm, RegionMask({0, 1, 2}, 3), 1000, 3);
    EXPECT_EQ(r.violations, 0u);
    EXPECT_EQ(r.trials, 1000u);
    // Sign analysis: lambda > 0 errs on point 2, lambda < 0 errs on points 1 and 3.
    for (double l : {0.7, -0.7}) {
        const auto mg = hcb::margins(fm, Weighting{l});
        if (l > 0) EXPECT_LT(mg[1], 0.0);
        else EXPECT_TRUE(mg[0] < 0.0 && mg[2] < 0.0);
    }
}

TEST(VerifyDichotomy, DetectsAWrongCore)
{
    // Point 0 alone is not a core: positive lambda classifies it correctly.
    const auto r = hcb::verify_dichotomy(three_point(), RegionMask({0}, 3), 200, 4);
    EXPECT_GT(r.violations, 0u);
}

TEST(BoundedRepresentation, Examples)
{
    const auto fm = duplicated_point();
    EXPECT_EQ(hcb::bounded_representation(fm, RegionMask(), Weighting{3.0})[0], 0.0);
    EXPECT_NEAR(hcb::bounded_representation(fm, RegionMask({0, 1}, 2), Weighting{5.0})[0], 5.0, 1e-9);
    hcb::DenseMatrix x(1, 1, 0.5);
    EXPECT_NEAR(hcb::bounded_representation(FeatureMatrix(x, {1}), RegionMask({0}, 1), Weighting{-2.0})[0], -2.0,
                1e-9);
}

TEST(BoundedRepresentation, NeverLargerAndAgreesOnCore)
{
    std::mt19937_64 rng(44);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int t = 0; t < 50; ++t) {
        const auto fm = oracle::random_problem(rng, 6, 3, {-1.0, 0.0, 0.5, 1.0});
        const auto cert = hcb::compute_hardcore(fm);
        const Weighting lambda{g(rng), g(rng), g(rng)};
        const auto rep = hcb::bounded_representation(fm, cert.core, lambda);
        EXPECT_LE(rep.l1_norm(), lambda.l1_norm() + 1e-9);
        const auto a = hcb::margins(fm, lambda), b = hcb::margins(fm, rep);
        for (std::size_t j : cert.core.indices()) EXPECT_NEAR(a[j], b[j], 1e-7);
    }
}

TEST(BoundedRepresentation, SuboptimalLevelSetsStayBounded)
{
    std::mt19937_64 rng(45);
    int tested = 0;
    for (int t = 0; t < 40 && tested < 5; ++t) {
        const auto fm = oracle::random_problem(rng, 7, 3, {-1.0, -0.5, 0.0, 0.5, 1.0});
        const auto cert = hcb::compute_hardcore(fm);
        if (cert.core.size() < 3) continue;
        const std::vector<std::size_t> rows(cert.core.indices().begin(), cert.core.indices().end());
        const auto core_fm = fm.restricted(rows);
        const auto core_cert = hcb::compute_hardcore(core_fm);
        const RegionMask all = core_cert.core;
        ASSERT_EQ(all.size(), rows.size());
        ++tested;
        std::normal_distribution<double> g(0.0, 5.0);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int start = 0; start < 20; ++start) {
            hcb::OptimizerConfig cfg;
            cfg.rho = 1e-6;
            cfg.max_iters = 100000;
            cfg.initial = {g(rng), g(rng), g(rng)};
            const auto run = hcb::coordinate_descent(core_fm, hcb::Loss::exponential(), cfg, &core_cert);
            const double b = hcb::bounded_representation(core_fm, all, run.lambda).l1_norm();
            ASSERT_TRUE(std::isfinite(b));
            lo = std::min(lo, b);
            hi = std::max(hi, b);
        }
        EXPECT_LE(hi, 2.0 * lo + 1e-9) << "trial " << t << " lo " << lo << " hi " << hi;
    }
    EXPECT_EQ(tested, 5);
}
