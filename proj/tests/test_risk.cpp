#include <gtest/gtest.h>

#include <random>

#include "hardcoreboost.hpp"
#include "oracles.hpp"

using hcb::FeatureMatrix;
using hcb::Loss;
using hcb::RegionMask;
using hcb::Weighting;

namespace {

FeatureMatrix constant_feature(std::vector<int> labels, double value)
{
    hcb::DenseMatrix x(labels.size(), 1, value);
    return FeatureMatrix(x, std::move(labels));
}

} // namespace

TEST(SurrogateRisk, ZeroWeightingExp)
{
    EXPECT_NEAR(hcb::surrogate_risk(constant_feature({1, -1, 1, 1}, 0.3), Weighting(1), Loss::exponential()), 1.0,
                1e-15);
}

TEST(SurrogateRisk, UnnormalizedRestriction)
{
    const auto fm = constant_feature({1, -1, 1, -1}, 0.3);
    EXPECT_NEAR(hcb::surrogate_risk(fm, Weighting(1), Loss::logistic(), RegionMask({0, 2}, 4)), 0.5 * std::log(2.0),
                1e-15);
}

TEST(SurrogateRisk, HalfFeatureExample)
{
    const auto fm = constant_feature({1, -1, 1}, 0.5);
    EXPECT_NEAR(hcb::surrogate_risk(fm, Weighting{1.0}, Loss::exponential()),
                (2 * std::exp(-0.5) + std::exp(0.5)) / 3.0, 1e-15);
    EXPECT_NEAR(hcb::surrogate_risk(fm, Weighting{1.0}, Loss::exponential()), 0.9539, 1e-4);
}

TEST(SurrogateRisk, DimensionMismatch)
{
    const auto fm = constant_feature({1, -1}, 0.5);
    EXPECT_THROW(hcb::surrogate_risk(fm, Weighting{1.0, 2.0}, Loss::exponential()), hcb::Error);
    EXPECT_THROW(hcb::surrogate_risk(fm, Weighting{1.0}, Loss::exponential(), RegionMask({5}, 6)), hcb::Error);
}

TEST(ClassificationRisk, TiePredictsPositive)
{
    EXPECT_EQ(hcb::classification_risk(constant_feature({-1, -1, -1}, 0.4), Weighting(1)), 1.0);
    EXPECT_EQ(hcb::classification_risk(constant_feature({1, 1}, 0.4), Weighting(1)), 0.0);
}

TEST(ClassificationRisk, PerfectSeparatorOnStaggeredWorld)
{
    const auto world = hcb::build_staggered(8);
    const auto fm = hcb::materialize(hcb::HypothesisClass::projections(2), world.support);
    EXPECT_EQ(hcb::classification_risk(fm, hcb::StaggeredWorld::reference_separator()), 0.0);
}

TEST(BayesRisk, Examples)
{
    hcb::DenseMatrix one(2, 1);
    EXPECT_EQ(hcb::bayes_risk_discrete(hcb::Sample(one, {1, -1}, {0.7, 0.3})), 0.3);

    hcb::DenseMatrix two(4, 1);
    two(2, 0) = two(3, 0) = 1.0;
    const hcb::Sample s(two, {1, -1, 1, -1}, {0.4, 0.1, 0.2, 0.3});
    EXPECT_NEAR(hcb::bayes_risk_discrete(s), 0.3, 1e-15);
    EXPECT_NEAR(hcb::bayes_risk_discrete(s), oracle::bayes_risk(s), 1e-15);

    hcb::DenseMatrix det(2, 1);
    det(1, 0) = 1.0;
    EXPECT_EQ(hcb::bayes_risk_discrete(hcb::Sample(det, {1, -1})), 0.0);
}

TEST(BayesRisk, SurrogateInfimumMatchesGridOracle)
{
    std::mt19937_64 rng(21);
    for (int t = 0; t < 10; ++t) {
        const auto w = oracle::random_world(rng, 5, 2);
        for (const auto& l : {Loss::exponential(), Loss::logistic(), Loss::hinge()})
            EXPECT_NEAR(hcb::bayes_surrogate_risk_discrete(w.dist, l), oracle::bayes_surrogate_risk(w.dist, l), 1e-7);
    }
}

TEST(RiskProperties, AdditivityOverPartitions)
{
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::bernoulli_distribution coin(0.5);
    for (int t = 0; t < 100; ++t) {
        const auto fm = oracle::random_problem(rng, 12, 3, {-1.0, -0.5, 0.0, 0.25, 1.0});
        const Weighting lambda{u(rng), u(rng), u(rng)};
        std::vector<std::size_t> part;
        for (std::size_t j = 0; j < 12; ++j)
            if (coin(rng)) part.push_back(j);
        const RegionMask core(part, 12);
        for (const auto& l : {Loss::exponential(), Loss::logistic(), Loss::hinge()}) {
            const double full = hcb::surrogate_risk(fm, lambda, l);
            const double split =
                hcb::surrogate_risk(fm, lambda, l, core) + hcb::surrogate_risk(fm, lambda, l, core.complement(12));
            EXPECT_NEAR(full, split, 1e-12);
        }
        EXPECT_NEAR(hcb::classification_risk(fm, lambda),
                    hcb::classification_risk(fm, lambda, core) + hcb::classification_risk(fm, lambda, core.complement(12)),
                    1e-12);
    }
}

TEST(RiskProperties, ClassificationBoundedBySurrogateOverPhiZero)
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 200; ++t) {
        const auto fm = oracle::random_problem(rng, 10, 2, {-1.0, -0.3, 0.0, 0.6, 1.0});
        const Weighting lambda{u(rng), u(rng)};
        for (const auto& l : {Loss::exponential(), Loss::logistic(), Loss::hinge(), Loss::cone(1.0, 2.0)})
            EXPECT_LE(hcb::classification_risk(fm, lambda),
                      hcb::surrogate_risk(fm, lambda, l) / hcb::loss_value(l, 0.0) + 1e-12);
    }
}

TEST(RiskProperties, ConvexAlongSegments)
{
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> u(-3.0, 3.0), t01(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const auto fm = oracle::random_problem(rng, 8, 2, {-1.0, 0.0, 0.5, 1.0});
        const Weighting a{u(rng), u(rng)}, b{u(rng), u(rng)};
        const double s = t01(rng);
        const Weighting mid{s * a[0] + (1 - s) * b[0], s * a[1] + (1 - s) * b[1]};
        for (const auto& l : {Loss::exponential(), Loss::logistic(), Loss::hinge()})
            EXPECT_LE(hcb::surrogate_risk(fm, mid, l),
                      s * hcb::surrogate_risk(fm, a, l) + (1 - s) * hcb::surrogate_risk(fm, b, l) + 1e-9);
    }
}

TEST(RiskProperties, CalibrationInequality)
{
    std::mt19937_64 rng(25);
    std::normal_distribution<double> g(0.0, 2.0);
    for (int t = 0; t < 50; ++t) {
        const auto w = oracle::random_world(rng, 4, 2);
        const Weighting lambda{g(rng), g(rng)};
        for (const auto& l : {Loss::exponential(), Loss::logistic()}) {
            const double excess_l = hcb::classification_risk(w.fm, lambda) - oracle::bayes_risk(w.dist);
            const double excess_phi = hcb::surrogate_risk(w.fm, lambda, l) - oracle::bayes_surrogate_risk(w.dist, l);
            ASSERT_GE(excess_l, -1e-12);
            EXPECT_LE(hcb::psi_numeric(l, std::clamp(excess_l, 0.0, 1.0)), excess_phi + 1e-6);
        }
    }
}

TEST(RegionMask, Validation)
{
    EXPECT_THROW(RegionMask({1, 1}, 3), hcb::Error);
    EXPECT_THROW(RegionMask({3}, 3), hcb::Error);
    const RegionMask r({2, 0}, 4);
    EXPECT_TRUE(r.contains(0));
    EXPECT_FALSE(r.contains(1));
    EXPECT_EQ(r.complement(4), RegionMask({1, 3}, 4));
}

TEST(SampleType, WeightsMustSumToOne)
{
    hcb::DenseMatrix x(2, 1);
    EXPECT_THROW(hcb::Sample(x, {1, -1}, {0.5, 0.6}), hcb::Error);
    EXPECT_THROW(hcb::Sample(x, {1, 0}), hcb::Error);
    EXPECT_NO_THROW(hcb::Sample(x, {1, -1}, {0.25, 0.75}));
}
