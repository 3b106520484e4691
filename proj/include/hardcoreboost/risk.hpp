#pragma once

// Empirical risk functionals over a materialized sample. Restricted risks sum the
// point masses inside a region without renormalizing, so the risks of a region and
// its complement add up to the full risk.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hardcoreboost/detail/search.hpp"
#include "hardcoreboost/error.hpp"
#include "hardcoreboost/losses.hpp"
#include "hardcoreboost/sample.hpp"
#include "hardcoreboost/weighting.hpp"

namespace hcb {

/// A set of distinct sample indices, kept sorted.
class RegionMask {
public:
    RegionMask() = default;

    RegionMask(std::vector<std::size_t> indices, std::size_t sample_size) : indices_(std::move(indices))
    {
        std::sort(indices_.begin(), indices_.end());
        require(std::adjacent_find(indices_.begin(), indices_.end()) == indices_.end(),
                ErrorKind::invalid_argument, "region indices must be distinct");
        require(indices_.empty() || indices_.back() < sample_size, ErrorKind::dimension_mismatch,
                "region index out of range");
    }

    std::size_t size() const noexcept { return indices_.size(); }
    bool empty() const noexcept { return indices_.empty(); }
    std::span<const std::size_t> indices() const noexcept { return indices_; }
    bool contains(std::size_t j) const { return std::binary_search(indices_.begin(), indices_.end(), j); }

    RegionMask complement(std::size_t sample_size) const
    {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < sample_size; ++j)
            if (!contains(j)) out.push_back(j);
        return RegionMask(std::move(out), sample_size);
    }

    friend bool operator==(const RegionMask&, const RegionMask&) = default;

private:
    std::vector<std::size_t> indices_;
};

/// Margins y_j (H lambda)(x_j) for every row.
inline std::vector<double> margins(const FeatureMatrix& fm, const Weighting& lambda)
{
    require(lambda.size() == fm.hypotheses(), ErrorKind::dimension_mismatch,
            "weighting has length " + std::to_string(lambda.size()) + ", feature matrix has " +
                std::to_string(fm.hypotheses()) + " columns");
    std::vector<double> out(fm.points());
    for (std::size_t j = 0; j < fm.points(); ++j) {
        const auto row = fm.row(j);
        double f = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) f += lambda[i] * row[i];
        out[j] = fm.label(j) * f;
    }
    return out;
}

namespace detail {

template <typename PerPoint>
double region_sum(const FeatureMatrix& fm, const std::optional<RegionMask>& region, PerPoint&& term)
{
    double total = 0.0;
    if (!region) {
        for (std::size_t j = 0; j < fm.points(); ++j) total += term(j);
    } else {
        require(region->empty() || region->indices().back() < fm.points(), ErrorKind::dimension_mismatch,
                "region does not fit the feature matrix");
        for (std::size_t j : region->indices()) total += term(j);
    }
    return total;
}

} // namespace detail

/// sum_j w_j phi(-y_j (H lambda)(x_j)) over the region (whole sample when absent).
inline double surrogate_risk(const FeatureMatrix& fm, const Weighting& lambda, const Loss& loss,
                             const std::optional<RegionMask>& region = std::nullopt)
{
    const auto mg = margins(fm, lambda);
    return detail::region_sum(fm, region, [&](std::size_t j) { return fm.weight(j) * loss_value(loss, -mg[j]); });
}

/// Mass of misclassified points; f(x) = 0 predicts +1.
inline double classification_risk(const FeatureMatrix& fm, const Weighting& lambda,
                                  const std::optional<RegionMask>& region = std::nullopt)
{
    require(lambda.size() == fm.hypotheses(), ErrorKind::dimension_mismatch, "weighting length mismatch");
    return detail::region_sum(fm, region, [&](std::size_t j) {
        const auto row = fm.row(j);
        double f = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) f += lambda[i] * row[i];
        const int prediction = f >= 0.0 ? 1 : -1;
        return prediction != fm.label(j) ? fm.weight(j) : 0.0;
    });
}

namespace detail {

struct LabelMasses {
    double positive = 0.0;
    double negative = 0.0;
};

inline std::map<std::vector<double>, LabelMasses> masses_by_instance(const Sample& dist)
{
    std::map<std::vector<double>, LabelMasses> groups;
    for (std::size_t j = 0; j < dist.size(); ++j) {
        const auto x = dist.instance(j);
        auto& g = groups[std::vector<double>(x.begin(), x.end())];
        (dist.label(j) > 0 ? g.positive : g.negative) += dist.weight(j);
    }
    return groups;
}

} // namespace detail

/// Bayes classification risk of a finitely supported distribution: the minority label
/// mass summed over distinct instances.
inline double bayes_risk_discrete(const Sample& dist)
{
    double total = 0.0;
    for (const auto& [x, g] : detail::masses_by_instance(dist)) total += std::min(g.positive, g.negative);
    return total;
}

/// Search interval for the per-instance prediction in bayes_surrogate_risk_discrete.
inline constexpr double kBayesPredictionRadius = 60.0;

/// Infimum of the surrogate risk over all measurable predictors for a finitely
/// supported distribution: per distinct instance, minimizes the conditional risk over
/// the prediction value by golden-section search.
inline double bayes_surrogate_risk_discrete(const Sample& dist, const Loss& loss)
{
    double total = 0.0;
    for (const auto& [x, g] : detail::masses_by_instance(dist)) {
        auto conditional = [&](double v) {
            return g.positive * loss_value(loss, -v) + g.negative * loss_value(loss, v);
        };
        total += detail::golden_section_min(conditional, -kBayesPredictionRadius, kBayesPredictionRadius, 1e-10)
                     .value;
    }
    return total;
}

} // namespace hcb
