#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hardcoreboost/error.hpp"
#include "hardcoreboost/matrix.hpp"

namespace hcb {

/// Finite labeled sample with nonnegative point masses summing to one.
class Sample {
public:
    Sample() = default;

    /// Uniform masses 1/m.
    Sample(DenseMatrix instances, std::vector<int> labels)
        : instances_(std::move(instances)), labels_(std::move(labels))
    {
        const std::size_t m = labels_.size();
        weights_.assign(m, m ? 1.0 / static_cast<double>(m) : 0.0);
        validate();
    }

    Sample(DenseMatrix instances, std::vector<int> labels, std::vector<double> weights)
        : instances_(std::move(instances)), labels_(std::move(labels)), weights_(std::move(weights))
    {
        validate();
    }

    /// Accepts any nonnegative masses with a positive total and rescales them to sum to one.
    static Sample normalized(DenseMatrix instances, std::vector<int> labels, std::vector<double> masses)
    {
        double total = 0.0;
        for (double w : masses) {
            require(std::isfinite(w) && w >= 0.0, ErrorKind::invalid_argument, "sample weights must be >= 0");
            total += w;
        }
        require(total > 0.0, ErrorKind::invalid_argument, "sample weights must have positive total");
        for (double& w : masses) w /= total;
        return Sample(std::move(instances), std::move(labels), std::move(masses));
    }

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t dim() const noexcept { return instances_.cols(); }
    std::span<const double> instance(std::size_t j) const noexcept { return instances_.row(j); }
    int label(std::size_t j) const noexcept { return labels_[j]; }
    double weight(std::size_t j) const noexcept { return weights_[j]; }

    const DenseMatrix& instances() const noexcept { return instances_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    void validate() const
    {
        require(instances_.rows() == labels_.size() && weights_.size() == labels_.size(),
                ErrorKind::dimension_mismatch, "instances, labels and weights must have equal length");
        // Neumaier summation keeps the check meaningful for large uniform samples.
        double total = 0.0, carry = 0.0;
        for (std::size_t j = 0; j < labels_.size(); ++j) {
            require(labels_[j] == 1 || labels_[j] == -1, ErrorKind::invalid_argument,
                    "labels must be -1 or +1 (row " + std::to_string(j) + ")");
            require(std::isfinite(weights_[j]) && weights_[j] >= 0.0, ErrorKind::invalid_argument,
                    "sample weights must be >= 0");
            const double next = total + weights_[j];
            carry += std::abs(total) >= weights_[j] ? (total - next) + weights_[j] : (weights_[j] - next) + total;
            total = next;
        }
        if (!labels_.empty())
            require(std::abs(total + carry - 1.0) <= 1e-12, ErrorKind::invalid_argument, "sample weights must sum to 1");
    }

    DenseMatrix instances_;
    std::vector<int> labels_;
    std::vector<double> weights_;
};

/// Hypothesis outputs h_i(x_j) on a sample: one row per point, one column per hypothesis,
/// carrying the sample's labels and masses along.
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    FeatureMatrix(DenseMatrix values, std::vector<int> labels, std::vector<double> weights)
        : values_(std::move(values)), labels_(std::move(labels)), weights_(std::move(weights))
    {
        require(values_.rows() == labels_.size() && weights_.size() == labels_.size(),
                ErrorKind::dimension_mismatch, "feature rows, labels and weights must have equal length");
        for (double v : values_.data())
            require(std::isfinite(v) && std::abs(v) <= 1.0, ErrorKind::invalid_argument,
                    "hypothesis outputs must lie in [-1, +1]");
        for (int y : labels_)
            require(y == 1 || y == -1, ErrorKind::invalid_argument, "labels must be -1 or +1");
        for (double w : weights_)
            require(std::isfinite(w) && w >= 0.0, ErrorKind::invalid_argument, "weights must be >= 0");
    }

    /// Uniform masses.
    FeatureMatrix(DenseMatrix values, std::vector<int> labels)
        : FeatureMatrix(std::move(values), labels,
                        std::vector<double>(labels.size(), labels.empty() ? 0.0 : 1.0 / labels.size())) {}

    std::size_t points() const noexcept { return values_.rows(); }
    std::size_t hypotheses() const noexcept { return values_.cols(); }
    double operator()(std::size_t j, std::size_t i) const noexcept { return values_(j, i); }
    std::span<const double> row(std::size_t j) const noexcept { return values_.row(j); }
    int label(std::size_t j) const noexcept { return labels_[j]; }
    double weight(std::size_t j) const noexcept { return weights_[j]; }

    const DenseMatrix& values() const noexcept { return values_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    /// Rows listed in `rows`, masses kept as-is (not renormalized).
    FeatureMatrix restricted(std::span<const std::size_t> rows) const
    {
        DenseMatrix v(rows.size(), hypotheses());
        std::vector<int> y;
        std::vector<double> w;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            require(rows[k] < points(), ErrorKind::dimension_mismatch, "row index out of range");
            for (std::size_t i = 0; i < hypotheses(); ++i) v(k, i) = values_(rows[k], i);
            y.push_back(labels_[rows[k]]);
            w.push_back(weights_[rows[k]]);
        }
        return FeatureMatrix(std::move(v), std::move(y), std::move(w));
    }

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

private:
    DenseMatrix values_;
    std::vector<int> labels_;
    std::vector<double> weights_;
};

} // namespace hcb
