#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "hardcoreboost/error.hpp"

namespace hcb {

/// Coefficient vector lambda of a linear combination of hypotheses, with its l1 norm cached.
class Weighting {
public:
    Weighting() = default;
    explicit Weighting(std::size_t n) : coef_(n, 0.0) {}
    explicit Weighting(std::vector<double> coef) : coef_(std::move(coef)) { refresh(); }
    Weighting(std::initializer_list<double> coef) : coef_(coef) { refresh(); }

    std::size_t size() const noexcept { return coef_.size(); }
    double operator[](std::size_t i) const noexcept { return coef_[i]; }
    std::span<const double> values() const noexcept { return coef_; }
    const std::vector<double>& vector() const noexcept { return coef_; }
    double l1_norm() const noexcept { return l1_; }

    void set(std::size_t i, double v)
    {
        require(std::isfinite(v), ErrorKind::numerical_instability, "weighting entries must be finite");
        l1_ += std::abs(v) - std::abs(coef_[i]);
        coef_[i] = v;
        if (l1_ < 0.0) refresh();
    }

    void add(std::size_t i, double delta) { set(i, coef_[i] + delta); }

    Weighting scaled(double s) const
    {
        std::vector<double> out(coef_);
        for (double& v : out) v *= s;
        return Weighting(std::move(out));
    }

    /// Recomputes the cached norm from scratch (removes drift from incremental updates).
    void refresh()
    {
        l1_ = 0.0;
        for (double v : coef_) {
            require(std::isfinite(v), ErrorKind::numerical_instability, "weighting entries must be finite");
            l1_ += std::abs(v);
        }
    }

    friend bool operator==(const Weighting& a, const Weighting& b) { return a.coef_ == b.coef_; }

private:
    std::vector<double> coef_;
    double l1_ = 0.0;
};

} // namespace hcb
