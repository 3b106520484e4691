#pragma once

// Finite hypothesis classes H = {h_1, ..., h_n} with outputs in [-1, +1] and the
// linear operator (H lambda)(x) = sum_i lambda_i h_i(x).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "hardcoreboost/error.hpp"
#include "hardcoreboost/matrix.hpp"
#include "hardcoreboost/sample.hpp"
#include "hardcoreboost/weighting.hpp"

namespace hcb {

/// Largest lattice class the library will build.
inline constexpr double kMaxLatticeCells = 1e6;

/// h_i(x) = x_i; inputs are expected in [-1, +1]^d.
struct Projections {
    std::size_t dim;
};

/// Indicators of the half-open subcubes of side 1/i tiling [-i, i)^d.
struct LatticeCells {
    int resolution;
    std::size_t dim;

    std::size_t cells_per_axis() const noexcept
    {
        return 2 * static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
    }
};

/// Lookup table keyed by instance: row k of `features` holds h(instances row k).
struct ExplicitTable {
    DenseMatrix instances;
    DenseMatrix features;
};

class HypothesisClass {
public:
    static HypothesisClass projections(std::size_t dim)
    {
        require(dim >= 1, ErrorKind::invalid_argument, "projection class needs dimension >= 1");
        return HypothesisClass(Projections{dim}, dim);
    }

    static HypothesisClass lattice(int resolution, std::size_t dim)
    {
        require(resolution >= 1 && dim >= 1, ErrorKind::invalid_argument,
                "lattice class needs resolution >= 1 and dimension >= 1");
        const double cells = std::pow(2.0 * resolution * resolution, static_cast<double>(dim));
        require(cells <= kMaxLatticeCells, ErrorKind::invalid_argument,
                "lattice class with " + std::to_string(cells) + " cells exceeds the 1e6 cell limit");
        const LatticeCells spec{resolution, dim};
        std::size_t n = 1;
        for (std::size_t k = 0; k < dim; ++k) n *= spec.cells_per_axis();
        return HypothesisClass(spec, n);
    }

    static HypothesisClass explicit_table(DenseMatrix instances, DenseMatrix features)
    {
        require(instances.rows() == features.rows() && instances.rows() > 0 && features.cols() > 0,
                ErrorKind::dimension_mismatch, "explicit table needs one feature row per instance");
        for (double v : features.data())
            require(std::isfinite(v) && std::abs(v) <= 1.0, ErrorKind::invalid_argument,
                    "explicit hypothesis outputs must lie in [-1, +1]");
        const std::size_t n = features.cols();
        HypothesisClass cls(ExplicitTable{std::move(instances), std::move(features)}, n);
        const auto& table = std::get<ExplicitTable>(cls.spec_);
        for (std::size_t k = 0; k < table.instances.rows(); ++k) {
            const auto row = table.instances.row(k);
            cls.index_.emplace(std::vector<double>(row.begin(), row.end()), k);
        }
        return cls;
    }

    std::size_t size() const noexcept { return n_; }

    std::size_t input_dim() const noexcept
    {
        return std::visit(
            [](const auto& s) -> std::size_t {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, ExplicitTable>) return s.instances.cols();
                else return s.dim;
            },
            spec_);
    }

    const std::variant<Projections, LatticeCells, ExplicitTable>& spec() const noexcept { return spec_; }

    /// Writes h_1(x), ..., h_n(x) into `out`.
    void evaluate_all(std::span<const double> x, std::span<double> out) const
    {
        require(x.size() == input_dim(), ErrorKind::dimension_mismatch,
                "instance has dimension " + std::to_string(x.size()) + ", class expects " +
                    std::to_string(input_dim()));
        require(out.size() == n_, ErrorKind::dimension_mismatch, "output span has wrong length");
        std::visit([&](const auto& s) { fill(s, x, out); }, spec_);
    }

    double evaluate(std::size_t index, std::span<const double> x) const
    {
        require(index < n_, ErrorKind::dimension_mismatch, "hypothesis index out of range");
        std::vector<double> out(n_);
        evaluate_all(x, out);
        return out[index];
    }

    /// Flat index of the lattice cell holding x, or size() when x lies outside [-i, i)^d.
    std::size_t lattice_cell(std::span<const double> x) const
    {
        const auto* s = std::get_if<LatticeCells>(&spec_);
        require(s != nullptr, ErrorKind::invalid_argument, "not a lattice class");
        require(x.size() == s->dim, ErrorKind::dimension_mismatch, "instance dimension mismatch");
        const std::size_t per_axis = s->cells_per_axis();
        const double i = s->resolution;
        std::size_t flat = 0, stride = 1;
        for (std::size_t c = 0; c < s->dim; ++c) {
            if (!std::isfinite(x[c])) return n_;
            // Cell k holds x iff k - i^2 <= x i < k + 1 - i^2, decided exactly.
            double pos = std::floor((x[c] + i) * i);
            if (!(pos >= -1.0 && pos <= static_cast<double>(per_axis))) return n_;
            while (!scaled_at_least(x[c], i, pos - i * i)) pos -= 1.0;
            while (scaled_at_least(x[c], i, pos + 1.0 - i * i)) pos += 1.0;
            if (!(pos >= 0.0 && pos < static_cast<double>(per_axis))) return n_;
            flat += static_cast<std::size_t>(pos) * stride;
            stride *= per_axis;
        }
        return flat;
    }

private:
    /// Exact test of x * i >= bound for an integer-valued bound.
    static bool scaled_at_least(double x, double i, double bound)
    {
        const double p = x * i;
        if (p != bound) return p > bound;
        return std::fma(x, i, -p) >= 0.0;
    }

    template <typename Spec>
    HypothesisClass(Spec spec, std::size_t n) : spec_(std::move(spec)), n_(n)
    {
        require(n_ > 0, ErrorKind::invalid_argument, "hypothesis class must be nonempty");
    }

    void fill(const Projections&, std::span<const double> x, std::span<double> out) const
    {
        for (std::size_t i = 0; i < n_; ++i) {
            require(std::abs(x[i]) <= 1.0, ErrorKind::invalid_argument,
                    "projection inputs must lie in [-1, +1]");
            out[i] = x[i];
        }
    }

    void fill(const LatticeCells&, std::span<const double> x, std::span<double> out) const
    {
        std::fill(out.begin(), out.end(), 0.0);
        const std::size_t cell = lattice_cell(x);
        if (cell < n_) out[cell] = 1.0;
    }

    void fill(const ExplicitTable& table, std::span<const double> x, std::span<double> out) const
    {
        const auto it = index_.find(std::vector<double>(x.begin(), x.end()));
        require(it != index_.end(), ErrorKind::invalid_argument, "instance not present in explicit table");
        const auto row = table.features.row(it->second);
        std::copy(row.begin(), row.end(), out.begin());
    }

    std::variant<Projections, LatticeCells, ExplicitTable> spec_;
    std::size_t n_;
    std::map<std::vector<double>, std::size_t> index_;
};

/// (H lambda)(x).
inline double apply(const HypothesisClass& cls, const Weighting& lambda, std::span<const double> x)
{
    require(lambda.size() == cls.size(), ErrorKind::dimension_mismatch,
            "weighting has length " + std::to_string(lambda.size()) + ", class has " +
                std::to_string(cls.size()) + " hypotheses");
    std::vector<double> h(cls.size());
    cls.evaluate_all(x, h);
    double f = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) f += lambda[i] * h[i];
    return f;
}

inline FeatureMatrix materialize(const HypothesisClass& cls, const Sample& sample)
{
    require(sample.size() > 0, ErrorKind::invalid_argument, "cannot materialize on an empty sample");
    require(sample.dim() == cls.input_dim(), ErrorKind::dimension_mismatch,
            "sample dimension " + std::to_string(sample.dim()) + " does not match class dimension " +
                std::to_string(cls.input_dim()));
    DenseMatrix values(sample.size(), cls.size());
    for (std::size_t j = 0; j < sample.size(); ++j) cls.evaluate_all(sample.instance(j), values.row(j));
    return FeatureMatrix(std::move(values), sample.labels(), sample.weights());
}

/// Nested lattice classes H_1, ..., H_{i_max} used for structural risk minimization.
inline std::vector<HypothesisClass> lsrm_schedule(std::size_t dim, int i_max)
{
    require(dim >= 1 && i_max >= 1, ErrorKind::invalid_argument, "lsrm schedule needs d >= 1, i_max >= 1");
    std::vector<HypothesisClass> classes;
    for (int i = 1; i <= i_max; ++i) classes.push_back(HypothesisClass::lattice(i, dim));
    return classes;
}

/// Parses "proj:<d>" and "lattice:<i>x<d>". Explicit tables ("explicit:<path>") are
/// loaded by the io layer.
inline HypothesisClass parse_class_spec(const std::string& text)
{
    auto to_int = [&](const std::string& s) {
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(s, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        require(used == s.size() && !s.empty(), ErrorKind::invalid_argument, "malformed class spec: " + text);
        return v;
    };
    if (text.starts_with("proj:")) {
        const long d = to_int(text.substr(5));
        require(d >= 1, ErrorKind::invalid_argument, "projection dimension must be >= 1");
        return HypothesisClass::projections(static_cast<std::size_t>(d));
    }
    if (text.starts_with("lattice:")) {
        const std::string body = text.substr(8);
        const auto x = body.find('x');
        require(x != std::string::npos, ErrorKind::invalid_argument, "lattice spec must be lattice:<i>x<d>");
        const long i = to_int(body.substr(0, x));
        const long d = to_int(body.substr(x + 1));
        require(i >= 1 && d >= 1, ErrorKind::invalid_argument, "lattice spec needs i >= 1 and d >= 1");
        return HypothesisClass::lattice(static_cast<int>(i), static_cast<std::size_t>(d));
    }
    throw Error(ErrorKind::invalid_argument, "unknown class spec: " + text);
}

} // namespace hcb
