#pragma once

// Dense two-phase bounded-variable primal simplex with Bland's rule.
//
// Problem form: maximize c'x subject to A x = r and lower <= x <= upper, where
// bounds may be infinite. Internally every column is shifted, flipped or split so
// that all variables live in [0, u] with u possibly +inf; nonbasic variables sit at
// one of their bounds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "hardcoreboost/error.hpp"
#include "hardcoreboost/matrix.hpp"

namespace hcb {

struct LinearProgram {
    DenseMatrix constraints;       // A, one row per equality
    std::vector<double> rhs;       // r
    std::vector<double> objective; // c, maximized
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t variables() const noexcept { return objective.size(); }
    std::size_t equalities() const noexcept { return rhs.size(); }

    /// Adds a variable with the given bounds and objective coefficient; returns its index.
    std::size_t add_variable(double lo, double hi, double cost = 0.0)
    {
        DenseMatrix widened(constraints.rows(), constraints.cols() + 1);
        for (std::size_t r = 0; r < constraints.rows(); ++r)
            for (std::size_t c = 0; c < constraints.cols(); ++c) widened(r, c) = constraints(r, c);
        constraints = std::move(widened);
        objective.push_back(cost);
        lower.push_back(lo);
        upper.push_back(hi);
        return objective.size() - 1;
    }

    /// Appends the equality sum_k coef[k] x_k = value (coef must cover every variable).
    void add_equality(const std::vector<double>& coef, double value)
    {
        require(coef.size() == variables(), ErrorKind::dimension_mismatch, "equality row has wrong length");
        if (constraints.rows() == 0) constraints = DenseMatrix(0, variables());
        constraints.append_row(coef);
        rhs.push_back(value);
    }

    void validate() const
    {
        const std::size_t n = variables();
        require(lower.size() == n && upper.size() == n, ErrorKind::dimension_mismatch,
                "bounds must cover every variable");
        require(constraints.rows() == rhs.size(), ErrorKind::dimension_mismatch,
                "constraint matrix row count must equal rhs length");
        require(rhs.empty() || constraints.cols() == n, ErrorKind::dimension_mismatch,
                "constraint matrix column count must equal variable count");
        for (std::size_t k = 0; k < n; ++k) {
            require(!std::isnan(lower[k]) && !std::isnan(upper[k]) && lower[k] <= upper[k],
                    ErrorKind::invalid_argument, "variable bounds must satisfy lower <= upper");
            require(lower[k] < std::numeric_limits<double>::infinity() &&
                        upper[k] > -std::numeric_limits<double>::infinity(),
                    ErrorKind::invalid_argument, "variable bounds must admit a finite value");
            require(std::isfinite(objective[k]), ErrorKind::invalid_argument, "objective must be finite");
        }
        for (double v : constraints.data()) require(std::isfinite(v), ErrorKind::invalid_argument, "A must be finite");
        for (double v : rhs) require(std::isfinite(v), ErrorKind::invalid_argument, "rhs must be finite");
    }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s)
{
    switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    }
    return "unknown";
}

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    double value = 0.0;
    std::vector<double> x;
    std::size_t iterations = 0;
};

struct LpOptions {
    double feasibility_tol = 1e-8;
    double pivot_tol = 1e-11;
    double optimality_tol = 1e-9;
    std::size_t refactor_interval = 64;
    std::ostream* tableau_dump = nullptr;
};

namespace detail {

class BoundedSimplex {
public:
    BoundedSimplex(const LinearProgram& lp, const LpOptions& opt) : lp_(lp), opt_(opt) { build(); }

    LpSolution run()
    {
        LpSolution out;
        // Phase 1: drive the artificials to zero.
        std::vector<double> phase1(cols_, 0.0);
        for (std::size_t a = structural_; a < cols_; ++a) phase1[a] = -1.0;
        iterate(phase1, out.iterations);
        refactor();
        double infeasibility = 0.0;
        for (std::size_t r = 0; r < rows_; ++r)
            if (basis_[r] >= structural_) infeasibility += std::max(0.0, xb_[r]);
        double scale = 1.0;
        for (double v : rhs_) scale = std::max(scale, std::abs(v));
        if (infeasibility > opt_.feasibility_tol * scale) {
            out.status = LpStatus::infeasible;
            return out;
        }
        for (std::size_t a = structural_; a < cols_; ++a) upper_[a] = 0.0;

        std::vector<double> phase2(cols_, 0.0);
        std::copy(cost_.begin(), cost_.end(), phase2.begin());
        if (!iterate(phase2, out.iterations)) {
            out.status = LpStatus::unbounded;
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
        refactor();
        out.status = LpStatus::optimal;
        out.x = recover();
        out.value = 0.0;
        for (std::size_t k = 0; k < out.x.size(); ++k) out.value += lp_.objective[k] * out.x[k];
        return out;
    }

private:
    enum class State : unsigned char { basic, at_lower, at_upper };
    enum class Map : unsigned char { shift, flip, split_pos, split_neg };

    struct Column {
        std::size_t original;
        Map map;
    };

    void build()
    {
        const double inf = std::numeric_limits<double>::infinity();
        const std::size_t n = lp_.variables();
        rows_ = lp_.equalities();
        for (std::size_t k = 0; k < n; ++k) {
            const bool lo_finite = std::isfinite(lp_.lower[k]);
            const bool hi_finite = std::isfinite(lp_.upper[k]);
            if (lo_finite) {
                columns_.push_back({k, Map::shift});
                upper_.push_back(hi_finite ? lp_.upper[k] - lp_.lower[k] : inf);
            } else if (hi_finite) {
                columns_.push_back({k, Map::flip});
                upper_.push_back(inf);
            } else {
                columns_.push_back({k, Map::split_pos});
                upper_.push_back(inf);
                columns_.push_back({k, Map::split_neg});
                upper_.push_back(inf);
            }
        }
        structural_ = columns_.size();
        cols_ = structural_ + rows_;
        for (std::size_t a = 0; a < rows_; ++a) upper_.push_back(inf);

        full_ = DenseMatrix(rows_, cols_);
        rhs_.assign(rows_, 0.0);
        cost_.assign(structural_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            double value = lp_.rhs[r];
            for (std::size_t c = 0; c < structural_; ++c) {
                const auto [k, map] = columns_[c];
                const double a = lp_.constraints(r, k);
                switch (map) {
                case Map::shift: full_(r, c) = a; value -= a * lp_.lower[k]; break;
                case Map::flip: full_(r, c) = -a; value -= a * lp_.upper[k]; break;
                case Map::split_pos: full_(r, c) = a; break;
                case Map::split_neg: full_(r, c) = -a; break;
                }
            }
            const double sign = value < 0.0 ? -1.0 : 1.0;
            for (std::size_t c = 0; c < structural_; ++c) full_(r, c) *= sign;
            rhs_[r] = sign * value;
            full_(r, structural_ + r) = 1.0;
        }
        for (std::size_t c = 0; c < structural_; ++c) {
            const auto [k, map] = columns_[c];
            const double ck = lp_.objective[k];
            cost_[c] = (map == Map::flip || map == Map::split_neg) ? -ck : ck;
        }

        tableau_ = full_;
        xb_ = rhs_;
        basis_.resize(rows_);
        state_.assign(cols_, State::at_lower);
        for (std::size_t r = 0; r < rows_; ++r) {
            basis_[r] = structural_ + r;
            state_[structural_ + r] = State::basic;
        }
    }

    // Returns false when the objective is unbounded along an improving column.
    bool iterate(const std::vector<double>& cost, std::size_t& iterations)
    {
        const std::size_t limit = 50 * (rows_ + cols_) + 10000;
        std::size_t since_refactor = 0;
        for (;;) {
            // Bland: lowest-index improving column.
            std::size_t entering = cols_;
            double direction = 0.0;
            for (std::size_t j = 0; j < cols_ && entering == cols_; ++j) {
                if (state_[j] == State::basic || upper_[j] == 0.0) continue;
                double d = cost[j];
                for (std::size_t r = 0; r < rows_; ++r) d -= cost[basis_[r]] * tableau_(r, j);
                if (state_[j] == State::at_lower && d > opt_.optimality_tol) {
                    entering = j;
                    direction = 1.0;
                } else if (state_[j] == State::at_upper && d < -opt_.optimality_tol) {
                    entering = j;
                    direction = -1.0;
                }
            }
            if (entering == cols_) return true;

            // Ratio test; ties go to the lowest basic variable index.
            double step = upper_[entering];
            std::size_t leave_row = rows_;
            bool leave_at_upper = false;
            for (std::size_t r = 0; r < rows_; ++r) {
                const double a = direction * tableau_(r, entering);
                double limit_r;
                bool to_upper;
                if (a > opt_.pivot_tol) {
                    limit_r = std::max(0.0, xb_[r]) / a;
                    to_upper = false;
                } else if (a < -opt_.pivot_tol && std::isfinite(upper_[basis_[r]])) {
                    limit_r = std::max(0.0, upper_[basis_[r]] - xb_[r]) / (-a);
                    to_upper = true;
                } else {
                    continue;
                }
                const double slack = std::isfinite(step) ? 1e-12 * std::max(1.0, step) : 0.0;
                const bool better = limit_r < step - slack;
                const bool tie = !better && leave_row != rows_ && limit_r <= step + slack &&
                                 basis_[r] < basis_[leave_row];
                if (better || tie) {
                    step = limit_r;
                    leave_row = r;
                    leave_at_upper = to_upper;
                }
            }
            if (!std::isfinite(step)) return false;

            for (std::size_t r = 0; r < rows_; ++r) xb_[r] -= direction * step * tableau_(r, entering);
            if (leave_row == rows_) {
                state_[entering] = direction > 0 ? State::at_upper : State::at_lower;
            } else {
                const double entering_value = direction > 0 ? step : upper_[entering] - step;
                pivot(leave_row, entering);
                state_[basis_[leave_row]] = leave_at_upper ? State::at_upper : State::at_lower;
                basis_[leave_row] = entering;
                state_[entering] = State::basic;
                xb_[leave_row] = entering_value;
            }
            ++iterations;
            if (opt_.tableau_dump) dump(*opt_.tableau_dump, iterations);
            if (++since_refactor >= opt_.refactor_interval) {
                refactor();
                since_refactor = 0;
            }
            if (iterations > limit)
                throw Error(ErrorKind::numerical_instability, "simplex iteration limit exceeded");
        }
    }

    void pivot(std::size_t row, std::size_t col)
    {
        const double p = tableau_(row, col);
        for (std::size_t c = 0; c < cols_; ++c) tableau_(row, c) /= p;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == row) continue;
            const double f = tableau_(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < cols_; ++c) tableau_(r, c) -= f * tableau_(row, c);
        }
    }

    // Rebuilds B^-1 A and the basic values from the original data.
    void refactor()
    {
        if (rows_ == 0) return;
        const std::size_t width = cols_ + 1;
        DenseMatrix aug(rows_, rows_ + width);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t k = 0; k < rows_; ++k) aug(r, k) = full_(r, basis_[k]);
            double v = rhs_[r];
            for (std::size_t c = 0; c < cols_; ++c) {
                aug(r, rows_ + c) = full_(r, c);
                if (state_[c] == State::at_upper) v -= full_(r, c) * upper_[c];
            }
            aug(r, rows_ + cols_) = v;
        }
        for (std::size_t k = 0; k < rows_; ++k) {
            std::size_t best = k;
            for (std::size_t r = k + 1; r < rows_; ++r)
                if (std::abs(aug(r, k)) > std::abs(aug(best, k))) best = r;
            if (std::abs(aug(best, k)) < opt_.pivot_tol) {
                if (++singular_refactors_ >= 3)
                    throw Error(ErrorKind::numerical_instability, "basis matrix repeatedly singular");
                return; // keep the incrementally updated tableau
            }
            if (best != k)
                for (std::size_t c = 0; c < aug.cols(); ++c) std::swap(aug(best, c), aug(k, c));
            const double p = aug(k, k);
            for (std::size_t c = 0; c < aug.cols(); ++c) aug(k, c) /= p;
            for (std::size_t r = 0; r < rows_; ++r) {
                if (r == k) continue;
                const double f = aug(r, k);
                if (f == 0.0) continue;
                for (std::size_t c = 0; c < aug.cols(); ++c) aug(r, c) -= f * aug(k, c);
            }
        }
        // Row k of the eliminated system now belongs to basis_[k].
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) tableau_(r, c) = aug(r, rows_ + c);
            xb_[r] = aug(r, rows_ + cols_);
        }
    }

    std::vector<double> recover() const
    {
        std::vector<double> value(cols_, 0.0);
        for (std::size_t c = 0; c < cols_; ++c)
            if (state_[c] == State::at_upper) value[c] = upper_[c];
        for (std::size_t r = 0; r < rows_; ++r)
            value[basis_[r]] = std::clamp(xb_[r], 0.0, upper_[basis_[r]]);
        std::vector<double> x(lp_.variables(), 0.0);
        for (std::size_t c = 0; c < structural_; ++c) {
            const auto [k, map] = columns_[c];
            switch (map) {
            case Map::shift: x[k] = lp_.lower[k] + value[c]; break;
            case Map::flip: x[k] = lp_.upper[k] - value[c]; break;
            case Map::split_pos: x[k] += value[c]; break;
            case Map::split_neg: x[k] -= value[c]; break;
            }
        }
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], lp_.lower[k], lp_.upper[k]);
        return x;
    }

    void dump(std::ostream& os, std::size_t iteration) const
    {
        os << "iteration " << iteration << "\n";
        for (std::size_t r = 0; r < rows_; ++r) {
            os << "  x" << basis_[r] << " = " << xb_[r] << " |";
            for (std::size_t c = 0; c < cols_; ++c) os << ' ' << tableau_(r, c);
            os << "\n";
        }
    }

    const LinearProgram& lp_;
    const LpOptions& opt_;
    std::vector<Column> columns_;
    std::size_t rows_ = 0, structural_ = 0, cols_ = 0;
    DenseMatrix full_, tableau_;
    std::vector<double> rhs_, cost_, upper_, xb_;
    std::vector<std::size_t> basis_;
    std::vector<State> state_;
    int singular_refactors_ = 0;
};

} // namespace detail

inline LpSolution solve(const LinearProgram& lp, const LpOptions& options = {})
{
    lp.validate();
    return detail::BoundedSimplex(lp, options).run();
}

} // namespace hcb
