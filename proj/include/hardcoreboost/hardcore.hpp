#pragma once

// Hard core of an empirical linear classification problem.
//
// The dual side is the largest support of a nonnegative reweighting p that
// decorrelates every hypothesis (sum_j p_j y_j h_i(x_j) = 0 for all i). Each point's
// membership is decided by the LP max p_j over {A p = 0, 0 <= p <= 1}; the sum of the
// per-point optimizers is positive exactly on the core. The primal side is a
// weighting with zero margin on the core and a positive margin floor t everywhere
// else. Zero-mass points are never placed in the core and carry no constraints.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hardcoreboost/detail/parallel.hpp"
#include "hardcoreboost/error.hpp"
#include "hardcoreboost/lp.hpp"
#include "hardcoreboost/risk.hpp"
#include "hardcoreboost/sample.hpp"
#include "hardcoreboost/weighting.hpp"

namespace hcb {

struct HardcoreOptions {
    double core_threshold = 1e-7; // per-point LP optimum above this puts the point in the core
    double certificate_tol = 1e-7;
    LpOptions lp{};
};

struct CertificateChecks {
    double decorrelation_max = 0.0;           // max_i |sum_j p_j y_j h_i(x_j)|
    double core_margin_max = 0.0;             // max_{j in core} |y_j (H lambda)(x_j)|
    double complement_margin_min = std::numeric_limits<double>::infinity();
    bool support_matches_core = true;
    bool passed = true;
};

struct HardCoreCertificate {
    RegionMask core;
    std::vector<double> p;                        // decorrelating masses, max entry 1
    Weighting separator;                          // ||lambda||_1 <= 1
    double margin = std::numeric_limits<double>::infinity(); // +inf when the complement is empty
    std::vector<double> point_optima;             // LP optimum of max p_j per point
    std::vector<std::vector<double>> generators;  // distinct per-point LP optimizers
    CertificateChecks checks;

    double core_mass(const FeatureMatrix& fm) const
    {
        double mass = 0.0;
        for (std::size_t j : core.indices()) mass += fm.weight(j);
        return mass;
    }
};

struct SeparatorResult {
    Weighting lambda;
    double margin; // +inf when the complement is empty
};

namespace detail {

inline std::vector<std::size_t> nonzero_hypotheses(const FeatureMatrix& fm)
{
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fm.hypotheses(); ++i) {
        bool any = false;
        for (std::size_t j = 0; j < fm.points() && !any; ++j)
            any = fm.weight(j) > 0.0 && fm(j, i) != 0.0;
        if (any) rows.push_back(i);
    }
    return rows;
}

/// {A p = 0, 0 <= p <= 1} with A_{ij} = y_j h_i(x_j); zero-mass points pinned to 0.
inline LinearProgram decorrelation_polytope(const FeatureMatrix& fm)
{
    LinearProgram lp;
    const std::size_t m = fm.points();
    lp.objective.assign(m, 0.0);
    lp.lower.assign(m, 0.0);
    lp.upper.resize(m);
    for (std::size_t j = 0; j < m; ++j) lp.upper[j] = fm.weight(j) > 0.0 ? 1.0 : 0.0;
    lp.constraints = DenseMatrix(0, m);
    std::vector<double> row(m);
    for (std::size_t i : nonzero_hypotheses(fm)) {
        for (std::size_t j = 0; j < m; ++j) row[j] = fm.label(j) * fm(j, i);
        lp.constraints.append_row(row);
        lp.rhs.push_back(0.0);
    }
    return lp;
}

} // namespace detail

/// Largest margin floor t achievable with zero margins on the core, ||lambda||_1 <= 1.
inline SeparatorResult separator_certificate(const FeatureMatrix& fm, const RegionMask& core,
                                             const LpOptions& lp_options = {})
{
    const std::size_t n = fm.hypotheses();
    require(core.empty() || core.indices().back() < fm.points(), ErrorKind::dimension_mismatch,
            "core does not fit the feature matrix");
    std::vector<std::size_t> outside;
    for (std::size_t j = 0; j < fm.points(); ++j)
        if (fm.weight(j) > 0.0 && !core.contains(j)) outside.push_back(j);
    if (outside.empty()) return {Weighting(n), std::numeric_limits<double>::infinity()};

    // Variables: lambda+ (n), lambda- (n), norm slack, t, one surplus per outside point.
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t slack = 2 * n, t_col = 2 * n + 1, surplus0 = 2 * n + 2;
    const std::size_t vars = surplus0 + outside.size();
    LinearProgram lp;
    lp.objective.assign(vars, 0.0);
    lp.objective[t_col] = 1.0;
    lp.lower.assign(vars, 0.0);
    lp.upper.assign(vars, inf);
    lp.lower[t_col] = -inf;
    lp.constraints = DenseMatrix(0, vars);

    std::vector<double> row(vars, 0.0);
    for (std::size_t k = 0; k <= slack; ++k) row[k] = 1.0;
    lp.constraints.append_row(row);
    lp.rhs.push_back(1.0);

    auto margin_row = [&](std::size_t j) {
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = fm.label(j) * fm(j, i);
            row[n + i] = -row[i];
        }
    };
    for (std::size_t j : core.indices()) {
        if (fm.weight(j) <= 0.0) continue;
        margin_row(j);
        lp.constraints.append_row(row);
        lp.rhs.push_back(0.0);
    }
    for (std::size_t k = 0; k < outside.size(); ++k) {
        margin_row(outside[k]);
        row[t_col] = -1.0;
        row[surplus0 + k] = -1.0;
        lp.constraints.append_row(row);
        lp.rhs.push_back(0.0);
    }

    const LpSolution sol = solve(lp, lp_options);
    require(sol.status == LpStatus::optimal, ErrorKind::inconsistency,
            std::string("separator LP ended ") + to_string(sol.status));
    std::vector<double> coef(n);
    for (std::size_t i = 0; i < n; ++i) coef[i] = sol.x[i] - sol.x[n + i];
    Weighting lambda(std::move(coef));
    const auto mg = margins(fm, lambda);
    double t = inf;
    for (std::size_t j : outside) t = std::min(t, mg[j]);
    require(t > 1e-9, ErrorKind::inconsistency,
            "no positive margin on the complement of the core (t = " + std::to_string(t) + ")");
    return {std::move(lambda), t};
}

/// Re-checks every certificate invariant against the feature matrix.
inline CertificateChecks check_certificate(const FeatureMatrix& fm, const HardCoreCertificate& cert,
                                           double tol = 1e-7)
{
    CertificateChecks c;
    require(cert.p.size() == fm.points(), ErrorKind::dimension_mismatch, "certificate p has wrong length");
    for (std::size_t i = 0; i < fm.hypotheses(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < fm.points(); ++j) s += cert.p[j] * fm.label(j) * fm(j, i);
        c.decorrelation_max = std::max(c.decorrelation_max, std::abs(s));
    }
    for (std::size_t j = 0; j < fm.points(); ++j) {
        const bool in_core = cert.core.contains(j);
        if (in_core != (cert.p[j] > 0.0) || cert.p[j] < 0.0) c.support_matches_core = false;
    }
    const auto mg = margins(fm, cert.separator);
    for (std::size_t j = 0; j < fm.points(); ++j) {
        if (fm.weight(j) <= 0.0) continue;
        if (cert.core.contains(j)) c.core_margin_max = std::max(c.core_margin_max, std::abs(mg[j]));
        else c.complement_margin_min = std::min(c.complement_margin_min, mg[j]);
    }
    const bool separator_ok = !std::isfinite(c.complement_margin_min) ||
                              (c.complement_margin_min > 0.0 && c.complement_margin_min >= cert.margin - 1e-9);
    c.passed = c.decorrelation_max <= tol && c.support_matches_core && c.core_margin_max <= tol &&
               separator_ok && cert.separator.l1_norm() <= 1.0 + 1e-9;
    return c;
}

inline HardCoreCertificate compute_hardcore(const FeatureMatrix& fm, const HardcoreOptions& options = {})
{
    const std::size_t m = fm.points();
    require(m > 0, ErrorKind::invalid_argument, "hard core needs a nonempty sample");
    const LinearProgram polytope = detail::decorrelation_polytope(fm);

    std::vector<LpSolution> solutions(m);
    auto solve_point = [&](std::size_t j) {
        if (fm.weight(j) <= 0.0) {
            solutions[j].status = LpStatus::optimal;
            solutions[j].x.assign(m, 0.0);
            return;
        }
        LinearProgram lp = polytope;
        lp.objective[j] = 1.0;
        solutions[j] = solve(lp, options.lp);
        // p = 0 is always feasible and the box bounds the objective.
        require(solutions[j].status == LpStatus::optimal, ErrorKind::inconsistency,
                "per-point decorrelation LP did not reach an optimum");
    };
    if (options.lp.tableau_dump) {
        // Keep the dump readable: one LP after another.
        for (std::size_t j = 0; j < m; ++j) {
            *options.lp.tableau_dump << "# point " << j << '\n';
            solve_point(j);
        }
    } else {
        detail::parallel_for(m, solve_point);
    }

    HardCoreCertificate cert;
    cert.point_optima.resize(m);
    std::vector<std::size_t> core;
    for (std::size_t j = 0; j < m; ++j) {
        cert.point_optima[j] = fm.weight(j) > 0.0 ? solutions[j].value : 0.0;
        if (cert.point_optima[j] > options.core_threshold) core.push_back(j);
    }
    cert.core = RegionMask(core, m);

    cert.p.assign(m, 0.0);
    for (std::size_t j : core) {
        std::vector<double> g = solutions[j].x;
        for (std::size_t k = 0; k < m; ++k)
            if (!cert.core.contains(k)) g[k] = 0.0;
        for (std::size_t k = 0; k < m; ++k) cert.p[k] += g[k];
        if (std::find(cert.generators.begin(), cert.generators.end(), g) == cert.generators.end())
            cert.generators.push_back(std::move(g));
    }
    const double top = cert.p.empty() ? 0.0 : *std::max_element(cert.p.begin(), cert.p.end());
    if (top > 0.0)
        for (double& v : cert.p) v /= top;

    SeparatorResult sep = separator_certificate(fm, cert.core, options.lp);
    cert.separator = std::move(sep.lambda);
    cert.margin = sep.margin;
    cert.checks = check_certificate(fm, cert, options.certificate_tol);
    if (!cert.checks.passed)
        throw Error(ErrorKind::inconsistency,
                    "hard-core certificate failed verification (decorrelation " +
                        std::to_string(cert.checks.decorrelation_max) + ", core margin " +
                        std::to_string(cert.checks.core_margin_max) + ")");
    return cert;
}

struct DichotomyReport {
    std::size_t trials = 0;
    std::size_t abstaining = 0; // every core margin zero
    std::size_t erring = 0;     // some core margin negative
    std::size_t violations = 0; // neither
};

/// For random directions lambda, checks that lambda either abstains on the whole core
/// or errs on some core point.
inline DichotomyReport verify_dichotomy(const FeatureMatrix& fm, const RegionMask& core, std::size_t trials,
                                        std::uint64_t seed, double tol = 1e-9)
{
    DichotomyReport report;
    report.trials = trials;
    if (core.empty()) {
        report.abstaining = trials;
        return report;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = fm.hypotheses();
    std::vector<double> coef(n);
    for (std::size_t t = 0; t < trials; ++t) {
        double norm = 0.0;
        do {
            norm = 0.0;
            for (double& c : coef) {
                c = normal(rng);
                norm += c * c;
            }
        } while (norm == 0.0);
        norm = std::sqrt(norm);
        for (double& c : coef) c /= norm;
        const auto mg = margins(fm, Weighting(coef));
        bool all_zero = true, some_negative = false;
        for (std::size_t j : core.indices()) {
            if (fm.weight(j) <= 0.0) continue;
            all_zero = all_zero && std::abs(mg[j]) <= tol;
            some_negative = some_negative || mg[j] < -tol;
        }
        if (all_zero) ++report.abstaining;
        else if (some_negative) ++report.erring;
        else ++report.violations;
    }
    return report;
}

/// Minimum-l1 weighting that reproduces (H lambda) on every core point.
inline Weighting bounded_representation(const FeatureMatrix& fm, const RegionMask& core, const Weighting& lambda,
                                        const LpOptions& lp_options = {})
{
    const std::size_t n = fm.hypotheses();
    require(lambda.size() == n, ErrorKind::dimension_mismatch, "weighting length mismatch");
    require(core.empty() || core.indices().back() < fm.points(), ErrorKind::dimension_mismatch,
            "core does not fit the feature matrix");
    if (core.empty()) return Weighting(n);

    LinearProgram lp;
    lp.objective.assign(2 * n, -1.0);
    lp.lower.assign(2 * n, 0.0);
    lp.upper.assign(2 * n, std::numeric_limits<double>::infinity());
    lp.constraints = DenseMatrix(0, 2 * n);
    std::vector<double> row(2 * n);
    for (std::size_t j : core.indices()) {
        double target = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = fm(j, i);
            row[n + i] = -fm(j, i);
            target += lambda[i] * fm(j, i);
        }
        lp.constraints.append_row(row);
        lp.rhs.push_back(target);
    }
    const LpSolution sol = solve(lp, lp_options);
    require(sol.status == LpStatus::optimal, ErrorKind::inconsistency,
            "minimum-norm representation LP failed although lambda itself is feasible");
    std::vector<double> coef(n);
    for (std::size_t i = 0; i < n; ++i) coef[i] = sol.x[i] - sol.x[n + i];
    Weighting out(std::move(coef));
    return out.l1_norm() <= lambda.l1_norm() ? out : lambda;
}

} // namespace hcb
