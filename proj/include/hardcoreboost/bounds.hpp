#pragma once

// Closed-form finite-sample bounds. Everything here is plain arithmetic on the inputs;
// preconditions are reported as flags, never enforced by throwing.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "hardcoreboost/error.hpp"
#include "hardcoreboost/hardcore.hpp"
#include "hardcoreboost/losses.hpp"
#include "hardcoreboost/weighting.hpp"

namespace hcb {

struct BoundInputs {
    double m = 0.0;            // sample size
    double n = 1.0;            // hypothesis count
    double delta = 0.1;        // failure probability
    double epsilon = 0.0;      // empirical suboptimality
    double rho = 0.0;          // optimizer tolerance (echoed only)
    double phi0 = 1.0;         // loss value at the origin
    double core_mass = 0.0;    // mu(C)
    double c = 1.0;            // structural constant
    double b = 1.0;            // representation-norm bound
    double m_core = 0.0;       // sample points inside the core
    double m_plus = 0.0;       // sample points outside the core

    double delta_prime() const noexcept { return delta / 8.0; }

    void validate() const
    {
        require(m >= 0.0 && n >= 1.0, ErrorKind::invalid_argument, "need m >= 0 and n >= 1");
        require(delta > 0.0 && delta < 1.0, ErrorKind::invalid_argument, "delta must lie in (0,1)");
        require(epsilon >= 0.0 && rho >= 0.0, ErrorKind::invalid_argument, "epsilon and rho must be >= 0");
        require(phi0 > 0.0, ErrorKind::invalid_argument, "phi(0) must be positive");
        require(core_mass >= 0.0 && core_mass <= 1.0, ErrorKind::invalid_argument, "core mass must lie in [0,1]");
        require(c > 0.0 && b > 0.0, ErrorKind::invalid_argument, "c and b must be positive");
        require(m_core >= 0.0 && m_plus >= 0.0 && m_core + m_plus <= m, ErrorKind::invalid_argument,
                "region counts must be nonnegative and sum to at most m");
    }
};

struct BoundTerm {
    std::string label;
    double value;
    bool vacuous = false; // the term is absent (zero-mass region) or undefined
};

struct BoundFlag {
    std::string name;
    bool holds;
};

struct BoundReport {
    BoundInputs inputs;
    std::string loss;
    double approx_error = 0.0;
    std::vector<BoundTerm> terms;
    std::vector<BoundFlag> flags;
    double total = 0.0;

    bool valid() const
    {
        return std::all_of(flags.begin(), flags.end(), [](const BoundFlag& f) { return f.holds; });
    }
    const BoundTerm* term(const std::string& label) const
    {
        for (const auto& t : terms)
            if (t.label == label) return &t;
        return nullptr;
    }
};

struct SplitCounts {
    double core;
    double complement;
};

/// Hoeffding lower bounds on the number of points in C and in its complement.
inline SplitCounts sample_split_bounds(double m, double core_mass, double delta_prime)
{
    require(m >= 0.0, ErrorKind::invalid_argument, "m must be >= 0");
    require(core_mass >= 0.0 && core_mass <= 1.0, ErrorKind::invalid_argument, "core mass must lie in [0,1]");
    require(delta_prime > 0.0 && delta_prime <= 1.0, ErrorKind::invalid_argument, "delta' must lie in (0,1]");
    const double slack = m > 0.0 ? std::sqrt(std::log(1.0 / delta_prime) / (2.0 * m)) : 0.0;
    return {std::max(0.0, m * (core_mass - slack)), std::max(0.0, m * (1.0 - core_mass - slack))};
}

/// Relative-deviation VC bound on the classification risk outside the core.
inline double vc_unbounded_bound(double n, double m_plus, double epsilon, double phi0, double delta_prime,
                                 bool zero_error)
{
    require(m_plus >= 1.0, ErrorKind::invalid_argument, "vc bound needs m_+ >= 1");
    require(phi0 > 0.0 && epsilon >= 0.0, ErrorKind::invalid_argument, "need phi(0) > 0 and epsilon >= 0");
    const double complexity = n * std::log(2.0 * m_plus + 1.0) + std::log(4.0 / delta_prime);
    const double tail = 4.0 * complexity / m_plus;
    if (zero_error) return tail;
    return epsilon / phi0 + 2.0 * std::sqrt(2.0 * epsilon * complexity / (phi0 * m_plus)) + tail;
}

struct CheckedValue {
    double value;
    bool valid;
};

/// Surrogate excess risk on the core; valid once m_C >= c^2 (ln n + ln(6/delta')).
inline CheckedValue core_surrogate_bound(double c, double n, double delta_prime, double epsilon, double m_core)
{
    require(c > 0.0 && n >= 1.0 && m_core > 0.0, ErrorKind::invalid_argument, "need c > 0, n >= 1, m_C > 0");
    const double value = epsilon + c * (std::sqrt(std::log(n)) + 4.0 * std::sqrt(std::log(2.0 / delta_prime))) /
                                       std::sqrt(m_core);
    const bool valid = m_core >= c * c * (std::log(n) + std::log(6.0 / delta_prime));
    return {value, valid};
}

inline double core_classification_bound(const Loss& loss, double c, double n, double delta_prime, double epsilon,
                                        double m_core, double approx_error)
{
    require(approx_error >= 0.0, ErrorKind::invalid_argument, "approximation error must be >= 0");
    return psi_inverse_bound(loss, core_surrogate_bound(c, n, delta_prime, epsilon, m_core).value + approx_error);
}

/// Composed bound on the true classification risk, with delta' = delta / 8.
inline BoundReport full_risk_bound(const BoundInputs& in, const Loss& loss, double approx_error)
{
    in.validate();
    require(approx_error >= 0.0, ErrorKind::invalid_argument, "approximation error must be >= 0");
    BoundReport report;
    report.inputs = in;
    report.loss = to_string(loss);
    report.approx_error = approx_error;
    const double dp = in.delta_prime();
    const double mu_c = in.core_mass;
    const double mu_p = 1.0 - in.core_mass;
    const double log_n = std::log(in.n);
    const double inf = std::numeric_limits<double>::infinity();

    // A zero denominator makes the corresponding requirement hold trivially.
    const double min_mass = std::min(mu_c, mu_p);
    const double need_split = min_mass > 0.0 ? 2.0 * std::log(1.0 / dp) / (min_mass * min_mass) : 0.0;
    const double need_core = mu_c > 0.0 ? 2.0 * in.c * in.c * (log_n + std::log(1.0 / dp)) / mu_c : 0.0;
    report.flags.push_back({"sample_size", in.m >= std::max(need_split, need_core)});
    report.flags.push_back({"zero_error", in.epsilon < in.phi0 / in.m});
    report.flags.push_back({"differentiable_at_zero", loss.differentiable_at_zero()});

    double total = 0.0;
    if (mu_c > 0.0) {
        const double inner = in.epsilon +
                             in.c * std::sqrt(2.0) * (std::sqrt(log_n) + 4.0 * std::sqrt(std::log(2.0 / dp))) /
                                 std::sqrt(in.m * mu_c) +
                             approx_error;
        const double wrapped = psi_inverse_bound(loss, inner);
        report.terms.push_back({"core_surrogate", inner, false});
        report.terms.push_back({"core_classification", wrapped, false});
        total += wrapped;
    } else {
        report.terms.push_back({"core_surrogate", 0.0, true});
        report.terms.push_back({"core_classification", 0.0, true});
    }
    if (mu_p > 0.0) {
        const double mp = in.m * mu_p;
        const double vc = mp > 0.0 ? 8.0 * (in.n * std::log(mp + 1.0) + std::log(4.0 / dp)) / mp : inf;
        report.terms.push_back({"unbounded_classification", vc, false});
        total += vc;
    } else {
        report.terms.push_back({"unbounded_classification", 0.0, true});
    }
    report.total = total;
    return report;
}

/// c = max(2 L b sqrt 2, phi(b)), the constant of the Rademacher deviation bound.
inline double rademacher_constant(double b, double lipschitz_at_b, double phi_at_b)
{
    require(b > 0.0 && lipschitz_at_b >= 0.0 && phi_at_b >= 0.0, ErrorKind::invalid_argument,
            "need b > 0 and nonnegative loss data");
    return std::max(2.0 * lipschitz_at_b * b * std::sqrt(2.0), phi_at_b);
}

/// Uniform deviation |R - R^m| over the l1 ball of radius b.
inline double rademacher_surrogate_deviation(double n, double m, double b, double lipschitz_at_b, double phi_at_b,
                                             double delta)
{
    require(n >= 1.0 && m > 0.0, ErrorKind::invalid_argument, "need n >= 1 and m > 0");
    require(delta > 0.0 && delta < 1.0, ErrorKind::invalid_argument, "delta must lie in (0,1)");
    const double c = rademacher_constant(b, lipschitz_at_b, phi_at_b);
    return c * (std::sqrt(std::log(n)) + std::sqrt(std::log(2.0 / delta))) / std::sqrt(m);
}

/// Lipschitz constant of phi on [-b, b]; phi is convex and nondecreasing so it is phi'(b).
inline double lipschitz_on_ball(const Loss& loss, double b)
{
    require(b > 0.0, ErrorKind::invalid_argument, "b must be positive");
    if (loss.kind == LossKind::hinge) return 1.0;
    return loss_subgradient(loss, b);
}

inline double rademacher_surrogate_deviation(const Loss& loss, double n, double m, double b, double delta)
{
    return rademacher_surrogate_deviation(n, m, b, lipschitz_on_ball(loss, b), loss_value(loss, b), delta);
}

struct StructuralConstants {
    double b;
    double c;
};

/// Estimates (b, c) from a certificate: b is the l1 norm of the smallest weighting that agrees
/// with lambda on the core, c the Rademacher constant at that radius.
inline StructuralConstants estimate_constants(const FeatureMatrix& fm, const Loss& loss,
                                              const HardCoreCertificate& cert, const Weighting& lambda,
                                              const LpOptions& lp = {})
{
    const Weighting rep = bounded_representation(fm, cert.core, lambda, lp);
    const double b = std::max(rep.l1_norm(), 1e-12);
    return {b, rademacher_constant(b, lipschitz_on_ball(loss, b), loss_value(loss, b))};
}

} // namespace hcb
