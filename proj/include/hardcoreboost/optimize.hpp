#pragma once

// Minimization oracles for the empirical surrogate risk R(lambda) = sum_j w_j phi(-y_j (H lambda)(x_j)):
// subgradient descent for the hinge loss and greedy coordinate descent with exact
// line search (AdaBoost style) for exp, logistic and their conic combinations.
// Suboptimality is certified through the Fenchel dual
//     inf_lambda R(lambda) >= -sum_j w_j phi*(q_j)
// for any nonnegative density q that decorrelates every hypothesis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hardcoreboost/detail/search.hpp"
#include "hardcoreboost/error.hpp"
#include "hardcoreboost/hardcore.hpp"
#include "hardcoreboost/losses.hpp"
#include "hardcoreboost/risk.hpp"
#include "hardcoreboost/sample.hpp"
#include "hardcoreboost/weighting.hpp"

namespace hcb {

enum class Method { subgradient, coordinate };

inline const char* to_string(Method m) { return m == Method::subgradient ? "sub" : "coord"; }

inline Method parse_method(const std::string& text)
{
    if (text == "sub" || text == "subgradient") return Method::subgradient;
    if (text == "coord" || text == "coordinate") return Method::coordinate;
    throw Error(ErrorKind::invalid_argument, "unknown method: " + text);
}

struct OptimizerConfig {
    Method method = Method::coordinate;
    std::size_t max_iters = 10000;
    double rho = 1e-6;          // stop once the certified gap drops to rho
    double grad_tol = 1e-10;    // stop once the gradient sup-norm drops to this
    double step_scale = 1.0;    // subgradient steps are step_scale / sqrt(t + 1)
    std::uint64_t seed = 0;     // reserved; both built-in selection rules are deterministic
    std::vector<double> initial; // starting weighting; empty means zero
    bool record_trace = true;

    void validate(std::size_t n) const
    {
        require(rho > 0.0, ErrorKind::invalid_argument, "rho must be positive");
        require(max_iters >= 1, ErrorKind::invalid_argument, "max_iters must be >= 1");
        require(grad_tol >= 0.0, ErrorKind::invalid_argument, "grad_tol must be >= 0");
        require(step_scale > 0.0, ErrorKind::invalid_argument, "step_scale must be positive");
        require(initial.empty() || initial.size() == n, ErrorKind::dimension_mismatch,
                "initial weighting has wrong length");
    }
};

enum class StopReason { gradient, iterations, gap };

inline const char* to_string(StopReason s)
{
    switch (s) {
    case StopReason::gradient: return "gradient";
    case StopReason::iterations: return "iterations";
    case StopReason::gap: return "gap";
    }
    return "unknown";
}

struct TraceEntry {
    std::size_t iter;
    double objective;
    double l1_norm;
    double grad_sup_norm;
};

struct OptRun {
    Weighting lambda;
    double objective = 0.0;
    std::vector<TraceEntry> trace;
    StopReason stop = StopReason::iterations;
    std::size_t iterations = 0;
    std::optional<double> dual_bound; // only when a hard-core certificate was supplied
    bool truncated_step = false;      // a line search hit the 2^60 bracket cap
};

/// Largest step a coordinate line search will take.
inline const double kLineSearchCap = std::ldexp(1.0, 60);

namespace detail {

class RiskState {
public:
    RiskState(const FeatureMatrix& fm, const Loss& loss, Weighting lambda)
        : fm_(fm), loss_(loss), lambda_(std::move(lambda)), margins_(margins(fm, lambda_)) {}

    const Weighting& lambda() const noexcept { return lambda_; }

    double objective() const
    {
        double total = 0.0;
        for (std::size_t j = 0; j < fm_.points(); ++j) total += fm_.weight(j) * loss_value(loss_, -margins_[j]);
        return total;
    }

    std::vector<double> gradient() const
    {
        std::vector<double> g(fm_.hypotheses(), 0.0);
        for (std::size_t j = 0; j < fm_.points(); ++j) {
            const double s = fm_.weight(j) * loss_subgradient(loss_, -margins_[j]) * fm_.label(j);
            if (s == 0.0) continue;
            const auto row = fm_.row(j);
            for (std::size_t i = 0; i < row.size(); ++i) g[i] -= s * row[i];
        }
        return g;
    }

    /// d/ds R(lambda + s * direction * e_i) * direction, i.e. the slope along the move.
    double directional_slope(std::size_t i, double direction, double s) const
    {
        double slope = 0.0;
        for (std::size_t j = 0; j < fm_.points(); ++j) {
            const double a = fm_.label(j) * fm_(j, i);
            if (a == 0.0) continue;
            const double z = -(margins_[j] + s * direction * a);
            slope -= fm_.weight(j) * loss_subgradient(loss_, z) * a * direction;
        }
        return slope;
    }

    double objective_after(std::size_t i, double delta) const
    {
        double total = 0.0;
        for (std::size_t j = 0; j < fm_.points(); ++j)
            total += fm_.weight(j) * loss_value(loss_, -(margins_[j] + delta * fm_.label(j) * fm_(j, i)));
        return total;
    }

    void move(std::size_t i, double delta)
    {
        lambda_.add(i, delta);
        for (std::size_t j = 0; j < fm_.points(); ++j) margins_[j] += delta * fm_.label(j) * fm_(j, i);
    }

    void move_all(const std::vector<double>& delta)
    {
        for (std::size_t i = 0; i < delta.size(); ++i) lambda_.add(i, delta[i]);
        lambda_.refresh();
        margins_ = margins(fm_, lambda_);
    }

private:
    const FeatureMatrix& fm_;
    Loss loss_;
    Weighting lambda_;
    std::vector<double> margins_;
};

inline double sup_norm(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

inline Weighting starting_point(const FeatureMatrix& fm, const OptimizerConfig& cfg)
{
    return cfg.initial.empty() ? Weighting(fm.hypotheses()) : Weighting(cfg.initial);
}

} // namespace detail

/// -sum_j w_j phi*(q_j) for a decorrelating density q >= 0; a lower bound on inf R.
inline double dual_lower_bound(const FeatureMatrix& fm, const Loss& loss, const std::vector<double>& q,
                               double tol = 1e-7)
{
    require(q.size() == fm.points(), ErrorKind::dimension_mismatch, "dual weights have wrong length");
    for (double v : q) require(v >= 0.0 && std::isfinite(v), ErrorKind::invalid_argument, "dual weights must be >= 0");
    double violation = 0.0;
    for (std::size_t i = 0; i < fm.hypotheses(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < fm.points(); ++j) s += fm.weight(j) * q[j] * fm.label(j) * fm(j, i);
        violation = std::max(violation, std::abs(s));
    }
    require(violation <= tol, ErrorKind::invalid_argument,
            "dual weights do not decorrelate the hypotheses (max violation " + std::to_string(violation) + ")");
    double total = 0.0;
    for (std::size_t j = 0; j < fm.points(); ++j)
        if (fm.weight(j) > 0.0) total += fm.weight(j) * loss_conjugate(loss, q[j]);
    return -total;
}

struct SuboptimalityCertificate {
    double gap;
    double primal;
    double dual;
    double scale; // best multiplier s for the certificate's p (as a density)
};

namespace detail {

/// Dual objective at q = sum_k a_k g_k, or -inf outside dom(phi*).
inline double dual_value(const FeatureMatrix& fm, const Loss& loss, const std::vector<double>& q)
{
    double total = 0.0;
    for (std::size_t j = 0; j < fm.points(); ++j) {
        if (fm.weight(j) <= 0.0) continue;
        const double c = loss_conjugate(loss, q[j]);
        if (!std::isfinite(c)) return -std::numeric_limits<double>::infinity();
        total += fm.weight(j) * c;
    }
    return -total;
}

inline std::vector<double> as_density(const FeatureMatrix& fm, const std::vector<double>& mass)
{
    std::vector<double> q(mass.size(), 0.0);
    for (std::size_t j = 0; j < mass.size(); ++j)
        if (fm.weight(j) > 0.0) q[j] = mass[j] / fm.weight(j);
    return q;
}

/// Maximizes the concave function s -> f(base + s * dir) over s >= 0 within dom(phi*).
template <typename F>
Minimum maximize_along(F&& f, const std::vector<double>& base, const std::vector<double>& dir, double dom_max)
{
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < dir.size(); ++j)
        if (dir[j] > 0.0) hi = std::min(hi, (dom_max - base[j]) / dir[j]);
    if (!(hi > 0.0)) return {0.0, f(0.0)};
    if (!std::isfinite(hi)) {
        hi = 1.0;
        while (hi < 1e12 && f(hi) > f(0.5 * hi)) hi *= 2.0;
    }
    const double width = std::max(1e-12, 1e-10 * hi);
    Minimum best = golden_section_max(f, 0.0, hi, width);
    const double f0 = f(0.0);
    if (f0 >= best.value) best = {0.0, f0};
    return best;
}

/// Best dual value over the cone spanned by the certificate's generators, starting
/// from the best multiple of p.
inline std::pair<double, double> certified_dual(const FeatureMatrix& fm, const Loss& loss,
                                                const HardCoreCertificate& cert)
{
    const std::size_t m = fm.points();
    const std::vector<double> p = as_density(fm, cert.p);
    const std::vector<double> zero(m, 0.0);
    const double dom_max = conjugate_domain_max(loss);
    auto along_p = [&](double s) {
        std::vector<double> q(m);
        for (std::size_t j = 0; j < m; ++j) q[j] = s * p[j];
        return dual_value(fm, loss, q);
    };
    const Minimum scaled = maximize_along(along_p, zero, p, dom_max);

    std::vector<std::vector<double>> gens;
    for (const auto& g : cert.generators) gens.push_back(as_density(fm, g));
    std::vector<double> q(m);
    for (std::size_t j = 0; j < m; ++j) q[j] = scaled.x * p[j];
    double value = scaled.value;
    if (gens.size() > 1) {
        // Coordinate ascent: each generator direction is moved either way as long as q stays >= 0.
        for (int sweep = 0; sweep < 500; ++sweep) {
            const double before = value;
            for (const auto& g : gens) {
                double down = std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < m; ++j)
                    if (g[j] > 0.0) down = std::min(down, q[j] / g[j]);
                auto f = [&](double s) {
                    std::vector<double> trial(m);
                    for (std::size_t j = 0; j < m; ++j) trial[j] = std::max(0.0, q[j] + (s - down) * g[j]);
                    return dual_value(fm, loss, trial);
                };
                std::vector<double> base(m);
                for (std::size_t j = 0; j < m; ++j) base[j] = q[j] - down * g[j];
                const Minimum best = maximize_along(f, base, g, dom_max);
                if (best.value > value) {
                    for (std::size_t j = 0; j < m; ++j) q[j] = std::max(0.0, q[j] + (best.x - down) * g[j]);
                    value = best.value;
                }
            }
            if (value - before <= 1e-15 * std::max(1.0, std::abs(value))) break;
        }
    }
    return {value, scaled.x};
}

} // namespace detail

/// Duality gap R(lambda) - D, with D the dual value certified by the hard core.
inline SuboptimalityCertificate suboptimality_certificate(const FeatureMatrix& fm, const Loss& loss,
                                                          const Weighting& lambda, const HardCoreCertificate& cert)
{
    require(cert.p.size() == fm.points(), ErrorKind::dimension_mismatch,
            "certificate does not belong to this feature matrix");
    const double primal = surrogate_risk(fm, lambda, loss);
    const auto [dual, scale] = detail::certified_dual(fm, loss, cert);
    const double gap = primal - dual;
    require(gap >= -1e-7, ErrorKind::inconsistency,
            "negative duality gap " + std::to_string(gap) + ": certificate is not valid for this problem");
    return {gap, primal, dual, scale};
}

inline OptRun subgradient_descent(const FeatureMatrix& fm, const Loss& loss, const OptimizerConfig& cfg,
                                  const HardCoreCertificate* cert = nullptr)
{
    require(loss.kind == LossKind::hinge, ErrorKind::unsupported_loss,
            "subgradient descent needs a Lipschitz loss attaining its infimum (hinge)");
    cfg.validate(fm.hypotheses());
    OptRun run;
    double lower = 0.0;
    if (cert) {
        run.dual_bound = detail::certified_dual(fm, loss, *cert).first;
        lower = std::max(lower, *run.dual_bound);
    }
    detail::RiskState state(fm, loss, detail::starting_point(fm, cfg));
    Weighting best = state.lambda();
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0;; ++t) {
        const double obj = state.objective();
        const auto g = state.gradient();
        const double gsup = detail::sup_norm(g);
        if (cfg.record_trace) run.trace.push_back({t, obj, state.lambda().l1_norm(), gsup});
        if (obj < best_obj) {
            best_obj = obj;
            best = state.lambda();
        }
        run.iterations = t;
        if (gsup <= cfg.grad_tol) {
            run.stop = StopReason::gradient;
            break;
        }
        if (best_obj - lower <= cfg.rho) {
            run.stop = StopReason::gap;
            break;
        }
        if (t >= cfg.max_iters) {
            run.stop = StopReason::iterations;
            break;
        }
        const double eta = cfg.step_scale / std::sqrt(static_cast<double>(t + 1));
        std::vector<double> delta(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) delta[i] = -eta * g[i];
        state.move_all(delta);
    }
    best.refresh();
    run.lambda = std::move(best);
    run.objective = best_obj;
    return run;
}

inline OptRun coordinate_descent(const FeatureMatrix& fm, const Loss& loss, const OptimizerConfig& cfg,
                                 const HardCoreCertificate* cert = nullptr)
{
    require(loss.kind != LossKind::hinge, ErrorKind::unsupported_loss,
            "coordinate descent supports exp, logistic and their conic combinations");
    cfg.validate(fm.hypotheses());
    OptRun run;
    double lower = 0.0;
    if (cert) {
        run.dual_bound = detail::certified_dual(fm, loss, *cert).first;
        lower = std::max(lower, *run.dual_bound);
    }
    detail::RiskState state(fm, loss, detail::starting_point(fm, cfg));
    double obj = state.objective();
    for (std::size_t t = 0;; ++t) {
        const auto g = state.gradient();
        const double gsup = detail::sup_norm(g);
        if (cfg.record_trace) run.trace.push_back({t, obj, state.lambda().l1_norm(), gsup});
        run.iterations = t;
        if (gsup <= cfg.grad_tol) {
            run.stop = StopReason::gradient;
            break;
        }
        if (obj - lower <= cfg.rho) {
            run.stop = StopReason::gap;
            break;
        }
        if (t >= cfg.max_iters) {
            run.stop = StopReason::iterations;
            break;
        }
        std::size_t coord = 0;
        for (std::size_t i = 1; i < g.size(); ++i)
            if (std::abs(g[i]) > std::abs(g[coord])) coord = i;
        const double direction = g[coord] > 0.0 ? -1.0 : 1.0;

        // Bracket the zero of the directional slope, then bisect.
        double lo = 0.0, hi = 1.0;
        while (state.directional_slope(coord, direction, hi) < 0.0 && hi < kLineSearchCap) {
            lo = hi;
            hi *= 2.0;
        }
        double step;
        if (state.directional_slope(coord, direction, hi) < 0.0) {
            step = hi;
            run.truncated_step = true;
        } else {
            while (hi - lo > 1e-10 * std::max(1.0, lo)) {
                const double mid = 0.5 * (lo + hi);
                (state.directional_slope(coord, direction, mid) < 0.0 ? lo : hi) = mid;
            }
            step = 0.5 * (lo + hi);
        }
        double next = state.objective_after(coord, direction * step);
        if (next > obj && lo > 0.0) {
            step = lo;
            next = state.objective_after(coord, direction * step);
        }
        if (next > obj) {
            // No representable decrease along the best coordinate.
            run.stop = StopReason::gradient;
            break;
        }
        state.move(coord, direction * step);
        obj = next;
    }
    Weighting lambda = state.lambda();
    lambda.refresh();
    run.lambda = std::move(lambda);
    run.objective = state.objective();
    return run;
}

inline OptRun minimize(const FeatureMatrix& fm, const Loss& loss, const OptimizerConfig& cfg,
                       const HardCoreCertificate* cert = nullptr)
{
    return cfg.method == Method::subgradient ? subgradient_descent(fm, loss, cfg, cert)
                                             : coordinate_descent(fm, loss, cfg, cert);
}

} // namespace hcb
