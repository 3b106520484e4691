#pragma once

// Surrogate losses written as nondecreasing functions of the negated margin z = -y f(x):
// exp(z), ln(1 + exp(z)), max(0, 1 + z), and nonnegative combinations
// c1 * logistic + c2 * exp.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "hardcoreboost/detail/search.hpp"
#include "hardcoreboost/error.hpp"

namespace hcb {

enum class LossKind { exp, logistic, hinge, cone };

struct Loss {
    LossKind kind = LossKind::exp;
    double c1 = 0.0; // logistic weight (cone only)
    double c2 = 0.0; // exp weight (cone only)

    static Loss exponential() { return {LossKind::exp, 0.0, 1.0}; }
    static Loss logistic() { return {LossKind::logistic, 1.0, 0.0}; }
    static Loss hinge() { return {LossKind::hinge, 0.0, 0.0}; }
    static Loss cone(double c1, double c2)
    {
        require(std::isfinite(c1) && std::isfinite(c2) && c1 >= 0.0 && c2 >= 0.0 && c1 + c2 > 0.0,
                ErrorKind::invalid_argument, "cone loss needs c1, c2 >= 0 with c1 + c2 > 0");
        return {LossKind::cone, c1, c2};
    }

    // All built-in members are differentiable at the origin (the hinge kink sits at z = -1).
    bool differentiable_at_zero() const noexcept { return true; }

    friend bool operator==(const Loss&, const Loss&) = default;
};

/// Exponent clamp for exp terms; larger arguments saturate instead of overflowing.
inline constexpr double kExpClamp = 700.0;

struct GuardedValue {
    double value;
    bool saturated;
};

namespace detail {

inline GuardedValue guarded_exp(double z) noexcept
{
    if (z > kExpClamp) return {std::exp(kExpClamp), true};
    if (z < -kExpClamp) return {std::exp(-kExpClamp), false};
    return {std::exp(z), false};
}

inline double softplus(double z) noexcept
{
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double sigmoid(double z) noexcept
{
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double exp_conjugate(double g) noexcept
{
    if (g < 0.0) return std::numeric_limits<double>::infinity();
    if (g == 0.0) return 0.0;
    return g * std::log(g) - g;
}

inline double logistic_conjugate(double g) noexcept
{
    if (g < 0.0 || g > 1.0) return std::numeric_limits<double>::infinity();
    return xlogx(g) + xlogx(1.0 - g);
}

} // namespace detail

/// phi(z) together with a flag telling whether an exp term hit the clamp.
inline GuardedValue loss_value_guarded(const Loss& loss, double z)
{
    require(std::isfinite(z), ErrorKind::invalid_argument, "loss argument must be finite");
    switch (loss.kind) {
    case LossKind::exp:
        return detail::guarded_exp(z);
    case LossKind::logistic:
        return {detail::softplus(z), false};
    case LossKind::hinge:
        return {std::max(0.0, 1.0 + z), false};
    case LossKind::cone: {
        GuardedValue e = loss.c2 > 0.0 ? detail::guarded_exp(z) : GuardedValue{0.0, false};
        return {loss.c1 * detail::softplus(z) + loss.c2 * e.value, e.saturated};
    }
    }
    throw Error(ErrorKind::unsupported_loss, "unknown loss kind");
}

inline double loss_value(const Loss& loss, double z) { return loss_value_guarded(loss, z).value; }

/// An element of the subdifferential at z. The hinge kink z = -1 maps to 0.
inline double loss_subgradient(const Loss& loss, double z)
{
    require(std::isfinite(z), ErrorKind::invalid_argument, "loss argument must be finite");
    switch (loss.kind) {
    case LossKind::exp:
        return detail::guarded_exp(z).value;
    case LossKind::logistic:
        return detail::sigmoid(z);
    case LossKind::hinge:
        return z > -1.0 ? 1.0 : 0.0;
    case LossKind::cone:
        return loss.c1 * detail::sigmoid(z) + (loss.c2 > 0.0 ? loss.c2 * detail::guarded_exp(z).value : 0.0);
    }
    throw Error(ErrorKind::unsupported_loss, "unknown loss kind");
}

/// Right end of dom(phi*): +inf when an exp term is present.
inline double conjugate_domain_max(const Loss& loss)
{
    switch (loss.kind) {
    case LossKind::exp: return std::numeric_limits<double>::infinity();
    case LossKind::logistic: return 1.0;
    case LossKind::hinge: return 1.0;
    case LossKind::cone: return loss.c2 > 0.0 ? std::numeric_limits<double>::infinity() : loss.c1;
    }
    throw Error(ErrorKind::unsupported_loss, "unknown loss kind");
}

/// phi*(g) = sup_z g z - phi(z); +inf outside the domain, exactly 0 at g = 0.
inline double loss_conjugate(const Loss& loss, double g)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (std::isnan(g) || g < 0.0) return inf;
    if (g == 0.0) return 0.0;
    switch (loss.kind) {
    case LossKind::exp:
        return detail::exp_conjugate(g);
    case LossKind::logistic:
        return detail::logistic_conjugate(g);
    case LossKind::hinge:
        return g <= 1.0 ? -g : inf;
    case LossKind::cone: {
        if (loss.c2 == 0.0) return loss.c1 * detail::logistic_conjugate(g / loss.c1);
        if (loss.c1 == 0.0) return loss.c2 * detail::exp_conjugate(g / loss.c2);
        if (!std::isfinite(g)) return inf;
        // phi' increases from 0 to +inf, so the maximizer solves phi'(z) = g.
        auto slope = [&](double z) {
            return loss.c1 * detail::sigmoid(z) + loss.c2 * std::exp(std::min(z, kExpClamp));
        };
        double lo = -1.0, hi = 1.0;
        while (slope(lo) > g && lo > -1e4) lo *= 2.0;
        while (slope(hi) < g && hi < kExpClamp) hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) < g ? lo : hi) = mid;
        }
        const double z = 0.5 * (lo + hi);
        return g * z - loss_value(loss, z);
    }
    }
    throw Error(ErrorKind::unsupported_loss, "unknown loss kind");
}

/// Closed-form upper bound on the inverse psi-transform.
inline double psi_inverse_bound(const Loss& loss, double r)
{
    require(r >= 0.0 && !std::isnan(r), ErrorKind::invalid_argument, "psi inverse needs r >= 0");
    switch (loss.kind) {
    case LossKind::exp: return 2.0 * std::sqrt(r);
    case LossKind::logistic: return 4.0 * std::sqrt(r);
    case LossKind::hinge: return r;
    case LossKind::cone:
        // Heuristic: no published bound for combinations.
        return 4.0 * std::sqrt(r / (loss.c1 + loss.c2));
    }
    throw Error(ErrorKind::unsupported_loss, "psi inverse bound not available for this loss");
}

/// Search interval for the conditional-risk infima inside psi_numeric.
inline constexpr double kPsiSearchRadius = 50.0;

/// psi(theta) = H^-((1 + theta) / 2) - H((1 + theta) / 2), evaluated by golden-section
/// search over the prediction value.
inline double psi_numeric(const Loss& loss, double theta)
{
    require(loss.differentiable_at_zero(), ErrorKind::unsupported_loss,
            "psi transform requires a loss differentiable at 0");
    require(theta >= 0.0 && theta <= 1.0, ErrorKind::invalid_argument, "theta must lie in [0, 1]");
    const double eta = 0.5 * (1.0 + theta);
    if (eta == 0.5) return 0.0;
    if (eta == 1.0) return loss_value(loss, 0.0); // H(1) = 0, H^-(1) = phi(0)
    auto conditional = [&](double alpha) {
        return eta * loss_value(loss, -alpha) + (1.0 - eta) * loss_value(loss, alpha);
    };
    const double h = detail::golden_section_min(conditional, -kPsiSearchRadius, kPsiSearchRadius).value;
    const double h_minus = detail::golden_section_min(conditional, -kPsiSearchRadius, 0.0).value;
    return std::max(0.0, h_minus - h);
}

struct PsiData {
    Loss loss;

    double inverse_bound(double r) const { return psi_inverse_bound(loss, r); }
    double transform(double theta) const { return psi_numeric(loss, theta); }
};

inline std::string to_string(const Loss& loss)
{
    switch (loss.kind) {
    case LossKind::exp: return "exp";
    case LossKind::logistic: return "logistic";
    case LossKind::hinge: return "hinge";
    case LossKind::cone: {
        auto fmt = [](double v) {
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof buf, v);
            return std::string(buf, res.ptr);
        };
        return "cone:" + fmt(loss.c1) + "," + fmt(loss.c2);
    }
    }
    return "unknown";
}

/// Parses "exp" | "logistic" | "hinge" | "cone:<c1>,<c2>".
inline Loss parse_loss(std::string_view text)
{
    if (text == "exp") return Loss::exponential();
    if (text == "logistic") return Loss::logistic();
    if (text == "hinge") return Loss::hinge();
    if (text.starts_with("cone:")) {
        const std::string body(text.substr(5));
        const auto comma = body.find(',');
        require(comma != std::string::npos, ErrorKind::invalid_argument,
                "cone loss must be written cone:<c1>,<c2>");
        try {
            std::size_t used1 = 0, used2 = 0;
            const std::string first = body.substr(0, comma), second = body.substr(comma + 1);
            const double c1 = std::stod(first, &used1);
            const double c2 = std::stod(second, &used2);
            require(used1 == first.size() && used2 == second.size(), ErrorKind::invalid_argument,
                    "malformed cone coefficients: " + body);
            return Loss::cone(c1, c2);
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::invalid_argument, "malformed cone coefficients: " + body);
        }
    }
    throw Error(ErrorKind::unsupported_loss, "unknown loss: " + std::string(text));
}

} // namespace hcb
