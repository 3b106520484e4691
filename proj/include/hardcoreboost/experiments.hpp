#pragma once

// Synthetic worlds and experiment drivers: the staggered separable world where
// max-margin solutions blow up the surrogate risk, and structural-risk-minimization
// consistency sweeps on a noisy 1-D lattice world.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hardcoreboost/detail/parallel.hpp"
#include "hardcoreboost/error.hpp"
#include "hardcoreboost/hypotheses.hpp"
#include "hardcoreboost/losses.hpp"
#include "hardcoreboost/lp.hpp"
#include "hardcoreboost/optimize.hpp"
#include "hardcoreboost/risk.hpp"
#include "hardcoreboost/sample.hpp"

namespace hcb {

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Generator for an independent stream keyed by (seed, a, b).
inline std::mt19937_64 keyed_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------
// Staggered world

struct StaggeredWorld {
    std::size_t depth = 0;
    Sample support; // rows p_1, n_1, p_2, n_2, ...; weights are the point masses

    static Weighting reference_separator() { return Weighting{-1.0, 1.0}; }
};

inline StaggeredWorld build_staggered(std::size_t depth)
{
    require(depth >= 1, ErrorKind::invalid_argument, "staggered world needs depth >= 1");
    require(depth <= 500, ErrorKind::invalid_argument, "staggered world depth above 500 underflows");
    DenseMatrix points(0, 2);
    std::vector<int> labels;
    std::vector<double> masses;
    for (std::size_t i = 1; i <= depth; ++i) {
        const double scale = std::ldexp(1.0, 4 - 2 * static_cast<int>(i)); // 4^(2 - i)
        const double mass = std::ldexp(1.0, -static_cast<int>(i) - 1);
        points.append_row(std::vector<double>{1.0 - 0.5 * scale, 1.0});
        labels.push_back(+1);
        masses.push_back(mass);
        points.append_row(std::vector<double>{1.0, 1.0 - 0.3 * scale});
        labels.push_back(-1);
        masses.push_back(mass);
    }
    const double residual = std::ldexp(1.0, -static_cast<int>(depth) - 1);
    masses[2 * depth - 2] += residual;
    masses[2 * depth - 1] += residual;
    return {depth, Sample(std::move(points), std::move(labels), std::move(masses))};
}

/// m i.i.d. draws from a finitely supported distribution, uniformly weighted.
inline Sample sample_world(const Sample& world, std::size_t m, std::uint64_t seed)
{
    require(m >= 1, ErrorKind::invalid_argument, "sample size must be >= 1");
    std::vector<double> cdf(world.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < world.size(); ++k) cdf[k] = acc += world.weight(k);
    std::mt19937_64 rng(seed);
    DenseMatrix points(0, world.dim());
    std::vector<int> labels;
    for (std::size_t t = 0; t < m; ++t) {
        const double u = uniform01(rng) * acc;
        std::size_t k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        k = std::min(k, world.size() - 1);
        points.append_row(world.instance(k));
        labels.push_back(world.label(k));
    }
    return Sample(std::move(points), std::move(labels));
}

inline Sample sample_world(const StaggeredWorld& world, std::size_t m, std::uint64_t seed)
{
    return sample_world(world.support, m, seed);
}

struct MaxMarginResult {
    Weighting lambda;
    double margin;
};

/// max t s.t. y_j <lambda, x_j> >= t, ||lambda||_1 = 1, over coordinate (projection) features.
inline MaxMarginResult max_margin_2d(const Sample& sample, const LpOptions& options = {})
{
    require(sample.size() >= 1, ErrorKind::invalid_argument, "empty sample");
    const bool has_pos = std::count(sample.labels().begin(), sample.labels().end(), 1) > 0;
    const bool has_neg = std::count(sample.labels().begin(), sample.labels().end(), -1) > 0;
    require(has_pos && has_neg, ErrorKind::invalid_argument, "max-margin solution needs both labels");
    const std::size_t d = sample.dim();
    const double inf = std::numeric_limits<double>::infinity();
    // Repeated points give identical constraints; keep one row per distinct y x.
    std::set<std::vector<double>> distinct;
    for (std::size_t j = 0; j < sample.size(); ++j) {
        const auto x = sample.instance(j);
        std::vector<double> yx(d);
        for (std::size_t i = 0; i < d; ++i) yx[i] = sample.label(j) * x[i];
        distinct.insert(std::move(yx));
    }
    // Variables: lambda+ (d), lambda- (d), t, one surplus per distinct point.
    const std::size_t t_col = 2 * d, surplus0 = 2 * d + 1, vars = surplus0 + distinct.size();
    LinearProgram lp;
    lp.objective.assign(vars, 0.0);
    lp.objective[t_col] = 1.0;
    lp.lower.assign(vars, 0.0);
    lp.upper.assign(vars, inf);
    lp.lower[t_col] = -inf;
    lp.constraints = DenseMatrix(0, vars);
    std::vector<double> row(vars, 0.0);
    std::fill(row.begin(), row.begin() + 2 * d, 1.0);
    lp.constraints.append_row(row);
    lp.rhs.push_back(1.0);
    std::size_t k = 0;
    for (const auto& yx : distinct) {
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            row[i] = yx[i];
            row[d + i] = -yx[i];
        }
        row[t_col] = -1.0;
        row[surplus0 + k++] = -1.0;
        lp.constraints.append_row(row);
        lp.rhs.push_back(0.0);
    }
    const LpSolution sol = solve(lp, options);
    require(sol.status == LpStatus::optimal, ErrorKind::inconsistency,
            std::string("max-margin LP ended ") + to_string(sol.status));
    std::vector<double> coef(d);
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        coef[i] = sol.x[i] - sol.x[d + i];
        norm += std::abs(coef[i]);
    }
    require(norm > 0.0, ErrorKind::infeasible, "sample is not linearly separable (t <= 0)");
    for (double& v : coef) v /= norm;
    double t = inf;
    for (std::size_t j = 0; j < sample.size(); ++j) {
        const auto x = sample.instance(j);
        double f = 0.0;
        for (std::size_t i = 0; i < d; ++i) f += coef[i] * x[i];
        t = std::min(t, sample.label(j) * f);
    }
    require(t > 0.0, ErrorKind::infeasible,
            "sample is not linearly separable (t = " + std::to_string(t) + ")");
    return {Weighting(std::move(coef)), t};
}

struct ScaleRow {
    double scale;
    double risk_hat;    // R_phi(c H lambda_hat) on the world
    double risk_bar;    // R_phi(c H lambda_bar) on the world
    bool saturated;     // some loss evaluation hit the exponent clamp
};

struct ImpossibilityReport {
    std::size_t depth = 0;
    std::size_t m = 0;
    std::string loss;
    std::uint64_t seed = 0;
    std::size_t attempts = 0;          // samples drawn, including retries
    Sample sample;                     // the sample behind lambda_hat
    Weighting lambda_hat;
    double sample_margin = 0.0;        // max-margin value on the sample
    double classification_risk = 0.0;  // true R_L(H lambda_hat)
    double misclassified_mass = 0.0;   // world mass with negative margin under lambda_hat
    bool event = false;                // misclassified_mass > 0
    std::vector<ScaleRow> rows;
};

/// Seed of the k-th retry; retries draw from a fresh stream.
inline std::uint64_t retry_seed(std::uint64_t seed, std::size_t attempt)
{
    return attempt == 0 ? seed : seed + 0x9E3779B97F4A7C15ULL * attempt;
}

inline ImpossibilityReport impossibility_report(std::size_t depth, std::size_t m, const std::vector<double>& scales,
                                                const Loss& loss, std::uint64_t seed, std::size_t max_retries = 0)
{
    require(depth >= 3, ErrorKind::invalid_argument, "impossibility report needs depth >= 3");
    require(!scales.empty(), ErrorKind::invalid_argument, "need at least one scale");
    for (double c : scales) require(c > 0.0 && std::isfinite(c), ErrorKind::invalid_argument, "scales must be positive");
    const StaggeredWorld world = build_staggered(depth);
    const HypothesisClass cls = HypothesisClass::projections(2);
    const FeatureMatrix world_fm = materialize(cls, world.support);
    const Weighting bar = StaggeredWorld::reference_separator();

    ImpossibilityReport report;
    report.depth = depth;
    report.m = m;
    report.loss = to_string(loss);
    report.seed = seed;
    for (std::size_t attempt = 0; attempt <= max_retries; ++attempt) {
        report.attempts = attempt + 1;
        report.sample = sample_world(world, m, retry_seed(seed, attempt));
        const auto& labels = report.sample.labels();
        if (std::all_of(labels.begin(), labels.end(), [&](int y) { return y == labels.front(); })) {
            // One label only: positives all sit on x_2 = 1 and negatives on x_1 = 1.
            report.lambda_hat = labels.front() > 0 ? Weighting{0.0, 1.0} : Weighting{-1.0, 0.0};
            double t = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < report.sample.size(); ++j) {
                const auto x = report.sample.instance(j);
                t = std::min(t, labels.front() * (report.lambda_hat[0] * x[0] + report.lambda_hat[1] * x[1]));
            }
            report.sample_margin = t;
        } else {
            auto mm = max_margin_2d(report.sample);
            report.lambda_hat = std::move(mm.lambda);
            report.sample_margin = mm.margin;
        }
        const auto mg = margins(world_fm, report.lambda_hat);
        report.misclassified_mass = 0.0;
        for (std::size_t j = 0; j < world_fm.points(); ++j)
            if (mg[j] < 0.0) report.misclassified_mass += world_fm.weight(j);
        report.event = report.misclassified_mass > 0.0;
        if (report.event) break;
    }
    report.classification_risk = classification_risk(world_fm, report.lambda_hat);
    auto world_risk = [&](const Weighting& lambda, bool& saturated) {
        const auto mg = margins(world_fm, lambda);
        double total = 0.0;
        for (std::size_t j = 0; j < world_fm.points(); ++j) {
            const auto v = loss_value_guarded(loss, -mg[j]);
            saturated = saturated || v.saturated;
            total += world_fm.weight(j) * v.value;
        }
        return total;
    };
    for (double c : scales) {
        ScaleRow row{c, 0.0, 0.0, false};
        row.risk_hat = world_risk(report.lambda_hat.scaled(c), row.saturated);
        row.risk_bar = world_risk(bar.scaled(c), row.saturated);
        report.rows.push_back(row);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Noisy 1-D lattice world and consistency sweeps

/// X uniform on [-1, 1), split into equal cells; P(y = +1 | x) = eta[cell].
struct LatticeWorld1D {
    std::vector<double> eta;

    std::size_t cells() const noexcept { return eta.size(); }
    double cell_width() const noexcept { return 2.0 / static_cast<double>(eta.size()); }

    std::size_t cell_of(double x) const
    {
        const double pos = std::floor((x + 1.0) / cell_width());
        return std::min(static_cast<std::size_t>(std::max(pos, 0.0)), cells() - 1);
    }

    void validate() const
    {
        require(!eta.empty(), ErrorKind::invalid_argument, "lattice world needs at least one cell");
        for (double e : eta)
            require(e >= 0.0 && e <= 1.0, ErrorKind::invalid_argument, "conditional probabilities must lie in [0,1]");
    }

    /// The world as a finitely supported distribution over (cell midpoint, label).
    Sample as_discrete() const
    {
        DenseMatrix pts(0, 1);
        std::vector<int> labels;
        std::vector<double> masses;
        for (std::size_t k = 0; k < cells(); ++k) {
            const double mid = -1.0 + (static_cast<double>(k) + 0.5) * cell_width();
            for (int y : {+1, -1}) {
                pts.append_row(std::vector<double>{mid});
                labels.push_back(y);
                masses.push_back((y > 0 ? eta[k] : 1.0 - eta[k]) / static_cast<double>(cells()));
            }
        }
        return Sample::normalized(std::move(pts), std::move(labels), std::move(masses));
    }

    double bayes_risk() const { return bayes_risk_discrete(as_discrete()); }

    static LatticeWorld1D alternating(std::size_t cells = 8, double high = 0.8, double low = 0.2)
    {
        LatticeWorld1D w;
        for (std::size_t k = 0; k < cells; ++k) w.eta.push_back(k % 2 == 0 ? high : low);
        return w;
    }
};

inline Sample sample_lattice_world(const LatticeWorld1D& world, std::size_t m, std::mt19937_64& rng)
{
    DenseMatrix pts(0, 1);
    std::vector<int> labels;
    for (std::size_t t = 0; t < m; ++t) {
        const double x = -1.0 + 2.0 * uniform01(rng);
        pts.append_row(std::vector<double>{x});
        labels.push_back(uniform01(rng) < world.eta[world.cell_of(x)] ? +1 : -1);
    }
    return Sample(std::move(pts), std::move(labels));
}

/// Exact classification risk on the lattice world of a 1-D predictor that is constant on the
/// cells of `cls` (a one-dimensional lattice class).
inline double lattice_world_risk(const LatticeWorld1D& world, const HypothesisClass& cls, const Weighting& lambda)
{
    const auto* spec = std::get_if<LatticeCells>(&cls.spec());
    require(spec != nullptr && spec->dim == 1, ErrorKind::invalid_argument, "need a one-dimensional lattice class");
    std::vector<double> cuts{-1.0, 1.0};
    for (std::size_t k = 1; k < world.cells(); ++k) cuts.push_back(-1.0 + static_cast<double>(k) * world.cell_width());
    const double side = 1.0 / spec->resolution;
    for (long k = static_cast<long>(std::ceil(-1.0 / side)); k * side < 1.0; ++k)
        if (k * side > -1.0) cuts.push_back(k * side);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double risk = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double len = cuts[k + 1] - cuts[k];
        const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        const std::vector<double> x{mid};
        const double f = apply(cls, lambda, x);
        const double eta = world.eta[world.cell_of(mid)];
        risk += 0.5 * len * (f >= 0.0 ? 1.0 - eta : eta);
    }
    return risk;
}

struct SweepStage {
    std::size_t m;
    int class_index;
    double epsilon;
};

/// m_i = 250 * 4^(i-1), class i, epsilon_i = 1 / m_i for i = 1..stages.
inline std::vector<SweepStage> default_schedule(int stages = 4)
{
    require(stages >= 1, ErrorKind::invalid_argument, "need at least one stage");
    std::vector<SweepStage> out;
    for (int i = 1; i <= stages; ++i) {
        const std::size_t m = 250u << (2 * (i - 1));
        out.push_back({m, i, 1.0 / static_cast<double>(m)});
    }
    return out;
}

struct SweepConfig {
    LatticeWorld1D world = LatticeWorld1D::alternating();
    std::vector<SweepStage> schedule = default_schedule();
    Loss loss = Loss::logistic();
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
    std::size_t replications = 20;

    void validate() const
    {
        world.validate();
        require(!schedule.empty(), ErrorKind::invalid_argument, "empty schedule");
        require(replications >= 1, ErrorKind::invalid_argument, "need at least one replication");
        for (std::size_t k = 0; k < schedule.size(); ++k) {
            require(schedule[k].m >= 1 && schedule[k].class_index >= 1 && schedule[k].epsilon > 0.0,
                    ErrorKind::invalid_argument, "schedule entries need m >= 1, class >= 1, epsilon > 0");
            if (k > 0) {
                require(schedule[k].m > schedule[k - 1].m, ErrorKind::invalid_argument,
                        "sample sizes must increase strictly");
                require(schedule[k].epsilon < schedule[k - 1].epsilon, ErrorKind::invalid_argument,
                        "tolerances must decrease strictly");
            }
        }
        require(optimizer.method == Method::coordinate || loss.kind == LossKind::hinge,
                ErrorKind::unsupported_loss, "subgradient sweeps need the hinge loss");
    }
};

struct StageResult {
    std::size_t stage;  // 1-based
    std::size_t m;
    std::size_t class_size;
    double epsilon;
    std::vector<double> excess;   // per successful replication, in replication order
    std::size_t failures = 0;
    std::vector<std::string> notes;
    double median = std::numeric_limits<double>::quiet_NaN();
    double p90 = std::numeric_limits<double>::quiet_NaN();
};

/// Linear-interpolation quantile (type 7).
inline double quantile(std::vector<double> v, double q)
{
    require(!v.empty(), ErrorKind::invalid_argument, "quantile of an empty set");
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct SweepRunResult {
    double excess = 0.0;
    std::optional<std::string> failure;
};

inline SweepRunResult sweep_run(const SweepConfig& cfg, std::size_t stage, std::size_t rep, double bayes)
{
    const SweepStage& st = cfg.schedule[stage];
    try {
        auto rng = keyed_rng(cfg.seed, stage, rep);
        const Sample sample = sample_lattice_world(cfg.world, st.m, rng);
        const HypothesisClass cls = HypothesisClass::lattice(st.class_index, 1);
        const FeatureMatrix fm = materialize(cls, sample);
        OptimizerConfig opt = cfg.optimizer;
        opt.rho = st.epsilon;
        opt.record_trace = false;
        const OptRun run = minimize(fm, cfg.loss, opt);
        return {lattice_world_risk(cfg.world, cls, run.lambda) - bayes, std::nullopt};
    } catch (const Error& e) {
        return {0.0, "replication " + std::to_string(rep) + ": " + e.what()};
    }
}

/// Excess classification risk per stage, replications run in parallel.
inline std::vector<StageResult> consistency_sweep(const SweepConfig& cfg)
{
    cfg.validate();
    const double bayes = cfg.world.bayes_risk();
    const std::size_t stages = cfg.schedule.size(), reps = cfg.replications;
    std::vector<SweepRunResult> runs(stages * reps);
    detail::parallel_for(runs.size(), [&](std::size_t k) { runs[k] = sweep_run(cfg, k / reps, k % reps, bayes); });

    std::vector<StageResult> curve;
    for (std::size_t s = 0; s < stages; ++s) {
        StageResult r;
        r.stage = s + 1;
        r.m = cfg.schedule[s].m;
        r.class_size = HypothesisClass::lattice(cfg.schedule[s].class_index, 1).size();
        r.epsilon = cfg.schedule[s].epsilon;
        for (std::size_t k = 0; k < reps; ++k) {
            const auto& run = runs[s * reps + k];
            if (run.failure) {
                ++r.failures;
                r.notes.push_back(*run.failure);
            } else {
                r.excess.push_back(run.excess);
            }
        }
        if (!r.excess.empty()) {
            r.median = quantile(r.excess, 0.5);
            r.p90 = quantile(r.excess, 0.9);
        } else {
            r.notes.push_back("stage skipped: every replication failed");
        }
        curve.push_back(std::move(r));
    }
    return curve;
}

} // namespace hcb
