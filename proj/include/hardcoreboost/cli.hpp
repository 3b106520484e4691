#pragma once

// Command-line front end. Exit codes: 0 success, 1 domain error (JSON on stderr),
// 2 usage error (message and usage text on stderr).

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hardcoreboost/bounds.hpp"
#include "hardcoreboost/error.hpp"
#include "hardcoreboost/experiments.hpp"
#include "hardcoreboost/hardcore.hpp"
#include "hardcoreboost/hypotheses.hpp"
#include "hardcoreboost/io.hpp"
#include "hardcoreboost/losses.hpp"
#include "hardcoreboost/optimize.hpp"

namespace hcb::cli {

enum ExitCode : int { ok = 0, domain_error = 1, usage_error = 2 };

struct CliConfig {
    std::string subcommand;
    std::string dataset;
    std::string class_spec;
    std::string loss = "exp";
    std::string out;
    std::optional<std::uint64_t> seed;
    int verbosity = 0;
    bool no_timestamp = false;
};

namespace detail {

inline std::string utc_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Output parent directories must exist before any work starts.
inline CLI::Validator writable_path()
{
    return CLI::Validator(
        [](std::string& path) -> std::string {
            const auto parent = std::filesystem::path(path).parent_path();
            if (!parent.empty() && !std::filesystem::is_directory(parent))
                return "directory does not exist: " + parent.string();
            return {};
        },
        "PATH");
}

class Emitter {
public:
    Emitter(const CliConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {}

    void json(io::json report, const std::string& path) const
    {
        if (!cfg_.no_timestamp) report["generated_at"] = utc_now();
        text(report.dump(2) + "\n", path);
    }

    void text(const std::string& content, const std::string& path) const
    {
        if (path.empty() || path == "-") out_ << content;
        else io::write_atomic(path, content);
    }

private:
    const CliConfig& cfg_;
    std::ostream& out_;
};

inline std::vector<double> parse_scales(const std::string& text)
{
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        require(used == item.size() && !item.empty(), ErrorKind::invalid_argument, "malformed scale list: " + text);
        out.push_back(v);
    }
    return out;
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CliConfig cfg;
    CLI::App app{"Boosting with hard-core certificates: training, certificates, bounds and experiments",
                 "hardcoreboost"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("--no-timestamp", cfg.no_timestamp, "Omit the generated_at field from JSON reports");
    app.add_flag("-v,--verbose", cfg.verbosity, "Progress notes on stderr (repeatable)");

    // train
    std::string method, trace_path, cert_path;
    OptimizerConfig opt;
    auto* train = app.add_subcommand("train", "Minimize the empirical surrogate risk");
    train->add_option("dataset", cfg.dataset, "Dataset CSV (f1..fd,label[,weight])")->required()->check(CLI::ExistingFile);
    train->add_option("--class", cfg.class_spec, "proj:<d> | lattice:<i>x<d> | explicit:<path>")->required();
    train->add_option("--loss", cfg.loss, "exp | logistic | hinge | cone:<c1>,<c2>")->capture_default_str();
    train->add_option("--method", method, "sub | coord (default: sub for hinge, coord otherwise)");
    train->add_option("--rho", opt.rho, "Target suboptimality")->capture_default_str();
    train->add_option("--max-iters", opt.max_iters, "Iteration budget")->capture_default_str();
    train->add_option("--grad-tol", opt.grad_tol, "Gradient sup-norm stop")->capture_default_str();
    train->add_option("--step-scale", opt.step_scale, "Subgradient step scale")->capture_default_str();
    train->add_option("--certificate", cert_path, "Hard-core certificate JSON for the dual stop")->check(CLI::ExistingFile);
    train->add_option("--trace", trace_path, "Trace CSV output")->check(detail::writable_path());
    train->add_option("--out", cfg.out, "Run report JSON (default: stdout)")->check(detail::writable_path());

    // hardcore
    std::string tableau_path;
    std::size_t dichotomy_trials = 0;
    std::optional<std::uint64_t> seed;
    std::string constants_loss;
    auto* hardcore = app.add_subcommand("hardcore", "Compute and verify the hard core of a sample");
    hardcore->add_option("dataset", cfg.dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
    hardcore->add_option("--class", cfg.class_spec, "Hypothesis class spec")->required();
    hardcore->add_option("--out", cfg.out, "Certificate JSON (default: stdout)")->check(detail::writable_path());
    hardcore->add_option("--dump-tableau", tableau_path, "Write every simplex tableau to this file")
        ->check(detail::writable_path());
    hardcore->add_option("--dichotomy-trials", dichotomy_trials, "Random weightings for the dichotomy check");
    hardcore->add_option("--seed", seed, "Seed for the dichotomy check");
    hardcore->add_option("--loss", constants_loss, "Also estimate the constants (b, c) for this loss");

    // bounds
    BoundInputs bi;
    bi.m = 0;
    double approx_error = 0.0;
    std::string from_cert;
    auto* bounds = app.add_subcommand("bounds", "Evaluate the finite-sample risk bound");
    bounds->add_option("--m", bi.m, "Sample size")->required();
    bounds->add_option("--n", bi.n, "Hypothesis count")->required();
    bounds->add_option("--delta", bi.delta, "Failure probability")->required();
    bounds->add_option("--loss", cfg.loss, "Loss spec")->required();
    auto* eps_opt = bounds->add_option("--epsilon", bi.epsilon, "Empirical suboptimality")->capture_default_str();
    bounds->add_option("--rho", bi.rho, "Optimizer tolerance")->capture_default_str();
    auto* mu_opt = bounds->add_option("--core-mass", bi.core_mass, "Core mass mu(C)")->capture_default_str();
    auto* c_opt = bounds->add_option("--c", bi.c, "Structural constant c")->capture_default_str();
    auto* b_opt = bounds->add_option("--b", bi.b, "Representation-norm bound b")->capture_default_str();
    bounds->add_option("--m-core", bi.m_core, "Sample points in the core");
    bounds->add_option("--m-plus", bi.m_plus, "Sample points outside the core");
    bounds->add_option("--approx-error", approx_error, "Approximation error on the core")->capture_default_str();
    bounds->add_option("--from-certificate", from_cert, "Take mu(C), b and c from a certificate")
        ->check(CLI::ExistingFile);
    bounds->add_option("--out", cfg.out, "Bound report JSON (default: stdout)")->check(detail::writable_path());
    (void)eps_opt;

    // impossibility
    std::size_t depth = 10, sample_size = 20, retries = 0;
    std::string scales = "1,2,4,8,16,32";
    auto* imposs = app.add_subcommand("impossibility", "Max-margin risk divergence on the staggered world");
    imposs->add_option("--depth", depth, "Number of point pairs")->capture_default_str();
    imposs->add_option("--m", sample_size, "Sample size")->capture_default_str();
    imposs->add_option("--scales", scales, "Comma-separated scale factors")->capture_default_str();
    imposs->add_option("--loss", cfg.loss, "Loss spec")->capture_default_str();
    imposs->add_option("--seed", seed, "Sampling seed")->required();
    imposs->add_option("--retries", retries, "Resamples when the misclassification event is absent")
        ->capture_default_str();
    imposs->add_option("--out", cfg.out, "Report JSON (default: stdout)")->check(detail::writable_path());

    // sweep
    std::string config_path;
    std::optional<std::size_t> replications;
    auto* sweep = app.add_subcommand("sweep", "Structural risk minimization consistency sweep");
    sweep->add_option("--config", config_path, "Sweep configuration JSON")->required()->check(CLI::ExistingFile);
    sweep->add_option("--seed", seed, "Seed (overrides the configuration)");
    sweep->add_option("--replications", replications, "Replications (overrides the configuration)");
    sweep->add_option("--out", cfg.out, "Curve CSV (default: stdout)")->check(detail::writable_path());

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return usage_error;
    }
    cfg.subcommand = app.get_subcommands().front()->get_name();
    auto usage = [&](const CLI::App* sub, const std::string& msg) {
        err << "error: " << msg << "\n" << sub->help();
        return usage_error;
    };
    if (hardcore->parsed() && dichotomy_trials > 0 && !seed) return usage(hardcore, "--dichotomy-trials needs --seed");
    if (sweep->parsed() && !seed) {
        // The seed may also come from the configuration file.
        bool has_seed = false;
        try {
            has_seed = io::parse_json(io::read_text(config_path)).contains("seed");
        } catch (const Error&) {
            has_seed = true; // reported as a domain error below
        }
        if (!has_seed) return usage(sweep, "sweep needs a seed (--seed or \"seed\" in the configuration)");
    }
    cfg.seed = seed;
    const detail::Emitter emit(cfg, out);
    auto note = [&](const std::string& msg) {
        if (cfg.verbosity > 0) err << "[hardcoreboost] " << msg << "\n";
    };

    try {
        if (train->parsed()) {
            const Loss loss = parse_loss(cfg.loss);
            opt.method = method.empty() ? (loss.kind == LossKind::hinge ? Method::subgradient : Method::coordinate)
                                        : parse_method(method);
            opt.record_trace = !trace_path.empty();
            const Sample sample = io::read_dataset_csv(cfg.dataset);
            const FeatureMatrix fm = materialize(io::load_class(cfg.class_spec), sample);
            std::optional<HardCoreCertificate> cert;
            if (!cert_path.empty()) cert = io::certificate_from_json(io::parse_json(io::read_text(cert_path)));
            note("training on " + std::to_string(fm.points()) + " points, " + std::to_string(fm.hypotheses()) +
                 " hypotheses");
            const OptRun result = minimize(fm, loss, opt, cert ? &*cert : nullptr);
            io::json report = io::to_json(result);
            report["loss"] = to_string(loss);
            report["method"] = to_string(opt.method);
            if (cert) report["gap"] = suboptimality_certificate(fm, loss, result.lambda, *cert).gap;
            if (!trace_path.empty()) emit.text(io::trace_csv(result.trace), trace_path);
            emit.json(report, cfg.out);
        } else if (hardcore->parsed()) {
            const Sample sample = io::read_dataset_csv(cfg.dataset);
            const FeatureMatrix fm = materialize(io::load_class(cfg.class_spec), sample);
            HardcoreOptions options;
            std::ofstream tableau;
            if (!tableau_path.empty()) {
                tableau.open(tableau_path);
                require(static_cast<bool>(tableau), ErrorKind::io, "cannot write " + tableau_path);
                options.lp.tableau_dump = &tableau;
            }
            note("solving " + std::to_string(fm.points()) + " per-point programs");
            const HardCoreCertificate cert = compute_hardcore(fm, options);
            io::json report = io::to_json(cert);
            report["core_mass"] = cert.core_mass(fm);
            if (dichotomy_trials > 0) {
                const auto d = verify_dichotomy(fm, cert.core, dichotomy_trials, *seed);
                report["dichotomy"] = {{"trials", d.trials},
                                       {"abstaining", d.abstaining},
                                       {"erring", d.erring},
                                       {"violations", d.violations},
                                       {"seed", *seed}};
            }
            if (!constants_loss.empty()) {
                const Loss loss = parse_loss(constants_loss);
                OptimizerConfig copt;
                copt.method = loss.kind == LossKind::hinge ? Method::subgradient : Method::coordinate;
                copt.record_trace = false;
                const OptRun fit = minimize(fm, loss, copt, &cert);
                const auto k = estimate_constants(fm, loss, cert, fit.lambda);
                report["constants"] = {{"loss", to_string(loss)}, {"b", k.b}, {"c", k.c}};
            }
            emit.json(report, cfg.out);
        } else if (bounds->parsed()) {
            const Loss loss = parse_loss(cfg.loss);
            bi.phi0 = loss_value(loss, 0.0);
            if (!from_cert.empty()) {
                const auto j = io::parse_json(io::read_text(from_cert));
                (void)io::certificate_from_json(j);
                if (mu_opt->count() == 0 && j.contains("core_mass")) bi.core_mass = j.at("core_mass");
                if (j.contains("constants")) {
                    if (b_opt->count() == 0) bi.b = j.at("constants").at("b");
                    if (c_opt->count() == 0) bi.c = j.at("constants").at("c");
                }
            }
            emit.json(io::to_json(full_risk_bound(bi, loss, approx_error)), cfg.out);
        } else if (imposs->parsed()) {
            const Loss loss = parse_loss(cfg.loss);
            const auto report = impossibility_report(depth, sample_size, detail::parse_scales(scales), loss, *seed, retries);
            emit.json(io::to_json(report), cfg.out);
        } else if (sweep->parsed()) {
            const auto j = io::parse_json(io::read_text(config_path));
            SweepConfig sc = io::sweep_config_from_json(j);
            if (seed) sc.seed = *seed;
            if (replications) sc.replications = *replications;
            note("running " + std::to_string(sc.schedule.size() * sc.replications) + " trainings");
            emit.text(io::curve_csv(consistency_sweep(sc)), cfg.out);
        }
    } catch (const Error& e) {
        err << io::error_json(e).dump() << "\n";
        return domain_error;
    } catch (const std::exception& e) {
        err << io::json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return domain_error;
    }
    return ok;
}

} // namespace hcb::cli
