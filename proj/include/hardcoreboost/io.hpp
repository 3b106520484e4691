#pragma once

// Files in and out: dataset and class CSVs, JSON reports with matching readers,
// trace/curve CSVs, and atomic writes.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardcoreboost/bounds.hpp"
#include "hardcoreboost/error.hpp"
#include "hardcoreboost/experiments.hpp"
#include "hardcoreboost/hardcore.hpp"
#include "hardcoreboost/hypotheses.hpp"
#include "hardcoreboost/optimize.hpp"
#include "hardcoreboost/sample.hpp"

namespace hcb::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Files

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Writes to a sibling temporary file, then renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorKind::io, "cannot write " + tmp.string());
        out << content;
        out.flush();
        require(static_cast<bool>(out), ErrorKind::io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::io, "cannot move output into place at " + path.string());
    }
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_number(const std::string& text, std::size_t line_no)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::logic_error&) {
        used = 0;
    }
    require(used == text.size() && !text.empty() && std::isfinite(v), ErrorKind::io,
            "line " + std::to_string(line_no) + ": not a finite number: '" + text + "'");
    return v;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::string& text)
{
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line.front() == '#') continue;
        auto cells = split_csv_line(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        require(cells.size() == table.header.size(), ErrorKind::io,
                "line " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                    " fields, found " + std::to_string(cells.size()));
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(parse_number(c, line_no));
        table.rows.push_back(std::move(row));
    }
    require(!table.header.empty(), ErrorKind::io, "CSV has no header");
    return table;
}

} // namespace detail

/// Dataset CSV: header f1..fd,label[,weight]; labels are +1/-1; weights are normalized.
inline Sample parse_dataset_csv(const std::string& text)
{
    const auto table = detail::read_csv(text);
    const auto& h = table.header;
    const bool weighted = !h.empty() && h.back() == "weight";
    const std::size_t label_col = weighted ? h.size() - 2 : h.size() - 1;
    require(h.size() >= (weighted ? 3u : 2u) && h[label_col] == "label", ErrorKind::io,
            "dataset header must be f1,...,fd,label[,weight]");
    for (std::size_t k = 0; k < label_col; ++k)
        require(h[k] == "f" + std::to_string(k + 1), ErrorKind::io, "dataset feature column " +
                                                                         std::to_string(k + 1) + " must be named f" +
                                                                         std::to_string(k + 1));
    require(!table.rows.empty(), ErrorKind::io, "dataset has no rows");
    DenseMatrix x(0, label_col);
    std::vector<int> labels;
    std::vector<double> weights;
    for (const auto& row : table.rows) {
        x.append_row(std::span<const double>(row.data(), label_col));
        const double y = row[label_col];
        require(y == 1.0 || y == -1.0, ErrorKind::io, "labels must be +1 or -1");
        labels.push_back(static_cast<int>(y));
        if (weighted) weights.push_back(row.back());
    }
    if (weighted) return Sample::normalized(std::move(x), std::move(labels), std::move(weights));
    return Sample(std::move(x), std::move(labels));
}

inline Sample read_dataset_csv(const std::filesystem::path& path) { return parse_dataset_csv(read_text(path)); }

/// Explicit class CSV: header x1..xd,h1..hn, one row per instance.
inline HypothesisClass parse_explicit_class_csv(const std::string& text)
{
    const auto table = detail::read_csv(text);
    std::size_t d = 0;
    while (d < table.header.size() && table.header[d] == "x" + std::to_string(d + 1)) ++d;
    const std::size_t n = table.header.size() - d;
    require(d >= 1 && n >= 1, ErrorKind::io, "class header must be x1,...,xd,h1,...,hn");
    for (std::size_t k = 0; k < n; ++k)
        require(table.header[d + k] == "h" + std::to_string(k + 1), ErrorKind::io,
                "class column " + std::to_string(d + k + 1) + " must be named h" + std::to_string(k + 1));
    DenseMatrix inst(0, d), feats(0, n);
    for (const auto& row : table.rows) {
        inst.append_row(std::span<const double>(row.data(), d));
        feats.append_row(std::span<const double>(row.data() + d, n));
    }
    return HypothesisClass::explicit_table(std::move(inst), std::move(feats));
}

/// "proj:<d>", "lattice:<i>x<d>" or "explicit:<path>".
inline HypothesisClass load_class(const std::string& spec)
{
    if (spec.starts_with("explicit:")) return parse_explicit_class_csv(read_text(spec.substr(9)));
    return parse_class_spec(spec);
}

inline std::string trace_csv(const std::vector<TraceEntry>& trace)
{
    std::ostringstream out;
    out.precision(17);
    out << "iter,objective,l1_norm,grad_sup_norm\n";
    for (const auto& t : trace) out << t.iter << ',' << t.objective << ',' << t.l1_norm << ',' << t.grad_sup_norm << '\n';
    return out.str();
}

inline std::string curve_csv(const std::vector<StageResult>& curve)
{
    std::ostringstream out;
    out.precision(17);
    out << "stage,m,class_size,epsilon,excess_risk_median,excess_risk_p90,replication_count\n";
    for (const auto& s : curve)
        out << s.stage << ',' << s.m << ',' << s.class_size << ',' << s.epsilon << ',' << s.median << ',' << s.p90
            << ',' << s.excess.size() << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

/// Non-finite reals are stored as strings so every report stays valid JSON.
inline json real(double v)
{
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline double real(const json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw Error(ErrorKind::io, "not a number: " + s);
    }
    return j.get<double>();
}

inline json reals(const std::vector<double>& v)
{
    json a = json::array();
    for (double x : v) a.push_back(real(x));
    return a;
}

inline std::vector<double> reals(const json& j)
{
    std::vector<double> out;
    for (const auto& x : j) out.push_back(real(x));
    return out;
}

template <typename F>
auto guarded(F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::io, std::string("malformed report: ") + e.what());
    }
}

} // namespace detail

inline json to_json(const HardCoreCertificate& c)
{
    json j;
    j["kind"] = "hardcore_certificate";
    j["points"] = c.p.size();
    j["core"] = std::vector<std::size_t>(c.core.indices().begin(), c.core.indices().end());
    j["p"] = detail::reals(c.p);
    j["separator"] = detail::reals(c.separator.vector());
    j["margin"] = detail::real(c.margin);
    j["point_optima"] = detail::reals(c.point_optima);
    json gens = json::array();
    for (const auto& g : c.generators) gens.push_back(detail::reals(g));
    j["generators"] = gens;
    j["checks"] = {{"decorrelation_max", detail::real(c.checks.decorrelation_max)},
                   {"core_margin_max", detail::real(c.checks.core_margin_max)},
                   {"complement_margin_min", detail::real(c.checks.complement_margin_min)},
                   {"support_matches_core", c.checks.support_matches_core},
                   {"passed", c.checks.passed}};
    return j;
}

inline HardCoreCertificate certificate_from_json(const json& j)
{
    return detail::guarded([&] {
        require(j.at("kind") == "hardcore_certificate", ErrorKind::io, "not a hard-core certificate");
        HardCoreCertificate c;
        const auto m = j.at("points").get<std::size_t>();
        c.core = RegionMask(j.at("core").get<std::vector<std::size_t>>(), m);
        c.p = detail::reals(j.at("p"));
        c.separator = Weighting(detail::reals(j.at("separator")));
        c.margin = detail::real(j.at("margin"));
        c.point_optima = detail::reals(j.at("point_optima"));
        for (const auto& g : j.at("generators")) c.generators.push_back(detail::reals(g));
        const auto& k = j.at("checks");
        c.checks.decorrelation_max = detail::real(k.at("decorrelation_max"));
        c.checks.core_margin_max = detail::real(k.at("core_margin_max"));
        c.checks.complement_margin_min = detail::real(k.at("complement_margin_min"));
        c.checks.support_matches_core = k.at("support_matches_core").get<bool>();
        c.checks.passed = k.at("passed").get<bool>();
        require(c.p.size() == m && c.point_optima.size() == m, ErrorKind::io, "certificate vectors have wrong length");
        return c;
    });
}

inline json to_json(const BoundInputs& in)
{
    return {{"m", in.m},         {"n", in.n},           {"delta", in.delta},   {"epsilon", in.epsilon},
            {"rho", in.rho},     {"phi0", in.phi0},     {"core_mass", in.core_mass}, {"c", in.c},
            {"b", in.b},         {"m_core", in.m_core}, {"m_plus", in.m_plus}};
}

inline BoundInputs bound_inputs_from_json(const json& j)
{
    return detail::guarded([&] {
        BoundInputs in;
        in.m = j.at("m");
        in.n = j.at("n");
        in.delta = j.at("delta");
        in.epsilon = j.at("epsilon");
        in.rho = j.at("rho");
        in.phi0 = j.at("phi0");
        in.core_mass = j.at("core_mass");
        in.c = j.at("c");
        in.b = j.at("b");
        in.m_core = j.at("m_core");
        in.m_plus = j.at("m_plus");
        return in;
    });
}

inline json to_json(const BoundReport& r)
{
    json j;
    j["kind"] = "bound_report";
    j["loss"] = r.loss;
    j["inputs"] = to_json(r.inputs);
    j["approx_error"] = r.approx_error;
    json terms = json::array();
    for (const auto& t : r.terms) terms.push_back({{"label", t.label}, {"value", detail::real(t.value)}, {"vacuous", t.vacuous}});
    j["terms"] = terms;
    json flags = json::object();
    for (const auto& f : r.flags) flags[f.name] = f.holds;
    j["flags"] = flags;
    j["valid"] = r.valid();
    j["total"] = detail::real(r.total);
    return j;
}

inline BoundReport bound_report_from_json(const json& j)
{
    return detail::guarded([&] {
        require(j.at("kind") == "bound_report", ErrorKind::io, "not a bound report");
        BoundReport r;
        r.loss = j.at("loss").get<std::string>();
        r.inputs = bound_inputs_from_json(j.at("inputs"));
        r.approx_error = j.at("approx_error");
        for (const auto& t : j.at("terms"))
            r.terms.push_back({t.at("label").get<std::string>(), detail::real(t.at("value")), t.at("vacuous").get<bool>()});
        for (const auto& [name, holds] : j.at("flags").items()) r.flags.push_back({name, holds.get<bool>()});
        r.total = detail::real(j.at("total"));
        return r;
    });
}

inline json to_json(const OptRun& run)
{
    json j;
    j["kind"] = "optimizer_run";
    j["lambda"] = detail::reals(run.lambda.vector());
    j["objective"] = detail::real(run.objective);
    j["stop_reason"] = to_string(run.stop);
    j["iterations"] = run.iterations;
    j["l1_norm"] = detail::real(run.lambda.l1_norm());
    j["dual_bound"] = run.dual_bound ? detail::real(*run.dual_bound) : json(nullptr);
    j["truncated_step"] = run.truncated_step;
    return j;
}

inline OptRun run_from_json(const json& j)
{
    return detail::guarded([&] {
        require(j.at("kind") == "optimizer_run", ErrorKind::io, "not an optimizer run");
        OptRun run;
        run.lambda = Weighting(detail::reals(j.at("lambda")));
        run.objective = detail::real(j.at("objective"));
        const auto stop = j.at("stop_reason").get<std::string>();
        if (stop == "gradient") run.stop = StopReason::gradient;
        else if (stop == "iterations") run.stop = StopReason::iterations;
        else if (stop == "gap") run.stop = StopReason::gap;
        else throw Error(ErrorKind::io, "unknown stop reason " + stop);
        run.iterations = j.at("iterations");
        if (!j.at("dual_bound").is_null()) run.dual_bound = detail::real(j.at("dual_bound"));
        run.truncated_step = j.at("truncated_step");
        return run;
    });
}

inline json to_json(const Sample& s)
{
    json pts = json::array();
    for (std::size_t k = 0; k < s.size(); ++k) {
        const auto x = s.instance(k);
        pts.push_back({{"x", detail::reals(std::vector<double>(x.begin(), x.end()))}, {"y", s.label(k)}, {"w", s.weight(k)}});
    }
    return pts;
}

inline Sample sample_from_json(const json& j)
{
    DenseMatrix x;
    std::vector<int> labels;
    std::vector<double> w;
    for (const auto& p : j) {
        x.append_row(detail::reals(p.at("x")));
        labels.push_back(p.at("y"));
        w.push_back(p.at("w"));
    }
    return Sample(std::move(x), std::move(labels), std::move(w));
}

inline json to_json(const ImpossibilityReport& r)
{
    json j;
    j["kind"] = "impossibility_report";
    j["depth"] = r.depth;
    j["m"] = r.m;
    j["loss"] = r.loss;
    j["seed"] = r.seed;
    j["attempts"] = r.attempts;
    j["lambda_hat"] = detail::reals(r.lambda_hat.vector());
    j["lambda_bar"] = detail::reals(StaggeredWorld::reference_separator().vector());
    j["sample_margin"] = detail::real(r.sample_margin);
    j["classification_risk"] = r.classification_risk;
    j["misclassified_mass"] = r.misclassified_mass;
    j["event"] = r.event;
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"scale", row.scale},
                        {"risk_hat", detail::real(row.risk_hat)},
                        {"risk_bar", detail::real(row.risk_bar)},
                        {"saturated", row.saturated}});
    j["scales"] = rows;
    j["sample"] = to_json(r.sample);
    return j;
}

inline ImpossibilityReport impossibility_from_json(const json& j)
{
    return detail::guarded([&] {
        require(j.at("kind") == "impossibility_report", ErrorKind::io, "not an impossibility report");
        ImpossibilityReport r;
        r.depth = j.at("depth");
        r.m = j.at("m");
        r.loss = j.at("loss").get<std::string>();
        r.seed = j.at("seed");
        r.attempts = j.at("attempts");
        r.lambda_hat = Weighting(detail::reals(j.at("lambda_hat")));
        r.sample_margin = detail::real(j.at("sample_margin"));
        r.classification_risk = j.at("classification_risk");
        r.misclassified_mass = j.at("misclassified_mass");
        r.event = j.at("event");
        for (const auto& row : j.at("scales"))
            r.rows.push_back({row.at("scale").get<double>(), detail::real(row.at("risk_hat")),
                              detail::real(row.at("risk_bar")), row.at("saturated").get<bool>()});
        r.sample = sample_from_json(j.at("sample"));
        return r;
    });
}

/// Sweep configuration file. Every field is optional; omitted fields keep their defaults.
/// {"world": {"eta": [...]}, "stages": 4 | "schedule": [{"m":..,"class":..,"epsilon":..}],
///  "loss": "logistic", "optimizer": {"method": "coord", "max_iters": .., "grad_tol": ..,
///  "step_scale": ..}, "seed": .., "replications": ..}
inline SweepConfig sweep_config_from_json(const json& j)
{
    return detail::guarded([&] {
        SweepConfig cfg;
        if (j.contains("world")) cfg.world.eta = detail::reals(j.at("world").at("eta"));
        if (j.contains("stages")) cfg.schedule = default_schedule(j.at("stages").get<int>());
        if (j.contains("schedule")) {
            cfg.schedule.clear();
            for (const auto& s : j.at("schedule"))
                cfg.schedule.push_back({s.at("m").get<std::size_t>(), s.at("class").get<int>(), s.at("epsilon").get<double>()});
        }
        if (j.contains("loss")) cfg.loss = parse_loss(j.at("loss").get<std::string>());
        if (j.contains("optimizer")) {
            const auto& o = j.at("optimizer");
            if (o.contains("method")) cfg.optimizer.method = parse_method(o.at("method").get<std::string>());
            if (o.contains("max_iters")) cfg.optimizer.max_iters = o.at("max_iters");
            if (o.contains("grad_tol")) cfg.optimizer.grad_tol = o.at("grad_tol");
            if (o.contains("step_scale")) cfg.optimizer.step_scale = o.at("step_scale");
        }
        if (j.contains("seed")) cfg.seed = j.at("seed");
        if (j.contains("replications")) cfg.replications = j.at("replications");
        return cfg;
    });
}

inline json to_json(const SweepConfig& cfg)
{
    json sched = json::array();
    for (const auto& s : cfg.schedule) sched.push_back({{"m", s.m}, {"class", s.class_index}, {"epsilon", s.epsilon}});
    return {{"world", {{"eta", detail::reals(cfg.world.eta)}}},
            {"schedule", sched},
            {"loss", to_string(cfg.loss)},
            {"optimizer",
             {{"method", to_string(cfg.optimizer.method)},
              {"max_iters", cfg.optimizer.max_iters},
              {"grad_tol", cfg.optimizer.grad_tol},
              {"step_scale", cfg.optimizer.step_scale}}},
            {"seed", cfg.seed},
            {"replications", cfg.replications}};
}

inline json parse_json(const std::string& text)
{
    return detail::guarded([&] { return json::parse(text); });
}

inline json error_json(const Error& e)
{
    return {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
}

} // namespace hcb::io
