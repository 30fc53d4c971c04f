#pragma once

// The `workbench` command-line front end. run_cli is the whole program; the
// executable only forwards argv and the standard streams.
//
// Exit codes: 0 ok, 1 usage error, 2 invariant violation, 3 precision or
// resource error.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cocycle/actions.hpp"
#include "cocycle/boundary.hpp"
#include "cocycle/config.hpp"
#include "cocycle/entropy.hpp"
#include "cocycle/ergodic_avg.hpp"
#include "cocycle/errors.hpp"
#include "cocycle/free_group.hpp"
#include "cocycle/hyperfinite.hpp"
#include "cocycle/random.hpp"
#include "cocycle/subadditive.hpp"

namespace cocycle::cli {

class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode : int { kOk = 0, kUsage = 1, kInvariant = 2, kPrecision = 3 };

// 17 significant digits, '.' decimal separator, locale independent.
inline std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (ec != std::errc()) return "nan";
    return std::string(buf, p);
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw std::logic_error("CSV row width mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }

    const std::string& text() const { return text_; }

private:
    std::size_t columns_;
    std::string text_;
};

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw ResourceError("write to '" + path + "' failed");
}

// Everything a subcommand needs: effective config, master seed and sinks.
struct Context {
    Config config;
    std::uint64_t master_seed = 0;
    std::ostream* out = &std::cout;
    std::ostream* err = &std::cerr;

    double info_scale() const { return config.get_bool("bits") ? 1.0 / std::numbers::ln2 : 1.0; }
    std::string info(double nats) const { return format_double(nats * info_scale()); }

    void emit(const std::string& csv, nlohmann::json summary) const {
        const auto& path = config.get("output");
        if (path.empty())
            *out << csv;
        else
            write_file(path, csv);
        const auto& json_path = config.get("json");
        if (!json_path.empty()) {
            nlohmann::json cfg = nlohmann::json::object();
            for (const auto& [k, v] : config.values()) cfg[k] = v;
            cfg["seed"] = std::to_string(master_seed);
            summary["config"] = cfg;
            summary["log_base"] = config.get_bool("bits") ? "bits" : "nats";
            write_file(json_path, summary.dump(2) + "\n");
        }
    }
};

template <typename T>
T checked_range(const Config& c, const std::string& key, std::int64_t lo, std::int64_t hi) {
    const auto v = c.get_int(key);
    if (v < lo || v > hi) throw UsageError(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<T>(v);
}

inline int config_rank(const Config& c) { return checked_range<int>(c, "rank", 2, kMaxRank); }

inline ProbabilityVector config_alphabet(const Config& c) {
    const auto w = c.get_list<double>("probabilities");
    try {
        return ProbabilityVector(w);
    } catch (const DomainError& e) {
        throw UsageError("probabilities", e.what());
    }
}

inline PartitionLabeler config_labeler(const Config& c, int rank, int q) {
    const auto& kind = c.get("kind");
    if (kind == "symbol") return PartitionLabeler::symbol_at_identity(rank, q);
    if (kind != "block") throw UsageError("kind", "expected symbol or block, got '" + kind + "'");
    std::vector<ReducedWord> window;
    try {
        for (const auto& w : split_list(c.get("window"))) window.push_back(ReducedWord::parse(rank, w));
    } catch (const DomainError& e) {
        throw UsageError("window", e.what());
    }
    if (window.empty()) throw UsageError("window", "block codes need a non-empty window");
    try {
        if (c.get("code") == "sum") return PartitionLabeler::sum_mod(window, q);
        return PartitionLabeler(PartitionLabeler::Kind::BlockCode, window, q, c.get_list<int>("code"));
    } catch (const DomainError& e) {
        throw UsageError("code", e.what());
    }
}

inline EvalMode config_mode(const Config& c, std::uint64_t seed) {
    const auto& m = c.get("mode");
    const int cap = checked_range<int>(c, "exact_cap", 1, 30);
    if (m == "exact") return EvalMode::exact(cap);
    if (m == "monte-carlo") {
        const auto samples = c.get_u64("samples");
        if (samples < 1) throw UsageError("samples", "must be >= 1");
        auto mode = EvalMode::monte_carlo(samples, seed);
        mode.exact_cap = cap;
        return mode;
    }
    throw UsageError("mode", "expected exact or monte-carlo, got '" + m + "'");
}

struct Levels {
    int n_min;
    int n_max;
    int depth;
};

// Depth sufficiency: L >= n_max + window radius + 1.
inline Levels config_levels(const Config& c, const PartitionLabeler& labeler) {
    Levels lv;
    lv.n_min = checked_range<int>(c, "n_min", 0, 40);
    lv.n_max = checked_range<int>(c, "n_max", 0, 40);
    if (lv.n_max < lv.n_min) throw UsageError("n_max", "must be >= n_min");
    const int need = lv.n_max + static_cast<int>(labeler.radius()) + 1;
    lv.depth = checked_range<int>(c, "depth", 0, 256);
    if (lv.depth == 0) lv.depth = need;
    if (lv.depth < need) throw UsageError("depth", "must be >= n_max + window radius + 1 = " + std::to_string(need));
    return lv;
}

inline FiniteRelationModel config_model(const Config& c) {
    const auto& kind = c.get("model");
    const int length = checked_range<int>(c, "length", 1, 22);
    if (kind == "tail") {
        const int rank = config_rank(c);
        if (sphere_size(length, rank) > 200000) throw UsageError("length", "tail model would exceed 200000 points");
        return FiniteRelationModel::tail(rank, length);
    }
    if (kind == "odometer") return FiniteRelationModel::odometer(length);
    throw UsageError("model", "expected tail or odometer, got '" + kind + "'");
}

// ---------------------------------------------------------------- smb-run

inline int cmd_smb_run(const Context& ctx) {
    const auto& c = ctx.config;
    const int rank = config_rank(c);
    const auto p = config_alphabet(c);
    const auto labeler = config_labeler(c, rank, p.size());
    const auto lv = config_levels(c, labeler);
    const auto runs = checked_range<std::uint64_t>(c, "runs", 1, 100000);
    const auto target = closed_form_cocycle_entropy(labeler, p);

    CsvWriter csv({"n", "class_size", "info_nats", "info_norm", "stderr", "unresolved", "seed_x", "seed_xi", "mode",
                   "estimator"});
    nlohmann::json summary;
    summary["subcommand"] = "smb-run";
    summary["rows"] = nlohmann::json::array();
    summary["runs"] = nlohmann::json::array();
    if (target) summary["target"] = *target * ctx.info_scale();
    std::uint64_t unresolved_total = 0;
    for (std::uint64_t r = 0; r < runs; ++r) {
        const auto seed_x = split_seed(ctx.master_seed, 0x51, r);
        const auto seed_xi = split_seed(ctx.master_seed, 0x52, r);
        const auto mode = config_mode(c, split_seed(ctx.master_seed, 0x53, r));
        const auto traj = smb_trajectory(seed_x, seed_xi, labeler, p, lv.n_max, mode, lv.depth, target);
        const std::string estimator = mode.is_exact() ? "exact" : "plug-in";
        std::uint64_t unresolved = 0;
        for (const auto& row : traj.rows) {
            if (row.n < lv.n_min) continue;
            unresolved += row.unresolved ? 1 : 0;
            const std::string se = row.stderr_value ? ctx.info(*row.stderr_value) : "";
            csv.row({std::to_string(row.n), std::to_string(row.class_size), ctx.info(row.info_nats),
                     ctx.info(row.info_norm), se, row.unresolved ? "1" : "0", std::to_string(seed_x),
                     std::to_string(seed_xi), traj.mode, estimator});
            nlohmann::json j;
            j["n"] = row.n;
            j["class_size"] = row.class_size;
            j["info_nats"] = row.info_nats * ctx.info_scale();
            j["info_norm"] = row.info_norm * ctx.info_scale();
            j["stderr"] = row.stderr_value ? nlohmann::json(*row.stderr_value * ctx.info_scale()) : nlohmann::json();
            j["unresolved"] = row.unresolved ? 1 : 0;
            j["seed_x"] = seed_x;
            j["seed_xi"] = seed_xi;
            j["mode"] = traj.mode;
            j["estimator"] = estimator;
            summary["rows"].push_back(j);
        }
        unresolved_total += unresolved;
        summary["runs"].push_back({{"seed_x", seed_x},
                                   {"seed_xi", seed_xi},
                                   {"boundary", traj.boundary},
                                   {"unresolved_atoms", unresolved},
                                   {"final_info_norm", traj.rows.back().info_norm * ctx.info_scale()}});
    }
    summary["unresolved_atoms"] = unresolved_total;
    ctx.emit(csv.text(), summary);
    if (unresolved_total > 0) *ctx.err << "smb-run: " << unresolved_total << " unresolved atoms\n";
    return kOk;
}

// ----------------------------------------------------------- entropy-sweep

inline int cmd_entropy_sweep(const Context& ctx) {
    const auto& c = ctx.config;
    const int rank = config_rank(c);
    const auto p = config_alphabet(c);
    const auto labeler = config_labeler(c, rank, p.size());
    const auto lv = config_levels(c, labeler);
    SweepConfig sc;
    sc.rank = rank;
    for (int n = lv.n_min; n <= lv.n_max; ++n) sc.n_values.push_back(n);
    sc.samples_per_n = checked_range<std::uint64_t>(c, "xi_samples", 1, 1000000);
    sc.depth = lv.depth;
    sc.seed = split_seed(ctx.master_seed, 0x61, 0);
    sc.miller_madow = c.get_bool("miller_madow");
    const auto mode = config_mode(c, split_seed(ctx.master_seed, 0x62, 0));
    const auto rows = cocycle_entropy_sweep(labeler, p, sc, mode);
    const auto target = closed_form_cocycle_entropy(labeler, p);

    CsvWriter csv({"n", "class_size", "entropy_norm", "stderr", "xi_stderr", "n_xi", "n_samples", "unresolved", "seed",
                   "mode", "estimator"});
    nlohmann::json summary;
    summary["subcommand"] = "entropy-sweep";
    summary["rows"] = nlohmann::json::array();
    if (target) summary["target"] = *target * ctx.info_scale();
    for (const auto& r : rows) {
        const auto& e = r.normalized;
        const std::string est = estimator_name(e.estimator);
        csv.row({std::to_string(r.n), std::to_string(r.class_size), ctx.info(e.value),
                 e.stderr_value ? ctx.info(*e.stderr_value) : "", ctx.info(r.xi_stderr), std::to_string(r.n_xi),
                 std::to_string(e.n_samples), std::to_string(e.unresolved_atoms), std::to_string(sc.seed), mode.name(),
                 est});
        summary["rows"].push_back({{"n", r.n},
                                   {"class_size", r.class_size},
                                   {"entropy_norm", e.value * ctx.info_scale()},
                                   {"stderr", e.stderr_value ? nlohmann::json(*e.stderr_value * ctx.info_scale())
                                                             : nlohmann::json()},
                                   {"xi_stderr", r.xi_stderr * ctx.info_scale()},
                                   {"n_xi", r.n_xi},
                                   {"n_samples", e.n_samples},
                                   {"unresolved", e.unresolved_atoms},
                                   {"seed", sc.seed},
                                   {"mode", mode.name()},
                                   {"estimator", est}});
    }
    ctx.emit(csv.text(), summary);
    return kOk;
}

// ----------------------------------------------------------- covering-demo

inline int required_rows(double delta, std::size_t d_size) {
    const double need = 1.0 + (1.0 - delta) * static_cast<double>(d_size) / (delta * delta);
    return static_cast<int>(std::ceil(need - 1e-9));
}

inline int cmd_covering_demo(const Context& ctx) {
    const auto& c = ctx.config;
    const auto model = config_model(c);
    const double delta = c.get_double("delta");
    if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta", "must lie in (0, 1)");
    InstanceShape shape;
    shape.delta = delta;
    shape.order = checked_range<int>(c, "order", 0, model.max_level());
    shape.max_columns = checked_range<int>(c, "columns", 1, 64);
    shape.center_density = c.get_double("density");
    if (!(shape.center_density >= 0.0 && shape.center_density <= 1.0)) throw UsageError("density", "must lie in [0, 1]");
    shape.adversarial = c.get_bool("adversarial");
    const int rows = checked_range<int>(c, "rows", 0, 100000);
    shape.rows = rows > 0 ? rows : required_rows(delta, 2);
    const auto instances = checked_range<std::uint64_t>(c, "instances", 1, 100000);

    CsvWriter csv({"instance", "base_point", "rows", "d_size", "selected", "mass", "min_image", "rhs",
                   "covered_fraction", "hypothesis", "failing_points", "rows_sufficient", "bound_holds", "seed"});
    nlohmann::json summary;
    summary["subcommand"] = "covering-demo";
    summary["instances"] = nlohmann::json::array();
    bool violated = false;
    double min_fraction = std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < instances; ++i) {
        const auto y = static_cast<PointId>(split_seed(ctx.master_seed, 0xc0, i) % model.size());
        const auto seed = split_seed(ctx.master_seed, 0xc1, i);
        const auto inst = generate_covering_instance(model, y, shape, seed);
        const auto r = covering(model, inst, y);
        if (!r.disjoint || (r.bound_asserted && !r.bound_holds)) violated = true;
        min_fraction = std::min(min_fraction, r.covered_fraction);
        csv.row({std::to_string(i), model.point_string(y), std::to_string(shape.rows), std::to_string(inst.d.size()),
                 std::to_string(r.selected.size()), std::to_string(r.mass), std::to_string(r.min_image),
                 format_double(r.rhs), format_double(r.covered_fraction), r.hypothesis.holds ? "pass" : "fail",
                 std::to_string(r.hypothesis.failing_points.size()), r.rows_sufficient ? "1" : "0",
                 r.bound_holds ? "1" : "0", std::to_string(seed)});
        summary["instances"].push_back({{"instance", i},
                                        {"base_point", model.point_string(y)},
                                        {"selected", r.selected.size()},
                                        {"mass", r.mass},
                                        {"min_image", r.min_image},
                                        {"rhs", r.rhs},
                                        {"covered_fraction", r.covered_fraction},
                                        {"hypothesis", r.hypothesis.holds},
                                        {"failing_points", r.hypothesis.failing_points.size()},
                                        {"rows_sufficient", r.rows_sufficient},
                                        {"bound_holds", r.bound_holds},
                                        {"seed", seed}});
    }
    summary["min_covered_fraction"] = min_fraction;
    summary["violation"] = violated;
    ctx.emit(csv.text(), summary);
    if (violated) throw InvariantViolation("covering bound failed on an instance satisfying the hypothesis");
    return kOk;
}

// ----------------------------------------------------------- folner-report

inline int cmd_folner_report(const Context& ctx) {
    const auto& c = ctx.config;
    const auto model = config_model(c);
    const int order = checked_range<int>(c, "order", 0, model.max_level());
    const std::vector<InnerAutomorphism> d{InnerAutomorphism::identity(model), cyclic_automorphism(model, order)};

    CsvWriter csv({"n", "class_size", "defect", "defect_num", "defect_den", "order", "model"});
    nlohmann::json summary;
    summary["subcommand"] = "folner-report";
    summary["rows"] = nlohmann::json::array();
    std::string problem;
    for (int n = 0; n <= model.max_level(); ++n) {
        const Rational q = folner_defect_exact(model, d, n);
        const double v = boost::rational_cast<double>(q);
        const bool ok = n >= order ? q == Rational(0) : (q > Rational(0) || model.class_size(order, 0) == 1);
        if (!ok && problem.empty()) problem = "defect at level " + std::to_string(n) + " contradicts order " + std::to_string(order);
        csv.row({std::to_string(n), std::to_string(model.class_size(n, 0)), format_double(v),
                 std::to_string(q.numerator()), std::to_string(q.denominator()), std::to_string(order), c.get("model")});
        summary["rows"].push_back({{"n", n},
                                   {"class_size", model.class_size(n, 0)},
                                   {"defect", v},
                                   {"defect_num", q.numerator()},
                                   {"defect_den", q.denominator()}});
    }
    ctx.emit(csv.text(), summary);
    if (!problem.empty()) throw InvariantViolation(problem);
    return kOk;
}

// ------------------------------------------------------------- ergodic-avg

inline int cmd_ergodic_avg(const Context& ctx) {
    const auto& c = ctx.config;
    const int rank = config_rank(c);
    const auto p = config_alphabet(c);
    DiagnosticConfig dc;
    dc.rank = rank;
    dc.num_starts = checked_range<int>(c, "starts", 1, 100000);
    dc.n_min = checked_range<int>(c, "n_min", 0, 20);
    dc.n_max = checked_range<int>(c, "n_max", 0, 20);
    if (dc.n_max < dc.n_min) throw UsageError("n_max", "must be >= n_min");
    dc.seed = split_seed(ctx.master_seed, 0xe0, 0);
    const auto& kind = c.get("observable");
    const int symbol = checked_range<int>(c, "symbol", 0, p.size() - 1);
    std::optional<double> variance;
    ExtendedObservable f;
    if (kind == "symbol") {
        f = ExtendedObservable::symbol_indicator(rank, symbol);
        variance = p[symbol] * (1.0 - p[symbol]);
    } else if (kind == "constant") {
        f = ExtendedObservable::constant(1.0);
        variance = 0.0;
    } else if (kind == "boundary-letter") {
        f = ExtendedObservable::boundary_letter_indicator(dc.n_max + 1, Generator::from_code(0));
    } else {
        throw UsageError("observable", "expected symbol, constant or boundary-letter, got '" + kind + "'");
    }
    const auto rep = ergodicity_diagnostic(f, p, dc);

    CsvWriter csv({"n", "class_size", "min_average", "max_average", "spread", "reference_bound", "num_starts", "seed"});
    nlohmann::json summary;
    summary["subcommand"] = "ergodic-avg";
    summary["rows"] = nlohmann::json::array();
    for (const auto& row : rep.rows) {
        const auto size = class_size(rank, row.n);
        std::string bound;
        nlohmann::json jbound;
        if (variance) {
            const double b = 8.0 * std::sqrt(*variance / static_cast<double>(size));
            bound = format_double(b);
            jbound = b;
        }
        csv.row({std::to_string(row.n), std::to_string(size), format_double(row.min_average),
                 format_double(row.max_average), format_double(row.spread), bound, std::to_string(rep.num_starts),
                 std::to_string(rep.seed)});
        summary["rows"].push_back({{"n", row.n},
                                   {"min_average", row.min_average},
                                   {"max_average", row.max_average},
                                   {"spread", row.spread},
                                   {"reference_bound", jbound}});
    }
    summary["non_decaying"] = rep.non_decaying;
    summary["seed"] = rep.seed;
    ctx.emit(csv.text(), summary);
    if (rep.non_decaying) *ctx.err << "ergodic-avg: spread does not decay\n";
    return kOk;
}

// ------------------------------------------------------- subadditive-sweep

inline int cmd_subadditive_sweep(const Context& ctx) {
    const auto& c = ctx.config;
    const int rank = config_rank(c);
    const int length = checked_range<int>(c, "length", 1, 8);
    const auto model = FiniteRelationModel::tail(rank, length);
    const auto p = config_alphabet(c);
    const auto labeler = config_labeler(c, rank, p.size());
    const auto& fname = c.get("functional");
    SubadditiveFunctional f;
    bool information_valued = false;
    if (fname == "hP") {
        f = SubadditiveFunctional::entropy_hP(model, labeler, p, config_mode(c, split_seed(ctx.master_seed, 0x71, 0)));
        information_valued = true;
    } else if (fname == "cardinality") {
        f = SubadditiveFunctional::cardinality();
    } else if (fname == "squared") {
        f = SubadditiveFunctional::squared_cardinality();
    } else {
        throw UsageError("functional", "expected hP, cardinality or squared, got '" + fname + "'");
    }
    const double scale = information_valued ? ctx.info_scale() : 1.0;

    std::vector<int> levels = c.get_list<int>("levels");
    if (levels.empty())
        for (int n = 0; n <= length; ++n) levels.push_back(n);
    for (int n : levels)
        if (n < 0 || n > length) throw UsageError("levels", "level " + std::to_string(n) + " outside [0, length]");
    std::vector<Candidate> candidates;
    for (const auto& b : split_list(c.get("blocks"))) {
        const auto parts = split_list(b, '-');
        if (parts.size() != 2) throw UsageError("blocks", "expected first-last, got '" + b + "'");
        const int first = Config::parse_number<int>("blocks", parts[0]);
        const int last = Config::parse_number<int>("blocks", parts[1]);
        if (first < 1 || last < first || last > length) throw UsageError("blocks", "block '" + b + "' outside [1, length]");
        candidates.push_back(coordinate_block_candidate(model, first, last));
    }
    const int trials = checked_range<int>(c, "trials", 0, 1000000);
    const auto rep = subadditive_limit_harness(f, model, levels, candidates);
    const auto check = check_subadditive(f, model, trials, split_seed(ctx.master_seed, 0x72, 0));

    CsvWriter csv({"kind", "name", "n", "value", "stderr", "gap", "within_noise", "functional", "seed"});
    const std::string seed = std::to_string(ctx.master_seed);
    for (const auto& row : rep.levels)
        csv.row({"level", "chain-" + std::to_string(row.n), std::to_string(row.n), format_double(row.s * scale),
                 format_double(row.stderr_value * scale), format_double(row.gap * scale), row.within_noise ? "1" : "0",
                 f.name, seed});
    for (const auto& cand : rep.candidates)
        csv.row({"candidate", cand.name, "", format_double(cand.value * scale), "",
                 format_double((cand.value - rep.infimum) * scale), "", f.name, seed});

    nlohmann::json summary;
    summary["subcommand"] = "subadditive-sweep";
    summary["functional"] = f.name;
    summary["infimum"] = rep.infimum * scale;
    summary["supplied_infimum"] = std::isfinite(rep.supplied_infimum) ? nlohmann::json(rep.supplied_infimum * scale)
                                                                      : nlohmann::json();
    summary["lower_bound_holds"] = rep.lower_bound_holds;
    summary["nonincreasing_within_noise"] = rep.nonincreasing_within_noise;
    summary["ring_bound_holds"] = rep.ring_bound_holds;
    summary["worst_ring_slack"] = rep.worst_ring_slack * scale;
    summary["check"] = {{"passed", check.passed},
                        {"first_violation", violation_name(check.first)},
                        {"detail", check.detail},
                        {"trials", check.trials},
                        {"subadditive_equalities", check.subadditive_equalities}};
    ctx.emit(csv.text(), summary);
    if (!check.passed) throw InvariantViolation(f.name + ": " + violation_name(check.first) + " violated: " + check.detail);
    if (!rep.lower_bound_holds || !rep.ring_bound_holds)
        throw InvariantViolation(f.name + ": harness inequality violated");
    return kOk;
}

// ------------------------------------------------------------------ selftest

// Exact identities that must hold on any build; one line per check.
inline std::vector<std::pair<std::string, std::function<bool()>>> selftest_checks() {
    std::vector<std::pair<std::string, std::function<bool()>>> checks;
    checks.emplace_back("bernoulli-identity", [] {
        const auto p = ProbabilityVector::uniform(2);
        const auto lab = PartitionLabeler::symbol_at_identity(2, 2);
        for (std::uint64_t s = 0; s < 3; ++s) {
            const auto traj = smb_trajectory(split_seed(7, 1, s), split_seed(7, 2, s), lab, p, 6, EvalMode::exact());
            for (const auto& r : traj.rows)
                if (std::abs(r.info_norm - std::numbers::ln2) > 1e-12) return false;
        }
        return true;
    });
    checks.emplace_back("tail-class-size", [] {
        for (int r : {2, 3})
            for (int n = 0; n <= 4; ++n) {
                const auto xi = sample_prefix(n + 1, r, 11);
                if (tail_class(xi, n).size() != class_size(r, n)) return false;
            }
        return true;
    });
    checks.emplace_back("cylinder-mass", [] {
        for (int r : {2, 3})
            for (int d = 1; d <= 4; ++d) {
                Rational total(0);
                for (std::size_t i = 0; i < sphere_size(d, r); ++i) total += cylinder_measure(d, r).exact();
                if (total != Rational(1)) return false;
            }
        return true;
    });
    checks.emplace_back("cocycle-action", [] {
        const auto xi = sample_prefix(8, 2, 5);
        for (int n = 1; n <= 3; ++n)
            for (const auto& eta : tail_class(xi, n)) {
                const auto a = fundamental_cocycle(eta, xi, n);
                const auto moved = act(a, xi).point;
                for (int i = 1; i <= moved.depth(); ++i)
                    if (moved.at(i) != eta.at(i)) return false;
                if (a.length() % 2 != 0 || busemann(eta, a) > 0) return false;
            }
        return true;
    });
    checks.emplace_back("folner-zero", [] {
        const auto m = FiniteRelationModel::odometer(4);
        const std::vector<InnerAutomorphism> d{InnerAutomorphism::identity(m), cyclic_automorphism(m, 2)};
        for (int n = 0; n <= 4; ++n) {
            const auto q = folner_defect_exact(m, d, n);
            if ((n >= 2) != (q == Rational(0))) return false;
        }
        return true;
    });
    checks.emplace_back("odometer-average", [] {
        const auto m = FiniteRelationModel::odometer(5);
        const auto f = cylinder_indicator(m, 3, 2);
        for (PointId y = 0; y < m.size(); ++y)
            for (int n = 2; n <= 5; ++n)
                if (class_average(m, f, y, n) != Rational(1, 4)) return false;
        return true;
    });
    checks.emplace_back("entropy-levels-constant", [] {
        const auto m = FiniteRelationModel::tail(2, 3);
        const ProbabilityVector p({0.9, 0.1});
        const auto f = SubadditiveFunctional::entropy_hP(m, PartitionLabeler::symbol_at_identity(2, 2), p);
        const std::vector<int> levels{0, 1, 2, 3};
        const auto rep = subadditive_limit_harness(f, m, levels, {});
        for (const auto& row : rep.levels)
            if (std::abs(row.s - shannon(p)) > 1e-12) return false;
        return true;
    });
    return checks;
}

inline int cmd_selftest(const Context& ctx) {
    bool all = true;
    for (const auto& [name, check] : selftest_checks()) {
        bool ok = false;
        try {
            ok = check();
        } catch (const std::exception& e) {
            *ctx.err << "selftest " << name << ": " << e.what() << "\n";
        }
        *ctx.out << (ok ? "ok   " : "FAIL ") << name << "\n";
        all = all && ok;
    }
    if (!all) throw InvariantViolation("selftest failed");
    return kOk;
}

// -------------------------------------------------------------------- driver

inline const std::vector<std::pair<std::string, std::string>>& subcommands() {
    static const std::vector<std::pair<std::string, std::string>> list = {
        {"smb-run", "normalized information along (x, xi) trajectories"},
        {"entropy-sweep", "normalized refined entropy per level"},
        {"covering-demo", "generated covering instances and the covered mass"},
        {"folner-report", "Folner defect of a cyclic automorphism per level"},
        {"ergodic-avg", "class averages and their spread across start points"},
        {"subadditive-sweep", "chain averages, candidate infimum and property check"},
        {"selftest", "exact-identity suite"},
    };
    return list;
}

inline int dispatch(const std::string& name, const Context& ctx) {
    if (name == "smb-run") return cmd_smb_run(ctx);
    if (name == "entropy-sweep") return cmd_entropy_sweep(ctx);
    if (name == "covering-demo") return cmd_covering_demo(ctx);
    if (name == "folner-report") return cmd_folner_report(ctx);
    if (name == "ergodic-avg") return cmd_ergodic_avg(ctx);
    if (name == "subadditive-sweep") return cmd_subadditive_sweep(ctx);
    if (name == "selftest") return cmd_selftest(ctx);
    throw UsageError("subcommand", "unknown subcommand '" + name + "'");
}

// Precedence: defaults < config file < WORKBENCH_SEED (seed only) < flags.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cocycle-entropy workbench over free-group boundary actions", "workbench"};
    app.require_subcommand(1, 1);
    std::string config_path;
    app.add_option("--config", config_path, "key=value configuration file");
    std::map<std::string, std::string> flags;
    for (const auto& spec : key_specs()) {
        if (spec.key == "bits") continue;
        app.add_option("--" + spec.key, flags[spec.key], spec.help + " [" + spec.section + "]");
    }
    bool bits = false;
    app.add_flag("--bits", bits, "report information in bits");
    for (const auto& [name, help] : subcommands()) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        Context ctx;
        ctx.out = &out;
        ctx.err = &err;
        if (!config_path.empty()) ctx.config.load_file(config_path);
        if (const char* env = std::getenv("WORKBENCH_SEED"); env && *env) {
            (void)Config::parse_number<std::uint64_t>("WORKBENCH_SEED", env);
            ctx.config.set("seed", env);
        }
        for (const auto& spec : key_specs()) {
            if (spec.key == "bits") continue;
            if (app.count("--" + spec.key) > 0) ctx.config.set(spec.key, flags[spec.key]);
        }
        if (bits) ctx.config.set("bits", "true");
        for (const char* key : {"bits", "miller_madow", "adversarial"}) (void)ctx.config.get_bool(key);
        ctx.master_seed = ctx.config.get_u64("seed");
        return dispatch(app.get_subcommands().front()->get_name(), ctx);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const InvariantViolation& e) {
        err << "invariant violation: " << e.what() << "\n";
        return kInvariant;
    } catch (const StructuralError& e) {
        err << "invariant violation: " << e.what() << "\n";
        return kInvariant;
    } catch (const PrecisionError& e) {
        err << "precision error: " << e.what() << "\n";
        return kPrecision;
    } catch (const ResourceError& e) {
        err << "resource error: " << e.what() << "\n";
        return kPrecision;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kPrecision;
    }
}

}  // namespace cocycle::cli
