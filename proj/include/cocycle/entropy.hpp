#pragma once

// Entropy quantities of a Bernoulli shift along the horospherical relation:
// Shannon entropy, the entropy function h^P of subset functions, information
// functions of refined partitions, cocycle-entropy sweeps and SMB
// trajectories. All values are in nats.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cocycle/actions.hpp"
#include "cocycle/boundary.hpp"
#include "cocycle/errors.hpp"
#include "cocycle/free_group.hpp"
#include "cocycle/random.hpp"

namespace cocycle {

// Neumaier summation; sums here run over up to ~10^5 terms of equal sign and
// several checks are exact identities at 1e-12.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double xlogx(double q) { return q > 0.0 ? q * std::log(q) : 0.0; }

// -sum q log q over a distribution, zero terms skipped.
inline double shannon(std::span<const double> q) {
    CompensatedSum s;
    for (double v : q) s.add(-xlogx(v));
    return s.value();
}

inline double shannon(const ProbabilityVector& p) { return shannon(p.weights()); }

enum class Estimator { Exact, PlugIn, PlugInMillerMadow };

inline std::string estimator_name(Estimator e) {
    switch (e) {
        case Estimator::Exact: return "exact";
        case Estimator::PlugIn: return "plug-in";
        case Estimator::PlugInMillerMadow: return "plug-in-miller-madow";
    }
    return "unknown";
}

struct EntropyEstimate {
    double value = 0.0;
    std::optional<double> stderr_value;  // none for exact
    std::uint64_t n_samples = 0;
    Estimator estimator = Estimator::Exact;
    std::uint64_t unresolved_atoms = 0;
};

// Keys {alpha(z, xi) : z in R_n(xi)} whose translates refine P along the
// R_n-class of xi. Distinct by class-injectivity.
inline std::vector<ReducedWord> refinement_keys(const BoundaryPrefix& xi, int n) {
    std::vector<ReducedWord> keys;
    for (const auto& z : tail_class(xi, n)) keys.push_back(fundamental_cocycle(z, xi, n));
    return keys;
}

// H of the distribution of label tuples of a component, by enumeration.
inline double component_entropy(const CoordinateComponent& comp, const PartitionLabeler& labeler,
                                const ProbabilityVector& p, int cap) {
    if (labeler.kind() == PartitionLabeler::Kind::SymbolAtIdentity) return shannon(p);
    std::map<std::vector<int>, double> dist;
    std::vector<int> tuple(comp.keys.size());
    std::vector<int> symbols;
    for_each_assignment(comp, p, cap, [&](const std::vector<int>& assignment, double weight) {
        for (std::size_t i = 0; i < comp.keys.size(); ++i) {
            symbols.clear();
            for (auto pos : comp.keys[i].second) symbols.push_back(assignment[pos]);
            tuple[i] = labeler.label_from_symbols(symbols);
        }
        dist[tuple] += weight;
    });
    CompensatedSum h;
    for (const auto& [_, q] : dist) h.add(-xlogx(q));
    return h.value();
}

struct PlugInOptions {
    bool miller_madow = true;
};

// H( V_{g in keys} g^-1 P ). Exact mode factors over independent coordinate
// components; Monte Carlo mode is a plug-in estimate from M sampled points.
inline EntropyEstimate refined_entropy(std::span<const ReducedWord> keys, const PartitionLabeler& labeler,
                                       const ProbabilityVector& p, const EvalMode& mode,
                                       PlugInOptions plug_in = {}) {
    if (p.size() != labeler.alphabet_size()) throw StructuralError("labeler alphabet does not match probability vector");
    EntropyEstimate out;
    if (keys.empty()) return out;
    if (mode.is_exact()) {
        CompensatedSum h;
        for (const auto& comp : coordinate_components(keys, labeler)) h.add(component_entropy(comp, labeler, p, mode.exact_cap));
        out.value = h.value();
        return out;
    }
    struct TupleHash {
        std::size_t operator()(const std::vector<int>& v) const noexcept {
            std::uint64_t h = 0x2545f4914f6cdd1dULL;
            for (int x : v) h = mix64(h ^ static_cast<std::uint64_t>(x));
            return static_cast<std::size_t>(h);
        }
    };
    std::unordered_map<std::vector<int>, std::uint64_t, TupleHash> counts;
    std::vector<int> tuple(keys.size());
    for (std::uint64_t m = 0; m < mode.samples; ++m) {
        const LazyBernoulliPoint x(split_seed(mode.seed, 0x9e11, m), labeler.rank(), p);
        for (std::size_t i = 0; i < keys.size(); ++i) tuple[i] = labeler.label_at(x, keys[i]);
        ++counts[tuple];
    }
    // Sum in a canonical order so the result does not depend on hash layout.
    std::vector<std::uint64_t> cs;
    cs.reserve(counts.size());
    for (const auto& [_, c] : counts) cs.push_back(c);
    std::sort(cs.begin(), cs.end());
    const double M = static_cast<double>(mode.samples);
    CompensatedSum h, h2;
    for (auto c : cs) {
        const double q = static_cast<double>(c) / M;
        h.add(-q * std::log(q));
        h2.add(q * std::log(q) * std::log(q));
    }
    out.value = h.value();
    out.n_samples = mode.samples;
    out.estimator = Estimator::PlugIn;
    if (plug_in.miller_madow) {
        out.value += (static_cast<double>(cs.size()) - 1.0) / (2.0 * M);
        out.estimator = Estimator::PlugInMillerMadow;
    }
    const double var = std::max(0.0, h2.value() - h.value() * h.value());
    out.stderr_value = std::sqrt(var / M);
    return out;
}

// H(P) for the labeler's own partition.
inline EntropyEstimate marginal_entropy(const PartitionLabeler& labeler, const ProbabilityVector& p,
                                        const EvalMode& mode = EvalMode::exact()) {
    const ReducedWord e = ReducedWord::identity(labeler.rank());
    return refined_entropy(std::span<const ReducedWord>(&e, 1), labeler, p, mode);
}

// h^P(R_n)(xi) = H( V_{z in R_n(xi)} alpha(z, xi)^-1 P ).
inline EntropyEstimate entropy_function_hP(const BoundaryPrefix& xi, int n, const PartitionLabeler& labeler,
                                           const ProbabilityVector& p, const EvalMode& mode,
                                           PlugInOptions plug_in = {}) {
    const auto keys = refinement_keys(xi, n);
    return refined_entropy(keys, labeler, p, mode, plug_in);
}

struct InformationValue {
    double nats = 0.0;
    std::optional<double> stderr_value;
    bool unresolved = false;  // nats is then a lower confidence bound
};

// J(P^{R_n(xi)})(x) = -log lambda of the atom of x in the refined partition.
inline InformationValue information_function(const LazyBernoulliPoint& x, const BoundaryPrefix& xi, int n,
                                             const PartitionLabeler& labeler, const EvalMode& mode) {
    if (n < 0 || n >= xi.depth()) throw PrecisionError("information_function needs depth > n");
    const auto keys = refinement_keys(xi, n);
    const auto labels = observe_labels(x, keys, labeler);
    const auto atom = atom_log_measure(labels, labeler, x.alphabet(), mode);
    InformationValue out;
    out.nats = -atom.log_measure;
    out.stderr_value = atom.stderr_log;
    out.unresolved = atom.unresolved;
    return out;
}

inline std::uint64_t class_size(int rank, int n) {
    std::uint64_t s = 1;
    for (int i = 0; i < n; ++i) s *= static_cast<std::uint64_t>(2 * rank - 1);
    return s;
}

struct SweepRow {
    int n = 0;
    std::uint64_t class_size = 0;
    EntropyEstimate normalized;  // mean over sampled xi of h^P / |R_n|
    double xi_stderr = 0.0;      // spread of the xi-average
    std::uint64_t n_xi = 0;
};

struct SweepConfig {
    int rank = 2;
    std::vector<int> n_values;
    std::uint64_t samples_per_n = 16;  // boundary points per n
    int depth = 0;                     // 0: max n + 1
    std::uint64_t seed = 0;
    bool miller_madow = true;
};

// Monte Carlo over xi ~ nu of h^P(R_n)(xi) / (2r-1)^n for each n. The last
// row is the workbench's estimate of the cocycle entropy h*_P.
inline std::vector<SweepRow> cocycle_entropy_sweep(const PartitionLabeler& labeler, const ProbabilityVector& p,
                                                   const SweepConfig& config, const EvalMode& mode) {
    int max_n = 0;
    for (int n : config.n_values) max_n = std::max(max_n, n);
    const int depth = config.depth > 0 ? config.depth : max_n + 1;
    if (depth <= max_n) throw PrecisionError("sweep depth must exceed the largest n");
    require_enumerable_class(config.rank, max_n);
    if (config.samples_per_n < 1) throw DomainError("samples_per_n must be >= 1");
    std::vector<SweepRow> rows;
    for (int n : config.n_values) {
        SweepRow row;
        row.n = n;
        row.class_size = class_size(config.rank, n);
        row.n_xi = config.samples_per_n;
        const double size = static_cast<double>(row.class_size);
        CompensatedSum sum, sum_sq, err_sq;
        std::uint64_t samples = 0;
        Estimator est = Estimator::Exact;
        for (std::uint64_t s = 0; s < config.samples_per_n; ++s) {
            const auto xi = sample_prefix(depth, config.rank, split_seed(config.seed, 0x5eed0000ULL + static_cast<std::uint64_t>(n), s));
            EvalMode m = mode;
            m.seed = split_seed(mode.seed, static_cast<std::uint64_t>(n), s);
            const auto h = entropy_function_hP(xi, n, labeler, p, m, {config.miller_madow});
            const double v = h.value / size;
            sum.add(v);
            sum_sq.add(v * v);
            if (h.stderr_value) err_sq.add((*h.stderr_value / size) * (*h.stderr_value / size));
            samples += h.n_samples;
            est = h.estimator;
        }
        const double k = static_cast<double>(config.samples_per_n);
        const double mean = sum.value() / k;
        row.normalized.value = mean;
        row.normalized.estimator = est;
        row.normalized.n_samples = samples;
        if (est != Estimator::Exact) row.normalized.stderr_value = std::sqrt(err_sq.value()) / k;
        if (config.samples_per_n > 1) {
            const double var = std::max(0.0, (sum_sq.value() - k * mean * mean) / (k - 1.0));
            row.xi_stderr = std::sqrt(var / k);
        }
        rows.push_back(row);
    }
    return rows;
}

struct SmbRow {
    int n = 0;
    std::uint64_t class_size = 0;
    double info_nats = 0.0;
    double info_norm = 0.0;
    std::optional<double> stderr_value;
    bool unresolved = false;
};

struct SmbTrajectory {
    std::vector<SmbRow> rows;
    std::uint64_t seed_x = 0;
    std::uint64_t seed_xi = 0;
    std::string boundary;  // the sampled prefix, as text
    std::string mode;
    std::optional<double> target;
};

// Normalized information J(P^{R_n(xi)})(x) / |R_n(xi)| for n = 0..n_max along
// one (x, xi) pair. x is the base configuration of seed_x; xi ~ nu from seed_xi.
inline SmbTrajectory smb_trajectory(std::uint64_t seed_x, std::uint64_t seed_xi, const PartitionLabeler& labeler,
                                    const ProbabilityVector& p, int n_max, const EvalMode& mode, int depth = 0,
                                    std::optional<double> target = std::nullopt) {
    const int rank = labeler.rank();
    const int d = depth > 0 ? depth : n_max + 1;
    if (d <= n_max) throw PrecisionError("trajectory depth must exceed n_max");
    require_enumerable_class(rank, n_max);
    const auto xi = sample_prefix(d, rank, seed_xi);
    const LazyBernoulliPoint x(seed_x, rank, p);
    SmbTrajectory traj;
    traj.seed_x = seed_x;
    traj.seed_xi = seed_xi;
    traj.boundary = xi.to_string();
    traj.mode = mode.name();
    traj.target = target;
    for (int n = 0; n <= n_max; ++n) {
        EvalMode m = mode;
        m.seed = split_seed(mode.seed, 0x5b0, static_cast<std::uint64_t>(n));
        const auto info = information_function(x, xi, n, labeler, m);
        SmbRow row;
        row.n = n;
        row.class_size = class_size(rank, n);
        row.info_nats = info.nats;
        row.info_norm = info.nats / static_cast<double>(row.class_size);
        if (info.stderr_value) row.stderr_value = *info.stderr_value / static_cast<double>(row.class_size);
        row.unresolved = info.unresolved;
        traj.rows.push_back(row);
    }
    return traj;
}

struct L1Row {
    int n = 0;
    double mean_abs_deviation = 0.0;
    double stderr_value = 0.0;
    std::uint64_t unresolved = 0;
};

// E_x | J/|R_n| - target | for fixed xi, by Monte Carlo over x.
inline std::vector<L1Row> l1_convergence_report(const PartitionLabeler& labeler, const ProbabilityVector& p,
                                                std::span<const int> n_values, std::uint64_t num_x_samples,
                                                const BoundaryPrefix& xi, const EvalMode& mode, double target,
                                                std::uint64_t seed) {
    if (num_x_samples < 1) throw DomainError("need at least one x sample");
    std::vector<L1Row> out;
    for (int n : n_values) {
        const double size = static_cast<double>(class_size(xi.rank(), n));
        CompensatedSum s, s2;
        L1Row row;
        row.n = n;
        for (std::uint64_t i = 0; i < num_x_samples; ++i) {
            const LazyBernoulliPoint x(split_seed(seed, 0x11, i), xi.rank(), p);
            EvalMode m = mode;
            m.seed = split_seed(mode.seed, static_cast<std::uint64_t>(n), i);
            const auto info = information_function(x, xi, n, labeler, m);
            if (info.unresolved) ++row.unresolved;
            const double dev = std::abs(info.nats / size - target);
            s.add(dev);
            s2.add(dev * dev);
        }
        const double k = static_cast<double>(num_x_samples);
        row.mean_abs_deviation = s.value() / k;
        if (num_x_samples > 1) {
            const double var = std::max(0.0, (s2.value() - k * row.mean_abs_deviation * row.mean_abs_deviation) / (k - 1.0));
            row.stderr_value = std::sqrt(var / k);
        }
        out.push_back(row);
    }
    return out;
}

// Closed-form cocycle entropy where one is known: H(p) for the symbol
// partition of a Bernoulli shift, 0 for a one-atom partition.
inline std::optional<double> closed_form_cocycle_entropy(const PartitionLabeler& labeler, const ProbabilityVector& p) {
    if (labeler.kind() == PartitionLabeler::Kind::SymbolAtIdentity) return shannon(p);
    if (labeler.num_labels() == 1) return 0.0;
    return std::nullopt;
}

}  // namespace cocycle
