#pragma once

// Identifiability diagnostics: headroom over the majority baseline, effective
// support, bootstrap noise, spread, SNR, the pre-registered conjunction rule,
// and the leave-one-metric-out decomposition.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "ordaudit/corpus.hpp"
#include "ordaudit/errors.hpp"
#include "ordaudit/grid.hpp"
#include "ordaudit/metrics.hpp"
#include "ordaudit/rank.hpp"
#include "ordaudit/resample.hpp"

namespace ordaudit {

struct ThresholdTriple {
    double theta_H = 0.15;
    double theta_E = 50.0;
    double theta_SNR = 1.0;

    void check() const {
        if (!(theta_H > 0.0) || !(theta_E > 0.0) || !(theta_SNR > 0.0))
            throw ConfigError("identifiability thresholds must be strictly positive");
    }
};

struct DiagnosticRow {
    MetricId metric{};
    double H = 0.0;
    double E = 0.0;
    double SE = 0.0;
    double spread = 0.0;
    double SNR = 0.0;
    bool pass = false;
    std::vector<std::string> failed_criteria;  // subset of {"H", "E", "SNR"}
    std::string note;
};

// Theoretical ceiling is 1.0 for every metric, kappa included (the constant
// predictor scores 0 there), so H = 1 - constant-majority score.
inline double headroom(MetricId metric, const std::vector<Label>& gold) {
    if (gold.empty()) throw EmptyDataset("headroom of an empty gold vector");
    return 1.0 - majority_baseline(metric, gold).value;
}

inline double effective_support(MetricId metric, const std::vector<Label>& gold) {
    if (gold.empty()) throw EmptyDataset("effective support of an empty gold vector");
    if (metric == MetricId::A5)
        return static_cast<double>(class_distribution(gold).rarest_count());
    return static_cast<double>(gold.size());
}

// Fills SNR / pass / failed_criteria / note from (H, E, SE, spread) and the
// thresholds. The E gate is strict: at theta_E = n the support gate fails.
inline DiagnosticRow apply_thresholds(MetricId metric, double H, double E, double SE,
                                      double spread, const ThresholdTriple& thresholds) {
    thresholds.check();
    DiagnosticRow row;
    row.metric = metric;
    row.H = H;
    row.E = E;
    row.SE = SE;
    row.spread = spread;
    if (spread == 0.0) {
        row.SNR = 0.0;
    } else if (SE == 0.0) {
        row.SNR = std::numeric_limits<double>::infinity();
        row.note = "zero bootstrap SE with nonzero spread; SNR reported as infinite";
    } else {
        row.SNR = spread / SE;
    }
    if (!(H >= thresholds.theta_H)) row.failed_criteria.push_back("H");
    if (!(E > thresholds.theta_E)) row.failed_criteria.push_back("E");
    if (!(row.SNR >= thresholds.theta_SNR)) row.failed_criteria.push_back("SNR");
    row.pass = row.failed_criteria.empty();
    return row;
}

struct MetricNoise {
    double SE = 0.0;
    double spread = 0.0;
    double SNR = 0.0;
    std::string note;
};

// SE = mean over models of the clustered-bootstrap SD of the metric on the
// primary cell; spread = max - min of the per-model point scores there.
inline std::vector<MetricNoise> metric_noise_all(const PredictionGrid& grid,
                                                 const InferencePolicy& primary_policy,
                                                 const Dataset& dataset,
                                                 const ResamplePlan& plan) {
    plan.check();
    const auto& models = grid.models();
    const auto gold = dataset.gold_labels();
    std::vector<std::vector<Label>> preds;
    preds.reserve(models.size());
    for (const auto& model : models) preds.push_back(grid.cell_labels(model, primary_policy));

    const std::size_t n_models = models.size();
    const std::size_t n_metrics = kAllMetrics.size();
    // One statistic evaluation per replicate covers every (model, metric).
    auto statistic = [&](const std::vector<std::size_t>& idx) {
        std::vector<double> out(n_models * n_metrics);
        std::vector<Label> g(idx.size()), p(idx.size());
        for (std::size_t m = 0; m < n_models; ++m) {
            for (std::size_t k = 0; k < idx.size(); ++k) {
                g[k] = gold[idx[k]];
                p[k] = preds[m][idx[k]];
            }
            for (std::size_t mi = 0; mi < n_metrics; ++mi)
                out[m * n_metrics + mi] = score_metric(kAllMetrics[mi], p, g).value;
        }
        return out;
    };
    const BootstrapResult boot = clustered_bootstrap(statistic, dataset.n(), plan);

    std::vector<MetricNoise> out(n_metrics);
    for (std::size_t mi = 0; mi < n_metrics; ++mi) {
        double se_sum = 0.0;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t m = 0; m < n_models; ++m) {
            se_sum += stats::stddev(boot.replicates[m * n_metrics + mi]);
            const double point = score_metric(kAllMetrics[mi], preds[m], gold).value;
            lo = std::min(lo, point);
            hi = std::max(hi, point);
        }
        out[mi].SE = se_sum / static_cast<double>(n_models);
        out[mi].spread = hi - lo;
        if (out[mi].spread == 0.0) {
            out[mi].SNR = 0.0;
        } else if (out[mi].SE == 0.0) {
            out[mi].SNR = std::numeric_limits<double>::infinity();
            out[mi].note = "zero bootstrap SE with nonzero spread; SNR reported as infinite";
        } else {
            out[mi].SNR = out[mi].spread / out[mi].SE;
        }
    }
    return out;
}

inline MetricNoise metric_noise(MetricId metric, const PredictionGrid& grid,
                                const InferencePolicy& primary_policy, const Dataset& dataset,
                                const ResamplePlan& plan) {
    const auto all = metric_noise_all(grid, primary_policy, dataset, plan);
    for (std::size_t mi = 0; mi < kAllMetrics.size(); ++mi)
        if (kAllMetrics[mi] == metric) return all[mi];
    throw ConfigError("unknown metric id");
}

inline std::vector<DiagnosticRow> identifiability_table(const PredictionGrid& grid,
                                                        const Dataset& dataset,
                                                        const InferencePolicy& primary_policy,
                                                        const ThresholdTriple& thresholds,
                                                        const ResamplePlan& plan) {
    const auto gold = dataset.gold_labels();
    const auto noise = metric_noise_all(grid, primary_policy, dataset, plan);
    std::vector<DiagnosticRow> rows;
    for (std::size_t mi = 0; mi < kAllMetrics.size(); ++mi) {
        const MetricId metric = kAllMetrics[mi];
        DiagnosticRow row =
            apply_thresholds(metric, headroom(metric, gold), effective_support(metric, gold),
                             noise[mi].SE, noise[mi].spread, thresholds);
        if (row.note.empty()) row.note = noise[mi].note;
        rows.push_back(std::move(row));
    }
    return rows;
}

enum class Aggregator { BradleyTerry, Borda, RankedPairs, Copeland };

inline std::string aggregator_name(Aggregator a) {
    switch (a) {
        case Aggregator::BradleyTerry: return "bradley-terry";
        case Aggregator::Borda: return "borda";
        case Aggregator::RankedPairs: return "ranked-pairs";
        case Aggregator::Copeland: return "copeland";
    }
    return "?";
}

inline Aggregator aggregator_from_name(const std::string& name) {
    for (Aggregator a : {Aggregator::BradleyTerry, Aggregator::Borda, Aggregator::RankedPairs,
                         Aggregator::Copeland})
        if (aggregator_name(a) == name) return a;
    throw ConfigError("unknown aggregator '" + name + "'");
}

inline Ranking aggregate(const ScoreTable& table, const std::set<MetricId>& metric_subset,
                         Aggregator aggregator) {
    if (metric_subset.empty()) throw EmptySubset("aggregation over an empty metric subset");
    switch (aggregator) {
        case Aggregator::Borda: return borda(table, metric_subset);
        case Aggregator::BradleyTerry: return bradley_terry(win_matrix(table, metric_subset)).ranking;
        case Aggregator::RankedPairs: return ranked_pairs(win_matrix(table, metric_subset));
        case Aggregator::Copeland: return copeland(win_matrix(table, metric_subset));
    }
    throw ConfigError("unknown aggregator");
}

struct SubsetAggregation {
    std::set<MetricId> subset;
    std::string subset_name;
    std::vector<std::pair<Aggregator, Ranking>> rankings;
    bool agreement = false;  // all aggregators return the identical strict ranking
};

inline std::string metric_subset_name(const std::set<MetricId>& subset) {
    if (subset.size() == kAllMetrics.size()) return "full";
    std::string out = "{";
    for (MetricId m : subset) {
        if (out.size() > 1) out += ",";
        out += metric_name(m);
    }
    return out + "}";
}

// Default nine-row decomposition: full set, identifiable-only set, the two
// suspect singletons, and the five leave-one-out sets.
inline std::vector<std::set<MetricId>> default_lomo_subsets() {
    const std::set<MetricId> full(kAllMetrics.begin(), kAllMetrics.end());
    std::vector<std::set<MetricId>> subsets;
    subsets.push_back(full);
    subsets.push_back({MetricId::A1, MetricId::A2, MetricId::A4});
    subsets.push_back({MetricId::A3});
    subsets.push_back({MetricId::A5});
    for (MetricId drop : kAllMetrics) {
        std::set<MetricId> s = full;
        s.erase(drop);
        subsets.push_back(std::move(s));
    }
    return subsets;
}

inline std::vector<SubsetAggregation> lomo_decomposition(
    const ScoreTable& table, const std::vector<std::set<MetricId>>& subsets,
    const std::vector<Aggregator>& aggregators) {
    if (aggregators.empty()) throw ConfigError("leave-one-metric-out needs an aggregator list");
    std::vector<SubsetAggregation> out;
    for (const auto& subset : subsets) {
        if (subset.empty()) throw EmptySubset("leave-one-metric-out subset is empty");
        SubsetAggregation sa;
        sa.subset = subset;
        sa.subset_name = metric_subset_name(subset);
        for (Aggregator a : aggregators) sa.rankings.emplace_back(a, aggregate(table, subset, a));
        sa.agreement = true;
        for (const auto& [a, r] : sa.rankings)
            if (!ranking_is_strict(r) || r != sa.rankings.front().second) sa.agreement = false;
        out.push_back(std::move(sa));
    }
    return out;
}

}  // namespace ordaudit
