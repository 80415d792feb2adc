#pragma once

// The five ordinal metrics (A1..A5), the majority-class baseline, binomial
// interval estimators, and the McNemar minimum-detectable-effect solver.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ordaudit/corpus.hpp"
#include "ordaudit/errors.hpp"
#include "ordaudit/grid.hpp"
#include "ordaudit/stats.hpp"

namespace ordaudit {

struct MetricScore {
    MetricId metric{};
    double value = 0.0;
    std::string support_note;  // e.g. binding-class size for A5
};

enum class IntervalMethod { Wilson, ClopperPearson, PercentileBootstrap };

inline std::string interval_method_name(IntervalMethod m) {
    switch (m) {
        case IntervalMethod::Wilson: return "wilson";
        case IntervalMethod::ClopperPearson: return "clopper-pearson";
        case IntervalMethod::PercentileBootstrap: return "percentile-bootstrap";
    }
    return "?";
}

struct IntervalEstimate {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    IntervalMethod method = IntervalMethod::Wilson;
    double confidence = 0.95;
};

namespace detail {

inline void check_lengths(const std::vector<Label>& pred, const std::vector<Label>& gold) {
    if (pred.size() != gold.size())
        throw LengthMismatch("pred length " + std::to_string(pred.size()) +
                             " != gold length " + std::to_string(gold.size()));
    if (gold.empty()) throw LengthMismatch("metric on empty vectors");
}

using ConfusionMatrix = std::array<std::array<std::size_t, kNumLabels>, kNumLabels>;

// confusion[gold][pred]
inline ConfusionMatrix confusion_matrix(const std::vector<Label>& pred,
                                        const std::vector<Label>& gold) {
    ConfusionMatrix cm{};
    for (std::size_t i = 0; i < gold.size(); ++i)
        cm[label_index(gold[i])][label_index(pred[i])]++;
    return cm;
}

}  // namespace detail

inline MetricScore exact_accuracy(const std::vector<Label>& pred, const std::vector<Label>& gold) {
    detail::check_lengths(pred, gold);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < gold.size(); ++i)
        if (pred[i] == gold[i]) ++hits;
    return {MetricId::A1, static_cast<double>(hits) / static_cast<double>(gold.size()), {}};
}

// Unweighted mean of per-class F1 over classes present in gold. A class with
// gold support but no predictions scores F1 = 0; classes absent from gold are
// excluded from the mean.
inline MetricScore macro_f1(const std::vector<Label>& pred, const std::vector<Label>& gold) {
    detail::check_lengths(pred, gold);
    const auto cm = detail::confusion_matrix(pred, gold);
    double sum = 0.0;
    int classes = 0;
    for (int c = 0; c < kNumLabels; ++c) {
        std::size_t gold_support = 0, pred_support = 0;
        for (int j = 0; j < kNumLabels; ++j) {
            gold_support += cm[c][j];
            pred_support += cm[j][c];
        }
        if (gold_support == 0) continue;
        ++classes;
        const std::size_t tp = cm[c][c];
        const double denom = static_cast<double>(gold_support + pred_support);
        if (tp > 0) sum += 2.0 * static_cast<double>(tp) / denom;
    }
    return {MetricId::A2, sum / classes, {}};
}

inline MetricScore within_one_accuracy(const std::vector<Label>& pred,
                                       const std::vector<Label>& gold) {
    detail::check_lengths(pred, gold);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < gold.size(); ++i)
        if (std::abs(pred[i].value - gold[i].value) <= 1) ++hits;
    return {MetricId::A3, static_cast<double>(hits) / static_cast<double>(gold.size()), {}};
}

enum class KappaWeighting { Quadratic, Linear };

// Cohen's weighted kappa: 1 - sum(w*O) / sum(w*E) with disagreement weights
// w(i,j) = |i-j|^q / 4^q over the five-level scale. Identical point masses
// (zero expected and observed weighted disagreement) score 0.
inline MetricScore weighted_kappa(const std::vector<Label>& pred, const std::vector<Label>& gold,
                                  KappaWeighting weighting = KappaWeighting::Quadratic) {
    detail::check_lengths(pred, gold);
    const auto cm = detail::confusion_matrix(pred, gold);
    const double n = static_cast<double>(gold.size());
    const int q = weighting == KappaWeighting::Quadratic ? 2 : 1;
    const double scale = std::pow(4.0, q);
    std::array<double, kNumLabels> gold_marg{}, pred_marg{};
    for (int i = 0; i < kNumLabels; ++i)
        for (int j = 0; j < kNumLabels; ++j) {
            gold_marg[i] += cm[i][j] / n;
            pred_marg[j] += cm[i][j] / n;
        }
    double wo = 0.0, we = 0.0;
    for (int i = 0; i < kNumLabels; ++i)
        for (int j = 0; j < kNumLabels; ++j) {
            const double w = std::pow(std::abs(i - j), q) / scale;
            wo += w * (cm[i][j] / n);
            we += w * gold_marg[i] * pred_marg[j];
        }
    if (we == 0.0) {
        if (wo > 0.0)
            throw DegenerateMarginals("expected weighted disagreement is zero but observed is not");
        return {MetricId::A4, 0.0, "degenerate identical point masses"};
    }
    return {MetricId::A4, 1.0 - wo / we, {}};
}

// Minimum per-class recall over gold-supported classes; the binding class and
// its size go into the support note.
inline MetricScore worst_class_accuracy(const std::vector<Label>& pred,
                                        const std::vector<Label>& gold) {
    detail::check_lengths(pred, gold);
    const auto cm = detail::confusion_matrix(pred, gold);
    double worst = 2.0;
    int binding = 0;
    std::size_t binding_count = 0;
    for (int c = 0; c < kNumLabels; ++c) {
        std::size_t support = 0;
        for (int j = 0; j < kNumLabels; ++j) support += cm[c][j];
        if (support == 0) continue;
        const double recall = static_cast<double>(cm[c][c]) / static_cast<double>(support);
        if (recall < worst) {
            worst = recall;
            binding = c + kLabelMin;
            binding_count = support;
        }
    }
    return {MetricId::A5, worst,
            "binding class " + label_text(Label{binding}) + " (n=" +
                std::to_string(binding_count) + ")"};
}

inline MetricScore score_metric(MetricId metric, const std::vector<Label>& pred,
                                const std::vector<Label>& gold,
                                KappaWeighting weighting = KappaWeighting::Quadratic) {
    switch (metric) {
        case MetricId::A1: return exact_accuracy(pred, gold);
        case MetricId::A2: return macro_f1(pred, gold);
        case MetricId::A3: return within_one_accuracy(pred, gold);
        case MetricId::A4: return weighted_kappa(pred, gold, weighting);
        case MetricId::A5: return worst_class_accuracy(pred, gold);
    }
    throw ConfigError("unknown metric");
}

// Modal gold class; ties resolve toward the numerically higher label.
inline Label majority_class(const std::vector<Label>& gold) {
    if (gold.empty()) throw LengthMismatch("majority class of an empty vector");
    std::array<std::size_t, kNumLabels> counts{};
    for (Label l : gold) counts[label_index(l)]++;
    int best = 0;
    for (int c = 1; c < kNumLabels; ++c)
        if (counts[c] >= counts[best]) best = c;
    return label_from_index(best);
}

// The chosen metric evaluated on the constant modal-class predictor.
inline MetricScore majority_baseline(MetricId metric, const std::vector<Label>& gold,
                                     KappaWeighting weighting = KappaWeighting::Quadratic) {
    const std::vector<Label> constant(gold.size(), majority_class(gold));
    return score_metric(metric, constant, gold, weighting);
}

inline IntervalEstimate binomial_interval(std::size_t successes, std::size_t n, double confidence,
                                          IntervalMethod method) {
    if (n < 1 || successes > n) throw InvalidCount("binomial interval needs 0 <= s <= n, n >= 1");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw InvalidCount("confidence must lie in (0,1)");
    const double p_hat = static_cast<double>(successes) / static_cast<double>(n);
    const double alpha = 1.0 - confidence;
    IntervalEstimate est;
    est.point = p_hat;
    est.method = method;
    est.confidence = confidence;
    if (method == IntervalMethod::Wilson) {
        const double z = stats::normal_quantile(1.0 - alpha / 2.0);
        const double z2 = z * z;
        const double denom = 1.0 + z2 / n;
        const double center = (p_hat + z2 / (2.0 * n)) / denom;
        const double half =
            z * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denom;
        est.lower = std::max(0.0, center - half);
        est.upper = std::min(1.0, center + half);
    } else if (method == IntervalMethod::ClopperPearson) {
        const double s = static_cast<double>(successes);
        est.lower = successes == 0
                        ? 0.0
                        : stats::inv_reg_inc_beta(s, static_cast<double>(n) - s + 1.0, alpha / 2.0);
        est.upper = successes == n
                        ? 1.0
                        : stats::inv_reg_inc_beta(s + 1.0, static_cast<double>(n) - s,
                                                  1.0 - alpha / 2.0);
    } else {
        throw ConfigError("binomial_interval supports wilson and clopper-pearson only");
    }
    return est;
}

// Minimum detectable matched-pair accuracy difference under the two-sided
// McNemar normal approximation: solves
//   delta * sqrt(n) = z_{alpha/2} * sqrt(d) + z_{power} * sqrt(d - delta^2)
// for delta, where d is the discordant-pair rate.
inline double mcnemar_mde(std::size_t n, double discordant_rate, double alpha, double power) {
    if (n < 1) throw InvalidCount("mcnemar_mde needs n >= 1");
    if (!(discordant_rate > 0.0 && discordant_rate < 1.0))
        throw InvalidCount("discordant rate must lie in (0,1)");
    if (!(alpha > 0.0 && alpha < 1.0) || !(power > 0.0 && power < 1.0))
        throw InvalidCount("alpha and power must lie in (0,1)");
    const double z_a = stats::normal_quantile(1.0 - alpha / 2.0);
    const double z_b = stats::normal_quantile(power);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const double d = discordant_rate;
    double delta = z_a * std::sqrt(d) / sqrt_n;  // the z_b = 0 boundary
    for (int i = 0; i < 200; ++i) {
        const double inner = d - delta * delta;
        if (inner <= 0.0)
            throw InfeasibleDesign("no delta below the discordant rate satisfies the power "
                                   "equation at this n");
        const double next = (z_a * std::sqrt(d) + z_b * std::sqrt(inner)) / sqrt_n;
        if (std::fabs(next - delta) < 1e-14) {
            delta = next;
            break;
        }
        delta = next;
    }
    if (delta >= d)
        throw InfeasibleDesign("minimum detectable difference exceeds the discordant rate");
    return delta;
}

}  // namespace ordaudit
