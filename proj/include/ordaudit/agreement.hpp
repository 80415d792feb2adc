#pragma once

// Rubric-sensitivity analysis: per-model rubric-pair agreement with
// clustered-bootstrap CIs, gold-stratified swap rates pooled across models,
// dominant-swap identification, and the chance-agreement baseline.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ordaudit/corpus.hpp"
#include "ordaudit/errors.hpp"
#include "ordaudit/grid.hpp"
#include "ordaudit/metrics.hpp"
#include "ordaudit/resample.hpp"

namespace ordaudit {

struct DominantSwap {
    Label from{};
    Label to{};
    std::size_t count = 0;
    bool tied = false;  // another transition shares the maximal count

    std::string str() const {
        return label_text(from) + " -> " + label_text(to) + " on " + std::to_string(count) +
               " items" + (tied ? " (tied)" : "");
    }
};

struct AgreementRow {
    std::string model;
    std::string rubric_a;
    std::string rubric_b;
    std::string temperature;
    double agree_rate = 0.0;
    IntervalEstimate ci;
    std::optional<DominantSwap> dominant_swap;
};

struct SwapStratum {
    Label gold{};
    std::size_t n_pairs = 0;
    std::size_t swaps = 0;
    double rate = 0.0;
    IntervalEstimate ci;
    bool interpretable = true;  // false when the stratum's item support < 5
};

namespace detail {

// Most frequent (a -> b) transition among disagreeing items; ties break
// toward the smaller source label, then the smaller target label.
inline std::optional<DominantSwap> dominant_swap(const std::vector<Label>& a,
                                                 const std::vector<Label>& b) {
    std::array<std::array<std::size_t, kNumLabels>, kNumLabels> counts{};
    std::size_t disagreements = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].value == b[i].value) continue;
        counts[label_index(a[i])][label_index(b[i])]++;
        ++disagreements;
    }
    if (disagreements == 0) return std::nullopt;
    DominantSwap best;
    std::size_t best_count = 0;
    bool tied = false;
    for (std::size_t fi = 0; fi < kNumLabels; ++fi)
        for (std::size_t ti = 0; ti < kNumLabels; ++ti) {
            const std::size_t c = counts[fi][ti];
            if (c > best_count) {
                best_count = c;
                best.from = label_from_index(fi);
                best.to = label_from_index(ti);
                tied = false;
            } else if (c == best_count && c > 0) {
                tied = true;
            }
        }
    best.count = best_count;
    best.tied = tied;
    return best;
}

}  // namespace detail

inline AgreementRow pair_agreement(const PredictionGrid& grid, const std::string& model,
                                   const std::string& rubric_a, const std::string& rubric_b,
                                   const std::string& temperature, const Dataset& dataset,
                                   const ResamplePlan& plan) {
    plan.check();
    const InferencePolicy pa{rubric_a, temperature};
    const InferencePolicy pb{rubric_b, temperature};
    const auto la = grid.cell_labels(model, pa);
    const auto lb = grid.cell_labels(model, pb);

    AgreementRow row;
    row.model = model;
    row.rubric_a = rubric_a;
    row.rubric_b = rubric_b;
    row.temperature = temperature;

    std::size_t agree = 0;
    for (std::size_t i = 0; i < la.size(); ++i)
        if (la[i].value == lb[i].value) ++agree;
    row.agree_rate = static_cast<double>(agree) / static_cast<double>(la.size());
    row.dominant_swap = detail::dominant_swap(la, lb);

    auto statistic = [&](const std::vector<std::size_t>& idx) {
        std::size_t hits = 0;
        for (std::size_t i : idx)
            if (la[i].value == lb[i].value) ++hits;
        return std::vector<double>{static_cast<double>(hits) / static_cast<double>(idx.size())};
    };
    const BootstrapResult boot = clustered_bootstrap(statistic, dataset.n(), plan);
    row.ci = boot.intervals[0];
    row.ci.point = row.agree_rate;
    return row;
}

// Pooled (model, item) disagreement rates grouped by gold class. Bootstrap
// resamples item indices shared across models, so within-item cross-model
// correlation survives.
inline std::vector<SwapStratum> swap_stratification(const PredictionGrid& grid,
                                                    const std::string& rubric_a,
                                                    const std::string& rubric_b,
                                                    const std::string& temperature,
                                                    const Dataset& dataset,
                                                    const ResamplePlan& plan) {
    plan.check();
    const InferencePolicy pa{rubric_a, temperature};
    const InferencePolicy pb{rubric_b, temperature};
    const auto gold = dataset.gold_labels();
    const std::size_t n_models = grid.models().size();
    std::vector<std::vector<Label>> la, lb;
    for (const auto& model : grid.models()) {
        la.push_back(grid.cell_labels(model, pa));
        lb.push_back(grid.cell_labels(model, pb));
    }

    // Per-item swap counts over models, so every statistic is a weighted item
    // average.
    std::vector<std::size_t> item_swaps(dataset.n(), 0);
    for (std::size_t m = 0; m < n_models; ++m)
        for (std::size_t i = 0; i < dataset.n(); ++i)
            if (la[m][i].value != lb[m][i].value) item_swaps[i]++;

    std::vector<SwapStratum> strata;
    for (std::size_t ci = 0; ci < kNumLabels; ++ci) {
        const Label cls = label_from_index(ci);
        SwapStratum st;
        st.gold = cls;
        std::size_t n_items = 0;
        for (std::size_t i = 0; i < dataset.n(); ++i) {
            if (gold[i].value != cls.value) continue;
            ++n_items;
            st.swaps += item_swaps[i];
        }
        st.n_pairs = n_items * n_models;
        if (st.n_pairs == 0) continue;  // class absent from gold: no stratum
        st.rate = static_cast<double>(st.swaps) / static_cast<double>(st.n_pairs);
        st.interpretable = n_items >= 5;

        auto statistic = [&](const std::vector<std::size_t>& idx) {
            std::size_t pairs = 0, swaps = 0;
            for (std::size_t i : idx) {
                if (gold[i].value != cls.value) continue;
                pairs += n_models;
                swaps += item_swaps[i];
            }
            return std::vector<double>{
                pairs == 0 ? 0.0 : static_cast<double>(swaps) / static_cast<double>(pairs)};
        };
        const BootstrapResult boot = clustered_bootstrap(statistic, dataset.n(), plan);
        st.ci = boot.intervals[0];
        st.ci.point = st.rate;
        strata.push_back(std::move(st));
    }
    return strata;
}

// Expected agreement of two independent labelers with the given marginals.
inline double chance_agreement(const std::array<double, kNumLabels>& marginal_a,
                               const std::array<double, kNumLabels>& marginal_b) {
    double sum_a = 0.0, sum_b = 0.0;
    for (std::size_t i = 0; i < kNumLabels; ++i) {
        if (marginal_a[i] < 0.0 || marginal_b[i] < 0.0)
            throw UnnormalizedMarginal("marginal probabilities must be non-negative");
        sum_a += marginal_a[i];
        sum_b += marginal_b[i];
    }
    if (std::fabs(sum_a - 1.0) > 1e-9 || std::fabs(sum_b - 1.0) > 1e-9)
        throw UnnormalizedMarginal("marginals must each sum to 1");
    double agree = 0.0;
    for (std::size_t i = 0; i < kNumLabels; ++i) agree += marginal_a[i] * marginal_b[i];
    return agree;
}

}  // namespace ordaudit
