#pragma once

// Synthetic fixtures and the Monte-Carlo threshold-sensitivity sweep:
// deterministic gold generators with exact majority/rarest counts, an
// arcsine-spaced model ladder with adjacent-class noise, and the
// 45-triple identifiability sweep.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "ordaudit/corpus.hpp"
#include "ordaudit/errors.hpp"
#include "ordaudit/grid.hpp"
#include "ordaudit/identify.hpp"
#include "ordaudit/metrics.hpp"
#include "ordaudit/rank.hpp"
#include "ordaudit/resample.hpp"

namespace ordaudit {

struct SimCell {
    std::size_t n_items = 250;
    double gini = 0.4;                 // target Gini over class proportions
    std::size_t rarest_count = 2;
    double majority_prevalence = 0.5;
    double cohens_h = 0.1;             // adjacent-model effect size
    std::size_t n_models = 4;

    void check() const {
        if (n_models < 2) throw InfeasibleCell("simulation cell needs at least 2 models");
        if (n_items < kNumLabels) throw InfeasibleCell("too few items for 5 classes");
        if (majority_prevalence <= 0.0 || majority_prevalence >= 1.0)
            throw InfeasibleCell("majority prevalence must lie in (0,1)");
        const double non_majority =
            static_cast<double>(n_items) * (1.0 - majority_prevalence);
        if (static_cast<double>(rarest_count) > non_majority)
            throw InfeasibleCell("rarest count exceeds the non-majority mass");
        if (rarest_count < 1) throw InfeasibleCell("rarest count must be positive");
    }

    std::string str() const {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "n=%zu gini=%.2f rare=%zu prev=%.2f h=%.2f m=%zu",
                      n_items, gini, rarest_count, majority_prevalence, cohens_h, n_models);
        return buf;
    }
};

namespace detail {

// Gini over class proportions: mean absolute pairwise difference divided by
// twice the mean proportion.
inline double gini_of_counts(const std::array<std::size_t, kNumLabels>& counts, std::size_t n) {
    double sum_abs = 0.0;
    for (std::size_t i = 0; i < kNumLabels; ++i)
        for (std::size_t j = 0; j < kNumLabels; ++j)
            sum_abs += std::fabs(static_cast<double>(counts[i]) - static_cast<double>(counts[j]));
    const double mean_abs =
        sum_abs / (static_cast<double>(kNumLabels) * kNumLabels * static_cast<double>(n));
    const double mean_prop = 1.0 / static_cast<double>(kNumLabels);
    return mean_abs / (2.0 * mean_prop);
}

}  // namespace detail

// Exact majority count round(n * prevalence), exact rarest count, remaining
// three counts minimizing |Gini - target|; labels assigned majority -> +1,
// rarest -> -2, remainder descending to (0, +2, -1).
inline std::vector<Label> make_gold(const SimCell& cell, std::uint64_t seed) {
    cell.check();
    const std::size_t n = cell.n_items;
    const std::size_t majority =
        static_cast<std::size_t>(std::llround(static_cast<double>(n) * cell.majority_prevalence));
    if (majority + cell.rarest_count + 3 > n)
        throw InfeasibleCell("majority + rarest counts leave no room for the middle classes");
    const std::size_t rest = n - majority - cell.rarest_count;

    // Enumerate middle-count splits (a >= b >= c >= rarest, a <= majority)
    // and keep the one closest to the Gini target. Deterministic: first best
    // wins in lexicographic (a, b) order.
    double best_err = 1e9;
    std::array<std::size_t, 3> best_mid{};
    bool found = false;
    for (std::size_t a = (rest + 2) / 3; a <= std::min(rest, majority); ++a) {
        for (std::size_t b = 0; b <= rest - a; ++b) {
            const std::size_t c = rest - a - b;
            if (b > a || c > b) continue;
            if (c < cell.rarest_count || b > majority) continue;
            std::array<std::size_t, kNumLabels> counts{};
            counts[0] = majority;
            counts[1] = a;
            counts[2] = b;
            counts[3] = c;
            counts[4] = cell.rarest_count;
            const double err = std::fabs(detail::gini_of_counts(counts, n) - cell.gini);
            if (err < best_err - 1e-15) {
                best_err = err;
                best_mid = {a, b, c};
                found = true;
            }
        }
    }
    if (!found) throw InfeasibleCell("no class split satisfies the cell constraints");

    // Label identities: majority -> +1, rarest -> -2, middles descending to
    // (0, +2, -1).
    std::vector<std::pair<Label, std::size_t>> assignment = {
        {Label{+1}, majority},
        {Label{0}, best_mid[0]},
        {Label{+2}, best_mid[1]},
        {Label{-1}, best_mid[2]},
        {Label{-2}, cell.rarest_count},
    };
    std::vector<Label> gold;
    gold.reserve(n);
    for (const auto& [lbl, cnt] : assignment)
        for (std::size_t i = 0; i < cnt; ++i) gold.push_back(lbl);

    // Deterministic shuffle so class runs do not align with item index.
    rng::Stream s(seed, stream_id::kSynthGold, 0);
    for (std::size_t i = gold.size() - 1; i > 0; --i)
        std::swap(gold[i], gold[s.below(i + 1)]);
    return gold;
}

// Arcsine ladder: 2 asin(sqrt(p_k)) - 2 asin(sqrt(p_{k+1})) = h, model 0 the
// most accurate.
inline std::vector<double> accuracy_ladder(double base_accuracy, double h, std::size_t n_models) {
    if (base_accuracy <= 0.0 || base_accuracy >= 1.0)
        throw InfeasibleEffect("base accuracy must lie in (0,1)");
    std::vector<double> p(n_models);
    const double phi0 = 2.0 * std::asin(std::sqrt(base_accuracy));
    for (std::size_t k = 0; k < n_models; ++k) {
        const double phi = phi0 - h * static_cast<double>(k);
        if (phi <= 0.0 || phi >= 3.14159265358979323846)
            throw InfeasibleEffect("arcsine ladder leaves (0,1)");
        const double sq = std::sin(phi / 2.0);
        p[k] = sq * sq;
    }
    return p;
}

// One policy, n_models rows; errors emit an adjacent class (+-1 uniform,
// reflected at the scale boundary).
inline PredictionGrid simulate_models(const std::vector<Label>& gold, double base_accuracy,
                                      double h, std::size_t n_models, std::uint64_t seed) {
    const std::vector<double> p = accuracy_ladder(base_accuracy, h, n_models);
    std::vector<std::string> models;
    for (std::size_t k = 0; k < n_models; ++k) models.push_back("sim-" + std::to_string(k + 1));
    const InferencePolicy policy{"R1", "0.0"};
    PredictionGrid grid(models, {policy}, gold.size());
    for (std::size_t k = 0; k < n_models; ++k) {
        rng::Stream s(seed, stream_id::kSynthModels, k);
        for (std::size_t i = 0; i < gold.size(); ++i) {
            Label out = gold[i];
            if (!(s.uniform01() < p[k])) {
                int step = s.coin() ? 1 : -1;
                int v = gold[i].value + step;
                if (v > kLabelMax) v = gold[i].value - 1;  // reflect at the boundary
                if (v < kLabelMin) v = gold[i].value + 1;
                out = Label{v};
            }
            grid.set(PredictionRecord{models[k], policy, i, out, {}, {}});
        }
    }
    grid.check_complete();
    return grid;
}

// Full (models x rubrics x temperatures) grid; each (model, policy) cell
// draws its own noise stream, so policies are conditionally independent
// given the accuracy ladder.
inline PredictionGrid simulate_grid(const std::vector<Label>& gold, double base_accuracy,
                                    double h, const std::vector<std::string>& models,
                                    const std::vector<std::string>& rubrics,
                                    const std::vector<std::string>& temperatures,
                                    std::uint64_t seed) {
    const std::vector<double> p = accuracy_ladder(base_accuracy, h, models.size());
    const DeclaredGrid declared = make_declared_grid(models, rubrics, temperatures);
    PredictionGrid grid(declared.models, declared.policies, gold.size());
    for (std::size_t k = 0; k < models.size(); ++k) {
        for (std::size_t pi = 0; pi < declared.policies.size(); ++pi) {
            rng::Stream s(seed, stream_id::kSynthModels, k * declared.policies.size() + pi);
            for (std::size_t i = 0; i < gold.size(); ++i) {
                Label out = gold[i];
                if (!(s.uniform01() < p[k])) {
                    int step = s.coin() ? 1 : -1;
                    int v = gold[i].value + step;
                    if (v > kLabelMax) v = gold[i].value - 1;
                    if (v < kLabelMin) v = gold[i].value + 1;
                    out = Label{v};
                }
                grid.set(PredictionRecord{models[k], declared.policies[pi], i, out, {}, {}});
            }
        }
    }
    grid.check_complete();
    return grid;
}

struct SimOutcome {
    SimCell cell;
    ThresholdTriple triple;
    std::size_t replicates = 0;
    std::array<double, 5> per_metric_pass_rate{};  // order A1..A5
    double partition_match_rate = 0.0;             // pass set == {A1, A2, A4}
    double top1_recovery = 0.0;                    // best model tops the clean ranking
};

inline std::vector<ThresholdTriple> default_sweep_triples() {
    std::vector<ThresholdTriple> out;
    for (double th : {0.075, 0.150, 0.225})
        for (double te : {25.0, 50.0, 75.0, 250.0, 500.0})
            for (double ts : {0.5, 1.0, 1.5}) out.push_back({th, te, ts});
    return out;
}

inline std::vector<SimCell> default_sweep_cells() {
    std::vector<SimCell> cells;
    for (double gini : {0.4, 0.6})
        for (std::size_t rare : {std::size_t{2}, std::size_t{10}})
            for (double h : {0.1, 0.2}) {
                SimCell c;
                c.gini = gini;
                c.rarest_count = rare;
                c.cohens_h = h;
                cells.push_back(c);
            }
    return cells;
}

// Diagnostics (H, E, SE, spread) depend only on (cell, replicate); passes per
// triple are re-derived cheaply from the cached diagnostics, so the sweep
// costs one pipeline run per replicate regardless of the triple count.
inline std::vector<SimOutcome> threshold_sweep(const std::vector<SimCell>& cells,
                                               const std::vector<ThresholdTriple>& triples,
                                               std::size_t replicates, std::uint64_t seed,
                                               std::size_t bootstrap_B = 200,
                                               double base_accuracy = 0.62) {
    if (cells.empty() || triples.empty() || replicates == 0)
        throw ConfigError("threshold sweep needs cells, triples, and replicates");
    const std::set<MetricId> clean{MetricId::A1, MetricId::A2, MetricId::A4};
    std::vector<SimOutcome> out;
    for (const auto& cell : cells) {
        struct RepDiag {
            std::array<std::array<double, 4>, 5> hesd;  // per metric: H, E, SE, spread
            bool top1 = false;
        };
        std::vector<RepDiag> reps;
        for (std::size_t r = 0; r < replicates; ++r) {
            std::uint64_t rep_state = seed ^ (0x9e3779b97f4a7c15ULL * (r + 1));
            const std::uint64_t rep_seed = rng::splitmix64(rep_state);
            const auto gold = make_gold(cell, rep_seed);
            Dataset ds;
            for (std::size_t i = 0; i < gold.size(); ++i)
                ds.items.push_back({i, "q" + std::to_string(i), "r" + std::to_string(i), gold[i]});
            const auto grid =
                simulate_models(gold, base_accuracy, cell.cohens_h, cell.n_models, rep_seed);
            ResamplePlan plan;
            plan.B = bootstrap_B;
            plan.seed = rep_seed;
            const InferencePolicy policy{"R1", "0.0"};
            const auto noise = metric_noise_all(grid, policy, ds, plan);

            RepDiag rd;
            for (std::size_t mi = 0; mi < kAllMetrics.size(); ++mi) {
                rd.hesd[mi] = {headroom(kAllMetrics[mi], gold),
                               effective_support(kAllMetrics[mi], gold), noise[mi].SE,
                               noise[mi].spread};
            }

            // Top-1 recovery on the clean subset. Borda is used as the
            // aggregate here: dominance fixtures routinely hand one model
            // every comparison, which Bradley-Terry rejects as degenerate.
            ScoreTable table(grid.models(), {policy});
            for (const auto& model : grid.models())
                for (MetricId m : kAllMetrics)
                    table.set(model, policy, m,
                              score_metric(m, grid.cell_labels(model, policy), gold).value);
            const Ranking ranking = borda(table, clean);
            rd.top1 = ranking.front().size() == 1 && ranking.front()[0] == grid.models()[0];
            reps.push_back(rd);
        }

        for (const auto& triple : triples) {
            SimOutcome so;
            so.cell = cell;
            so.triple = triple;
            so.replicates = replicates;
            std::size_t partition_hits = 0, top1_hits = 0;
            std::array<std::size_t, 5> pass_counts{};
            for (const auto& rd : reps) {
                std::set<MetricId> pass_set;
                for (std::size_t mi = 0; mi < kAllMetrics.size(); ++mi) {
                    const auto& d = rd.hesd[mi];
                    const DiagnosticRow row =
                        apply_thresholds(kAllMetrics[mi], d[0], d[1], d[2], d[3], triple);
                    if (row.pass) {
                        pass_counts[mi]++;
                        pass_set.insert(kAllMetrics[mi]);
                    }
                }
                if (pass_set == clean) ++partition_hits;
                if (rd.top1) ++top1_hits;
            }
            for (std::size_t mi = 0; mi < 5; ++mi)
                so.per_metric_pass_rate[mi] =
                    static_cast<double>(pass_counts[mi]) / static_cast<double>(replicates);
            so.partition_match_rate =
                static_cast<double>(partition_hits) / static_cast<double>(replicates);
            so.top1_recovery = static_cast<double>(top1_hits) / static_cast<double>(replicates);
            out.push_back(so);
        }
    }
    return out;
}

}  // namespace ordaudit
