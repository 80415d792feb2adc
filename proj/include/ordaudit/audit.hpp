#pragma once

// End-to-end orchestration: run configuration, the 90-cell inversion grid,
// the staged audit pipeline, and report assembly in structured and
// human-readable forms. Reports are deterministic functions of
// (inputs, config): identical runs are byte-identical.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ordaudit/agreement.hpp"
#include "ordaudit/corpus.hpp"
#include "ordaudit/errors.hpp"
#include "ordaudit/grid.hpp"
#include "ordaudit/identify.hpp"
#include "ordaudit/metrics.hpp"
#include "ordaudit/rank.hpp"
#include "ordaudit/resample.hpp"
#include "ordaudit/synth.hpp"

namespace ordaudit {

inline constexpr const char* kToolVersion = "ordaudit 1.0.0";

struct RunConfig {
    std::string dataset_path;
    std::string expected_checksum;  // empty = no pin
    std::string source_id = "dataset";
    std::string access_date = "unspecified";
    std::string predictions_path;

    std::vector<std::string> models;
    std::vector<std::string> rubrics;
    std::vector<std::string> temperatures;
    InferencePolicy primary_policy;

    ThresholdTriple thresholds;
    std::uint64_t seed = 42;
    std::size_t bootstrap_B = 2000;
    std::size_t signflip_B = 100000;
    std::size_t permutation_B = 10000;
    double confidence = 0.95;
    double alpha = 0.05;
    double fdr_q = 0.05;

    std::vector<Aggregator> aggregators = {Aggregator::BradleyTerry, Aggregator::Borda,
                                           Aggregator::RankedPairs};
    bool run_agreement = true;
    bool run_sweep = false;
    std::size_t sweep_replicates = 50;
    std::size_t sweep_bootstrap_B = 200;

    void check() const {
        if (models.size() < 2) throw ConfigError("config needs at least two models");
        if (rubrics.empty() || temperatures.empty())
            throw ConfigError("config needs non-empty rubric and temperature sets");
        if (bootstrap_B < 1 || signflip_B < 1 || permutation_B < 1)
            throw ConfigError("every resample B must be >= 1");
        if (!(confidence > 0.0 && confidence < 1.0))
            throw ConfigError("confidence must lie in (0,1)");
        if (!(alpha > 0.0 && alpha < 1.0) || !(fdr_q > 0.0 && fdr_q < 1.0))
            throw ConfigError("alpha and fdr_q must lie in (0,1)");
        thresholds.check();
        bool rubric_ok = false, temp_ok = false;
        for (const auto& r : rubrics) rubric_ok |= r == primary_policy.rubric;
        for (const auto& t : temperatures) temp_ok |= t == primary_policy.temperature;
        if (!rubric_ok || !temp_ok)
            throw ConfigError("primary policy " + primary_policy.str() +
                              " is not in the declared grid");
        if (aggregators.empty()) throw ConfigError("config needs at least one aggregator");
        if (run_sweep && sweep_replicates < 1)
            throw ConfigError("sweep needs at least one replicate");
    }
};

namespace detail {

inline std::string json_temperature(const nlohmann::json& t) {
    return t.is_string() ? t.get<std::string>() : t.dump();
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
    RunConfig c;
    try {
        const auto& ds = j.at("dataset");
        c.dataset_path = ds.at("path").get<std::string>();
        if (ds.contains("expected_checksum"))
            c.expected_checksum = ds.at("expected_checksum").get<std::string>();
        if (ds.contains("source_id")) c.source_id = ds.at("source_id").get<std::string>();
        if (ds.contains("access_date")) c.access_date = ds.at("access_date").get<std::string>();
        c.predictions_path = j.at("predictions").at("path").get<std::string>();

        const auto& g = j.at("grid");
        c.models = g.at("models").get<std::vector<std::string>>();
        c.rubrics = g.at("rubrics").get<std::vector<std::string>>();
        for (const auto& t : g.at("temperatures")) c.temperatures.push_back(detail::json_temperature(t));

        const auto& pp = j.at("primary_policy");
        c.primary_policy.rubric = pp.at("rubric").get<std::string>();
        c.primary_policy.temperature = detail::json_temperature(pp.at("temperature"));

        if (j.contains("thresholds")) {
            const auto& th = j.at("thresholds");
            if (th.contains("H")) c.thresholds.theta_H = th.at("H").get<double>();
            if (th.contains("E")) c.thresholds.theta_E = th.at("E").get<double>();
            if (th.contains("SNR")) c.thresholds.theta_SNR = th.at("SNR").get<double>();
        }
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("resample")) {
            const auto& r = j.at("resample");
            if (r.contains("bootstrap_B")) c.bootstrap_B = r.at("bootstrap_B").get<std::size_t>();
            if (r.contains("signflip_B")) c.signflip_B = r.at("signflip_B").get<std::size_t>();
            if (r.contains("permutation_B"))
                c.permutation_B = r.at("permutation_B").get<std::size_t>();
            if (r.contains("confidence")) c.confidence = r.at("confidence").get<double>();
        }
        if (j.contains("multiplicity")) {
            const auto& m = j.at("multiplicity");
            if (m.contains("alpha")) c.alpha = m.at("alpha").get<double>();
            if (m.contains("fdr_q")) c.fdr_q = m.at("fdr_q").get<double>();
        }
        if (j.contains("aggregators")) {
            c.aggregators.clear();
            for (const auto& name : j.at("aggregators"))
                c.aggregators.push_back(aggregator_from_name(name.get<std::string>()));
        }
        if (j.contains("stages")) {
            const auto& s = j.at("stages");
            if (s.contains("agreement")) c.run_agreement = s.at("agreement").get<bool>();
            if (s.contains("sweep")) c.run_sweep = s.at("sweep").get<bool>();
        }
        if (j.contains("sweep")) {
            const auto& s = j.at("sweep");
            if (s.contains("replicates")) c.sweep_replicates = s.at("replicates").get<std::size_t>();
            if (s.contains("bootstrap_B"))
                c.sweep_bootstrap_B = s.at("bootstrap_B").get<std::size_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed run configuration: ") + e.what());
    }
    c.check();
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(j);
}

inline nlohmann::ordered_json config_echo(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["dataset"] = {{"path", c.dataset_path},
                    {"expected_checksum", c.expected_checksum},
                    {"source_id", c.source_id},
                    {"access_date", c.access_date}};
    j["predictions"] = {{"path", c.predictions_path}};
    j["grid"] = {{"models", c.models}, {"rubrics", c.rubrics}, {"temperatures", c.temperatures}};
    j["primary_policy"] = {{"rubric", c.primary_policy.rubric},
                           {"temperature", c.primary_policy.temperature}};
    j["thresholds"] = {{"H", c.thresholds.theta_H},
                       {"E", c.thresholds.theta_E},
                       {"SNR", c.thresholds.theta_SNR}};
    j["seed"] = c.seed;
    j["resample"] = {{"bootstrap_B", c.bootstrap_B},
                     {"signflip_B", c.signflip_B},
                     {"permutation_B", c.permutation_B},
                     {"confidence", c.confidence}};
    j["multiplicity"] = {{"alpha", c.alpha}, {"fdr_q", c.fdr_q}};
    nlohmann::ordered_json aggs = nlohmann::ordered_json::array();
    for (Aggregator a : c.aggregators) aggs.push_back(aggregator_name(a));
    j["aggregators"] = aggs;
    j["stages"] = {{"agreement", c.run_agreement}, {"sweep", c.run_sweep}};
    if (c.run_sweep)
        j["sweep"] = {{"replicates", c.sweep_replicates}, {"bootstrap_B", c.sweep_bootstrap_B}};
    return j;
}

struct InversionCell {
    std::string model_a;
    std::string model_b;  // declaration order: a precedes b
    std::string rubric;
    std::string temperature;
    double delta = 0.0;  // mean exact-match correctness difference a - b
    double p = 1.0;
    bool raw_reject = false;
    bool holm_reject = false;
    bool bh_reject = false;
};

struct InversionResult {
    std::vector<InversionCell> cells;
    std::size_t raw_rejects = 0;
    std::size_t holm_rejects = 0;
    std::size_t bh_rejects = 0;
    double holm_min_threshold = 0.0;  // alpha / m, the smallest-p step
};

// One sign-flip test per (model pair, rubric, temperature) cell; Holm and BH
// run over the full family.
inline InversionResult run_inversion_grid(const PredictionGrid& grid, const Dataset& dataset,
                                          std::size_t B, std::uint64_t seed, double alpha,
                                          double fdr_q) {
    const auto& models = grid.models();
    const auto& policies = grid.policies();
    InversionResult res;
    std::vector<double> pvals;
    std::size_t cell_index = 0;
    for (std::size_t a = 0; a < models.size(); ++a)
        for (std::size_t b = a + 1; b < models.size(); ++b)
            for (const auto& policy : policies) {
                const auto ca = grid.correctness_vector(models[a], policy, dataset);
                const auto cb = grid.correctness_vector(models[b], policy, dataset);
                std::vector<int> d(ca.size());
                double dsum = 0.0;
                for (std::size_t i = 0; i < d.size(); ++i) {
                    d[i] = ca[i] - cb[i];
                    dsum += d[i];
                }
                ResamplePlan plan;
                plan.B = B;
                // Distinct per-cell seed so cells never share flip draws.
                std::uint64_t mix = seed ^ (0x9e3779b97f4a7c15ULL * (cell_index + 1));
                plan.seed = rng::splitmix64(mix);
                plan.scheme = ResampleScheme::SignFlipRandomization;
                const TestResult t = signflip_randomization(d, plan);

                InversionCell cell;
                cell.model_a = models[a];
                cell.model_b = models[b];
                cell.rubric = policy.rubric;
                cell.temperature = policy.temperature;
                cell.delta = dsum / static_cast<double>(d.size());
                cell.p = t.p_two_sided;
                res.cells.push_back(cell);
                pvals.push_back(t.p_two_sided);
                ++cell_index;
            }
    const CorrectionResult holm = holm_correction(pvals, alpha);
    const std::vector<bool> bh = bh_fdr(pvals, fdr_q);
    for (std::size_t i = 0; i < res.cells.size(); ++i) {
        res.cells[i].raw_reject = pvals[i] <= alpha;
        res.cells[i].holm_reject = holm.reject[i];
        res.cells[i].bh_reject = bh[i];
        res.raw_rejects += res.cells[i].raw_reject;
        res.holm_rejects += holm.reject[i];
        res.bh_rejects += bh[i];
    }
    res.holm_min_threshold = alpha / static_cast<double>(std::max<std::size_t>(1, pvals.size()));
    return res;
}

// Point scores for every (model, policy, metric).
inline ScoreTable build_score_table(const PredictionGrid& grid, const Dataset& dataset) {
    ScoreTable table(grid.models(), grid.policies());
    const auto gold = dataset.gold_labels();
    for (const auto& model : grid.models())
        for (const auto& policy : grid.policies()) {
            const auto pred = grid.cell_labels(model, policy);
            for (MetricId m : kAllMetrics)
                table.set(model, policy, m, score_metric(m, pred, gold).value);
        }
    return table;
}

struct AuditReport {
    nlohmann::ordered_json doc;
};

namespace detail {

inline std::string fmt(double v, int digits = 4) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

inline nlohmann::ordered_json interval_json(const IntervalEstimate& e) {
    return {{"point", e.point},
            {"lower", e.lower},
            {"upper", e.upper},
            {"method", interval_method_name(e.method)},
            {"confidence", e.confidence}};
}

inline nlohmann::ordered_json ranking_json(const Ranking& r) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& g : r) out.push_back(g);
    return out;
}

}  // namespace detail

// Full pipeline. stage_log, when supplied, records each completed stage so an
// aborted run can report exactly how far it got.
inline AuditReport run_audit(const RunConfig& config, const Dataset& dataset,
                             const PredictionGrid& grid,
                             std::vector<std::string>* stage_log = nullptr) {
    config.check();
    std::vector<std::string> methods_notes;
    auto note = [&](const std::string& s) { methods_notes.push_back(s); };
    auto stage_done = [&](const std::string& s) {
        if (stage_log) stage_log->push_back(s);
    };
    nlohmann::ordered_json doc;

    // manifest
    const DatasetManifest manifest =
        compute_manifest(dataset, config.source_id, config.access_date);
    verify_manifest(manifest, config.expected_checksum);
    doc["provenance"] = {{"tool_version", kToolVersion},
                         {"manifest", manifest_to_json(manifest)},
                         {"config", config_echo(config)}};
    note("dataset pinned by SHA-256 over the canonical row serialization; a checksum mismatch "
         "is treated as a new measurement event, never a silent update");
    stage_done("manifest");

    // class distribution
    const auto gold = dataset.gold_labels();
    const ClassDistribution dist = class_distribution(gold);
    {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& [lbl, cnt] : dist.counts)
            rows.push_back({{"label", label_text(Label{lbl})},
                            {"count", cnt},
                            {"proportion", dist.proportions.at(lbl)}});
        doc["class_distribution"] = rows;
    }
    stage_done("class_distribution");

    // baselines and MDE
    {
        nlohmann::ordered_json b;
        b["majority_class"] = label_text(majority_class(gold));
        nlohmann::ordered_json base = nlohmann::ordered_json::array();
        for (MetricId m : kAllMetrics)
            base.push_back({{"metric", metric_name(m)},
                            {"constant_majority_score", majority_baseline(m, gold).value},
                            {"headroom", headroom(m, gold)}});
        b["majority_baseline"] = base;
        const std::size_t majority_count = dist.count_of(majority_class(gold));
        b["majority_share_interval"] = detail::interval_json(binomial_interval(
            majority_count, dataset.n(), config.confidence, IntervalMethod::Wilson));
        nlohmann::ordered_json mde = nlohmann::ordered_json::array();
        for (double d : {0.20, 0.30}) {
            nlohmann::ordered_json row = {{"discordant_rate", d},
                                          {"alpha", config.alpha},
                                          {"power", 0.80}};
            try {
                row["mde"] = mcnemar_mde(dataset.n(), d, config.alpha, 0.80);
            } catch (const InfeasibleDesign& e) {
                row["mde"] = nullptr;
                row["note"] = e.what();
            }
            mde.push_back(row);
        }
        b["mcnemar_mde"] = mde;
        doc["baselines"] = b;
    }
    stage_done("baselines");

    // agreement (optional stage)
    if (config.run_agreement && config.rubrics.size() >= 2) {
        ResamplePlan plan;
        plan.B = config.bootstrap_B;
        plan.seed = config.seed;
        plan.confidence = config.confidence;
        nlohmann::ordered_json pair_rows = nlohmann::ordered_json::array();
        nlohmann::ordered_json strat_rows = nlohmann::ordered_json::array();
        const std::string temp = config.primary_policy.temperature;
        for (std::size_t i = 0; i < config.rubrics.size(); ++i)
            for (std::size_t k = i + 1; k < config.rubrics.size(); ++k) {
                for (const auto& model : config.models) {
                    const AgreementRow row = pair_agreement(
                        grid, model, config.rubrics[i], config.rubrics[k], temp, dataset, plan);
                    nlohmann::ordered_json r = {{"model", row.model},
                                                {"rubric_a", row.rubric_a},
                                                {"rubric_b", row.rubric_b},
                                                {"temperature", row.temperature},
                                                {"agree_rate", row.agree_rate},
                                                {"ci", detail::interval_json(row.ci)}};
                    if (row.dominant_swap) {
                        r["dominant_swap"] = {{"from", label_text(row.dominant_swap->from)},
                                              {"to", label_text(row.dominant_swap->to)},
                                              {"count", row.dominant_swap->count},
                                              {"tied", row.dominant_swap->tied}};
                        if (row.dominant_swap->tied)
                            note("a dominant-swap count was tied; ties break toward the smaller "
                                 "source label and are flagged");
                    }
                    pair_rows.push_back(r);
                }
                const auto strata = swap_stratification(grid, config.rubrics[i],
                                                        config.rubrics[k], temp, dataset, plan);
                for (const auto& st : strata) {
                    nlohmann::ordered_json r = {{"rubric_a", config.rubrics[i]},
                                                {"rubric_b", config.rubrics[k]},
                                                {"gold", label_text(st.gold)},
                                                {"n_pairs", st.n_pairs},
                                                {"swaps", st.swaps},
                                                {"rate", st.rate},
                                                {"ci", detail::interval_json(st.ci)}};
                    if (!st.interpretable) {
                        r["note"] = "not interpretable";
                        note("swap strata with fewer than 5 supporting items are annotated "
                             "'not interpretable'");
                    }
                    strat_rows.push_back(r);
                }
            }
        std::array<double, kNumLabels> marg{};
        for (const auto& [lbl, p] : dist.proportions) marg[label_index(Label{lbl})] = p;
        doc["agreement"] = {{"pairs", pair_rows},
                            {"swap_strata", strat_rows},
                            {"chance_agreement", chance_agreement(marg, marg)}};
        stage_done("agreement");
    }

    // identifiability
    ResamplePlan boot_plan;
    boot_plan.B = config.bootstrap_B;
    boot_plan.seed = config.seed;
    boot_plan.confidence = config.confidence;
    const auto diag_rows =
        identifiability_table(grid, dataset, config.primary_policy, config.thresholds, boot_plan);
    std::set<MetricId> identifiable;
    {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& row : diag_rows) {
            if (row.pass) identifiable.insert(row.metric);
            nlohmann::ordered_json r = {{"metric", metric_name(row.metric)},
                                        {"H", row.H},
                                        {"E", row.E},
                                        {"SE", row.SE},
                                        {"spread", row.spread},
                                        {"SNR", std::isinf(row.SNR) ? -1.0 : row.SNR},
                                        {"pass", row.pass},
                                        {"failed", row.failed_criteria}};
            if (!row.note.empty()) {
                r["note"] = row.note;
                note(row.note);
            }
            rows.push_back(r);
        }
        doc["identifiability"] = {{"thresholds",
                                   {{"H", config.thresholds.theta_H},
                                    {"E", config.thresholds.theta_E},
                                    {"SNR", config.thresholds.theta_SNR}}},
                                  {"rows", rows}};
    }
    note("the support gate is strict (E must exceed its threshold); headroom and SNR gates are "
         "inclusive");
    stage_done("identifiability");

    // per-model CIs and pairwise deltas at the primary cell
    {
        std::vector<std::vector<Label>> preds;
        for (const auto& model : config.models)
            preds.push_back(grid.cell_labels(model, config.primary_policy));

        const std::size_t n_models = config.models.size();
        auto statistic = [&](const std::vector<std::size_t>& idx) {
            std::vector<double> out(n_models * kAllMetrics.size());
            std::vector<Label> g(idx.size()), p(idx.size());
            for (std::size_t m = 0; m < n_models; ++m) {
                for (std::size_t k = 0; k < idx.size(); ++k) {
                    g[k] = gold[idx[k]];
                    p[k] = preds[m][idx[k]];
                }
                for (std::size_t mi = 0; mi < kAllMetrics.size(); ++mi)
                    out[m * kAllMetrics.size() + mi] = score_metric(kAllMetrics[mi], p, g).value;
            }
            return out;
        };
        const BootstrapResult boot = clustered_bootstrap(statistic, dataset.n(), boot_plan);
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (std::size_t m = 0; m < n_models; ++m) {
            nlohmann::ordered_json scores = nlohmann::ordered_json::array();
            for (std::size_t mi = 0; mi < kAllMetrics.size(); ++mi)
                scores.push_back(
                    {{"metric", metric_name(kAllMetrics[mi])},
                     {"ci", detail::interval_json(boot.intervals[m * kAllMetrics.size() + mi])}});
            rows.push_back({{"model", config.models[m]}, {"scores", scores}});
        }
        doc["primary_cell_scores"] = rows;

        // pairwise exact-match deltas with Holm over the model-pair family
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t a = 0; a < n_models; ++a)
            for (std::size_t b = a + 1; b < n_models; ++b) pairs.emplace_back(a, b);
        std::vector<PairedDeltaResult> deltas;
        std::vector<double> pvals;
        for (const auto& [a, b] : pairs) {
            const auto ca =
                grid.correctness_vector(config.models[a], config.primary_policy, dataset);
            const auto cb =
                grid.correctness_vector(config.models[b], config.primary_policy, dataset);
            deltas.push_back(paired_delta_test(ca, cb, boot_plan));
            pvals.push_back(deltas.back().test.p_two_sided);
        }
        const CorrectionResult holm = holm_correction(pvals, config.alpha);
        nlohmann::ordered_json drows = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < pairs.size(); ++i)
            drows.push_back({{"model_a", config.models[pairs[i].first]},
                             {"model_b", config.models[pairs[i].second]},
                             {"delta", deltas[i].delta},
                             {"ci", detail::interval_json(deltas[i].ci)},
                             {"p", pvals[i]},
                             {"raw_reject", pvals[i] <= config.alpha},
                             {"holm_reject", static_cast<bool>(holm.reject[i])}});
        doc["pairwise_delta"] = drows;
    }
    note("bootstrap replicates reuse one item-index multiset across every model, policy, and "
         "metric, preserving within-item pairing");
    stage_done("primary_scores");

    // score table, LOMO, aggregators
    const ScoreTable table = build_score_table(grid, dataset);
    {
        const std::set<MetricId> full(kAllMetrics.begin(), kAllMetrics.end());
        nlohmann::ordered_json primary = nlohmann::ordered_json::array();
        if (identifiable.empty()) {
            note("no metric passed the identifiability rule; the primary-ranking table is empty");
        } else {
            for (Aggregator a : config.aggregators) {
                nlohmann::ordered_json row = {{"aggregator", aggregator_name(a)}};
                try {
                    row["ranking"] = detail::ranking_json(aggregate(table, identifiable, a));
                } catch (const DegenerateComparisons& e) {
                    row["ranking"] = nullptr;
                    row["note"] = e.what();
                    note(std::string("aggregator skipped as degenerate on the identifiable "
                                     "subset: ") +
                         e.what());
                }
                primary.push_back(row);
            }
        }
        doc["primary_ranking"] = {{"metric_subset", metric_subset_name(identifiable)},
                                  {"rankings", primary}};

        std::vector<std::set<MetricId>> subsets = default_lomo_subsets();
        subsets[1] = identifiable.empty() ? subsets[1] : identifiable;  // clean = pass set
        nlohmann::ordered_json lomo = nlohmann::ordered_json::array();
        for (const auto& subset : subsets) {
            nlohmann::ordered_json row = {{"subset", metric_subset_name(subset)}};
            nlohmann::ordered_json rankings = nlohmann::ordered_json::array();
            bool agreement = true;
            std::optional<Ranking> reference;
            for (Aggregator a : config.aggregators) {
                nlohmann::ordered_json rr = {{"aggregator", aggregator_name(a)}};
                try {
                    const Ranking r = aggregate(table, subset, a);
                    rr["ranking"] = detail::ranking_json(r);
                    if (!ranking_is_strict(r)) agreement = false;
                    if (!reference) reference = r;
                    else if (*reference != r) agreement = false;
                } catch (const DegenerateComparisons& e) {
                    rr["ranking"] = nullptr;
                    rr["note"] = e.what();
                }
                rankings.push_back(rr);
            }
            row["rankings"] = rankings;
            row["agreement"] = agreement && reference.has_value();
            lomo.push_back(row);
        }
        doc["lomo"] = {{"label", "diagnostic"}, {"subsets", lomo}};
    }
    note("rankings over subsets containing identifiability-failing metrics are labeled "
         "diagnostic and never appear as primary");
    stage_done("lomo");

    // inversion grid
    {
        const InversionResult inv = run_inversion_grid(grid, dataset, config.signflip_B,
                                                       config.seed, config.alpha, config.fdr_q);
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& c : inv.cells)
            rows.push_back({{"model_a", c.model_a},
                            {"model_b", c.model_b},
                            {"rubric", c.rubric},
                            {"temperature", c.temperature},
                            {"delta", c.delta},
                            {"p", c.p},
                            {"raw_reject", c.raw_reject},
                            {"holm_reject", c.holm_reject},
                            {"bh_reject", c.bh_reject}});
        doc["inversion_grid"] = {{"tests", inv.cells.size()},
                                 {"raw_rejects", inv.raw_rejects},
                                 {"holm_rejects", inv.holm_rejects},
                                 {"bh_rejects", inv.bh_rejects},
                                 {"holm_min_threshold", inv.holm_min_threshold},
                                 {"cells", rows}};
    }
    stage_done("inversion_grid");

    // dimension sensitivity
    {
        std::map<ScoringPolicy, Ranking> per_policy;
        for (const auto& policy : grid.policies())
            for (MetricId m : kAllMetrics) {
                std::vector<double> scores;
                for (const auto& model : config.models)
                    scores.push_back(table.get(model, policy, m));
                per_policy[{policy, m}] = ranking_from_scores(config.models, scores, 0.0);
            }
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (PolicyDimension d :
             {PolicyDimension::Rubric, PolicyDimension::Metric, PolicyDimension::Temperature}) {
            nlohmann::ordered_json row = {{"dimension", dimension_name(d)}};
            try {
                row["mean_kendall_tau"] = dimension_sensitivity(per_policy, d);
            } catch (const NoEligiblePairs& e) {
                row["mean_kendall_tau"] = nullptr;
                row["note"] = e.what();
            }
            rows.push_back(row);
        }
        doc["dimension_sensitivity"] = rows;
    }
    stage_done("dimension_sensitivity");

    // Condorcet and the ranking-consistency permutation test, on the subset
    // actually used for primary claims when available.
    {
        const std::set<MetricId> subset =
            identifiable.empty() ? std::set<MetricId>(kAllMetrics.begin(), kAllMetrics.end())
                                 : identifiable;
        const WinMatrix w = win_matrix(table, subset);
        const CondorcetResult cr = condorcet(w);
        nlohmann::ordered_json cycles = nlohmann::ordered_json::array();
        for (const auto& c : cr.cycles) cycles.push_back({c[0], c[1], c[2]});
        nlohmann::ordered_json block = {
            {"metric_subset", metric_subset_name(subset)},
            {"winner",
             cr.winner ? nlohmann::ordered_json(*cr.winner) : nlohmann::ordered_json(nullptr)},
            {"cycles", cycles}};
        try {
            const PairPolicyWins ppw = pair_policy_wins(table, subset);
            const PermutationTResult pt = permutation_T(ppw, config.permutation_B, config.seed);
            block["permutation_T"] = {{"t_observed", pt.t_observed},
                                      {"null_mean", pt.null_mean},
                                      {"null_q025", pt.null_q025},
                                      {"null_q975", pt.null_q975},
                                      {"p_two_sided", pt.p_two_sided},
                                      {"B", pt.B}};
            note(pt.method_note);
        } catch (const DegenerateComparisons& e) {
            block["permutation_T"] = nullptr;
            block["note"] = e.what();
            note(std::string("permutation test skipped: ") + e.what());
        }
        doc["condorcet"] = block;
    }
    stage_done("condorcet");

    // optional threshold sweep
    if (config.run_sweep) {
        const auto outcomes =
            threshold_sweep(default_sweep_cells(), default_sweep_triples(),
                            config.sweep_replicates, config.seed, config.sweep_bootstrap_B);
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& so : outcomes) {
            nlohmann::ordered_json pm = nlohmann::ordered_json::array();
            for (std::size_t mi = 0; mi < kAllMetrics.size(); ++mi)
                pm.push_back({{"metric", metric_name(kAllMetrics[mi])},
                              {"pass_rate", so.per_metric_pass_rate[mi]}});
            rows.push_back({{"cell", so.cell.str()},
                            {"thresholds",
                             {{"H", so.triple.theta_H},
                              {"E", so.triple.theta_E},
                              {"SNR", so.triple.theta_SNR}}},
                            {"replicates", so.replicates},
                            {"per_metric_pass_rate", pm},
                            {"partition_match_rate", so.partition_match_rate},
                            {"top1_recovery", so.top1_recovery}});
        }
        doc["simulation"] = rows;
        note("synthetic error model: adjacent-class noise with boundary reflection; Gini over "
             "class proportions = half the mean absolute pairwise difference normalized by the "
             "mean proportion; top synthetic model base accuracy 0.62 (fixture choice)");
        stage_done("sweep");
    }

    // claim scope
    {
        std::vector<std::string> supported, not_supported;
        std::string pass_list, fail_list;
        for (const auto& row : diag_rows) {
            auto& target = row.pass ? pass_list : fail_list;
            if (!target.empty()) target += ", ";
            target += metric_name(row.metric);
        }
        if (!pass_list.empty())
            supported.push_back("model comparisons on the identifiable metrics (" + pass_list +
                                ") under the primary policy " + config.primary_policy.str() +
                                ", with clustered " + detail::fmt(config.confidence * 100, 0) +
                                "% intervals");
        supported.push_back("score reproduction against the pinned dataset (checksum " +
                            manifest.checksum.substr(0, 12) + "..., n=" +
                            std::to_string(manifest.row_count) + ") with seed " +
                            std::to_string(config.seed));
        if (!fail_list.empty())
            not_supported.push_back("any ranking or difference claim based on " + fail_list +
                                    ", which fail the identifiability rule on this dataset");
        not_supported.push_back(
            "generalization beyond the declared rubric and temperature grid; rubric wording is "
            "part of the measurement instrument");
        not_supported.push_back(
            "pairwise differences whose Holm-corrected tests do not reject at alpha = " +
            detail::fmt(config.alpha, 2));
        doc["claim_scope"] = {{"supported", supported}, {"not_supported", not_supported}};
    }

    doc["methods_notes"] = methods_notes;
    stage_done("report_assembly");

    AuditReport report;
    report.doc = std::move(doc);
    return report;
}

inline AuditReport run_audit(const RunConfig& config, std::vector<std::string>* stage_log = nullptr) {
    config.check();
    auto [dataset, dist] = load_dataset(config.dataset_path);
    (void)dist;
    const DeclaredGrid declared =
        make_declared_grid(config.models, config.rubrics, config.temperatures);
    const PredictionGrid grid = load_predictions(config.predictions_path, dataset, declared);
    return run_audit(config, dataset, grid, stage_log);
}

inline std::string render_structured(const AuditReport& report) {
    return report.doc.dump(2) + "\n";
}

namespace detail {

inline std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

inline void render_table(std::ostringstream& os, const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    for (std::size_t c = 0; c < header.size(); ++c)
        os << pad(header[c], width[c]) << (c + 1 < header.size() ? "  " : "");
    os << "\n";
    for (std::size_t c = 0; c < header.size(); ++c)
        os << std::string(width[c], '-') << (c + 1 < header.size() ? "  " : "");
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            os << pad(row[c], width[c]) << (c + 1 < row.size() ? "  " : "");
        os << "\n";
    }
    os << "\n";
}

inline std::string ranking_text(const nlohmann::ordered_json& r) {
    if (r.is_null()) return "(degenerate)";
    std::string out;
    for (std::size_t g = 0; g < r.size(); ++g) {
        if (g) out += " > ";
        for (std::size_t i = 0; i < r[g].size(); ++i) {
            if (i) out += " = ";
            out += r[g][i].get<std::string>();
        }
    }
    return out;
}

inline std::string ci_text(const nlohmann::ordered_json& ci) {
    return fmt(ci.at("point").get<double>()) + " [" + fmt(ci.at("lower").get<double>()) + ", " +
           fmt(ci.at("upper").get<double>()) + "]";
}

}  // namespace detail

// Human-readable rendering: every table present in the structured report plus
// the two-column claim-scope block. Empty optional sections are omitted.
inline std::string render_human(const AuditReport& report) {
    const auto& d = report.doc;
    std::ostringstream os;
    os << "AUDIT REPORT (" << d.at("provenance").at("tool_version").get<std::string>() << ")\n";
    const auto& man = d.at("provenance").at("manifest");
    os << "dataset: " << man.at("source_id").get<std::string>() << ", rows "
       << man.at("row_count") << ", sha256 " << man.at("checksum").get<std::string>() << "\n";
    os << "seed: " << d.at("provenance").at("config").at("seed") << "\n\n";

    os << "CLASS DISTRIBUTION\n";
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : d.at("class_distribution"))
            rows.push_back({r.at("label").get<std::string>(), r.at("count").dump(),
                            detail::fmt(r.at("proportion").get<double>())});
        detail::render_table(os, {"label", "count", "proportion"}, rows);
    }

    os << "BASELINES AND MDE\n";
    {
        const auto& b = d.at("baselines");
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : b.at("majority_baseline"))
            rows.push_back({r.at("metric").get<std::string>(),
                            detail::fmt(r.at("constant_majority_score").get<double>()),
                            detail::fmt(r.at("headroom").get<double>())});
        detail::render_table(os, {"metric", "majority baseline", "headroom"}, rows);
        os << "majority share: " << detail::ci_text(b.at("majority_share_interval")) << " ("
           << b.at("majority_share_interval").at("method").get<std::string>() << ")\n";
        for (const auto& r : b.at("mcnemar_mde")) {
            os << "McNemar MDE at discordant rate "
               << detail::fmt(r.at("discordant_rate").get<double>(), 2) << ": ";
            if (r.at("mde").is_null())
                os << "infeasible (" << r.at("note").get<std::string>() << ")";
            else
                os << detail::fmt(r.at("mde").get<double>());
            os << "\n";
        }
        os << "\n";
    }

    if (d.contains("agreement")) {
        os << "RUBRIC AGREEMENT\n";
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : d.at("agreement").at("pairs")) {
            std::string swap = "-";
            if (r.contains("dominant_swap")) {
                const auto& s = r.at("dominant_swap");
                swap = s.at("from").get<std::string>() + " -> " + s.at("to").get<std::string>() +
                       " on " + s.at("count").dump() +
                       (s.at("tied").get<bool>() ? " (tied)" : "");
            }
            rows.push_back({r.at("model").get<std::string>(),
                            r.at("rubric_a").get<std::string>() + "/" +
                                r.at("rubric_b").get<std::string>(),
                            r.at("temperature").get<std::string>(),
                            detail::ci_text(r.at("ci")), swap});
        }
        detail::render_table(os, {"model", "rubrics", "temp", "agreement", "dominant swap"}, rows);

        os << "SWAP RATES BY GOLD CLASS\n";
        rows.clear();
        for (const auto& r : d.at("agreement").at("swap_strata"))
            rows.push_back({r.at("rubric_a").get<std::string>() + "/" +
                                r.at("rubric_b").get<std::string>(),
                            r.at("gold").get<std::string>(), r.at("n_pairs").dump(),
                            r.at("swaps").dump(), detail::ci_text(r.at("ci")),
                            r.contains("note") ? r.at("note").get<std::string>() : ""});
        detail::render_table(os, {"rubrics", "gold", "pairs", "swaps", "rate", "note"}, rows);
        os << "chance agreement under independence: "
           << detail::fmt(d.at("agreement").at("chance_agreement").get<double>()) << "\n\n";
    }

    os << "IDENTIFIABILITY\n";
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : d.at("identifiability").at("rows")) {
            std::string verdict = r.at("pass").get<bool>() ? "pass" : "FAIL (";
            if (!r.at("pass").get<bool>()) {
                const auto& f = r.at("failed");
                for (std::size_t i = 0; i < f.size(); ++i)
                    verdict += (i ? ", " : "") + f[i].get<std::string>();
                verdict += ")";
            }
            const double snr = r.at("SNR").get<double>();
            rows.push_back({r.at("metric").get<std::string>(), detail::fmt(r.at("H").get<double>()),
                            detail::fmt(r.at("E").get<double>(), 0),
                            detail::fmt(r.at("SE").get<double>()),
                            detail::fmt(r.at("spread").get<double>()),
                            snr < 0 ? "inf" : detail::fmt(snr, 2), verdict});
        }
        detail::render_table(os, {"metric", "H", "E", "SE", "spread", "SNR", "verdict"}, rows);
    }

    os << "PRIMARY-CELL SCORES\n";
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& m : d.at("primary_cell_scores"))
            for (const auto& s : m.at("scores"))
                rows.push_back({m.at("model").get<std::string>(),
                                s.at("metric").get<std::string>(), detail::ci_text(s.at("ci"))});
        detail::render_table(os, {"model", "metric", "score"}, rows);
    }

    os << "PAIRWISE DELTA (exact match, primary cell)\n";
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : d.at("pairwise_delta"))
            rows.push_back({r.at("model_a").get<std::string>(),
                            r.at("model_b").get<std::string>(),
                            detail::ci_text(r.at("ci")), detail::fmt(r.at("p").get<double>()),
                            r.at("raw_reject").get<bool>() ? "yes" : "no",
                            r.at("holm_reject").get<bool>() ? "yes" : "no"});
        detail::render_table(os, {"model a", "model b", "delta", "p", "raw", "holm"}, rows);
    }

    os << "PRIMARY RANKING (subset "
       << d.at("primary_ranking").at("metric_subset").get<std::string>() << ")\n";
    for (const auto& r : d.at("primary_ranking").at("rankings"))
        os << "  " << r.at("aggregator").get<std::string>() << ": "
           << detail::ranking_text(r.at("ranking")) << "\n";
    os << "\n";

    os << "LEAVE-ONE-METRIC-OUT (diagnostic)\n";
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& sub : d.at("lomo").at("subsets"))
            for (const auto& r : sub.at("rankings"))
                rows.push_back({sub.at("subset").get<std::string>(),
                                r.at("aggregator").get<std::string>(),
                                detail::ranking_text(r.at("ranking")),
                                sub.at("agreement").get<bool>() ? "yes" : "no"});
        detail::render_table(os, {"subset", "aggregator", "ranking", "agreement"}, rows);
    }

    os << "INVERSION GRID\n";
    {
        const auto& g = d.at("inversion_grid");
        os << "tests: " << g.at("tests") << ", raw rejects: " << g.at("raw_rejects")
           << ", holm rejects: " << g.at("holm_rejects") << ", bh rejects: "
           << g.at("bh_rejects") << ", holm min threshold: "
           << detail::fmt(g.at("holm_min_threshold").get<double>(), 6) << "\n";
        std::vector<std::vector<std::string>> rows;
        for (const auto& c : g.at("cells"))
            rows.push_back({c.at("model_a").get<std::string>() + " vs " +
                                c.at("model_b").get<std::string>(),
                            c.at("rubric").get<std::string>(),
                            c.at("temperature").get<std::string>(),
                            detail::fmt(c.at("delta").get<double>()),
                            detail::fmt(c.at("p").get<double>(), 5),
                            c.at("holm_reject").get<bool>() ? "yes" : "no",
                            c.at("bh_reject").get<bool>() ? "yes" : "no"});
        detail::render_table(os, {"pair", "rubric", "temp", "delta", "p", "holm", "bh"}, rows);
    }

    os << "DIMENSION SENSITIVITY\n";
    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : d.at("dimension_sensitivity"))
            rows.push_back({r.at("dimension").get<std::string>(),
                            r.at("mean_kendall_tau").is_null()
                                ? "n/a"
                                : detail::fmt(r.at("mean_kendall_tau").get<double>())});
        detail::render_table(os, {"dimension", "mean kendall tau"}, rows);
    }

    os << "CONDORCET (subset " << d.at("condorcet").at("metric_subset").get<std::string>()
       << ")\n";
    {
        const auto& c = d.at("condorcet");
        os << "winner: " << (c.at("winner").is_null() ? "none" : c.at("winner").get<std::string>())
           << ", cycles: " << c.at("cycles").size() << "\n";
        if (!c.at("permutation_T").is_null()) {
            const auto& t = c.at("permutation_T");
            os << "permutation T: observed " << detail::fmt(t.at("t_observed").get<double>())
               << ", null mean " << detail::fmt(t.at("null_mean").get<double>()) << ", null 95% ["
               << detail::fmt(t.at("null_q025").get<double>()) << ", "
               << detail::fmt(t.at("null_q975").get<double>()) << "], p "
               << detail::fmt(t.at("p_two_sided").get<double>(), 5) << "\n";
        }
        os << "\n";
    }

    if (d.contains("simulation")) {
        os << "THRESHOLD SWEEP\n";
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : d.at("simulation")) {
            std::string pm;
            for (const auto& e : r.at("per_metric_pass_rate")) {
                if (!pm.empty()) pm += " ";
                pm += e.at("metric").get<std::string>() + "=" +
                      detail::fmt(e.at("pass_rate").get<double>(), 2);
            }
            const auto& th = r.at("thresholds");
            rows.push_back({r.at("cell").get<std::string>(),
                            detail::fmt(th.at("H").get<double>(), 3) + "/" +
                                detail::fmt(th.at("E").get<double>(), 0) + "/" +
                                detail::fmt(th.at("SNR").get<double>(), 1),
                            pm, detail::fmt(r.at("partition_match_rate").get<double>(), 2),
                            detail::fmt(r.at("top1_recovery").get<double>(), 2)});
        }
        detail::render_table(os, {"cell", "thresholds", "per-metric pass", "partition", "top-1"},
                             rows);
    }

    os << "CLAIM SCOPE\n";
    os << "supported:\n";
    for (const auto& s : d.at("claim_scope").at("supported"))
        os << "  + " << s.get<std::string>() << "\n";
    os << "not supported:\n";
    for (const auto& s : d.at("claim_scope").at("not_supported"))
        os << "  - " << s.get<std::string>() << "\n";
    os << "\n";

    os << "METHODS NOTES\n";
    for (const auto& s : d.at("methods_notes")) os << "  * " << s.get<std::string>() << "\n";
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    out << content;
    if (!out) throw DataError("failed writing output file: " + path);
}

}  // namespace ordaudit
