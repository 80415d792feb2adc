// Command-line front end. Every subcommand reads the same run-configuration
// document; exit codes: 0 success, 2 configuration error, 3 data/provenance
// error, 4 statistical degeneracy.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ordaudit/ordaudit.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "structured";  // structured | human | both
    std::int64_t seed_override = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "run configuration file (JSON)");
    if (config_required) c->required();
    cmd->add_option("--seed", opts.seed_override, "override the configured seed");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--format", opts.format, "output format: structured, human, or both")
        ->check(CLI::IsMember({"structured", "human", "both"}));
}

ordaudit::RunConfig load_config(const CommonOpts& opts) {
    ordaudit::RunConfig cfg = ordaudit::load_run_config(opts.config_path);
    if (opts.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed_override);
    return cfg;
}

void write_json(const CommonOpts& opts, const std::string& name,
                const nlohmann::ordered_json& doc) {
    ordaudit::write_file(opts.out_dir + "/" + name, doc.dump(2) + "\n");
    std::cout << "wrote " << opts.out_dir + "/" + name << "\n";
}

std::pair<ordaudit::Dataset, ordaudit::PredictionGrid> load_inputs(
    const ordaudit::RunConfig& cfg) {
    auto [dataset, dist] = ordaudit::load_dataset(cfg.dataset_path);
    (void)dist;
    const ordaudit::DatasetManifest man =
        ordaudit::compute_manifest(dataset, cfg.source_id, cfg.access_date);
    ordaudit::verify_manifest(man, cfg.expected_checksum);
    const ordaudit::DeclaredGrid declared =
        ordaudit::make_declared_grid(cfg.models, cfg.rubrics, cfg.temperatures);
    ordaudit::PredictionGrid grid =
        ordaudit::load_predictions(cfg.predictions_path, dataset, declared);
    return {std::move(dataset), std::move(grid)};
}

int cmd_ingest(const CommonOpts& opts) {
    const ordaudit::RunConfig cfg = load_config(opts);
    auto [dataset, dist] = ordaudit::load_dataset(cfg.dataset_path);
    const ordaudit::DatasetManifest man =
        ordaudit::compute_manifest(dataset, cfg.source_id, cfg.access_date);
    ordaudit::verify_manifest(man, cfg.expected_checksum);
    nlohmann::ordered_json doc;
    doc["manifest"] = ordaudit::manifest_to_json(man);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& [lbl, cnt] : dist.counts)
        rows.push_back({{"label", ordaudit::label_text(ordaudit::Label{lbl})},
                        {"count", cnt},
                        {"proportion", dist.proportions.at(lbl)}});
    doc["class_distribution"] = rows;
    write_json(opts, "manifest.json", doc);
    return 0;
}

int cmd_score(const CommonOpts& opts) {
    const ordaudit::RunConfig cfg = load_config(opts);
    auto [dataset, grid] = load_inputs(cfg);
    const ordaudit::ScoreTable table = ordaudit::build_score_table(grid, dataset);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& model : table.models())
        for (const auto& policy : table.policies())
            for (ordaudit::MetricId m : ordaudit::kAllMetrics)
                rows.push_back({{"model", model},
                                {"rubric", policy.rubric},
                                {"temperature", policy.temperature},
                                {"metric", ordaudit::metric_name(m)},
                                {"score", table.get(model, policy, m)}});
    write_json(opts, "scores.json", nlohmann::ordered_json{{"scores", rows}});
    return 0;
}

void emit_report(const CommonOpts& opts, const ordaudit::AuditReport& report) {
    if (opts.format == "structured" || opts.format == "both") {
        ordaudit::write_file(opts.out_dir + "/report.json",
                             ordaudit::render_structured(report));
        std::cout << "wrote " << opts.out_dir + "/report.json" << "\n";
    }
    if (opts.format == "human" || opts.format == "both") {
        ordaudit::write_file(opts.out_dir + "/report.txt", ordaudit::render_human(report));
        std::cout << "wrote " << opts.out_dir + "/report.txt" << "\n";
    }
}

int cmd_audit(const CommonOpts& opts) {
    const ordaudit::RunConfig cfg = load_config(opts);
    std::vector<std::string> stages;
    try {
        auto [dataset, grid] = load_inputs(cfg);
        const ordaudit::AuditReport report = ordaudit::run_audit(cfg, dataset, grid, &stages);
        emit_report(opts, report);
        return 0;
    } catch (...) {
        std::cerr << "audit aborted; completed stages:";
        for (const auto& s : stages) std::cerr << " " << s;
        std::cerr << "\n";
        throw;
    }
}

int cmd_rank(const CommonOpts& opts) {
    const ordaudit::RunConfig cfg = load_config(opts);
    auto [dataset, grid] = load_inputs(cfg);
    const ordaudit::ScoreTable table = ordaudit::build_score_table(grid, dataset);
    const std::set<ordaudit::MetricId> full(ordaudit::kAllMetrics.begin(),
                                            ordaudit::kAllMetrics.end());
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (ordaudit::Aggregator a : cfg.aggregators) {
        nlohmann::ordered_json row = {{"aggregator", ordaudit::aggregator_name(a)}};
        const ordaudit::Ranking r = ordaudit::aggregate(table, full, a);
        nlohmann::ordered_json groups = nlohmann::ordered_json::array();
        for (const auto& g : r) groups.push_back(g);
        row["ranking"] = groups;
        rows.push_back(row);
    }
    write_json(opts, "rankings.json",
               nlohmann::ordered_json{{"metric_subset", "full"}, {"rankings", rows}});
    return 0;
}

int cmd_inversions(const CommonOpts& opts) {
    const ordaudit::RunConfig cfg = load_config(opts);
    auto [dataset, grid] = load_inputs(cfg);
    const ordaudit::InversionResult inv = ordaudit::run_inversion_grid(
        grid, dataset, cfg.signflip_B, cfg.seed, cfg.alpha, cfg.fdr_q);
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
    write_json(opts, "inversions.json",
               nlohmann::ordered_json{{"tests", inv.cells.size()},
                                      {"raw_rejects", inv.raw_rejects},
                                      {"holm_rejects", inv.holm_rejects},
                                      {"bh_rejects", inv.bh_rejects},
                                      {"holm_min_threshold", inv.holm_min_threshold},
                                      {"cells", rows}});
    return 0;
}

int cmd_dimsens(const CommonOpts& opts) {
    const ordaudit::RunConfig cfg = load_config(opts);
    auto [dataset, grid] = load_inputs(cfg);
    const ordaudit::ScoreTable table = ordaudit::build_score_table(grid, dataset);
    std::map<ordaudit::ScoringPolicy, ordaudit::Ranking> per_policy;
    for (const auto& policy : grid.policies())
        for (ordaudit::MetricId m : ordaudit::kAllMetrics) {
            std::vector<double> scores;
            for (const auto& model : cfg.models) scores.push_back(table.get(model, policy, m));
            per_policy[{policy, m}] = ordaudit::ranking_from_scores(cfg.models, scores, 0.0);
        }
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (ordaudit::PolicyDimension d :
         {ordaudit::PolicyDimension::Rubric, ordaudit::PolicyDimension::Metric,
          ordaudit::PolicyDimension::Temperature}) {
        nlohmann::ordered_json row = {{"dimension", ordaudit::dimension_name(d)}};
        try {
            row["mean_kendall_tau"] = ordaudit::dimension_sensitivity(per_policy, d);
        } catch (const ordaudit::NoEligiblePairs& e) {
            row["mean_kendall_tau"] = nullptr;
            row["note"] = e.what();
        }
        rows.push_back(row);
    }
    write_json(opts, "dimension_sensitivity.json",
               nlohmann::ordered_json{{"dimensions", rows}});
    return 0;
}

int cmd_simulate(const CommonOpts& opts) {
    const ordaudit::RunConfig cfg = load_config(opts);
    const auto outcomes = ordaudit::threshold_sweep(
        ordaudit::default_sweep_cells(), ordaudit::default_sweep_triples(),
        cfg.sweep_replicates, cfg.seed, cfg.sweep_bootstrap_B);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& so : outcomes) {
        nlohmann::ordered_json pm = nlohmann::ordered_json::array();
        for (std::size_t mi = 0; mi < ordaudit::kAllMetrics.size(); ++mi)
            pm.push_back({{"metric", ordaudit::metric_name(ordaudit::kAllMetrics[mi])},
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
    write_json(opts, "simulation.json", nlohmann::ordered_json{{"sweep", rows}});
    return 0;
}

int cmd_report(const CommonOpts& opts, const std::string& input) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw ordaudit::DataError("cannot open stored report: " + input);
    ordaudit::AuditReport report;
    try {
        in >> report.doc;
    } catch (const nlohmann::json::exception& e) {
        throw ordaudit::DataError(std::string("stored report is not valid JSON: ") + e.what());
    }
    emit_report(opts, report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ordinal-classification evaluation audit"};
    app.require_subcommand(1);

    CommonOpts ingest_o, score_o, audit_o, rank_o, inv_o, dim_o, sim_o, rep_o;
    std::string report_input;

    add_common(app.add_subcommand("ingest", "pin the dataset and emit its manifest"), ingest_o);
    add_common(app.add_subcommand("score", "score the prediction grid on all metrics"), score_o);
    add_common(app.add_subcommand("audit", "run the full audit pipeline"), audit_o);
    add_common(app.add_subcommand("rank", "aggregate rankings over the full metric set"), rank_o);
    add_common(app.add_subcommand("inversions", "run the pairwise inversion grid"), inv_o);
    add_common(app.add_subcommand("dimsens", "rank sensitivity per policy dimension"), dim_o);
    add_common(app.add_subcommand("simulate", "run the threshold-sensitivity sweep"), sim_o);
    auto* rep = app.add_subcommand("report", "re-render a stored structured report");
    rep->add_option("input", report_input, "stored structured report (JSON)")->required();
    add_common(rep, rep_o, /*config_required=*/false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand("ingest")) return cmd_ingest(ingest_o);
        if (app.got_subcommand("score")) return cmd_score(score_o);
        if (app.got_subcommand("audit")) return cmd_audit(audit_o);
        if (app.got_subcommand("rank")) return cmd_rank(rank_o);
        if (app.got_subcommand("inversions")) return cmd_inversions(inv_o);
        if (app.got_subcommand("dimsens")) return cmd_dimsens(dim_o);
        if (app.got_subcommand("simulate")) return cmd_simulate(sim_o);
        if (app.got_subcommand("report")) return cmd_report(rep_o, report_input);
    } catch (const ordaudit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ordaudit::DegeneracyError& e) {
        std::cerr << "degeneracy error: " << e.what() << "\n";
        return 4;
    } catch (const ordaudit::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
