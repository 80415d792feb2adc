#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ordaudit/ordaudit.hpp"

using namespace ordaudit;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    fs::path dir;
    std::string dataset_path;
    std::string predictions_path;
    std::string checksum;
    std::vector<std::string> models = {"alpha", "beta", "gamma", "delta"};
    std::vector<std::string> rubrics = {"R1", "R2"};
    std::vector<std::string> temperatures = {"0.0"};
};

// Synthetic 4-model x (2 rubrics x 1 temperature) grid on 120 items, written
// to disk in the line-delimited formats the loaders expect.
Fixture write_fixture(const std::string& name) {
    Fixture fx;
    fx.dir = fs::temp_directory_path() / ("ordaudit-test-" + name);
    fs::create_directories(fx.dir);

    SimCell cell;
    cell.n_items = 120;
    const auto gold = make_gold(cell, 31);
    Dataset ds;
    for (std::size_t i = 0; i < gold.size(); ++i)
        ds.items.push_back({i, "question " + std::to_string(i), "response " + std::to_string(i),
                            gold[i]});
    fx.dataset_path = (fx.dir / "dataset.jsonl").string();
    {
        std::ofstream out(fx.dataset_path, std::ios::binary);
        out << canonical_serialization(ds);
    }
    fx.checksum = compute_manifest(ds, "fixture", "2026-01-01").checksum;

    const PredictionGrid grid =
        simulate_grid(gold, 0.62, 0.15, fx.models, fx.rubrics, fx.temperatures, 77);
    fx.predictions_path = (fx.dir / "predictions.jsonl").string();
    {
        std::ofstream out(fx.predictions_path, std::ios::binary);
        for (const auto& model : fx.models)
            for (const auto& policy : grid.policies()) {
                const auto labels = grid.cell_labels(model, policy);
                for (std::size_t i = 0; i < labels.size(); ++i) {
                    nlohmann::ordered_json j;
                    j["model"] = model;
                    j["rubric"] = policy.rubric;
                    j["temperature"] = policy.temperature;
                    j["item_id"] = i;
                    j["label"] = labels[i].value;
                    out << j.dump() << "\n";
                }
            }
    }
    return fx;
}

nlohmann::json base_config(const Fixture& fx) {
    nlohmann::json j;
    j["dataset"] = {{"path", fx.dataset_path},
                    {"expected_checksum", fx.checksum},
                    {"source_id", "fixture"},
                    {"access_date", "2026-01-01"}};
    j["predictions"] = {{"path", fx.predictions_path}};
    j["grid"] = {{"models", fx.models},
                 {"rubrics", fx.rubrics},
                 {"temperatures", fx.temperatures}};
    j["primary_policy"] = {{"rubric", "R1"}, {"temperature", "0.0"}};
    j["seed"] = 42;
    j["resample"] = {{"bootstrap_B", 300}, {"signflip_B", 2000}, {"permutation_B", 300}};
    return j;
}

}  // namespace

TEST_CASE("run configuration parsing") {
    const Fixture fx = write_fixture("config");
    const nlohmann::json j = base_config(fx);
    const RunConfig c = parse_run_config(j);
    CHECK(c.models.size() == 4);
    CHECK(c.primary_policy.str() == "R1@0.0");
    CHECK(c.bootstrap_B == 300);
    CHECK(c.expected_checksum == fx.checksum);
    CHECK(c.thresholds.theta_E == doctest::Approx(50.0));  // defaults survive omission
    CHECK(c.aggregators.size() == 3);

    // numeric temperatures are normalized to their JSON text
    nlohmann::json num = j;
    num["grid"]["temperatures"] = {0.0};
    num["primary_policy"]["temperature"] = 0.0;
    const RunConfig cn = parse_run_config(num);
    CHECK(cn.temperatures[0] == "0.0");

    nlohmann::json missing = j;
    missing.erase("grid");
    CHECK_THROWS_AS((void)parse_run_config(missing), ConfigError);

    nlohmann::json one_model = j;
    one_model["grid"]["models"] = {"alpha"};
    CHECK_THROWS_AS((void)parse_run_config(one_model), ConfigError);

    nlohmann::json off_grid = j;
    off_grid["primary_policy"]["rubric"] = "R9";
    CHECK_THROWS_AS((void)parse_run_config(off_grid), ConfigError);

    nlohmann::json bad_conf = j;
    bad_conf["resample"]["confidence"] = 1.5;
    CHECK_THROWS_AS((void)parse_run_config(bad_conf), ConfigError);

    CHECK_THROWS_AS((void)load_run_config((fx.dir / "absent.json").string()), ConfigError);
}

TEST_CASE("inversion grid covers every (pair, policy) cell") {
    const Fixture fx = write_fixture("inversion");
    auto [ds, dist] = load_dataset(fx.dataset_path);
    (void)dist;
    const DeclaredGrid declared = make_declared_grid(fx.models, fx.rubrics, fx.temperatures);
    const PredictionGrid grid = load_predictions(fx.predictions_path, ds, declared);

    const InversionResult inv = run_inversion_grid(grid, ds, 2000, 42, 0.05, 0.05);
    CHECK(inv.cells.size() == 6 * 2);  // C(4,2) pairs x 2 policies
    CHECK(inv.holm_min_threshold == doctest::Approx(0.05 / 12.0));
    for (const auto& cell : inv.cells) {
        CHECK(cell.p > 0.0);
        CHECK(cell.p <= 1.0);
        if (cell.holm_reject) CHECK(cell.bh_reject);  // BH is never stricter
        if (cell.holm_reject) CHECK(cell.raw_reject);
    }

    // a model compared with itself has no discordant items: vacuous p = 1
    PredictionGrid twin({"m1", "m2"}, declared.policies, ds.n());
    for (const auto& policy : declared.policies) {
        const auto labels = grid.cell_labels("alpha", policy);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            twin.set({"m1", policy, i, labels[i], {}, {}});
            twin.set({"m2", policy, i, labels[i], {}, {}});
        }
    }
    const InversionResult same = run_inversion_grid(twin, ds, 500, 42, 0.05, 0.05);
    for (const auto& cell : same.cells) {
        CHECK(cell.delta == doctest::Approx(0.0));
        CHECK(cell.p == doctest::Approx(1.0));
        CHECK_FALSE(cell.raw_reject);
    }
}

TEST_CASE("audit pipeline end to end: stages, report shape, determinism") {
    const Fixture fx = write_fixture("pipeline");
    const RunConfig cfg = parse_run_config(base_config(fx));

    std::vector<std::string> stages;
    const AuditReport report = run_audit(cfg, &stages);
    const std::vector<std::string> expected = {
        "manifest",       "class_distribution", "baselines",
        "agreement",      "identifiability",    "primary_scores",
        "lomo",           "inversion_grid",     "dimension_sensitivity",
        "condorcet",      "report_assembly"};
    CHECK(stages == expected);

    for (const char* key :
         {"provenance", "class_distribution", "baselines", "agreement", "identifiability",
          "primary_cell_scores", "pairwise_delta", "primary_ranking", "lomo", "inversion_grid",
          "dimension_sensitivity", "condorcet", "claim_scope", "methods_notes"})
        CHECK(report.doc.contains(key));
    CHECK_FALSE(report.doc.contains("simulation"));  // sweep disabled by default

    CHECK(report.doc["provenance"]["manifest"]["checksum"] == fx.checksum);
    CHECK(report.doc["provenance"]["manifest"]["row_count"] == 120);
    CHECK(report.doc["identifiability"]["rows"].size() == 5);
    CHECK(report.doc["claim_scope"]["supported"].size() > 0);
    CHECK(report.doc["claim_scope"]["not_supported"].size() > 0);

    // byte-identical regeneration
    const AuditReport again = run_audit(cfg);
    CHECK(render_structured(report) == render_structured(again));

    // the human rendering carries every section
    const std::string human = render_human(report);
    for (const char* section :
         {"CLASS DISTRIBUTION", "BASELINES AND MDE", "RUBRIC AGREEMENT", "IDENTIFIABILITY",
          "PRIMARY-CELL SCORES", "PAIRWISE DELTA", "LEAVE-ONE-METRIC-OUT", "INVERSION GRID",
          "DIMENSION SENSITIVITY", "CONDORCET", "CLAIM SCOPE", "METHODS NOTES"})
        CHECK(human.find(section) != std::string::npos);

    // a changed seed changes resampled quantities but not the point manifest
    RunConfig reseeded = cfg;
    reseeded.seed = 43;
    const AuditReport other = run_audit(reseeded);
    CHECK(other.doc["provenance"]["manifest"]["checksum"] == fx.checksum);
    CHECK(render_structured(report) != render_structured(other));
}

TEST_CASE("checksum pinning: a mismatch is fatal before any analysis") {
    const Fixture fx = write_fixture("manifest");
    nlohmann::json j = base_config(fx);
    j["dataset"]["expected_checksum"] = std::string(64, '0');
    const RunConfig cfg = parse_run_config(j);
    std::vector<std::string> stages;
    CHECK_THROWS_AS((void)run_audit(cfg, &stages), ManifestMismatch);
    CHECK(stages.empty());
}

#ifdef CLI_PATH

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("command-line interface: exit codes and artifacts") {
    const Fixture fx = write_fixture("cli");
    const fs::path out = fx.dir / "out";
    fs::create_directories(out);
    const std::string config_path = (fx.dir / "config.json").string();
    {
        std::ofstream f(config_path);
        f << base_config(fx).dump(2);
    }

    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("ingest --config " + config_path + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(run_cli("score --config " + config_path + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "scores.json"));
    CHECK(run_cli("audit --config " + config_path + " --format both --out " + out.string()) == 0);
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "report.txt"));
    CHECK(run_cli("report " + (out / "report.json").string() + " --format human --out " +
                  out.string()) == 0);

    // config errors exit 2
    CHECK(run_cli("audit --config " + (fx.dir / "absent.json").string()) == 2);
    CHECK(run_cli("audit") == 2);  // --config is required

    // provenance errors exit 3
    nlohmann::json bad = base_config(fx);
    bad["dataset"]["expected_checksum"] = std::string(64, '0');
    const std::string bad_path = (fx.dir / "bad.json").string();
    {
        std::ofstream f(bad_path);
        f << bad.dump(2);
    }
    CHECK(run_cli("audit --config " + bad_path + " --out " + out.string()) == 3);

    // identical seeds give byte-identical reports
    const fs::path out2 = fx.dir / "out2";
    fs::create_directories(out2);
    CHECK(run_cli("audit --config " + config_path + " --out " + out2.string()) == 0);
    std::ifstream a(out / "report.json"), b(out2 / "report.json");
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
}

#endif  // CLI_PATH
