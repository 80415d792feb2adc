#pragma once

// Prediction grid and policy data model. The grid stores one label per
// (model, inference policy, item) and is immutable after load; every
// statistical module reads aligned vectors from here.

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ordaudit/corpus.hpp"
#include "ordaudit/errors.hpp"

namespace ordaudit {

// (rubric, temperature). Temperatures compare as the exact decimal text
// configured in the declared grid, never as floating point.
struct InferencePolicy {
    std::string rubric;
    std::string temperature;

    friend bool operator==(const InferencePolicy&, const InferencePolicy&) = default;
    friend auto operator<=>(const InferencePolicy&, const InferencePolicy&) = default;

    std::string str() const { return rubric + "@" + temperature; }
};

enum class MetricId { A1, A2, A3, A4, A5 };

inline constexpr std::array<MetricId, 5> kAllMetrics = {
    MetricId::A1, MetricId::A2, MetricId::A3, MetricId::A4, MetricId::A5};

inline std::string metric_name(MetricId m) {
    switch (m) {
        case MetricId::A1: return "A1";
        case MetricId::A2: return "A2";
        case MetricId::A3: return "A3";
        case MetricId::A4: return "A4";
        case MetricId::A5: return "A5";
    }
    return "?";
}

inline std::string metric_description(MetricId m) {
    switch (m) {
        case MetricId::A1: return "exact accuracy";
        case MetricId::A2: return "macro-F1";
        case MetricId::A3: return "within-one accuracy";
        case MetricId::A4: return "weighted kappa";
        case MetricId::A5: return "worst-class accuracy";
    }
    return "?";
}

inline MetricId metric_from_name(const std::string& s) {
    for (MetricId m : kAllMetrics)
        if (metric_name(m) == s) return m;
    throw ConfigError("unknown metric id: " + s);
}

struct PredictionRecord {
    std::string model;
    InferencePolicy policy;
    std::size_t item_id = 0;
    Label label;
    std::optional<double> confidence;
    std::optional<std::string> reasoning;
};

class PredictionGrid {
  public:
    PredictionGrid(std::vector<std::string> models, std::vector<InferencePolicy> policies,
                   std::size_t n_items)
        : models_(std::move(models)), policies_(std::move(policies)), n_items_(n_items) {
        labels_.assign(models_.size() * policies_.size() * n_items_, kUnset);
    }

    const std::vector<std::string>& models() const { return models_; }
    const std::vector<InferencePolicy>& policies() const { return policies_; }
    std::size_t n_items() const { return n_items_; }
    std::size_t cell_count() const { return models_.size() * policies_.size() * n_items_; }

    std::size_t model_index(const std::string& model) const {
        for (std::size_t i = 0; i < models_.size(); ++i)
            if (models_[i] == model) return i;
        throw UnknownModel("model not in declared grid: " + model);
    }

    std::size_t policy_index(const InferencePolicy& p) const {
        for (std::size_t i = 0; i < policies_.size(); ++i)
            if (policies_[i] == p) return i;
        throw UnknownPolicy("policy not in declared grid: " + p.str());
    }

    void set(const PredictionRecord& rec) {
        const std::size_t mi = model_index(rec.model);
        const std::size_t pi = policy_index(rec.policy);
        if (rec.item_id >= n_items_)
            throw UnknownItem("item_id " + std::to_string(rec.item_id) +
                              " outside dataset of size " + std::to_string(n_items_));
        int8_t& slot = labels_[offset(mi, pi, rec.item_id)];
        if (slot != kUnset)
            throw DuplicateCell("duplicate prediction for (" + rec.model + ", " +
                                rec.policy.str() + ", item " + std::to_string(rec.item_id) + ")");
        slot = static_cast<int8_t>(rec.label.value);
    }

    // Every declared (model, policy, item) triple must carry exactly one label.
    void check_complete() const {
        std::vector<std::string> missing;
        for (std::size_t mi = 0; mi < models_.size(); ++mi)
            for (std::size_t pi = 0; pi < policies_.size(); ++pi)
                for (std::size_t i = 0; i < n_items_; ++i)
                    if (labels_[offset(mi, pi, i)] == kUnset)
                        missing.push_back("(" + models_[mi] + ", " + policies_[pi].str() +
                                          ", item " + std::to_string(i) + ")");
        if (!missing.empty()) {
            std::ostringstream os;
            os << missing.size() << " declared grid cell(s) absent from the prediction file: ";
            for (std::size_t i = 0; i < missing.size(); ++i) {
                if (i) os << ", ";
                os << missing[i];
            }
            throw MissingCell(os.str());
        }
    }

    // Labels for one cell, aligned to item id order, length n_items.
    std::vector<Label> cell_labels(const std::string& model, const InferencePolicy& policy) const {
        std::size_t mi, pi;
        try {
            mi = model_index(model);
            pi = policy_index(policy);
        } catch (const DataError& e) {
            throw UnknownCell(e.what());
        }
        std::vector<Label> out(n_items_);
        for (std::size_t i = 0; i < n_items_; ++i)
            out[i] = Label{labels_[offset(mi, pi, i)]};
        return out;
    }

    // Element i is 1 iff the predicted label equals gold on item i. Exact
    // match is the per-item test indicator for every downstream paired test.
    std::vector<int> correctness_vector(const std::string& model, const InferencePolicy& policy,
                                        const Dataset& dataset) const {
        const std::vector<Label> pred = cell_labels(model, policy);
        if (dataset.n() != pred.size())
            throw LengthMismatch("dataset size does not match grid item count");
        std::vector<int> out(pred.size());
        for (std::size_t i = 0; i < pred.size(); ++i)
            out[i] = pred[i] == dataset.items[i].gold ? 1 : 0;
        return out;
    }

  private:
    static constexpr int8_t kUnset = 127;

    std::size_t offset(std::size_t mi, std::size_t pi, std::size_t item) const {
        return (mi * policies_.size() + pi) * n_items_ + item;
    }

    std::vector<std::string> models_;
    std::vector<InferencePolicy> policies_;
    std::size_t n_items_;
    std::vector<int8_t> labels_;
};

struct DeclaredGrid {
    std::vector<std::string> models;
    std::vector<InferencePolicy> policies;
};

inline DeclaredGrid make_declared_grid(const std::vector<std::string>& models,
                                       const std::vector<std::string>& rubrics,
                                       const std::vector<std::string>& temperatures) {
    DeclaredGrid g;
    g.models = models;
    for (const auto& r : rubrics)
        for (const auto& t : temperatures) g.policies.push_back({r, t});
    return g;
}

inline PredictionRecord parse_prediction_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("prediction record is not a valid object: ") + e.what());
    }
    PredictionRecord rec;
    rec.model = j.at("model").get<std::string>();
    rec.policy.rubric = j.at("rubric").get<std::string>();
    const auto& temp = j.at("temperature");
    rec.policy.temperature = temp.is_string() ? temp.get<std::string>() : temp.dump();
    rec.item_id = j.at("item_id").get<std::size_t>();
    rec.label = parse_label(j.at("label").dump());
    if (j.contains("confidence") && !j.at("confidence").is_null()) {
        const double c = j.at("confidence").get<double>();
        if (c < 0.0 || c > 1.0)
            throw DataError("confidence " + std::to_string(c) + " outside [0,1]");
        rec.confidence = c;
    }
    if (j.contains("reasoning") && !j.at("reasoning").is_null())
        rec.reasoning = j.at("reasoning").get<std::string>();
    return rec;
}

inline PredictionGrid load_predictions_stream(std::istream& in, const Dataset& dataset,
                                              const DeclaredGrid& declared) {
    if (declared.models.empty() || declared.policies.empty())
        throw ConfigError("declared grid is empty");
    PredictionGrid grid(declared.models, declared.policies, dataset.n());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const std::string at = "line " + std::to_string(lineno) + ": ";
        try {
            grid.set(parse_prediction_line(line));
        } catch (const DuplicateCell& e) {
            throw DuplicateCell(at + e.what());
        } catch (const UnknownItem& e) {
            throw UnknownItem(at + e.what());
        } catch (const UnknownModel& e) {
            throw UnknownModel(at + e.what());
        } catch (const UnknownPolicy& e) {
            throw UnknownPolicy(at + e.what());
        } catch (const LabelOutOfRange& e) {
            throw LabelOutOfRange(at + e.what());
        } catch (const DataError& e) {
            throw DataError(at + e.what());
        }
    }
    grid.check_complete();
    return grid;
}

inline PredictionGrid load_predictions(const std::string& path, const Dataset& dataset,
                                       const DeclaredGrid& declared) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open prediction file: " + path);
    return load_predictions_stream(in, dataset, declared);
}

}  // namespace ordaudit
