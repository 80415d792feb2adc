#pragma once

// Gold-label dataset: parsing, validation, class distribution, and the
// provenance manifest over a canonical byte-level serialization.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ordaudit/errors.hpp"
#include "ordaudit/sha256.hpp"

namespace ordaudit {

// One of the five ordinal levels {-2, -1, 0, +1, +2}.
struct Label {
    int value = 0;

    friend bool operator==(Label a, Label b) { return a.value == b.value; }
    friend auto operator<=>(Label a, Label b) { return a.value <=> b.value; }
};

inline constexpr int kLabelMin = -2;
inline constexpr int kLabelMax = 2;
inline constexpr int kNumLabels = 5;

inline bool label_in_range(int v) { return v >= kLabelMin && v <= kLabelMax; }

// Index 0..4 for array-backed tables.
inline int label_index(Label l) { return l.value - kLabelMin; }
inline Label label_from_index(int idx) { return Label{idx + kLabelMin}; }

// Signed decimal text; positive values carry an explicit '+'.
inline std::string label_text(Label l) {
    if (l.value > 0) return "+" + std::to_string(l.value);
    return std::to_string(l.value);
}

struct Item {
    std::size_t id = 0;
    std::string question;
    std::string response;
    Label gold;
};

struct Dataset {
    std::vector<Item> items;

    std::size_t n() const { return items.size(); }
    std::vector<Label> gold_labels() const {
        std::vector<Label> out;
        out.reserve(items.size());
        for (const auto& it : items) out.push_back(it.gold);
        return out;
    }
};

struct ClassDistribution {
    std::map<int, std::size_t> counts;       // label value -> count
    std::map<int, double> proportions;       // label value -> fraction

    std::size_t count_of(Label l) const {
        auto it = counts.find(l.value);
        return it == counts.end() ? 0 : it->second;
    }
    double proportion_of(Label l) const {
        auto it = proportions.find(l.value);
        return it == proportions.end() ? 0.0 : it->second;
    }
    // Smallest nonzero class count.
    std::size_t rarest_count() const {
        std::size_t best = 0;
        bool seen = false;
        for (const auto& [lbl, c] : counts)
            if (c > 0 && (!seen || c < best)) { best = c; seen = true; }
        return seen ? best : 0;
    }
};

struct DatasetManifest {
    std::string source_id;
    std::string access_date;   // ISO-8601 calendar date
    std::size_t row_count = 0;
    std::string checksum;      // 64 lowercase hex digits
    std::string independence_unit = "item";
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
    std::size_t n = 0;
    for (std::size_t pos = hay.find(needle); pos != std::string_view::npos;
         pos = hay.find(needle, pos + 1))
        ++n;
    return n;
}

}  // namespace detail

// Split a raw "Financial Question: ... Company Response: ..." row into its
// two fields. The template must match exactly once and in this order.
inline std::pair<std::string, std::string> parse_item_text(std::string_view raw) {
    static constexpr std::string_view kQ = "Financial Question:";
    static constexpr std::string_view kR = "Company Response:";
    const std::size_t nq = detail::count_occurrences(raw, kQ);
    const std::size_t nr = detail::count_occurrences(raw, kR);
    if (nq == 0 || nr == 0)
        throw TemplateMismatch("item text does not contain the expected template");
    if (nq > 1 || nr > 1)
        throw TemplateMismatch("item template matches ambiguously");
    const std::size_t qpos = raw.find(kQ);
    const std::size_t rpos = raw.find(kR);
    if (rpos < qpos)
        throw TemplateMismatch("template fields appear in the wrong order");
    if (!detail::trim(raw.substr(0, qpos)).empty())
        throw TemplateMismatch("unexpected content before the question field");
    std::string question = detail::trim(raw.substr(qpos + kQ.size(), rpos - qpos - kQ.size()));
    std::string response = detail::trim(raw.substr(rpos + kR.size()));
    if (question.empty() || response.empty())
        throw TemplateMismatch("extracted question/response is empty");
    return {question, response};
}

// Parse a signed decimal label token; the leading '+' is accepted.
inline Label parse_label(std::string_view raw) {
    const std::string tok = detail::trim(raw);
    if (tok.empty()) throw LabelOutOfRange("empty label token");
    std::size_t i = 0;
    int sign = 1;
    if (tok[i] == '+' || tok[i] == '-') {
        sign = tok[i] == '-' ? -1 : 1;
        ++i;
    }
    if (i == tok.size()) throw LabelOutOfRange("label token has no digits: '" + tok + "'");
    long long v = 0;
    for (; i < tok.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(tok[i])))
            throw LabelOutOfRange("label token is not an integer: '" + tok + "'");
        v = v * 10 + (tok[i] - '0');
        if (v > 1000) break;  // already far out of scale
    }
    v *= sign;
    if (!label_in_range(static_cast<int>(v)))
        throw LabelOutOfRange("label " + tok + " outside the five-level scale");
    return Label{static_cast<int>(v)};
}

inline ClassDistribution class_distribution(const std::vector<Label>& gold) {
    ClassDistribution d;
    for (Label l : gold) d.counts[l.value]++;
    for (const auto& [lbl, c] : d.counts)
        d.proportions[lbl] = static_cast<double>(c) / static_cast<double>(gold.size());
    return d;
}

// Canonical per-row byte form used for the manifest digest: JSON object with
// fields question, response, label (in that order), positive labels with an
// explicit '+', LF-terminated, no trailing whitespace.
inline std::string canonical_row(const Item& it) {
    nlohmann::json q = it.question;
    nlohmann::json r = it.response;
    std::string out = "{\"question\": ";
    out += q.dump();
    out += ", \"response\": ";
    out += r.dump();
    out += ", \"label\": ";
    out += label_text(it.gold);
    out += "}\n";
    return out;
}

inline std::string canonical_serialization(const Dataset& ds) {
    std::string out;
    for (const auto& it : ds.items) out += canonical_row(it);
    return out;
}

namespace detail {

// Parses one dataset record line. Accepts the canonical form (label with an
// explicit '+', which strict JSON rejects) by extracting the raw label token
// before handing the rest to the JSON parser.
inline Item parse_record_line(const std::string& line, std::size_t id) {
    // Locate the raw label token so signed text reaches parse_label verbatim.
    std::string label_token;
    std::string patched = line;
    const std::size_t key = line.find("\"label\"");
    if (key != std::string::npos) {
        std::size_t p = line.find(':', key);
        if (p != std::string::npos) {
            ++p;
            while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
            std::size_t e = p;
            while (e < line.size() && line[e] != ',' && line[e] != '}' &&
                   !std::isspace(static_cast<unsigned char>(line[e])))
                ++e;
            label_token = line.substr(p, e - p);
            if (!label_token.empty() && label_token[0] == '+')
                patched = line.substr(0, p) + line.substr(p + 1);
        }
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(patched);
    } catch (const nlohmann::json::exception& e) {
        throw TemplateMismatch(std::string("record is not a valid object: ") + e.what());
    }
    if (!j.is_object()) throw TemplateMismatch("record is not a key-value object");

    Item item;
    item.id = id;
    if (j.contains("question") && j.contains("response")) {
        item.question = detail::trim(j.at("question").get<std::string>());
        item.response = detail::trim(j.at("response").get<std::string>());
    } else if (j.contains("text")) {
        auto [q, r] = parse_item_text(j.at("text").get<std::string>());
        item.question = std::move(q);
        item.response = std::move(r);
    } else {
        throw TemplateMismatch("record lacks question/response (or text) fields");
    }
    if (item.question.empty() || item.response.empty())
        throw TemplateMismatch("record has an empty question or response");
    if (!j.contains("label")) throw LabelOutOfRange("record lacks a label field");
    if (label_token.empty()) label_token = j.at("label").dump();
    item.gold = parse_label(label_token);
    return item;
}

}  // namespace detail

inline std::pair<Dataset, ClassDistribution> load_dataset_stream(std::istream& in) {
    Dataset ds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        try {
            ds.items.push_back(detail::parse_record_line(line, ds.items.size()));
        } catch (const TemplateMismatch& e) {
            throw TemplateMismatch("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const LabelOutOfRange& e) {
            throw LabelOutOfRange("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (ds.items.empty()) throw EmptyDataset("dataset contains zero rows");
    return {std::move(ds), class_distribution(ds.gold_labels())};
}

inline std::pair<Dataset, ClassDistribution> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file: " + path);
    try {
        return load_dataset_stream(in);
    } catch (const EmptyDataset&) {
        throw EmptyDataset("dataset file has zero rows: " + path);
    }
}

inline DatasetManifest compute_manifest(const Dataset& ds, const std::string& source_id,
                                        const std::string& access_date) {
    if (ds.items.empty()) throw EmptyDataset("cannot pin a manifest for an empty dataset");
    DatasetManifest m;
    m.source_id = source_id;
    m.access_date = access_date;
    m.row_count = ds.n();
    m.checksum = detail::sha256_hex(canonical_serialization(ds));
    m.independence_unit = "item";
    return m;
}

// A configured expected checksum that disagrees with the computed one is a
// new measurement event, never a warning.
inline void verify_manifest(const DatasetManifest& m, const std::string& expected_checksum) {
    if (!expected_checksum.empty() && m.checksum != expected_checksum)
        throw ManifestMismatch(
            "dataset checksum " + m.checksum + " does not match the configured value " +
            expected_checksum + "; treat this as a new measurement event");
}

inline nlohmann::ordered_json manifest_to_json(const DatasetManifest& m) {
    nlohmann::ordered_json j;
    j["source_id"] = m.source_id;
    j["access_date"] = m.access_date;
    j["row_count"] = m.row_count;
    j["checksum"] = m.checksum;
    j["independence_unit"] = m.independence_unit;
    return j;
}

}  // namespace ordaudit
