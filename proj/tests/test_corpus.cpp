#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "ordaudit/corpus.hpp"

using namespace ordaudit;

TEST_CASE("label parsing accepts the signed five-level scale") {
    CHECK(parse_label("+1").value == 1);
    CHECK(parse_label("+2").value == 2);
    CHECK(parse_label("-2").value == -2);
    CHECK(parse_label("0").value == 0);
    CHECK(parse_label("1").value == 1);
    CHECK(parse_label(" -1 ").value == -1);
    CHECK_THROWS_AS(parse_label("3"), LabelOutOfRange);
    CHECK_THROWS_AS(parse_label("-3"), LabelOutOfRange);
    CHECK_THROWS_AS(parse_label("1.5"), LabelOutOfRange);
    CHECK_THROWS_AS(parse_label(""), LabelOutOfRange);
    CHECK_THROWS_AS(parse_label("+"), LabelOutOfRange);
    CHECK_THROWS_AS(parse_label("abc"), LabelOutOfRange);
    CHECK_THROWS_AS(parse_label("100000"), LabelOutOfRange);
}

TEST_CASE("label text carries an explicit plus on positives") {
    CHECK(label_text(Label{1}) == "+1");
    CHECK(label_text(Label{2}) == "+2");
    CHECK(label_text(Label{0}) == "0");
    CHECK(label_text(Label{-2}) == "-2");
    for (int v = kLabelMin; v <= kLabelMax; ++v)
        CHECK(parse_label(label_text(Label{v})).value == v);
}

TEST_CASE("item template splits exactly once, in order") {
    auto [q, r] = parse_item_text("Financial Question: What was Q3 revenue? "
                                  "Company Response: Revenue was up 4%.");
    CHECK(q == "What was Q3 revenue?");
    CHECK(r == "Revenue was up 4%.");

    CHECK_THROWS_AS(parse_item_text("no template here"), TemplateMismatch);
    CHECK_THROWS_AS(parse_item_text("Financial Question: a"), TemplateMismatch);
    CHECK_THROWS_AS(parse_item_text("Company Response: b Financial Question: a"),
                    TemplateMismatch);
    CHECK_THROWS_AS(parse_item_text("Financial Question: a Financial Question: b "
                                    "Company Response: c"),
                    TemplateMismatch);
    CHECK_THROWS_AS(parse_item_text("junk Financial Question: a Company Response: b"),
                    TemplateMismatch);
    CHECK_THROWS_AS(parse_item_text("Financial Question:  Company Response: b"),
                    TemplateMismatch);
}

TEST_CASE("class distribution and rarest count") {
    std::vector<Label> gold;
    const std::pair<int, std::size_t> published[] = {
        {-2, 2}, {-1, 11}, {0, 72}, {1, 139}, {2, 29}};
    for (auto [v, c] : published)
        for (std::size_t i = 0; i < c; ++i) gold.push_back(Label{v});
    const ClassDistribution d = class_distribution(gold);
    CHECK(d.count_of(Label{1}) == 139);
    CHECK(d.count_of(Label{-2}) == 2);
    CHECK(d.rarest_count() == 2);
    CHECK(d.proportion_of(Label{1}) == doctest::Approx(139.0 / 253.0));
    double total = 0.0;
    for (const auto& [lbl, p] : d.proportions) total += p;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("canonical row form is byte-stable") {
    Item it{0, "What was Q3 revenue?", "Revenue was up 4%.", Label{1}};
    CHECK(canonical_row(it) ==
          "{\"question\": \"What was Q3 revenue?\", \"response\": \"Revenue was up 4%.\", "
          "\"label\": +1}\n");
    Item neg{1, "q", "r", Label{-2}};
    CHECK(canonical_row(neg) == "{\"question\": \"q\", \"response\": \"r\", \"label\": -2}\n");
}

TEST_CASE("sha256 matches the published test vectors") {
    CHECK(detail::sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(detail::sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("dataset loading reports line numbers and hard-fails on empties") {
    std::istringstream good(
        "{\"question\": \"q1\", \"response\": \"r1\", \"label\": +1}\n"
        "\n"
        "{\"question\": \"q2\", \"response\": \"r2\", \"label\": -2}\n");
    auto [ds, dist] = load_dataset_stream(good);
    CHECK(ds.n() == 2);
    CHECK(ds.items[0].gold.value == 1);
    CHECK(ds.items[1].gold.value == -2);
    CHECK(dist.count_of(Label{-2}) == 1);

    std::istringstream bad_label(
        "{\"question\": \"q\", \"response\": \"r\", \"label\": 7}\n");
    CHECK_THROWS_WITH_AS(load_dataset_stream(bad_label),
                         doctest::Contains("line 1"), LabelOutOfRange);

    std::istringstream not_json("not json at all\n");
    CHECK_THROWS_AS(load_dataset_stream(not_json), TemplateMismatch);

    std::istringstream empty("\n\n");
    CHECK_THROWS_AS(load_dataset_stream(empty), EmptyDataset);
}

TEST_CASE("text-form rows pass through the template parser") {
    std::istringstream in(
        "{\"text\": \"Financial Question: q1 Company Response: r1\", \"label\": 0}\n");
    auto [ds, dist] = load_dataset_stream(in);
    CHECK(ds.items[0].question == "q1");
    CHECK(ds.items[0].response == "r1");
    (void)dist;
}

TEST_CASE("canonical serialization round-trips through the loader") {
    Dataset ds;
    ds.items.push_back({0, "alpha question", "beta response", Label{2}});
    ds.items.push_back({1, "gamma \"quoted\"", "delta\nnewline", Label{-1}});
    const std::string bytes = canonical_serialization(ds);
    std::istringstream in(bytes);
    auto [back, dist] = load_dataset_stream(in);
    (void)dist;
    REQUIRE(back.n() == ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        CHECK(back.items[i].question == ds.items[i].question);
        CHECK(back.items[i].response == ds.items[i].response);
        CHECK(back.items[i].gold == ds.items[i].gold);
    }
    CHECK(canonical_serialization(back) == bytes);
}

TEST_CASE("manifest pins the checksum; mismatch is a new measurement event") {
    Dataset ds;
    ds.items.push_back({0, "q", "r", Label{0}});
    const DatasetManifest m = compute_manifest(ds, "unit-fixture", "2026-08-26");
    CHECK(m.row_count == 1);
    CHECK(m.checksum.size() == 64);
    CHECK(m.independence_unit == "item");
    CHECK_NOTHROW(verify_manifest(m, m.checksum));
    CHECK_NOTHROW(verify_manifest(m, ""));  // no pin configured
    CHECK_THROWS_WITH_AS(
        verify_manifest(m, std::string(64, '0')),
        doctest::Contains("new measurement event"), ManifestMismatch);

    // Any row edit moves the checksum.
    Dataset edited = ds;
    edited.items[0].gold = Label{1};
    CHECK(compute_manifest(edited, "unit-fixture", "2026-08-26").checksum != m.checksum);
}
