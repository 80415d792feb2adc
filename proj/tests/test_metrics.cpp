#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "ordaudit/metrics.hpp"
#include "ordaudit/resample.hpp"

using namespace ordaudit;

namespace {

std::vector<Label> published_gold() {
    std::vector<Label> gold;
    const std::pair<int, std::size_t> published[] = {
        {-2, 2}, {-1, 11}, {0, 72}, {1, 139}, {2, 29}};
    for (auto [v, c] : published)
        for (std::size_t i = 0; i < c; ++i) gold.push_back(Label{v});
    return gold;
}

std::vector<Label> random_labels(std::size_t n, rng::Stream& s) {
    std::vector<Label> out(n);
    for (auto& l : out) l = Label{static_cast<int>(s.below(5)) - 2};
    return out;
}

// Independent oracle: per-class precision/recall from scratch, no confusion
// matrix reuse.
double oracle_macro_f1(const std::vector<Label>& pred, const std::vector<Label>& gold) {
    double sum = 0.0;
    int classes = 0;
    for (int c = -2; c <= 2; ++c) {
        std::size_t tp = 0, in_gold = 0, in_pred = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            if (gold[i].value == c) ++in_gold;
            if (pred[i].value == c) ++in_pred;
            if (gold[i].value == c && pred[i].value == c) ++tp;
        }
        if (in_gold == 0) continue;
        ++classes;
        if (tp == 0) continue;
        const double prec = static_cast<double>(tp) / in_pred;
        const double rec = static_cast<double>(tp) / in_gold;
        sum += 2.0 * prec * rec / (prec + rec);
    }
    return sum / classes;
}

// Independent oracle via the agreement-weight formulation
// kappa = (po_w - pe_w) / (1 - pe_w), w_agree = 1 - |i-j|^q / 4^q.
double oracle_kappa(const std::vector<Label>& pred, const std::vector<Label>& gold, int q) {
    const double n = static_cast<double>(gold.size());
    std::array<double, 5> pm{}, gm{};
    double po = 0.0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        pm[pred[i].value + 2] += 1.0 / n;
        gm[gold[i].value + 2] += 1.0 / n;
        po += 1.0 - std::pow(std::abs(pred[i].value - gold[i].value), q) / std::pow(4.0, q);
    }
    po /= n;
    double pe = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            pe += gm[i] * pm[j] * (1.0 - std::pow(std::abs(i - j), q) / std::pow(4.0, q));
    if (pe == 1.0) return 0.0;
    return (po - pe) / (1.0 - pe);
}

}  // namespace

TEST_CASE("exact accuracy of the constant majority predictor on the published split") {
    const auto gold = published_gold();
    const std::vector<Label> constant(gold.size(), Label{1});
    CHECK(exact_accuracy(constant, gold).value == doctest::Approx(139.0 / 253.0).epsilon(1e-12));
    CHECK(majority_baseline(MetricId::A1, gold).value ==
          doctest::Approx(0.549407).epsilon(1e-5));
}

TEST_CASE("perfect predictions score 1 on A1, A2, A3, A5") {
    const auto gold = published_gold();
    for (MetricId m : {MetricId::A1, MetricId::A2, MetricId::A3, MetricId::A5})
        CHECK(score_metric(m, gold, gold).value == doctest::Approx(1.0));
    CHECK(weighted_kappa(gold, gold).value == doctest::Approx(1.0));
}

TEST_CASE("macro F1 counts unpredicted gold classes as zero and skips absent ones") {
    // gold has classes {0, +1}; predictions never emit +1
    std::vector<Label> gold = {Label{0}, Label{0}, Label{1}, Label{1}};
    std::vector<Label> pred = {Label{0}, Label{0}, Label{0}, Label{0}};
    // F1(0) = 2*2/(2+4) = 2/3, F1(+1) = 0, mean over the 2 gold classes
    CHECK(macro_f1(pred, gold).value == doctest::Approx((2.0 / 3.0) / 2.0));

    rng::Stream s(7, 99, 0);
    for (int t = 0; t < 50; ++t) {
        const auto g = random_labels(60, s);
        const auto p = random_labels(60, s);
        CHECK(macro_f1(p, g).value == doctest::Approx(oracle_macro_f1(p, g)).epsilon(1e-12));
    }
}

TEST_CASE("within-one accuracy counts distance <= 1") {
    std::vector<Label> gold = {Label{-2}, Label{0}, Label{2}, Label{1}};
    std::vector<Label> pred = {Label{-1}, Label{2}, Label{1}, Label{-1}};
    CHECK(within_one_accuracy(pred, gold).value == doctest::Approx(0.5));
}

TEST_CASE("weighted kappa matches the independent agreement-weight oracle") {
    rng::Stream s(11, 98, 0);
    for (int t = 0; t < 50; ++t) {
        const auto g = random_labels(80, s);
        const auto p = random_labels(80, s);
        CHECK(weighted_kappa(p, g, KappaWeighting::Quadratic).value ==
              doctest::Approx(oracle_kappa(p, g, 2)).epsilon(1e-10));
        CHECK(weighted_kappa(p, g, KappaWeighting::Linear).value ==
              doctest::Approx(oracle_kappa(p, g, 1)).epsilon(1e-10));
    }
}

TEST_CASE("constant predictor has kappa 0; identical point masses score 0") {
    const auto gold = published_gold();
    const std::vector<Label> constant(gold.size(), Label{1});
    CHECK(weighted_kappa(constant, gold).value == doctest::Approx(0.0));
    const std::vector<Label> mass(10, Label{0});
    CHECK(weighted_kappa(mass, mass).value == doctest::Approx(0.0));
}

TEST_CASE("worst-class accuracy is the minimum gold-supported recall") {
    std::vector<Label> gold = {Label{0}, Label{0}, Label{1}, Label{1}, Label{1}, Label{-2}};
    std::vector<Label> pred = {Label{0}, Label{1}, Label{1}, Label{1}, Label{0}, Label{-2}};
    // recalls: 0 -> 1/2, +1 -> 2/3, -2 -> 1
    const MetricScore s = worst_class_accuracy(pred, gold);
    CHECK(s.value == doctest::Approx(0.5));
    CHECK(s.support_note.find("0") != std::string::npos);

    const std::vector<Label> constant(gold.size(), Label{1});
    CHECK(worst_class_accuracy(constant, gold).value == doctest::Approx(0.0));
}

TEST_CASE("majority class ties resolve toward the higher label") {
    std::vector<Label> gold = {Label{0}, Label{0}, Label{1}, Label{1}};
    CHECK(majority_class(gold).value == 1);
}

TEST_CASE("length mismatches and empties are rejected") {
    std::vector<Label> a = {Label{0}};
    std::vector<Label> b = {Label{0}, Label{1}};
    CHECK_THROWS_AS(exact_accuracy(a, b), LengthMismatch);
    CHECK_THROWS_AS(macro_f1({}, {}), LengthMismatch);
}

TEST_CASE("Wilson interval matches frozen reference values at s=142, n=253") {
    const IntervalEstimate w = binomial_interval(142, 253, 0.95, IntervalMethod::Wilson);
    CHECK(w.lower == doctest::Approx(0.499654).epsilon(5e-5));
    CHECK(w.upper == doctest::Approx(0.621043).epsilon(5e-5));
    CHECK(w.point == doctest::Approx(142.0 / 253.0));
}

TEST_CASE("Clopper-Pearson matches frozen reference values and edge cases") {
    const IntervalEstimate cp =
        binomial_interval(142, 253, 0.95, IntervalMethod::ClopperPearson);
    CHECK(cp.lower == doctest::Approx(0.497727).epsilon(5e-5));
    CHECK(cp.upper == doctest::Approx(0.623350).epsilon(5e-5));

    const IntervalEstimate zero = binomial_interval(0, 20, 0.95, IntervalMethod::ClopperPearson);
    CHECK(zero.lower == doctest::Approx(0.0));
    CHECK(zero.upper == doctest::Approx(1.0 - std::pow(0.025, 1.0 / 20.0)).epsilon(1e-6));
    const IntervalEstimate full = binomial_interval(20, 20, 0.95, IntervalMethod::ClopperPearson);
    CHECK(full.upper == doctest::Approx(1.0));
    CHECK(full.lower == doctest::Approx(std::pow(0.025, 1.0 / 20.0)).epsilon(1e-6));
}

TEST_CASE("interval preconditions") {
    CHECK_THROWS_AS(binomial_interval(5, 4, 0.95, IntervalMethod::Wilson), InvalidCount);
    CHECK_THROWS_AS(binomial_interval(1, 4, 1.5, IntervalMethod::Wilson), InvalidCount);
}

TEST_CASE("McNemar MDE solves the two-sided power equation") {
    // Frozen fixed-point values at n=253, alpha=0.05, power=0.80.
    CHECK(mcnemar_mde(253, 0.20, 0.05, 0.80) == doctest::Approx(0.078403).epsilon(1e-4));
    CHECK(mcnemar_mde(253, 0.30, 0.05, 0.80) == doctest::Approx(0.096024).epsilon(1e-4));
    // MDE grows with the discordant rate and shrinks with n.
    CHECK(mcnemar_mde(253, 0.30, 0.05, 0.80) > mcnemar_mde(253, 0.20, 0.05, 0.80));
    CHECK(mcnemar_mde(1000, 0.20, 0.05, 0.80) < mcnemar_mde(253, 0.20, 0.05, 0.80));
    CHECK_THROWS_AS(mcnemar_mde(2, 0.2, 0.05, 0.99), InfeasibleDesign);
}
