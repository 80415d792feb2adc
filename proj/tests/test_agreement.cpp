#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <vector>

#include "ordaudit/agreement.hpp"

using namespace ordaudit;

namespace {

Dataset tiny_dataset(std::vector<int> gold) {
    Dataset ds;
    for (std::size_t i = 0; i < gold.size(); ++i)
        ds.items.push_back({i, "q", "r", Label{gold[i]}});
    return ds;
}

ResamplePlan quick_plan() {
    ResamplePlan plan;
    plan.B = 200;
    plan.seed = 5;
    return plan;
}

}  // namespace

TEST_CASE("identical rubric outputs agree perfectly with no dominant swap") {
    const Dataset ds = tiny_dataset({-2, -1, 0, 1, 2, 1, 0, 1});
    const InferencePolicy a{"R1", "0.0"}, b{"R2", "0.0"};
    PredictionGrid grid({"M"}, {a, b}, ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        grid.set({"M", a, i, ds.items[i].gold, {}, {}});
        grid.set({"M", b, i, ds.items[i].gold, {}, {}});
    }
    const AgreementRow row = pair_agreement(grid, "M", "R1", "R2", "0.0", ds, quick_plan());
    CHECK(row.agree_rate == doctest::Approx(1.0));
    CHECK(row.ci.lower == doctest::Approx(1.0));
    CHECK(row.ci.upper == doctest::Approx(1.0));
    CHECK_FALSE(row.dominant_swap.has_value());
}

TEST_CASE("total disagreement and the dominant transition") {
    const Dataset ds = tiny_dataset({0, 0, 0, 0, 0, 0});
    const InferencePolicy a{"R1", "0.0"}, b{"R2", "0.0"};
    PredictionGrid grid({"M"}, {a, b}, ds.n());
    // R1 says 0 everywhere; R2 says +1 on four items, -1 on two
    const std::vector<int> r2 = {1, 1, 1, 1, -1, -1};
    for (std::size_t i = 0; i < ds.n(); ++i) {
        grid.set({"M", a, i, Label{0}, {}, {}});
        grid.set({"M", b, i, Label{r2[i]}, {}, {}});
    }
    const AgreementRow row = pair_agreement(grid, "M", "R1", "R2", "0.0", ds, quick_plan());
    CHECK(row.agree_rate == doctest::Approx(0.0));
    REQUIRE(row.dominant_swap.has_value());
    CHECK(row.dominant_swap->from.value == 0);
    CHECK(row.dominant_swap->to.value == 1);
    CHECK(row.dominant_swap->count == 4);
    CHECK_FALSE(row.dominant_swap->tied);
    CHECK(row.dominant_swap->str() == "0 -> +1 on 4 items");
}

TEST_CASE("dominant-swap ties break toward smaller source, then target") {
    // two transitions with equal counts: (-1 -> 0) x2 and (0 -> +1) x2
    const std::vector<Label> a = {Label{-1}, Label{-1}, Label{0}, Label{0}};
    const std::vector<Label> b = {Label{0}, Label{0}, Label{1}, Label{1}};
    const auto swap = detail::dominant_swap(a, b);
    REQUIRE(swap.has_value());
    CHECK(swap->from.value == -1);
    CHECK(swap->to.value == 0);
    CHECK(swap->tied);
}

TEST_CASE("agreement is symmetric in the rubric arguments") {
    const Dataset ds = tiny_dataset({0, 1, 1, 2, -1, 0, 1, 1, 0, 2});
    const InferencePolicy a{"R1", "0.0"}, b{"R2", "0.0"};
    PredictionGrid grid({"M"}, {a, b}, ds.n());
    const std::vector<int> pa = {0, 1, 0, 2, -1, 0, 1, 2, 0, 1};
    const std::vector<int> pb = {0, 1, 1, 2, -2, 0, 1, 2, 1, 1};
    for (std::size_t i = 0; i < ds.n(); ++i) {
        grid.set({"M", a, i, Label{pa[i]}, {}, {}});
        grid.set({"M", b, i, Label{pb[i]}, {}, {}});
    }
    const AgreementRow ab = pair_agreement(grid, "M", "R1", "R2", "0.0", ds, quick_plan());
    const AgreementRow ba = pair_agreement(grid, "M", "R2", "R1", "0.0", ds, quick_plan());
    CHECK(ab.agree_rate == doctest::Approx(7.0 / 10.0));
    CHECK(ab.agree_rate == ba.agree_rate);
    CHECK(ab.ci.lower == ba.ci.lower);
    CHECK(ab.ci.upper == ba.ci.upper);
}

TEST_CASE("swap strata pool models and flag thin gold classes") {
    // 10 items: class +1 has six items, class -2 has two, class 0 has two
    const Dataset ds = tiny_dataset({1, 1, 1, 1, 1, 1, -2, -2, 0, 0});
    const InferencePolicy a{"R1", "0.0"}, b{"R2", "0.0"};
    PredictionGrid grid({"M1", "M2", "M3", "M4"}, {a, b}, ds.n());
    for (const auto& m : grid.models())
        for (std::size_t i = 0; i < ds.n(); ++i) {
            grid.set({m, a, i, ds.items[i].gold, {}, {}});
            // every model swaps rubric output on the two -2 items only
            const Label out = ds.items[i].gold.value == -2 ? Label{-1} : ds.items[i].gold;
            grid.set({m, b, i, out, {}, {}});
        }
    const auto strata = swap_stratification(grid, "R1", "R2", "0.0", ds, quick_plan());
    REQUIRE(strata.size() == 3);  // classes absent from gold produce no stratum

    // strata come in label order: -2, 0, +1
    CHECK(strata[0].gold.value == -2);
    CHECK(strata[0].n_pairs == 2 * 4);
    CHECK(strata[0].swaps == 8);
    CHECK(strata[0].rate == doctest::Approx(1.0));
    CHECK_FALSE(strata[0].interpretable);  // two items < 5

    CHECK(strata[1].gold.value == 0);
    CHECK(strata[1].rate == doctest::Approx(0.0));
    CHECK_FALSE(strata[1].interpretable);

    CHECK(strata[2].gold.value == 1);
    CHECK(strata[2].n_pairs == 6 * 4);
    CHECK(strata[2].rate == doctest::Approx(0.0));
    CHECK(strata[2].interpretable);

    // swap total equals the pooled disagreement count across models
    std::size_t total = 0;
    for (const auto& st : strata) total += st.swaps;
    CHECK(total == 8);
}

TEST_CASE("chance agreement baselines") {
    const std::array<double, kNumLabels> point_mass = {0.0, 0.0, 0.0, 1.0, 0.0};
    CHECK(chance_agreement(point_mass, point_mass) == doctest::Approx(1.0));
    const std::array<double, kNumLabels> uniform = {0.2, 0.2, 0.2, 0.2, 0.2};
    CHECK(chance_agreement(uniform, uniform) == doctest::Approx(0.2));
    // reference gold marginal against itself: sum of squared proportions
    const std::array<double, kNumLabels> ref = {2.0 / 253, 11.0 / 253, 72.0 / 253, 139.0 / 253,
                                                29.0 / 253};
    CHECK(chance_agreement(ref, ref) == doctest::Approx(0.397928).epsilon(1e-5));
    // disjoint marginals never agree by chance
    const std::array<double, kNumLabels> lo = {0.5, 0.5, 0.0, 0.0, 0.0};
    const std::array<double, kNumLabels> hi = {0.0, 0.0, 0.0, 0.5, 0.5};
    CHECK(chance_agreement(lo, hi) == doctest::Approx(0.0));

    const std::array<double, kNumLabels> short_sum = {0.2, 0.2, 0.2, 0.2, 0.1};
    CHECK_THROWS_AS((void)chance_agreement(short_sum, uniform), UnnormalizedMarginal);
    const std::array<double, kNumLabels> negative = {-0.2, 0.4, 0.2, 0.4, 0.2};
    CHECK_THROWS_AS((void)chance_agreement(uniform, negative), UnnormalizedMarginal);
}
