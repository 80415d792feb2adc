#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "ordaudit/resample.hpp"

using namespace ordaudit;

TEST_CASE("bootstrap index multisets are deterministic per (seed, replicate)") {
    const auto a = bootstrap_indices(50, 42, 7);
    const auto b = bootstrap_indices(50, 42, 7);
    CHECK(a == b);
    CHECK(bootstrap_indices(50, 42, 8) != a);
    CHECK(bootstrap_indices(50, 43, 7) != a);
    for (std::size_t i : a) CHECK(i < 50);
}

TEST_CASE("every output of one replicate sees the same index multiset") {
    // Two injected index-recording statistics: any divergence between their
    // recorded multisets would break the pairing contract.
    std::vector<std::vector<std::size_t>> seen_a, seen_b;
    auto statistic = [&](const std::vector<std::size_t>& idx) {
        seen_a.push_back(idx);
        seen_b.push_back(idx);
        double s = 0.0;
        for (std::size_t i : idx) s += static_cast<double>(i);
        return std::vector<double>{s, -s};
    };
    ResamplePlan plan;
    plan.B = 25;
    plan.seed = 9;
    const BootstrapResult res = clustered_bootstrap(statistic, 12, plan);
    CHECK(res.replicates.size() == 2);
    CHECK(seen_a == seen_b);
    for (std::size_t r = 0; r < plan.B; ++r)
        CHECK(res.replicates[0][r] == -res.replicates[1][r]);
    // replaying the replicate index reproduces the recorded multiset
    for (std::size_t r = 0; r < plan.B; ++r)
        CHECK(seen_a[r + 1] == bootstrap_indices(12, plan.seed, r));  // [0] is the point call
}

TEST_CASE("percentile interval brackets the point estimate of a smooth statistic") {
    std::vector<double> x = {0.1, 0.4, 0.35, 0.8, 0.9, 0.2, 0.55, 0.6, 0.7, 0.25,
                             0.45, 0.5, 0.15, 0.65, 0.75, 0.3, 0.85, 0.95, 0.05, 0.4};
    auto statistic = [&](const std::vector<std::size_t>& idx) {
        double s = 0.0;
        for (std::size_t i : idx) s += x[i];
        return std::vector<double>{s / static_cast<double>(idx.size())};
    };
    ResamplePlan plan;
    plan.B = 2000;
    plan.seed = 42;
    const BootstrapResult res = clustered_bootstrap(statistic, x.size(), plan);
    const IntervalEstimate& ci = res.intervals[0];
    CHECK(ci.lower <= ci.point);
    CHECK(ci.point <= ci.upper);
    CHECK(ci.method == IntervalMethod::PercentileBootstrap);
    // mean of replicate means approximates the sample mean
    CHECK(stats::mean(res.replicates[0]) == doctest::Approx(ci.point).epsilon(0.02));
}

TEST_CASE("paired delta test: no difference means p = 1, pairing is respected") {
    std::vector<int> a(40, 1), b(40, 1);
    ResamplePlan plan;
    plan.B = 500;
    plan.seed = 3;
    const PairedDeltaResult same = paired_delta_test(a, b, plan);
    CHECK(same.delta == doctest::Approx(0.0));
    CHECK(same.test.p_two_sided == doctest::Approx(1.0));

    // strong one-sided difference: p clipped at 1/(B+1), never 0
    std::vector<int> wins(40, 1), losses(40, 0);
    const PairedDeltaResult diff = paired_delta_test(wins, losses, plan);
    CHECK(diff.delta == doctest::Approx(1.0));
    CHECK(diff.test.p_two_sided > 0.0);
    CHECK(diff.test.p_two_sided == doctest::Approx(1.0 / (plan.B + 1.0)));
}

TEST_CASE("sign-flip p matches exhaustive enumeration within Monte-Carlo error") {
    rng::Stream gen(123, 77, 0);
    for (int trial = 0; trial < 12; ++trial) {
        std::vector<int> d(30, 0);
        const std::size_t k = 3 + gen.below(8);  // up to 10 nonzero entries
        for (std::size_t i = 0; i < k; ++i) d[gen.below(d.size())] = gen.coin() ? 1 : -1;
        std::vector<int> nonzero;
        long long obs = 0;
        for (int v : d) {
            if (v != 0) nonzero.push_back(v);
            obs += v;
        }
        if (nonzero.empty()) continue;

        // exhaustive 2^k enumeration
        std::size_t hits = 0;
        const std::size_t total = 1ull << nonzero.size();
        for (std::size_t mask = 0; mask < total; ++mask) {
            long long s = 0;
            for (std::size_t i = 0; i < nonzero.size(); ++i)
                s += (mask >> i) & 1 ? nonzero[i] : -nonzero[i];
            if (std::llabs(s) >= std::llabs(obs)) ++hits;
        }
        const double p_exact = static_cast<double>(hits) / static_cast<double>(total);

        ResamplePlan plan;
        plan.B = 20000;
        plan.seed = 1000 + trial;
        plan.scheme = ResampleScheme::SignFlipRandomization;
        const TestResult t = signflip_randomization(d, plan);
        CHECK(t.p_two_sided >= 1.0 / (plan.B + 1.0));
        const double tol =
            3.0 * std::sqrt(p_exact * (1.0 - p_exact) / plan.B) + 2.0 / plan.B;
        CHECK(std::fabs(t.p_two_sided - p_exact) <= tol);
    }
}

TEST_CASE("all-zero difference vector is a vacuous test") {
    ResamplePlan plan;
    plan.B = 100;
    plan.scheme = ResampleScheme::SignFlipRandomization;
    const TestResult t = signflip_randomization(std::vector<int>(10, 0), plan);
    CHECK(t.p_two_sided == doctest::Approx(1.0));
    CHECK(t.method_note.find("vacuous") != std::string::npos);
}

TEST_CASE("Holm step-down: the reference p-vector yields zero rejections") {
    const std::vector<double> p = {0.012, 0.040, 0.080, 0.55, 0.71, 0.76};
    const CorrectionResult res = holm_correction(p, 0.05);
    for (bool r : res.reject) CHECK_FALSE(r);
    CHECK(res.thresholds[0] == doctest::Approx(0.05 / 6.0));
}

TEST_CASE("Holm step-down ladder by hand") {
    // sorted ladder: 0.001<=.05/4, 0.004<=.05/3, 0.005<=.05/2, 0.03<=.05/1 -> all reject
    const CorrectionResult all = holm_correction({0.001, 0.004, 0.03, 0.005}, 0.05);
    for (bool r : all.reject) CHECK(r);
    // 0.03 > .05/2 stops the ladder; 0.04 <= .05/1 but stays retained anyway
    const CorrectionResult stop = holm_correction({0.001, 0.004, 0.03, 0.04}, 0.05);
    CHECK(stop.reject[0]);
    CHECK(stop.reject[1]);
    CHECK_FALSE(stop.reject[2]);
    CHECK_FALSE(stop.reject[3]);
}

TEST_CASE("BH rejections always contain the Holm rejections") {
    rng::Stream gen(5, 55, 0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = 1 + gen.below(40);
        std::vector<double> p(m);
        for (auto& v : p) v = gen.uniform01() * (gen.coin() ? 1.0 : 0.05);
        const CorrectionResult holm = holm_correction(p, 0.05);
        const std::vector<bool> bh = bh_fdr(p, 0.05);
        for (std::size_t i = 0; i < m; ++i)
            if (holm.reject[i]) CHECK(bh[i]);
    }
}

TEST_CASE("rng streams are portable and distinct") {
    rng::Stream a(42, 1, 0), b(42, 1, 0), c(42, 2, 0), d(43, 1, 0);
    const std::uint64_t va = a.next();
    CHECK(va == b.next());
    CHECK(va != c.next());
    CHECK(va != d.next());
    rng::Stream u(7, 3, 9);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform01();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}
