#pragma once

// Clustered paired bootstrap, sign-flip randomization with Phipson-Smyth
// counting, and multiplicity control. Replicate-level randomness comes from a
// counter-based stream: replicate r draws from a generator keyed by
// (seed, stream_id, r), so results are independent of execution schedule.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "ordaudit/errors.hpp"
#include "ordaudit/metrics.hpp"
#include "ordaudit/stats.hpp"

namespace ordaudit {

enum class ResampleScheme { ClusteredItemBootstrap, SignFlipRandomization, Permutation };

struct ResamplePlan {
    std::size_t B = 2000;
    std::uint64_t seed = 42;
    ResampleScheme scheme = ResampleScheme::ClusteredItemBootstrap;
    double confidence = 0.95;

    void check() const {
        if (B < 1) throw ConfigError("resample plan needs B >= 1");
    }
};

struct TestResult {
    double statistic = 0.0;
    double p_two_sided = 1.0;
    std::size_t B = 0;
    std::string method_note;
};

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic per-replicate stream; portable across platforms because no
// standard-library distribution is involved.
class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t replicate) {
        state_ = seed;
        (void)splitmix64(state_);
        state_ ^= 0x517cc1b727220a95ull * (stream_id + 1);
        (void)splitmix64(state_);
        state_ ^= 0x2545f4914f6cdd1dull * (replicate + 1);
        (void)splitmix64(state_);
    }

    std::uint64_t next() { return splitmix64(state_); }

    // Uniform integer in [0, n) by rejection-free multiply-shift.
    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    bool coin() { return (next() & 1ull) != 0; }

    double uniform01() { return (next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

}  // namespace rng

// Stable stream ids so distinct analyses never share a random stream.
namespace stream_id {
inline constexpr std::uint64_t kBootstrap = 1;
inline constexpr std::uint64_t kSignFlip = 2;
inline constexpr std::uint64_t kPermutationT = 3;
inline constexpr std::uint64_t kSynthGold = 4;
inline constexpr std::uint64_t kSynthModels = 5;
}  // namespace stream_id

// The index multiset for bootstrap replicate r; the same multiset must be
// applied to every model/policy/metric the statistic touches.
inline std::vector<std::size_t> bootstrap_indices(std::size_t n_items, std::uint64_t seed,
                                                  std::size_t replicate) {
    rng::Stream s(seed, stream_id::kBootstrap, replicate);
    std::vector<std::size_t> idx(n_items);
    for (auto& i : idx) i = s.below(n_items);
    return idx;
}

struct BootstrapResult {
    // replicates[k][r] = value of output k on replicate r.
    std::vector<std::vector<double>> replicates;
    std::vector<IntervalEstimate> intervals;  // percentile, one per output
};

// statistic maps an item-index multiset to one or more values; all values in
// one replicate see the same multiset, which is what preserves pairing.
inline BootstrapResult clustered_bootstrap(
    const std::function<std::vector<double>(const std::vector<std::size_t>&)>& statistic,
    std::size_t n_items, const ResamplePlan& plan) {
    plan.check();
    if (plan.scheme != ResampleScheme::ClusteredItemBootstrap)
        throw ConfigError("clustered_bootstrap requires the clustered-item-bootstrap scheme");

    std::vector<std::size_t> identity(n_items);
    std::iota(identity.begin(), identity.end(), 0);
    const std::size_t n_outputs = statistic(identity).size();

    BootstrapResult res;
    res.replicates.assign(n_outputs, std::vector<double>(plan.B));
    for (std::size_t r = 0; r < plan.B; ++r) {
        const auto idx = bootstrap_indices(n_items, plan.seed, r);
        const auto vals = statistic(idx);
        for (std::size_t k = 0; k < n_outputs; ++k) res.replicates[k][r] = vals[k];
    }
    const auto point = statistic(identity);
    const double alpha = 1.0 - plan.confidence;
    for (std::size_t k = 0; k < n_outputs; ++k) {
        IntervalEstimate est;
        est.point = point[k];
        est.lower = stats::quantile(res.replicates[k], alpha / 2.0);
        est.upper = stats::quantile(res.replicates[k], 1.0 - alpha / 2.0);
        est.method = IntervalMethod::PercentileBootstrap;
        est.confidence = plan.confidence;
        res.intervals.push_back(est);
    }
    return res;
}

struct PairedDeltaResult {
    double delta = 0.0;
    IntervalEstimate ci;
    TestResult test;
};

// delta = mean(a) - mean(b); CI and two-sided bootstrap p from the clustered
// bootstrap of the paired per-item difference.
inline PairedDeltaResult paired_delta_test(const std::vector<int>& correct_a,
                                           const std::vector<int>& correct_b,
                                           const ResamplePlan& plan) {
    if (correct_a.size() != correct_b.size())
        throw LengthMismatch("paired vectors differ in length");
    if (correct_a.empty()) throw LengthMismatch("paired test on empty vectors");
    std::vector<double> d(correct_a.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = static_cast<double>(correct_a[i] - correct_b[i]);

    auto stat = [&d](const std::vector<std::size_t>& idx) {
        double s = 0.0;
        for (std::size_t i : idx) s += d[i];
        return std::vector<double>{s / static_cast<double>(idx.size())};
    };
    const auto boot = clustered_bootstrap(stat, d.size(), plan);

    PairedDeltaResult res;
    res.delta = stats::mean(d);
    res.ci = boot.intervals[0];

    std::size_t le = 0, ge = 0;
    for (double v : boot.replicates[0]) {
        if (v <= 0.0) ++le;
        if (v >= 0.0) ++ge;
    }
    const double B = static_cast<double>(plan.B);
    double p = 2.0 * std::min(le / B, ge / B);
    p = std::min(1.0, std::max(p, 1.0 / (B + 1.0)));  // clip to (0, 1]
    res.test.statistic = res.delta;
    res.test.p_two_sided = p;
    res.test.B = plan.B;
    res.test.method_note = "two-sided clustered-bootstrap p = 2*min(F(0), 1-F(0))";
    return res;
}

// Monte-Carlo sign-flip randomization on a {-1,0,1} difference vector with
// Phipson-Smyth counting: p = (r + 1) / (B + 1), never zero.
inline TestResult signflip_randomization(const std::vector<int>& d, const ResamplePlan& plan) {
    plan.check();
    if (plan.scheme != ResampleScheme::SignFlipRandomization)
        throw ConfigError("signflip_randomization requires the sign-flip scheme");
    std::vector<int> nonzero;
    long long observed_sum = 0;
    for (int v : d) {
        if (v != 0) nonzero.push_back(v);
        observed_sum += v;
    }
    TestResult res;
    res.B = plan.B;
    res.statistic = static_cast<double>(std::llabs(observed_sum));
    if (nonzero.empty()) {
        res.p_two_sided = 1.0;
        res.method_note = "no discordant items; test vacuous";
        return res;
    }
    const long long observed = std::llabs(observed_sum);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < plan.B; ++r) {
        rng::Stream s(plan.seed, stream_id::kSignFlip, r);
        long long sum = 0;
        for (int v : nonzero) sum += s.coin() ? v : -v;
        if (std::llabs(sum) >= observed) ++hits;
    }
    res.p_two_sided = static_cast<double>(hits + 1) / static_cast<double>(plan.B + 1);
    res.method_note = "sign-flip randomization, Phipson-Smyth p = (r+1)/(B+1)";
    return res;
}

struct CorrectionResult {
    std::vector<bool> reject;
    std::vector<double> thresholds;  // per-test adjusted threshold, input order
};

// Step-down Holm-Bonferroni at family-wise level alpha.
inline CorrectionResult holm_correction(const std::vector<double>& p_values, double alpha) {
    const std::size_t m = p_values.size();
    CorrectionResult res;
    res.reject.assign(m, false);
    res.thresholds.assign(m, 0.0);
    if (m == 0) return res;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    bool stopped = false;
    for (std::size_t rank = 0; rank < m; ++rank) {
        const std::size_t i = order[rank];
        const double thr = alpha / static_cast<double>(m - rank);
        res.thresholds[i] = thr;
        if (!stopped && p_values[i] <= thr)
            res.reject[i] = true;
        else
            stopped = true;
    }
    return res;
}

// Step-up Benjamini-Hochberg at FDR level q.
inline std::vector<bool> bh_fdr(const std::vector<double>& p_values, double q) {
    const std::size_t m = p_values.size();
    std::vector<bool> reject(m, false);
    if (m == 0) return reject;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::size_t k = 0;  // largest rank (1-based) with p <= q * rank / m
    for (std::size_t rank = 1; rank <= m; ++rank)
        if (p_values[order[rank - 1]] <= q * static_cast<double>(rank) / static_cast<double>(m))
            k = rank;
    for (std::size_t rank = 0; rank < k; ++rank) reject[order[rank]] = true;
    return reject;
}

}  // namespace ordaudit
