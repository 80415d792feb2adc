#pragma once

// Pairwise win matrices over scoring policies and the aggregation menu:
// Bradley-Terry maximum likelihood, Borda, Ranked Pairs, Copeland, Condorcet
// analysis, Kendall-tau distances, and the ranking-consistency permutation
// test.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ordaudit/errors.hpp"
#include "ordaudit/grid.hpp"
#include "ordaudit/resample.hpp"
#include "ordaudit/stats.hpp"

namespace ordaudit {

// One (inference policy, metric) pair: the unit a win matrix counts over.
struct ScoringPolicy {
    InferencePolicy policy;
    MetricId metric{};

    friend bool operator==(const ScoringPolicy&, const ScoringPolicy&) = default;
    friend auto operator<=>(const ScoringPolicy&, const ScoringPolicy&) = default;

    std::string str() const { return policy.str() + "/" + metric_name(metric); }
};

class ScoreTable {
  public:
    ScoreTable(std::vector<std::string> models, std::vector<InferencePolicy> policies)
        : models_(std::move(models)), policies_(std::move(policies)) {}

    const std::vector<std::string>& models() const { return models_; }
    const std::vector<InferencePolicy>& policies() const { return policies_; }

    void set(const std::string& model, const InferencePolicy& policy, MetricId metric,
             double score) {
        entries_[key(model, policy, metric)] = score;
    }

    double get(const std::string& model, const InferencePolicy& policy, MetricId metric) const {
        auto it = entries_.find(key(model, policy, metric));
        if (it == entries_.end())
            throw IncompleteTable("score table lacks (" + model + ", " + policy.str() + ", " +
                                  metric_name(metric) + ")");
        return it->second;
    }

    bool has(const std::string& model, const InferencePolicy& policy, MetricId metric) const {
        return entries_.count(key(model, policy, metric)) > 0;
    }

  private:
    using Key = std::tuple<std::string, std::string, std::string, MetricId>;
    static Key key(const std::string& model, const InferencePolicy& p, MetricId m) {
        return {model, p.rubric, p.temperature, m};
    }

    std::vector<std::string> models_;
    std::vector<InferencePolicy> policies_;
    std::map<Key, double> entries_;
};

struct WinMatrix {
    std::vector<std::string> models;
    std::vector<std::vector<double>> wins;  // wins[a][b], a != b; ties count 1/2
    std::size_t n_policies = 0;

    double at(std::size_t a, std::size_t b) const { return wins[a][b]; }
};

// Ordered groups of models; groups encode ties.
using Ranking = std::vector<std::vector<std::string>>;

inline bool ranking_is_strict(const Ranking& r) {
    for (const auto& g : r)
        if (g.size() != 1) return false;
    return true;
}

inline std::vector<std::string> ranking_flat(const Ranking& r) {
    std::vector<std::string> out;
    for (const auto& g : r) out.insert(out.end(), g.begin(), g.end());
    return out;
}

inline std::string ranking_str(const Ranking& r) {
    std::string out;
    for (std::size_t g = 0; g < r.size(); ++g) {
        if (g) out += " > ";
        for (std::size_t i = 0; i < r[g].size(); ++i) {
            if (i) out += " = ";
            out += r[g][i];
        }
    }
    return out;
}

// Descending ranking from per-model scores; near-equal scores (within tol)
// share a group.
inline Ranking ranking_from_scores(const std::vector<std::string>& models,
                                   const std::vector<double>& scores, double tol = 0.0) {
    std::vector<std::size_t> order(models.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    Ranking r;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k > 0 && std::fabs(scores[order[k]] - scores[order[k - 1]]) <= tol)
            r.back().push_back(models[order[k]]);
        else
            r.push_back({models[order[k]]});
    }
    return r;
}

inline std::vector<ScoringPolicy> scoring_policies(const std::vector<InferencePolicy>& policies,
                                                   const std::set<MetricId>& metric_subset) {
    std::vector<ScoringPolicy> out;
    for (const auto& p : policies)
        for (MetricId m : kAllMetrics)
            if (metric_subset.count(m)) out.push_back({p, m});
    return out;
}

// Per scoring-policy, the higher score takes one win; equal scores take half
// each. wins(a,b) + wins(b,a) = n_policies for every pair.
inline WinMatrix win_matrix(const ScoreTable& table, const std::set<MetricId>& metric_subset) {
    if (metric_subset.empty()) throw EmptySubset("win matrix over an empty metric subset");
    const auto& models = table.models();
    const auto sps = scoring_policies(table.policies(), metric_subset);
    WinMatrix w;
    w.models = models;
    w.n_policies = sps.size();
    w.wins.assign(models.size(), std::vector<double>(models.size(), 0.0));
    for (const auto& sp : sps) {
        std::vector<double> scores(models.size());
        for (std::size_t m = 0; m < models.size(); ++m)
            scores[m] = table.get(models[m], sp.policy, sp.metric);
        for (std::size_t a = 0; a < models.size(); ++a)
            for (std::size_t b = a + 1; b < models.size(); ++b) {
                if (scores[a] > scores[b])
                    w.wins[a][b] += 1.0;
                else if (scores[b] > scores[a])
                    w.wins[b][a] += 1.0;
                else {
                    w.wins[a][b] += 0.5;
                    w.wins[b][a] += 0.5;
                }
            }
    }
    return w;
}

struct BradleyTerryResult {
    std::vector<double> theta;  // centred log-strengths, model order
    Ranking ranking;
};

// Maximum-likelihood Bradley-Terry strengths via minorization-maximization,
// relative tolerance 1e-10, at most 10000 iterations. Degenerate matrices
// (a model winning or losing everything) are reported, not regularized.
inline BradleyTerryResult bradley_terry(const WinMatrix& w) {
    const std::size_t m = w.models.size();
    if (m < 2) throw DegenerateComparisons("Bradley-Terry needs at least two models");
    for (std::size_t a = 0; a < m; ++a) {
        double won = 0.0, lost = 0.0;
        for (std::size_t b = 0; b < m; ++b) {
            if (b == a) continue;
            won += w.wins[a][b];
            lost += w.wins[b][a];
        }
        if (won <= 0.0)
            throw DegenerateComparisons("model " + w.models[a] + " loses every comparison");
        if (lost <= 0.0)
            throw DegenerateComparisons("model " + w.models[a] + " wins every comparison");
    }

    std::vector<double> pi(m, 1.0);
    for (int iter = 0; iter < 10000; ++iter) {
        double max_rel = 0.0;
        std::vector<double> next(m);
        for (std::size_t a = 0; a < m; ++a) {
            double won = 0.0, denom = 0.0;
            for (std::size_t b = 0; b < m; ++b) {
                if (b == a) continue;
                won += w.wins[a][b];
                denom += (w.wins[a][b] + w.wins[b][a]) / (pi[a] + pi[b]);
            }
            next[a] = won / denom;
        }
        // normalize to geometric mean 1
        double log_sum = 0.0;
        for (double v : next) log_sum += std::log(v);
        const double scale = std::exp(log_sum / static_cast<double>(m));
        for (auto& v : next) v /= scale;
        for (std::size_t a = 0; a < m; ++a)
            max_rel = std::max(max_rel, std::fabs(next[a] - pi[a]) / pi[a]);
        pi = std::move(next);
        if (max_rel < 1e-10) break;
    }

    BradleyTerryResult res;
    res.theta.resize(m);
    for (std::size_t a = 0; a < m; ++a) res.theta[a] = std::log(pi[a]);
    const double mean_theta = stats::mean(res.theta);
    for (auto& t : res.theta) t -= mean_theta;
    res.ranking = ranking_from_scores(w.models, res.theta, 1e-9);
    return res;
}

// Per scoring-policy positional points (number of models strictly below,
// tied models share the mean of their positional points), summed over the
// subset's scoring policies.
inline Ranking borda(const ScoreTable& table, const std::set<MetricId>& metric_subset) {
    if (metric_subset.empty()) throw EmptySubset("Borda over an empty metric subset");
    const auto& models = table.models();
    const auto sps = scoring_policies(table.policies(), metric_subset);
    std::vector<double> total(models.size(), 0.0);
    for (const auto& sp : sps) {
        std::vector<double> scores(models.size());
        for (std::size_t m = 0; m < models.size(); ++m)
            scores[m] = table.get(models[m], sp.policy, sp.metric);
        for (std::size_t m = 0; m < models.size(); ++m) {
            double below = 0.0, tied = 0.0;
            for (std::size_t o = 0; o < models.size(); ++o) {
                if (o == m) continue;
                if (scores[o] < scores[m]) below += 1.0;
                if (scores[o] == scores[m]) tied += 1.0;
            }
            total[m] += below + tied / 2.0;  // mean of the shared positions
        }
    }
    return ranking_from_scores(models, total, 1e-9);
}

// Tideman Ranked Pairs. Margin ties sort by larger winning-side wins, then
// lexicographic (winner, loser) pair, so output is deterministic.
inline Ranking ranked_pairs(const WinMatrix& w) {
    const std::size_t m = w.models.size();
    struct Edge {
        std::size_t from, to;
        double margin, winner_wins;
    };
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            const double margin = w.wins[a][b] - w.wins[b][a];
            if (margin > 0.0) edges.push_back({a, b, margin, w.wins[a][b]});
        }
    std::sort(edges.begin(), edges.end(), [&](const Edge& x, const Edge& y) {
        if (x.margin != y.margin) return x.margin > y.margin;
        if (x.winner_wins != y.winner_wins) return x.winner_wins > y.winner_wins;
        return std::tie(w.models[x.from], w.models[x.to]) <
               std::tie(w.models[y.from], w.models[y.to]);
    });

    std::vector<std::vector<bool>> locked(m, std::vector<bool>(m, false));
    auto reaches = [&](std::size_t from, std::size_t to) {
        std::vector<bool> seen(m, false);
        std::vector<std::size_t> stack{from};
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            if (cur == to) return true;
            if (seen[cur]) continue;
            seen[cur] = true;
            for (std::size_t nxt = 0; nxt < m; ++nxt)
                if (locked[cur][nxt] && !seen[nxt]) stack.push_back(nxt);
        }
        return false;
    };
    for (const Edge& e : edges)
        if (!reaches(e.to, e.from)) locked[e.from][e.to] = true;

    // Topological order of the locked graph; among available sources pick the
    // lexicographically smallest model for a deterministic output.
    std::vector<std::size_t> indeg(m, 0);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            if (locked[a][b]) indeg[b]++;
    std::vector<bool> emitted(m, false);
    Ranking r;
    for (std::size_t step = 0; step < m; ++step) {
        std::size_t pick = m;
        for (std::size_t a = 0; a < m; ++a) {
            if (emitted[a] || indeg[a] != 0) continue;
            if (pick == m || w.models[a] < w.models[pick]) pick = a;
        }
        emitted[pick] = true;
        r.push_back({w.models[pick]});
        for (std::size_t b = 0; b < m; ++b)
            if (locked[pick][b]) indeg[b]--;
    }
    return r;
}

// Copeland: head-to-head majority wins minus losses over all opponents.
inline Ranking copeland(const WinMatrix& w) {
    const std::size_t m = w.models.size();
    std::vector<double> score(m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            if (w.wins[a][b] > w.wins[b][a])
                score[a] += 1.0;
            else if (w.wins[a][b] < w.wins[b][a])
                score[a] -= 1.0;
        }
    return ranking_from_scores(w.models, score, 0.0);
}

inline std::vector<double> copeland_scores(const WinMatrix& w) {
    const std::size_t m = w.models.size();
    std::vector<double> score(m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            if (w.wins[a][b] > w.wins[b][a]) score[a] += 1.0;
            else if (w.wins[a][b] < w.wins[b][a]) score[a] -= 1.0;
        }
    return score;
}

struct CondorcetResult {
    std::optional<std::string> winner;
    // Each cycle is a model triple (a, b, c) with strict majorities
    // a > b, b > c, c > a.
    std::vector<std::array<std::string, 3>> cycles;
};

inline CondorcetResult condorcet(const WinMatrix& w) {
    const std::size_t m = w.models.size();
    const double half = static_cast<double>(w.n_policies) / 2.0;
    CondorcetResult res;
    for (std::size_t a = 0; a < m; ++a) {
        bool beats_all = true;
        for (std::size_t b = 0; b < m; ++b)
            if (b != a && !(w.wins[a][b] > half)) beats_all = false;
        if (beats_all) {
            res.winner = w.models[a];
            break;
        }
    }
    auto beats = [&](std::size_t a, std::size_t b) { return w.wins[a][b] > half; };
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
            for (std::size_t c = b + 1; c < m; ++c) {
                if (beats(a, b) && beats(b, c) && beats(c, a))
                    res.cycles.push_back({w.models[a], w.models[b], w.models[c]});
                else if (beats(b, a) && beats(a, c) && beats(c, b))
                    res.cycles.push_back({w.models[b], w.models[a], w.models[c]});
            }
    return res;
}

// Normalized Kendall-tau distance in [0, 1]: discordant pairs / C(m, 2); a
// pair tied in one ranking and strictly ordered in the other counts half.
inline double kendall_tau_distance(const Ranking& r1, const Ranking& r2) {
    std::map<std::string, std::size_t> pos1, pos2;
    for (std::size_t g = 0; g < r1.size(); ++g)
        for (const auto& mdl : r1[g]) pos1[mdl] = g;
    for (std::size_t g = 0; g < r2.size(); ++g)
        for (const auto& mdl : r2[g]) pos2[mdl] = g;
    if (pos1.size() != pos2.size())
        throw ModelSetMismatch("rankings cover different model sets");
    std::vector<std::string> models;
    for (const auto& [mdl, _] : pos1) {
        if (!pos2.count(mdl)) throw ModelSetMismatch("model " + mdl + " missing from a ranking");
        models.push_back(mdl);
    }
    const std::size_t m = models.size();
    if (m < 2) return 0.0;
    double discordant = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto c1 = pos1[models[i]] <=> pos1[models[j]];
            const auto c2 = pos2[models[i]] <=> pos2[models[j]];
            if (c1 == 0 && c2 == 0) continue;
            if (c1 == 0 || c2 == 0)
                discordant += 0.5;
            else if ((c1 < 0) != (c2 < 0))
                discordant += 1.0;
        }
    return discordant / (static_cast<double>(m) * (m - 1) / 2.0);
}

enum class PolicyDimension { Rubric, Metric, Temperature };

inline std::string dimension_name(PolicyDimension d) {
    switch (d) {
        case PolicyDimension::Rubric: return "rubric";
        case PolicyDimension::Metric: return "metric";
        case PolicyDimension::Temperature: return "temperature";
    }
    return "?";
}

// Mean Kendall-tau distance over unordered scoring-policy pairs that differ
// only in the named dimension.
inline double dimension_sensitivity(const std::map<ScoringPolicy, Ranking>& rankings,
                                    PolicyDimension dimension) {
    std::vector<const ScoringPolicy*> keys;
    for (const auto& [sp, _] : rankings) keys.push_back(&sp);
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < keys.size(); ++i)
        for (std::size_t j = i + 1; j < keys.size(); ++j) {
            const auto& a = *keys[i];
            const auto& b = *keys[j];
            const bool dr = a.policy.rubric != b.policy.rubric;
            const bool dt = a.policy.temperature != b.policy.temperature;
            const bool dm = a.metric != b.metric;
            const bool eligible = (dimension == PolicyDimension::Rubric && dr && !dt && !dm) ||
                                  (dimension == PolicyDimension::Metric && dm && !dr && !dt) ||
                                  (dimension == PolicyDimension::Temperature && dt && !dr && !dm);
            if (!eligible) continue;
            total += kendall_tau_distance(rankings.at(a), rankings.at(b));
            ++pairs;
        }
    if (pairs == 0)
        throw NoEligiblePairs("no scoring-policy pairs differ only in " +
                              dimension_name(dimension));
    return total / static_cast<double>(pairs);
}

// Win indicators for the ranking-consistency test: share[pair][policy] is the
// first-listed model's win share in {0, 1/2, 1} for the pair's fixed
// orientation.
struct PairPolicyWins {
    std::vector<std::string> models;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (a, b) index pairs, a < b
    std::vector<std::vector<double>> share;                  // share[pair][policy]
};

inline PairPolicyWins pair_policy_wins(const ScoreTable& table,
                                       const std::set<MetricId>& metric_subset) {
    const auto& models = table.models();
    const auto sps = scoring_policies(table.policies(), metric_subset);
    PairPolicyWins out;
    out.models = models;
    for (std::size_t a = 0; a < models.size(); ++a)
        for (std::size_t b = a + 1; b < models.size(); ++b)
            out.pairs.emplace_back(a, b);
    out.share.assign(out.pairs.size(), std::vector<double>(sps.size(), 0.0));
    for (std::size_t s = 0; s < sps.size(); ++s) {
        std::vector<double> scores(models.size());
        for (std::size_t m = 0; m < models.size(); ++m)
            scores[m] = table.get(models[m], sps[s].policy, sps[s].metric);
        for (std::size_t p = 0; p < out.pairs.size(); ++p) {
            const auto [a, b] = out.pairs[p];
            out.share[p][s] = scores[a] > scores[b] ? 1.0 : (scores[a] < scores[b] ? 0.0 : 0.5);
        }
    }
    return out;
}

struct PermutationTResult {
    double t_observed = 0.0;
    double null_mean = 0.0;
    double null_q025 = 0.0;
    double null_q975 = 0.0;
    double p_two_sided = 1.0;
    std::size_t B = 0;
    std::string method_note;
};

namespace detail {

inline WinMatrix win_matrix_from_shares(const PairPolicyWins& w,
                                        const std::vector<std::vector<double>>& share) {
    WinMatrix mat;
    mat.models = w.models;
    mat.n_policies = share.empty() ? 0 : share[0].size();
    mat.wins.assign(w.models.size(), std::vector<double>(w.models.size(), 0.0));
    for (std::size_t p = 0; p < w.pairs.size(); ++p) {
        const auto [a, b] = w.pairs[p];
        for (double s : share[p]) {
            mat.wins[a][b] += s;
            mat.wins[b][a] += 1.0 - s;
        }
    }
    return mat;
}

// T = sum over pairs of the fraction of policies whose outcome inverts the
// Bradley-Terry aggregate order computed from the same shares.
inline double inversion_statistic(const PairPolicyWins& w,
                                  const std::vector<std::vector<double>>& share) {
    const WinMatrix mat = win_matrix_from_shares(w, share);
    const auto bt = bradley_terry(mat);
    std::map<std::string, std::size_t> pos;
    for (std::size_t g = 0; g < bt.ranking.size(); ++g)
        for (const auto& mdl : bt.ranking[g]) pos[mdl] = g;
    double t = 0.0;
    for (std::size_t p = 0; p < w.pairs.size(); ++p) {
        const auto [a, b] = w.pairs[p];
        const bool a_above = pos[w.models[a]] < pos[w.models[b]];
        double inversions = 0.0;
        for (double s : share[p]) inversions += a_above ? (1.0 - s) : s;
        t += inversions / static_cast<double>(share[p].size());
    }
    return t;
}

}  // namespace detail

// Ranking-consistency permutation test. Under the null each pair's win
// indicator is direction-symmetric, so every replicate redraws the
// orientation of each (pair, policy) indicator with probability 1/2 and
// recomputes both the Bradley-Terry reference ranking and T from the
// randomized indicators. Randomizing direction (rather than permuting
// indicators across policies, which leaves every per-pair win total and
// hence T unchanged) is what gives the null distribution nonzero spread.
inline PermutationTResult permutation_T(const PairPolicyWins& w, std::size_t B_perm,
                                        std::uint64_t seed) {
    if (B_perm < 1) throw ConfigError("permutation test needs B >= 1");
    PermutationTResult res;
    res.B = B_perm;
    res.t_observed = detail::inversion_statistic(w, w.share);
    std::vector<double> null_t;
    null_t.reserve(B_perm);
    for (std::size_t r = 0; r < B_perm; ++r) {
        rng::Stream s(seed, stream_id::kPermutationT, r);
        auto share = w.share;
        for (auto& row : share)
            for (auto& v : row)
                if (s.coin()) v = 1.0 - v;
        null_t.push_back(detail::inversion_statistic(w, share));
    }
    res.null_mean = stats::mean(null_t);
    res.null_q025 = stats::quantile(null_t, 0.025);
    res.null_q975 = stats::quantile(null_t, 0.975);
    const double obs_dev = std::fabs(res.t_observed - res.null_mean);
    std::size_t hits = 0;
    for (double t : null_t)
        if (std::fabs(t - res.null_mean) >= obs_dev) ++hits;
    res.p_two_sided = static_cast<double>(hits + 1) / static_cast<double>(B_perm + 1);
    res.method_note =
        "null redraws each (pair, policy) win direction with probability 1/2 and recomputes "
        "the Bradley-Terry reference ranking per replicate; two-sided p by tail symmetry "
        "around the null mean with Phipson-Smyth counting";
    return res;
}

}  // namespace ordaudit
