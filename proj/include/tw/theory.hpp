#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tw/rng.hpp"

namespace tw {

using PolicyVec = std::vector<int>;

// Number of positions where the two strings differ.
int hamming(const PolicyVec& a, const PolicyVec& b);

// ---------------------------------------------------------------------------
// coupon collector
// ---------------------------------------------------------------------------

struct CouponCollectorResult {
    std::vector<double> draws;       // per trial
    double mean = 0.0;
    double exact_mean = 0.0;         // N * H_N
    double quantile = 0.0;           // empirical (1-delta) quantile
    double reference_bound = 0.0;    // 3 * N * ln^2(N/delta)
    double calibrated_c = 0.0;       // quantile / (N * ln^2(N/delta))
    bool bound_holds = false;
};

// Uniform draws until all N options are seen, repeated over `trials`.
CouponCollectorResult coupon_collector_sim(int n, double delta, int trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// deterministic-MDP curriculum learner (Theorem-1 procedure)
// ---------------------------------------------------------------------------

struct CurriculumTask {
    int horizon = 1;
    std::function<double(const PolicyVec&)> evaluate;  // deterministic episode return
    PolicyVec optimal;                                 // unique optimum (escape assertion)
};

// Enumerates the marginal policy space of round `t` given the policies fixed
// in earlier rounds.
using MarginalSpaceFn =
    std::function<std::vector<PolicyVec>(int round, const std::vector<PolicyVec>& chosen)>;

struct Theorem1Result {
    std::vector<long long> round_episodes;  // coupon-collector draws per round
    std::vector<long long> round_steps;     // draws * horizon
    long long total_steps = 0;
    std::vector<PolicyVec> found;           // best policy per round
    double bound = 0.0;                     // sum K * |marg| * ln^2(T*|marg|/delta)
};

// Random search of each round's marginal space until every member has been
// drawn at least once; re-draws cost full episodes, matching the coupon
// collector accounting. Throws OptimumEscapedSpace if a round's marginal
// space does not contain the task's optimum.
Theorem1Result theorem1_learner(const std::vector<CurriculumTask>& tasks,
                                const MarginalSpaceFn& marginal_space,
                                const std::vector<int>& curriculum, double delta,
                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// combination lock
// ---------------------------------------------------------------------------

// Chain MDP: states 1..t, actions {-1 stay, +1 advance}; reward 1 only for
// advancing from the final state; horizon t.
struct CombinationLock {
    int t = 1;
    double episode(const PolicyVec& action_per_state) const;
    CurriculumTask task() const;
};

// Joint policy space with shared optimal actions on common states: round t's
// marginal space extends the previous choice by one state (2 candidates).
std::vector<PolicyVec> lock_marginal_space(int round, const std::vector<PolicyVec>& chosen);

struct FlatSearchResult {
    long long episodes = 0;
    long long steps = 0;
};

// Uniform random search over the full policy space of lock T until the
// optimum is drawn.
FlatSearchResult flat_lock_learner(int t, std::uint64_t seed);

// ---------------------------------------------------------------------------
// conformer bandit curriculum (Hamming-ball version space)
// ---------------------------------------------------------------------------

struct HammingBallSpace {
    PolicyVec center;  // length t-1 (empty for the first stage)
    int radius = 0;
    int alphabet = 6;

    long long size() const;  // sum_{j<=radius} C(t-1,j) (alphabet-1)^j * alphabet
    std::vector<PolicyVec> enumerate() const;  // strings of length center.size()+1
};

struct BanditStage {
    int t = 0;
    long long samples = 0;
    int phi_used = 0;
    int phi_hat = -1;        // d_H(a*_t[1..t-1], a*_{t-1}); -1 for stage 1
    bool found_optimum = false;
    PolicyVec best;
};

struct BanditCurriculumResult {
    std::vector<BanditStage> stages;
    long long total_samples = 0;
};

// Stage t exhaustively evaluates (in seeded random order) the Hamming ball of
// radius phi(t) around the previous stage's best, extended by a free final
// coordinate. `oracle_actions[t-1]` is the true bucket-space optimum of task
// t, used for the empirical phi-hat and the found-optimum flag.
BanditCurriculumResult bandit_curriculum(
    int max_t, const std::function<int(int)>& phi,
    const std::vector<PolicyVec>& oracle_actions,
    const std::function<double(int t, const PolicyVec&)>& reward, std::uint64_t seed);

// Least-squares slope of ln(y) against ln(x).
double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace tw
