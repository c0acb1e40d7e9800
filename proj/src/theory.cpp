#include "tw/theory.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tw/errors.hpp"
#include "tw/io_util.hpp"

namespace tw {

int hamming(const PolicyVec& a, const PolicyVec& b) {
    if (a.size() != b.size()) throw LengthMismatch("hamming: length mismatch");
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

CouponCollectorResult coupon_collector_sim(int n, double delta, int trials, std::uint64_t seed) {
    if (n < 1 || trials < 1) throw Error("coupon_collector_sim: n and trials must be >= 1");
    CouponCollectorResult result;
    SplitMix64 rng(seed);
    result.draws.reserve(trials);
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<char> seen(n, 0);
        int distinct = 0;
        long long draws = 0;
        while (distinct < n) {
            const auto pick = static_cast<int>(rng.next_below(n));
            ++draws;
            if (!seen[pick]) {
                seen[pick] = 1;
                ++distinct;
            }
        }
        result.draws.push_back(static_cast<double>(draws));
    }

    result.mean = mean_stderr(result.draws).mean;
    double harmonic = 0.0;
    for (int k = 1; k <= n; ++k) harmonic += 1.0 / k;
    result.exact_mean = n * harmonic;
    result.quantile = quantile(result.draws, 1.0 - delta);
    const double log_term = std::log(n / delta);
    result.reference_bound = 3.0 * n * log_term * log_term;
    result.calibrated_c = result.quantile / (n * log_term * log_term);
    result.bound_holds = result.quantile <= result.reference_bound;
    return result;
}

Theorem1Result theorem1_learner(const std::vector<CurriculumTask>& tasks,
                                const MarginalSpaceFn& marginal_space,
                                const std::vector<int>& curriculum, double delta,
                                std::uint64_t seed) {
    if (curriculum.size() != tasks.size()) {
        throw Error("curriculum must be a permutation of the task indices");
    }
    const auto T = static_cast<int>(tasks.size());
    Theorem1Result result;
    SplitMix64 rng(seed);
    std::vector<PolicyVec> chosen;

    for (int round = 0; round < T; ++round) {
        const int task_idx = curriculum[round];
        const CurriculumTask& task = tasks[task_idx];
        const std::vector<PolicyVec> candidates = marginal_space(round, chosen);
        if (candidates.empty()) throw Error("empty marginal space");

        const bool optimum_present =
            std::find(candidates.begin(), candidates.end(), task.optimal) != candidates.end();
        if (!optimum_present) {
            throw OptimumEscapedSpace("optimal policy left the version space at round " +
                                      std::to_string(round + 1));
        }

        // coupon-collect the marginal space; every draw runs one episode
        std::vector<char> evaluated(candidates.size(), 0);
        std::vector<double> values(candidates.size(), 0.0);
        std::size_t distinct = 0;
        long long episodes = 0;
        std::size_t best = 0;
        bool have_best = false;
        while (distinct < candidates.size()) {
            const auto pick = static_cast<std::size_t>(rng.next_below(candidates.size()));
            ++episodes;
            const double value = task.evaluate(candidates[pick]);
            if (!evaluated[pick]) {
                evaluated[pick] = 1;
                values[pick] = value;
                ++distinct;
                if (!have_best || value > values[best]) {  // ties: first found wins
                    best = pick;
                    have_best = true;
                }
            }
        }

        result.round_episodes.push_back(episodes);
        result.round_steps.push_back(episodes * task.horizon);
        result.total_steps += episodes * task.horizon;
        result.found.push_back(candidates[best]);
        chosen.push_back(candidates[best]);

        const double marg = static_cast<double>(candidates.size());
        const double lg = std::log(T * marg / delta);
        result.bound += task.horizon * marg * lg * lg;
    }
    return result;
}

double CombinationLock::episode(const PolicyVec& action_per_state) const {
    if (static_cast<int>(action_per_state.size()) != t) {
        throw LengthMismatch("lock policy must assign an action to every state");
    }
    int state = 1;
    for (int step = 0; step < t; ++step) {
        const int a = action_per_state[state - 1];
        if (a == 1) {
            if (state == t) return 1.0;  // forward transition out of the last state
            ++state;
        }
        // a == -1 stays put, no reward
    }
    return 0.0;
}

CurriculumTask CombinationLock::task() const {
    CurriculumTask task;
    task.horizon = t;
    const CombinationLock lock{t};
    task.evaluate = [lock](const PolicyVec& p) { return lock.episode(p); };
    task.optimal = PolicyVec(t, 1);
    return task;
}

std::vector<PolicyVec> lock_marginal_space(int round, const std::vector<PolicyVec>& chosen) {
    PolicyVec prefix;
    if (round > 0) prefix = chosen.back();  // shared actions on common states
    std::vector<PolicyVec> out;
    for (int a : {-1, +1}) {
        PolicyVec p = prefix;
        p.push_back(a);
        out.push_back(std::move(p));
    }
    return out;
}

FlatSearchResult flat_lock_learner(int t, std::uint64_t seed) {
    const CombinationLock lock{t};
    SplitMix64 rng(seed);
    FlatSearchResult result;
    for (;;) {
        PolicyVec p(t);
        for (int& a : p) a = rng.next_below(2) == 0 ? -1 : +1;
        ++result.episodes;
        if (lock.episode(p) == 1.0) break;
    }
    result.steps = result.episodes * t;
    return result;
}

long long HammingBallSpace::size() const {
    const auto t_minus_1 = static_cast<int>(center.size());
    auto choose = [](int n, int k) {
        long long r = 1;
        for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return r;
    };
    long long total = 0;
    long long alt = 1;  // (alphabet-1)^j
    for (int j = 0; j <= std::min(radius, t_minus_1); ++j) {
        total += choose(t_minus_1, j) * alt;
        alt *= alphabet - 1;
    }
    return total * alphabet;
}

std::vector<PolicyVec> HammingBallSpace::enumerate() const {
    const auto prefix_len = static_cast<int>(center.size());
    std::vector<PolicyVec> prefixes;

    // depth-first over prefix positions, tracking remaining deviation budget
    PolicyVec current(prefix_len, 0);
    std::function<void(int, int)> walk = [&](int pos, int deviations) {
        if (pos == prefix_len) {
            prefixes.push_back(current);
            return;
        }
        for (int symbol = 1; symbol <= alphabet; ++symbol) {
            const int d = deviations + (symbol != center[pos] ? 1 : 0);
            if (d > radius) continue;
            current[pos] = symbol;
            walk(pos + 1, d);
        }
    };
    walk(0, 0);

    std::vector<PolicyVec> out;
    out.reserve(prefixes.size() * alphabet);
    for (const PolicyVec& prefix : prefixes) {
        for (int last = 1; last <= alphabet; ++last) {
            PolicyVec p = prefix;
            p.push_back(last);
            out.push_back(std::move(p));
        }
    }
    return out;
}

BanditCurriculumResult bandit_curriculum(
    int max_t, const std::function<int(int)>& phi, const std::vector<PolicyVec>& oracle_actions,
    const std::function<double(int t, const PolicyVec&)>& reward, std::uint64_t seed) {
    if (static_cast<int>(oracle_actions.size()) < max_t) {
        throw Error("bandit_curriculum needs oracle actions for every stage");
    }
    BanditCurriculumResult result;
    SplitMix64 rng(seed);
    PolicyVec previous_best;

    for (int t = 1; t <= max_t; ++t) {
        HammingBallSpace ball;
        ball.center = previous_best;
        ball.radius = phi(t);
        std::vector<PolicyVec> members = ball.enumerate();
        for (std::size_t i = members.size(); i > 1; --i) {  // seeded exhaustive order
            std::swap(members[i - 1], members[rng.next_below(i)]);
        }

        BanditStage stage;
        stage.t = t;
        stage.phi_used = ball.radius;
        double best_value = -std::numeric_limits<double>::infinity();
        for (const PolicyVec& a : members) {
            ++stage.samples;
            const double v = reward(t, a);
            if (v > best_value) {
                best_value = v;
                stage.best = a;
            }
        }

        const PolicyVec& truth = oracle_actions[t - 1];
        stage.found_optimum = stage.best == truth;
        if (t > 1) {
            const PolicyVec truth_prefix(truth.begin(), truth.end() - 1);
            stage.phi_hat = hamming(truth_prefix, oracle_actions[t - 2]);
        }
        previous_best = stage.best;
        result.total_samples += stage.samples;
        result.stages.push_back(std::move(stage));
    }
    return result;
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw Error("loglog_slope needs >= 2 points");
    const auto n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace tw
