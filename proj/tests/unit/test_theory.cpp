#include <doctest.h>

#include <cmath>
#include <set>

#include "tw/errors.hpp"
#include "tw/io_util.hpp"
#include "tw/theory.hpp"

using namespace tw;

TEST_SUITE("theory") {

TEST_CASE("hamming distance") {
    CHECK(hamming({1, 2, 3}, {1, 2, 3}) == 0);
    CHECK(hamming({1, 2, 3}, {4, 5, 6}) == 3);
    CHECK(hamming({1, 2, 3}, {1, 5, 3}) == 1);
    CHECK(hamming({}, {}) == 0);
    CHECK_THROWS_AS(hamming({1}, {1, 2}), LengthMismatch);
}

TEST_CASE("coupon collector") {
    SUBCASE("n = 1 always takes one draw") {
        const auto res = coupon_collector_sim(1, 0.1, 50, 1);
        for (double d : res.draws) CHECK(d == 1.0);
    }
    SUBCASE("n = 2 empirical mean near the exact 3.0") {
        const auto res = coupon_collector_sim(2, 0.1, 10000, 2);
        CHECK(res.exact_mean == doctest::Approx(3.0));
        CHECK(std::abs(res.mean - 3.0) / 3.0 < 0.05);
    }
    SUBCASE("quantile bound at n = 100") {
        const auto res = coupon_collector_sim(100, 0.1, 1000, 3);
        CHECK(res.bound_holds);
        CHECK(res.quantile <= res.reference_bound);
        CHECK(res.calibrated_c <= 3.0);
        CHECK(res.calibrated_c > 0.0);
    }
}

TEST_CASE("combination lock mechanics") {
    const CombinationLock lock{4};
    CHECK(lock.episode({1, 1, 1, 1}) == 1.0);
    CHECK(lock.episode({1, 1, 1, -1}) == 0.0);
    CHECK(lock.episode({-1, 1, 1, 1}) == 0.0);
    CHECK_THROWS_AS(lock.episode({1, 1}), LengthMismatch);

    // unique optimum over state policies
    int winners = 0;
    for (int mask = 0; mask < 16; ++mask) {
        PolicyVec p(4);
        for (int i = 0; i < 4; ++i) p[i] = (mask >> i) & 1 ? 1 : -1;
        winners += CombinationLock{4}.episode(p) == 1.0;
    }
    CHECK(winners == 1);
}

TEST_CASE("lock marginal spaces have size 2") {
    std::vector<PolicyVec> chosen;
    for (int round = 0; round < 5; ++round) {
        const auto cands = lock_marginal_space(round, chosen);
        CHECK(cands.size() == 2);
        chosen.push_back(cands[1]);  // pretend we picked +1
        CHECK(static_cast<int>(chosen.back().size()) == round + 1);
    }
}

TEST_CASE("theorem1 learner solves the lock exactly") {
    const int T = 5;
    std::vector<CurriculumTask> tasks;
    std::vector<int> curriculum;
    for (int t = 1; t <= T; ++t) {
        tasks.push_back(CombinationLock{t}.task());
        curriculum.push_back(t - 1);
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Theorem1Result res =
            theorem1_learner(tasks, lock_marginal_space, curriculum, 0.1, seed);
        REQUIRE(res.found.size() == T);
        CHECK(res.found.back() == PolicyVec(T, 1));  // exact optimum
        CHECK(res.total_steps > 0);
        CHECK(res.round_episodes.size() == T);
        for (long long e : res.round_episodes) CHECK(e >= 2);  // both candidates seen
    }
}

TEST_CASE("theorem1 learner reports an escaped optimum") {
    // a marginal space that drops the optimal policy at round 1
    std::vector<CurriculumTask> tasks = {CombinationLock{1}.task()};
    const MarginalSpaceFn bad = [](int, const std::vector<PolicyVec>&) {
        return std::vector<PolicyVec>{{-1}};
    };
    CHECK_THROWS_AS(theorem1_learner(tasks, bad, {0}, 0.1, 0), OptimumEscapedSpace);
}

TEST_CASE("flat learner on small locks") {
    SUBCASE("T = 1 is immediate on average") {
        double total = 0.0;
        for (int s = 0; s < 100; ++s) total += flat_lock_learner(1, s).episodes;
        CHECK(total / 100.0 == doctest::Approx(2.0).epsilon(0.5));
    }
    SUBCASE("T = 3 mean episodes near 2^3") {
        double total = 0.0;
        const int trials = 400;
        for (int s = 0; s < trials; ++s) total += flat_lock_learner(3, 1000 + s).episodes;
        const double mean = total / trials;
        CHECK(mean > 4.0);   // order-of-magnitude window around 8
        CHECK(mean < 16.0);
    }
}

TEST_CASE("hamming ball size matches enumeration") {
    for (int t = 1; t <= 8; ++t) {
        for (int radius = 0; radius <= 3; ++radius) {
            HammingBallSpace ball;
            for (int i = 0; i < t - 1; ++i) ball.center.push_back((i % 6) + 1);
            ball.radius = radius;
            const auto members = ball.enumerate();
            CHECK(static_cast<long long>(members.size()) == ball.size());

            // all members satisfy the prefix constraint, and are distinct
            std::set<PolicyVec> unique(members.begin(), members.end());
            CHECK(unique.size() == members.size());
            for (const PolicyVec& m : members) {
                REQUIRE(static_cast<int>(m.size()) == t);
                const PolicyVec prefix(m.begin(), m.end() - 1);
                CHECK(hamming(prefix, ball.center) <= radius);
            }
        }
    }
}

TEST_CASE("bandit curriculum sample counts") {
    // toy deterministic bandit: reward peaks at a fixed target string
    const int T = 4;
    std::vector<PolicyVec> targets;
    for (int t = 1; t <= T; ++t) {
        PolicyVec a(t, 3);
        targets.push_back(a);  // optimum is all-3 at every stage
    }
    const auto reward = [&targets](int t, const PolicyVec& a) {
        return -static_cast<double>(hamming(a, targets[t - 1]));
    };

    SUBCASE("radius 0 stays within |A0| per stage") {
        const auto res = bandit_curriculum(
            T, [](int) { return 0; }, targets, reward, 7);
        long long total = 0;
        for (const auto& st : res.stages) {
            CHECK(st.samples <= 6);
            CHECK(st.found_optimum);
            CHECK(st.phi_hat <= 0);
            total += st.samples;
        }
        CHECK(res.total_samples == total);
        CHECK(res.total_samples <= 6 * T);
    }
    SUBCASE("radius t-1 degenerates to the full space") {
        const auto res = bandit_curriculum(
            T, [](int t) { return t - 1; }, targets, reward, 7);
        for (const auto& st : res.stages) {
            CHECK(st.samples == static_cast<long long>(std::pow(6.0, st.t)));
        }
    }
}

TEST_CASE("loglog slope") {
    // y = x^2 exactly
    std::vector<double> xs = {2, 4, 8, 16}, ys;
    for (double x : xs) ys.push_back(x * x);
    CHECK(loglog_slope(xs, ys) == doctest::Approx(2.0).epsilon(1e-12));
}

}  // TEST_SUITE
