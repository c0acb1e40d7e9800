#include <doctest.h>

#include <cmath>

#include "tw/errors.hpp"
#include "tw/io_util.hpp"
#include "tw/metrics.hpp"
#include "tw/rng.hpp"

using namespace tw;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_SUITE("metrics") {

TEST_CASE("gibbs measure") {
    GibbsNormalizers norm;
    norm.e0 = 2.0;
    norm.z0 = 4.0;
    norm.tau = 500.0;

    CHECK(gibbs_measure(norm.e0, norm) == doctest::Approx(1.0 / norm.z0).epsilon(1e-15));
    const double shifted = norm.e0 + kBoltzmannKcal * norm.tau * std::log(norm.z0);
    CHECK(gibbs_measure(shifted, norm) ==
          doctest::Approx(1.0 / (norm.z0 * norm.z0)).epsilon(1e-12));
    CHECK(gibbs_measure(std::numeric_limits<double>::infinity(), norm) == 0.0);
}

TEST_CASE("gibbs score accounting") {
    GibbsNormalizers norm;
    norm.z0 = 2.0;
    CHECK(gibbs_score({}) == 0.0);

    ConformerRecord unique;
    unique.energy = norm.e0;
    unique.gibbs = gibbs_measure(unique.energy, norm);
    unique.accepted = true;
    CHECK(gibbs_score({unique}) == doctest::Approx(0.5));

    ConformerRecord pruned = unique;
    pruned.accepted = false;
    CHECK(gibbs_score({unique, pruned}) == doctest::Approx(0.5));  // duplicate contributes 0

    // monotone: adding a unique conformer never decreases the score
    ConformerRecord another = unique;
    another.gibbs = 0.25;
    CHECK(gibbs_score({unique, pruned, another}) >= gibbs_score({unique, pruned}));
}

TEST_CASE("tfd") {
    CHECK(tfd({0.0, 1.0}, {0.0, 1.0}) == 0.0);
    CHECK(tfd({0.0, 0.0}, {kPi, kPi}) == doctest::Approx(1.0));
    CHECK(tfd({0.0, 0.0}, {kPi, 0.0}) == doctest::Approx(0.5));
    CHECK(tfd({}, {}) == 0.0);
    CHECK_THROWS_AS(tfd({0.0}, {0.0, 1.0}), LengthMismatch);

    SUBCASE("weighted") {
        CHECK(tfd({0.0, 0.0}, {kPi, 0.0}, {3.0, 1.0}) == doctest::Approx(0.75));
    }
    SUBCASE("symmetric premetric on random pairs") {
        SplitMix64 rng(7);
        for (int rep = 0; rep < 200; ++rep) {
            TorsionVector a(4), b(4);
            for (double& v : a) v = rng.next_double() * kTwoPi;
            for (double& v : b) v = rng.next_double() * kTwoPi;
            const double ab = tfd(a, b);
            CHECK(ab == tfd(b, a));
            CHECK(ab >= 0.0);
            CHECK(ab <= 1.0);
            CHECK(tfd(a, a) == 0.0);
        }
    }
    SUBCASE("periodicity") {
        CHECK(tfd({0.1}, {0.1 + kTwoPi}) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(tfd({5.5}, {5.5 - kTwoPi}) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("dedup_by_energy") {
    auto rec = [](TorsionVector theta, double e) {
        ConformerRecord r;
        r.theta = std::move(theta);
        r.energy = e;
        r.gibbs = std::exp(-e);
        return r;
    };

    SUBCASE("all mutually distant") {
        auto out = dedup_by_energy({rec({0.0}, 1.0), rec({kPi}, 0.5), rec({kPi / 2}, 2.0)}, 0.1);
        for (const auto& r : out) CHECK(r.accepted);
    }
    SUBCASE("exact duplicates keep the lower insertion index") {
        auto out = dedup_by_energy({rec({1.0}, 3.0), rec({1.0}, 3.0)}, 0.1);
        CHECK(out[0].accepted);
        CHECK(!out[1].accepted);
    }
    SUBCASE("chain case: #2 within m of #1 only") {
        // energies make the sort order 1, 2, 3; tfd(1,2) < m <= tfd(1,3), tfd(2,3)
        auto out = dedup_by_energy(
            {rec({0.0}, 1.0), rec({0.2}, 2.0), rec({kPi}, 3.0)}, 0.10);
        CHECK(out[0].accepted);
        CHECK(!out[1].accepted);  // within m of the accepted lowest-energy record
        CHECK(out[2].accepted);
    }
    SUBCASE("acceptance threshold straddles m") {
        const double m = 0.10;
        auto below = dedup_by_energy({rec({0.0}, 1.0), rec({kPi * (m - 1e-6)}, 2.0)}, m);
        CHECK(!below[1].accepted);
        auto above = dedup_by_energy({rec({0.0}, 1.0), rec({kPi * (m + 1e-6)}, 2.0)}, m);
        CHECK(above[1].accepted);
    }
}

TEST_CASE("correlation matrix") {
    SplitMix64 rng(13);

    SUBCASE("duplicated torsion gives off-diagonal 1") {
        std::vector<TorsionVector> samples;
        for (int i = 0; i < 200; ++i) {
            const double a = rng.next_double() * kTwoPi;
            samples.push_back({a, a});
        }
        const auto rho = correlation_matrix(samples);
        CHECK(rho[0][1] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rho[0][0] == 1.0);
        CHECK(rho[1][1] == 1.0);
    }
    SUBCASE("independent torsions decorrelate") {
        std::vector<TorsionVector> samples;
        for (int i = 0; i < 10000; ++i) {
            samples.push_back({rng.next_double() * kTwoPi, rng.next_double() * kTwoPi});
        }
        const auto rho = correlation_matrix(samples);
        CHECK(std::abs(rho[0][1]) < 0.05);
        CHECK(rho[0][1] == rho[1][0]);
    }
    SUBCASE("constant torsion zeroes its row and column") {
        std::vector<TorsionVector> samples;
        for (int i = 0; i < 50; ++i) samples.push_back({1.0, rng.next_double() * kTwoPi});
        const auto rho = correlation_matrix(samples);
        CHECK(rho[0][0] == 1.0);
        CHECK(rho[0][1] == 0.0);
        CHECK(rho[1][0] == 0.0);
    }
    SUBCASE("invariant to adding 2*pi to one torsion's samples") {
        std::vector<TorsionVector> samples, shifted;
        for (int i = 0; i < 500; ++i) {
            const double a = rng.next_double() * kTwoPi;
            const double b = wrap_angle(0.8 * a + 0.3);
            samples.push_back({a, b});
            shifted.push_back({a, b + kTwoPi});
        }
        const auto r1 = correlation_matrix(samples);
        const auto r2 = correlation_matrix(shifted);
        CHECK(r1[0][1] == doctest::Approx(r2[0][1]).epsilon(1e-12));
    }
    SUBCASE("gap shift handles clusters wrapping the period boundary") {
        // two tight clusters at 0.1 and 2*pi - 0.1: linear correlation of the
        // raw angles would be misleading; after the shift both series are
        // contiguous
        std::vector<TorsionVector> samples;
        for (int i = 0; i < 300; ++i) {
            const double eps = 0.05 * rng.next_double();
            const double a = (i % 2 == 0) ? 0.1 + eps : kTwoPi - 0.1 - eps;
            samples.push_back({a, a});
        }
        const auto rho = correlation_matrix(samples);
        CHECK(rho[0][1] == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("small entries display as zero") {
        // near-independent series with a tiny true correlation
        std::vector<TorsionVector> samples;
        for (int i = 0; i < 20000; ++i) {
            samples.push_back({rng.next_double() * kTwoPi, rng.next_double() * kTwoPi});
        }
        const auto rho = correlation_matrix(samples);
        if (std::abs(rho[0][1]) < 0.01) CHECK(rho[0][1] == 0.0);
    }
}

TEST_CASE("normalizer json round trip") {
    GibbsNormalizers n;
    n.e0 = -3.25;
    n.z0 = 7.5;
    n.tau = 500.0;
    const GibbsNormalizers back = GibbsNormalizers::from_json(n.to_json());
    CHECK(back.e0 == n.e0);
    CHECK(back.z0 == n.z0);
    CHECK(back.tau == n.tau);
    CHECK_THROWS_AS(GibbsNormalizers::from_json("{\"E0\":0,\"Z0\":-1,\"tau\":500}"), ConfigError);
}

}  // TEST_SUITE
