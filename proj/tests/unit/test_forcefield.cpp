#include <doctest.h>

#include <cmath>

#include "tw/chem.hpp"
#include "tw/errors.hpp"
#include "tw/forcefield.hpp"
#include "tw/io_util.hpp"
#include "tw/rng.hpp"

using namespace tw;

namespace {

constexpr double kPi = 3.14159265358979323846;

// central finite differences, h = 1e-5
std::vector<double> fd_gradient(const EnergyModel& m, const TorsionVector& theta) {
    const double h = 1e-5;
    std::vector<double> g(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        TorsionVector plus = theta, minus = theta;
        plus[i] += h;
        minus[i] -= h;
        g[i] = (m.energy(plus).total - m.energy(minus).total) / (2.0 * h);
    }
    return g;
}

double rel_vec_error(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

}  // namespace

TEST_SUITE("forcefield") {

TEST_CASE("parameter tables") {
    const ForceFieldParams ff = ForceFieldParams::defaults();
    const TorsionCoeffs tc = ff.torsion_for(Element::C, Element::C, Element::C, Element::C);
    CHECK(tc.v[0] == doctest::Approx(1.411));
    CHECK(tc.v[1] == doctest::Approx(-0.271));
    CHECK(tc.v[2] == doctest::Approx(3.145));

    const LJPair cc = ff.lj_for(Element::C, Element::C);
    CHECK(cc.epsilon == doctest::Approx(0.066));
    CHECK(cc.sigma == doctest::Approx(3.5));

    // Lorentz-Berthelot combination for the missing C-O entry
    const LJPair co = ff.lj_for(Element::C, Element::O);
    CHECK(co.epsilon == doctest::Approx(std::sqrt(0.066 * 0.17)));
    CHECK(co.sigma == doctest::Approx(0.5 * (3.5 + 3.12)));

    const ForceFieldParams back = ForceFieldParams::from_json(ff.to_json());
    CHECK(back.to_json() == ff.to_json());
    CHECK(back.content_hash() == ff.content_hash());
}

TEST_CASE("empty sums for short molecules") {
    const ForceFieldParams ff = ForceFieldParams::defaults();
    EnergyModel ethane(parse_smiles("CC"), ff);
    const EnergyReport rep = ethane.energy({});
    CHECK(rep.torsional == 0.0);
    CHECK(rep.nonbonded == 0.0);
    CHECK(ethane.nonbonded_pair_count() == 0);

    // butane's longest path is 3 bonds, still below the nonbonded cutoff
    EnergyModel butane(parse_smiles("CCCC"), ff);
    CHECK(butane.nonbonded_pair_count() == 0);
    EnergyModel pentane(parse_smiles("CCCCC"), ff);
    CHECK(pentane.nonbonded_pair_count() == 1);
}

TEST_CASE("butane torsion profile") {
    EnergyModel m(parse_smiles("CCCC"), ForceFieldParams::defaults());
    CHECK(m.energy({kPi}).total < m.energy({0.0}).total);  // anti below syn
    CHECK(m.energy({kPi}).total == doctest::Approx(-0.271).epsilon(1e-12));
    CHECK(m.energy({0.0}).total == doctest::Approx(4.285).epsilon(1e-12));

    SplitMix64 rng(1);
    for (int i = 0; i < 5; ++i) {
        const double theta = rng.next_double() * kTwoPi;
        CHECK(m.energy({theta}).total ==
              doctest::Approx(m.energy({theta + kTwoPi}).total).epsilon(1e-12));
    }

    const EnergyReport rep = m.energy({1.0});
    CHECK(rep.total == doctest::Approx(rep.torsional + rep.nonbonded).epsilon(1e-12));
}

TEST_CASE("steric sentinel") {
    // g+ g- g+ g- traces a closed chair: atom 7 lands on atom 1 exactly
    EnergyModel heptane(parse_smiles("CCCCCCC"), ForceFieldParams::defaults());
    const TorsionVector clash = {kPi / 3, 5 * kPi / 3, kPi / 3, 5 * kPi / 3};
    const EnergyReport rep = heptane.energy(clash);
    CHECK(!rep.finite);
    CHECK(std::isinf(rep.total));
    CHECK_THROWS_AS(heptane.gradient(clash), NonFiniteEnergy);
    CHECK_THROWS_AS(heptane.minimize(clash), NonFiniteEnergy);
}

TEST_CASE("analytic gradient matches finite differences") {
    const ForceFieldParams ff = ForceFieldParams::defaults();
    SplitMix64 rng(17);
    for (const char* smiles : {"CCCC", "CCCCC", "CC(C)CC", "CC(C)CCC", "CCCCCCC"}) {
        EnergyModel m(parse_smiles(smiles), ff);
        int done = 0;
        while (done < 4) {
            TorsionVector theta(m.molecule().torsion_count());
            for (double& t : theta) t = rng.next_double() * kTwoPi;
            if (!m.energy(theta).finite) continue;
            ++done;
            CHECK(rel_vec_error(m.gradient(theta), fd_gradient(m, theta)) < 1e-5);
        }
    }
}

TEST_CASE("gradient of a torsion-free molecule is empty") {
    EnergyModel m(parse_smiles("CC"), ForceFieldParams::defaults());
    CHECK(m.gradient({}).empty());
}

TEST_CASE("minimize") {
    EnergyModel m(parse_smiles("CCCC"), ForceFieldParams::defaults());

    SUBCASE("fixed point at a minimum") {
        const MinimizeResult res = m.minimize({kPi});
        CHECK(res.converged);
        CHECK(res.theta[0] == doctest::Approx(kPi).epsilon(1e-6));
        CHECK(res.iterations == 0);
    }
    SUBCASE("monotone decrease and first-order condition") {
        const MinimizeResult res = m.minimize({0.3});
        CHECK(res.energy.total <= m.energy({0.3}).total);
        CHECK(res.converged);
        const std::vector<double> g = m.gradient(res.theta);
        for (double v : g) CHECK(std::abs(v) <= 1e-6);
    }
    SUBCASE("same basin, same minimizer") {
        const MinimizeResult a = m.minimize({3.0});
        const MinimizeResult b = m.minimize({3.3});
        CHECK(a.theta[0] == doctest::Approx(b.theta[0]).epsilon(1e-4));
        CHECK(a.theta[0] == doctest::Approx(kPi).epsilon(1e-4));
    }
    SUBCASE("angles come back wrapped") {
        EnergyModel hexane(parse_smiles("CCCCCC"), ForceFieldParams::defaults());
        SplitMix64 rng(23);
        TorsionVector theta(3);
        for (double& t : theta) t = rng.next_double() * kTwoPi;
        const MinimizeResult res = hexane.minimize(theta);
        for (double v : res.theta) {
            CHECK(v >= 0.0);
            CHECK(v < kTwoPi);
        }
        CHECK(res.energy.total <= hexane.energy(theta).total);
    }
}

TEST_CASE("energy decrease over random starts") {
    EnergyModel m(parse_smiles("CC(C)CCC"), ForceFieldParams::defaults());
    SplitMix64 rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        TorsionVector theta(m.molecule().torsion_count());
        for (double& t : theta) t = rng.next_double() * kTwoPi;
        if (!m.energy(theta).finite) continue;
        CHECK(m.minimize(theta).energy.total <= m.energy(theta).total + 1e-12);
    }
}

}  // TEST_SUITE
