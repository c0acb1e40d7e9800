#include <doctest.h>

#include <cmath>

#include "tw/chem.hpp"
#include "tw/errors.hpp"
#include "tw/geometry.hpp"
#include "tw/io_util.hpp"
#include "tw/rng.hpp"

using namespace tw;

namespace {

constexpr double kPi = 3.14159265358979323846;

double dist(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

double bond_angle(const Vec3& a, const Vec3& center, const Vec3& b) {
    const Vec3 u = (a - center).normalized();
    const Vec3 v = (b - center).normalized();
    return std::acos(std::clamp(u.dot(v), -1.0, 1.0));
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("butane anti and syn distances") {
    const MoleculeGraph butane = parse_smiles("CCCC");
    const Coordinates anti = build_coordinates(butane, {kPi});

    // closed form for an ideal zigzag: |a+b+c|^2 = L^2 * 19/3 with successive
    // displacement dot products L^2/3 (tetrahedral) and a.c = L^2 at anti
    const double expected = kBondCC * std::sqrt(19.0 / 3.0);
    CHECK(dist(anti[0], anti[3]) == doctest::Approx(expected).epsilon(1e-9));

    const Coordinates syn = build_coordinates(butane, {0.0});
    CHECK(dist(syn[0], syn[3]) < dist(anti[0], anti[3]));
}

TEST_CASE("build is deterministic") {
    const MoleculeGraph g = parse_smiles("CC(C)CCC");
    TorsionVector theta;
    SplitMix64 rng(5);
    for (int i = 0; i < g.torsion_count(); ++i) theta.push_back(rng.next_double() * kTwoPi);
    const Coordinates a = build_coordinates(g, theta);
    const Coordinates b = build_coordinates(g, theta);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
        CHECK(a[i].z == b[i].z);
    }
}

TEST_CASE("dihedral build/measure round trip") {
    const MoleculeGraph g = parse_smiles("CCCCCC");
    SplitMix64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        TorsionVector theta;
        for (int i = 0; i < g.torsion_count(); ++i) theta.push_back(rng.next_double() * kTwoPi);
        const Coordinates c = build_coordinates(g, theta);
        for (int i = 0; i < g.torsion_count(); ++i) {
            double measured = measure_dihedral(c, g, i);
            double diff = std::abs(measured - theta[i]);
            diff = std::min(diff, kTwoPi - diff);
            CHECK(diff < 1e-9);
        }
    }
}

TEST_CASE("set_dihedral semantics") {
    const MoleculeGraph butane = parse_smiles("CCCC");
    const Coordinates c = build_coordinates(butane, {1.0});

    SUBCASE("setting the current angle is the identity") {
        const Coordinates same = set_dihedral(c, butane, 0, 1.0);
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(dist(c[i], same[i]) < 1e-12);
    }
    SUBCASE("0 and 2*pi coincide") {
        const Coordinates zero = set_dihedral(c, butane, 0, 0.0);
        const Coordinates full = set_dihedral(c, butane, 0, kTwoPi);
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(dist(zero[i], full[i]) < 1e-9);
    }
    SUBCASE("absolute-angle semantics compose") {
        const Coordinates via = set_dihedral(set_dihedral(c, butane, 0, 2.0), butane, 0, 0.5);
        const Coordinates direct = set_dihedral(c, butane, 0, 0.5);
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(dist(via[i], direct[i]) < 1e-9);
    }
    SUBCASE("only the b4 side moves") {
        const Coordinates moved = set_dihedral(c, butane, 0, 2.5);
        CHECK(dist(c[0], moved[0]) < 1e-12);
        CHECK(dist(c[1], moved[1]) < 1e-12);
        CHECK(dist(c[2], moved[2]) < 1e-12);
        CHECK(dist(c[3], moved[3]) > 1e-6);
        CHECK(measure_dihedral(moved, butane, 0) == doctest::Approx(2.5).epsilon(1e-9));
    }
    SUBCASE("round trips at fixed angles") {
        for (double angle : {0.0, kPi / 3.0, 5.0 * kPi / 3.0}) {
            const Coordinates s = set_dihedral(c, butane, 0, angle);
            double diff = std::abs(measure_dihedral(s, butane, 0) - angle);
            diff = std::min(diff, kTwoPi - diff);
            CHECK(diff < 1e-9);
        }
    }
}

TEST_CASE("rigid rotor invariants") {
    const MoleculeGraph g = parse_smiles("CC(C)CC");
    const double tetra = std::acos(-1.0 / 3.0);
    SplitMix64 rng(3);
    const auto adj = g.adjacency();
    for (int rep = 0; rep < 10; ++rep) {
        TorsionVector theta;
        for (int i = 0; i < g.torsion_count(); ++i) theta.push_back(rng.next_double() * kTwoPi);
        const Coordinates c = build_coordinates(g, theta);
        for (const Bond& b : g.bonds) {
            CHECK(dist(c[b.i], c[b.j]) == doctest::Approx(kBondCC).epsilon(1e-9));
        }
        for (int center = 0; center < g.atom_count(); ++center) {
            for (std::size_t a = 0; a < adj[center].size(); ++a) {
                for (std::size_t b = a + 1; b < adj[center].size(); ++b) {
                    CHECK(bond_angle(c[adj[center][a]], c[center], c[adj[center][b]]) ==
                          doctest::Approx(tetra).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("measure_dihedral degenerate geometry") {
    const MoleculeGraph butane = parse_smiles("CCCC");
    Coordinates collinear = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 1, 0}};
    CHECK_THROWS_AS(measure_dihedral(collinear, butane, 0), DegenerateGeometry);
}

TEST_CASE("build_coordinates rejects disconnected graphs") {
    MoleculeGraph g;
    g.atoms = {Atom{Element::C, 0}, Atom{Element::C, 1}};
    CHECK_THROWS_AS(build_coordinates(g, {}), DisconnectedGraph);
}

TEST_CASE("normalize_pose") {
    const MoleculeGraph g = parse_smiles("CC(C)CCC");
    SplitMix64 rng(9);
    TorsionVector theta;
    for (int i = 0; i < g.torsion_count(); ++i) theta.push_back(rng.next_double() * kTwoPi);
    const Coordinates c = build_coordinates(g, theta);

    const NormalizedPose once = normalize_pose(c);
    REQUIRE(!once.degenerate);

    SUBCASE("idempotent") {
        const NormalizedPose twice = normalize_pose(once.coords);
        for (std::size_t i = 0; i < c.size(); ++i) {
            CHECK(dist(once.coords[i], twice.coords[i]) < 1e-9);
        }
    }
    SUBCASE("rotation and translation invariant") {
        Coordinates moved = c;
        const Vec3 axis = Vec3{1.0, 2.0, -0.5}.normalized();
        for (Vec3& p : moved) {
            p = rotate_about_axis(p, axis, 1.234) + Vec3{5.0, -3.0, 2.0};
        }
        const NormalizedPose again = normalize_pose(moved);
        for (std::size_t i = 0; i < c.size(); ++i) {
            CHECK(dist(once.coords[i], again.coords[i]) < 1e-9);
        }
    }
    SUBCASE("centroid at origin") {
        Vec3 centroid{};
        for (const Vec3& p : once.coords) centroid += p;
        CHECK(centroid.norm() / static_cast<double>(c.size()) < 1e-12);
    }
    SUBCASE("two-atom cloud centers only and flags degenerate") {
        const NormalizedPose two = normalize_pose({{0, 0, 0}, {2, 0, 0}});
        CHECK(two.degenerate);
        CHECK(two.coords[0].x == doctest::Approx(-1.0));
        CHECK(two.coords[1].x == doctest::Approx(1.0));
    }
}

TEST_CASE("xyz dump") {
    const MoleculeGraph g = parse_smiles("CC");
    const std::string xyz = to_xyz(g, build_coordinates(g, {}), "ethane");
    CHECK(xyz.find("2\nethane\nC ") == 0);
}

}  // TEST_SUITE
