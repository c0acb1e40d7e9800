#include <doctest.h>

#include <algorithm>
#include <set>

#include "tw/chem.hpp"
#include "tw/errors.hpp"

using namespace tw;

TEST_SUITE("chem") {

TEST_CASE("parse_smiles basics") {
    const MoleculeGraph butane = parse_smiles("CCCC");
    CHECK(butane.atom_count() == 4);
    CHECK(butane.bonds.size() == 3);
    CHECK(butane.torsions.size() == 1);
    CHECK(butane.torsions[0] == TorsionQuad{0, 1, 2, 3});

    const MoleculeGraph methane = parse_smiles("C");
    CHECK(methane.atom_count() == 1);
    CHECK(methane.bonds.empty());
    CHECK(methane.torsions.empty());

    const MoleculeGraph neopentane = parse_smiles("CC(C)(C)C");
    CHECK(neopentane.atom_count() == 5);
    CHECK(neopentane.bonds.size() == 4);
    CHECK(neopentane.torsions.empty());  // every bond touches a terminal carbon
}

TEST_CASE("parse_smiles errors") {
    CHECK_THROWS_AS(parse_smiles("CNC"), UnsupportedToken);
    CHECK_THROWS_AS(parse_smiles("C(C"), UnbalancedParens);
    CHECK_THROWS_AS(parse_smiles("CC)C"), UnbalancedParens);
    CHECK_THROWS_AS(parse_smiles("CC(C)(C)(C)C"), ValenceExceeded);
}

TEST_CASE("torsion counting") {
    CHECK(parse_smiles("CCCCCC").torsions.size() == 3);  // n-3 internal bonds
    CHECK(parse_smiles("CC").torsions.empty());

    // reference atoms are the lowest-index heavy neighbors on each side
    const MoleculeGraph hexane = parse_smiles("CCCCCC");
    for (const TorsionQuad& q : hexane.torsions) {
        CHECK(q.b1 < q.b2);
        CHECK(q.b2 < q.b3);
    }
    // sorted by (b2, b3)
    for (std::size_t i = 1; i < hexane.torsions.size(); ++i) {
        CHECK(std::pair(hexane.torsions[i - 1].b2, hexane.torsions[i - 1].b3) <
              std::pair(hexane.torsions[i].b2, hexane.torsions[i].b3));
    }
}

TEST_CASE("t_branched_alkane family") {
    const MoleculeGraph m1 = t_branched_alkane(1);
    CHECK(m1.atom_count() == 5);  // 2-methylbutane
    CHECK(m1.torsions.size() == 1);

    const MoleculeGraph m2 = t_branched_alkane(2);
    CHECK(m2.atom_count() == 6);
    CHECK(m2.torsions.size() == 2);

    for (int t = 1; t <= 20; ++t) {
        const MoleculeGraph cur = t_branched_alkane(t);
        CHECK(cur.torsion_count() == t);
        CHECK(cur.atom_count() == t + 4);
        if (t > 1) {
            // edge set of molecule t-1 is a subset of molecule t's
            const MoleculeGraph prev = t_branched_alkane(t - 1);
            std::set<std::pair<int, int>> edges;
            for (const Bond& b : cur.bonds) edges.insert({b.i, b.j});
            for (const Bond& b : prev.bonds) CHECK(edges.count({b.i, b.j}) == 1);
        }
    }
}

TEST_CASE("branched alkane generator") {
    const MoleculeGraph single = generate_branched_alkane(7, 1);
    CHECK(single.atom_count() == 1);

    const MoleculeGraph a = generate_branched_alkane(42, 14);
    const MoleculeGraph b = generate_branched_alkane(42, 14);
    CHECK(molecule_to_json(a) == molecule_to_json(b));
    CHECK(a.atom_count() == 14);

    for (const Bond& bond : a.bonds) {
        const auto adj = a.adjacency();
        CHECK(adj[bond.i].size() <= 4);
        CHECK(adj[bond.j].size() <= 4);
    }
}

TEST_CASE("molecule json round trip") {
    for (const char* smiles : {"C", "CC", "CCCC", "CC(C)CC", "CC(C)(C)CCC"}) {
        const MoleculeGraph g = parse_smiles(smiles);
        const MoleculeGraph back = molecule_from_json(molecule_to_json(g));
        CHECK(back.atom_count() == g.atom_count());
        CHECK(back.bonds.size() == g.bonds.size());
        CHECK(back.torsions.size() == g.torsions.size());
        CHECK(molecule_to_json(back) == molecule_to_json(g));
    }
}

}  // TEST_SUITE
