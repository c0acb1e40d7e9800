#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tw {

enum class Element : int { C = 0, O = 1 };

inline const char* element_symbol(Element e) { return e == Element::C ? "C" : "O"; }

struct Atom {
    Element element = Element::C;
    int index = 0;

    // One-hot over {C, O} (Element one-hot width is fixed at 2).
    std::array<double, 2> one_hot() const {
        std::array<double, 2> v{0.0, 0.0};
        v[static_cast<int>(element)] = 1.0;
        return v;
    }
};

struct Bond {
    int i = 0;
    int j = 0;
    int order = 1;            // 1..4, 4 = aromatic
    bool conjugated = false;
    bool ringed = false;

    // Edge feature vector: order one-hot (4) + conjugated + ringed.
    std::array<double, 6> features() const {
        std::array<double, 6> v{};
        v[order - 1] = 1.0;
        v[4] = conjugated ? 1.0 : 0.0;
        v[5] = ringed ? 1.0 : 0.0;
        return v;
    }
};

// Four consecutively bonded atoms; the rotation axis is the b2-b3 bond.
struct TorsionQuad {
    int b1 = 0, b2 = 0, b3 = 0, b4 = 0;
    bool operator==(const TorsionQuad&) const = default;
};

struct MoleculeGraph {
    std::string name;
    std::vector<Atom> atoms;
    std::vector<Bond> bonds;
    std::vector<TorsionQuad> torsions;
    std::string generator;    // provenance: "smiles", "branched-alkane", ...
    std::uint64_t seed = 0;

    int atom_count() const { return static_cast<int>(atoms.size()); }
    int torsion_count() const { return static_cast<int>(torsions.size()); }
    std::vector<std::vector<int>> adjacency() const;
};

// Parses the acyclic-alkane SMILES subset: tokens C, '(', ')'.
MoleculeGraph parse_smiles(const std::string& text, const std::string& name = "");

// One quad per bond whose both endpoints have >= 2 heavy neighbors, with
// b1/b4 the lowest-index neighbor on each side; sorted by (b2, b3).
std::vector<TorsionQuad> enumerate_torsions(const MoleculeGraph& g);

// Random branched alkane: grow from one carbon, attaching each new carbon to
// a uniformly chosen open-valence atom (SplitMix64 stream, recorded in meta).
MoleculeGraph generate_branched_alkane(std::uint64_t seed, int n_atoms);

// Chain of t+3 carbons with a methyl branch on carbon 2; molecule t is a
// subgraph of molecule t+1 and has exactly t torsions.
MoleculeGraph t_branched_alkane(int t);

std::string molecule_to_json(const MoleculeGraph& g);
MoleculeGraph molecule_from_json(const std::string& json_text);

}  // namespace tw
