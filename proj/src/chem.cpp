#include "tw/chem.hpp"

#include <algorithm>

#include <json.hpp>

#include "tw/errors.hpp"
#include "tw/rng.hpp"

namespace tw {

namespace {

constexpr int kMaxValence = 4;

void add_bond(MoleculeGraph& g, int i, int j) {
    Bond b;
    b.i = std::min(i, j);
    b.j = std::max(i, j);
    g.bonds.push_back(b);
}

}  // namespace

std::vector<std::vector<int>> MoleculeGraph::adjacency() const {
    std::vector<std::vector<int>> adj(atoms.size());
    for (const Bond& b : bonds) {
        adj[b.i].push_back(b.j);
        adj[b.j].push_back(b.i);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    return adj;
}

MoleculeGraph parse_smiles(const std::string& text, const std::string& name) {
    MoleculeGraph g;
    g.name = name.empty() ? text : name;
    g.generator = "smiles";

    std::vector<int> branch_stack;
    int prev = -1;  // last atom at the current branch level

    for (char c : text) {
        switch (c) {
            case 'C': {
                Atom a;
                a.element = Element::C;
                a.index = g.atom_count();
                g.atoms.push_back(a);
                if (prev >= 0) add_bond(g, prev, a.index);
                prev = a.index;
                break;
            }
            case '(': {
                if (prev < 0) throw UnbalancedParens("branch before any atom");
                branch_stack.push_back(prev);
                break;
            }
            case ')': {
                if (branch_stack.empty()) throw UnbalancedParens("unmatched ')'");
                prev = branch_stack.back();
                branch_stack.pop_back();
                break;
            }
            default:
                throw UnsupportedToken(std::string("unsupported SMILES token '") + c + "'");
        }
    }
    if (!branch_stack.empty()) throw UnbalancedParens("unmatched '('");

    auto adj = g.adjacency();
    for (std::size_t i = 0; i < adj.size(); ++i) {
        if (static_cast<int>(adj[i].size()) > kMaxValence) {
            throw ValenceExceeded("atom " + std::to_string(i) + " has more than 4 neighbors");
        }
    }

    g.torsions = enumerate_torsions(g);
    return g;
}

std::vector<TorsionQuad> enumerate_torsions(const MoleculeGraph& g) {
    auto adj = g.adjacency();
    std::vector<TorsionQuad> quads;
    for (const Bond& bond : g.bonds) {
        const int b2 = std::min(bond.i, bond.j);
        const int b3 = std::max(bond.i, bond.j);
        if (adj[b2].size() < 2 || adj[b3].size() < 2) continue;  // terminal bond

        TorsionQuad q;
        q.b2 = b2;
        q.b3 = b3;
        q.b1 = -1;
        q.b4 = -1;
        for (int n : adj[b2]) {
            if (n != b3) { q.b1 = n; break; }
        }
        for (int n : adj[b3]) {
            if (n != b2) { q.b4 = n; break; }
        }
        quads.push_back(q);
    }
    std::sort(quads.begin(), quads.end(), [](const TorsionQuad& a, const TorsionQuad& b) {
        return std::pair(a.b2, a.b3) < std::pair(b.b2, b.b3);
    });
    return quads;
}

MoleculeGraph generate_branched_alkane(std::uint64_t seed, int n_atoms) {
    MoleculeGraph g;
    g.generator = "branched-alkane";
    g.seed = seed;
    g.name = "alkane_s" + std::to_string(seed) + "_n" + std::to_string(n_atoms);

    SplitMix64 rng(seed);
    std::vector<int> valence;
    g.atoms.push_back(Atom{Element::C, 0});
    valence.push_back(0);

    for (int k = 1; k < n_atoms; ++k) {
        std::vector<int> open;
        for (int i = 0; i < g.atom_count(); ++i) {
            if (valence[i] < kMaxValence) open.push_back(i);
        }
        const int target = open[rng.next_below(open.size())];
        Atom a{Element::C, g.atom_count()};
        g.atoms.push_back(a);
        valence.push_back(1);
        ++valence[target];
        add_bond(g, target, a.index);
    }

    std::sort(g.bonds.begin(), g.bonds.end(), [](const Bond& a, const Bond& b) {
        return std::pair(a.i, a.j) < std::pair(b.i, b.j);
    });
    g.torsions = enumerate_torsions(g);
    return g;
}

MoleculeGraph t_branched_alkane(int t) {
    if (t < 1) throw Error("t_branched_alkane requires t >= 1");
    MoleculeGraph g;
    g.generator = "t-branched-alkane";
    g.seed = static_cast<std::uint64_t>(t);
    g.name = "t_alkane_" + std::to_string(t);

    // Indices are stable across the family (molecule t is literally a
    // subgraph of molecule t+1): 0-1 start the chain, 2 is the methyl branch
    // on carbon 2, and the chain continues 3, 4, ... on the long end.
    const int n_atoms = t + 4;
    for (int i = 0; i < n_atoms; ++i) g.atoms.push_back(Atom{Element::C, i});
    add_bond(g, 0, 1);
    add_bond(g, 1, 2);  // methyl
    add_bond(g, 1, 3);
    for (int i = 3; i + 1 < n_atoms; ++i) add_bond(g, i, i + 1);

    g.torsions = enumerate_torsions(g);
    return g;
}

std::string molecule_to_json(const MoleculeGraph& g) {
    nlohmann::ordered_json j;
    j["name"] = g.name;
    j["atoms"] = nlohmann::ordered_json::array();
    for (const Atom& a : g.atoms) {
        j["atoms"].push_back({{"element", element_symbol(a.element)}, {"index", a.index}});
    }
    j["bonds"] = nlohmann::ordered_json::array();
    for (const Bond& b : g.bonds) {
        j["bonds"].push_back({{"i", b.i},
                              {"j", b.j},
                              {"order", b.order},
                              {"conjugated", b.conjugated},
                              {"ringed", b.ringed}});
    }
    j["torsions"] = nlohmann::ordered_json::array();
    for (const TorsionQuad& q : g.torsions) {
        j["torsions"].push_back({q.b1, q.b2, q.b3, q.b4});
    }
    j["meta"] = {{"generator", g.generator}, {"seed", g.seed}, {"rng", SplitMix64::name()}};
    return j.dump(2) + "\n";
}

MoleculeGraph molecule_from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    MoleculeGraph g;
    g.name = j.at("name").get<std::string>();
    for (const auto& ja : j.at("atoms")) {
        Atom a;
        const auto sym = ja.at("element").get<std::string>();
        if (sym == "C") a.element = Element::C;
        else if (sym == "O") a.element = Element::O;
        else throw Error("unknown element in molecule JSON: " + sym);
        a.index = ja.at("index").get<int>();
        g.atoms.push_back(a);
    }
    for (const auto& jb : j.at("bonds")) {
        Bond b;
        b.i = jb.at("i").get<int>();
        b.j = jb.at("j").get<int>();
        b.order = jb.at("order").get<int>();
        b.conjugated = jb.at("conjugated").get<bool>();
        b.ringed = jb.at("ringed").get<bool>();
        g.bonds.push_back(b);
    }
    for (const auto& jq : j.at("torsions")) {
        g.torsions.push_back(TorsionQuad{jq.at(0).get<int>(), jq.at(1).get<int>(),
                                         jq.at(2).get<int>(), jq.at(3).get<int>()});
    }
    if (j.contains("meta")) {
        g.generator = j["meta"].value("generator", "");
        g.seed = j["meta"].value("seed", std::uint64_t{0});
    }
    return g;
}

}  // namespace tw
