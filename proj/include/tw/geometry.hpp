#pragma once

#include <string>
#include <vector>

#include "tw/chem.hpp"
#include "tw/vec3.hpp"

namespace tw {

using Coordinates = std::vector<Vec3>;

// Torsion angles in [0, 2*pi), ordered as the molecule's torsion list.
using TorsionVector = std::vector<double>;

// Fixed internal coordinates of the rigid rotor template.
inline constexpr double kBondCC = 1.54;   // Angstrom
inline constexpr double kBondCO = 1.43;   // defined for completeness
double bond_length(Element a, Element b);

// Atoms on the b3 side of bond (b2, b3) — the fragment moved by a rotation
// about that bond. The graph must be acyclic.
std::vector<int> fragment_atoms(const MoleculeGraph& g, int b2, int b3);

// Deterministic embedding with fixed bond lengths and exact tetrahedral
// angles (children take ideal tetrahedral directions in neighbor-index
// order), followed by setting each listed torsion to theta[i].
Coordinates build_coordinates(const MoleculeGraph& g, const TorsionVector& theta);

// Rotates the b4-side fragment of torsion i so its measured dihedral equals
// `angle` (absolute-angle semantics).
Coordinates set_dihedral(const Coordinates& c, const MoleculeGraph& g, int torsion_index,
                         double angle);
void set_dihedral_in_place(Coordinates& c, const MoleculeGraph& g, int torsion_index,
                           double angle);

// Signed dihedral (right-hand rule about b2->b3) mapped to [0, 2*pi).
double measure_dihedral(const Coordinates& c, const MoleculeGraph& g, int torsion_index);
double measure_dihedral(const Coordinates& c, const TorsionQuad& q);

struct NormalizedPose {
    Coordinates coords;
    bool degenerate = false;  // rank-deficient covariance: centered only
};

// Centers the cloud and aligns covariance eigenvectors with the axes in
// descending-eigenvalue order; per-axis sign fixed by the first atom with a
// nonzero coordinate on that axis.
NormalizedPose normalize_pose(const Coordinates& c);

// XYZ coordinate dump (atom count, comment, element x y z rows).
std::string to_xyz(const MoleculeGraph& g, const Coordinates& c, const std::string& comment = "");

}  // namespace tw
