#include "tw/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include <Eigen/Dense>

#include "tw/errors.hpp"
#include "tw/io_util.hpp"

namespace tw {

double bond_length(Element a, Element b) {
    if (a == Element::C && b == Element::C) return kBondCC;
    return kBondCO;
}

std::vector<int> fragment_atoms(const MoleculeGraph& g, int b2, int b3) {
    auto adj = g.adjacency();
    std::vector<char> seen(g.atom_count(), 0);
    seen[b2] = 1;  // blocks traversal back across the axis bond
    seen[b3] = 1;
    std::vector<int> out{b3};
    std::queue<int> q;
    q.push(b3);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                out.push_back(v);
                q.push(v);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Ideal tetrahedral directions; opposite parity sites use the negatives, so
// every bond angle is exactly arccos(-1/3) and the initial chain comes out
// staggered (diamond-lattice embedding).
const Vec3 kTet[4] = {
    Vec3{1, 1, 1} / std::sqrt(3.0),
    Vec3{1, -1, -1} / std::sqrt(3.0),
    Vec3{-1, 1, -1} / std::sqrt(3.0),
    Vec3{-1, -1, 1} / std::sqrt(3.0),
};

double dihedral_angle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    const Vec3 u1 = b - a;
    const Vec3 u2 = c - b;
    const Vec3 u3 = d - c;
    const Vec3 n1 = u1.cross(u2);
    const Vec3 n2 = u2.cross(u3);
    const double n1n = n1.norm();
    const double n2n = n2.norm();
    const double u2n = u2.norm();
    if (n1n < 1e-9 || n2n < 1e-9 || u2n < 1e-9) {
        throw DegenerateGeometry("collinear atoms in dihedral");
    }
    const double x = n1.dot(n2);
    const double y = n1.cross(n2).dot(u2 / u2n);
    return wrap_angle(std::atan2(y, x));
}

}  // namespace

Coordinates build_coordinates(const MoleculeGraph& g, const TorsionVector& theta) {
    if (theta.size() != g.torsions.size()) {
        throw Error("torsion vector length does not match molecule torsion count");
    }
    const int n = g.atom_count();
    auto adj = g.adjacency();

    Coordinates pos(n);
    std::vector<char> placed(n, 0);
    std::vector<int> parity(n, 0);
    std::vector<int> dirs_used(n, 0);
    std::vector<int> parent_dir(n, -1);  // index of the direction towards parent

    std::queue<int> q;
    placed[0] = 1;
    q.push(0);
    int placed_count = 1;

    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : adj[u]) {
            if (placed[v]) continue;
            // next free tetrahedral direction at u, skipping the parent slot
            int slot = dirs_used[u]++;
            if (slot == parent_dir[u]) slot = dirs_used[u]++;
            if (slot > 3) throw Error("atom valence exceeds tetrahedral template");
            const Vec3 dir = parity[u] == 0 ? kTet[slot] : kTet[slot] * -1.0;
            pos[v] = pos[u] + dir * bond_length(g.atoms[u].element, g.atoms[v].element);
            parity[v] = 1 - parity[u];
            // the child sees its parent along the same slot (directions at
            // opposite parity are negated, so the slot index is shared)
            parent_dir[v] = slot;
            placed[v] = 1;
            ++placed_count;
            q.push(v);
        }
    }
    if (placed_count != n) throw DisconnectedGraph("molecule graph is not connected");

    for (std::size_t i = 0; i < g.torsions.size(); ++i) {
        set_dihedral_in_place(pos, g, static_cast<int>(i), theta[i]);
    }
    return pos;
}

void set_dihedral_in_place(Coordinates& c, const MoleculeGraph& g, int torsion_index,
                           double angle) {
    const TorsionQuad& t = g.torsions.at(torsion_index);
    const double current = measure_dihedral(c, t);
    const double delta = angle - current;
    if (delta == 0.0) return;

    const Vec3 pivot = c[t.b3];
    const Vec3 axis = (c[t.b3] - c[t.b2]).normalized();
    for (int atom : fragment_atoms(g, t.b2, t.b3)) {
        if (atom == t.b3) continue;  // on the axis
        c[atom] = pivot + rotate_about_axis(c[atom] - pivot, axis, delta);
    }
}

Coordinates set_dihedral(const Coordinates& c, const MoleculeGraph& g, int torsion_index,
                         double angle) {
    Coordinates out = c;
    set_dihedral_in_place(out, g, torsion_index, angle);
    return out;
}

double measure_dihedral(const Coordinates& c, const TorsionQuad& q) {
    return dihedral_angle(c[q.b1], c[q.b2], c[q.b3], c[q.b4]);
}

double measure_dihedral(const Coordinates& c, const MoleculeGraph& g, int torsion_index) {
    return measure_dihedral(c, g.torsions.at(torsion_index));
}

NormalizedPose normalize_pose(const Coordinates& c) {
    const auto n = static_cast<double>(c.size());
    NormalizedPose out;
    out.coords = c;
    if (c.empty()) return out;

    Vec3 centroid{};
    for (const Vec3& p : c) centroid += p;
    centroid = centroid / n;
    for (Vec3& p : out.coords) p -= centroid;

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const Vec3& p : out.coords) {
        Eigen::Vector3d v(p.x, p.y, p.z);
        cov += v * v.transpose();
    }
    cov /= n;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const Eigen::Vector3d evals = solver.eigenvalues();   // ascending
    const double scale = std::max(evals(2), 1.0);
    if (evals(1) <= 1e-12 * scale) {
        // fewer than 3 non-collinear atoms: centering only
        out.degenerate = true;
        return out;
    }

    Eigen::Matrix3d axes;
    for (int a = 0; a < 3; ++a) axes.col(a) = solver.eigenvectors().col(2 - a);

    std::vector<Eigen::Vector3d> aligned(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Vec3& p = out.coords[i];
        aligned[i] = axes.transpose() * Eigen::Vector3d(p.x, p.y, p.z);
    }
    for (int a = 0; a < 3; ++a) {
        for (const auto& v : aligned) {
            if (std::abs(v(a)) > 1e-9) {
                if (v(a) < 0.0) {
                    for (auto& w : aligned) w(a) = -w(a);
                }
                break;
            }
        }
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
        out.coords[i] = Vec3{aligned[i](0), aligned[i](1), aligned[i](2)};
    }
    return out;
}

std::string to_xyz(const MoleculeGraph& g, const Coordinates& c, const std::string& comment) {
    std::ostringstream out;
    out << g.atom_count() << "\n" << comment << "\n";
    for (int i = 0; i < g.atom_count(); ++i) {
        out << element_symbol(g.atoms[i].element) << " " << format_double(c[i].x) << " "
            << format_double(c[i].y) << " " << format_double(c[i].z) << "\n";
    }
    return out.str();
}

}  // namespace tw
