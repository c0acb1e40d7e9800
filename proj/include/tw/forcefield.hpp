#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "tw/chem.hpp"
#include "tw/geometry.hpp"

namespace tw {

struct TorsionCoeffs {
    std::array<double, 3> v{};      // V1..V3, kcal/mol
    std::array<double, 3> gamma{};  // phases, rad
};

struct LJPair {
    double epsilon = 0.0;  // kcal/mol
    double sigma = 0.0;    // Angstrom
};

// United-atom torsion + Lennard-Jones parameter set. Values are data: the
// canonical file lives in data/forcefield/ and an identical copy is embedded
// as the default so the library works without a file path.
class ForceFieldParams {
public:
    static ForceFieldParams defaults();
    static ForceFieldParams from_json(const std::string& json_text);
    std::string to_json() const;

    TorsionCoeffs torsion_for(Element a, Element b, Element c, Element d) const;
    // Exact pair entry, or Lorentz-Berthelot combination of the same-element
    // entries (geometric epsilon, arithmetic sigma).
    LJPair lj_for(Element a, Element b) const;

    int min_nonbonded_path() const { return min_nonbonded_path_; }
    std::uint64_t content_hash() const;

private:
    std::vector<std::pair<std::string, TorsionCoeffs>> torsion_table_;
    std::vector<std::pair<std::string, LJPair>> lj_table_;
    int min_nonbonded_path_ = 4;
};

struct EnergyReport {
    double total = 0.0;
    double torsional = 0.0;
    double nonbonded = 0.0;
    bool finite = true;  // false: steric sentinel fired, total is +inf
};

struct MinimizeResult {
    TorsionVector theta;
    EnergyReport energy;
    bool converged = false;
    bool line_search_failed = false;
    int iterations = 0;
};

// Per-molecule evaluator; precomputes the nonbonded pair list (topological
// path >= 4 bonds) and the per-torsion moving fragments.
class EnergyModel {
public:
    EnergyModel(MoleculeGraph g, ForceFieldParams params);

    EnergyReport energy(const TorsionVector& theta) const;
    std::vector<double> gradient(const TorsionVector& theta) const;

    // L-BFGS (memory 10) with Armijo backtracking (c1 = 1e-4), at most 200
    // iterations, gradient inf-norm tolerance 1e-6; angles wrapped to
    // [0, 2*pi) on return.
    MinimizeResult minimize(const TorsionVector& theta0) const;

    const MoleculeGraph& molecule() const { return molecule_; }
    const ForceFieldParams& params() const { return params_; }
    std::size_t nonbonded_pair_count() const { return pairs_.size(); }

    static constexpr double kStericLimit = 0.1;  // Angstrom

private:
    struct Pair {
        int i, j;
        double epsilon, sigma;
    };

    MoleculeGraph molecule_;
    ForceFieldParams params_;
    std::vector<TorsionCoeffs> torsion_coeffs_;
    std::vector<Pair> pairs_;
    std::vector<std::vector<char>> moves_;  // [torsion][atom]: moves under that torsion
};

EnergyReport energy(const MoleculeGraph& g, const TorsionVector& theta,
                    const ForceFieldParams& params);
std::vector<double> energy_gradient(const MoleculeGraph& g, const TorsionVector& theta,
                                    const ForceFieldParams& params);
MinimizeResult minimize(const MoleculeGraph& g, const TorsionVector& theta0,
                        const ForceFieldParams& params);

}  // namespace tw
