#pragma once

#include <string>
#include <vector>

#include "tw/geometry.hpp"

namespace tw {

// Boltzmann constant, kcal/(mol*K).
inline constexpr double kBoltzmannKcal = 0.0019872;

struct GibbsNormalizers {
    double e0 = 0.0;    // kcal/mol
    double z0 = 1.0;    // dimensionless, > 0
    double tau = 500.0; // K

    std::string to_json() const;
    static GibbsNormalizers from_json(const std::string& json_text);
};

struct ConformerRecord {
    TorsionVector theta;
    double energy = 0.0;
    double gibbs = 0.0;
    bool accepted = true;  // unique (contributes) vs pruned
};

// exp(-(E - E0) / (k*tau)) / Z0; +inf energy maps to 0.
double gibbs_measure(double energy, const GibbsNormalizers& norm);

// Sum of Gibbs measures over accepted records only.
double gibbs_score(const std::vector<ConformerRecord>& records);

// Torsion Fingerprint Deviation with explicit weights: weighted mean of
// circular distances normalized by pi. Empty vectors compare equal (0).
double tfd(const TorsionVector& a, const TorsionVector& b, const std::vector<double>& weights);
double tfd(const TorsionVector& a, const TorsionVector& b);  // uniform weights

// Energy-sorted greedy dedup used to score non-sequential baselines: sort
// ascending by energy (ties keep insertion order), accept iff TFD >= m to
// every previously accepted conformer. Flags are set on the returned copy.
std::vector<ConformerRecord> dedup_by_energy(std::vector<ConformerRecord> records, double m);

// Torsion-correlation matrix: per-torsion maximal gap shift (periodicity),
// then Pearson correlation; zero-variance torsions zero their row/column;
// off-diagonal magnitudes below 0.01 are reported as 0.
std::vector<std::vector<double>> correlation_matrix(const std::vector<TorsionVector>& samples);

std::string correlation_to_csv(const std::vector<std::vector<double>>& matrix);

}  // namespace tw
