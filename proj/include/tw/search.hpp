#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tw/forcefield.hpp"
#include "tw/metrics.hpp"

namespace tw {

struct SearchBudget {
    long long max_conformers = 200;  // N
    int buckets = 6;                 // B
};

struct SearchResult {
    std::vector<ConformerRecord> records;  // dedup_by_energy flags applied
    double gibbs_score = 0.0;
};

// Confab-style enumeration of bucket combinations in odometer order (last
// torsion fastest), each minimized, stopping at the budget.
SearchResult systematic_search(const EnergyModel& model, const SearchBudget& budget,
                               const GibbsNormalizers& norm, double prune_threshold,
                               int jobs = 1);

// Uniform bucket sampling with replacement; deterministic in the seed, and a
// longer run with the same seed extends the shorter one's draw sequence.
SearchResult random_search(const EnergyModel& model, const SearchBudget& budget,
                           std::uint64_t seed, const GibbsNormalizers& norm,
                           double prune_threshold, int jobs = 1);

struct OracleEntry {
    std::vector<int> buckets;
    TorsionVector theta;
    double energy = 0.0;
};

struct OracleResult {
    std::vector<OracleEntry> entries;     // all B^n combinations, odometer order
    std::size_t best_index = 0;           // global minimum, lexicographic tie-break
    bool from_cache = false;

    const OracleEntry& best() const { return entries[best_index]; }
};

// Exhaustive ground truth over all B^n bucket combinations; refuses more
// than 10^6. Results are cached on disk keyed by (molecule, force field, B).
OracleResult oracle_set(const EnergyModel& model, int buckets = 6,
                        const std::optional<std::filesystem::path>& cache_dir = std::nullopt,
                        int jobs = 1);

// (theta*, E*) of the exhaustive enumeration.
std::pair<TorsionVector, double> oracle_best(
    const EnergyModel& model, int buckets = 6,
    const std::optional<std::filesystem::path>& cache_dir = std::nullopt, int jobs = 1);

// Cache root: TORSIONWORKS_CACHE if set, else ".torsionworks-cache" in the
// working directory.
std::filesystem::path oracle_cache_root();

std::string search_result_to_json(const MoleculeGraph& g, const std::string& method,
                                  const SearchBudget& budget, std::uint64_t seed,
                                  const SearchResult& result);

}  // namespace tw
