#include "tw/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "tw/chem.hpp"
#include "tw/env.hpp"
#include "tw/errors.hpp"
#include "tw/io_util.hpp"
#include "tw/rng.hpp"

namespace tw {

namespace {

constexpr long long kOracleCap = 1'000'000;

long long pow_ll(long long base, int exp) {
    long long r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > kOracleCap * 10) return kOracleCap * 10;  // saturate, enough to refuse
        r *= base;
    }
    return r;
}

std::vector<int> combo_to_buckets(long long combo, int n_torsions, int buckets) {
    std::vector<int> out(n_torsions);
    for (int i = n_torsions - 1; i >= 0; --i) {  // last torsion fastest
        out[i] = static_cast<int>(combo % buckets) + 1;
        combo /= buckets;
    }
    return out;
}

ConformerRecord minimize_proposal(const EnergyModel& model, const TorsionVector& proposal) {
    ConformerRecord rec;
    const EnergyReport start = model.energy(proposal);
    if (!start.finite) {
        rec.theta = proposal;
        rec.energy = start.total;
        return rec;
    }
    const MinimizeResult res = model.minimize(proposal);
    rec.theta = res.theta;
    rec.energy = res.energy.total;
    return rec;
}

// Runs fn(i) for i in [0, count) across `jobs` threads; outputs are indexed,
// so the merge is deterministic.
template <typename Fn>
void parallel_for(long long count, int jobs, Fn&& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || count < 2) {
        for (long long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    std::atomic<long long> next{0};
    for (int t = 0; t < jobs; ++t) {
        threads.emplace_back([&]() {
            for (;;) {
                const long long i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& th : threads) th.join();
}

SearchResult score_records(std::vector<ConformerRecord> records, const GibbsNormalizers& norm,
                           double prune_threshold) {
    for (ConformerRecord& r : records) r.gibbs = gibbs_measure(r.energy, norm);
    SearchResult out;
    out.records = dedup_by_energy(std::move(records), prune_threshold);
    out.gibbs_score = gibbs_score(out.records);
    return out;
}

}  // namespace

SearchResult systematic_search(const EnergyModel& model, const SearchBudget& budget,
                               const GibbsNormalizers& norm, double prune_threshold,
                               int jobs) {
    if (budget.max_conformers < 1) throw ConfigError("budget: max_conformers must be >= 1");
    const int n = model.molecule().torsion_count();
    const long long total = pow_ll(budget.buckets, n);
    const long long count = std::min(budget.max_conformers, total);

    std::vector<ConformerRecord> records(count);
    parallel_for(count, jobs, [&](long long i) {
        const auto buckets = combo_to_buckets(i, n, budget.buckets);
        records[i] = minimize_proposal(model, decode_action(buckets, budget.buckets));
    });
    return score_records(std::move(records), norm, prune_threshold);
}

SearchResult random_search(const EnergyModel& model, const SearchBudget& budget,
                           std::uint64_t seed, const GibbsNormalizers& norm,
                           double prune_threshold, int jobs) {
    if (budget.max_conformers < 1) throw ConfigError("budget: max_conformers must be >= 1");
    const int n = model.molecule().torsion_count();
    SplitMix64 rng(seed);

    std::vector<TorsionVector> proposals(budget.max_conformers);
    for (auto& proposal : proposals) {
        TorsionAction action(n);
        for (int k = 0; k < n; ++k) {
            action[k] = static_cast<int>(rng.next_below(budget.buckets)) + 1;
        }
        proposal = decode_action(action, budget.buckets);
    }
    std::vector<ConformerRecord> records(proposals.size());
    parallel_for(static_cast<long long>(proposals.size()), jobs, [&](long long i) {
        records[i] = minimize_proposal(model, proposals[i]);
    });
    return score_records(std::move(records), norm, prune_threshold);
}

std::filesystem::path oracle_cache_root() {
    if (const char* env = std::getenv("TORSIONWORKS_CACHE")) {
        return std::filesystem::path(env);
    }
    return std::filesystem::path(".torsionworks-cache");
}

OracleResult oracle_set(const EnergyModel& model, int buckets,
                        const std::optional<std::filesystem::path>& cache_dir, int jobs) {
    const int n = model.molecule().torsion_count();
    const long long total = pow_ll(buckets, n);
    if (total > kOracleCap) {
        throw BudgetRefused("oracle refuses " + std::to_string(buckets) + "^" +
                            std::to_string(n) + " > 10^6 combinations");
    }

    const std::uint64_t key =
        fnv1a64(molecule_to_json(model.molecule()) + "|" + model.params().to_json() + "|B=" +
                std::to_string(buckets));
    const std::filesystem::path root = cache_dir.value_or(oracle_cache_root());
    const std::filesystem::path cache_file = root / ("oracle_" + hex64(key) + ".json");

    OracleResult result;
    if (std::filesystem::exists(cache_file)) {
        const auto j = nlohmann::json::parse(read_text_file(cache_file));
        for (const auto& je : j.at("entries")) {
            OracleEntry e;
            e.buckets = je.at("buckets").get<std::vector<int>>();
            e.theta = je.at("theta").get<TorsionVector>();
            e.energy = je.at("energy").is_null()
                           ? std::numeric_limits<double>::infinity()
                           : je.at("energy").get<double>();
            result.entries.push_back(std::move(e));
        }
        if (static_cast<long long>(result.entries.size()) == total) {
            result.best_index = j.at("best_index").get<std::size_t>();
            result.from_cache = true;
            return result;
        }
        result.entries.clear();  // stale or truncated cache: recompute
    }

    result.entries.resize(total);
    parallel_for(total, jobs, [&](long long i) {
        OracleEntry e;
        e.buckets = combo_to_buckets(i, n, buckets);
        const ConformerRecord rec = minimize_proposal(model, decode_action(e.buckets, buckets));
        e.theta = rec.theta;
        e.energy = rec.energy;
        result.entries[i] = std::move(e);
    });

    result.best_index = 0;
    for (std::size_t i = 1; i < result.entries.size(); ++i) {
        if (result.entries[i].energy < result.entries[result.best_index].energy) {
            result.best_index = i;  // strict <: first (lexicographic) wins ties
        }
    }

    nlohmann::ordered_json j;
    j["molecule"] = model.molecule().name;
    j["key"] = hex64(key);
    j["buckets"] = buckets;
    j["best_index"] = result.best_index;
    j["entries"] = nlohmann::ordered_json::array();
    for (const OracleEntry& e : result.entries) {
        nlohmann::ordered_json je;
        je["buckets"] = e.buckets;
        je["theta"] = e.theta;
        if (std::isinf(e.energy)) je["energy"] = nullptr;
        else je["energy"] = e.energy;
        j["entries"].push_back(std::move(je));
    }
    std::filesystem::create_directories(root);
    write_text_file(cache_file, j.dump() + "\n");
    return result;
}

std::pair<TorsionVector, double> oracle_best(const EnergyModel& model, int buckets,
                                             const std::optional<std::filesystem::path>& cache_dir,
                                             int jobs) {
    const OracleResult result = oracle_set(model, buckets, cache_dir, jobs);
    return {result.best().theta, result.best().energy};
}

std::string search_result_to_json(const MoleculeGraph& g, const std::string& method,
                                  const SearchBudget& budget, std::uint64_t seed,
                                  const SearchResult& result) {
    nlohmann::ordered_json j;
    j["molecule"] = g.name;
    j["method"] = method;
    j["budget"] = budget.max_conformers;
    j["buckets"] = budget.buckets;
    j["seed"] = seed;
    j["gibbs_score"] = result.gibbs_score;
    j["records"] = nlohmann::ordered_json::array();
    for (const ConformerRecord& r : result.records) {
        nlohmann::ordered_json jr;
        jr["theta"] = r.theta;
        if (std::isinf(r.energy)) jr["energy"] = nullptr;
        else jr["energy"] = r.energy;
        jr["accepted"] = r.accepted;
        j["records"].push_back(std::move(jr));
    }
    return j.dump(2) + "\n";
}

}  // namespace tw
