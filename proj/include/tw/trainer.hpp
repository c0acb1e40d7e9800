#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tw/agent.hpp"
#include "tw/env.hpp"
#include "tw/search.hpp"

namespace tw {

struct TrainerConfig {
    double gamma = 0.99;
    double lambda = 0.95;
    double clip = 0.2;
    double entropy_coef = 0.01;   // alpha
    double value_coef = 0.5;      // c
    int epochs = 4;
    int minibatch_steps = 64;     // episodes grouped until this many steps
    double learning_rate = 3e-4;  // constant step size
    int episodes_per_update = 4;

    // doubling-curriculum controls
    double threshold_ratio = 0.6;     // rho, vs the normalizer-run score of 1
    long long round_step_cap = 50000; // env steps per round before forced doubling
    long long max_total_steps = 200000;
    int rolling_window = 20;

    std::uint64_t seed = 0;
};

// One complete episode captured for recurrent PPO replay: features are the
// per-step node inputs, so updates re-run the network without re-minimizing.
struct EpisodeRollout {
    int molecule_index = 0;
    std::vector<std::vector<Vec>> features;   // step -> node features (fitted)
    std::vector<std::vector<int>> actions;    // step -> bucket indices
    std::vector<double> rewards;
    std::vector<double> values;
    std::vector<double> log_probs;
    std::vector<double> advantages;           // filled by compute_advantages
    std::vector<double> returns;
    double episode_score = 0.0;               // env Gibbs accounting
    int steps() const { return static_cast<int>(actions.size()); }
};

struct RolloutBuffer {
    std::vector<EpisodeRollout> episodes;
    long long total_steps() const {
        long long n = 0;
        for (const auto& e : episodes) n += e.steps();
        return n;
    }
};

// Lambda-weighted advantages and returns (terminal value 0 at the fixed
// horizon), normalized to zero mean / unit variance across the buffer.
void compute_advantages(RolloutBuffer& buffer, double gamma, double lambda);

// Constant-learning-rate Adam over the flattened parameter vector.
class AdamOptimizer {
public:
    AdamOptimizer(std::size_t n_params, double learning_rate);
    void step(Vec& params, const Vec& grads);

private:
    double lr_;
    long long t_ = 0;
    Vec m_, v_;
};

struct UpdateStats {
    double surrogate = 0.0;    // clipped-objective value (pre-update)
    double value_loss = 0.0;
    double entropy = 0.0;
    double mean_return = 0.0;
    bool aborted = false;      // non-finite loss: parameters restored
};

// Clipped-surrogate update with entropy bonus over whole-episode minibatches
// (memory states are recomputed under the current parameters each epoch).
UpdateStats ppo_update(TorsionPolicy& policy, const std::vector<GraphSpec>& graphs,
                       RolloutBuffer& buffer, const TrainerConfig& config, AdamOptimizer& adam,
                       SplitMix64& rng);

// Runs one seeded episode, sampling (or greedy) actions from the policy.
EpisodeRollout collect_episode(const TorsionPolicy& policy, ConformerEnv& env,
                               const GraphSpec& graph, std::uint64_t seed, bool greedy = false);

struct CurriculumMolecule {
    MoleculeGraph molecule;
    GibbsNormalizers normalizers;
    int horizon = 20;
};

struct CurriculumRoundInfo {
    int round = 0;
    int active_count = 0;
    long long steps_at_end = 0;
    bool threshold_reached = false;
};

struct CurriculumResult {
    PolicyParameters final_params;
    std::vector<CurriculumRoundInfo> rounds;
    std::string metrics_csv;
    std::vector<std::pair<std::string, PolicyParameters>> checkpoints;  // per round
};

// Doubling curriculum: the active set is the first min(2^(t-1), J) molecules
// (ordered by torsion count then atom count); a round ends when the rolling
// mean episode score of the hardest active molecule reaches the threshold or
// the round step cap fires.
CurriculumResult run_curriculum(std::vector<CurriculumMolecule> molecules,
                                const ForceFieldParams& ff, EnvConfig env_config,
                                const TrainerConfig& config, const PolicyDims& dims);

struct TransferCell {
    int stage = 0;    // trained through molecule `stage`
    int target = 0;
    std::vector<double> gaps;  // per seed, kcal/mol vs oracle best
};

struct TransferResult {
    std::vector<TransferCell> cells;
    std::string csv;  // stage,target,mean_gap,stderr
};

// Sequential training on t-branched alkanes 1..T with parameter transfer;
// after each stage, greedy rollouts on every molecule record the energy gap
// to the exhaustive oracle.
TransferResult transfer_experiment(int max_t, const std::vector<std::uint64_t>& seeds,
                                   long long steps_per_stage, const ForceFieldParams& ff,
                                   EnvConfig env_config, TrainerConfig config,
                                   const PolicyDims& dims,
                                   const std::optional<std::filesystem::path>& cache_dir);

// Curriculum horizon rule for small molecules: max(20, 5n).
int auto_horizon(int torsion_count);

// Normalizers from one systematic run: E0 = lowest energy seen, Z0 = the
// unnormalized Gibbs sum of the deduplicated set at temperature tau.
GibbsNormalizers collect_normalizers(const EnergyModel& model, long long budget, double tau,
                                     double prune_threshold, int jobs = 1);

}  // namespace tw
