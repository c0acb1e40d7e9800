#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tw/chem.hpp"
#include "tw/forcefield.hpp"
#include "tw/metrics.hpp"

namespace tw {

enum class RewardMode { stationary, pruned, log_gibbs };

RewardMode reward_mode_from_string(const std::string& s);
const char* reward_mode_to_string(RewardMode m);

struct EnvConfig {
    int horizon = 200;          // K
    double prune_threshold = 0.10;  // m
    RewardMode reward_mode = RewardMode::pruned;
    int buckets = 6;            // B: decoded angle for bucket k is k*pi/3
    GibbsNormalizers normalizers;
    double log_epsilon = 1e-8;  // guards ln(0) in the log-Gibbs reward
};

// Per-torsion bucket indices in [1, B].
using TorsionAction = std::vector<int>;

TorsionVector decode_action(const TorsionAction& action, int buckets);

struct StepResult {
    ConformerRecord conformer;  // post-minimization record appended this step
    double reward = 0.0;
    bool pruned = false;
    bool done = false;
};

// Sequential conformer-search MDP: the state is the trajectory of accepted
// conformers, actions are bucketed torsion assignments, and the transition
// runs the force-field minimizer on the decoded angles.
class ConformerEnv {
public:
    ConformerEnv(MoleculeGraph molecule, ForceFieldParams params, EnvConfig config);

    // Minimizes from a seeded uniform-random torsion vector; deterministic in
    // the seed. Retries up to 10 draws if the start is sterically infinite.
    const ConformerRecord& reset(std::uint64_t seed);

    StepResult step(const TorsionAction& action);

    bool done() const { return steps_taken_ >= config_.horizon; }
    int steps_taken() const { return steps_taken_; }

    // Full state s_t: the initial conformer followed by step conformers.
    const std::vector<ConformerRecord>& trajectory() const { return trajectory_; }
    // Step-produced records only; the reward sums telescope over these.
    std::vector<ConformerRecord> step_records() const;
    // Gibbs sum over unique step-produced conformers (the initial conformer
    // seeds pruning but earns no reward: the running sum starts at 0).
    double episode_score() const { return gibbs_sum_; }

    const EnergyModel& model() const { return model_; }
    const EnvConfig& config() const { return config_; }
    const MoleculeGraph& molecule() const { return model_.molecule(); }

    // One JSON line per step: index, buckets, minimized angles, energy,
    // reward, pruned flag.
    const std::vector<std::string>& episode_log() const { return episode_log_; }

private:
    double min_tfd_to_accepted(const TorsionVector& theta) const;

    EnergyModel model_;
    EnvConfig config_;
    std::vector<ConformerRecord> trajectory_;
    double gibbs_sum_ = 0.0;
    int steps_taken_ = 0;
    bool reset_called_ = false;
    std::vector<std::string> episode_log_;
};

// Reward primitives shared by the environment and tests.
double reward_stationary(double minimized_energy, const GibbsNormalizers& norm);
double reward_pruned(double minimized_energy, double min_tfd_to_state, double m,
                     const GibbsNormalizers& norm);
double reward_log_gibbs(double previous_sum, double contribution, double epsilon);

}  // namespace tw
