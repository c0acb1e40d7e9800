#include "tw/env.hpp"

#include <cmath>

#include <json.hpp>

#include "tw/errors.hpp"
#include "tw/io_util.hpp"
#include "tw/rng.hpp"

namespace tw {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

RewardMode reward_mode_from_string(const std::string& s) {
    if (s == "stationary") return RewardMode::stationary;
    if (s == "pruned") return RewardMode::pruned;
    if (s == "log-gibbs" || s == "log_gibbs") return RewardMode::log_gibbs;
    throw ConfigError("reward_mode: expected stationary|pruned|log-gibbs, got '" + s + "'");
}

const char* reward_mode_to_string(RewardMode m) {
    switch (m) {
        case RewardMode::stationary: return "stationary";
        case RewardMode::pruned: return "pruned";
        case RewardMode::log_gibbs: return "log-gibbs";
    }
    return "?";
}

TorsionVector decode_action(const TorsionAction& action, int buckets) {
    // bucket k -> k * (2*pi/B); at the default B = 6 this is k * pi/3
    TorsionVector theta(action.size());
    for (std::size_t i = 0; i < action.size(); ++i) {
        if (action[i] < 1 || action[i] > buckets) {
            throw Error("action bucket index out of range");
        }
        theta[i] = wrap_angle(action[i] * kTwoPi / buckets);
    }
    return theta;
}

double reward_stationary(double minimized_energy, const GibbsNormalizers& norm) {
    return gibbs_measure(minimized_energy, norm);
}

double reward_pruned(double minimized_energy, double min_tfd_to_state, double m,
                     const GibbsNormalizers& norm) {
    if (min_tfd_to_state <= m) return 0.0;  // duplicate, boundary inclusive
    return gibbs_measure(minimized_energy, norm);
}

double reward_log_gibbs(double previous_sum, double contribution, double epsilon) {
    return std::log(previous_sum + contribution + epsilon) - std::log(previous_sum + epsilon);
}

ConformerEnv::ConformerEnv(MoleculeGraph molecule, ForceFieldParams params, EnvConfig config)
    : model_(std::move(molecule), std::move(params)), config_(std::move(config)) {
    if (config_.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (config_.buckets < 2) throw ConfigError("buckets must be >= 2");
    if (config_.prune_threshold < 0.0 || config_.prune_threshold > 1.0) {
        throw ConfigError("prune_threshold must lie in [0, 1]");
    }
}

const ConformerRecord& ConformerEnv::reset(std::uint64_t seed) {
    trajectory_.clear();
    episode_log_.clear();
    gibbs_sum_ = 0.0;
    steps_taken_ = 0;
    reset_called_ = true;

    SplitMix64 rng(seed);
    const auto n = model_.molecule().torsion_count();
    for (int attempt = 0; attempt < 10; ++attempt) {
        TorsionVector theta0(n);
        for (double& a : theta0) a = rng.next_double() * kTwoPi;
        EnergyReport start = model_.energy(theta0);
        if (!start.finite) continue;
        MinimizeResult res = model_.minimize(theta0);
        ConformerRecord rec;
        rec.theta = res.theta;
        rec.energy = res.energy.total;
        rec.gibbs = gibbs_measure(rec.energy, config_.normalizers);
        rec.accepted = true;
        trajectory_.push_back(std::move(rec));
        return trajectory_.back();
    }
    throw NonFiniteEnergy("no finite starting conformer after 10 attempts");
}

std::vector<ConformerRecord> ConformerEnv::step_records() const {
    if (trajectory_.empty()) return {};
    return std::vector<ConformerRecord>(trajectory_.begin() + 1, trajectory_.end());
}

double ConformerEnv::min_tfd_to_accepted(const TorsionVector& theta) const {
    double best = std::numeric_limits<double>::infinity();
    for (const ConformerRecord& r : trajectory_) {
        if (!r.accepted) continue;
        best = std::min(best, tfd(r.theta, theta));
    }
    return best;
}

StepResult ConformerEnv::step(const TorsionAction& action) {
    if (!reset_called_) throw Error("step before reset");
    if (done()) throw Error("step on a finished episode");

    const TorsionVector proposal = decode_action(action, config_.buckets);
    if (proposal.size() != static_cast<std::size_t>(model_.molecule().torsion_count())) {
        throw LengthMismatch("action length does not match torsion count");
    }

    StepResult out;
    EnergyReport proposal_energy = model_.energy(proposal);
    if (proposal_energy.finite) {
        MinimizeResult res = model_.minimize(proposal);
        out.conformer.theta = res.theta;
        out.conformer.energy = res.energy.total;
    } else {
        // steric sentinel: keep the proposal as an infinite-energy record
        out.conformer.theta = proposal;
        out.conformer.energy = proposal_energy.total;
    }

    const double min_tfd = min_tfd_to_accepted(out.conformer.theta);
    out.pruned = min_tfd <= config_.prune_threshold;
    out.conformer.accepted = !out.pruned;
    out.conformer.gibbs = gibbs_measure(out.conformer.energy, config_.normalizers);

    const double contribution = out.pruned ? 0.0 : out.conformer.gibbs;
    switch (config_.reward_mode) {
        case RewardMode::stationary:
            out.reward = reward_stationary(out.conformer.energy, config_.normalizers);
            break;
        case RewardMode::pruned:
            out.reward = contribution;
            break;
        case RewardMode::log_gibbs:
            out.reward = reward_log_gibbs(gibbs_sum_, contribution, config_.log_epsilon);
            break;
    }
    gibbs_sum_ += contribution;

    ++steps_taken_;
    out.done = done();

    nlohmann::ordered_json line;
    line["step"] = steps_taken_;
    line["action"] = action;
    line["theta"] = out.conformer.theta;
    line["energy"] = out.conformer.energy;
    line["reward"] = out.reward;
    line["pruned"] = out.pruned;
    episode_log_.push_back(line.dump());

    trajectory_.push_back(out.conformer);
    return out;
}

}  // namespace tw
