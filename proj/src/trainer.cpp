#include "tw/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "tw/errors.hpp"
#include "tw/io_util.hpp"

namespace tw {

int auto_horizon(int torsion_count) { return std::max(20, 5 * torsion_count); }

GibbsNormalizers collect_normalizers(const EnergyModel& model, long long budget, double tau,
                                     double prune_threshold, int jobs) {
    GibbsNormalizers raw;
    raw.e0 = 0.0;
    raw.z0 = 1.0;
    raw.tau = tau;
    SearchBudget b;
    b.max_conformers = budget;
    SearchResult run = systematic_search(model, b, raw, prune_threshold, jobs);

    double e0 = std::numeric_limits<double>::infinity();
    for (const ConformerRecord& r : run.records) e0 = std::min(e0, r.energy);
    GibbsNormalizers norm;
    norm.e0 = e0;
    norm.tau = tau;
    norm.z0 = 1.0;
    double z0 = 0.0;
    for (const ConformerRecord& r : run.records) {
        if (r.accepted) z0 += gibbs_measure(r.energy, norm);
    }
    norm.z0 = z0 > 0.0 ? z0 : 1.0;
    return norm;
}

void compute_advantages(RolloutBuffer& buffer, double gamma, double lambda) {
    for (EpisodeRollout& ep : buffer.episodes) {
        const int n = ep.steps();
        ep.advantages.assign(n, 0.0);
        ep.returns.assign(n, 0.0);
        double gae = 0.0;
        for (int t = n - 1; t >= 0; --t) {
            const double next_value = (t + 1 < n) ? ep.values[t + 1] : 0.0;
            const double delta = ep.rewards[t] + gamma * next_value - ep.values[t];
            gae = delta + gamma * lambda * gae;
            ep.advantages[t] = gae;
            ep.returns[t] = gae + ep.values[t];
        }
    }
    // batch normalization of advantages
    double mean = 0.0;
    long long count = 0;
    for (const auto& ep : buffer.episodes) {
        for (double a : ep.advantages) {
            mean += a;
            ++count;
        }
    }
    if (count == 0) return;
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (const auto& ep : buffer.episodes) {
        for (double a : ep.advantages) var += (a - mean) * (a - mean);
    }
    var /= static_cast<double>(count);
    const double sd = std::sqrt(var);
    if (sd < 1e-12) return;  // constant advantages: leave centered values
    for (auto& ep : buffer.episodes) {
        for (double& a : ep.advantages) a = (a - mean) / sd;
    }
}

AdamOptimizer::AdamOptimizer(std::size_t n_params, double learning_rate)
    : lr_(learning_rate), m_(n_params, 0.0), v_(n_params, 0.0) {}

void AdamOptimizer::step(Vec& params, const Vec& grads) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1 * m_[i] + (1.0 - beta1) * grads[i];
        v_[i] = beta2 * v_[i] + (1.0 - beta2) * grads[i] * grads[i];
        params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps);
    }
}

EpisodeRollout collect_episode(const TorsionPolicy& policy, ConformerEnv& env,
                               const GraphSpec& graph, std::uint64_t seed, bool greedy) {
    EpisodeRollout ep;
    const MoleculeGraph& mol = env.molecule();
    env.reset(seed);
    SplitMix64 action_rng = SplitMix64(seed).fork(0xac710);

    MemoryState mem = MemoryState::zeros(policy.params().dims.memory_dim);
    while (!env.done()) {
        const ConformerRecord& current = env.trajectory().back();
        const Coordinates coords = build_coordinates(mol, current.theta);
        std::vector<Vec> feats = node_features(mol, coords, policy.params().dims.node_dim);

        const PolicyOutput out = policy.forward(graph, feats, mem);
        const SampledAction act =
            greedy ? TorsionPolicy::greedy_action(out) : TorsionPolicy::sample_action(out, action_rng);
        const StepResult step = env.step(act.buckets);

        ep.features.push_back(std::move(feats));
        ep.actions.push_back(act.buckets);
        ep.rewards.push_back(step.reward);
        ep.values.push_back(out.value);
        ep.log_probs.push_back(act.log_prob);
        mem = out.memory;
    }
    ep.episode_score = env.episode_score();
    return ep;
}

namespace {

struct EpisodePassResult {
    double surrogate = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    bool finite = true;
};

// Forward an episode under current parameters, accumulate loss gradients at
// the outputs, then backpropagate through time. Gradients are scaled by
// `inv_steps` so a minibatch averages per step.
EpisodePassResult episode_pass(const TorsionPolicy& policy, const GraphSpec& graph,
                               const EpisodeRollout& ep, const TrainerConfig& cfg,
                               double inv_steps, PolicyParameters* grads) {
    EpisodePassResult res;
    const int n_steps = ep.steps();
    const int n_torsions = static_cast<int>(graph.torsions.size());

    std::vector<std::shared_ptr<TorsionPolicy::StepCache>> caches(n_steps);
    std::vector<StepOutputGrad> step_grads(n_steps);
    MemoryState mem = MemoryState::zeros(policy.params().dims.memory_dim);

    for (int t = 0; t < n_steps; ++t) {
        PolicyOutput out = policy.forward(graph, ep.features[t], mem, &caches[t]);
        mem = out.memory;

        const double lp_new = TorsionPolicy::log_prob_of(out, ep.actions[t]);
        const double ratio = std::exp(lp_new - ep.log_probs[t]);
        const double adv = ep.advantages[t];
        const double surr1 = ratio * adv;
        const double surr2 = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
        const double surr = std::min(surr1, surr2);
        const double ent = TorsionPolicy::entropy(out);
        const double verr = out.value - ep.returns[t];

        res.surrogate += surr;
        res.value_loss += 0.5 * verr * verr;
        res.entropy += ent;
        if (!std::isfinite(surr) || !std::isfinite(verr) || !std::isfinite(ent)) {
            res.finite = false;
            return res;
        }
        if (!grads) continue;

        StepOutputGrad& sg = step_grads[t];
        sg.dvalue = cfg.value_coef * verr * inv_steps;
        sg.dlogits.assign(n_torsions, Vec(kActionBuckets, 0.0));

        // d(-surr)/dlp: active only on the unclipped branch
        const double dlp = (surr1 <= surr2) ? -adv * ratio : 0.0;
        for (int i = 0; i < n_torsions; ++i) {
            const Vec& p = out.probs[i];
            double h_i = 0.0;
            for (double v : p) {
                if (v > 0.0) h_i -= v * std::log(v);
            }
            Vec& dl = sg.dlogits[i];
            const int a = ep.actions[t][i] - 1;
            for (int k = 0; k < kActionBuckets; ++k) {
                const double dlp_dlk = (k == a ? 1.0 : 0.0) - p[k];
                double g = dlp * dlp_dlk;
                // d(-alpha*H)/dl_k = alpha * p_k * (log p_k + H)
                g += cfg.entropy_coef * p[k] * (std::log(std::max(p[k], 1e-300)) + h_i);
                dl[k] = g * inv_steps;
            }
        }
    }

    if (grads) {
        MemoryState dmem = MemoryState::zeros(policy.params().dims.memory_dim);
        for (int t = n_steps - 1; t >= 0; --t) {
            policy.backward(*caches[t], step_grads[t], dmem, *grads);
        }
    }
    return res;
}

void zero_params(PolicyParameters& p) {
    p.for_each([](const std::string&, Mat& t) { t.zero(); });
}

}  // namespace

UpdateStats ppo_update(TorsionPolicy& policy, const std::vector<GraphSpec>& graphs,
                       RolloutBuffer& buffer, const TrainerConfig& config, AdamOptimizer& adam,
                       SplitMix64& rng) {
    UpdateStats stats;
    if (buffer.episodes.empty()) return stats;

    double ret_sum = 0.0;
    for (const auto& ep : buffer.episodes) {
        for (double r : ep.rewards) ret_sum += r;
    }
    stats.mean_return = ret_sum / static_cast<double>(buffer.episodes.size());

    // pre-update objective snapshot
    {
        double surr = 0.0, vloss = 0.0, ent = 0.0;
        long long steps = 0;
        for (const auto& ep : buffer.episodes) {
            const auto r = episode_pass(policy, graphs[ep.molecule_index], ep, config, 1.0, nullptr);
            surr += r.surrogate;
            vloss += r.value_loss;
            ent += r.entropy;
            steps += ep.steps();
        }
        if (steps > 0) {
            stats.surrogate = surr / static_cast<double>(steps);
            stats.value_loss = vloss / static_cast<double>(steps);
            stats.entropy = ent / static_cast<double>(steps);
        }
    }

    const Vec snapshot = policy.params().flatten();
    PolicyParameters grads = PolicyParameters::zeros(policy.params().dims);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::vector<std::size_t> order(buffer.episodes.size());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i) {  // Fisher-Yates
            std::swap(order[i - 1], order[rng.next_below(i)]);
        }

        std::size_t pos = 0;
        while (pos < order.size()) {
            // group whole episodes until the step quota is reached
            long long steps_in_batch = 0;
            std::size_t end = pos;
            while (end < order.size() && steps_in_batch < config.minibatch_steps) {
                steps_in_batch += buffer.episodes[order[end]].steps();
                ++end;
            }
            if (steps_in_batch == 0) break;

            zero_params(grads);
            const double inv_steps = 1.0 / static_cast<double>(steps_in_batch);
            bool finite = true;
            for (std::size_t k = pos; k < end; ++k) {
                const EpisodeRollout& ep = buffer.episodes[order[k]];
                const auto r =
                    episode_pass(policy, graphs[ep.molecule_index], ep, config, inv_steps, &grads);
                finite = finite && r.finite;
            }
            Vec flat_grads = grads.flatten();
            for (double g : flat_grads) finite = finite && std::isfinite(g);
            if (!finite) {
                PolicyParameters restored = policy.params();
                restored.unflatten(snapshot);
                policy.params() = restored;
                stats.aborted = true;
                return stats;
            }
            Vec flat = policy.params().flatten();
            adam.step(flat, flat_grads);
            policy.params().unflatten(flat);
            pos = end;
        }
    }
    return stats;
}

CurriculumResult run_curriculum(std::vector<CurriculumMolecule> molecules,
                                const ForceFieldParams& ff, EnvConfig env_config,
                                const TrainerConfig& config, const PolicyDims& dims) {
    if (molecules.empty()) throw ConfigError("curriculum requires at least one molecule");
    std::stable_sort(molecules.begin(), molecules.end(),
                     [](const CurriculumMolecule& a, const CurriculumMolecule& b) {
                         return std::pair(a.molecule.torsion_count(), a.molecule.atom_count()) <
                                std::pair(b.molecule.torsion_count(), b.molecule.atom_count());
                     });

    std::vector<GraphSpec> graphs;
    std::vector<ConformerEnv> envs;
    graphs.reserve(molecules.size());
    for (const CurriculumMolecule& cm : molecules) {
        graphs.push_back(build_graph_spec(cm.molecule));
        EnvConfig ec = env_config;
        ec.horizon = cm.horizon;
        ec.normalizers = cm.normalizers;
        envs.emplace_back(cm.molecule, ff, ec);
    }

    TorsionPolicy policy(PolicyParameters::init(dims, config.seed));
    AdamOptimizer adam(policy.params().parameter_count(), config.learning_rate);
    SplitMix64 rng = SplitMix64(config.seed).fork(0x7ea1);

    CsvWriter metrics({"total_steps", "round", "active_molecules", "molecule", "mean_return",
                       "mean_episode_score", "entropy", "surrogate", "value_loss"});

    CurriculumResult result{policy.params(), {}, "", {}};
    const int total = static_cast<int>(molecules.size());
    int round = 1;
    int active = 1;
    long long total_steps = 0;
    long long round_steps = 0;
    long long episode_counter = 0;
    std::deque<double> hardest_window;

    auto round_done = [&](bool threshold) {
        result.rounds.push_back(CurriculumRoundInfo{round, active, total_steps, threshold});
        result.checkpoints.emplace_back("round_" + std::to_string(round), policy.params());
    };

    while (total_steps < config.max_total_steps) {
        // Algorithm step 1: sample a molecule from the active set
        const int mol_idx = static_cast<int>(rng.next_below(active));

        RolloutBuffer buffer;
        for (int e = 0; e < config.episodes_per_update; ++e) {
            const std::uint64_t ep_seed =
                SplitMix64(config.seed).fork(0xe9150de).next_u64() + 2654435761ULL * episode_counter;
            ++episode_counter;
            EpisodeRollout ep = collect_episode(policy, envs[mol_idx], graphs[mol_idx], ep_seed);
            ep.molecule_index = mol_idx;
            if (mol_idx == active - 1) {  // hardest active molecule
                hardest_window.push_back(ep.episode_score);
                if (hardest_window.size() > static_cast<std::size_t>(config.rolling_window)) {
                    hardest_window.pop_front();
                }
            }
            buffer.episodes.push_back(std::move(ep));
        }
        const long long batch_steps = buffer.total_steps();
        total_steps += batch_steps;
        round_steps += batch_steps;

        compute_advantages(buffer, config.gamma, config.lambda);
        const UpdateStats stats = ppo_update(policy, graphs, buffer, config, adam, rng);

        double mean_score = 0.0;
        for (const auto& ep : buffer.episodes) mean_score += ep.episode_score;
        mean_score /= static_cast<double>(buffer.episodes.size());
        metrics.add_row({std::to_string(total_steps), std::to_string(round),
                         std::to_string(active), molecules[mol_idx].molecule.name,
                         format_double(stats.mean_return), format_double(mean_score),
                         format_double(stats.entropy), format_double(stats.surrogate),
                         format_double(stats.value_loss)});

        // threshold rule: rolling mean episode score of the hardest active
        // molecule vs its normalizer-run score (== 1 after normalization)
        bool threshold = false;
        if (hardest_window.size() >= static_cast<std::size_t>(config.rolling_window)) {
            double mean = 0.0;
            for (double s : hardest_window) mean += s;
            mean /= static_cast<double>(hardest_window.size());
            threshold = mean >= config.threshold_ratio;
        }
        const bool capped = round_steps >= config.round_step_cap;
        if (threshold || capped) {
            round_done(threshold);
            if (active >= total) break;  //ássets exhausted: training complete
            active = std::min(2 * active, total);
            ++round;
            round_steps = 0;
            hardest_window.clear();
        }
    }
    if (result.rounds.empty() || result.rounds.back().round != round) {
        round_done(false);
    }

    result.final_params = policy.params();
    result.metrics_csv = metrics.to_string();
    return result;
}

TransferResult transfer_experiment(int max_t, const std::vector<std::uint64_t>& seeds,
                                   long long steps_per_stage, const ForceFieldParams& ff,
                                   EnvConfig env_config, TrainerConfig config,
                                   const PolicyDims& dims,
                                   const std::optional<std::filesystem::path>& cache_dir) {
    TransferResult result;

    std::vector<MoleculeGraph> molecules;
    std::vector<GraphSpec> graphs;
    std::vector<GibbsNormalizers> norms;
    std::vector<double> oracle_energy;
    for (int t = 1; t <= max_t; ++t) {
        MoleculeGraph mol = t_branched_alkane(t);
        EnergyModel model(mol, ff);
        norms.push_back(collect_normalizers(
            model, std::min<long long>(200, static_cast<long long>(std::pow(6.0, t))),
            env_config.normalizers.tau, env_config.prune_threshold));
        oracle_energy.push_back(oracle_best(model, 6, cache_dir).second);
        graphs.push_back(build_graph_spec(mol));
        molecules.push_back(std::move(mol));
    }

    // cells indexed by (stage, target)
    std::vector<std::vector<TransferCell>> cells(max_t, std::vector<TransferCell>(max_t));
    for (int s = 0; s < max_t; ++s) {
        for (int y = 0; y < max_t; ++y) {
            cells[s][y].stage = s + 1;
            cells[s][y].target = y + 1;
        }
    }

    for (std::uint64_t seed : seeds) {
        TrainerConfig cfg = config;
        cfg.seed = seed;
        TorsionPolicy policy(PolicyParameters::init(dims, seed));
        AdamOptimizer adam(policy.params().parameter_count(), cfg.learning_rate);
        SplitMix64 rng = SplitMix64(seed).fork(0x7ea1);
        long long episode_counter = 0;

        for (int stage = 0; stage < max_t; ++stage) {
            EnvConfig ec = env_config;
            ec.horizon = auto_horizon(molecules[stage].torsion_count());
            ec.normalizers = norms[stage];
            ConformerEnv env(molecules[stage], ff, ec);

            long long stage_steps = 0;
            while (stage_steps < steps_per_stage) {
                RolloutBuffer buffer;
                for (int e = 0; e < cfg.episodes_per_update; ++e) {
                    const std::uint64_t ep_seed =
                        SplitMix64(seed).fork(0x5eed).next_u64() + 2654435761ULL * episode_counter;
                    ++episode_counter;
                    EpisodeRollout ep = collect_episode(policy, env, graphs[stage], ep_seed);
                    ep.molecule_index = stage;
                    buffer.episodes.push_back(std::move(ep));
                }
                stage_steps += buffer.total_steps();
                compute_advantages(buffer, cfg.gamma, cfg.lambda);
                ppo_update(policy, graphs, buffer, cfg, adam, rng);
            }

            // greedy evaluation on every molecule
            for (int y = 0; y < max_t; ++y) {
                EnvConfig ey = env_config;
                ey.horizon = auto_horizon(molecules[y].torsion_count());
                ey.normalizers = norms[y];
                ConformerEnv env_y(molecules[y], ff, ey);
                EpisodeRollout ep =
                    collect_episode(policy, env_y, graphs[y], 0xe7a1 + static_cast<std::uint64_t>(y),
                                    /*greedy=*/true);
                double best = std::numeric_limits<double>::infinity();
                for (const ConformerRecord& rec : env_y.step_records()) {
                    best = std::min(best, rec.energy);
                }
                cells[stage][y].gaps.push_back(best - oracle_energy[y]);
            }
        }
    }

    CsvWriter csv({"stage", "target", "mean_gap_kcal", "stderr", "n_seeds"});
    for (int s = 0; s < max_t; ++s) {
        for (int y = 0; y < max_t; ++y) {
            const MeanStderr ms = mean_stderr(cells[s][y].gaps);
            csv.add_row({std::to_string(s + 1), std::to_string(y + 1), format_double(ms.mean),
                         format_double(ms.stderr_), std::to_string(cells[s][y].gaps.size())});
            result.cells.push_back(cells[s][y]);
        }
    }
    result.csv = csv.to_string();
    return result;
}

}  // namespace tw
