#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tw/chem.hpp"
#include "tw/geometry.hpp"
#include "tw/rng.hpp"
#include "tw/tensor.hpp"

namespace tw {

inline constexpr int kActionBuckets = 6;
inline constexpr int kNodeFeatureDim = 5;  // element one-hot (2) + position (3)
inline constexpr int kEdgeFeatureDim = 6;  // order one-hot (4) + conjugated + ringed

// Network sizes. Desk-scale defaults train in minutes on a CPU; paper_scale()
// restores the published sizes with the architecture unchanged.
struct PolicyDims {
    int node_dim = 16;       // M
    int memory_dim = 32;     // G
    int message_steps = 3;   // S
    int pooling_passes = 3;  // P
    int head_hidden = 32;

    static PolicyDims paper_scale() { return PolicyDims{128, 256, 6, 6, 64}; }
};

struct GruParams {
    Mat wz, uz, bz;
    Mat wr, ur, br;
    Mat wn, un, bn;
};

// Packed-gate LSTM cell (gate order i, f, g, o).
struct LstmParams {
    Mat wx, wh, b;
};

struct PolicyParameters {
    PolicyDims dims;
    Mat edge_w, edge_b;        // edge features -> M*M message matrix
    GruParams node_update;     // message (M) x hidden (M)
    LstmParams pooling;        // input 2M, hidden M
    LstmParams memory;         // input 2M, hidden G
    Mat head_w1, head_b1;      // 4M+G -> hidden
    Mat head_w2, head_b2;      // hidden -> 6 logits
    Mat value_w, value_b;      // G -> 1

    static PolicyParameters zeros(const PolicyDims& dims);
    // uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases
    static PolicyParameters init(const PolicyDims& dims, std::uint64_t seed);

    void for_each(const std::function<void(const std::string&, Mat&)>& fn);
    void for_each(const std::function<void(const std::string&, const Mat&)>& fn) const;
    std::size_t parameter_count() const;

    Vec flatten() const;
    void unflatten(const Vec& flat);

    std::string to_json() const;  // versioned checkpoint with shape manifest
    static PolicyParameters from_json(const std::string& json_text);
};

// Static graph description consumed by the network.
struct GraphSpec {
    int n_atoms = 0;
    std::vector<std::pair<int, int>> bonds;
    std::vector<std::array<double, kEdgeFeatureDim>> bond_features;
    std::vector<TorsionQuad> torsions;
};

GraphSpec build_graph_spec(const MoleculeGraph& g);

// Table-3-style node features from pose-normalized coordinates, resized to
// the node embedding width (zero-padded; truncated when M < 5).
std::vector<Vec> node_features(const MoleculeGraph& g, const Coordinates& coords, int node_dim);

struct MemoryState {
    Vec h, c;
    static MemoryState zeros(int memory_dim) {
        return MemoryState{Vec(memory_dim, 0.0), Vec(memory_dim, 0.0)};
    }
};

struct PolicyOutput {
    std::vector<Vec> logits;  // per torsion, 6
    std::vector<Vec> probs;
    double value = 0.0;
    MemoryState memory;       // post-step recurrent state
};

using TorsionActionView = std::vector<int>;  // bucket indices, 1-based

struct SampledAction {
    std::vector<int> buckets;
    double log_prob = 0.0;
};

// Gradient seeds for one step's outputs; backward threads memory gradients
// across steps (backpropagation through time).
struct StepOutputGrad {
    std::vector<Vec> dlogits;
    double dvalue = 0.0;
};

class TorsionPolicy {
public:
    explicit TorsionPolicy(PolicyParameters params) : params_(std::move(params)) {}

    const PolicyParameters& params() const { return params_; }
    PolicyParameters& params() { return params_; }

    struct StepCache;  // forward activations retained for backward

    PolicyOutput forward(const GraphSpec& graph, const std::vector<Vec>& features,
                         const MemoryState& memory_in,
                         std::shared_ptr<StepCache>* cache = nullptr) const;

    // Accumulates parameter gradients for one step; dmem_out is the gradient
    // arriving at this step's memory output and is replaced by the gradient
    // for the previous step's memory output.
    void backward(const StepCache& cache, const StepOutputGrad& grad, MemoryState& dmem_out,
                  PolicyParameters& grads) const;

    static SampledAction sample_action(const PolicyOutput& out, SplitMix64& rng);
    static SampledAction greedy_action(const PolicyOutput& out);
    static double log_prob_of(const PolicyOutput& out, const std::vector<int>& buckets);
    static double entropy(const PolicyOutput& out);

private:
    PolicyParameters params_;
};

}  // namespace tw
