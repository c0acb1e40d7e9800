#include "tw/agent.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "tw/errors.hpp"

namespace tw {

namespace {

// ---------------------------------------------------------------------------
// cells
// ---------------------------------------------------------------------------

struct LstmStep {
    Vec pre, i, f, gb, o, c, h;
};

LstmStep lstm_forward(const LstmParams& p, const Vec& x, const Vec& h_prev, const Vec& c_prev) {
    const int hid = p.wh.cols;
    LstmStep s;
    s.pre = Vec(4 * hid, 0.0);
    for (int k = 0; k < 4 * hid; ++k) s.pre[k] = p.b.data[k];
    addmv(p.wx, x, s.pre);
    addmv(p.wh, h_prev, s.pre);
    s.i.resize(hid);
    s.f.resize(hid);
    s.gb.resize(hid);
    s.o.resize(hid);
    s.c.resize(hid);
    s.h.resize(hid);
    for (int k = 0; k < hid; ++k) {
        s.i[k] = sigmoid(s.pre[k]);
        s.f[k] = sigmoid(s.pre[hid + k]);
        s.gb[k] = std::tanh(s.pre[2 * hid + k]);
        s.o[k] = sigmoid(s.pre[3 * hid + k]);
        s.c[k] = s.f[k] * c_prev[k] + s.i[k] * s.gb[k];
        s.h[k] = s.o[k] * std::tanh(s.c[k]);
    }
    return s;
}

void lstm_backward(const LstmParams& p, const LstmStep& s, const Vec& x, const Vec& h_prev,
                   const Vec& c_prev, const Vec& dh, const Vec& dc_in, Vec& dx, Vec& dh_prev,
                   Vec& dc_prev, LstmParams& gp) {
    const int hid = p.wh.cols;
    Vec dpre(4 * hid, 0.0);
    for (int k = 0; k < hid; ++k) {
        const double tc = std::tanh(s.c[k]);
        const double dok = dh[k] * tc;
        const double dck = dc_in[k] + dh[k] * s.o[k] * (1.0 - tc * tc);
        const double dik = dck * s.gb[k];
        const double dfk = dck * c_prev[k];
        const double dgk = dck * s.i[k];
        dc_prev[k] += dck * s.f[k];
        dpre[k] = dik * s.i[k] * (1.0 - s.i[k]);
        dpre[hid + k] = dfk * s.f[k] * (1.0 - s.f[k]);
        dpre[2 * hid + k] = dgk * (1.0 - s.gb[k] * s.gb[k]);
        dpre[3 * hid + k] = dok * s.o[k] * (1.0 - s.o[k]);
    }
    acc_outer(dpre, x, gp.wx);
    acc_outer(dpre, h_prev, gp.wh);
    for (int k = 0; k < 4 * hid; ++k) gp.b.data[k] += dpre[k];
    addmv_t(p.wx, dpre, dx);
    addmv_t(p.wh, dpre, dh_prev);
}

struct GruStep {
    Vec z, r, k, n;
};

// x' = (1-z) o n + z o x,  n = tanh(Wn m + r o (Un x) + bn)
GruStep gru_forward(const GruParams& p, const Vec& m, const Vec& x, Vec& x_out) {
    const int hid = p.uz.cols;
    GruStep s;
    s.z = Vec(hid, 0.0);
    s.r = Vec(hid, 0.0);
    s.k = Vec(hid, 0.0);
    s.n = Vec(hid, 0.0);
    Vec pre_z(p.bz.data), pre_r(p.br.data), pre_n(p.bn.data);
    addmv(p.wz, m, pre_z);
    addmv(p.uz, x, pre_z);
    addmv(p.wr, m, pre_r);
    addmv(p.ur, x, pre_r);
    addmv(p.un, x, s.k);
    addmv(p.wn, m, pre_n);
    x_out.assign(hid, 0.0);
    for (int i = 0; i < hid; ++i) {
        s.z[i] = sigmoid(pre_z[i]);
        s.r[i] = sigmoid(pre_r[i]);
        s.n[i] = std::tanh(pre_n[i] + s.r[i] * s.k[i]);
        x_out[i] = (1.0 - s.z[i]) * s.n[i] + s.z[i] * x[i];
    }
    return s;
}

void gru_backward(const GruParams& p, const GruStep& s, const Vec& m, const Vec& x,
                  const Vec& dx_out, Vec& dm, Vec& dx, GruParams& gp) {
    const int hid = p.uz.cols;
    Vec dpre_z(hid), dpre_r(hid), dpre_n(hid), dk(hid);
    for (int i = 0; i < hid; ++i) {
        const double dz = dx_out[i] * (x[i] - s.n[i]);
        const double dn = dx_out[i] * (1.0 - s.z[i]);
        dx[i] += dx_out[i] * s.z[i];
        dpre_n[i] = dn * (1.0 - s.n[i] * s.n[i]);
        const double dr = dpre_n[i] * s.k[i];
        dk[i] = dpre_n[i] * s.r[i];
        dpre_z[i] = dz * s.z[i] * (1.0 - s.z[i]);
        dpre_r[i] = dr * s.r[i] * (1.0 - s.r[i]);
    }
    acc_outer(dpre_z, m, gp.wz);
    acc_outer(dpre_z, x, gp.uz);
    acc(gp.bz.data, dpre_z);
    addmv_t(p.wz, dpre_z, dm);
    addmv_t(p.uz, dpre_z, dx);

    acc_outer(dpre_r, m, gp.wr);
    acc_outer(dpre_r, x, gp.ur);
    acc(gp.br.data, dpre_r);
    addmv_t(p.wr, dpre_r, dm);
    addmv_t(p.ur, dpre_r, dx);

    acc_outer(dpre_n, m, gp.wn);
    acc(gp.bn.data, dpre_n);
    addmv_t(p.wn, dpre_n, dm);
    acc_outer(dk, x, gp.un);
    addmv_t(p.un, dk, dx);
}

Vec slice(const Vec& v, int begin, int len) {
    return Vec(v.begin() + begin, v.begin() + begin + len);
}

}  // namespace

// ---------------------------------------------------------------------------
// parameters
// ---------------------------------------------------------------------------

PolicyParameters PolicyParameters::zeros(const PolicyDims& d) {
    PolicyParameters p;
    p.dims = d;
    const int m = d.node_dim, g = d.memory_dim, h = d.head_hidden;
    p.edge_w = Mat(m * m, kEdgeFeatureDim);
    p.edge_b = Mat(m * m, 1);
    p.node_update = GruParams{Mat(m, m), Mat(m, m), Mat(m, 1), Mat(m, m), Mat(m, m),
                              Mat(m, 1), Mat(m, m), Mat(m, m), Mat(m, 1)};
    p.pooling = LstmParams{Mat(4 * m, 2 * m), Mat(4 * m, m), Mat(4 * m, 1)};
    p.memory = LstmParams{Mat(4 * g, 2 * m), Mat(4 * g, g), Mat(4 * g, 1)};
    p.head_w1 = Mat(h, 4 * m + g);
    p.head_b1 = Mat(h, 1);
    p.head_w2 = Mat(kActionBuckets, h);
    p.head_b2 = Mat(kActionBuckets, 1);
    p.value_w = Mat(1, g);
    p.value_b = Mat(1, 1);
    return p;
}

PolicyParameters PolicyParameters::init(const PolicyDims& d, std::uint64_t seed) {
    PolicyParameters p = zeros(d);
    SplitMix64 root(seed);
    std::uint64_t tensor_id = 0;
    p.for_each([&](const std::string&, Mat& t) {
        SplitMix64 rng = root.fork(tensor_id++);
        if (t.cols == 1 && t.rows != 1) return;  // biases stay zero
        if (t.rows == 1 && t.cols == 1) return;  // value bias
        const double bound = 1.0 / std::sqrt(static_cast<double>(t.cols));
        for (double& v : t.data) v = (2.0 * rng.next_double() - 1.0) * bound;
    });
    return p;
}

void PolicyParameters::for_each(const std::function<void(const std::string&, Mat&)>& fn) {
    fn("edge_w", edge_w);
    fn("edge_b", edge_b);
    fn("node_wz", node_update.wz);
    fn("node_uz", node_update.uz);
    fn("node_bz", node_update.bz);
    fn("node_wr", node_update.wr);
    fn("node_ur", node_update.ur);
    fn("node_br", node_update.br);
    fn("node_wn", node_update.wn);
    fn("node_un", node_update.un);
    fn("node_bn", node_update.bn);
    fn("pool_wx", pooling.wx);
    fn("pool_wh", pooling.wh);
    fn("pool_b", pooling.b);
    fn("mem_wx", memory.wx);
    fn("mem_wh", memory.wh);
    fn("mem_b", memory.b);
    fn("head_w1", head_w1);
    fn("head_b1", head_b1);
    fn("head_w2", head_w2);
    fn("head_b2", head_b2);
    fn("value_w", value_w);
    fn("value_b", value_b);
}

void PolicyParameters::for_each(
    const std::function<void(const std::string&, const Mat&)>& fn) const {
    const_cast<PolicyParameters*>(this)->for_each(
        [&fn](const std::string& name, Mat& t) { fn(name, t); });
}

std::size_t PolicyParameters::parameter_count() const {
    std::size_t n = 0;
    for_each([&n](const std::string&, const Mat& t) { n += t.size(); });
    return n;
}

Vec PolicyParameters::flatten() const {
    Vec flat;
    flat.reserve(parameter_count());
    for_each([&flat](const std::string&, const Mat& t) {
        flat.insert(flat.end(), t.data.begin(), t.data.end());
    });
    return flat;
}

void PolicyParameters::unflatten(const Vec& flat) {
    std::size_t off = 0;
    for_each([&flat, &off](const std::string&, Mat& t) {
        std::copy(flat.begin() + off, flat.begin() + off + t.size(), t.data.begin());
        off += t.size();
    });
    if (off != flat.size()) throw Error("parameter vector size mismatch");
}

std::string PolicyParameters::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "torsionworks-policy";
    j["version"] = 1;
    j["dims"] = {{"node_dim", dims.node_dim},
                 {"memory_dim", dims.memory_dim},
                 {"message_steps", dims.message_steps},
                 {"pooling_passes", dims.pooling_passes},
                 {"head_hidden", dims.head_hidden}};
    j["tensors"] = nlohmann::ordered_json::array();
    for_each([&j](const std::string& name, const Mat& t) {
        j["tensors"].push_back(
            {{"name", name}, {"rows", t.rows}, {"cols", t.cols}, {"data", t.data}});
    });
    return j.dump() + "\n";
}

PolicyParameters PolicyParameters::from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    if (j.value("format", "") != "torsionworks-policy" || j.value("version", 0) != 1) {
        throw ConfigError("unrecognized policy checkpoint format");
    }
    PolicyDims d;
    d.node_dim = j.at("dims").at("node_dim").get<int>();
    d.memory_dim = j.at("dims").at("memory_dim").get<int>();
    d.message_steps = j.at("dims").at("message_steps").get<int>();
    d.pooling_passes = j.at("dims").at("pooling_passes").get<int>();
    d.head_hidden = j.at("dims").at("head_hidden").get<int>();

    PolicyParameters p = zeros(d);
    std::size_t cursor = 0;
    const auto& tensors = j.at("tensors");
    p.for_each([&](const std::string& name, Mat& t) {
        if (cursor >= tensors.size()) throw ConfigError("checkpoint is missing tensors");
        const auto& jt = tensors.at(cursor++);
        if (jt.at("name").get<std::string>() != name || jt.at("rows").get<int>() != t.rows ||
            jt.at("cols").get<int>() != t.cols) {
            throw ConfigError("checkpoint tensor mismatch at " + name);
        }
        t.data = jt.at("data").get<Vec>();
    });
    return p;
}

// ---------------------------------------------------------------------------
// features
// ---------------------------------------------------------------------------

GraphSpec build_graph_spec(const MoleculeGraph& g) {
    GraphSpec spec;
    spec.n_atoms = g.atom_count();
    for (const Bond& b : g.bonds) {
        spec.bonds.emplace_back(b.i, b.j);
        spec.bond_features.push_back(b.features());
    }
    spec.torsions = g.torsions;
    return spec;
}

std::vector<Vec> node_features(const MoleculeGraph& g, const Coordinates& coords, int node_dim) {
    const NormalizedPose pose = normalize_pose(coords);
    std::vector<Vec> feats(g.atom_count());
    for (int i = 0; i < g.atom_count(); ++i) {
        Vec raw(kNodeFeatureDim, 0.0);
        const auto one_hot = g.atoms[i].one_hot();
        raw[0] = one_hot[0];
        raw[1] = one_hot[1];
        raw[2] = pose.coords[i].x;
        raw[3] = pose.coords[i].y;
        raw[4] = pose.coords[i].z;
        Vec fitted(node_dim, 0.0);
        for (int k = 0; k < std::min(node_dim, kNodeFeatureDim); ++k) fitted[k] = raw[k];
        feats[i] = std::move(fitted);
    }
    return feats;
}

// ---------------------------------------------------------------------------
// forward
// ---------------------------------------------------------------------------

struct TorsionPolicy::StepCache {
    GraphSpec graph;
    std::vector<Vec> features;
    std::vector<Mat> bond_A;                  // per bond, M x M
    std::vector<std::vector<Vec>> x;          // S+1 layers of node states
    std::vector<std::vector<Vec>> msg;        // S layers of message sums
    std::vector<std::vector<GruStep>> gru;    // S x N

    struct Pass {
        Vec qstar_in, h_in, c_in;
        LstmStep lstm;
        Vec scores, att, readout;
    };
    std::vector<Pass> pool;
    Vec y;

    Vec mem_h_in, mem_c_in;
    LstmStep mem;

    struct Head {
        Vec input, h1, logits;
    };
    std::vector<Head> heads;
    Vec g_state;
    double value = 0.0;
};

PolicyOutput TorsionPolicy::forward(const GraphSpec& graph, const std::vector<Vec>& features,
                                    const MemoryState& memory_in,
                                    std::shared_ptr<StepCache>* cache_out) const {
    const PolicyDims& d = params_.dims;
    const int m = d.node_dim;
    const int n = graph.n_atoms;

    auto cache = std::make_shared<StepCache>();
    StepCache& cc = *cache;
    cc.graph = graph;
    cc.features = features;

    // edge-conditioned message matrices (one per bond; features are symmetric)
    cc.bond_A.reserve(graph.bonds.size());
    for (const auto& ef : graph.bond_features) {
        Mat A(m, m);
        const Vec e(ef.begin(), ef.end());
        Vec flat(static_cast<std::size_t>(m) * m, 0.0);
        for (int row = 0; row < m * m; ++row) {
            double acc_v = params_.edge_b.data[row];
            for (int k = 0; k < kEdgeFeatureDim; ++k) {
                acc_v += params_.edge_w.at(row, k) * e[k];
            }
            flat[row] = acc_v;
        }
        A.data = std::move(flat);
        cc.bond_A.push_back(std::move(A));
    }

    // message passing
    cc.x.assign(d.message_steps + 1, features);
    cc.msg.assign(d.message_steps, std::vector<Vec>(n, Vec(m, 0.0)));
    cc.gru.assign(d.message_steps, {});
    for (int t = 0; t < d.message_steps; ++t) {
        auto& msg = cc.msg[t];
        for (std::size_t b = 0; b < graph.bonds.size(); ++b) {
            const auto [i, j] = graph.bonds[b];
            addmv(cc.bond_A[b], cc.x[t][j], msg[i]);
            addmv(cc.bond_A[b], cc.x[t][i], msg[j]);
        }
        cc.gru[t].resize(n);
        for (int i = 0; i < n; ++i) {
            cc.gru[t][i] = gru_forward(params_.node_update, msg[i], cc.x[t][i], cc.x[t + 1][i]);
        }
    }
    const std::vector<Vec>& xs = cc.x[d.message_steps];

    // set-to-set pooling
    Vec qstar(2 * m, 0.0), h(m, 0.0), c(m, 0.0);
    cc.pool.resize(d.pooling_passes);
    for (int p = 0; p < d.pooling_passes; ++p) {
        auto& pass = cc.pool[p];
        pass.qstar_in = qstar;
        pass.h_in = h;
        pass.c_in = c;
        pass.lstm = lstm_forward(params_.pooling, qstar, h, c);
        h = pass.lstm.h;
        c = pass.lstm.c;
        pass.scores.resize(n);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = 0; k < m; ++k) s += xs[i][k] * h[k];
            pass.scores[i] = s;
        }
        pass.att = softmax(pass.scores);
        pass.readout.assign(m, 0.0);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < m; ++k) pass.readout[k] += pass.att[i] * xs[i][k];
        }
        for (int k = 0; k < m; ++k) {
            qstar[k] = h[k];
            qstar[m + k] = pass.readout[k];
        }
    }
    cc.y = qstar;

    // episode memory
    cc.mem_h_in = memory_in.h;
    cc.mem_c_in = memory_in.c;
    cc.mem = lstm_forward(params_.memory, cc.y, memory_in.h, memory_in.c);
    cc.g_state = cc.mem.h;

    PolicyOutput out;
    out.memory = MemoryState{cc.mem.h, cc.mem.c};

    // per-torsion heads
    cc.heads.resize(graph.torsions.size());
    for (std::size_t ti = 0; ti < graph.torsions.size(); ++ti) {
        const TorsionQuad& q = graph.torsions[ti];
        auto& head = cc.heads[ti];
        head.input.clear();
        head.input.reserve(4 * m + d.memory_dim);
        for (int atom : {q.b1, q.b2, q.b3, q.b4}) {
            head.input.insert(head.input.end(), xs[atom].begin(), xs[atom].end());
        }
        head.input.insert(head.input.end(), cc.g_state.begin(), cc.g_state.end());

        Vec pre1(params_.head_b1.data);
        addmv(params_.head_w1, head.input, pre1);
        head.h1.resize(pre1.size());
        for (std::size_t k = 0; k < pre1.size(); ++k) head.h1[k] = std::tanh(pre1[k]);

        head.logits = params_.head_b2.data;
        addmv(params_.head_w2, head.h1, head.logits);

        out.logits.push_back(head.logits);
        out.probs.push_back(softmax(head.logits));
    }

    cc.value = params_.value_b.data[0];
    for (int k = 0; k < d.memory_dim; ++k) cc.value += params_.value_w.at(0, k) * cc.g_state[k];
    out.value = cc.value;

    if (cache_out) *cache_out = std::move(cache);
    return out;
}

// ---------------------------------------------------------------------------
// backward
// ---------------------------------------------------------------------------

void TorsionPolicy::backward(const StepCache& cc, const StepOutputGrad& grad,
                             MemoryState& dmem_out, PolicyParameters& grads) const {
    const PolicyDims& d = params_.dims;
    const int m = d.node_dim;
    const int g_dim = d.memory_dim;
    const int n = cc.graph.n_atoms;

    std::vector<Vec> dxs(n, Vec(m, 0.0));  // gradient at final node embeddings
    Vec dg(g_dim, 0.0);

    // value head
    if (grad.dvalue != 0.0) {
        grads.value_b.data[0] += grad.dvalue;
        for (int k = 0; k < g_dim; ++k) {
            grads.value_w.at(0, k) += grad.dvalue * cc.g_state[k];
            dg[k] += grad.dvalue * params_.value_w.at(0, k);
        }
    }

    // torsion heads
    for (std::size_t ti = 0; ti < cc.heads.size(); ++ti) {
        const Vec& dlogits = grad.dlogits[ti];
        bool nonzero = false;
        for (double v : dlogits) nonzero = nonzero || v != 0.0;
        if (!nonzero) continue;
        const auto& head = cc.heads[ti];

        acc_outer(dlogits, head.h1, grads.head_w2);
        acc(grads.head_b2.data, dlogits);
        Vec dh1(head.h1.size(), 0.0);
        addmv_t(params_.head_w2, dlogits, dh1);
        for (std::size_t k = 0; k < dh1.size(); ++k) {
            dh1[k] *= 1.0 - head.h1[k] * head.h1[k];
        }
        acc_outer(dh1, head.input, grads.head_w1);
        acc(grads.head_b1.data, dh1);
        Vec dinput(head.input.size(), 0.0);
        addmv_t(params_.head_w1, dh1, dinput);

        const TorsionQuad& q = cc.graph.torsions[ti];
        const int atoms[4] = {q.b1, q.b2, q.b3, q.b4};
        for (int a = 0; a < 4; ++a) {
            for (int k = 0; k < m; ++k) dxs[atoms[a]][k] += dinput[a * m + k];
        }
        for (int k = 0; k < g_dim; ++k) dg[k] += dinput[4 * m + k];
    }

    // episode memory cell (BPTT: dmem_out arrives from the next step)
    Vec dy(2 * m, 0.0);
    {
        Vec dh(dmem_out.h);
        acc(dh, dg);
        Vec dh_prev(g_dim, 0.0), dc_prev(g_dim, 0.0);
        lstm_backward(params_.memory, cc.mem, cc.y, cc.mem_h_in, cc.mem_c_in, dh, dmem_out.c, dy,
                      dh_prev, dc_prev, grads.memory);
        dmem_out.h = std::move(dh_prev);
        dmem_out.c = std::move(dc_prev);
    }

    // set-to-set pooling, passes in reverse
    const std::vector<Vec>& xs = cc.x[d.message_steps];
    Vec dqstar = dy;
    Vec dh_carry(m, 0.0), dc_carry(m, 0.0);
    for (int p = d.pooling_passes - 1; p >= 0; --p) {
        const auto& pass = cc.pool[p];
        Vec dq = slice(dqstar, 0, m);
        acc(dq, dh_carry);
        const Vec dr = slice(dqstar, m, m);

        // attention backward: r = sum a_i x_i, a = softmax(x . q)
        Vec da(n, 0.0);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < m; ++k) {
                da[i] += dr[k] * xs[i][k];
                dxs[i][k] += pass.att[i] * dr[k];
            }
        }
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += pass.att[i] * da[i];
        Vec dscores(n);
        for (int i = 0; i < n; ++i) dscores[i] = pass.att[i] * (da[i] - dot);
        const Vec q_vec = pass.lstm.h;
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < m; ++k) {
                dq[k] += dscores[i] * xs[i][k];
                dxs[i][k] += dscores[i] * q_vec[k];
            }
        }

        Vec dx_in(2 * m, 0.0), dh_prev(m, 0.0), dc_prev(m, 0.0);
        lstm_backward(params_.pooling, pass.lstm, pass.qstar_in, pass.h_in, pass.c_in, dq,
                      dc_carry, dx_in, dh_prev, dc_prev, grads.pooling);
        dqstar = std::move(dx_in);
        dh_carry = std::move(dh_prev);
        dc_carry = std::move(dc_prev);
    }
    // dqstar/dh_carry/dc_carry at pass 0 correspond to constant zero inputs

    // message passing backward
    std::vector<Mat> dA(cc.bond_A.size());
    for (std::size_t b = 0; b < dA.size(); ++b) dA[b] = Mat(m, m);
    std::vector<Vec> dx_next = std::move(dxs);
    for (int t = d.message_steps - 1; t >= 0; --t) {
        std::vector<Vec> dmsg(n, Vec(m, 0.0));
        std::vector<Vec> dx_cur(n, Vec(m, 0.0));
        for (int i = 0; i < n; ++i) {
            gru_backward(params_.node_update, cc.gru[t][i], cc.msg[t][i], cc.x[t][i], dx_next[i],
                         dmsg[i], dx_cur[i], grads.node_update);
        }
        for (std::size_t b = 0; b < cc.graph.bonds.size(); ++b) {
            const auto [i, j] = cc.graph.bonds[b];
            addmv_t(cc.bond_A[b], dmsg[i], dx_cur[j]);
            addmv_t(cc.bond_A[b], dmsg[j], dx_cur[i]);
            acc_outer(dmsg[i], cc.x[t][j], dA[b]);
            acc_outer(dmsg[j], cc.x[t][i], dA[b]);
        }
        dx_next = std::move(dx_cur);
    }

    // edge network backward: A = reshape(edge_w e + edge_b)
    for (std::size_t b = 0; b < dA.size(); ++b) {
        const auto& ef = cc.graph.bond_features[b];
        for (int row = 0; row < m * m; ++row) {
            const double gv = dA[b].data[row];
            if (gv == 0.0) continue;
            grads.edge_b.data[row] += gv;
            for (int k = 0; k < kEdgeFeatureDim; ++k) {
                grads.edge_w.at(row, k) += gv * ef[k];
            }
        }
    }
}

// ---------------------------------------------------------------------------
// action utilities
// ---------------------------------------------------------------------------

SampledAction TorsionPolicy::sample_action(const PolicyOutput& out, SplitMix64& rng) {
    SampledAction act;
    for (const Vec& p : out.probs) {
        const double u = rng.next_double();
        double cum = 0.0;
        int chosen = static_cast<int>(p.size()) - 1;
        for (std::size_t k = 0; k < p.size(); ++k) {
            cum += p[k];
            if (u < cum) {
                chosen = static_cast<int>(k);
                break;
            }
        }
        act.buckets.push_back(chosen + 1);
        act.log_prob += std::log(p[chosen]);
    }
    return act;
}

SampledAction TorsionPolicy::greedy_action(const PolicyOutput& out) {
    SampledAction act;
    for (const Vec& p : out.probs) {
        int best = 0;
        for (std::size_t k = 1; k < p.size(); ++k) {
            if (p[k] > p[best]) best = static_cast<int>(k);
        }
        act.buckets.push_back(best + 1);
        act.log_prob += std::log(p[best]);
    }
    return act;
}

double TorsionPolicy::log_prob_of(const PolicyOutput& out, const std::vector<int>& buckets) {
    if (buckets.size() != out.probs.size()) throw LengthMismatch("action/torsion mismatch");
    double lp = 0.0;
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        lp += std::log(out.probs[i][buckets[i] - 1]);
    }
    return lp;
}

double TorsionPolicy::entropy(const PolicyOutput& out) {
    double h = 0.0;
    for (const Vec& p : out.probs) {
        for (double v : p) {
            if (v > 0.0) h -= v * std::log(v);
        }
    }
    return h;
}

}  // namespace tw
