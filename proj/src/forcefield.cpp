#include "tw/forcefield.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

#include <json.hpp>

#include "tw/errors.hpp"
#include "tw/io_util.hpp"

namespace tw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* kDefaultParamsJson = R"json({
  "comment": "united-atom alkane parameters (OPLS-style torsion Fourier + LJ)",
  "torsion": {
    "C-C-C-C": { "v": [1.411, -0.271, 3.145], "gamma": [0.0, 0.0, 0.0] }
  },
  "lj": {
    "C-C": { "epsilon": 0.066, "sigma": 3.5 },
    "O-O": { "epsilon": 0.17, "sigma": 3.12 }
  },
  "min_nonbonded_path": 4
}
)json";

std::string pair_key(Element a, Element b) {
    std::string x = element_symbol(a);
    std::string y = element_symbol(b);
    if (y < x) std::swap(x, y);
    return x + "-" + y;
}

std::string quad_key(Element a, Element b, Element c, Element d) {
    std::string fwd = std::string(element_symbol(a)) + "-" + element_symbol(b) + "-" +
                      element_symbol(c) + "-" + element_symbol(d);
    std::string rev = std::string(element_symbol(d)) + "-" + element_symbol(c) + "-" +
                      element_symbol(b) + "-" + element_symbol(a);
    return std::min(fwd, rev);
}

// All-pairs topological bond distances (BFS per atom; molecules are small).
std::vector<std::vector<int>> bond_distances(const MoleculeGraph& g) {
    const int n = g.atom_count();
    auto adj = g.adjacency();
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
    for (int s = 0; s < n; ++s) {
        std::queue<int> q;
        dist[s][s] = 0;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[u]) {
                if (dist[s][v] < 0) {
                    dist[s][v] = dist[s][u] + 1;
                    q.push(v);
                }
            }
        }
    }
    return dist;
}

}  // namespace

// ---------------------------------------------------------------------------
// parameters
// ---------------------------------------------------------------------------

ForceFieldParams ForceFieldParams::defaults() { return from_json(kDefaultParamsJson); }

ForceFieldParams ForceFieldParams::from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    ForceFieldParams p;
    for (const auto& [key, entry] : j.at("torsion").items()) {
        TorsionCoeffs tc;
        for (int k = 0; k < 3; ++k) {
            tc.v[k] = entry.at("v").at(k).get<double>();
            tc.gamma[k] = entry.at("gamma").at(k).get<double>();
        }
        p.torsion_table_.emplace_back(key, tc);
    }
    for (const auto& [key, entry] : j.at("lj").items()) {
        LJPair lj;
        lj.epsilon = entry.at("epsilon").get<double>();
        lj.sigma = entry.at("sigma").get<double>();
        if (lj.epsilon <= 0.0 || lj.sigma <= 0.0) {
            throw ConfigError("lj." + key + ": epsilon and sigma must be positive");
        }
        p.lj_table_.emplace_back(key, lj);
    }
    p.min_nonbonded_path_ = j.value("min_nonbonded_path", 4);
    const auto by_key = [](const auto& a, const auto& b) { return a.first < b.first; };
    std::sort(p.torsion_table_.begin(), p.torsion_table_.end(), by_key);
    std::sort(p.lj_table_.begin(), p.lj_table_.end(), by_key);
    return p;
}

std::string ForceFieldParams::to_json() const {
    nlohmann::ordered_json j;
    for (const auto& [key, tc] : torsion_table_) {
        j["torsion"][key] = {{"v", tc.v}, {"gamma", tc.gamma}};
    }
    for (const auto& [key, lj] : lj_table_) {
        j["lj"][key] = {{"epsilon", lj.epsilon}, {"sigma", lj.sigma}};
    }
    j["min_nonbonded_path"] = min_nonbonded_path_;
    return j.dump(2) + "\n";
}

TorsionCoeffs ForceFieldParams::torsion_for(Element a, Element b, Element c, Element d) const {
    const std::string key = quad_key(a, b, c, d);
    for (const auto& [k, tc] : torsion_table_) {
        if (k == key) return tc;
    }
    throw ConfigError("no torsion parameters for class " + key);
}

LJPair ForceFieldParams::lj_for(Element a, Element b) const {
    const std::string key = pair_key(a, b);
    for (const auto& [k, lj] : lj_table_) {
        if (k == key) return lj;
    }
    // Lorentz-Berthelot combination from the same-element entries
    LJPair aa, bb;
    bool have_a = false, have_b = false;
    for (const auto& [k, lj] : lj_table_) {
        if (k == pair_key(a, a)) { aa = lj; have_a = true; }
        if (k == pair_key(b, b)) { bb = lj; have_b = true; }
    }
    if (!have_a || !have_b) throw ConfigError("no LJ parameters for pair " + key);
    return LJPair{std::sqrt(aa.epsilon * bb.epsilon), 0.5 * (aa.sigma + bb.sigma)};
}

std::uint64_t ForceFieldParams::content_hash() const { return fnv1a64(to_json()); }

// ---------------------------------------------------------------------------
// energy model
// ---------------------------------------------------------------------------

EnergyModel::EnergyModel(MoleculeGraph g, ForceFieldParams params)
    : molecule_(std::move(g)), params_(std::move(params)) {
    for (const TorsionQuad& t : molecule_.torsions) {
        torsion_coeffs_.push_back(params_.torsion_for(
            molecule_.atoms[t.b1].element, molecule_.atoms[t.b2].element,
            molecule_.atoms[t.b3].element, molecule_.atoms[t.b4].element));
    }

    const auto dist = bond_distances(molecule_);
    const int n = molecule_.atom_count();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (dist[i][j] >= params_.min_nonbonded_path()) {
                const LJPair lj =
                    params_.lj_for(molecule_.atoms[i].element, molecule_.atoms[j].element);
                pairs_.push_back(Pair{i, j, lj.epsilon, lj.sigma});
            }
        }
    }

    for (const TorsionQuad& t : molecule_.torsions) {
        std::vector<char> mask(n, 0);
        for (int atom : fragment_atoms(molecule_, t.b2, t.b3)) mask[atom] = 1;
        mask[t.b3] = 0;  // on the rotation axis
        moves_.push_back(std::move(mask));
    }
}

EnergyReport EnergyModel::energy(const TorsionVector& theta) const {
    EnergyReport report;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const TorsionCoeffs& tc = torsion_coeffs_[i];
        for (int k = 0; k < 3; ++k) {
            report.torsional +=
                0.5 * tc.v[k] * (1.0 + std::cos((k + 1) * theta[i] - tc.gamma[k]));
        }
    }

    if (!pairs_.empty()) {
        const Coordinates pos = build_coordinates(molecule_, theta);
        for (const Pair& p : pairs_) {
            const double r = (pos[p.i] - pos[p.j]).norm();
            if (r < kStericLimit) {
                report.nonbonded = kInf;
                report.total = kInf;
                report.finite = false;
                return report;
            }
            const double sr6 = std::pow(p.sigma / r, 6);
            report.nonbonded += 4.0 * p.epsilon * (sr6 * sr6 - sr6);
        }
    }
    report.total = report.torsional + report.nonbonded;
    return report;
}

std::vector<double> EnergyModel::gradient(const TorsionVector& theta) const {
    const std::size_t nt = theta.size();
    std::vector<double> grad(nt, 0.0);

    for (std::size_t i = 0; i < nt; ++i) {
        const TorsionCoeffs& tc = torsion_coeffs_[i];
        for (int k = 0; k < 3; ++k) {
            grad[i] -= 0.5 * tc.v[k] * (k + 1) * std::sin((k + 1) * theta[i] - tc.gamma[k]);
        }
    }
    if (pairs_.empty()) return grad;

    const Coordinates pos = build_coordinates(molecule_, theta);
    for (const Pair& p : pairs_) {
        const Vec3 rij = pos[p.i] - pos[p.j];
        const double r = rij.norm();
        if (r < kStericLimit) throw NonFiniteEnergy("steric overlap in gradient evaluation");
        const double sr6 = std::pow(p.sigma / r, 6);
        const double dEdr = 4.0 * p.epsilon * (-12.0 * sr6 * sr6 + 6.0 * sr6) / r;

        for (std::size_t k = 0; k < nt; ++k) {
            const bool mi = moves_[k][p.i];
            const bool mj = moves_[k][p.j];
            if (mi == mj) continue;  // both rigid or both rotating: distance fixed
            const TorsionQuad& t = molecule_.torsions[k];
            const Vec3 axis = (pos[t.b3] - pos[t.b2]).normalized();
            const Vec3 pivot = pos[t.b3];
            // moving atom velocity under a unit rate of this torsion angle
            const int moving = mj ? p.j : p.i;
            const int fixed = mj ? p.i : p.j;
            const Vec3 vel = axis.cross(pos[moving] - pivot);
            const double drdtheta = vel.dot(pos[moving] - pos[fixed]) / r;
            grad[k] += dEdr * drdtheta;
        }
    }
    return grad;
}

MinimizeResult EnergyModel::minimize(const TorsionVector& theta0) const {
    constexpr int kMaxIter = 200;
    constexpr int kMemory = 10;
    constexpr double kGradTol = 1e-6;
    constexpr double kArmijo = 1e-4;

    MinimizeResult result;
    result.theta = theta0;
    result.energy = energy(theta0);
    if (!result.energy.finite) {
        throw NonFiniteEnergy("minimize requires a finite starting energy");
    }
    const std::size_t n = theta0.size();
    if (n == 0) {
        result.converged = true;
        return result;
    }

    TorsionVector x = theta0;
    double fx = result.energy.total;
    std::vector<double> g = gradient(x);

    TorsionVector best_x = x;
    double best_f = fx;

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    auto inf_norm = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::abs(a));
        return m;
    };

    for (int iter = 0; iter < kMaxIter; ++iter) {
        result.iterations = iter;
        if (inf_norm(g) <= kGradTol) {
            result.converged = true;
            break;
        }

        // two-loop recursion
        std::vector<double> d(g);
        std::vector<double> alpha(s_hist.size());
        for (int h = static_cast<int>(s_hist.size()) - 1; h >= 0; --h) {
            double a = 0.0;
            for (std::size_t i = 0; i < n; ++i) a += s_hist[h][i] * d[i];
            a *= rho_hist[h];
            alpha[h] = a;
            for (std::size_t i = 0; i < n; ++i) d[i] -= a * y_hist[h][i];
        }
        if (!s_hist.empty()) {
            double sy = 0.0, yy = 0.0;
            const auto& s = s_hist.back();
            const auto& y = y_hist.back();
            for (std::size_t i = 0; i < n; ++i) {
                sy += s[i] * y[i];
                yy += y[i] * y[i];
            }
            const double scale = sy / yy;
            for (double& v : d) v *= scale;
        }
        for (std::size_t h = 0; h < s_hist.size(); ++h) {
            double b = 0.0;
            for (std::size_t i = 0; i < n; ++i) b += y_hist[h][i] * d[i];
            b *= rho_hist[h];
            for (std::size_t i = 0; i < n; ++i) d[i] += s_hist[h][i] * (alpha[h] - b);
        }
        for (double& v : d) v = -v;

        double gd = 0.0;
        for (std::size_t i = 0; i < n; ++i) gd += g[i] * d[i];
        if (gd >= 0.0) {  // not a descent direction: fall back to steepest descent
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            gd = 0.0;
            for (std::size_t i = 0; i < n; ++i) gd += g[i] * d[i];
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        // backtracking Armijo line search
        double step = 1.0;
        TorsionVector x_new(n);
        double f_new = kInf;
        bool accepted = false;
        while (step > 1e-16) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * d[i];
            const EnergyReport rep = energy(x_new);
            f_new = rep.total;
            if (rep.finite && f_new <= fx + kArmijo * step * gd) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            result.line_search_failed = true;
            break;
        }

        std::vector<double> g_new = gradient(x_new);
        std::vector<double> s(n), y(n);
        double sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
            sy += s[i] * y[i];
        }
        if (sy > 1e-12) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > kMemory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        x = std::move(x_new);
        fx = f_new;
        g = std::move(g_new);
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
        }
    }

    if (fx <= best_f) {
        best_f = fx;
        best_x = x;
    }
    for (double& a : best_x) a = wrap_angle(a);
    result.theta = best_x;
    result.energy = energy(best_x);
    return result;
}

// ---------------------------------------------------------------------------
// convenience wrappers
// ---------------------------------------------------------------------------

EnergyReport energy(const MoleculeGraph& g, const TorsionVector& theta,
                    const ForceFieldParams& params) {
    return EnergyModel(g, params).energy(theta);
}

std::vector<double> energy_gradient(const MoleculeGraph& g, const TorsionVector& theta,
                                    const ForceFieldParams& params) {
    return EnergyModel(g, params).gradient(theta);
}

MinimizeResult minimize(const MoleculeGraph& g, const TorsionVector& theta0,
                        const ForceFieldParams& params) {
    return EnergyModel(g, params).minimize(theta0);
}

}  // namespace tw
