#include "tw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "tw/errors.hpp"
#include "tw/io_util.hpp"

namespace tw {

namespace {

constexpr double kPi = 3.14159265358979323846;

double circular_distance(double a, double b) {
    const double d = std::abs(wrap_angle(a) - wrap_angle(b));
    return std::min(d, kTwoPi - d);
}

// Shift a circular sample so the largest angular gap straddles the period
// boundary; Pearson correlation is then taken on the shifted linear values.
std::vector<double> maximal_gap_shift(const std::vector<double>& angles) {
    std::vector<double> sorted;
    sorted.reserve(angles.size());
    for (double a : angles) sorted.push_back(wrap_angle(a));
    std::sort(sorted.begin(), sorted.end());

    const std::size_t n = sorted.size();
    double best_gap = kTwoPi - sorted[n - 1] + sorted[0];  // wrap-around gap
    double cut = wrap_angle(sorted[n - 1] + 0.5 * best_gap);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double gap = sorted[i + 1] - sorted[i];
        if (gap > best_gap) {
            best_gap = gap;
            cut = sorted[i] + 0.5 * gap;
        }
    }

    std::vector<double> shifted;
    shifted.reserve(angles.size());
    for (double a : angles) shifted.push_back(wrap_angle(wrap_angle(a) - cut));
    return shifted;
}

}  // namespace

std::string GibbsNormalizers::to_json() const {
    nlohmann::ordered_json j;
    j["E0"] = e0;
    j["Z0"] = z0;
    j["tau"] = tau;
    return j.dump(2) + "\n";
}

GibbsNormalizers GibbsNormalizers::from_json(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    GibbsNormalizers n;
    n.e0 = j.at("E0").get<double>();
    n.z0 = j.at("Z0").get<double>();
    n.tau = j.at("tau").get<double>();
    if (n.z0 <= 0.0) throw ConfigError("Z0 must be positive");
    if (n.tau <= 0.0) throw ConfigError("tau must be positive");
    return n;
}

double gibbs_measure(double energy, const GibbsNormalizers& norm) {
    if (std::isinf(energy)) return 0.0;
    return std::exp(-(energy - norm.e0) / (kBoltzmannKcal * norm.tau)) / norm.z0;
}

double gibbs_score(const std::vector<ConformerRecord>& records) {
    double sum = 0.0;
    for (const ConformerRecord& r : records) {
        if (r.accepted) sum += r.gibbs;
    }
    return sum;
}

double tfd(const TorsionVector& a, const TorsionVector& b, const std::vector<double>& weights) {
    if (a.size() != b.size() || a.size() != weights.size()) {
        throw LengthMismatch("tfd: torsion vectors and weights must share length");
    }
    if (a.empty()) return 0.0;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += weights[i] * circular_distance(a[i], b[i]) / kPi;
        den += weights[i];
    }
    if (den <= 0.0) throw Error("tfd: weights must not all be zero");
    return num / den;
}

double tfd(const TorsionVector& a, const TorsionVector& b) {
    return tfd(a, b, std::vector<double>(a.size(), 1.0));
}

std::vector<ConformerRecord> dedup_by_energy(std::vector<ConformerRecord> records, double m) {
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&records](std::size_t a, std::size_t b) {
        return records[a].energy < records[b].energy;
    });

    std::vector<const TorsionVector*> kept;
    for (std::size_t idx : order) {
        ConformerRecord& r = records[idx];
        bool unique = true;
        for (const TorsionVector* prev : kept) {
            if (tfd(*prev, r.theta) < m) {
                unique = false;
                break;
            }
        }
        r.accepted = unique;
        if (unique) kept.push_back(&r.theta);
    }
    return records;
}

std::vector<std::vector<double>> correlation_matrix(const std::vector<TorsionVector>& samples) {
    if (samples.size() < 3) throw Error("correlation_matrix requires at least 3 samples");
    const std::size_t n = samples.front().size();
    for (const auto& s : samples) {
        if (s.size() != n) throw LengthMismatch("correlation_matrix: ragged samples");
    }
    const std::size_t s = samples.size();

    std::vector<std::vector<double>> series(n);
    std::vector<double> mean(n, 0.0), sd(n, 0.0);
    std::vector<bool> degenerate(n, false);
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<double> raw(s);
        for (std::size_t k = 0; k < s; ++k) raw[k] = samples[k][t];
        series[t] = maximal_gap_shift(raw);
        for (double v : series[t]) mean[t] += v;
        mean[t] /= static_cast<double>(s);
        for (double v : series[t]) sd[t] += (v - mean[t]) * (v - mean[t]);
        sd[t] = std::sqrt(sd[t] / static_cast<double>(s));
        degenerate[t] = sd[t] < 1e-12;
    }

    std::vector<std::vector<double>> rho(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        rho[i][i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (degenerate[i] || degenerate[j]) continue;
            double cov = 0.0;
            for (std::size_t k = 0; k < s; ++k) {
                cov += (series[i][k] - mean[i]) * (series[j][k] - mean[j]);
            }
            cov /= static_cast<double>(s);
            double r = cov / (sd[i] * sd[j]);
            if (std::abs(r) < 0.01) r = 0.0;  // display rule from the correlation figure
            rho[i][j] = r;
            rho[j][i] = r;
        }
    }
    return rho;
}

std::string correlation_to_csv(const std::vector<std::vector<double>>& matrix) {
    std::vector<std::string> header;
    header.reserve(matrix.size() + 1);
    header.push_back("torsion");
    for (std::size_t i = 0; i < matrix.size(); ++i) header.push_back("t" + std::to_string(i));
    CsvWriter csv(header);
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        std::vector<std::string> row;
        row.push_back("t" + std::to_string(i));
        for (double v : matrix[i]) row.push_back(format_double(v));
        csv.add_row(std::move(row));
    }
    return csv.to_string();
}

}  // namespace tw
