#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace tw {

using Vec = std::vector<double>;

// Dense row-major matrix; biases are stored as single-column matrices so the
// parameter visitors can treat every tensor uniformly.
struct Mat {
    int rows = 0;
    int cols = 0;
    Vec data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return data.size(); }
    void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

// out += W x
inline void addmv(const Mat& W, const Vec& x, Vec& out) {
    for (int r = 0; r < W.rows; ++r) {
        double acc = 0.0;
        const double* row = &W.data[static_cast<std::size_t>(r) * W.cols];
        for (int c = 0; c < W.cols; ++c) acc += row[c] * x[c];
        out[r] += acc;
    }
}

// dx += W^T dy
inline void addmv_t(const Mat& W, const Vec& dy, Vec& dx) {
    for (int r = 0; r < W.rows; ++r) {
        const double g = dy[r];
        if (g == 0.0) continue;
        const double* row = &W.data[static_cast<std::size_t>(r) * W.cols];
        for (int c = 0; c < W.cols; ++c) dx[c] += row[c] * g;
    }
}

// dW += dy x^T
inline void acc_outer(const Vec& dy, const Vec& x, Mat& dW) {
    for (int r = 0; r < dW.rows; ++r) {
        const double g = dy[r];
        if (g == 0.0) continue;
        double* row = &dW.data[static_cast<std::size_t>(r) * dW.cols];
        for (int c = 0; c < dW.cols; ++c) row[c] += g * x[c];
    }
}

inline void acc(Vec& out, const Vec& v) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec softmax(const Vec& logits) {
    double m = logits[0];
    for (double v : logits) m = std::max(m, v);
    Vec p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace tw
