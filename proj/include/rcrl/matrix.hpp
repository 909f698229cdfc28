#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace rcrl {

using Vec = std::vector<double>;

// Dense row-major matrix, just enough for tabular [S][A] tables.
struct Mat {
    int rows = 0;
    int cols = 0;
    Vec a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return a[static_cast<size_t>(r) * cols + c];
    }
    double operator()(int r, int c) const {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return a[static_cast<size_t>(r) * cols + c];
    }
    std::span<const double> row(int r) const {
        return {a.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }
    std::span<double> row(int r) {
        return {a.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }
};

// Transition kernel over [S][A][S'], row-major in (s, a).
struct Kernel {
    int n_states = 0;
    int n_actions = 0;
    Vec p;

    Kernel() = default;
    Kernel(int s, int a) : n_states(s), n_actions(a), p(static_cast<size_t>(s) * a * s, 0.0) {}

    size_t offset(int s, int a) const {
        return (static_cast<size_t>(s) * n_actions + a) * n_states;
    }
    std::span<const double> row(int s, int a) const {
        return {p.data() + offset(s, a), static_cast<size_t>(n_states)};
    }
    std::span<double> row(int s, int a) {
        return {p.data() + offset(s, a), static_cast<size_t>(n_states)};
    }
};

inline double dot(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

inline double sup_norm_diff(const Vec& x, const Vec& y) {
    assert(x.size() == y.size());
    double m = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double d = x[i] > y[i] ? x[i] - y[i] : y[i] - x[i];
        if (d > m) m = d;
    }
    return m;
}

// Lowest index wins on ties, so downstream argmin-dependent results are reproducible.
inline int argmin_index(std::span<const double> v) {
    assert(!v.empty());
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[i] < v[best]) best = i;
    return best;
}

}  // namespace rcrl
