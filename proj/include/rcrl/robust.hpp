#pragma once

#include <cmath>
#include <span>
#include <string>

#include "rcrl/mdp.hpp"

namespace rcrl {

// delta-contamination uncertainty set around the MDP's centroid kernel:
// each row may be mixed with an arbitrary distribution at weight delta.
struct ContaminationSet {
    double delta = 0.0;

    explicit ContaminationSet(double d);
};

// LSE(sigma, v) = log(sum_i exp(sigma v_i)) / sigma for sigma < 0.
// Lies in [min v - ln(n)/|sigma|, min v]; max-shift stabilized.
double log_sum_exp(double sigma, std::span<const double> v);

// Softmax weights exp(sigma*v_i) / sum_j exp(sigma*v_j), max-shift stabilized.
Vec softmin_weights(double sigma, std::span<const double> v);

// One application of the contamination robust Bellman operator:
// (T v)(s) = sum_a pi(a|s) [ r(s,a) + gamma (delta min v + (1-delta) p_sa . v) ].
Vec robust_bellman_apply(const ContaminationSet& set, const TabularCMDP& mdp,
                         const SoftmaxPolicy& policy, const Mat& table, const Vec& v);

// Same with min v replaced by LSE(sigma, v); still a gamma-contraction.
Vec smoothed_bellman_apply(const ContaminationSet& set, const TabularCMDP& mdp,
                           const SoftmaxPolicy& policy, const Mat& table, double sigma, const Vec& v);

struct RobustValues {
    Vec v;             // [S]
    Mat q;             // [S][A]
    double residual = 0.0;
    bool smoothed = false;
    double sigma = 0.0;  // meaningful only when smoothed

    std::string to_json_string() const;
};

// Fixed point of robust_bellman_apply (Picard iteration from v = 0).
RobustValues robust_value(const ContaminationSet& set, const TabularCMDP& mdp,
                          const SoftmaxPolicy& policy, SignalRef signal,
                          const FixedPointOptions& opts = {});

// Fixed point of smoothed_bellman_apply.
RobustValues smoothed_robust_value(const ContaminationSet& set, const TabularCMDP& mdp,
                                   const SoftmaxPolicy& policy, double sigma, SignalRef signal,
                                   const FixedPointOptions& opts = {});

// Stationary minimizing kernel (1-delta) p_sa + delta e_{s*}, s* = argmin v
// (ties to the lowest index).
Kernel worst_case_kernel(const ContaminationSet& set, const TabularCMDP& mdp, const Vec& v);

// Sup-norm bound on the smoothing error of the fixed point:
// gamma * delta * ln|S| / (|sigma| (1-gamma)).
inline double smoothing_gap_bound(double gamma, double delta, int n_states, double sigma) {
    return gamma * delta * std::log(static_cast<double>(n_states)) / (std::abs(sigma) * (1.0 - gamma));
}

}  // namespace rcrl
