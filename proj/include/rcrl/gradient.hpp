#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rcrl/robust.hpp"

namespace rcrl {

struct GradientResult {
    Mat grad_theta;     // [S][A], gradient of the rho-weighted smoothed robust value
    double value_rho = 0.0;
    std::optional<std::vector<Mat>> per_state_terms;  // diagnostic: contribution term per start state
};

// Per-start-state gradient contribution: the occupancy-weighted sum of
// grad pi * Q_sigma, taken under the centroid kernel with effective discount
// gamma*(1-delta) (the discount the smoothed fixed-point recursion induces;
// normalization 1/(1-gamma+gamma*delta) folds into the occupancy solve).
Mat state_gradient_contribution(const TabularCMDP& mdp, const ContaminationSet& set,
                                const SoftmaxPolicy& policy, double sigma,
                                const RobustValues& values, int start_state);

// Exact gradient of the smoothed robust value at rho: the per-state
// contribution plus the softmin-weighted correction from differentiating the
// LSE term, assembled as the rho-weighted combination over start states.
GradientResult smoothed_gradient(const TabularCMDP& mdp, const ContaminationSet& set,
                                 const SoftmaxPolicy& policy, double sigma, SignalRef signal,
                                 const FixedPointOptions& opts = {}, bool want_per_state = false);

// Coordinate-wise central differences of an arbitrary scalar function of the
// policy logits.
Mat central_difference_gradient(const std::function<double(const SoftmaxPolicy&)>& f,
                                const SoftmaxPolicy& policy, double h);

// Central differences of the rho-weighted smoothed robust value (oracle for
// smoothed_gradient).
Mat finite_diff_gradient(const TabularCMDP& mdp, const ContaminationSet& set,
                         const SoftmaxPolicy& policy, double sigma, SignalRef signal, double h,
                         const FixedPointOptions& opts = {});

}  // namespace rcrl
