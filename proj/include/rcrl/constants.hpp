#pragma once

#include <cstdint>

#include "rcrl/robust.hpp"

namespace rcrl {

// Lipschitz/smoothness constants of the policy class: per-(s,a) bounds on
// ||grad pi(a|s)|| and ||hess pi(a|s)||. Softmax defaults: the gradient norm
// maximum 1/(2 sqrt 2) is attained at a two-point half/half row; 1.0 is a safe
// Hessian bound.
struct PolicyClassConstants {
    double lipschitz = 0.35355339059327373;
    double smoothness = 1.0;
};

// Closed-form constants of the smoothed robust setting. Terms that the source
// expressions scale by the (negative) smoothing parameter are evaluated with
// |sigma| so every entry stays a positive upper bound.
struct ScheduleConstants {
    double value_lipschitz = 0.0;          // k|A|/(1-gamma)^2
    double smoothed_value_bound = 0.0;     // (1 + 2 gamma delta ln|S|/|sigma|)/(1-gamma)
    double value_theta_lipschitz = 0.0;    // |A| k * smoothed_value_bound / (1-gamma)
    double grad_term_lipschitz = 0.0;      // per-state gradient-term Lipschitz bound
    double smoothed_grad_lipschitz = 0.0;  // gradient Lipschitz bound incl. LSE correction
};

ScheduleConstants compute_constants(int n_states, int n_actions, double gamma, double delta,
                                    double sigma, const PolicyClassConstants& pc = {});

// Dual-variable cap: max{ 2 C_sigma / zeta', 2 / (zeta (1-gamma)) }.
double dual_upper_bound(double zeta, double zeta_prime, double smoothed_value_bound, double gamma);

// Empirical Slater slack: max over random softmax policies of the robust
// utility value minus the threshold, floored at 0.05; the smoothed slack
// subtracts the smoothing gap and is floored at half the exact slack.
struct SlaterEstimate {
    double zeta = 0.05;
    double zeta_prime = 0.025;
};

SlaterEstimate estimate_slater(const TabularCMDP& mdp, const ContaminationSet& set, double sigma,
                               int n_policies = 64, uint64_t seed = 2024,
                               int utility_index = 0);

}  // namespace rcrl
