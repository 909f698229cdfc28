#pragma once

#include "rcrl/mdp.hpp"
#include "rcrl/rng.hpp"

namespace rcrl::testing {

inline TabularCMDP random_mdp(uint64_t seed, int n_states, int n_actions, double gamma) {
    Rng rng(seed);
    TabularCMDP mdp;
    mdp.n_states = n_states;
    mdp.n_actions = n_actions;
    mdp.gamma = gamma;
    mdp.kernel = Kernel(n_states, n_actions);
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) {
            auto row = mdp.kernel.row(s, a);
            double sum = 0.0;
            for (int s2 = 0; s2 < n_states; ++s2) {
                row[s2] = rng.exponential();
                sum += row[s2];
            }
            for (int s2 = 0; s2 < n_states; ++s2) row[s2] /= sum;
        }
    mdp.reward = Mat(n_states, n_actions);
    for (double& x : mdp.reward.a) x = rng.uniform01();
    Mat util(n_states, n_actions);
    for (double& x : util.a) x = rng.uniform01();
    mdp.utilities = {util};
    mdp.rho = Vec(n_states, 1.0 / n_states);
    mdp.thresholds = {0.25 / (1.0 - gamma)};
    mdp.validate();
    return mdp;
}

inline SoftmaxPolicy random_policy(uint64_t seed, int n_states, int n_actions, double scale = 1.0) {
    Rng rng(seed);
    SoftmaxPolicy pol;
    pol.theta = Mat(n_states, n_actions);
    for (double& x : pol.theta.a) x = scale * rng.normal();
    return pol;
}

// The appendix three-state fixture: from state 0, action 0 reaches state 1
// (r=0) and action 1 reaches state 2 (r=2); states 1 and 2 feed back to 0
// with r=1. Raw rewards exceed [0,1] deliberately.
inline TabularCMDP three_state_cycle(double gamma) {
    TabularCMDP mdp;
    mdp.n_states = 3;
    mdp.n_actions = 2;
    mdp.gamma = gamma;
    mdp.kernel = Kernel(3, 2);
    mdp.kernel.row(0, 0)[1] = 1.0;
    mdp.kernel.row(0, 1)[2] = 1.0;
    mdp.kernel.row(1, 0)[0] = 1.0;
    mdp.kernel.row(1, 1)[0] = 1.0;
    mdp.kernel.row(2, 0)[0] = 1.0;
    mdp.kernel.row(2, 1)[0] = 1.0;
    mdp.reward = Mat(3, 2);
    mdp.reward(0, 0) = 0.0;
    mdp.reward(0, 1) = 2.0;
    mdp.reward(1, 0) = mdp.reward(1, 1) = 1.0;
    mdp.reward(2, 0) = mdp.reward(2, 1) = 1.0;
    mdp.utilities = {Mat(3, 2, 0.0)};
    mdp.thresholds = {0.0};
    mdp.rho = {1.0, 0.0, 0.0};
    mdp.validate(false);
    return mdp;
}

// pi(a|0) = p; state 1 pinned to action 0, state 2 pinned to action 1.
inline SoftmaxPolicy three_state_policy(double p) {
    SoftmaxPolicy pol;
    pol.theta = Mat(3, 2);
    if (p >= 1.0) {
        pol.theta(0, 0) = 50.0;
        pol.theta(0, 1) = -50.0;
    } else if (p <= 0.0) {
        pol.theta(0, 0) = -50.0;
        pol.theta(0, 1) = 50.0;
    } else {
        pol.theta(0, 0) = std::log(p);
        pol.theta(0, 1) = std::log(1.0 - p);
    }
    pol.theta(1, 0) = 50.0;
    pol.theta(1, 1) = -50.0;
    pol.theta(2, 0) = -50.0;
    pol.theta(2, 1) = 50.0;
    return pol;
}

}  // namespace rcrl::testing
