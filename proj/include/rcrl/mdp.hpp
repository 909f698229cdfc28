#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rcrl/matrix.hpp"

namespace rcrl {

// Selects which per-(s,a) signal a value computation runs on.
struct SignalRef {
    enum class Kind { reward, utility } kind = Kind::reward;
    int index = 0;

    static SignalRef reward() { return {Kind::reward, 0}; }
    static SignalRef utility(int i = 0) { return {Kind::utility, i}; }
};

// Finite constrained MDP with a centroid transition kernel, reward in [0,1],
// m >= 1 utility signals in [0,1], discount, initial distribution and
// per-utility thresholds.
struct TabularCMDP {
    int n_states = 0;
    int n_actions = 0;
    Kernel kernel;
    Mat reward;
    std::vector<Mat> utilities;
    double gamma = 0.95;
    Vec rho;
    Vec thresholds;

    // Throws std::invalid_argument on shape/stochasticity violations.
    // unit_range=false skips the [0,1] signal-range check (used by fixtures
    // that carry raw reward scales).
    void validate(bool unit_range = true) const;

    const Mat& signal(SignalRef ref) const;

    std::string to_json_string() const;
    static TabularCMDP from_json_string(const std::string& text);
};

struct SoftmaxPolicy {
    Mat theta;  // [S][A] logits, unbounded

    static SoftmaxPolicy uniform(int n_states, int n_actions) {
        SoftmaxPolicy p;
        p.theta = Mat(n_states, n_actions, 0.0);
        return p;
    }
};

// Row-stabilized softmax of the logits; each row sums to 1.
Mat policy_probs(const SoftmaxPolicy& policy);

// State-to-state transition matrix P_pi(s, s') under the given kernel/action
// probabilities.
Mat transition_matrix(const Kernel& kernel, const Mat& probs);

struct FixedPointOptions {
    double tol = 1e-10;    // sup-norm residual
    int max_sweeps = 10000;
};

// Throws std::invalid_argument if a kernel row is not a distribution.
void check_stochastic(const Kernel& kernel, double tol = 1e-9);

// Policy evaluation under an explicit kernel: fixed point of the non-robust
// Bellman operator for `table`, solved by Picard iteration from v = 0.
// residual_out, when given, receives the final sup-norm residual.
Vec evaluate_policy(const TabularCMDP& mdp, const Kernel& kernel, const SoftmaxPolicy& policy,
                    const Mat& table, const FixedPointOptions& opts = {},
                    double* residual_out = nullptr);

// Discounted state-action occupancy of the policy under `kernel` from the
// `start` distribution. Normalized: entries sum to 1.
struct Visitation {
    Mat d;  // [S][A]
};

Visitation state_action_visitation(const TabularCMDP& mdp, const Kernel& kernel,
                                   const SoftmaxPolicy& policy, const Vec& start);

// Discounted state occupancy (1-gamma_eff) * sum_t gamma_eff^t P(S_t = s),
// solved densely for |S||A| <= 4096, else by truncated power iteration with
// tail bound gamma^T/(1-gamma) <= 1e-10.
Vec state_visitation(const Mat& p_pi, const Vec& start, double gamma_eff, int n_actions);

}  // namespace rcrl
