#pragma once

#include <cstdint>
#include <vector>

#include "rcrl/rng.hpp"
#include "rcrl/robust.hpp"

namespace rcrl {

// TD step size: a / (t + b)^0.6 or a constant. The default rule is
// 1 / (1 + t / (4 |S||A|))^0.6: only one Q entry updates per step, so the
// decay clock runs at the per-entry visit rate (with a short burn-in plateau)
// rather than the global step count, which would leave a large bootstrap bias
// at realistic sample sizes on anything but tiny MDPs.
struct TdStepSize {
    enum class Kind { polynomial, constant } kind = Kind::polynomial;
    double a = 0.0;  // must be set explicitly or via a factory
    double b = 1.0;

    double at(long t) const {
        if (kind == Kind::constant) return a;
        return a / std::pow(static_cast<double>(t) + b, 0.6);
    }

    static TdStepSize polynomial_default(int n_state_actions) {
        TdStepSize s;
        s.kind = Kind::polynomial;
        s.b = 4.0 * static_cast<double>(n_state_actions);
        s.a = std::pow(s.b, 0.6);
        return s;
    }
    static TdStepSize constant(double value) {
        TdStepSize s;
        s.kind = Kind::constant;
        s.a = value;
        return s;
    }
};

struct TdConfig {
    long inner_steps = 10000;
    TdStepSize step;
    double sigma = -10.0;
    uint64_t seed = 0;
    long restart_period = 1000;  // restart the episode from rho every this many steps
    bool check_bounds = false;   // assert per-step boundedness of the Q table (debug)
};

struct Transition {
    int state = 0;
    int action = 0;
    double signal = 0.0;
    int next_state = 0;
};

// On-policy trajectory through the centroid kernel; restarts from rho every
// restart_period steps.
std::vector<Transition> simulate_centroid(const TabularCMDP& mdp, const Mat& probs,
                                          const Mat& table, long steps, Rng& rng,
                                          long restart_period);

// Sample-based estimate of the smoothed robust Q function for a fixed policy:
// online TD with the contamination target
//   signal + gamma (1-delta) V(s') + gamma delta LSE(sigma, V)
// where V is recomputed from the current Q table each step. Only the visited
// (s,a) entry updates per step.
Mat robust_td_q(const TabularCMDP& mdp, const SoftmaxPolicy& policy, const ContaminationSet& set,
                const TdConfig& config, SignalRef signal);

// rho-weighted scalar value of a Q estimate under the policy.
double td_value_estimate(const Mat& q, const Mat& probs, const Vec& rho);

}  // namespace rcrl
