#include "rcrl/td.hpp"

#include <stdexcept>

namespace rcrl {

std::vector<Transition> simulate_centroid(const TabularCMDP& mdp, const Mat& probs,
                                          const Mat& table, long steps, Rng& rng,
                                          long restart_period) {
    std::vector<Transition> out;
    out.reserve(static_cast<size_t>(steps));
    int s = rng.categorical(mdp.rho);
    for (long t = 0; t < steps; ++t) {
        if (restart_period > 0 && t > 0 && t % restart_period == 0) s = rng.categorical(mdp.rho);
        int a = rng.categorical(probs.row(s));
        int s2 = rng.categorical(mdp.kernel.row(s, a));
        out.push_back({s, a, table(s, a), s2});
        s = s2;
    }
    return out;
}

Mat robust_td_q(const TabularCMDP& mdp, const SoftmaxPolicy& policy, const ContaminationSet& set,
                const TdConfig& config, SignalRef signal) {
    if (config.inner_steps < 0) throw std::invalid_argument("robust_td_q: inner_steps must be >= 0");
    if (!(config.sigma < 0.0)) throw std::invalid_argument("robust_td_q: sigma must be negative");
    if (!(config.step.a > 0.0)) throw std::invalid_argument("robust_td_q: step size must be positive");

    const Mat& table = mdp.signal(signal);
    Mat probs = policy_probs(policy);
    Mat q(mdp.n_states, mdp.n_actions, 0.0);

    // V(s) = sum_a pi(a|s) Q(s,a); only the visited state's row changes per
    // step, so the full per-step recomputation reduces to one dot product.
    Vec v(mdp.n_states, 0.0);

    // LSE can undershoot min V by ln|S|/|sigma|; the fixed point inherits that
    // slack scaled by gamma*delta/(1-gamma) on both ends of [0, 1/(1-gamma)].
    const double slack = smoothing_gap_bound(mdp.gamma, set.delta, mdp.n_states, config.sigma);
    const double upper = 1.0 / (1.0 - mdp.gamma) + slack;
    const double lower = -slack;
    Rng rng(config.seed);
    int s = rng.categorical(mdp.rho);
    for (long t = 0; t < config.inner_steps; ++t) {
        if (config.restart_period > 0 && t > 0 && t % config.restart_period == 0)
            s = rng.categorical(mdp.rho);
        int a = rng.categorical(probs.row(s));
        int s2 = rng.categorical(mdp.kernel.row(s, a));
        double lse = log_sum_exp(config.sigma, v);
        double target = table(s, a) + mdp.gamma * (1.0 - set.delta) * v[s2] +
                        mdp.gamma * set.delta * lse;
        double step = config.step.at(t);
        q(s, a) += step * (target - q(s, a));
        v[s] = dot(probs.row(s), q.row(s));
        if (config.check_bounds) {
            if (!(q(s, a) >= lower - 1e-9 && q(s, a) <= upper + 1e-9))
                throw std::runtime_error("robust_td_q: Q estimate left its bound");
        }
        s = s2;
    }
    return q;
}

double td_value_estimate(const Mat& q, const Mat& probs, const Vec& rho) {
    if (q.rows != probs.rows || q.cols != probs.cols || static_cast<int>(rho.size()) != q.rows)
        throw std::invalid_argument("td_value_estimate: shape mismatch");
    double acc = 0.0;
    for (int s = 0; s < q.rows; ++s) acc += rho[s] * dot(probs.row(s), q.row(s));
    return acc;
}

}  // namespace rcrl
