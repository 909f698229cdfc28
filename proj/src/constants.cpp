#include "rcrl/constants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rcrl/rng.hpp"

namespace rcrl {

ScheduleConstants compute_constants(int n_states, int n_actions, double gamma, double delta,
                                    double sigma, const PolicyClassConstants& pc) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("compute_constants: gamma must lie in [0,1)");
    const double k = pc.lipschitz, l = pc.smoothness;
    const double s_abs = std::abs(sigma);
    const double na = n_actions, log_ns = std::log(static_cast<double>(n_states));
    const double one_m_g = 1.0 - gamma;
    const double mix = 1.0 - gamma + gamma * delta;  // 1 - gamma (1-delta)

    ScheduleConstants c;
    c.value_lipschitz = k * na / (one_m_g * one_m_g);
    c.smoothed_value_bound = (1.0 + 2.0 * gamma * delta * log_ns / s_abs) / one_m_g;
    c.value_theta_lipschitz = na * k * c.smoothed_value_bound / one_m_g;
    c.grad_term_lipschitz = (na * c.smoothed_value_bound * l + na * k * c.value_theta_lipschitz) / mix +
                            2.0 * na * na * gamma * (1.0 - delta) * k * k * c.smoothed_value_bound / (mix * mix);
    c.smoothed_grad_lipschitz =
        c.grad_term_lipschitz +
        gamma * delta / one_m_g *
            (std::sqrt(static_cast<double>(n_states)) * c.grad_term_lipschitz +
             2.0 * s_abs * n_states * c.value_theta_lipschitz * k * na * c.smoothed_value_bound / mix);
    return c;
}

double dual_upper_bound(double zeta, double zeta_prime, double smoothed_value_bound, double gamma) {
    if (!(zeta > 0.0) || !(zeta_prime > 0.0))
        throw std::invalid_argument("dual_upper_bound: slack constants must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("dual_upper_bound: gamma must lie in [0,1)");
    return std::max(2.0 * smoothed_value_bound / zeta_prime, 2.0 / (zeta * (1.0 - gamma)));
}

SlaterEstimate estimate_slater(const TabularCMDP& mdp, const ContaminationSet& set, double sigma,
                               int n_policies, uint64_t seed, int utility_index) {
    Rng rng(seed);
    double b = mdp.thresholds.at(utility_index);
    double best = -1e300;
    for (int i = 0; i < n_policies; ++i) {
        SoftmaxPolicy pol;
        pol.theta = Mat(mdp.n_states, mdp.n_actions);
        for (double& x : pol.theta.a) x = rng.normal();
        RobustValues rv = robust_value(set, mdp, pol, SignalRef::utility(utility_index));
        best = std::max(best, dot(mdp.rho, rv.v) - b);
    }
    SlaterEstimate est;
    est.zeta = std::max(best, 0.05);
    double gap = smoothing_gap_bound(mdp.gamma, set.delta, mdp.n_states, sigma);
    est.zeta_prime = std::max(est.zeta - gap, est.zeta / 2.0);
    return est;
}

}  // namespace rcrl
