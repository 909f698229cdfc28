#include "rcrl/gradient.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace rcrl {

namespace {

// Factor of (I - gamma (1-delta) P_pi)^T; row s of the inverse of the
// untransposed matrix is solve(e_s).
struct OccupancySolver {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    int n;

    OccupancySolver(const TabularCMDP& mdp, const ContaminationSet& set, const Mat& probs) {
        n = mdp.n_states;
        Mat p_pi = transition_matrix(mdp.kernel, probs);
        double g_eff = mdp.gamma * (1.0 - set.delta);
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m(i, j) = (i == j ? 1.0 : 0.0) - g_eff * p_pi(j, i);
        lu.compute(m);
    }

    Vec solve(const Vec& rhs) const {
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) b(i) = rhs[i];
        Eigen::VectorXd x = lu.solve(b);
        Vec out(n);
        for (int i = 0; i < n; ++i) out[i] = x(i);
        return out;
    }
};

// score(s,a) = sum_b d pi(b|s)/d theta(s,a) * Q(s,b) = pi(a|s) (Q(s,a) - V(s))
// for softmax in closed form.
Mat score_weighted_q(const Mat& probs, const Mat& q, const Vec& v) {
    Mat g(probs.rows, probs.cols);
    for (int s = 0; s < probs.rows; ++s)
        for (int a = 0; a < probs.cols; ++a) g(s, a) = probs(s, a) * (q(s, a) - v[s]);
    return g;
}

Mat assemble(const Vec& coef, const Mat& g) {
    Mat out(g.rows, g.cols);
    for (int s = 0; s < g.rows; ++s)
        for (int a = 0; a < g.cols; ++a) out(s, a) = coef[s] * g(s, a);
    return out;
}

}  // namespace

Mat state_gradient_contribution(const TabularCMDP& mdp, const ContaminationSet& set,
                                const SoftmaxPolicy& policy, double sigma,
                                const RobustValues& values, int start_state) {
    if (static_cast<int>(values.v.size()) != mdp.n_states ||
        values.q.rows != mdp.n_states || values.q.cols != mdp.n_actions)
        throw std::invalid_argument("state_gradient_contribution: value shapes do not match the MDP");
    (void)sigma;
    Mat probs = policy_probs(policy);
    OccupancySolver occ(mdp, set, probs);
    Vec e(mdp.n_states, 0.0);
    e[start_state] = 1.0;
    Vec coef = occ.solve(e);
    return assemble(coef, score_weighted_q(probs, values.q, values.v));
}

GradientResult smoothed_gradient(const TabularCMDP& mdp, const ContaminationSet& set,
                                 const SoftmaxPolicy& policy, double sigma, SignalRef signal,
                                 const FixedPointOptions& opts, bool want_per_state) {
    RobustValues rv = smoothed_robust_value(set, mdp, policy, sigma, signal, opts);
    Mat probs = policy_probs(policy);
    OccupancySolver occ(mdp, set, probs);
    Mat g = score_weighted_q(probs, rv.q, rv.v);

    Vec w = softmin_weights(sigma, rv.v);
    Vec u_rho = occ.solve(mdp.rho);
    Vec u_w = occ.solve(w);
    double lse_weight = mdp.gamma * set.delta / (1.0 - mdp.gamma);
    Vec coef(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) coef[s] = u_rho[s] + lse_weight * u_w[s];

    GradientResult res;
    res.grad_theta = assemble(coef, g);
    res.value_rho = dot(mdp.rho, rv.v);
    if (want_per_state) {
        std::vector<Mat> per_state;
        per_state.reserve(mdp.n_states);
        for (int s = 0; s < mdp.n_states; ++s) {
            Vec e(mdp.n_states, 0.0);
            e[s] = 1.0;
            per_state.push_back(assemble(occ.solve(e), g));
        }
        res.per_state_terms = std::move(per_state);
    }
    return res;
}

Mat central_difference_gradient(const std::function<double(const SoftmaxPolicy&)>& f,
                                const SoftmaxPolicy& policy, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("central_difference_gradient: h must be positive");
    SoftmaxPolicy probe = policy;
    Mat grad(policy.theta.rows, policy.theta.cols);
    for (int s = 0; s < policy.theta.rows; ++s)
        for (int a = 0; a < policy.theta.cols; ++a) {
            double orig = probe.theta(s, a);
            probe.theta(s, a) = orig + h;
            double up = f(probe);
            probe.theta(s, a) = orig - h;
            double down = f(probe);
            probe.theta(s, a) = orig;
            grad(s, a) = (up - down) / (2.0 * h);
        }
    return grad;
}

Mat finite_diff_gradient(const TabularCMDP& mdp, const ContaminationSet& set,
                         const SoftmaxPolicy& policy, double sigma, SignalRef signal, double h,
                         const FixedPointOptions& opts) {
    auto value_at = [&](const SoftmaxPolicy& p) {
        RobustValues rv = smoothed_robust_value(set, mdp, p, sigma, signal, opts);
        return dot(mdp.rho, rv.v);
    };
    return central_difference_gradient(value_at, policy, h);
}

}  // namespace rcrl
