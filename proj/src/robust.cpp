#include "rcrl/robust.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rcrl {

ContaminationSet::ContaminationSet(double d) : delta(d) {
    if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("delta must lie in [0,1]");
}

double log_sum_exp(double sigma, std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("log_sum_exp: empty vector");
    if (!(sigma < 0.0)) throw std::invalid_argument("log_sum_exp: sigma must be negative");
    // max_i sigma*v_i = sigma * min v since sigma < 0.
    double vmin = v[0];
    for (double x : v) vmin = std::min(vmin, x);
    double sum = 0.0;
    for (double x : v) sum += std::exp(sigma * (x - vmin));
    return vmin + std::log(sum) / sigma;
}

Vec softmin_weights(double sigma, std::span<const double> v) {
    double vmin = v[0];
    for (double x : v) vmin = std::min(vmin, x);
    Vec w(v.size());
    double sum = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        w[i] = std::exp(sigma * (v[i] - vmin));
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

namespace {

// Shared backup: kernel_term = delta * floor_value + (1-delta) p_sa . v, where
// floor_value is min v (exact) or LSE(sigma, v) (smoothed).
Vec contamination_backup(const ContaminationSet& set, const TabularCMDP& mdp, const Mat& probs,
                         const Mat& table, const Vec& v, double floor_value) {
    Vec out(mdp.n_states, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
        double acc = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
            double support = set.delta * floor_value + (1.0 - set.delta) * dot(mdp.kernel.row(s, a), v);
            acc += probs(s, a) * (table(s, a) + mdp.gamma * support);
        }
        out[s] = acc;
    }
    return out;
}

RobustValues solve_fixed_point(const ContaminationSet& set, const TabularCMDP& mdp,
                               const SoftmaxPolicy& policy, const Mat& table,
                               bool smoothed, double sigma, const FixedPointOptions& opts) {
    Mat probs = policy_probs(policy);
    Vec v(mdp.n_states, 0.0);
    double residual = 0.0;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double floor_value = smoothed ? log_sum_exp(sigma, v)
                                      : *std::min_element(v.begin(), v.end());
        Vec next = contamination_backup(set, mdp, probs, table, v, floor_value);
        residual = sup_norm_diff(next, v);
        v.swap(next);
        if (residual <= opts.tol) break;
    }
    RobustValues rv;
    rv.residual = residual;
    rv.smoothed = smoothed;
    rv.sigma = sigma;
    double floor_value = smoothed ? log_sum_exp(sigma, v)
                                  : *std::min_element(v.begin(), v.end());
    rv.q = Mat(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            rv.q(s, a) = table(s, a) +
                         mdp.gamma * (set.delta * floor_value +
                                      (1.0 - set.delta) * dot(mdp.kernel.row(s, a), v));
    rv.v = std::move(v);
    return rv;
}

}  // namespace

Vec robust_bellman_apply(const ContaminationSet& set, const TabularCMDP& mdp,
                         const SoftmaxPolicy& policy, const Mat& table, const Vec& v) {
    Mat probs = policy_probs(policy);
    return contamination_backup(set, mdp, probs, table, v, *std::min_element(v.begin(), v.end()));
}

Vec smoothed_bellman_apply(const ContaminationSet& set, const TabularCMDP& mdp,
                           const SoftmaxPolicy& policy, const Mat& table, double sigma, const Vec& v) {
    Mat probs = policy_probs(policy);
    return contamination_backup(set, mdp, probs, table, v, log_sum_exp(sigma, v));
}

RobustValues robust_value(const ContaminationSet& set, const TabularCMDP& mdp,
                          const SoftmaxPolicy& policy, SignalRef signal,
                          const FixedPointOptions& opts) {
    return solve_fixed_point(set, mdp, policy, mdp.signal(signal), false, 0.0, opts);
}

RobustValues smoothed_robust_value(const ContaminationSet& set, const TabularCMDP& mdp,
                                   const SoftmaxPolicy& policy, double sigma, SignalRef signal,
                                   const FixedPointOptions& opts) {
    if (!(sigma < 0.0)) throw std::invalid_argument("smoothed_robust_value: sigma must be negative");
    return solve_fixed_point(set, mdp, policy, mdp.signal(signal), true, sigma, opts);
}

std::string RobustValues::to_json_string() const {
    nlohmann::json j;
    j["v"] = v;
    auto rows = nlohmann::json::array();
    for (int r = 0; r < q.rows; ++r) {
        auto row = q.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["q"] = rows;
    j["residual"] = residual;
    j["smoothed"] = smoothed;
    if (smoothed) j["sigma"] = sigma;
    return j.dump(2);
}

Kernel worst_case_kernel(const ContaminationSet& set, const TabularCMDP& mdp, const Vec& v) {
    int s_star = argmin_index(v);
    Kernel k(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            auto src = mdp.kernel.row(s, a);
            auto dst = k.row(s, a);
            for (int s2 = 0; s2 < mdp.n_states; ++s2) dst[s2] = (1.0 - set.delta) * src[s2];
            dst[s_star] += set.delta;
        }
    return k;
}

}  // namespace rcrl
