#include "rcrl/online.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>

namespace rcrl {

const char* baseline_name(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::robust_rpd: return "robust_rpd";
        case BaselineKind::heuristic_pd: return "heuristic_pd";
        case BaselineKind::nonrobust_pd: return "nonrobust_pd";
    }
    return "unknown";
}

namespace {

// Gradient assembly from a TD Q estimate. robust=true follows the smoothed
// robust gradient formula (effective discount gamma(1-delta), LSE correction);
// robust=false is the vanilla policy gradient under the centroid (discount
// gamma, no correction).
Mat gradient_from_q(const TabularCMDP& mdp, double delta, double sigma, const Mat& probs,
                    const Mat& q, bool robust) {
    const int n = mdp.n_states;
    Vec v(n);
    for (int s = 0; s < n; ++s) v[s] = dot(probs.row(s), q.row(s));

    Mat p_pi = transition_matrix(mdp.kernel, probs);
    double g_eff = robust ? mdp.gamma * (1.0 - delta) : mdp.gamma;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = (i == j ? 1.0 : 0.0) - g_eff * p_pi(j, i);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    auto solve = [&](const Vec& rhs) {
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) b(i) = rhs[i];
        Eigen::VectorXd x = lu.solve(b);
        Vec out(n);
        for (int i = 0; i < n; ++i) out[i] = x(i);
        return out;
    };

    Vec coef = solve(mdp.rho);
    if (robust && delta > 0.0) {
        Vec w = softmin_weights(sigma, v);
        Vec u_w = solve(w);
        double lse_weight = mdp.gamma * delta / (1.0 - mdp.gamma);
        for (int s = 0; s < n; ++s) coef[s] += lse_weight * u_w[s];
    }

    Mat grad(n, mdp.n_actions);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            grad(s, a) = coef[s] * probs(s, a) * (q(s, a) - v[s]);
    return grad;
}

struct EngineOptions {
    double td_delta;       // contamination level used by the TD critic
    bool robust_gradient;  // robust vs vanilla gradient assembly
};

OnlineResult run_engine(const TabularCMDP& mdp, const OnlineConfig& config, const EngineOptions& eo) {
    if (!(config.eps_est > 0.0)) throw std::invalid_argument("online run: eps_est must be positive");
    if (!(config.kappa > 0.0)) throw std::invalid_argument("online run: kappa must be positive");
    const double b = mdp.thresholds.at(0);
    ContaminationSet td_set(eo.td_delta);

    TdStepSize td_step = config.td_step;
    if (!(td_step.a > 0.0))
        td_step = TdStepSize::polynomial_default(mdp.n_states * mdp.n_actions);

    OnlineResult res;
    res.trace.reserve(config.outer_steps);
    res.policy_logits.reserve(config.outer_steps);

    DualIterate cur;
    cur.policy = SoftmaxPolicy::uniform(mdp.n_states, mdp.n_actions);
    cur.multiplier = 0.0;
    Rng root(config.seed);
    for (int t = 0; t < config.outer_steps; ++t) {
        long inner = config.inner_steps(t);
        TdConfig tdc;
        tdc.inner_steps = inner;
        tdc.step = td_step;
        tdc.sigma = config.sigma;
        tdc.restart_period = config.restart_period;

        tdc.seed = root.child(2 * t).seed();
        Mat q_r = robust_td_q(mdp, cur.policy, td_set, tdc, SignalRef::reward());
        tdc.seed = root.child(2 * t + 1).seed();
        Mat q_c = robust_td_q(mdp, cur.policy, td_set, tdc, SignalRef::utility(0));

        Mat probs = policy_probs(cur.policy);
        IterateEval ev;
        ev.v_r_rho = td_value_estimate(q_r, probs, mdp.rho);
        ev.v_c_rho = td_value_estimate(q_c, probs, mdp.rho);
        ev.grad_r = gradient_from_q(mdp, eo.td_delta, config.sigma, probs, q_r, eo.robust_gradient);
        ev.grad_c = gradient_from_q(mdp, eo.td_delta, config.sigma, probs, q_c, eo.robust_gradient);

        GradMapping g = gradient_mapping_from_eval(cur, config.schedule, ev, b);
        RunRecord rec;
        rec.t = t + 1;
        rec.lambda = cur.multiplier;
        rec.v_sigma_r_rho = ev.v_r_rho;
        rec.v_sigma_c_rho = ev.v_c_rho;
        rec.grad_mapping_norm = g.norm;
        rec.alpha_t = config.schedule.alpha(t);
        rec.beta_t = config.schedule.beta(t);
        rec.b_t = config.schedule.shrink(t);
        res.trace.push_back(rec);
        res.policy_logits.push_back(cur.policy.theta);

        // Same update shape as the exact loop: dual first, then primal with
        // the updated multiplier.
        double beta = config.schedule.beta(t);
        double alpha = config.schedule.alpha(t);
        double b_t = config.schedule.shrink(t);
        double lam_pre = cur.multiplier - (ev.v_c_rho - b) / beta - (b_t / beta) * cur.multiplier;
        cur.multiplier = clamp_multiplier(lam_pre, config.schedule.lambda_max);
        for (int s = 0; s < mdp.n_states; ++s)
            for (int a = 0; a < mdp.n_actions; ++a)
                cur.policy.theta(s, a) += (ev.grad_r(s, a) + cur.multiplier * ev.grad_c(s, a)) / alpha;
        cur.step = t + 1;
    }
    res.final_iterate = cur;
    return res;
}

}  // namespace

OnlineResult online_rpd_run(const TabularCMDP& mdp, const ContaminationSet& set,
                            const OnlineConfig& config) {
    return run_engine(mdp, config, {set.delta, true});
}

OnlineResult heuristic_pd_run(const TabularCMDP& mdp, const ContaminationSet& set,
                              const OnlineConfig& config) {
    return run_engine(mdp, config, {set.delta, false});
}

OnlineResult nonrobust_pd_run(const TabularCMDP& mdp, const OnlineConfig& config) {
    return run_engine(mdp, config, {0.0, false});
}

OnlineResult run_baseline(BaselineKind kind, const TabularCMDP& mdp, const ContaminationSet& set,
                          const OnlineConfig& config) {
    switch (kind) {
        case BaselineKind::robust_rpd: return online_rpd_run(mdp, set, config);
        case BaselineKind::heuristic_pd: return heuristic_pd_run(mdp, set, config);
        case BaselineKind::nonrobust_pd: return nonrobust_pd_run(mdp, config);
    }
    throw std::invalid_argument("run_baseline: unknown kind");
}

namespace {

double percentile(std::vector<double> xs, double p) {
    std::sort(xs.begin(), xs.end());
    if (xs.size() == 1) return xs[0];
    double pos = p * static_cast<double>(xs.size() - 1);
    size_t lo = static_cast<size_t>(pos);
    size_t hi = std::min(lo + 1, xs.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

}  // namespace

std::vector<EvalRow> evaluate_trace(const std::vector<Mat>& policy_logits,
                                    const std::vector<int>& iterate_ids,
                                    const std::string& method, const TabularCMDP& mdp,
                                    const ContaminationSet& set, double sigma, int n_reps,
                                    long sample_size, uint64_t seed, int stride) {
    if (n_reps < 2) throw std::invalid_argument("evaluate_trace: n_reps must be >= 2");
    if (policy_logits.size() != iterate_ids.size())
        throw std::invalid_argument("evaluate_trace: ids/policies length mismatch");
    std::vector<EvalRow> rows;
    Rng root(seed);
    for (size_t i = 0; i < policy_logits.size(); ++i) {
        bool last = i + 1 == policy_logits.size();
        if (!last && stride > 1 && (i % static_cast<size_t>(stride)) != 0) continue;
        SoftmaxPolicy pol;
        pol.theta = policy_logits[i];
        Mat probs = policy_probs(pol);

        std::vector<double> est_r, est_c;
        est_r.reserve(n_reps);
        est_c.reserve(n_reps);
        for (int rep = 0; rep < n_reps; ++rep) {
            TdConfig tdc;
            tdc.inner_steps = sample_size;
            tdc.step = TdStepSize::polynomial_default(mdp.n_states * mdp.n_actions);
            tdc.sigma = sigma;
            tdc.seed = root.child(i * 1000 + 2 * rep).seed();
            Mat q_r = robust_td_q(mdp, pol, set, tdc, SignalRef::reward());
            tdc.seed = root.child(i * 1000 + 2 * rep + 1).seed();
            Mat q_c = robust_td_q(mdp, pol, set, tdc, SignalRef::utility(0));
            est_r.push_back(td_value_estimate(q_r, probs, mdp.rho));
            est_c.push_back(td_value_estimate(q_c, probs, mdp.rho));
        }
        RobustValues exact_r = robust_value(set, mdp, pol, SignalRef::reward());
        RobustValues exact_c = robust_value(set, mdp, pol, SignalRef::utility(0));

        auto make_row = [&](const char* metric, const std::vector<double>& est, const RobustValues& exact) {
            EvalRow row;
            row.iterate = iterate_ids[i];
            row.method = method;
            row.metric = metric;
            double sum = 0.0;
            for (double x : est) sum += x;
            row.mean = sum / static_cast<double>(est.size());
            row.p5 = percentile(est, 0.05);
            row.p95 = percentile(est, 0.95);
            row.exact = dot(mdp.rho, exact.v);
            return row;
        };
        rows.push_back(make_row("Vr", est_r, exact_r));
        rows.push_back(make_row("Vc", est_c, exact_c));
    }
    return rows;
}

}  // namespace rcrl
