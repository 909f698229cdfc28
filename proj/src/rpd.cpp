#include "rcrl/rpd.hpp"

#include <cmath>
#include <limits>

namespace rcrl {

namespace {

double concat_norm(double dual, const Mat& primal) {
    double acc = dual * dual;
    for (double x : primal.a) acc += x * x;
    return std::sqrt(acc);
}

}  // namespace

IterateEval evaluate_iterate(const TabularCMDP& mdp, const ContaminationSet& set,
                             const SoftmaxPolicy& policy, double sigma,
                             const FixedPointOptions& opts) {
    IterateEval ev;
    GradientResult gr = smoothed_gradient(mdp, set, policy, sigma, SignalRef::reward(), opts);
    GradientResult gc = smoothed_gradient(mdp, set, policy, sigma, SignalRef::utility(0), opts);
    ev.v_r_rho = gr.value_rho;
    ev.v_c_rho = gc.value_rho;
    ev.grad_r = std::move(gr.grad_theta);
    ev.grad_c = std::move(gc.grad_theta);
    return ev;
}

double lagrangian_value(const TabularCMDP& mdp, const ContaminationSet& set,
                        const SoftmaxPolicy& policy, double multiplier, double sigma,
                        const FixedPointOptions& opts) {
    if (multiplier < 0.0) throw std::invalid_argument("lagrangian_value: multiplier must be nonnegative");
    RobustValues vr = smoothed_robust_value(set, mdp, policy, sigma, SignalRef::reward(), opts);
    RobustValues vc = smoothed_robust_value(set, mdp, policy, sigma, SignalRef::utility(0), opts);
    return dot(mdp.rho, vr.v) + multiplier * (dot(mdp.rho, vc.v) - mdp.thresholds.at(0));
}

namespace {

DualIterate apply_update(const DualIterate& it, const StepSchedule& schedule,
                         const IterateEval& ev, double b) {
    int t = it.step;
    double beta = schedule.beta(t);
    double alpha = schedule.alpha(t);
    double b_t = schedule.shrink(t);

    DualIterate next = it;
    double lam_pre = it.multiplier - (ev.v_c_rho - b) / beta - (b_t / beta) * it.multiplier;
    next.multiplier = clamp_multiplier(lam_pre, schedule.lambda_max);
    for (int s = 0; s < next.policy.theta.rows; ++s)
        for (int a = 0; a < next.policy.theta.cols; ++a)
            next.policy.theta(s, a) =
                it.policy.theta(s, a) +
                (ev.grad_r(s, a) + next.multiplier * ev.grad_c(s, a)) / alpha;
    next.step = t + 1;
    return next;
}

}  // namespace

DualIterate rpd_step(const DualIterate& it, const StepSchedule& schedule, const TabularCMDP& mdp,
                     const ContaminationSet& set, double sigma, const FixedPointOptions& opts) {
    IterateEval ev = evaluate_iterate(mdp, set, it.policy, sigma, opts);
    return apply_update(it, schedule, ev, mdp.thresholds.at(0));
}

GradMapping gradient_mapping_from_eval(const DualIterate& it, const StepSchedule& schedule,
                                       const IterateEval& eval, double b) {
    int t = it.step;
    double beta = schedule.beta(t);
    double grad_lambda = eval.v_c_rho - b;  // d/d lambda of the Lagrangian

    GradMapping g;
    g.dual = beta * (it.multiplier -
                     clamp_multiplier(it.multiplier - grad_lambda / beta, schedule.lambda_max));
    // Unconstrained theta: the mapping collapses to -grad_theta of the Lagrangian.
    g.primal = Mat(eval.grad_r.rows, eval.grad_r.cols);
    for (int s = 0; s < g.primal.rows; ++s)
        for (int a = 0; a < g.primal.cols; ++a)
            g.primal(s, a) = -(eval.grad_r(s, a) + it.multiplier * eval.grad_c(s, a));
    g.norm = concat_norm(g.dual, g.primal);
    return g;
}

GradMapping gradient_mapping(const DualIterate& it, const StepSchedule& schedule,
                             const TabularCMDP& mdp, const ContaminationSet& set, double sigma,
                             const FixedPointOptions& opts) {
    IterateEval ev = evaluate_iterate(mdp, set, it.policy, sigma, opts);
    return gradient_mapping_from_eval(it, schedule, ev, mdp.thresholds.at(0));
}

RpdResult rpd_run(const TabularCMDP& mdp, const ContaminationSet& set, double sigma,
                  const StepSchedule& schedule, int steps, const DualIterate& init,
                  const FixedPointOptions& opts) {
    if (steps < 1) throw std::invalid_argument("rpd_run: steps must be >= 1");
    double b = mdp.thresholds.at(0);

    RpdResult res;
    res.trace.reserve(steps);
    res.policy_logits.reserve(steps);
    DualIterate cur = init;
    double best_norm = std::numeric_limits<double>::infinity();
    for (int i = 0; i < steps; ++i) {
        IterateEval ev = evaluate_iterate(mdp, set, cur.policy, sigma, opts);
        GradMapping g = gradient_mapping_from_eval(cur, schedule, ev, b);
        RunRecord rec;
        rec.t = cur.step + 1;  // logged 1-based
        rec.lambda = cur.multiplier;
        rec.v_sigma_r_rho = ev.v_r_rho;
        rec.v_sigma_c_rho = ev.v_c_rho;
        rec.grad_mapping_norm = g.norm;
        rec.alpha_t = schedule.alpha(cur.step);
        rec.beta_t = schedule.beta(cur.step);
        rec.b_t = schedule.shrink(cur.step);
        res.trace.push_back(rec);
        res.policy_logits.push_back(cur.policy.theta);
        if (g.norm < best_norm) {
            best_norm = g.norm;
            res.best = cur;
            res.best_index = i;
        }
        cur = apply_update(cur, schedule, ev, b);
    }
    return res;
}

FeasibilityReport check_feasibility(const DualIterate& best, const StepSchedule& schedule,
                                    const TabularCMDP& mdp, const ContaminationSet& set,
                                    double sigma, double epsilon, const FixedPointOptions& opts) {
    RobustValues vc = smoothed_robust_value(set, mdp, best.policy, sigma, SignalRef::utility(0), opts);
    double slack = dot(mdp.rho, vc.v) - mdp.thresholds.at(0);
    FeasibilityReport rep;
    rep.slack = slack;
    rep.epsilon = epsilon;
    rep.within_two_epsilon = slack >= -2.0 * epsilon;
    double beta = schedule.beta(best.step);
    rep.pre_projection_multiplier = best.multiplier - slack / beta;
    rep.multiplier_hypothesis =
        rep.pre_projection_multiplier >= 0.0 && rep.pre_projection_multiplier < schedule.lambda_max;
    return rep;
}

}  // namespace rcrl
