#pragma once

#include <vector>

#include "rcrl/gradient.hpp"
#include "rcrl/schedule.hpp"

namespace rcrl {

struct DualIterate {
    SoftmaxPolicy policy;
    double multiplier = 0.0;  // lambda, kept in [0, lambda_max]
    int step = 0;
};

struct GradMapping {
    double dual = 0.0;   // lambda component
    Mat primal;          // theta component
    double norm = 0.0;   // Euclidean norm of the concatenation
};

struct RunRecord {
    int t = 0;
    double lambda = 0.0;
    double v_sigma_r_rho = 0.0;
    double v_sigma_c_rho = 0.0;
    double grad_mapping_norm = 0.0;
    double alpha_t = 0.0;
    double beta_t = 0.0;
    double b_t = 0.0;
};

// Exact values and gradients of both smoothed robust value functions at one
// iterate; everything the dual and primal updates consume.
struct IterateEval {
    double v_r_rho = 0.0;
    double v_c_rho = 0.0;
    Mat grad_r;
    Mat grad_c;
};

IterateEval evaluate_iterate(const TabularCMDP& mdp, const ContaminationSet& set,
                             const SoftmaxPolicy& policy, double sigma,
                             const FixedPointOptions& opts = {});

// Smoothed Lagrangian V_{sigma,r}(rho) + lambda (V_{sigma,c}(rho) - b).
double lagrangian_value(const TabularCMDP& mdp, const ContaminationSet& set,
                        const SoftmaxPolicy& policy, double multiplier, double sigma,
                        const FixedPointOptions& opts = {});

// One primal-dual step: lambda is updated first (with the shrinking
// regularizer and projection onto [0, lambda_max]); theta ascends with the
// updated lambda. The parameter space is unconstrained, so the theta
// projection is the identity.
DualIterate rpd_step(const DualIterate& it, const StepSchedule& schedule, const TabularCMDP& mdp,
                     const ContaminationSet& set, double sigma, const FixedPointOptions& opts = {});

GradMapping gradient_mapping(const DualIterate& it, const StepSchedule& schedule,
                             const TabularCMDP& mdp, const ContaminationSet& set, double sigma,
                             const FixedPointOptions& opts = {});

// Same, reusing an existing IterateEval (the run loop shares one evaluation
// per step between the record, the mapping, and the update).
GradMapping gradient_mapping_from_eval(const DualIterate& it, const StepSchedule& schedule,
                                       const IterateEval& eval, double b);

struct RpdResult {
    DualIterate best;                 // iterate with the smallest gradient mapping norm
    std::vector<RunRecord> trace;
    std::vector<Mat> policy_logits;   // logged theta per step (same indexing as trace)
    int best_index = 0;               // position in trace/policy_logits
};

RpdResult rpd_run(const TabularCMDP& mdp, const ContaminationSet& set, double sigma,
                  const StepSchedule& schedule, int steps, const DualIterate& init,
                  const FixedPointOptions& opts = {});

struct FeasibilityReport {
    double slack = 0.0;                      // V_{sigma,c}(rho) - b at the returned iterate
    double epsilon = 0.0;
    bool within_two_epsilon = false;         // slack >= -2 epsilon
    double pre_projection_multiplier = 0.0;  // lambda_W - (1/beta_W) grad_lambda
    bool multiplier_hypothesis = false;      // pre-projection value landed in [0, lambda_max)
};

FeasibilityReport check_feasibility(const DualIterate& best, const StepSchedule& schedule,
                                    const TabularCMDP& mdp, const ContaminationSet& set,
                                    double sigma, double epsilon,
                                    const FixedPointOptions& opts = {});

inline double clamp_multiplier(double lam, double lambda_max) {
    if (lam < 0.0) return 0.0;
    if (lam > lambda_max) return lambda_max;
    return lam;
}

}  // namespace rcrl
