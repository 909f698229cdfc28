#pragma once

#include <optional>
#include <string>

#include "rcrl/rpd.hpp"
#include "rcrl/td.hpp"

namespace rcrl {

enum class BaselineKind { robust_rpd, heuristic_pd, nonrobust_pd };

const char* baseline_name(BaselineKind kind);

struct OnlineConfig {
    int outer_steps = 100;
    double eps_est = 0.1;
    double sigma = -10.0;
    double kappa = 1.0;             // T_inner(t) = ceil(kappa (t+1)^1.5 / eps_est^2)
    long inner_cap = 200000;
    long inner_floor = 1;           // desk-scale guard against untrustworthy early estimates
    std::optional<long> fixed_inner;  // overrides the growth rule when set
    TdStepSize td_step;             // defaulted from gamma when a == 0
    StepSchedule schedule;
    uint64_t seed = 0;
    long restart_period = 1000;

    long inner_steps(int t) const {
        if (fixed_inner) return *fixed_inner;
        double raw = kappa * std::pow(static_cast<double>(t) + 1.0, 1.5) / (eps_est * eps_est);
        long n = static_cast<long>(std::ceil(raw));
        if (n < inner_floor) n = inner_floor;
        if (n < 1) n = 1;
        return n > inner_cap ? inner_cap : n;
    }
};

struct OnlineResult {
    DualIterate final_iterate;
    std::vector<RunRecord> trace;
    std::vector<Mat> policy_logits;  // theta per logged step
};

// Model-free primal-dual loop: per outer step, two robust-TD runs (reward and
// utility) produce value and gradient estimates that replace the exact ones in
// the RPD update. Gradient estimates plug the TD Q tables into the explicit
// gradient formula (occupancies under the known centroid kernel).
OnlineResult online_rpd_run(const TabularCMDP& mdp, const ContaminationSet& set,
                            const OnlineConfig& config);

// Robust policy evaluation + non-robust policy improvement: the same dual
// update, but the theta update uses the vanilla score-function gradient under
// centroid occupancy (discount gamma, no LSE correction) fed with robust-TD Q
// estimates. The worst-case kernel's dependence on theta is ignored.
OnlineResult heuristic_pd_run(const TabularCMDP& mdp, const ContaminationSet& set,
                              const OnlineConfig& config);

// Fully non-robust primal-dual: TD(0) under the centroid (delta treated as 0)
// with the vanilla gradient.
OnlineResult nonrobust_pd_run(const TabularCMDP& mdp, const OnlineConfig& config);

OnlineResult run_baseline(BaselineKind kind, const TabularCMDP& mdp, const ContaminationSet& set,
                          const OnlineConfig& config);

struct EvalRow {
    int iterate = 0;
    std::string method;
    std::string metric;  // "Vr" or "Vc"
    double mean = 0.0;
    double p5 = 0.0;
    double p95 = 0.0;
    double exact = 0.0;  // unsmoothed robust value, computed deterministically
};

// Paper-style evaluation of logged policies: n_reps independent robust-TD
// estimates of V_r(rho) and V_c(rho) at the given sample size, reported as
// mean and 5/95 percentiles, next to the exact robust values.
std::vector<EvalRow> evaluate_trace(const std::vector<Mat>& policy_logits,
                                    const std::vector<int>& iterate_ids,
                                    const std::string& method, const TabularCMDP& mdp,
                                    const ContaminationSet& set, double sigma, int n_reps,
                                    long sample_size, uint64_t seed, int stride = 1);

}  // namespace rcrl
