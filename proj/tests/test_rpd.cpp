#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "helpers.hpp"
#include "rcrl/rpd.hpp"

using namespace rcrl;
using namespace rcrl::testing;

namespace {

// Two actions, one state, constant signals: every gradient vanishes.
TabularCMDP flat_mdp(double reward_value, double utility_value, double gamma, double threshold) {
    TabularCMDP mdp;
    mdp.n_states = 1;
    mdp.n_actions = 2;
    mdp.gamma = gamma;
    mdp.kernel = Kernel(1, 2);
    mdp.kernel.row(0, 0)[0] = 1.0;
    mdp.kernel.row(0, 1)[0] = 1.0;
    mdp.reward = Mat(1, 2, reward_value);
    mdp.utilities = {Mat(1, 2, utility_value)};
    mdp.rho = {1.0};
    mdp.thresholds = {threshold};
    mdp.validate();
    return mdp;
}

}  // namespace

TEST_CASE("closed-form constants") {
    PolicyClassConstants pc;
    pc.lipschitz = 1.0;
    pc.smoothness = 1.0;
    ScheduleConstants c = compute_constants(4, 2, 0.5, 0.2, -10.0, pc);
    CHECK(c.value_lipschitz == doctest::Approx(8.0));  // k|A|/(1-gamma)^2

    // delta = 0 collapses the LSE correction: L_sigma == k_B.
    ScheduleConstants c0 = compute_constants(4, 2, 0.5, 0.0, -10.0, pc);
    CHECK(c0.smoothed_grad_lipschitz == doctest::Approx(c0.grad_term_lipschitz));
    // And the smoothed value cap reduces to 1/(1-gamma).
    CHECK(c0.smoothed_value_bound == doctest::Approx(2.0));

    CHECK_THROWS_AS(compute_constants(4, 2, 1.0, 0.2, -10.0, pc), std::invalid_argument);
}

TEST_CASE("dual upper bound") {
    CHECK(dual_upper_bound(1.0, 1.0, 2.0, 0.5) == doctest::Approx(4.0));
    double at_09 = dual_upper_bound(1.0, 1.0, 2.0, 0.9);
    double at_0999 = dual_upper_bound(1.0, 1.0, 2.0, 0.999);
    CHECK(at_0999 / at_09 == doctest::Approx(100.0).epsilon(1e-9));
    CHECK_THROWS_AS(dual_upper_bound(0.0, 1.0, 2.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(dual_upper_bound(1.0, -1.0, 2.0, 0.5), std::invalid_argument);
}

TEST_CASE("slater estimate stays positive and shrinks with smoothing gap") {
    TabularCMDP mdp = random_mdp(160, 5, 3, 0.9);
    SlaterEstimate est = estimate_slater(mdp, ContaminationSet(0.2), -10.0);
    CHECK(est.zeta >= 0.05);
    CHECK(est.zeta_prime >= est.zeta / 2.0);
    CHECK(est.zeta_prime <= est.zeta);
}

TEST_CASE("theoretical schedule: shape invariants") {
    ScheduleConstants c = compute_constants(6, 4, 0.95, 0.2, -10.0);
    StepSchedule sch = StepSchedule::theoretical(c, 20.0);
    double bound = (2.0 * sch.nu + 21.0 * c.smoothed_grad_lipschitz) /
                   (c.value_theta_lipschitz * c.value_theta_lipschitz);
    CHECK(sch.xi > bound);
    // b_t strictly decreasing, b_0 defined as b_1.
    CHECK(sch.shrink(0) == sch.shrink(1));
    for (int t = 1; t < 40; ++t) CHECK(sch.shrink(t + 1) < sch.shrink(t));
    // beta constant, alpha positive and increasing.
    CHECK(sch.beta(3) == sch.beta(17));
    double prev = 0.0;
    for (int t = 0; t < 10; ++t) {
        double a = sch.alpha(t);
        CHECK(a > 0.0);
        CHECK(a >= prev);
        prev = a;
    }
    CHECK_THROWS_AS(StepSchedule::theoretical(c, 20.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(StepSchedule::theoretical(c, 20.0, 0.1, 1.5), std::invalid_argument);
}

TEST_CASE("lagrangian composition") {
    TabularCMDP mdp = random_mdp(170, 4, 2, 0.9);
    SoftmaxPolicy pol = random_policy(171, 4, 2);
    ContaminationSet set(0.25);
    double sigma = -10.0;

    RobustValues vr = smoothed_robust_value(set, mdp, pol, sigma, SignalRef::reward());
    RobustValues vc = smoothed_robust_value(set, mdp, pol, sigma, SignalRef::utility(0));
    double parts = dot(mdp.rho, vr.v) + 1.7 * (dot(mdp.rho, vc.v) - mdp.thresholds[0]);
    CHECK(lagrangian_value(mdp, set, pol, 1.7, sigma) == doctest::Approx(parts).epsilon(1e-12));
    CHECK(lagrangian_value(mdp, set, pol, 0.0, sigma) == doctest::Approx(dot(mdp.rho, vr.v)).epsilon(1e-12));
    CHECK_THROWS_AS(lagrangian_value(mdp, set, pol, -0.5, sigma), std::invalid_argument);

    // Engineered boundary instance: utility value pinned to the threshold, so
    // lambda drops out. Single state keeps LSE exact.
    TabularCMDP flat = flat_mdp(0.8, 0.6, 0.9, 0.6 / (1.0 - 0.9));
    double l0 = lagrangian_value(flat, set, SoftmaxPolicy::uniform(1, 2), 0.0, sigma);
    double l5 = lagrangian_value(flat, set, SoftmaxPolicy::uniform(1, 2), 5.0, sigma);
    CHECK(l0 == doctest::Approx(l5).epsilon(1e-8));
}

TEST_CASE("rpd step: boundary fixed point moves only by the shrink drift") {
    TabularCMDP mdp = flat_mdp(1.0, 0.6, 0.9, 0.6 / (1.0 - 0.9));
    ContaminationSet set(0.2);
    StepSchedule sch = StepSchedule::practical(1.0, 0.5, 10.0);
    DualIterate it;
    it.policy = SoftmaxPolicy::uniform(1, 2);
    it.multiplier = 2.0;
    it.step = 3;
    DualIterate next = rpd_step(it, sch, mdp, set, -10.0);
    CHECK(next.policy.theta(0, 0) == doctest::Approx(0.0));
    CHECK(next.policy.theta(0, 1) == doctest::Approx(0.0));
    double drift = sch.shrink(3) / sch.beta(3) * it.multiplier;
    CHECK(next.multiplier == doctest::Approx(it.multiplier - drift).epsilon(1e-8));
    CHECK(next.step == 4);
}

TEST_CASE("rpd step: violated constraint raises the multiplier") {
    TabularCMDP mdp = random_mdp(180, 4, 2, 0.9);
    mdp.thresholds = {15.0};  // far above any utility value at gamma = 0.9
    ContaminationSet set(0.2);
    StepSchedule sch = StepSchedule::practical(1.0, 0.5, 50.0);
    DualIterate it;
    it.policy = SoftmaxPolicy::uniform(4, 2);
    it.multiplier = 1.0;
    DualIterate next = rpd_step(it, sch, mdp, set, -10.0);
    CHECK(next.multiplier >= it.multiplier);
}

TEST_CASE("rpd step: log replay of a seeded instance") {
    TabularCMDP mdp = random_mdp(190, 3, 2, 0.9);
    ContaminationSet set(0.3);
    double sigma = -10.0;
    StepSchedule sch = StepSchedule::practical(0.5, 0.25, 8.0);
    DualIterate it;
    it.policy = random_policy(191, 3, 2);
    it.multiplier = 0.75;
    it.step = 5;

    IterateEval ev = evaluate_iterate(mdp, set, it.policy, sigma);
    double lam = it.multiplier - (ev.v_c_rho - mdp.thresholds[0]) / sch.beta(5) -
                 sch.shrink(5) / sch.beta(5) * it.multiplier;
    lam = clamp_multiplier(lam, 8.0);
    DualIterate got = rpd_step(it, sch, mdp, set, sigma);
    CHECK(got.multiplier == doctest::Approx(lam).epsilon(1e-15));
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) {
            double want = it.policy.theta(s, a) +
                          (ev.grad_r(s, a) + lam * ev.grad_c(s, a)) / sch.alpha(5);
            CHECK(got.policy.theta(s, a) == doctest::Approx(want).epsilon(1e-15));
        }
}

TEST_CASE("gradient mapping: zeros, clipping arithmetic, direct formula") {
    // Flat instance at the boundary with interior lambda: G = 0.
    TabularCMDP flat = flat_mdp(1.0, 0.6, 0.9, 0.6 / (1.0 - 0.9));
    ContaminationSet set(0.2);
    StepSchedule sch = StepSchedule::practical(1.0, 0.5, 10.0);
    DualIterate it;
    it.policy = SoftmaxPolicy::uniform(1, 2);
    it.multiplier = 3.0;
    GradMapping g = gradient_mapping(it, sch, flat, set, -10.0);
    CHECK(std::abs(g.dual) <= 1e-8);
    CHECK(g.norm <= 1e-8);

    // lambda = 0 with positive slack: the descent direction is clipped away.
    TabularCMDP slack = flat_mdp(1.0, 0.9, 0.9, 2.0);
    it.multiplier = 0.0;
    GradMapping g0 = gradient_mapping(it, sch, slack, set, -10.0);
    CHECK(g0.dual == doctest::Approx(0.0));

    // lambda = 0 with violation: the unclipped derivative comes through.
    TabularCMDP tight = flat_mdp(1.0, 0.1, 0.9, 5.0);
    GradMapping g1 = gradient_mapping(it, sch, tight, set, -10.0);
    RobustValues vc = smoothed_robust_value(set, tight, it.policy, -10.0, SignalRef::utility(0));
    CHECK(g1.dual == doctest::Approx(dot(tight.rho, vc.v) - 5.0).epsilon(1e-12));

    // Seeded instance against the definition.
    TabularCMDP mdp = random_mdp(200, 4, 3, 0.9);
    DualIterate seeded;
    seeded.policy = random_policy(201, 4, 3);
    seeded.multiplier = 0.4;
    seeded.step = 2;
    IterateEval ev = evaluate_iterate(mdp, set, seeded.policy, -10.0);
    GradMapping direct = gradient_mapping(seeded, sch, mdp, set, -10.0);
    double beta = sch.beta(2);
    double pre = seeded.multiplier - (ev.v_c_rho - mdp.thresholds[0]) / beta;
    double want_dual = beta * (seeded.multiplier - clamp_multiplier(pre, sch.lambda_max));
    CHECK(direct.dual == doctest::Approx(want_dual).epsilon(1e-14));
    double norm2 = want_dual * want_dual;
    for (int s = 0; s < 4; ++s)
        for (int a = 0; a < 3; ++a) {
            double want = -(ev.grad_r(s, a) + seeded.multiplier * ev.grad_c(s, a));
            CHECK(direct.primal(s, a) == doctest::Approx(want).epsilon(1e-14));
            norm2 += want * want;
        }
    CHECK(direct.norm == doctest::Approx(std::sqrt(norm2)).epsilon(1e-13));
}

TEST_CASE("rpd run: single step, slack instance trend, determinism, multiplier box") {
    TabularCMDP mdp = random_mdp(210, 3, 2, 0.9);
    ContaminationSet set(0.2);
    StepSchedule sch = StepSchedule::practical(0.5, 0.25, 6.0);
    DualIterate init;
    init.policy = SoftmaxPolicy::uniform(3, 2);

    RpdResult one = rpd_run(mdp, set, -10.0, sch, 1, init);
    CHECK(one.trace.size() == 1);
    CHECK(one.best_index == 0);
    CHECK_THROWS_AS(rpd_run(mdp, set, -10.0, sch, 0, init), std::invalid_argument);

    // Constraint-slack instance: b = 0 and c == 1, so lambda stays at zero and
    // theta ascends the reward value monotonically in the early steps.
    TabularCMDP easy = random_mdp(211, 3, 2, 0.9);
    easy.utilities[0] = Mat(3, 2, 1.0);
    easy.thresholds = {0.0};
    RpdResult run = rpd_run(easy, set, -10.0, sch, 15, init);
    for (const RunRecord& rec : run.trace) CHECK(rec.lambda == 0.0);
    for (size_t i = 1; i < run.trace.size(); ++i)
        CHECK(run.trace[i].v_sigma_r_rho >= run.trace[i - 1].v_sigma_r_rho - 1e-12);

    // Determinism: bit-identical traces.
    TabularCMDP bound = random_mdp(212, 3, 2, 0.9);
    bound.thresholds = {dot(bound.rho, evaluate_policy(bound, bound.kernel,
                                                       SoftmaxPolicy::uniform(3, 2),
                                                       bound.utilities[0]))};
    RpdResult r1 = rpd_run(bound, set, -10.0, sch, 25, init);
    RpdResult r2 = rpd_run(bound, set, -10.0, sch, 25, init);
    REQUIRE(r1.trace.size() == r2.trace.size());
    for (size_t i = 0; i < r1.trace.size(); ++i) {
        CHECK(r1.trace[i].lambda == r2.trace[i].lambda);
        CHECK(r1.trace[i].v_sigma_r_rho == r2.trace[i].v_sigma_r_rho);
        CHECK(r1.trace[i].grad_mapping_norm == r2.trace[i].grad_mapping_norm);
    }
    for (const RunRecord& rec : r1.trace) {
        CHECK(rec.lambda >= 0.0);
        CHECK(rec.lambda <= sch.lambda_max);
    }
    CHECK(run.best.step == run.trace[run.best_index].t - 1);
}

TEST_CASE("theoretical schedule runs without leaving the multiplier box") {
    TabularCMDP mdp = random_mdp(220, 4, 2, 0.9);
    ContaminationSet set(0.2);
    ScheduleConstants c = compute_constants(4, 2, 0.9, 0.2, -10.0);
    SlaterEstimate slater = estimate_slater(mdp, set, -10.0);
    double lam_max = dual_upper_bound(slater.zeta, slater.zeta_prime, c.smoothed_value_bound, 0.9);
    StepSchedule sch = StepSchedule::theoretical(c, lam_max);
    DualIterate init;
    init.policy = SoftmaxPolicy::uniform(4, 2);
    init.multiplier = lam_max / 2.0;
    RpdResult run = rpd_run(mdp, set, -10.0, sch, 40, init);
    for (const RunRecord& rec : run.trace) {
        CHECK(rec.lambda >= 0.0);
        CHECK(rec.lambda <= lam_max);
        CHECK(std::isfinite(rec.grad_mapping_norm));
    }
}

TEST_CASE("feasibility report") {
    ContaminationSet set(0.2);
    StepSchedule sch = StepSchedule::practical(1.0, 0.5, 2.0);

    TabularCMDP comfy = flat_mdp(1.0, 0.8, 0.95, 4.0);  // utility value 16 vs b = 4
    DualIterate it;
    it.policy = SoftmaxPolicy::uniform(1, 2);
    FeasibilityReport rep = check_feasibility(it, sch, comfy, set, -10.0, 0.05);
    CHECK(rep.within_two_epsilon);
    CHECK(rep.slack > 0.0);

    // Threshold above the attainable range 1/(1-gamma): nothing can satisfy
    // it, and the proposition's multiplier hypothesis fails as well.
    TabularCMDP hopeless = flat_mdp(1.0, 0.8, 0.95, 25.0);
    FeasibilityReport bad = check_feasibility(it, sch, hopeless, set, -10.0, 0.05);
    CHECK_FALSE(bad.within_two_epsilon);
    CHECK(bad.slack < 0.0);
    CHECK_FALSE(bad.multiplier_hypothesis);
}

TEST_CASE("dual-gradient Lipschitz constant holds empirically") {
    TabularCMDP mdp = random_mdp(230, 4, 3, 0.9);
    ContaminationSet set(0.2);
    double sigma = -10.0;
    ScheduleConstants c = compute_constants(4, 3, 0.9, 0.2, sigma);
    for (int i = 0; i < 100; ++i) {
        SoftmaxPolicy p1 = random_policy(1000 + i, 4, 3);
        SoftmaxPolicy p2 = random_policy(2000 + i, 4, 3);
        RobustValues v1 = smoothed_robust_value(set, mdp, p1, sigma, SignalRef::utility(0));
        RobustValues v2 = smoothed_robust_value(set, mdp, p2, sigma, SignalRef::utility(0));
        double lhs = std::abs(dot(mdp.rho, v1.v) - dot(mdp.rho, v2.v));
        double dist = 0.0;
        for (size_t k = 0; k < p1.theta.a.size(); ++k) {
            double d = p1.theta.a[k] - p2.theta.a[k];
            dist += d * d;
        }
        CHECK(lhs <= c.value_theta_lipschitz * std::sqrt(dist) + 1e-9);
    }
}
