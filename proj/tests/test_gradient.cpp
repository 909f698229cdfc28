#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "helpers.hpp"
#include "rcrl/gradient.hpp"

using namespace rcrl;
using namespace rcrl::testing;

namespace {

double rel_sup_error(const Mat& got, const Mat& want) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < got.a.size(); ++i) {
        num = std::max(num, std::abs(got.a[i] - want.a[i]));
        den = std::max(den, std::abs(want.a[i]));
    }
    return num / std::max(den, 1e-300);
}

constexpr FixedPointOptions kTight{1e-13, 20000};

}  // namespace

TEST_CASE("gradient contribution vanishes for constant Q rows") {
    TabularCMDP mdp = random_mdp(81, 4, 3, 0.9);
    SoftmaxPolicy pol = random_policy(82, 4, 3);
    ContaminationSet set(0.2);
    RobustValues rv = smoothed_robust_value(set, mdp, pol, -10.0, SignalRef::reward());
    // Flatten Q to its row means: sum_a grad pi(a|s) * const = 0.
    for (int s = 0; s < 4; ++s) {
        double mean = 0.0;
        for (int a = 0; a < 3; ++a) mean += rv.q(s, a) / 3.0;
        for (int a = 0; a < 3; ++a) rv.q(s, a) = mean;
        rv.v[s] = mean;
    }
    for (int start = 0; start < 4; ++start) {
        Mat b = state_gradient_contribution(mdp, set, pol, -10.0, rv, start);
        for (double x : b.a) CHECK(std::abs(x) <= 1e-12);
    }
}

TEST_CASE("single-state gradient matches the hand product rule") {
    // One state, two actions, rewards r0/r1: V(theta) = <pi, r>/(1-gamma), so
    // dV/dtheta_b = pi(b)(r(b) - <pi, r>)/(1-gamma).
    TabularCMDP mdp;
    mdp.n_states = 1;
    mdp.n_actions = 2;
    mdp.gamma = 0.9;
    mdp.kernel = Kernel(1, 2);
    mdp.kernel.row(0, 0)[0] = 1.0;
    mdp.kernel.row(0, 1)[0] = 1.0;
    mdp.reward = Mat(1, 2);
    mdp.reward(0, 0) = 0.25;
    mdp.reward(0, 1) = 0.85;
    mdp.utilities = {Mat(1, 2, 0.5)};
    mdp.rho = {1.0};
    mdp.thresholds = {0.0};

    SoftmaxPolicy pol;
    pol.theta = Mat(1, 2);
    pol.theta(0, 0) = 0.3;
    pol.theta(0, 1) = -0.6;
    Mat probs = policy_probs(pol);
    double mean_r = probs(0, 0) * 0.25 + probs(0, 1) * 0.85;

    for (double delta : {0.0, 0.3}) {
        ContaminationSet set(delta);
        GradientResult g = smoothed_gradient(mdp, set, pol, -10.0, SignalRef::reward(), kTight);
        for (int b = 0; b < 2; ++b) {
            double want = probs(0, b) * (mdp.reward(0, b) - mean_r) / (1.0 - mdp.gamma);
            CHECK(g.grad_theta(0, b) == doctest::Approx(want).epsilon(1e-10));
        }
        CHECK(g.value_rho == doctest::Approx(mean_r / (1.0 - mdp.gamma)).epsilon(1e-9));
    }
}

TEST_CASE("per-state terms assemble into the full gradient") {
    TabularCMDP mdp = random_mdp(91, 4, 2, 0.85);
    SoftmaxPolicy pol = random_policy(92, 4, 2);
    ContaminationSet set(0.25);
    double sigma = -8.0;
    GradientResult g = smoothed_gradient(mdp, set, pol, sigma, SignalRef::reward(), kTight, true);
    REQUIRE(g.per_state_terms.has_value());
    RobustValues rv = smoothed_robust_value(set, mdp, pol, sigma, SignalRef::reward(), kTight);
    Vec w = softmin_weights(sigma, rv.v);

    Mat assembled(4, 2, 0.0);
    double lse_weight = mdp.gamma * set.delta / (1.0 - mdp.gamma);
    for (int s = 0; s < 4; ++s) {
        const Mat& term = (*g.per_state_terms)[s];
        Mat check = state_gradient_contribution(mdp, set, pol, sigma, rv, s);
        CHECK(rel_sup_error(term, check) <= 1e-12);
        for (size_t i = 0; i < assembled.a.size(); ++i)
            assembled.a[i] += mdp.rho[s] * term.a[i] + lse_weight * w[s] * term.a[i];
    }
    CHECK(rel_sup_error(assembled, g.grad_theta) <= 1e-10);
}

TEST_CASE("constant reward has zero gradient") {
    TabularCMDP mdp = random_mdp(101, 5, 3, 0.9);
    mdp.reward = Mat(5, 3, 1.0);
    SoftmaxPolicy pol = random_policy(102, 5, 3);
    GradientResult g = smoothed_gradient(mdp, ContaminationSet(0.3), pol, -10.0, SignalRef::reward(), kTight);
    for (double x : g.grad_theta.a) CHECK(std::abs(x) <= 1e-11);
}

TEST_CASE("delta=0 gradient agrees with a likelihood-ratio Monte Carlo estimate") {
    TabularCMDP mdp = random_mdp(111, 2, 2, 0.8);
    SoftmaxPolicy pol = random_policy(112, 2, 2);
    ContaminationSet none(0.0);
    GradientResult g = smoothed_gradient(mdp, none, pol, -10.0, SignalRef::reward(), kTight);

    Mat probs = policy_probs(pol);
    const int horizon = 120, rollouts = 400000;
    Rng rng(113);
    Mat mean(2, 2, 0.0), m2(2, 2, 0.0);
    for (int n = 1; n <= rollouts; ++n) {
        Mat score(2, 2, 0.0), sample(2, 2, 0.0);
        int s = rng.categorical(mdp.rho);
        double disc = 1.0;
        for (int t = 0; t < horizon; ++t) {
            int a = rng.categorical(probs.row(s));
            for (int b = 0; b < 2; ++b) score(s, b) += (b == a ? 1.0 : 0.0) - probs(s, b);
            double r = mdp.reward(s, a);
            for (size_t i = 0; i < sample.a.size(); ++i) sample.a[i] += disc * r * score.a[i];
            disc *= mdp.gamma;
            s = rng.categorical(mdp.kernel.row(s, a));
        }
        // Streaming mean/variance per component.
        for (size_t i = 0; i < sample.a.size(); ++i) {
            double d = sample.a[i] - mean.a[i];
            mean.a[i] += d / n;
            m2.a[i] += d * (sample.a[i] - mean.a[i]);
        }
    }
    for (size_t i = 0; i < mean.a.size(); ++i) {
        double se = std::sqrt(m2.a[i] / (rollouts - 1.0) / rollouts);
        CHECK(std::abs(mean.a[i] - g.grad_theta.a[i]) <= 3.0 * se + 1e-4);
    }
}

TEST_CASE("smoothed gradient matches central finite differences") {
    // Includes the seeded Garnet-style instance of the acceptance protocol.
    int idx = 0;
    for (uint64_t seed : {120, 121, 122, 123, 124, 125}) {
        int s_n = 3 + static_cast<int>(seed % 3);
        int a_n = 2 + static_cast<int>(seed % 2);
        double sigma = -5.0 - 9.0 * static_cast<double>(idx++);
        TabularCMDP mdp = random_mdp(seed, s_n, a_n, 0.9);
        SoftmaxPolicy pol = random_policy(seed + 1, s_n, a_n, 0.7);
        ContaminationSet set(0.2);
        GradientResult g = smoothed_gradient(mdp, set, pol, sigma, SignalRef::reward(), kTight);
        Mat fd = finite_diff_gradient(mdp, set, pol, sigma, SignalRef::reward(), 1e-5, kTight);
        CHECK(rel_sup_error(g.grad_theta, fd) <= 1e-4);
    }
}

TEST_CASE("finite differences: quadratic hook is exact and value errors shrink as h^2") {
    // Central differences are exact for quadratics up to roundoff.
    Mat coef(2, 2);
    coef(0, 0) = 0.5;
    coef(0, 1) = -1.5;
    coef(1, 0) = 2.0;
    coef(1, 1) = 0.25;
    auto quadratic = [&](const SoftmaxPolicy& p) {
        double acc = 0.0;
        for (size_t i = 0; i < coef.a.size(); ++i) acc += coef.a[i] * p.theta.a[i] * p.theta.a[i];
        return acc;
    };
    SoftmaxPolicy at = random_policy(131, 2, 2);
    Mat fd = central_difference_gradient(quadratic, at, 1e-4);
    for (size_t i = 0; i < coef.a.size(); ++i)
        CHECK(fd.a[i] == doctest::Approx(2.0 * coef.a[i] * at.theta.a[i]).epsilon(1e-8));

    CHECK_THROWS_AS(central_difference_gradient(quadratic, at, 0.0), std::invalid_argument);

    // Richardson check on the smoothed value: truncation is O(h^2), so a 10x
    // coarser h costs ~100x accuracy while truncation dominates the noise
    // floor.
    TabularCMDP mdp = random_mdp(132, 4, 2, 0.9);
    SoftmaxPolicy pol = random_policy(133, 4, 2);
    ContaminationSet set(0.25);
    GradientResult exact = smoothed_gradient(mdp, set, pol, -10.0, SignalRef::reward(), kTight);
    auto err_at = [&](double h) {
        Mat fd_h = finite_diff_gradient(mdp, set, pol, -10.0, SignalRef::reward(), h, kTight);
        double e = 0.0;
        for (size_t i = 0; i < fd_h.a.size(); ++i) e = std::max(e, std::abs(fd_h.a[i] - exact.grad_theta.a[i]));
        return e;
    };
    double coarse = err_at(1e-2), mid = err_at(1e-3);
    CHECK(coarse / mid == doctest::Approx(100.0).epsilon(0.5));
    // At the fine end the spec's h pair hits the double-precision noise floor;
    // the error must still shrink.
    CHECK(err_at(1e-4) < mid);
    CHECK(err_at(1e-5) <= err_at(1e-4));
}

TEST_CASE("shift invariance and row-sum-zero of the gradient") {
    TabularCMDP mdp = random_mdp(141, 4, 3, 0.9);
    SoftmaxPolicy pol = random_policy(142, 4, 3);
    ContaminationSet set(0.3);
    GradientResult g = smoothed_gradient(mdp, set, pol, -12.0, SignalRef::reward(), kTight);

    SoftmaxPolicy shifted = pol;
    for (int a = 0; a < 3; ++a) shifted.theta(2, a) += 5.0;
    GradientResult gs = smoothed_gradient(mdp, set, shifted, -12.0, SignalRef::reward(), kTight);
    CHECK(gs.value_rho == doctest::Approx(g.value_rho).epsilon(1e-10));

    for (int s = 0; s < 4; ++s) {
        double row_sum = 0.0;
        for (int a = 0; a < 3; ++a) row_sum += g.grad_theta(s, a);
        CHECK(std::abs(row_sum) <= 1e-10);
    }
}

TEST_CASE("no NaN under extreme smoothing and saturated logits") {
    TabularCMDP mdp = random_mdp(151, 4, 3, 0.9);
    SoftmaxPolicy pol;
    pol.theta = Mat(4, 3);
    Rng rng(152);
    for (double& x : pol.theta.a) x = rng.uniform01() < 0.5 ? -30.0 : 30.0;
    GradientResult g = smoothed_gradient(mdp, ContaminationSet(0.4), pol, -1e3, SignalRef::reward());
    CHECK(std::isfinite(g.value_rho));
    for (double x : g.grad_theta.a) CHECK(std::isfinite(x));
}
