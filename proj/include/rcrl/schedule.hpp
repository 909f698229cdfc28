#pragma once

#include <cmath>
#include <stdexcept>

#include "rcrl/constants.hpp"

namespace rcrl {

// Step-size schedule for the primal-dual loop. The theoretical variant is the
// restated convergence-theorem schedule
//   b_t    = 19 / (20 xi t^0.25)          (b_0 defined as b_1)
//   beta_t = 1 / xi
//   mu_t   = xi Cv^2 + 16 tau Cv^2 / (xi b_{t+1}^2) - 2 nu
//   alpha_t= nu + mu_t
// with xi > (2 nu + (1+Lambda*) L_sigma) / Cv^2, nu > 0, tau > 2. The
// practical variant uses constant step sizes with the same update shapes.
struct StepSchedule {
    enum class Kind { theoretical, practical };

    Kind kind = Kind::practical;
    double lambda_max = 1.0;

    // theoretical parameters
    double xi = 1.0;
    double nu = 0.1;
    double tau = 3.0;
    double cs_v = 1.0;  // value_theta_lipschitz, enters mu_t

    // practical parameters
    double primal_lr = 1.0;
    double dual_lr = 0.5;

    double shrink(int t) const {  // b_t
        int tt = t < 1 ? 1 : t;
        double root = std::pow(static_cast<double>(tt), 0.25);
        if (kind == Kind::theoretical) return 19.0 / (20.0 * xi * root);
        return 0.95 / root;
    }

    double beta(int t) const {
        (void)t;
        return kind == Kind::theoretical ? 1.0 / xi : 1.0 / dual_lr;
    }

    double alpha(int t) const {
        if (kind == Kind::practical) return 1.0 / primal_lr;
        double b_next = 19.0 / (20.0 * xi * std::pow(static_cast<double>(t + 1), 0.25));
        double mu = xi * cs_v * cs_v + 16.0 * tau * cs_v * cs_v / (xi * b_next * b_next) - 2.0 * nu;
        double a = nu + mu;
        if (!(a > 0.0)) throw std::invalid_argument("StepSchedule: alpha_t must be positive");
        return a;
    }

    static StepSchedule theoretical(const ScheduleConstants& c, double lambda_max, double nu = 0.1,
                                    double tau = 3.0, double xi_scale = 1.05) {
        StepSchedule s;
        s.kind = Kind::theoretical;
        s.lambda_max = lambda_max;
        s.nu = nu;
        s.tau = tau;
        s.cs_v = c.value_theta_lipschitz;
        double bound = (2.0 * nu + (1.0 + lambda_max) * c.smoothed_grad_lipschitz) / (s.cs_v * s.cs_v);
        s.xi = xi_scale * bound;
        if (!(s.xi > bound)) throw std::invalid_argument("StepSchedule: xi must exceed the theorem bound");
        if (!(nu > 0.0)) throw std::invalid_argument("StepSchedule: nu must be positive");
        if (!(tau > 2.0)) throw std::invalid_argument("StepSchedule: tau must exceed 2");
        return s;
    }

    static StepSchedule practical(double primal_lr, double dual_lr, double lambda_max) {
        StepSchedule s;
        s.kind = Kind::practical;
        s.primal_lr = primal_lr;
        s.dual_lr = dual_lr;
        s.lambda_max = lambda_max;
        return s;
    }
};

}  // namespace rcrl
