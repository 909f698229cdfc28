#include "rcrl/mdp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rcrl {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void check_distribution(std::span<const double> p, const std::string& what, double tol) {
    double sum = 0.0;
    for (double x : p) {
        require(x >= 0.0, what + " has a negative entry");
        sum += x;
    }
    require(std::abs(sum - 1.0) <= tol, what + " does not sum to 1");
}

}  // namespace

void check_stochastic(const Kernel& kernel, double tol) {
    for (int s = 0; s < kernel.n_states; ++s)
        for (int a = 0; a < kernel.n_actions; ++a)
            check_distribution(kernel.row(s, a),
                               "kernel row (" + std::to_string(s) + "," + std::to_string(a) + ")", tol);
}

void TabularCMDP::validate(bool unit_range) const {
    require(n_states > 0, "n_states must be positive");
    require(n_actions > 0, "n_actions must be positive");
    require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0,1)");
    require(kernel.n_states == n_states && kernel.n_actions == n_actions, "kernel shape mismatch");
    require(reward.rows == n_states && reward.cols == n_actions, "reward shape mismatch");
    require(!utilities.empty(), "at least one utility signal required");
    require(thresholds.size() == utilities.size(), "thresholds/utilities length mismatch");
    for (const Mat& u : utilities)
        require(u.rows == n_states && u.cols == n_actions, "utility shape mismatch");
    require(static_cast<int>(rho.size()) == n_states, "rho shape mismatch");
    check_stochastic(kernel, 1e-12);
    check_distribution(rho, "rho", 1e-12);
    if (unit_range) {
        auto in_unit = [](const Mat& m) {
            return std::all_of(m.a.begin(), m.a.end(), [](double x) { return x >= 0.0 && x <= 1.0; });
        };
        require(in_unit(reward), "reward entries must lie in [0,1]");
        for (const Mat& u : utilities) require(in_unit(u), "utility entries must lie in [0,1]");
    }
}

const Mat& TabularCMDP::signal(SignalRef ref) const {
    if (ref.kind == SignalRef::Kind::reward) return reward;
    if (ref.index < 0 || ref.index >= static_cast<int>(utilities.size()))
        throw std::invalid_argument("utility index out of range");
    return utilities[ref.index];
}

Mat policy_probs(const SoftmaxPolicy& policy) {
    const Mat& th = policy.theta;
    Mat probs(th.rows, th.cols);
    for (int s = 0; s < th.rows; ++s) {
        double m = th(s, 0);
        for (int a = 1; a < th.cols; ++a) m = std::max(m, th(s, a));
        double sum = 0.0;
        for (int a = 0; a < th.cols; ++a) {
            double e = std::exp(th(s, a) - m);
            probs(s, a) = e;
            sum += e;
        }
        for (int a = 0; a < th.cols; ++a) probs(s, a) /= sum;
    }
    return probs;
}

Mat transition_matrix(const Kernel& kernel, const Mat& probs) {
    Mat p_pi(kernel.n_states, kernel.n_states, 0.0);
    for (int s = 0; s < kernel.n_states; ++s)
        for (int a = 0; a < kernel.n_actions; ++a) {
            double w = probs(s, a);
            if (w == 0.0) continue;
            auto row = kernel.row(s, a);
            for (int s2 = 0; s2 < kernel.n_states; ++s2) p_pi(s, s2) += w * row[s2];
        }
    return p_pi;
}

Vec evaluate_policy(const TabularCMDP& mdp, const Kernel& kernel, const SoftmaxPolicy& policy,
                    const Mat& table, const FixedPointOptions& opts, double* residual_out) {
    check_stochastic(kernel);
    Mat probs = policy_probs(policy);
    Mat p_pi = transition_matrix(kernel, probs);
    Vec r_pi(mdp.n_states, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) r_pi[s] = dot(probs.row(s), table.row(s));

    Vec v(mdp.n_states, 0.0), next(mdp.n_states, 0.0);
    double residual = 0.0;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        for (int s = 0; s < mdp.n_states; ++s) next[s] = r_pi[s] + mdp.gamma * dot(p_pi.row(s), v);
        residual = sup_norm_diff(next, v);
        v.swap(next);
        if (residual <= opts.tol) break;
    }
    if (residual_out) *residual_out = residual;
    return v;
}

Vec state_visitation(const Mat& p_pi, const Vec& start, double gamma_eff, int n_actions) {
    const int n = p_pi.rows;
    if (static_cast<long>(n) * n_actions <= 4096) {
        // Solve (I - gamma_eff * P_pi^T) mu = (1 - gamma_eff) * start.
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m(i, j) = (i == j ? 1.0 : 0.0) - gamma_eff * p_pi(j, i);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) b(i) = (1.0 - gamma_eff) * start[i];
        Eigen::VectorXd mu = m.partialPivLu().solve(b);
        Vec out(n);
        for (int i = 0; i < n; ++i) out[i] = mu(i);
        return out;
    }
    // Truncated power series: mu = (1-g) sum_t g^t (P^T)^t start.
    int horizon = 1;
    if (gamma_eff > 0.0)
        horizon = static_cast<int>(std::ceil(std::log(1e-10 * (1.0 - gamma_eff)) / std::log(gamma_eff))) + 1;
    Vec cur = start, out(n, 0.0), nxt(n, 0.0);
    double scale = 1.0 - gamma_eff, g_pow = 1.0;
    for (int t = 0; t < horizon; ++t) {
        for (int i = 0; i < n; ++i) out[i] += scale * g_pow * cur[i];
        if (t + 1 == horizon) break;
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            if (cur[i] == 0.0) continue;
            for (int j = 0; j < n; ++j) nxt[j] += cur[i] * p_pi(i, j);
        }
        cur.swap(nxt);
        g_pow *= gamma_eff;
    }
    return out;
}

Visitation state_action_visitation(const TabularCMDP& mdp, const Kernel& kernel,
                                   const SoftmaxPolicy& policy, const Vec& start) {
    check_stochastic(kernel);
    check_distribution(start, "start distribution", 1e-9);
    Mat probs = policy_probs(policy);
    Mat p_pi = transition_matrix(kernel, probs);
    Vec mu = state_visitation(p_pi, start, mdp.gamma, mdp.n_actions);
    Visitation vis;
    vis.d = Mat(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) vis.d(s, a) = mu[s] * probs(s, a);
    return vis;
}

// --- JSON (de)serialization -------------------------------------------------

using nlohmann::json;

std::string TabularCMDP::to_json_string() const {
    json j;
    j["n_states"] = n_states;
    j["n_actions"] = n_actions;
    auto kernel_json = json::array();
    for (int s = 0; s < n_states; ++s) {
        auto per_action = json::array();
        for (int a = 0; a < n_actions; ++a) {
            auto row = kernel.row(s, a);
            per_action.push_back(std::vector<double>(row.begin(), row.end()));
        }
        kernel_json.push_back(per_action);
    }
    j["kernel"] = kernel_json;
    auto mat_json = [](const Mat& m) {
        auto rows = json::array();
        for (int r = 0; r < m.rows; ++r) {
            auto row = m.row(r);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        return rows;
    };
    j["reward"] = mat_json(reward);
    auto utils = json::array();
    for (const Mat& u : utilities) utils.push_back(mat_json(u));
    j["utilities"] = utils;
    j["gamma"] = gamma;
    j["rho"] = rho;
    j["thresholds"] = thresholds;
    return j.dump(2);
}

TabularCMDP TabularCMDP::from_json_string(const std::string& text) {
    json j = json::parse(text);
    TabularCMDP mdp;
    for (const char* key : {"n_states", "n_actions", "kernel", "reward", "utilities", "gamma", "rho", "thresholds"})
        require(j.contains(key), std::string("missing field: ") + key);
    mdp.n_states = j.at("n_states").get<int>();
    mdp.n_actions = j.at("n_actions").get<int>();
    mdp.gamma = j.at("gamma").get<double>();
    mdp.rho = j.at("rho").get<Vec>();
    mdp.thresholds = j.at("thresholds").get<Vec>();
    auto read_mat = [&](const json& rows) {
        Mat m(static_cast<int>(rows.size()), static_cast<int>(rows.at(0).size()));
        for (int r = 0; r < m.rows; ++r)
            for (int c = 0; c < m.cols; ++c) m(r, c) = rows.at(r).at(c).get<double>();
        return m;
    };
    mdp.kernel = Kernel(mdp.n_states, mdp.n_actions);
    const json& kj = j.at("kernel");
    require(static_cast<int>(kj.size()) == mdp.n_states, "kernel has wrong number of states");
    for (int s = 0; s < mdp.n_states; ++s) {
        require(static_cast<int>(kj.at(s).size()) == mdp.n_actions, "kernel has wrong number of actions");
        for (int a = 0; a < mdp.n_actions; ++a) {
            auto row = mdp.kernel.row(s, a);
            for (int s2 = 0; s2 < mdp.n_states; ++s2) row[s2] = kj.at(s).at(a).at(s2).get<double>();
        }
    }
    mdp.reward = read_mat(j.at("reward"));
    for (const json& u : j.at("utilities")) mdp.utilities.push_back(read_mat(u));
    mdp.validate();
    return mdp;
}

}  // namespace rcrl
