#include "rcrl/bench.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "rcrl/rpd.hpp"

namespace rcrl {

using nlohmann::json;
namespace fs = std::filesystem;

const char* method_name(Method m) {
    switch (m) {
        case Method::rpd_exact: return "rpd_exact";
        case Method::online_rpd: return "online_rpd";
        case Method::heuristic_pd: return "heuristic_pd";
        case Method::nonrobust_pd: return "nonrobust_pd";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "rpd_exact") return Method::rpd_exact;
    if (name == "online_rpd") return Method::online_rpd;
    if (name == "heuristic_pd") return Method::heuristic_pd;
    if (name == "nonrobust_pd") return Method::nonrobust_pd;
    throw std::invalid_argument("unknown method: " + name);
}

TrainSetup resolve_train_setup(const KeyValueConfig& cfg) {
    TrainSetup s;
    s.config_echo = cfg;
    s.method = parse_method(cfg.require_string("method"));
    s.steps = static_cast<int>(cfg.require_long("T"));

    if (cfg.has("env_file")) {
        s.env_json = read_text_file(cfg.require_string("env_file"));
        s.mdp = TabularCMDP::from_json_string(s.env_json);
        s.env_json = s.mdp.to_json_string();  // canonical form
        s.env_meta_json = "{}";
    } else {
        EnvSpec spec = EnvSpec::parse_kind(cfg.require_string("env"));
        spec.sn = static_cast<int>(cfg.get_long("sn", spec.sn));
        spec.an = static_cast<int>(cfg.get_long("an", spec.an));
        spec.size = static_cast<int>(cfg.get_long("size", spec.size));
        spec.n = static_cast<int>(cfg.get_long("n", spec.n));
        spec.slip = cfg.get_double("slip", spec.slip);
        spec.seed = static_cast<uint64_t>(cfg.get_long("env_seed", 0));
        spec.gamma = cfg.get_double("gamma", spec.gamma);
        if (cfg.has("threshold")) spec.threshold = cfg.require_double("threshold");
        GeneratedEnv env = generate_env(spec);
        s.mdp = std::move(env.mdp);
        s.env_meta_json = env.meta_json;
        s.env_json = s.mdp.to_json_string();
    }
    s.env_hash = hex64(fnv1a64(s.env_json));

    s.delta = cfg.get_double("delta", 0.2);
    s.sigma = cfg.get_double("sigma", -10.0);
    s.base_seed = static_cast<uint64_t>(cfg.get_long("seed", 1));
    if (const char* env_seed = std::getenv("ROBUST_CRL_SEED"))
        s.base_seed = static_cast<uint64_t>(std::stoll(env_seed));
    s.replicas = static_cast<int>(cfg.get_long("replicas", 1));
    s.jobs = static_cast<int>(cfg.get_long("jobs", 0));
    s.schedule_kind = cfg.get_string("schedule", "practical");
    s.nu = cfg.get_double("nu", 0.1);
    s.tau = cfg.get_double("tau", 3.0);
    s.xi_scale = cfg.get_double("xi_scale", 1.05);
    s.theta_lr = cfg.get_double("theta_lr", 1.0);
    s.lambda_lr = cfg.get_double("lambda_lr", 0.5);
    s.eps_est = cfg.get_double("eps_est", 0.2);
    s.kappa = cfg.get_double("kappa", 1.0);
    s.inner_cap = cfg.get_long("inner_cap", 200000);
    s.inner_floor = cfg.get_long("inner_floor", 1);
    if (cfg.has("fixed_inner")) s.fixed_inner = cfg.require_long("fixed_inner");

    ContaminationSet set(s.delta);
    s.constants = compute_constants(s.mdp.n_states, s.mdp.n_actions, s.mdp.gamma, s.delta, s.sigma);
    s.slater = estimate_slater(s.mdp, set, s.sigma);
    s.lambda_max = dual_upper_bound(s.slater.zeta, s.slater.zeta_prime,
                                    s.constants.smoothed_value_bound, s.mdp.gamma);
    if (s.schedule_kind == "theoretical")
        s.schedule = StepSchedule::theoretical(s.constants, s.lambda_max, s.nu, s.tau, s.xi_scale);
    else if (s.schedule_kind == "practical")
        s.schedule = StepSchedule::practical(s.theta_lr, s.lambda_lr, s.lambda_max);
    else
        throw std::invalid_argument("unknown schedule: " + s.schedule_kind);
    return s;
}

ReplicaResult run_replica(const TrainSetup& setup, uint64_t seed) {
    ContaminationSet set(setup.delta);
    ReplicaResult res;
    res.seed = seed;
    if (setup.method == Method::rpd_exact) {
        DualIterate init;
        init.policy = SoftmaxPolicy::uniform(setup.mdp.n_states, setup.mdp.n_actions);
        RpdResult run = rpd_run(setup.mdp, set, setup.sigma, setup.schedule, setup.steps, init);
        res.trace = std::move(run.trace);
        res.policy_logits = std::move(run.policy_logits);
        res.final_iterate = run.best;
    } else {
        OnlineConfig oc;
        oc.outer_steps = setup.steps;
        oc.eps_est = setup.eps_est;
        oc.sigma = setup.sigma;
        oc.kappa = setup.kappa;
        oc.inner_cap = setup.inner_cap;
        oc.inner_floor = setup.inner_floor;
        oc.fixed_inner = setup.fixed_inner;
        oc.schedule = setup.schedule;
        oc.seed = seed;
        oc.td_step = TdStepSize::polynomial_default(setup.mdp.n_states * setup.mdp.n_actions);
        BaselineKind kind = setup.method == Method::online_rpd ? BaselineKind::robust_rpd
                            : setup.method == Method::heuristic_pd ? BaselineKind::heuristic_pd
                                                                   : BaselineKind::nonrobust_pd;
        OnlineResult run = run_baseline(kind, setup.mdp, set, oc);
        res.trace = std::move(run.trace);
        res.policy_logits = std::move(run.policy_logits);
        res.final_iterate = run.final_iterate;
    }
    RobustValues vc =
        smoothed_robust_value(set, setup.mdp, res.final_iterate.policy, setup.sigma, SignalRef::utility(0));
    res.final_slack = dot(setup.mdp.rho, vc.v) - setup.mdp.thresholds.at(0);
    return res;
}

std::vector<ReplicaResult> run_replicas(const TrainSetup& setup) {
    std::vector<uint64_t> seeds;
    for (int i = 0; i < setup.replicas; ++i) seeds.push_back(setup.base_seed + static_cast<uint64_t>(i));
    std::vector<ReplicaResult> results(seeds.size());
    int jobs = setup.jobs > 0 ? setup.jobs : static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    jobs = std::min<int>(jobs, static_cast<int>(seeds.size()));
    std::atomic<size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            size_t i = cursor.fetch_add(1);
            if (i >= seeds.size()) return;
            results[i] = run_replica(setup, seeds[i]);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return results;
}

std::string manifest_json(const TrainSetup& setup, const std::vector<uint64_t>& seeds,
                          double wall_clock_seconds, bool feasibility_warning) {
    json j;
    j["version"] = "0.1.0";
    json cfg = json::object();
    for (const auto& [k, v] : setup.config_echo.items()) cfg[k] = v;
    j["config"] = cfg;
    j["resolved"] = {
        {"method", method_name(setup.method)},
        {"delta", setup.delta},
        {"sigma", setup.sigma},
        {"steps", setup.steps},
        {"replicas", setup.replicas},
        {"schedule", setup.schedule_kind},
        {"threshold", setup.mdp.thresholds.at(0)},
        {"gamma", setup.mdp.gamma},
        {"eps_est", setup.eps_est},
        {"kappa", setup.kappa},
        {"inner_cap", setup.inner_cap},
    };
    if (setup.schedule_kind == "theoretical") {
        j["resolved"]["xi"] = setup.schedule.xi;
        j["resolved"]["nu"] = setup.nu;
        j["resolved"]["tau"] = setup.tau;
    } else {
        j["resolved"]["theta_lr"] = setup.theta_lr;
        j["resolved"]["lambda_lr"] = setup.lambda_lr;
    }
    j["env"] = {{"hash", setup.env_hash}, {"meta", json::parse(setup.env_meta_json)}};
    j["constants"] = {
        {"value_lipschitz", setup.constants.value_lipschitz},
        {"smoothed_value_bound", setup.constants.smoothed_value_bound},
        {"value_theta_lipschitz", setup.constants.value_theta_lipschitz},
        {"grad_term_lipschitz", setup.constants.grad_term_lipschitz},
        {"smoothed_grad_lipschitz", setup.constants.smoothed_grad_lipschitz},
    };
    j["slater"] = {{"zeta", setup.slater.zeta}, {"zeta_prime", setup.slater.zeta_prime}};
    j["lambda_max"] = setup.lambda_max;
    j["seeds"] = seeds;
    j["wall_clock_seconds"] = wall_clock_seconds;
    j["feasibility_warning"] = feasibility_warning;
    return j.dump(2);
}

TrainArtifacts cmd_train(const TrainSetup& setup, const fs::path& out_dir) {
    auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    std::vector<ReplicaResult> results = run_replicas(setup);
    double wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    TrainArtifacts art;
    art.out_dir = out_dir;
    bool warn = false;
    std::vector<uint64_t> seeds;
    for (const ReplicaResult& r : results) {
        seeds.push_back(r.seed);
        if (r.final_slack < 0.0) warn = true;
        fs::path dir = results.size() == 1 ? out_dir : out_dir / ("seed_" + std::to_string(r.seed));
        fs::create_directories(dir);
        write_text_file((dir / "trace.csv").string(), trace_csv(r.trace));
        write_text_file((dir / "policies.csv").string(), policies_csv(r.trace, r.policy_logits));
        art.run_dirs.push_back(dir);
    }
    // b above the attainable value range can never be satisfied.
    if (setup.mdp.thresholds.at(0) > 1.0 / (1.0 - setup.mdp.gamma)) warn = true;
    art.feasibility_warning = warn;
    write_text_file((out_dir / "env.json").string(), setup.env_json);
    write_text_file((out_dir / "manifest.json").string(),
                    manifest_json(setup, seeds, wall_clock_seconds, warn));
    return art;
}

void cmd_eval(const EvalRequest& req) {
    if (req.run_dirs.empty()) throw std::invalid_argument("cmd_eval: no run directories given");
    fs::create_directories(req.out_dir);

    std::optional<std::string> expect_hash;
    if (req.env_override_path) {
        TabularCMDP probe = TabularCMDP::from_json_string(read_text_file(*req.env_override_path));
        expect_hash = hex64(fnv1a64(probe.to_json_string()));
    }

    std::vector<EvalRow> all_rows;
    std::vector<SeriesBand> bands_r, bands_c;
    const char* colors[] = {"#1f77b4", "#2ca02c", "#d62728", "#9467bd"};
    int color_idx = 0;
    std::optional<double> threshold;

    for (const fs::path& run_dir : req.run_dirs) {
        fs::path root = fs::exists(run_dir / "manifest.json") ? run_dir : run_dir.parent_path();
        json manifest = json::parse(read_text_file((root / "manifest.json").string()));
        std::string env_text = read_text_file((root / "env.json").string());
        TabularCMDP mdp = TabularCMDP::from_json_string(env_text);
        std::string env_hash = hex64(fnv1a64(mdp.to_json_string()));
        std::string recorded = manifest.at("env").at("hash").get<std::string>();
        if (env_hash != recorded)
            throw std::runtime_error("cmd_eval: env.json does not match the manifest hash");
        if (expect_hash && *expect_hash != env_hash)
            throw std::runtime_error("cmd_eval: provided env does not match the run's environment");

        double delta = manifest.at("resolved").at("delta").get<double>();
        double sigma = manifest.at("resolved").at("sigma").get<double>();
        std::string method = manifest.at("resolved").at("method").get<std::string>();
        threshold = manifest.at("resolved").at("threshold").get<double>();

        PolicyLog log = read_policies_csv(read_text_file((run_dir / "policies.csv").string()),
                                          mdp.n_states, mdp.n_actions);
        ContaminationSet set(delta);
        std::vector<EvalRow> rows =
            evaluate_trace(log.logits, log.iterate_ids, method, mdp, set, sigma, req.n_reps,
                           req.sample_size, req.seed, req.stride);
        SeriesBand br, bc;
        br.label = bc.label = method;
        br.color = bc.color = colors[color_idx % 4];
        ++color_idx;
        for (const EvalRow& row : rows) {
            SeriesBand& band = row.metric == "Vr" ? br : bc;
            band.x.push_back(row.iterate);
            band.mean.push_back(row.mean);
            band.lo.push_back(row.p5);
            band.hi.push_back(row.p95);
        }
        bands_r.push_back(std::move(br));
        bands_c.push_back(std::move(bc));
        all_rows.insert(all_rows.end(), rows.begin(), rows.end());
    }

    write_text_file((req.out_dir / "eval.csv").string(), eval_csv(all_rows));
    write_text_file((req.out_dir / "vr.svg").string(),
                    render_band_chart("robust reward value", "V_r(rho)", bands_r, std::nullopt));
    write_text_file((req.out_dir / "vc.svg").string(),
                    render_band_chart("robust utility value", "V_c(rho)", bands_c, threshold));
}

// --- Counterexample fixture -------------------------------------------------

Vec robust_value_linear_oracle(const ContaminationSet& set, const TabularCMDP& mdp,
                               const Mat& probs, const Mat& table) {
    const int n = mdp.n_states;
    Mat p_pi = transition_matrix(mdp.kernel, probs);
    Vec r_pi(n);
    for (int s = 0; s < n; ++s) r_pi[s] = dot(probs.row(s), table.row(s));

    Vec best;
    double best_residual = 1e300;
    for (int m = 0; m < n; ++m) {
        // V = r_pi + gamma (1-delta) P_pi V + gamma delta V(m) 1
        Eigen::MatrixXd a(n, n);
        Eigen::VectorXd rhs(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j)
                a(i, j) = (i == j ? 1.0 : 0.0) - mdp.gamma * (1.0 - set.delta) * p_pi(i, j) -
                          (j == m ? mdp.gamma * set.delta : 0.0);
            rhs(i) = r_pi[i];
        }
        Eigen::VectorXd sol = a.partialPivLu().solve(rhs);
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = sol(i);
        if (argmin_index(v) == m) return v;
        // Track the least-inconsistent candidate in case of numerical ties.
        double r = std::abs(v[argmin_index(v)] - v[m]);
        if (r < best_residual) {
            best_residual = r;
            best = v;
        }
    }
    return best;
}

namespace {

// Three states (0,1,2 here; 1,2,3 in the write-up), two actions. From state 0
// action a moves to state 1 with r=0, action b to state 2 with r=2; states 1
// and 2 return to 0 with r=1 (state 1 via action a, state 2 via action b).
TabularCMDP counterexample_mdp(double gamma) {
    TabularCMDP mdp;
    mdp.n_states = 3;
    mdp.n_actions = 2;
    mdp.gamma = gamma;
    mdp.kernel = Kernel(3, 2);
    mdp.kernel.row(0, 0)[1] = 1.0;
    mdp.kernel.row(0, 1)[2] = 1.0;
    mdp.kernel.row(1, 0)[0] = 1.0;
    mdp.kernel.row(1, 1)[0] = 1.0;
    mdp.kernel.row(2, 0)[0] = 1.0;
    mdp.kernel.row(2, 1)[0] = 1.0;
    mdp.reward = Mat(3, 2);
    mdp.reward(0, 0) = 0.0;
    mdp.reward(0, 1) = 2.0;
    mdp.reward(1, 0) = mdp.reward(1, 1) = 1.0;
    mdp.reward(2, 0) = mdp.reward(2, 1) = 1.0;
    Mat util(3, 2, 0.0);
    mdp.utilities = {util};
    mdp.thresholds = {0.0};
    mdp.rho = {1.0, 0.0, 0.0};
    mdp.validate(/*unit_range=*/false);
    return mdp;
}

// pi(a|0) = p (logit-exact for p in {0,1,1/3}); state 1 always action a,
// state 2 always action b.
SoftmaxPolicy counterexample_policy(double p_first_action) {
    SoftmaxPolicy pol;
    pol.theta = Mat(3, 2);
    if (p_first_action >= 1.0) {
        pol.theta(0, 0) = 50.0;
        pol.theta(0, 1) = -50.0;
    } else if (p_first_action <= 0.0) {
        pol.theta(0, 0) = -50.0;
        pol.theta(0, 1) = 50.0;
    } else {
        pol.theta(0, 0) = std::log(p_first_action);
        pol.theta(0, 1) = std::log(1.0 - p_first_action);
    }
    pol.theta(1, 0) = 50.0;
    pol.theta(1, 1) = -50.0;
    pol.theta(2, 0) = -50.0;
    pol.theta(2, 1) = 50.0;
    return pol;
}

}  // namespace

CounterexampleReport cmd_counterexample(double gamma, double delta) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("counterexample: gamma must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("counterexample: delta must lie in (0,1)");
    TabularCMDP mdp = counterexample_mdp(gamma);
    ContaminationSet set(delta);

    CounterexampleReport rep;
    rep.gamma = gamma;
    rep.delta = delta;

    SoftmaxPolicy pi1 = counterexample_policy(1.0);
    SoftmaxPolicy pi2 = counterexample_policy(0.0);
    rep.d1 = state_action_visitation(mdp, mdp.kernel, pi1, mdp.rho).d;
    rep.d2 = state_action_visitation(mdp, mdp.kernel, pi2, mdp.rho).d;

    // Closed forms: d1 lives on (1,a),(2,a); d2 on (1,b),(3,b).
    double top = (1.0 - gamma) / (1.0 - gamma * gamma);
    double cycle = gamma * (1.0 - gamma) / (1.0 - gamma * gamma);
    auto residual = [&](const Mat& d, int next_state) {
        double r = 0.0;
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 2; ++a) {
                double want = 0.0;
                if (s == 0 && ((next_state == 1 && a == 0) || (next_state == 2 && a == 1))) want = top;
                if (s == next_state && a == (next_state == 1 ? 0 : 1)) want = cycle;
                r = std::max(r, std::abs(d(s, a) - want));
            }
        return r;
    };
    rep.d1_residual = residual(rep.d1, 1);
    rep.d2_residual = residual(rep.d2, 2);

    // Mixture policy from the occupancy interpolation at lambda = 1/3.
    SoftmaxPolicy mixed = counterexample_policy(1.0 / 3.0);
    Mat probs = policy_probs(mixed);
    Vec v = robust_value_linear_oracle(set, mdp, probs, mdp.reward);
    RobustValues picard = robust_value(set, mdp, mixed, SignalRef::reward());
    if (sup_norm_diff(v, picard.v) > 1e-6)
        throw std::runtime_error("counterexample: linear and Picard solutions disagree");
    rep.v1 = v[0];
    rep.v2 = v[1];
    rep.verdict = std::abs(rep.v1 - rep.v2) > 1e-6;
    return rep;
}

std::string CounterexampleReport::to_json_string() const {
    json j;
    j["gamma"] = gamma;
    j["delta"] = delta;
    j["V_mixed_state1"] = v1;
    j["V_mixed_state2"] = v2;
    auto mat = [](const Mat& m) {
        json rows = json::array();
        for (int r = 0; r < m.rows; ++r) {
            auto row = m.row(r);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        return rows;
    };
    j["d1"] = mat(d1);
    j["d2"] = mat(d2);
    j["d1_closed_form_residual"] = d1_residual;
    j["d2_closed_form_residual"] = d2_residual;
    j["verdict_nonconvex"] = verdict;
    return j.dump(2);
}

// --- Verification suite -----------------------------------------------------

namespace {

SoftmaxPolicy random_policy(const TabularCMDP& mdp, Rng& rng, double scale = 1.0) {
    SoftmaxPolicy pol;
    pol.theta = Mat(mdp.n_states, mdp.n_actions);
    for (double& x : pol.theta.a) x = scale * rng.normal();
    return pol;
}

}  // namespace

std::vector<VerifyCheck> cmd_verify(const TabularCMDP& mdp, double delta, double sigma, uint64_t seed) {
    std::vector<VerifyCheck> checks;
    auto add = [&](const std::string& name, bool ok, const std::string& detail) {
        checks.push_back({name, ok, ok ? "" : detail});
    };

    try {
        mdp.validate();
        add("mdp_invariants", true, "");
    } catch (const std::exception& e) {
        add("mdp_invariants", false, e.what());
        return checks;  // the rest assumes a valid instance
    }

    Rng rng(seed);
    ContaminationSet set(delta);
    SoftmaxPolicy pol = random_policy(mdp, rng);
    double range = 1.0 / (1.0 - mdp.gamma);

    {  // contraction of both operators on random pairs
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            Vec v(mdp.n_states), w(mdp.n_states);
            for (double& x : v) x = rng.uniform(0.0, range);
            for (double& x : w) x = rng.uniform(0.0, range);
            double dvw = sup_norm_diff(v, w);
            Vec tv = robust_bellman_apply(set, mdp, pol, mdp.reward, v);
            Vec tw = robust_bellman_apply(set, mdp, pol, mdp.reward, w);
            worst = std::max(worst, sup_norm_diff(tv, tw) - mdp.gamma * dvw);
            Vec sv = smoothed_bellman_apply(set, mdp, pol, mdp.reward, sigma, v);
            Vec sw = smoothed_bellman_apply(set, mdp, pol, mdp.reward, sigma, w);
            worst = std::max(worst, sup_norm_diff(sv, sw) - mdp.gamma * dvw);
        }
        add("bellman_contraction", worst <= 1e-9, "contraction excess " + format_double(worst));
    }
    {  // monotonicity
        bool ok = true;
        std::string detail;
        for (int i = 0; i < 50 && ok; ++i) {
            Vec v(mdp.n_states), w(mdp.n_states);
            for (int s = 0; s < mdp.n_states; ++s) {
                v[s] = rng.uniform(0.0, range);
                w[s] = v[s] + rng.uniform(0.0, 1.0);
            }
            Vec tv = robust_bellman_apply(set, mdp, pol, mdp.reward, v);
            Vec tw = robust_bellman_apply(set, mdp, pol, mdp.reward, w);
            for (int s = 0; s < mdp.n_states; ++s)
                if (tv[s] > tw[s] + 1e-12) {
                    ok = false;
                    detail = "state " + std::to_string(s);
                }
        }
        add("bellman_monotonicity", ok, detail);
    }
    {  // robust value below centroid value
        RobustValues rv = robust_value(set, mdp, pol, SignalRef::reward());
        Vec nominal = evaluate_policy(mdp, mdp.kernel, pol, mdp.reward);
        bool ok = true;
        std::string detail;
        for (int s = 0; s < mdp.n_states; ++s)
            if (rv.v[s] > nominal[s] + 1e-8) {
                ok = false;
                detail = "state " + std::to_string(s) + ": robust " + format_double(rv.v[s]) +
                         " > centroid " + format_double(nominal[s]);
            }
        add("robust_below_centroid", ok, detail);
    }
    {  // LSE sandwich
        bool ok = true;
        std::string detail;
        for (int i = 0; i < 100 && ok; ++i) {
            Vec v(mdp.n_states);
            for (double& x : v) x = rng.uniform(0.0, range);
            double lse = log_sum_exp(sigma, v);
            double vmin = *std::min_element(v.begin(), v.end());
            double low = vmin - std::log(static_cast<double>(mdp.n_states)) / std::abs(sigma);
            if (!(lse <= vmin + 1e-12 && lse >= low - 1e-12)) {
                ok = false;
                detail = "lse " + format_double(lse) + " outside [" + format_double(low) + ", " +
                         format_double(vmin) + "]";
            }
        }
        add("lse_sandwich", ok, detail);
    }
    if (mdp.n_states <= 6) {  // vertex brute force
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            Vec v(mdp.n_states);
            for (double& x : v) x = rng.uniform(0.0, range);
            Vec fast = robust_bellman_apply(set, mdp, pol, mdp.reward, v);
            Mat probs = policy_probs(pol);
            Vec brute(mdp.n_states, 0.0);
            for (int s = 0; s < mdp.n_states; ++s) {
                double acc = 0.0;
                for (int a = 0; a < mdp.n_actions; ++a) {
                    double best = 1e300;
                    for (int corner = 0; corner < mdp.n_states; ++corner) {
                        double support = (1.0 - delta) * dot(mdp.kernel.row(s, a), v) + delta * v[corner];
                        best = std::min(best, support);
                    }
                    acc += probs(s, a) * (mdp.reward(s, a) + mdp.gamma * best);
                }
                brute[s] = acc;
            }
            worst = std::max(worst, sup_norm_diff(fast, brute));
        }
        add("vertex_optimality", worst <= 1e-10, "max deviation " + format_double(worst));
    }
    {  // delta = 0 equivalence
        ContaminationSet none(0.0);
        RobustValues rv = robust_value(none, mdp, pol, SignalRef::reward());
        Vec nominal = evaluate_policy(mdp, mdp.kernel, pol, mdp.reward);
        double dev = sup_norm_diff(rv.v, nominal);
        add("delta_zero_equivalence", dev <= 1e-8, "max deviation " + format_double(dev));
    }
    {  // visitation flow residual
        Visitation vis = state_action_visitation(mdp, mdp.kernel, pol, mdp.rho);
        double worst = 0.0;
        for (int s = 0; s < mdp.n_states; ++s) {
            double inflow = (1.0 - mdp.gamma) * mdp.rho[s];
            for (int s2 = 0; s2 < mdp.n_states; ++s2)
                for (int a = 0; a < mdp.n_actions; ++a)
                    inflow += mdp.gamma * mdp.kernel.row(s2, a)[s] * vis.d(s2, a);
            double outflow = 0.0;
            for (int a = 0; a < mdp.n_actions; ++a) outflow += vis.d(s, a);
            worst = std::max(worst, std::abs(inflow - outflow));
        }
        add("visitation_flow", worst <= 1e-8, "max residual " + format_double(worst));
    }
    {  // worst-case kernel reproduces the robust value
        RobustValues rv = robust_value(set, mdp, pol, SignalRef::reward());
        Kernel wk = worst_case_kernel(set, mdp, rv.v);
        Vec under = evaluate_policy(mdp, wk, pol, mdp.reward);
        double dev = sup_norm_diff(rv.v, under);
        add("worst_case_kernel_consistency", dev <= 1e-6, "max deviation " + format_double(dev));
    }
    return checks;
}

}  // namespace rcrl
