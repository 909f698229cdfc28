#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "rcrl/bench.hpp"

namespace {

using namespace rcrl;

int run_gen(const std::string& kind, int sn, int an, int size, int n, double slip, long seed,
            double gamma, double threshold, bool has_threshold, const std::string& out) {
    EnvSpec spec = EnvSpec::parse_kind(kind);
    spec.sn = sn;
    spec.an = an;
    spec.size = size;
    spec.n = n;
    spec.slip = slip;
    spec.seed = static_cast<uint64_t>(seed);
    spec.gamma = gamma;
    if (has_threshold) spec.threshold = threshold;
    GeneratedEnv env = generate_env(spec);
    std::string text = env.mdp.to_json_string();
    write_text_file(out, text);
    write_text_file(out + ".manifest.json", env.meta_json);
    std::cout << "wrote " << out << " (hash " << hex64(fnv1a64(text)) << ")\n";
    return 0;
}

int run_train(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out, int jobs) {
    KeyValueConfig cfg =
        config_path.empty() ? KeyValueConfig::from_string("") : KeyValueConfig::from_file(config_path);
    for (const std::string& kv : overrides) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "override must be key=value: " << kv << "\n";
            return 2;
        }
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (jobs > 0) cfg.set("jobs", std::to_string(jobs));

    TrainSetup setup = resolve_train_setup(cfg);
    TrainArtifacts art = cmd_train(setup, out);
    if (art.feasibility_warning)
        std::cerr << "warning: constraint threshold looks unattainable at the returned iterate "
                     "(utility slack < 0); see manifest.json\n";
    std::cout << "wrote artifacts under " << art.out_dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robustcrl: tabular robust constrained RL toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a benchmark environment as JSON");
    std::string kind = "garnet", gen_out = "env.json";
    int sn = 20, an = 10, size = 4, chain_n = 40;
    double slip = 0.1, gen_gamma = 0.95, gen_threshold = 0.0;
    long gen_seed = 0;
    gen->add_option("--kind", kind, "garnet | frozen_lake | taxi | n_chain");
    gen->add_option("--sn", sn, "garnet states");
    gen->add_option("--an", an, "garnet actions");
    gen->add_option("--size", size, "frozen lake side (4 or 8)");
    gen->add_option("--n", chain_n, "chain length");
    gen->add_option("--slip", slip, "chain slip probability");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--gamma", gen_gamma, "discount factor");
    auto* thr_opt = gen->add_option("--threshold", gen_threshold, "constraint threshold override");
    gen->add_option("--out", gen_out, "output path");

    // train
    auto* train = app.add_subcommand("train", "run a training configuration");
    std::string config_path, train_out = "out";
    std::vector<std::string> overrides;
    int jobs = 0;
    train->add_option("--config", config_path, "key=value config file");
    train->add_option("--set", overrides, "config override key=value (repeatable)");
    train->add_option("--out", train_out, "output directory");
    train->add_option("--jobs", jobs, "worker threads for replicas");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate logged policies of finished runs");
    std::vector<std::string> run_dirs;
    std::string eval_out = "eval_out", env_override;
    int n_reps = 30, stride = 1;
    long sample_size = 200;
    long eval_seed = 99;
    eval->add_option("--run", run_dirs, "run directory containing trace.csv/policies.csv (repeatable)")
        ->required();
    eval->add_option("--out", eval_out, "output directory");
    eval->add_option("--n-reps", n_reps, "TD evaluation repetitions per iterate");
    eval->add_option("--sample-size", sample_size, "TD sample size per repetition");
    eval->add_option("--stride", stride, "evaluate every k-th logged iterate");
    eval->add_option("--seed", eval_seed, "evaluation RNG seed");
    eval->add_option("--env", env_override, "environment JSON that must match the run's hash");

    // counterexample
    auto* cx = app.add_subcommand("counterexample", "verify the non-convexity witness");
    double cx_gamma = 0.9, cx_delta = 0.1;
    std::string cx_out;
    cx->add_option("--gamma", cx_gamma, "discount factor");
    cx->add_option("--delta", cx_delta, "contamination level");
    cx->add_option("--out", cx_out, "output directory for counterexample.json");

    // verify
    auto* verify = app.add_subcommand("verify", "run invariant suites against an environment");
    std::string verify_env;
    double verify_delta = 0.2, verify_sigma = -10.0;
    verify->add_option("--env", verify_env, "environment JSON")->required();
    verify->add_option("--delta", verify_delta, "contamination level");
    verify->add_option("--sigma", verify_sigma, "smoothing parameter");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return run_gen(kind, sn, an, size, chain_n, slip, gen_seed, gen_gamma, gen_threshold,
                           thr_opt->count() > 0, gen_out);
        if (train->parsed()) return run_train(config_path, overrides, train_out, jobs);
        if (eval->parsed()) {
            EvalRequest req;
            for (const std::string& d : run_dirs) req.run_dirs.emplace_back(d);
            req.out_dir = eval_out;
            req.n_reps = n_reps;
            req.sample_size = sample_size;
            req.stride = stride;
            req.seed = static_cast<uint64_t>(eval_seed);
            if (!env_override.empty()) req.env_override_path = env_override;
            cmd_eval(req);
            std::cout << "wrote evaluation under " << req.out_dir.string() << "\n";
            return 0;
        }
        if (cx->parsed()) {
            CounterexampleReport rep = cmd_counterexample(cx_gamma, cx_delta);
            std::string text = rep.to_json_string();
            if (!cx_out.empty()) {
                std::filesystem::create_directories(cx_out);
                write_text_file((std::filesystem::path(cx_out) / "counterexample.json").string(), text);
            }
            std::cout << text << "\n";
            std::cout << (rep.verdict ? "verdict: non-convexity witnessed (V(1) != V(2))"
                                      : "verdict: no witness at these parameters")
                      << "\n";
            return 0;
        }
        if (verify->parsed()) {
            TabularCMDP mdp = TabularCMDP::from_json_string(read_text_file(verify_env));
            auto checks = cmd_verify(mdp, verify_delta, verify_sigma);
            bool all_ok = true;
            for (const auto& c : checks) {
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
                if (!c.passed) std::cout << ": " << c.detail;
                std::cout << "\n";
                all_ok = all_ok && c.passed;
            }
            return all_ok ? 0 : 1;
        }
    } catch (const rcrl::MissingField& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
