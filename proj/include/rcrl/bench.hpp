#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rcrl/config.hpp"
#include "rcrl/envs.hpp"
#include "rcrl/io.hpp"
#include "rcrl/online.hpp"

namespace rcrl {

enum class Method { rpd_exact, online_rpd, heuristic_pd, nonrobust_pd };

const char* method_name(Method m);
Method parse_method(const std::string& name);  // throws on unknown

// Everything a training run needs, resolved from a key-value config.
struct TrainSetup {
    TabularCMDP mdp;
    std::string env_meta_json;  // "{}" when the env came from a file
    std::string env_json;       // canonical serialization (hashed)
    std::string env_hash;

    Method method = Method::online_rpd;
    double delta = 0.2;
    double sigma = -10.0;
    int steps = 100;
    uint64_t base_seed = 1;
    int replicas = 1;
    int jobs = 0;  // 0: hardware concurrency

    std::string schedule_kind = "practical";
    double nu = 0.1, tau = 3.0, xi_scale = 1.05;
    double theta_lr = 1.0, lambda_lr = 0.5;

    double eps_est = 0.2, kappa = 1.0;
    long inner_cap = 200000;
    long inner_floor = 1;
    std::optional<long> fixed_inner;

    ScheduleConstants constants;
    SlaterEstimate slater;
    double lambda_max = 1.0;
    StepSchedule schedule;

    KeyValueConfig config_echo;
};

// Resolves env + schedule + constants; throws MissingField for absent required
// keys (method, T, and env or env_file). ROBUST_CRL_SEED overrides the seed.
TrainSetup resolve_train_setup(const KeyValueConfig& cfg);

struct ReplicaResult {
    uint64_t seed = 0;
    std::vector<RunRecord> trace;
    std::vector<Mat> policy_logits;
    DualIterate final_iterate;
    double final_slack = 0.0;  // smoothed robust utility slack at the returned iterate
};

// Runs one replica deterministically.
ReplicaResult run_replica(const TrainSetup& setup, uint64_t seed);

// Fans replicas over a worker pool; results are returned in seed order no
// matter which worker finishes first.
std::vector<ReplicaResult> run_replicas(const TrainSetup& setup);

// cmd_train: artifacts under out_dir -- env.json, manifest.json and, per
// replica, trace.csv + policies.csv (single replica: directly in out_dir,
// else in seed_<seed>/ subdirectories).
struct TrainArtifacts {
    std::filesystem::path out_dir;
    std::vector<std::filesystem::path> run_dirs;
    bool feasibility_warning = false;
};

TrainArtifacts cmd_train(const TrainSetup& setup, const std::filesystem::path& out_dir);

// cmd_eval over one or more finished run directories (overlayed in the SVGs).
struct EvalRequest {
    std::vector<std::filesystem::path> run_dirs;
    std::filesystem::path out_dir;
    int n_reps = 30;
    long sample_size = 200;
    int stride = 1;
    uint64_t seed = 99;
    std::optional<std::string> env_override_path;  // must hash-match the manifests
};

void cmd_eval(const EvalRequest& req);

// Appendix counterexample verifier: the 3-state / 2-action fixture in which
// mixing the occupancy measures of two deterministic policies is not itself
// an occupancy measure of any policy's worst case.
struct CounterexampleReport {
    double gamma = 0.0;
    double delta = 0.0;
    double v1 = 0.0;  // robust value at state 1 under the mixed policy
    double v2 = 0.0;
    Mat d1;  // visitation of pi1 = (1,0)
    Mat d2;  // visitation of pi2 = (0,1)
    double d1_residual = 0.0;  // max deviation from the closed forms
    double d2_residual = 0.0;
    bool verdict = false;  // |v1 - v2| > 1e-6
    std::string to_json_string() const;
};

CounterexampleReport cmd_counterexample(double gamma, double delta);

// Per-candidate-minimum linear solve of the unsmoothed robust Bellman system;
// returns the self-consistent fixed point (oracle for the Picard solver).
Vec robust_value_linear_oracle(const ContaminationSet& set, const TabularCMDP& mdp,
                               const Mat& probs, const Mat& table);

// cmd_verify: invariant suites against a concrete environment instance.
struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;  // counterexample dump on failure
};

std::vector<VerifyCheck> cmd_verify(const TabularCMDP& mdp, double delta, double sigma,
                                    uint64_t seed = 7);

std::string manifest_json(const TrainSetup& setup, const std::vector<uint64_t>& seeds,
                          double wall_clock_seconds, bool feasibility_warning);

}  // namespace rcrl
