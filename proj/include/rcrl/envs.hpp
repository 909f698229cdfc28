#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rcrl/mdp.hpp"

namespace rcrl {

// Benchmark environment request. Raw paper signals outside [0,1] are affinely
// rescaled per environment (endpoints recorded in the generation metadata);
// thresholds live on the rescaled scale.
struct EnvSpec {
    enum class Kind { garnet, frozen_lake, taxi, n_chain } kind = Kind::garnet;
    int sn = 20;          // garnet states
    int an = 10;          // garnet actions
    int size = 4;         // frozen lake side, 4 or 8
    int n = 40;           // chain length
    double slip = 0.1;    // chain slip probability
    uint64_t seed = 0;
    double gamma = 0.95;
    std::optional<double> threshold;  // default: rule below

    static EnvSpec parse_kind(const std::string& name);  // throws on unknown kind
};

struct GeneratedEnv {
    TabularCMDP mdp;
    std::string meta_json;  // kind, seed, rescale maps, threshold provenance
};

// Default threshold rule (the paper states no thresholds): half the best
// centroid utility value found over 64 seeded random softmax policies.
double default_threshold(const TabularCMDP& mdp, uint64_t seed, int n_policies = 64);

GeneratedEnv generate_env(const EnvSpec& spec);

// Named generators from the experiment section.
GeneratedEnv garnet(int sn, int an, uint64_t seed, double gamma = 0.95,
                    std::optional<double> threshold = std::nullopt);
GeneratedEnv frozen_lake(int size, uint64_t seed, double gamma = 0.95,
                         std::optional<double> threshold = std::nullopt);
GeneratedEnv taxi(uint64_t seed, double gamma = 0.95,
                  std::optional<double> threshold = std::nullopt);
GeneratedEnv n_chain(int n, uint64_t seed, double slip = 0.1, double gamma = 0.95,
                     std::optional<double> threshold = std::nullopt);

}  // namespace rcrl
