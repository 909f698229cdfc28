#include "rcrl/envs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcrl/rng.hpp"

namespace rcrl {

using nlohmann::json;

EnvSpec EnvSpec::parse_kind(const std::string& name) {
    EnvSpec spec;
    if (name == "garnet") spec.kind = Kind::garnet;
    else if (name == "frozen_lake") spec.kind = Kind::frozen_lake;
    else if (name == "taxi") spec.kind = Kind::taxi;
    else if (name == "n_chain") spec.kind = Kind::n_chain;
    else throw std::invalid_argument("unknown environment kind: " + name);
    return spec;
}

double default_threshold(const TabularCMDP& mdp, uint64_t seed, int n_policies) {
    Rng rng(splitmix64(seed ^ 0xb0b0b0b0ULL));
    double best = 0.0;
    for (int i = 0; i < n_policies; ++i) {
        SoftmaxPolicy pol;
        pol.theta = Mat(mdp.n_states, mdp.n_actions);
        for (double& x : pol.theta.a) x = rng.normal();
        Vec v = evaluate_policy(mdp, mdp.kernel, pol, mdp.utilities[0]);
        best = std::max(best, dot(mdp.rho, v));
    }
    return 0.5 * best;
}

namespace {

json base_meta(const char* kind, uint64_t seed, double gamma) {
    json meta;
    meta["kind"] = kind;
    meta["seed"] = seed;
    meta["gamma"] = gamma;
    meta["threshold_rule"] = "0.5 * max utility value over 64 random policies (toolkit choice; not stated by the source experiments)";
    return meta;
}

void finish_threshold(TabularCMDP& mdp, std::optional<double> threshold, uint64_t seed, json& meta) {
    double b = threshold ? *threshold : default_threshold(mdp, seed);
    mdp.thresholds = {b};
    meta["threshold"] = b;
    meta["threshold_overridden"] = threshold.has_value();
}

}  // namespace

GeneratedEnv garnet(int sn, int an, uint64_t seed, double gamma, std::optional<double> threshold) {
    if (sn < 2 || an < 1) throw std::invalid_argument("garnet: need sn >= 2, an >= 1");
    Rng rng(seed);
    TabularCMDP mdp;
    mdp.n_states = sn;
    mdp.n_actions = an;
    mdp.gamma = gamma;
    mdp.kernel = Kernel(sn, an);
    // Dirichlet(1,...,1) rows: normalized i.i.d. exponentials.
    for (int s = 0; s < sn; ++s)
        for (int a = 0; a < an; ++a) {
            auto row = mdp.kernel.row(s, a);
            double sum = 0.0;
            for (int s2 = 0; s2 < sn; ++s2) {
                row[s2] = rng.exponential();
                sum += row[s2];
            }
            for (int s2 = 0; s2 < sn; ++s2) row[s2] /= sum;
        }
    mdp.reward = Mat(sn, an);
    for (double& x : mdp.reward.a) x = rng.uniform01();
    Mat util(sn, an);
    for (double& x : util.a) x = rng.uniform01();
    mdp.utilities = {util};
    mdp.rho = Vec(sn, 1.0 / sn);

    json meta = base_meta("garnet", seed, gamma);
    meta["sn"] = sn;
    meta["an"] = an;
    meta["reward_raw_range"] = {0.0, 1.0};
    meta["utility_raw_range"] = {0.0, 1.0};
    finish_threshold(mdp, threshold, seed, meta);
    mdp.validate();
    return {std::move(mdp), meta.dump(2)};
}

namespace {

const std::vector<std::string>& lake_map(int size) {
    static const std::vector<std::string> four = {"SFFF", "FHFH", "FFFH", "HFFG"};
    static const std::vector<std::string> eight = {"SFFFFFFF", "FFFFFFFF", "FFFHFFFF", "FFFFFHFF",
                                                   "FFFHFFFF", "FHHFFFHF", "FHFFHFHF", "FFFHFFFG"};
    if (size == 4) return four;
    if (size == 8) return eight;
    throw std::invalid_argument("frozen_lake: size must be 4 or 8");
}

}  // namespace

GeneratedEnv frozen_lake(int size, uint64_t seed, double gamma, std::optional<double> threshold) {
    const auto& map = lake_map(size);
    const int n = size * size;
    const int n_actions = 4;  // left, down, right, up
    Rng rng(seed);

    auto cell = [&](int s) { return map[s / size][s % size]; };
    int start = 0;
    for (int s = 0; s < n; ++s)
        if (cell(s) == 'S') start = s;

    auto move = [&](int s, int dir) {
        int r = s / size, c = s % size;
        switch (dir) {
            case 0: c = std::max(c - 1, 0); break;
            case 1: r = std::min(r + 1, size - 1); break;
            case 2: c = std::min(c + 1, size - 1); break;
            case 3: r = std::max(r - 1, 0); break;
        }
        return r * size + c;
    };

    TabularCMDP mdp;
    mdp.n_states = n;
    mdp.n_actions = n_actions;
    mdp.gamma = gamma;
    mdp.kernel = Kernel(n, n_actions);
    mdp.reward = Mat(n, n_actions);
    Mat util(n, n_actions);

    const double r_lo = -10.0, r_hi = 20.0;
    for (int s = 0; s < n; ++s) {
        char t = cell(s);
        bool absorbing = (t == 'H' || t == 'G');
        for (int a = 0; a < n_actions; ++a) {
            auto row = mdp.kernel.row(s, a);
            if (absorbing) {
                row[start] = 1.0;  // episode resets at holes and at the goal
            } else {
                // Slippery dynamics: intended direction and both
                // perpendiculars, 1/3 each.
                for (int d : {(a + 3) % 4, a, (a + 1) % 4}) row[move(s, d)] += 1.0 / 3.0;
            }
            double raw_r = (t == 'H') ? -10.0 : (t == 'G' ? 20.0 : 0.0);
            mdp.reward(s, a) = (raw_r - r_lo) / (r_hi - r_lo);
            util(s, a) = (t == 'H') ? 0.0 : (t == 'G' ? 1.0 : rng.uniform01());
        }
    }
    mdp.utilities = {util};
    mdp.rho = Vec(n, 0.0);
    mdp.rho[start] = 1.0;

    json meta = base_meta("frozen_lake", seed, gamma);
    meta["size"] = size;
    meta["reward_raw_range"] = {r_lo, r_hi};
    meta["utility_raw_range"] = {0.0, 1.0};
    finish_threshold(mdp, threshold, seed, meta);
    mdp.validate();
    return {std::move(mdp), meta.dump(2)};
}

GeneratedEnv taxi(uint64_t seed, double gamma, std::optional<double> threshold) {
    constexpr int grid = 5;
    constexpr int n_pass = 5;  // four depots + in-taxi
    constexpr int n_dest = 4;
    constexpr int n = grid * grid * n_pass * n_dest;  // 500
    constexpr int n_actions = 6;                      // south, north, east, west, pickup, dropoff
    const std::array<std::pair<int, int>, 4> depots = {{{0, 0}, {0, 4}, {4, 0}, {4, 3}}};

    auto encode = [&](int row, int col, int pass, int dest) {
        return ((row * grid + col) * n_pass + pass) * n_dest + dest;
    };

    // East-west walls of the classic 5x5 map, as {row, col} meaning a wall
    // between (row, col) and (row, col+1).
    const std::array<std::pair<int, int>, 6> walls = {{{0, 1}, {1, 1}, {3, 0}, {4, 0}, {3, 2}, {4, 2}}};
    auto blocked = [&](int row, int col, int col2) {
        int lo = std::min(col, col2);
        for (auto [wr, wc] : walls)
            if (wr == row && wc == lo) return true;
        return false;
    };

    Vec rho(n, 0.0);
    {
        int starts = 0;
        for (int p = 0; p < 4; ++p)
            for (int d = 0; d < n_dest; ++d)
                if (p != d) starts += grid * grid;
        double w = 1.0 / starts;
        for (int row = 0; row < grid; ++row)
            for (int col = 0; col < grid; ++col)
                for (int p = 0; p < 4; ++p)
                    for (int d = 0; d < n_dest; ++d)
                        if (p != d) rho[encode(row, col, p, d)] = w;
    }

    Rng rng(seed);
    TabularCMDP mdp;
    mdp.n_states = n;
    mdp.n_actions = n_actions;
    mdp.gamma = gamma;
    mdp.kernel = Kernel(n, n_actions);
    mdp.reward = Mat(n, n_actions);
    Mat util(n, n_actions);

    const double r_lo = -1.0, r_hi = 20.0;
    for (int row = 0; row < grid; ++row)
        for (int col = 0; col < grid; ++col)
            for (int p = 0; p < n_pass; ++p)
                for (int d = 0; d < n_dest; ++d) {
                    int s = encode(row, col, p, d);
                    int at_depot = -1;
                    for (int i = 0; i < 4; ++i)
                        if (depots[i].first == row && depots[i].second == col) at_depot = i;
                    for (int a = 0; a < n_actions; ++a) {
                        auto krow = mdp.kernel.row(s, a);
                        double raw_r = -1.0;
                        if (a < 4) {
                            int nr = row, nc = col;
                            if (a == 0) nr = std::min(row + 1, grid - 1);
                            if (a == 1) nr = std::max(row - 1, 0);
                            if (a == 2 && col < grid - 1 && !blocked(row, col, col + 1)) nc = col + 1;
                            if (a == 3 && col > 0 && !blocked(row, col - 1, col)) nc = col - 1;
                            krow[encode(nr, nc, p, d)] = 1.0;
                        } else if (a == 4) {  // pickup
                            int np = (at_depot >= 0 && p == at_depot) ? 4 : p;
                            krow[encode(row, col, np, d)] = 1.0;
                        } else {  // dropoff
                            if (p == 4 && at_depot == d) {
                                raw_r = 20.0;  // successful dropoff; episode resets
                                for (int s2 = 0; s2 < n; ++s2)
                                    if (rho[s2] > 0.0) krow[s2] = rho[s2];
                            } else if (p == 4 && at_depot >= 0) {
                                krow[encode(row, col, at_depot, d)] = 1.0;
                            } else {
                                krow[s] = 1.0;
                            }
                        }
                        mdp.reward(s, a) = (raw_r - r_lo) / (r_hi - r_lo);
                        util(s, a) = rng.uniform01();
                    }
                }
    mdp.utilities = {util};
    mdp.rho = rho;

    json meta = base_meta("taxi", seed, gamma);
    meta["reward_raw_range"] = {r_lo, r_hi};
    meta["utility_raw_range"] = {0.0, 1.0};
    finish_threshold(mdp, threshold, seed, meta);
    mdp.validate();
    return {std::move(mdp), meta.dump(2)};
}

GeneratedEnv n_chain(int n, uint64_t seed, double slip, double gamma, std::optional<double> threshold) {
    if (n < 2) throw std::invalid_argument("n_chain: need n >= 2");
    if (!(slip >= 0.0 && slip <= 0.5)) throw std::invalid_argument("n_chain: slip must lie in [0, 0.5]");

    TabularCMDP mdp;
    mdp.n_states = n;
    mdp.n_actions = 2;  // left, right
    mdp.gamma = gamma;
    mdp.kernel = Kernel(n, 2);
    mdp.reward = Mat(n, 2);
    Mat util(n, 2);

    const double r_lo = 0.0, r_hi = 41.0;  // base signal plus the arrival bonus
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < 2; ++a) {
            int fwd = a == 0 ? std::max(s - 1, 0) : std::min(s + 1, n - 1);
            int back = a == 0 ? std::min(s + 1, n - 1) : std::max(s - 1, 0);
            auto row = mdp.kernel.row(s, a);
            row[fwd] += 1.0 - slip;
            row[back] += slip;
            double base = a == 0 ? 1.0 : 0.0;
            double raw_r = base + 40.0 * row[n - 1];  // bonus on arriving at the last node
            mdp.reward(s, a) = (raw_r - r_lo) / (r_hi - r_lo);
            util(s, a) = (a == 0 ? 0.0 : 2.0) / 2.0;
        }
    mdp.utilities = {util};
    mdp.rho = Vec(n, 0.0);
    mdp.rho[0] = 1.0;

    json meta = base_meta("n_chain", seed, gamma);
    meta["n"] = n;
    meta["slip"] = slip;
    meta["reward_raw_range"] = {r_lo, r_hi};
    meta["utility_raw_range"] = {0.0, 2.0};
    finish_threshold(mdp, threshold, seed, meta);
    mdp.validate();
    return {std::move(mdp), meta.dump(2)};
}

GeneratedEnv generate_env(const EnvSpec& spec) {
    switch (spec.kind) {
        case EnvSpec::Kind::garnet: return garnet(spec.sn, spec.an, spec.seed, spec.gamma, spec.threshold);
        case EnvSpec::Kind::frozen_lake: return frozen_lake(spec.size, spec.seed, spec.gamma, spec.threshold);
        case EnvSpec::Kind::taxi: return taxi(spec.seed, spec.gamma, spec.threshold);
        case EnvSpec::Kind::n_chain: return n_chain(spec.n, spec.seed, spec.slip, spec.gamma, spec.threshold);
    }
    throw std::invalid_argument("generate_env: unknown kind");
}

}  // namespace rcrl
