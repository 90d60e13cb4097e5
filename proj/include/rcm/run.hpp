#pragma once

#include "rcm/lp_manifold.hpp"
#include "rcm/systems.hpp"

#include <json.hpp>

namespace rcm {

using Json = nlohmann::json;

struct NoiseSpec {
    double hurst = 0.4;
    int dim = 1;
    std::vector<std::uint64_t> seeds = {1};
    double horizon = 8.0; // two-sided paths live on [-horizon, horizon]
    int mesh_exp = 8;     // mesh 2^-mesh_exp
    int levy_level = -1;  // -1: finest (lift the sampled path itself)
    bool deterministic_zero = false; // W = 0 (deterministic systems)
};

struct ExperimentConfig {
    std::string system; // registry key; empty when inline_A is set
    Mat inline_A;       // optional inline linear part (F, G by name)
    std::string inline_F = "zero";
    std::string inline_G = "zero";
    double alpha = 0.45;
    NoiseSpec noise;
    SolveOptions solver;
    LpConfig lp;
    std::optional<double> lp_eta; // default: (gamma - beta)/2
    std::optional<double> lp_K;   // default: the closed-form budget
    bool trichotomy = false;
    Vec xi;       // initial condition / chart anchor
    double t = 0.5, tau = 0.5; // cocycle times
    int steps = 1;             // invariance steps
    double cs = -1.0;          // C_S override (< 0: fit from the group)
    std::string out_dir = ".";
};

// Strict parse: unknown keys are rejected, "version" must be 1.
ExperimentConfig parse_config(const Json& j);
Json config_to_json(const ExperimentConfig& c);
std::uint64_t config_hash(const ExperimentConfig& c);

struct RunRecord {
    std::uint64_t config_hash = 0;
    Json constants = Json::object();
    Json diagnostics = Json::object();
    std::vector<std::string> artifacts;
    int exit_code = 0; // 0 pass, 2 diagnostic failure
    Json to_json() const;
};

Json rough_path_to_json(const RoughPath& rp);
RoughPath rough_path_from_json(const Json& j);
Json splitting_to_json(const Splitting& s);

TestSystem resolve_system(const ExperimentConfig& c);

// Noise path for a seed on [-horizon, horizon] (fBm or the zero path).
SampledPath make_noise_path(const NoiseSpec& n, std::uint64_t seed);
// Same on an explicit integer span [left, right].
SampledPath make_noise_path_span(const NoiseSpec& n, std::uint64_t seed, int left, int right);

RunRecord run_sample_fbm(const ExperimentConfig& c);
RunRecord run_lift(const ExperimentConfig& c);
RunRecord run_solve_rde(const ExperimentConfig& c);
RunRecord run_center_manifold(const ExperimentConfig& c);
RunRecord run_verify_invariance(const ExperimentConfig& c);
RunRecord run_gap_check(const ExperimentConfig& c);
RunRecord run_cocycle_check(const ExperimentConfig& c);

int max_threads(); // ROUGH_MANIFOLD_THREADS, default 1

} // namespace rcm
