#pragma once

#include "posegen/data.hpp"
#include "posegen/losses.hpp"
#include "posegen/networks.hpp"

#include <json.hpp>

#include <set>
#include <string>

namespace posegen {

struct TrainConfig {
    Scalar lr = 2e-4;
    Scalar beta1 = 0.5;
    Scalar beta2 = 0.999;
    Scalar adam_eps = 1e-8;
    int batch_size = 2;
    long long steps = 1000;
    long long checkpoint_every = 500;
    std::uint64_t seed = 1;
    LossWeights weights;

    bool operator==(const TrainConfig&) const = default;
};

struct EvalConfig {
    int n_poses = 5;
    int n_samples = 16;
    std::uint64_t seed = 7;

    bool operator==(const EvalConfig&) const = default;
};

/** Top-level run configuration: one JSON file with per-module sections; any
 *  absent key keeps its default, unknown keys are rejected. */
struct RunConfig {
    NetConfig net;
    TrainConfig train;
    SynthSpec synth;
    EvalConfig eval;
    std::string data_root; // falls back to POSEGEN_DATA_ROOT

    bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const NetConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const SynthSpec& c);
nlohmann::json to_json(const EvalConfig& c);
nlohmann::json to_json(const RunConfig& c);

NetConfig net_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
SynthSpec synth_spec_from_json(const nlohmann::json& j);
EvalConfig eval_config_from_json(const nlohmann::json& j);
RunConfig run_config_from_json(const nlohmann::json& j);

/** Parse a config file; empty path yields all defaults. */
RunConfig load_run_config(const std::string& path);

/** Resolve the dataset root: explicit value, else POSEGEN_DATA_ROOT. */
std::string resolve_data_root(const RunConfig& cfg);

/** Part-group name tables. A group argument is either a comma-separated list
 *  of part indices ("3,4") or a named group. Named groups exist for the
 *  6-part synthetic figures (head, torso, left_arm, right_arm, left_leg,
 *  right_leg, arms, legs, upper_body, lower_body) and for the 24-part
 *  convention (head, torso, hands, feet, upper_arms, lower_arms, upper_legs,
 *  lower_legs, arms, legs, upper_body, lower_body). */
std::set<int> resolve_part_group(const std::string& group, int parts);

/** Parts treated as the face/head region by the identity loss. */
std::set<int> head_parts(int parts);

} // namespace posegen
