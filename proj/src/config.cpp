#include "posegen/config.hpp"

#include <cstdlib>
#include <fstream>

namespace posegen {
using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* section) {
    require(j.is_object(), ErrorClass::config,
            std::string("config section '") + section + "' must be an object");
    for (const auto& [key, val] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        require(ok, ErrorClass::config,
                "unknown key '" + key + "' in config section '" + section + "'");
    }
}

template <typename T>
void fetch(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw Error(ErrorClass::config,
                        std::string("bad value for config key '") + key + "': " + e.what());
        }
    }
}

} // namespace

json to_json(const NetConfig& c) {
    return {{"image_size", c.image_size}, {"atlas_size", c.atlas_size},
            {"parts", c.parts},           {"latent_dim", c.latent_dim},
            {"base_channels", c.base_channels}, {"noparts", c.noparts}};
}

json to_json(const TrainConfig& c) {
    return {{"lr", c.lr},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"adam_eps", c.adam_eps},
            {"batch_size", c.batch_size},
            {"steps", c.steps},
            {"checkpoint_every", c.checkpoint_every},
            {"seed", c.seed},
            {"weights",
             {{"vgg", c.weights.vgg},
              {"face", c.weights.face},
              {"adv", c.weights.adv},
              {"fm", c.weights.fm},
              {"kl", c.weights.kl}}}};
}

json to_json(const SynthSpec& c) {
    return {{"identities", c.identities},
            {"frames", c.frames},
            {"image_size", c.image_size},
            {"seed", c.seed}};
}

json to_json(const EvalConfig& c) {
    return {{"n_poses", c.n_poses}, {"n_samples", c.n_samples}, {"seed", c.seed}};
}

json to_json(const RunConfig& c) {
    return {{"net", to_json(c.net)},
            {"train", to_json(c.train)},
            {"synth", to_json(c.synth)},
            {"eval", to_json(c.eval)},
            {"data_root", c.data_root}};
}

NetConfig net_config_from_json(const json& j) {
    check_keys(j, {"image_size", "atlas_size", "parts", "latent_dim", "base_channels", "noparts"},
               "net");
    NetConfig c;
    fetch(j, "image_size", c.image_size);
    fetch(j, "atlas_size", c.atlas_size);
    fetch(j, "parts", c.parts);
    fetch(j, "latent_dim", c.latent_dim);
    fetch(j, "base_channels", c.base_channels);
    fetch(j, "noparts", c.noparts);
    return c;
}

TrainConfig train_config_from_json(const json& j) {
    check_keys(j,
               {"lr", "beta1", "beta2", "adam_eps", "batch_size", "steps", "checkpoint_every",
                "seed", "weights"},
               "train");
    TrainConfig c;
    fetch(j, "lr", c.lr);
    fetch(j, "beta1", c.beta1);
    fetch(j, "beta2", c.beta2);
    fetch(j, "adam_eps", c.adam_eps);
    fetch(j, "batch_size", c.batch_size);
    fetch(j, "steps", c.steps);
    fetch(j, "checkpoint_every", c.checkpoint_every);
    fetch(j, "seed", c.seed);
    if (j.contains("weights")) {
        const json& w = j.at("weights");
        check_keys(w, {"vgg", "face", "adv", "fm", "kl"}, "train.weights");
        fetch(w, "vgg", c.weights.vgg);
        fetch(w, "face", c.weights.face);
        fetch(w, "adv", c.weights.adv);
        fetch(w, "fm", c.weights.fm);
        fetch(w, "kl", c.weights.kl);
    }
    return c;
}

SynthSpec synth_spec_from_json(const json& j) {
    check_keys(j, {"identities", "frames", "image_size", "seed"}, "synth");
    SynthSpec c;
    fetch(j, "identities", c.identities);
    fetch(j, "frames", c.frames);
    fetch(j, "image_size", c.image_size);
    fetch(j, "seed", c.seed);
    return c;
}

EvalConfig eval_config_from_json(const json& j) {
    check_keys(j, {"n_poses", "n_samples", "seed"}, "eval");
    EvalConfig c;
    fetch(j, "n_poses", c.n_poses);
    fetch(j, "n_samples", c.n_samples);
    fetch(j, "seed", c.seed);
    return c;
}

RunConfig run_config_from_json(const json& j) {
    check_keys(j, {"net", "train", "synth", "eval", "data_root"}, "root");
    RunConfig c;
    if (j.contains("net")) c.net = net_config_from_json(j.at("net"));
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
    if (j.contains("synth")) c.synth = synth_spec_from_json(j.at("synth"));
    if (j.contains("eval")) c.eval = eval_config_from_json(j.at("eval"));
    fetch(j, "data_root", c.data_root);
    return c;
}

RunConfig load_run_config(const std::string& path) {
    if (path.empty()) return RunConfig{};
    std::ifstream f(path);
    require(f.good(), ErrorClass::io, "cannot open config file " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorClass::config, "config file " + path + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

std::string resolve_data_root(const RunConfig& cfg) {
    if (!cfg.data_root.empty()) return cfg.data_root;
    if (const char* env = std::getenv("POSEGEN_DATA_ROOT"); env && *env) return env;
    throw Error(ErrorClass::config,
                "no dataset root: set data_root in the config or POSEGEN_DATA_ROOT");
}

namespace {

const std::map<std::string, std::set<int>>& groups6() {
    static const std::map<std::string, std::set<int>> table = {
        {"head", {1}},          {"torso", {2}},
        {"left_arm", {3}},      {"right_arm", {4}},
        {"left_leg", {5}},      {"right_leg", {6}},
        {"arms", {3, 4}},       {"legs", {5, 6}},
        {"upper_body", {2, 3, 4}}, {"lower_body", {5, 6}},
    };
    return table;
}

const std::map<std::string, std::set<int>>& groups24() {
    static const std::map<std::string, std::set<int>> table = {
        {"torso", {1, 2}},
        {"hands", {3, 4}},
        {"feet", {5, 6}},
        {"upper_legs", {7, 8, 9, 10}},
        {"lower_legs", {11, 12, 13, 14}},
        {"upper_arms", {15, 16, 17, 18}},
        {"lower_arms", {19, 20, 21, 22}},
        {"head", {23, 24}},
        {"arms", {15, 16, 17, 18, 19, 20, 21, 22}},
        {"legs", {7, 8, 9, 10, 11, 12, 13, 14}},
        {"upper_body", {1, 2, 3, 4, 15, 16, 17, 18, 19, 20, 21, 22}},
        {"lower_body", {5, 6, 7, 8, 9, 10, 11, 12, 13, 14}},
    };
    return table;
}

} // namespace

std::set<int> resolve_part_group(const std::string& group, int parts) {
    require(!group.empty(), ErrorClass::invalid_part_group, "empty part group");
    if (group.find_first_not_of("0123456789,") == std::string::npos) {
        std::set<int> out;
        size_t pos = 0;
        while (pos < group.size()) {
            size_t comma = group.find(',', pos);
            if (comma == std::string::npos) comma = group.size();
            const std::string tok = group.substr(pos, comma - pos);
            require(!tok.empty(), ErrorClass::invalid_part_group,
                    "malformed part list '" + group + "'");
            const int p = std::stoi(tok);
            require(p >= 1 && p <= parts, ErrorClass::invalid_part_group,
                    "part index " + tok + " outside 1.." + std::to_string(parts));
            out.insert(p);
            pos = comma + 1;
        }
        require(!out.empty(), ErrorClass::invalid_part_group,
                "malformed part list '" + group + "'");
        return out;
    }
    const auto& table = parts == kSynthParts ? groups6() : groups24();
    require(parts == kSynthParts || parts == kMaxParts, ErrorClass::invalid_part_group,
            "named part groups exist only for 6- or 24-part maps; use explicit indices");
    auto it = table.find(group);
    require(it != table.end(), ErrorClass::invalid_part_group,
            "unknown part group '" + group + "'");
    return it->second;
}

std::set<int> head_parts(int parts) {
    if (parts == kSynthParts) return {1};
    if (parts == kMaxParts) return {23, 24};
    return {};
}

} // namespace posegen
