#pragma once

#include "posegen/config.hpp"

#include <string>
#include <utility>
#include <vector>

namespace posegen {

/** Self-describing model snapshot: network config, step counter, a named
 *  tensor table (model weights and, for training checkpoints, optimizer
 *  moments) and a free-form JSON `extra` section (optimizer counters, data
 *  rng state, training-config echo). */
struct CheckpointData {
    NetConfig net;
    long long step = 0;
    std::vector<std::pair<std::string, Tensor>> tensors;
    nlohmann::json extra = nlohmann::json::object();

    const Tensor* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint(const std::string& path);

/** Copy all three networks' parameters into the tensor table under
 *  enc./gen./disc. prefixes. */
void pack_models(const ModelBundle& m, CheckpointData& out);

/** Rebuild networks from a snapshot. Fails loudly when the stored config or
 *  any tensor name/shape disagrees with what the config implies. */
ModelBundle restore_models(const CheckpointData& in);

} // namespace posegen
