#include "posegen/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace posegen {
using nlohmann::json;

namespace {
constexpr char kMagic[8] = {'P', 'G', 'C', 'K', 'P', 'T', '1', '\n'};
}

const Tensor* CheckpointData::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

void save_checkpoint(const std::string& path, const CheckpointData& data) {
    json header;
    header["net"] = to_json(data.net);
    header["step"] = data.step;
    header["extra"] = data.extra;
    json table = json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : data.tensors) {
        table.push_back({{"name", name}, {"dims", t.dims()}, {"offset", offset}});
        offset += std::uint64_t(t.size()) * sizeof(Scalar);
    }
    header["tensors"] = std::move(table);
    const std::string header_str = header.dump();

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require(f.good(), ErrorClass::io, "cannot write checkpoint " + path);
    f.write(kMagic, sizeof kMagic);
    const std::uint64_t hlen = header_str.size();
    f.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
    f.write(header_str.data(), std::streamsize(header_str.size()));
    for (const auto& [name, t] : data.tensors)
        f.write(reinterpret_cast<const char*>(t.data()),
                std::streamsize(sizeof(Scalar) * size_t(t.size())));
    require(f.good(), ErrorClass::io, "short write on checkpoint " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), ErrorClass::io, "cannot open checkpoint " + path);
    char magic[sizeof kMagic];
    f.read(magic, sizeof magic);
    require(f.good() && std::memcmp(magic, kMagic, sizeof kMagic) == 0, ErrorClass::checkpoint_mismatch,
            path + " is not a model checkpoint");
    std::uint64_t hlen = 0;
    f.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
    require(f.good() && hlen > 0 && hlen < (1ull << 30), ErrorClass::checkpoint_mismatch,
            "corrupt checkpoint header in " + path);
    std::string header_str(hlen, '\0');
    f.read(header_str.data(), std::streamsize(hlen));
    require(f.good(), ErrorClass::checkpoint_mismatch, "truncated checkpoint header in " + path);

    json header;
    try {
        header = json::parse(header_str);
    } catch (const json::exception& e) {
        throw Error(ErrorClass::checkpoint_mismatch,
                    "unreadable checkpoint header in " + path + ": " + e.what());
    }

    CheckpointData data;
    try {
        data.net = net_config_from_json(header.at("net"));
        data.step = header.at("step").get<long long>();
        data.extra = header.value("extra", json::object());
        for (const json& row : header.at("tensors")) {
            const std::string name = row.at("name").get<std::string>();
            const std::vector<int> dims = row.at("dims").get<std::vector<int>>();
            Tensor t = Tensor::zeros(dims);
            f.read(reinterpret_cast<char*>(t.data()),
                   std::streamsize(sizeof(Scalar) * size_t(t.size())));
            require(f.good(), ErrorClass::checkpoint_mismatch,
                    "truncated tensor data for " + name + " in " + path);
            data.tensors.emplace_back(name, std::move(t));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorClass::checkpoint_mismatch,
                    "malformed checkpoint header in " + path + ": " + e.what());
    }
    return data;
}

void pack_models(const ModelBundle& m, CheckpointData& out) {
    out.net = m.cfg;
    out.step = m.step;
    auto dump = [&](const nn::ParamStore& ps, const std::string& prefix) {
        for (const auto& [name, v] : ps.entries())
            out.tensors.emplace_back(prefix + name, v.value());
    };
    dump(m.enc_params, "enc.");
    dump(m.gen_params, "gen.");
    dump(m.disc_params, "disc.");
}

ModelBundle restore_models(const CheckpointData& in) {
    ModelBundle m = create_models(in.net, /*seed=*/0);
    m.step = in.step;
    auto fill = [&](nn::ParamStore& ps, const std::string& prefix) {
        for (const auto& [name, v] : ps.entries()) {
            const Tensor* stored = in.find(prefix + name);
            require(stored != nullptr, ErrorClass::checkpoint_mismatch,
                    "checkpoint lacks tensor " + prefix + name);
            ps.set_value(name, *stored);
        }
    };
    fill(m.enc_params, "enc.");
    fill(m.gen_params, "gen.");
    fill(m.disc_params, "disc.");
    return m;
}

} // namespace posegen
