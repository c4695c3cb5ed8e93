#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_util.hpp"

#include "posegen/checkpoint.hpp"

#include <filesystem>
#include <fstream>

using namespace posegen;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
    fs::path p = fs::temp_directory_path() / "posegen_ckpt_test";
    fs::create_directories(p);
    return p;
}

NetConfig tiny_config() {
    NetConfig cfg;
    cfg.image_size = 16;
    cfg.base_channels = 4;
    return cfg;
}

bool bundles_equal(const ModelBundle& a, const ModelBundle& b) {
    auto store_eq = [](const nn::ParamStore& x, const nn::ParamStore& y) {
        if (x.entries().size() != y.entries().size()) return false;
        for (size_t i = 0; i < x.entries().size(); ++i) {
            if (x.entries()[i].first != y.entries()[i].first) return false;
            const Tensor& tx = x.entries()[i].second.value();
            const Tensor& ty = y.entries()[i].second.value();
            if (!tx.same_dims(ty) || (tx.raw() != ty.raw()).any()) return false;
        }
        return true;
    };
    return a.cfg == b.cfg && a.step == b.step && store_eq(a.enc_params, b.enc_params) &&
           store_eq(a.gen_params, b.gen_params) && store_eq(a.disc_params, b.disc_params);
}

} // namespace

TEST_CASE("model snapshots round-trip bit-exactly through disk") {
    ModelBundle m = create_models(tiny_config(), 123);
    m.step = 41;

    CheckpointData out;
    out.net = m.cfg;
    out.step = m.step;
    out.extra["note"] = "hello";
    pack_models(m, out);

    fs::path path = work_dir() / "roundtrip.bin";
    save_checkpoint(path.string(), out);
    CheckpointData in = load_checkpoint(path.string());

    CHECK(in.net == m.cfg);
    CHECK(in.step == 41);
    CHECK(in.extra.at("note") == "hello");
    CHECK(in.tensors.size() == out.tensors.size());

    ModelBundle back = restore_models(in);
    CHECK(bundles_equal(m, back));
}

TEST_CASE("tensor table lookup") {
    ModelBundle m = create_models(tiny_config(), 5);
    CheckpointData cd;
    cd.net = m.cfg;
    pack_models(m, cd);
    REQUIRE(!cd.tensors.empty());
    const std::string& first = cd.tensors.front().first;
    CHECK(cd.find(first) != nullptr);
    CHECK(cd.find("no.such.tensor") == nullptr);
}

TEST_CASE("restore rejects missing or misshapen tensors") {
    ModelBundle m = create_models(tiny_config(), 9);
    CheckpointData cd;
    cd.net = m.cfg;
    pack_models(m, cd);

    CheckpointData missing = cd;
    missing.tensors.pop_back();
    CHECK_THROWS_AS(restore_models(missing), Error);
    try {
        restore_models(missing);
    } catch (const Error& e) {
        CHECK(e.cls() == ErrorClass::checkpoint_mismatch);
    }

    CheckpointData misshapen = cd;
    misshapen.tensors[0].second = Tensor::zeros({1});
    CHECK_THROWS_AS(restore_models(misshapen), Error);
}

TEST_CASE("corrupt files are rejected with the checkpoint class") {
    fs::path dir = work_dir();

    ModelBundle m = create_models(tiny_config(), 2);
    CheckpointData cd;
    cd.net = m.cfg;
    pack_models(m, cd);
    fs::path good = dir / "good.bin";
    save_checkpoint(good.string(), cd);

    auto expect_class = [](const std::string& path, ErrorClass want) {
        try {
            load_checkpoint(path);
            FAIL("expected a load failure for ", path);
        } catch (const Error& e) {
            CHECK(e.cls() == want);
        }
    };

    expect_class((dir / "absent.bin").string(), ErrorClass::io);

    {
        std::ofstream f(dir / "magic.bin", std::ios::binary);
        f << "NOTDATA!" << std::string(64, '\0');
    }
    expect_class((dir / "magic.bin").string(), ErrorClass::checkpoint_mismatch);

    // valid prefix, truncated tensor payload
    {
        std::ifstream src(good, std::ios::binary);
        std::vector<char> bytes{std::istreambuf_iterator<char>(src),
                                std::istreambuf_iterator<char>()};
        bytes.resize(bytes.size() - 16);
        std::ofstream f(dir / "truncated.bin", std::ios::binary);
        f.write(bytes.data(), std::streamsize(bytes.size()));
    }
    expect_class((dir / "truncated.bin").string(), ErrorClass::checkpoint_mismatch);
}
