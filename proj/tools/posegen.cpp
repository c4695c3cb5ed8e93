// Command-line front end: every pipeline stage behind one binary.
//
// Exit codes: 0 success; 2..8 map the library error classes (config=2, io=3,
// data=4, checkpoint_mismatch=5, invalid_part_group=6, numeric=7, internal=8);
// argument parse errors use the parser's own nonzero codes.

#include "posegen/checkpoint.hpp"
#include "posegen/evaluation.hpp"
#include "posegen/inference.hpp"
#include "posegen/training.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace posegen;
using nlohmann::json;

namespace {

struct ConfigFile {
    RunConfig cfg;
    bool has_net = false; // whether the file pinned the net section explicitly
};

ConfigFile read_config(const std::string& path) {
    ConfigFile out;
    out.cfg = load_run_config(path);
    if (!path.empty()) {
        std::ifstream f(path);
        json raw = json::parse(f, nullptr, false);
        out.has_net = raw.is_object() && raw.contains("net");
    }
    return out;
}

void write_config_copy(const std::string& out_dir, const RunConfig& cfg) {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "config.json");
    require(bool(f), ErrorClass::io, "cannot write config copy in " + out_dir);
    f << to_json(cfg).dump(2) << '\n';
}

void write_manifest(const std::string& out_dir, json manifest) {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "manifest.json");
    require(bool(f), ErrorClass::io, "cannot write manifest in " + out_dir);
    f << manifest.dump(2) << '\n';
}

ModelBundle load_model(const std::string& ckpt_path, const ConfigFile& cf) {
    CheckpointData cd = load_checkpoint(ckpt_path);
    ModelBundle m = restore_models(cd);
    require(!cf.has_net || cf.cfg.net == m.cfg, ErrorClass::checkpoint_mismatch,
            "config file pins a net section that disagrees with the checkpoint");
    return m;
}

DenseBodyMap load_pose(const std::string& iuv_path, int parts) {
    return decode_iuv(read_png(iuv_path), parts);
}

Sample load_pair(const std::string& img_path, const std::string& iuv_path, int parts) {
    Sample s;
    s.image01 = to_unit_image(read_png(img_path));
    s.map = load_pose(iuv_path, parts);
    require(int(s.map.part.rows()) == s.image01.dim(1) &&
                int(s.map.part.cols()) == s.image01.dim(2),
            ErrorClass::data, "image and body map sizes disagree: " + img_path);
    return s;
}

json tile_list(int n, json base) {
    json tiles = json::array();
    for (int i = 0; i < n; ++i) {
        json t = base;
        t["index"] = i;
        tiles.push_back(std::move(t));
    }
    return tiles;
}

int grid_cols(int n) { return std::min(n, 4); }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pose-conditioned appearance model pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", ckpt_path, data_root;
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "JSON config file (defaults when omitted)")
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option_function<std::uint64_t>(
           "--seed", [&](const std::uint64_t& s) { seed = s; seed_set = true; },
           "seed override (wins over the config file)");

    // synth-data
    auto* c_synth = app.add_subcommand("synth-data", "write a synthetic figure dataset");

    // extract-texture
    std::string in_image, in_iuv;
    auto* c_tex = app.add_subcommand("extract-texture", "image + body map -> texture atlas");
    c_tex->add_option("--image", in_image, "input image png")->required();
    c_tex->add_option("--iuv", in_iuv, "input body-map png")->required();

    // train
    std::string resume_path;
    long long steps_override = -1;
    auto* c_train = app.add_subcommand("train", "fit a model on an indexed dataset");
    c_train->add_option("--data", data_root, "dataset root (else config/POSEGEN_DATA_ROOT)");
    c_train->add_option("--resume", resume_path, "checkpoint to continue from");
    c_train->add_option("--steps", steps_override, "total steps override");

    // shared inference options
    std::string pose_path, group = "torso";
    int n_tiles = 4, interp_steps = 5;
    std::string src_image, src_iuv, aux_image, aux_iuv;
    bool sample_posterior = false;

    auto add_ckpt = [&](CLI::App* c) {
        c->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
    };
    auto add_pose = [&](CLI::App* c) {
        c->add_option("--pose", pose_path, "target body-map png")->required();
    };

    auto* c_sample = app.add_subcommand("sample", "draw new appearances in a pose");
    add_ckpt(c_sample);
    add_pose(c_sample);
    c_sample->add_option("--n", n_tiles, "number of samples");

    auto* c_transfer = app.add_subcommand("transfer", "re-render a person in a new pose");
    add_ckpt(c_transfer);
    add_pose(c_transfer);
    c_transfer->add_option("--source-image", src_image)->required();
    c_transfer->add_option("--source-iuv", src_iuv)->required();
    c_transfer->add_flag("--sample", sample_posterior,
                         "draw from the posterior instead of using its mean");

    auto* c_parts = app.add_subcommand("parts", "resample one part group around a base code");
    add_ckpt(c_parts);
    add_pose(c_parts);
    c_parts->add_option("--group", group, "part group name or index list")->required();
    c_parts->add_option("--n", n_tiles, "number of resamplings");
    c_parts->add_option("--source-image", src_image, "base appearance (else prior draw)");
    c_parts->add_option("--source-iuv", src_iuv);

    auto* c_garment = app.add_subcommand("garment", "swap a part group between two people");
    add_ckpt(c_garment);
    add_pose(c_garment);
    c_garment->add_option("--group", group, "part group name or index list")->required();
    c_garment->add_option("--person-image", src_image)->required();
    c_garment->add_option("--person-iuv", src_iuv)->required();
    c_garment->add_option("--garment-image", aux_image)->required();
    c_garment->add_option("--garment-iuv", aux_iuv)->required();

    auto* c_interp = app.add_subcommand("interp", "walk between two appearances");
    add_ckpt(c_interp);
    add_pose(c_interp);
    c_interp->add_option("--a-image", src_image)->required();
    c_interp->add_option("--a-iuv", src_iuv)->required();
    c_interp->add_option("--b-image", aux_image)->required();
    c_interp->add_option("--b-iuv", aux_iuv)->required();
    c_interp->add_option("--steps", interp_steps, "number of tiles");

    auto* c_eval = app.add_subcommand("eval", "quantitative report on a dataset");
    add_ckpt(c_eval);
    c_eval->add_option("--data", data_root, "dataset root (else config/POSEGEN_DATA_ROOT)");
    c_eval->add_option("--group", group, "part group for the locality metrics");

    CLI11_PARSE(app, argc, argv);

    try {
        ConfigFile cf = read_config(config_path);
        RunConfig& cfg = cf.cfg;
        if (!data_root.empty()) cfg.data_root = data_root;

        json manifest;
        manifest["config"] = "config.json";

        if (app.got_subcommand(c_synth)) {
            if (seed_set) cfg.synth.seed = seed;
            make_synthetic_dataset(cfg.synth, out_dir);
            manifest["command"] = "synth-data";
            manifest["seed"] = cfg.synth.seed;
            manifest["identities"] = cfg.synth.identities;
            manifest["frames"] = cfg.synth.frames;
            manifest["image_size"] = cfg.synth.image_size;
            manifest["outputs"] = json::array({json{{"file", "train.txt"}}});
        } else if (app.got_subcommand(c_tex)) {
            Sample s = load_pair(in_image, in_iuv, cfg.net.parts);
            TextureAtlas atlas = extract_texture(s.image01, s.map, cfg.net.atlas_size);
            fs::create_directories(out_dir);
            save_atlas(atlas, (fs::path(out_dir) / "texture").string());
            write_png((fs::path(out_dir) / "render.png").string(),
                      to_byte_image(render_texture(atlas, s.map)));
            manifest["command"] = "extract-texture";
            manifest["inputs"] = json{{"image", in_image}, {"iuv", in_iuv}};
            manifest["atlas_size"] = cfg.net.atlas_size;
            manifest["outputs"] = json::array({json{{"file", "texture.png"}},
                                               json{{"file", "texture.filled.png"}},
                                               json{{"file", "render.png"}}});
        } else if (app.got_subcommand(c_train)) {
            if (seed_set) cfg.train.seed = seed;
            if (steps_override >= 0) cfg.train.steps = steps_override;
            DatasetIndex index = load_index(resolve_data_root(cfg));
            ModelBundle m;
            CheckpointData resume_data;
            const CheckpointData* resume = nullptr;
            if (!resume_path.empty()) {
                resume_data = load_checkpoint(resume_path);
                m = restore_models(resume_data);
                require(!cf.has_net || cfg.net == m.cfg, ErrorClass::checkpoint_mismatch,
                        "config file pins a net section that disagrees with the checkpoint");
                resume = &resume_data;
            } else {
                m = create_models(cfg.net, cfg.train.seed);
            }
            train::FitResult r = train::fit(m, index, m.cfg, cfg.train, out_dir, resume);
            manifest["command"] = "train";
            manifest["seed"] = cfg.train.seed;
            manifest["steps"] = r.steps_run;
            manifest["outputs"] =
                json::array({json{{"file", fs::path(r.metrics_csv).filename().string()}},
                             json{{"file", fs::path(r.final_checkpoint).filename().string()}}});
        } else if (app.got_subcommand(c_eval)) {
            if (seed_set) cfg.eval.seed = seed;
            ModelBundle m = load_model(ckpt_path, cf);
            DatasetIndex index = load_index(resolve_data_root(cfg));
            loss::StubFeatureExtractor fx;
            eval::EvalSummary s = eval::eval_report(m, index, cfg.eval, fx, group, out_dir);
            manifest["command"] = "eval";
            manifest["seed"] = cfg.eval.seed;
            manifest["checkpoint"] = ckpt_path;
            manifest["group"] = group;
            manifest["fid"] = s.fid;
            manifest["diversity"] = s.diversity;
            manifest["outputs"] = json::array({json{{"file", "report.txt"}},
                                               json{{"file", "diversity_per_pose.csv"}}});
        } else {
            // the sampling-mode commands share checkpoint + pose plumbing
            ModelBundle m = load_model(ckpt_path, cf);
            DenseBodyMap pose = load_pose(pose_path, m.cfg.parts);
            Rng rng(Rng::derive_seed(seed_set ? seed : 0, "cli." + app.get_subcommands()[0]->get_name()));
            manifest["checkpoint"] = ckpt_path;
            manifest["seed"] = seed_set ? seed : 0;
            manifest["pose"] = pose_path;

            std::vector<Tensor> tiles;
            json tiles_meta;
            std::string name;
            if (app.got_subcommand(c_sample)) {
                require(n_tiles >= 1, ErrorClass::config, "--n must be at least 1");
                name = "samples";
                manifest["command"] = "sample";
                for (int i = 0; i < n_tiles; ++i)
                    tiles.push_back(infer::sample_appearance(m, pose, rng));
                tiles_meta = tile_list(n_tiles, json{{"mode", "sample"}});
            } else if (app.got_subcommand(c_transfer)) {
                name = "transfer";
                manifest["command"] = "transfer";
                manifest["inputs"] = json{{"source_image", src_image}, {"source_iuv", src_iuv}};
                Sample src = load_pair(src_image, src_iuv, m.cfg.parts);
                tiles.push_back(infer::pose_transfer(m, src, pose, sample_posterior, rng));
                tiles_meta = tile_list(1, json{{"mode", "transfer"},
                                               {"posterior_sample", sample_posterior}});
            } else if (app.got_subcommand(c_parts)) {
                require(n_tiles >= 1, ErrorClass::config, "--n must be at least 1");
                name = "parts";
                manifest["command"] = "parts";
                std::set<int> g = resolve_part_group(group, m.cfg.parts);
                PartLatent base;
                if (!src_image.empty()) {
                    require(!src_iuv.empty(), ErrorClass::config,
                            "--source-image needs --source-iuv");
                    Sample src = load_pair(src_image, src_iuv, m.cfg.parts);
                    base = PartLatent{infer::encode_appearance(m, src.image01, src.map).mu};
                } else {
                    base = infer::prior_latent(m, rng);
                }
                for (int i = 0; i < n_tiles; ++i)
                    tiles.push_back(infer::generate(m, infer::resample_group(m, base, g, rng), pose));
                tiles_meta = tile_list(n_tiles, json{{"mode", "parts"}, {"group", group}});
            } else if (app.got_subcommand(c_garment)) {
                name = "garment";
                manifest["command"] = "garment";
                manifest["inputs"] = json{{"person_image", src_image},
                                          {"garment_image", aux_image}};
                std::set<int> g = resolve_part_group(group, m.cfg.parts);
                Sample person = load_pair(src_image, src_iuv, m.cfg.parts);
                Sample garment = load_pair(aux_image, aux_iuv, m.cfg.parts);
                tiles.push_back(infer::garment_transfer(m, person, garment, g, pose));
                tiles_meta = tile_list(1, json{{"mode", "garment"}, {"group", group}});
            } else if (app.got_subcommand(c_interp)) {
                require(interp_steps >= 1, ErrorClass::config, "--steps must be at least 1");
                name = "interp";
                manifest["command"] = "interp";
                manifest["inputs"] = json{{"a_image", src_image}, {"b_image", aux_image}};
                Sample a = load_pair(src_image, src_iuv, m.cfg.parts);
                Sample b = load_pair(aux_image, aux_iuv, m.cfg.parts);
                PartLatent za{infer::encode_appearance(m, a.image01, a.map).mu};
                PartLatent zb{infer::encode_appearance(m, b.image01, b.map).mu};
                // first tile decodes exactly a's code, last exactly b's
                tiles = infer::interpolate_images(m, zb, za, interp_steps, pose);
                tiles_meta = json::array();
                for (int i = 0; i < interp_steps; ++i) {
                    Scalar t = interp_steps == 1 ? 0.0 : Scalar(i) / Scalar(interp_steps - 1);
                    tiles_meta.push_back(json{{"index", i}, {"mode", "interp"}, {"t", t}});
                }
            }
            infer::write_image_grid(out_dir, name, tiles, grid_cols(int(tiles.size())),
                                    tiles_meta);
            manifest["outputs"] = json::array(
                {json{{"file", name + ".png"}, {"tiles", tiles_meta}},
                 json{{"file", name + ".json"}}});
        }

        write_config_copy(out_dir, cfg);
        write_manifest(out_dir, std::move(manifest));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2 + int(e.cls());
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 2 + int(ErrorClass::internal);
    }
    return 0;
}
