// pweaver: synthetic pose/part pipeline driver.
//
// Subcommands: synth, train, infer, eval, bench. Exit codes: 0 success,
// 1 internal error, 2 bad input; errors go to stderr as one JSON object.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pw/assembly.hpp"
#include "pw/eval.hpp"
#include "pw/inference.hpp"
#include "pw/pairwise.hpp"
#include "pw/pipeline.hpp"
#include "pw/proposals.hpp"
#include "pw/synth.hpp"
#include "pw/tensor.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class LogLevel { kError = 0, kWarn, kInfo, kDebug };

LogLevel g_log_level = LogLevel::kWarn;

void init_log_level() {
    const char* env = std::getenv("PWEAVER_LOG");
    if (!env) return;
    const std::string v = env;
    if (v == "error") g_log_level = LogLevel::kError;
    else if (v == "warn") g_log_level = LogLevel::kWarn;
    else if (v == "info") g_log_level = LogLevel::kInfo;
    else if (v == "debug") g_log_level = LogLevel::kDebug;
}

void log_msg(LogLevel level, const std::string& msg) {
    if (level > g_log_level) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

#define LOG_INFO(msg) log_msg(LogLevel::kInfo, msg)

// deterministic per-stage seed derivation from the root seed
uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw pw::InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pw::InputError("cannot write " + path);
    out << text;
}

// Flags shared by the pipeline subcommands; resolved as flags > config file
// > defaults.
struct CommonOpts {
    std::string config_path;
    std::string solver_name;
    uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--solver", solver_name, "solver mode")
            ->check(CLI::IsMember({"exact", "heuristic", "oracle"}));
        cmd->add_option("--seed", seed, "root RNG seed")->trigger_on_parse();
        cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    }

    pw::RunConfig resolve(const CLI::App* cmd) const {
        pw::RunConfig cfg;
        if (!config_path.empty()) cfg = pw::RunConfig::from_json(read_file(config_path));
        if (cmd->count("--seed")) cfg.seed = seed;
        if (!solver_name.empty()) cfg.solver.mode = pw::solver_mode_from_name(solver_name);
        if (jobs > 0) cfg.jobs = jobs;
        cfg.solver.seed = cfg.seed;
        cfg.validate();
        return cfg;
    }
};

std::string scene_stem(int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%04d", i);
    return buf;
}

struct DatasetEntry {
    std::string stem;
    fs::path dir;

    fs::path scene_json() const { return dir / (stem + ".json"); }
    fs::path maps_file(const char* kind) const {
        return dir / (stem + "_" + kind + ".pwt");
    }
};

std::vector<DatasetEntry> load_manifest(const std::string& dir) {
    const fs::path root = dir;
    const fs::path manifest = root / "manifest.json";
    if (!fs::exists(manifest)) throw pw::InputError("no manifest.json in " + dir);
    json j;
    try {
        j = json::parse(read_file(manifest.string()));
    } catch (const json::exception& e) {
        throw pw::InputError("manifest.json: " + std::string(e.what()));
    }
    if (!j.contains("scenes") || !j["scenes"].is_array())
        throw pw::InputError("manifest.json: missing \"scenes\" array");
    std::vector<DatasetEntry> entries;
    for (const auto& s : j["scenes"]) {
        if (!s.contains("stem")) throw pw::InputError("manifest.json: scene without stem");
        entries.push_back({s["stem"].get<std::string>(), root});
    }
    return entries;
}

pw::ScoreMapSet load_maps(const DatasetEntry& e) {
    pw::ScoreMapSet maps;
    maps.joints = pw::load_tensor_file(e.maps_file("joints").string());
    maps.neighbors = pw::load_tensor_file(e.maps_file("neighbors").string());
    maps.parts = pw::load_tensor_file(e.maps_file("parts").string());
    return maps;
}

// ---- synth ----------------------------------------------------------------

int cmd_synth(const CommonOpts& opts, const CLI::App* cmd, const std::string& out_dir,
              int count, int min_people, int max_people, int height, int width,
              const pw::NoiseSpec& noise) {
    const pw::RunConfig cfg = opts.resolve(cmd);
    noise.validate();
    if (min_people < 1 || max_people < min_people)
        throw pw::InputError("synth: need 1 <= min-people <= max-people");
    if (count < 0) throw pw::InputError("synth: count must be >= 0");
    fs::create_directories(out_dir);

    const pw::SkeletonModel model = pw::SkeletonModel::standard();
    json manifest;
    manifest["seed"] = cfg.seed;
    manifest["count"] = count;
    manifest["scenes"] = json::array();

    for (int i = 0; i < count; ++i) {
        const uint64_t scene_seed = mix_seed(cfg.seed, static_cast<uint64_t>(i) * 2);
        const uint64_t noise_seed = mix_seed(cfg.seed, static_cast<uint64_t>(i) * 2 + 1);
        const int n_people =
            min_people + static_cast<int>(scene_seed % (max_people - min_people + 1));
        const pw::Scene scene = pw::sample_scene(model, n_people, height, width, scene_seed);
        const pw::ScoreMapSet maps = pw::render_score_maps(scene, noise, noise_seed);

        const DatasetEntry e{scene_stem(i), out_dir};
        write_file(e.scene_json().string(), pw::scene_to_json(scene));
        pw::save_tensor_file(maps.joints, e.maps_file("joints").string());
        pw::save_tensor_file(maps.neighbors, e.maps_file("neighbors").string());
        pw::save_tensor_file(maps.parts, e.maps_file("parts").string());
        pw::save_tensor_file(pw::tensor_from_labels(scene.composite_parts()),
                             e.maps_file("gt_parts").string());
        pw::save_tensor_file(pw::tensor_from_labels(scene.instance_map()),
                             e.maps_file("instances").string());

        json entry;
        entry["stem"] = e.stem;
        entry["people"] = n_people;
        entry["files"] = {e.stem + ".json",           e.stem + "_joints.pwt",
                          e.stem + "_neighbors.pwt",  e.stem + "_parts.pwt",
                          e.stem + "_gt_parts.pwt",   e.stem + "_instances.pwt"};
        manifest["scenes"].push_back(entry);
        LOG_INFO("wrote " + e.stem);
    }
    write_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return 0;
}

// ---- train ----------------------------------------------------------------

int cmd_train(const CommonOpts& opts, const CLI::App* cmd, const std::string& data_dir,
              const std::string& out_path, int iterations) {
    const pw::RunConfig cfg = opts.resolve(cmd);
    const auto entries = load_manifest(data_dir);
    if (entries.empty()) throw pw::InputError("train: dataset is empty");
    const pw::JointPartAssociation assoc = pw::JointPartAssociation::standard();

    std::vector<pw::TrainSample> samples;
    for (const auto& e : entries) {
        const pw::Scene scene = pw::scene_from_json(read_file(e.scene_json().string()));
        const pw::ScoreMapSet maps = load_maps(e);
        auto s = pw::build_training_samples(scene, maps, assoc, cfg);
        samples.insert(samples.end(), s.begin(), s.end());
        LOG_INFO("samples from " + e.stem + ": " + std::to_string(s.size()));
    }
    if (samples.empty()) throw pw::InputError("train: no proposal pairs in dataset");

    pw::TrainConfig tcfg;
    tcfg.seed = cfg.seed;
    if (iterations > 0) tcfg.iterations = iterations;
    const pw::LogisticModel model = pw::train_logistic(samples, tcfg);

    int correct = 0;
    long positives = 0;
    for (const auto& s : samples) {
        const double p = pw::pair_probability(model, s.f, s.type_a, s.type_b);
        if ((p >= 0.5) == s.same_person) ++correct;
        positives += s.same_person ? 1 : 0;
    }
    const double accuracy = static_cast<double>(correct) / samples.size();

    write_file(out_path, pw::model_to_json(model));
    char log_line[256];
    std::snprintf(log_line, sizeof(log_line),
                  "samples=%zu positives=%ld iterations=%d accuracy=%.4f\n",
                  samples.size(), positives, tcfg.iterations, accuracy);
    write_file(out_path + ".log", log_line);
    std::printf("trained on %zu pairs, accuracy %.4f\n", samples.size(), accuracy);
    return 0;
}

// ---- infer ----------------------------------------------------------------

int cmd_infer(const CommonOpts& opts, const CLI::App* cmd, const std::string& data_dir,
              const std::string& model_path, const std::string& out_dir,
              const std::string& boxes_dir, float box_jitter, bool overlay) {
    const pw::RunConfig cfg = opts.resolve(cmd);
    const auto entries = load_manifest(data_dir);
    const pw::LogisticModel model = pw::model_from_json(read_file(model_path));
    const pw::JointPartAssociation assoc = pw::JointPartAssociation::standard();
    fs::create_directories(out_dir);

    json manifest;
    manifest["scenes"] = json::array();
    for (size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const pw::Scene scene = pw::scene_from_json(read_file(e.scene_json().string()));
        const pw::ScoreMapSet maps = load_maps(e);

        std::vector<pw::DetectionBox> boxes;
        if (!boxes_dir.empty()) {
            const fs::path p = fs::path(boxes_dir) / (e.stem + "_boxes.json");
            boxes = pw::boxes_from_json(read_file(p.string()));
        } else {
            boxes = pw::boxes_from_gt(scene, box_jitter, mix_seed(cfg.seed, i));
        }

        const pw::InferenceResult result = pw::run_inference(maps, boxes, model, assoc, cfg);

        const fs::path out = out_dir;
        write_file((out / (e.stem + "_poses.json")).string(),
                   pw::poses_to_json(result.poses));
        pw::save_tensor_file(pw::tensor_from_labels(result.part_labels),
                             (out / (e.stem + "_labels.pwt")).string());
        pw::save_tensor_file(pw::tensor_from_labels(result.unrefined_labels),
                             (out / (e.stem + "_labels_unrefined.pwt")).string());
        if (overlay)
            pw::write_overlay_ppm((out / (e.stem + "_overlay.ppm")).string(),
                                  result.part_labels, result.poses);
        json entry;
        entry["stem"] = e.stem;
        entry["poses"] = result.poses.size();
        manifest["scenes"].push_back(entry);
        LOG_INFO(e.stem + ": " + std::to_string(result.poses.size()) + " poses");
    }
    write_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return 0;
}

// ---- eval -----------------------------------------------------------------

int cmd_eval(const std::string& data_dir, const std::string& pred_dir,
             const std::string& out_dir) {
    const auto entries = load_manifest(data_dir);
    if (entries.empty()) throw pw::InputError("eval: dataset is empty");
    fs::create_directories(out_dir);

    std::vector<std::vector<pw::PoseConfiguration>> preds;
    std::vector<std::vector<pw::GroundTruthPerson>> gts;
    std::vector<pw::PartLabelMap> pred_labels, gt_labels, instance_maps;
    for (const auto& e : entries) {
        const fs::path pp = fs::path(pred_dir) / (e.stem + "_poses.json");
        if (!fs::exists(pp))
            throw pw::InputError("eval: missing prediction " + pp.string());
        preds.push_back(pw::poses_from_json(read_file(pp.string())));
        const pw::Scene scene = pw::scene_from_json(read_file(e.scene_json().string()));
        gts.push_back(scene.people);
        pred_labels.push_back(pw::labels_from_tensor(pw::load_tensor_file(
            (fs::path(pred_dir) / (e.stem + "_labels.pwt")).string())));
        gt_labels.push_back(
            pw::labels_from_tensor(pw::load_tensor_file(e.maps_file("gt_parts").string())));
        instance_maps.push_back(
            pw::labels_from_tensor(pw::load_tensor_file(e.maps_file("instances").string())));
    }

    std::vector<const pw::PartLabelMap*> pred_ptrs, gt_ptrs;
    std::vector<pw::SizeBinnedInput> size_inputs;
    for (size_t i = 0; i < entries.size(); ++i) {
        pred_ptrs.push_back(&pred_labels[i]);
        gt_ptrs.push_back(&gt_labels[i]);
        pw::SizeBinnedInput in;
        in.gt_parts = &gt_labels[i];
        in.instances = &instance_maps[i];
        in.pred = &pred_labels[i];
        for (const auto& person : gts[i]) in.bboxes.push_back(person.bbox);
        size_inputs.push_back(std::move(in));
    }

    pw::EvalReport report;
    report.map = pw::compute_map_multi(preds, gts);
    report.adk = pw::compute_adk_multi(preds, gts);
    report.miou = pw::compute_miou_multi(pred_ptrs, gt_ptrs);
    report.size_miou = pw::compute_size_binned_miou(size_inputs);

    write_file((fs::path(out_dir) / "report.json").string(), pw::report_to_json(report));
    const std::string table = pw::report_to_table(report);
    write_file((fs::path(out_dir) / "report.txt").string(), table);
    std::fputs(table.c_str(), stdout);
    return 0;
}

// ---- bench ----------------------------------------------------------------

int cmd_bench(const CommonOpts& opts, const CLI::App* cmd, const std::string& data_dir,
              const std::string& model_path, const std::string& out_dir,
              bool no_timing, int reps) {
    if (reps < 1) throw pw::InputError("bench: reps must be >= 1");
    const pw::RunConfig cfg = opts.resolve(cmd);
    const auto entries = load_manifest(data_dir);
    if (entries.empty()) throw pw::InputError("bench: dataset is empty");
    const pw::LogisticModel model = pw::model_from_json(read_file(model_path));
    const pw::JointPartAssociation assoc = pw::JointPartAssociation::standard();
    if (!out_dir.empty()) fs::create_directories(out_dir);

    using clock = std::chrono::steady_clock;
    double full_time = 0.0, box_time = 0.0;
    json scenes = json::array();
    for (size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const pw::Scene scene = pw::scene_from_json(read_file(e.scene_json().string()));
        const pw::ScoreMapSet maps = load_maps(e);

        // (a) one problem over the whole scene
        pw::DetectionBox whole{{0.f, 0.f, static_cast<float>(maps.joints.width),
                                static_cast<float>(maps.joints.height)},
                               1.f};
        const pw::ZoomedRegion full_region = pw::auto_zoom(whole, maps, cfg.zoom);
        const auto full_props = pw::refine_proposal_locations(
            full_region, pw::propose_joints(full_region, cfg.proposal_nms));
        const pw::PartLabelMap full_labels = pw::argmax_channel(full_region.maps.parts);
        const pw::AssemblyProblem full_problem = pw::build_problem(
            full_region, full_props, model, assoc, full_labels, cfg.use_segment_features);
        // best-of-reps timing so one-shot cold-start costs don't dominate
        pw::Labeling full_sol;
        double full_dt = std::numeric_limits<double>::max();
        for (int rep = 0; rep < reps; ++rep) {
            const auto t0 = clock::now();
            full_sol = pw::solve(full_problem, cfg.solver);
            const auto t1 = clock::now();
            full_dt = std::min(full_dt, std::chrono::duration<double>(t1 - t0).count());
        }
        const double full_obj = pw::objective(full_problem, full_sol);

        // (b) the same energy decomposed per annotated box, each induced
        // sub-problem solved independently with the same solver config. Boxes
        // come from the annotation, so ownership does too: a node follows the
        // nearest annotated joint of its type. With overlapping people, pure
        // geometry misfiles extremity joints that sit inside a neighbor's box,
        // which would make the gap measure box placement instead of the
        // decomposition itself. Nodes with no annotated joint of their type
        // fall back to the nearest box center.
        const auto boxes = pw::boxes_from_gt(scene, 0.f, 0);
        std::vector<std::vector<int>> box_members(boxes.size());
        for (int v = 0; v < full_problem.size(); ++v) {
            const pw::Vec2 loc = full_region.to_scene.apply(full_problem.nodes[v].location);
            const int type = full_problem.nodes[v].joint_type;
            int owner = -1;
            float best_d = std::numeric_limits<float>::max();
            for (size_t p = 0; p < scene.people.size(); ++p) {
                if (!scene.people[p].visible[type]) continue;
                const float d = (scene.people[p].joints[type] - loc).norm();
                if (d < best_d) {
                    best_d = d;
                    owner = static_cast<int>(p);
                }
            }
            size_t best = 0;
            if (owner >= 0 && static_cast<size_t>(owner) < boxes.size()) {
                best = static_cast<size_t>(owner);
            } else {
                best_d = std::numeric_limits<float>::max();
                for (size_t b = 0; b < boxes.size(); ++b) {
                    const pw::RectF& r = boxes[b].rect;
                    const pw::Vec2 c{r.x + r.w * 0.5f, r.y + r.h * 0.5f};
                    const float d = (loc - c).norm();
                    if (d < best_d) {
                        best_d = d;
                        best = b;
                    }
                }
            }
            if (!boxes.empty()) box_members[best].push_back(v);
        }
        double box_obj = 0.0, box_dt = 0.0;
        int box_nodes = 0;
        json per_box = json::array();
        for (const auto& members : box_members) {
            pw::AssemblyProblem sub;
            const int m = static_cast<int>(members.size());
            sub.nodes.reserve(m);
            sub.unary.reserve(m);
            sub.pair_cost.assign(static_cast<size_t>(m) * m, 0.0);
            for (int a = 0; a < m; ++a) {
                sub.nodes.push_back(full_problem.nodes[members[a]]);
                sub.unary.push_back(full_problem.unary[members[a]]);
            }
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b)
                    if (a != b) sub.pair_ref(a, b) = full_problem.pair(members[a], members[b]);
            box_nodes += m;
            pw::Labeling sol;
            double sub_dt = std::numeric_limits<double>::max();
            for (int rep = 0; rep < reps; ++rep) {
                const auto b0 = clock::now();
                sol = pw::solve(sub, cfg.solver);
                const auto b1 = clock::now();
                sub_dt = std::min(sub_dt, std::chrono::duration<double>(b1 - b0).count());
            }
            const double sub_obj = pw::objective(sub, sol);
            box_obj += sub_obj;
            box_dt += sub_dt;
            per_box.push_back({{"nodes", m}, {"objective", sub_obj}});
        }

        full_time += full_dt;
        box_time += box_dt;
        json s;
        s["stem"] = e.stem;
        s["boxes"] = boxes.size();
        s["full_nodes"] = full_problem.size();
        s["box_nodes"] = box_nodes;
        s["per_box"] = per_box;
        s["full_objective"] = full_obj;
        s["box_objective_sum"] = box_obj;
        s["objective_gap"] =
            full_obj != 0.0 ? std::abs(box_obj - full_obj) / std::abs(full_obj) : 0.0;
        if (!no_timing) {
            s["full_solve_s"] = full_dt;
            s["box_solve_s"] = box_dt;
        }
        scenes.push_back(s);
    }

    json report;
    report["scenes"] = scenes;
    if (!no_timing) {
        report["total_full_solve_s"] = full_time;
        report["total_box_solve_s"] = box_time;
        report["speedup"] = box_time > 0.0 ? full_time / box_time : 0.0;
        std::printf("full-graph solve %.4fs, per-box solve %.4fs, speedup %.2fx\n",
                    full_time, box_time, box_time > 0.0 ? full_time / box_time : 0.0);
    }
    const std::string text = report.dump(2) + "\n";
    if (!out_dir.empty())
        write_file((fs::path(out_dir) / "bench.json").string(), text);
    else
        std::fputs(text.c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    init_log_level();
    CLI::App app{"multi-person pose assembly and part segmentation pipeline"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    CommonOpts synth_opts;
    synth_opts.attach(synth);
    std::string synth_out;
    int synth_count = 10, min_people = 1, max_people = 3;
    int synth_h = 192, synth_w = 256;
    pw::NoiseSpec noise;
    synth->add_option("--out-dir", synth_out, "output directory")->required();
    synth->add_option("--count", synth_count, "number of scenes");
    synth->add_option("--min-people", min_people, "minimum people per scene");
    synth->add_option("--max-people", max_people, "maximum people per scene");
    synth->add_option("--height", synth_h, "canvas height");
    synth->add_option("--width", synth_w, "canvas width");
    synth->add_option("--blob-sigma", noise.joint_blob_sigma, "joint blob sigma");
    synth->add_option("--peak", noise.joint_score_peak, "joint blob peak score");
    synth->add_option("--background-noise", noise.background_noise_sd,
                      "score-map noise sd");
    synth->add_option("--offset-noise", noise.offset_noise_sd, "offset noise sd (px)");
    synth->add_option("--flip-rate", noise.part_flip_rate, "part label flip rate");
    synth->add_option("--false-peaks", noise.false_peak_rate,
                      "expected spurious peaks per joint type");

    // train
    auto* train = app.add_subcommand("train", "train the pairwise logistic model");
    CommonOpts train_opts;
    train_opts.attach(train);
    std::string train_data, train_out = "model.json";
    int train_iters = 0;
    train->add_option("--data", train_data, "dataset directory")->required();
    train->add_option("--out", train_out, "model output path");
    train->add_option("--iterations", train_iters, "gradient descent iterations");

    // infer
    auto* infer = app.add_subcommand("infer", "run end-to-end inference");
    CommonOpts infer_opts;
    infer_opts.attach(infer);
    std::string infer_data, infer_model, infer_out, infer_boxes;
    float box_jitter = 0.f;
    bool overlay = false;
    infer->add_option("--data", infer_data, "dataset directory")->required();
    infer->add_option("--model", infer_model, "pairwise model JSON")->required();
    infer->add_option("--out-dir", infer_out, "output directory")->required();
    infer->add_option("--boxes", infer_boxes,
                      "directory of <stem>_boxes.json detection files");
    infer->add_option("--box-jitter", box_jitter,
                      "jitter sd when deriving boxes from GT");
    infer->add_flag("--overlay", overlay, "write PPM overlays");

    // eval
    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    std::string eval_data, eval_pred, eval_out;
    eval->add_option("--data", eval_data, "dataset directory")->required();
    eval->add_option("--pred", eval_pred, "inference output directory")->required();
    eval->add_option("--out-dir", eval_out, "report output directory")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "full-graph vs per-box solver benchmark");
    CommonOpts bench_opts;
    bench_opts.attach(bench);
    std::string bench_data, bench_model, bench_out;
    bool no_timing = false;
    int bench_reps = 5;
    bench->add_option("--data", bench_data, "dataset directory")->required();
    bench->add_option("--model", bench_model, "pairwise model JSON")->required();
    bench->add_option("--out-dir", bench_out, "report output directory");
    bench->add_flag("--no-timing", no_timing, "omit wall times from the report");
    bench->add_option("--reps", bench_reps, "timing repetitions per solve (min taken)");

    try {
        app.parse(argc, argv);
        if (synth->parsed())
            return cmd_synth(synth_opts, synth, synth_out, synth_count, min_people,
                             max_people, synth_h, synth_w, noise);
        if (train->parsed())
            return cmd_train(train_opts, train, train_data, train_out, train_iters);
        if (infer->parsed())
            return cmd_infer(infer_opts, infer, infer_data, infer_model, infer_out,
                             infer_boxes, box_jitter, overlay);
        if (eval->parsed()) return cmd_eval(eval_data, eval_pred, eval_out);
        if (bench->parsed())
            return cmd_bench(bench_opts, bench, bench_data, bench_model, bench_out,
                             no_timing, bench_reps);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        json err;
        err["error"] = e.what();
        err["code"] = 2;
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 2;
    } catch (const pw::InputError& e) {
        json err;
        err["error"] = e.what();
        err["code"] = 2;
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 2;
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        err["code"] = 1;
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    }
    return 0;
}
