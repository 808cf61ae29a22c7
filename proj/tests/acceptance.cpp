// Acceptance gate: one PASS/FAIL line per criterion, exit 0 only when all
// pass. argv[1] = path to the pweaver binary, argv[2] = scratch directory.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pw/assembly.hpp"
#include "pw/eval.hpp"
#include "pw/inference.hpp"
#include "pw/pipeline.hpp"
#include "pw/synth.hpp"

namespace fs = std::filesystem;
using clock_t_ = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s  %d  %s  [%s]\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

double seconds_since(clock_t_::time_point t0) {
    return std::chrono::duration<double>(clock_t_::now() - t0).count();
}

// ---- CLI helpers ------------------------------------------------------------

std::string g_cli;

int run_cli(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// byte-wise equality of two directory trees (same relative files, same bytes)
bool trees_equal(const fs::path& a, const fs::path& b, std::string* why) {
    std::vector<fs::path> rel;
    for (const auto& f : fs::recursive_directory_iterator(a))
        if (f.is_regular_file()) rel.push_back(fs::relative(f.path(), a));
    size_t b_count = 0;
    for (const auto& f : fs::recursive_directory_iterator(b))
        if (f.is_regular_file()) ++b_count;
    if (b_count != rel.size()) {
        *why = fmt("file count %zu vs %zu", rel.size(), b_count);
        return false;
    }
    for (const auto& r : rel) {
        if (!fs::exists(b / r)) {
            *why = "missing " + r.string();
            return false;
        }
        if (read_file(a / r) != read_file(b / r)) {
            *why = "differs: " + r.string();
            return false;
        }
    }
    return true;
}

// ---- shared fixtures --------------------------------------------------------

// noise for the training corpus: mild corruption on every map
pw::NoiseSpec training_noise() {
    pw::NoiseSpec n;
    n.background_noise_sd = 0.05f;
    n.offset_noise_sd = 1.f;
    n.part_flip_rate = 0.02f;
    n.false_peak_rate = 0.5f;
    return n;
}

// noise for the ablation/refinement scenes: part maps corrupted enough
// that the pose prior has something to repair
pw::NoiseSpec moderate_noise() {
    pw::NoiseSpec n = training_noise();
    n.part_flip_rate = 0.1f;
    return n;
}

// people whose margin-dilated boxes are pairwise disjoint, so the score
// maps carry no cross-person ambiguity (the zero-noise recovery criterion
// checks pipeline exactness, not occlusion handling)
bool separated(const pw::Scene& s, float margin) {
    for (size_t a = 0; a < s.people.size(); ++a)
        for (size_t b = a + 1; b < s.people.size(); ++b) {
            pw::RectF ra = s.people[a].bbox;
            ra.x -= margin;
            ra.y -= margin;
            ra.w += 2 * margin;
            ra.h += 2 * margin;
            if (pw::iou(ra, s.people[b].bbox) > 0.f) return false;
        }
    return true;
}

// random fully-connected instance with mixed attraction/repulsion
pw::AssemblyProblem random_problem(int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.f, 1.f);
    std::uniform_int_distribution<int> type(0, pw::kNumJoints - 1);
    std::uniform_real_distribution<double> cost(-2.0, 2.0);
    pw::AssemblyProblem p;
    for (int i = 0; i < n; ++i)
        p.nodes.push_back({{u(rng) * 50.f, u(rng) * 50.f}, type(rng), 0.5f + 0.5f * u(rng)});
    p.unary.resize(n);
    p.pair_cost.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) p.unary[i] = cost(rng);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double c = cost(rng);
            p.pair_ref(i, j) = c;
            p.pair_ref(j, i) = c;
        }
    return p;
}

// upright stick figure with its neck at (cx, cy); reference scale 5
pw::GroundTruthPerson stick_person(float cx, float cy) {
    pw::GroundTruthPerson p;
    p.visible.fill(true);
    auto set = [&](int t, float dx, float dy) { p.joints[t] = {cx + dx, cy + dy}; };
    set(pw::kForehead, 0.f, -10.f);
    set(pw::kNeck, 0.f, 0.f);
    set(pw::kLShoulder, -8.f, 2.f);
    set(pw::kRShoulder, 8.f, 2.f);
    set(pw::kLElbow, -10.f, 14.f);
    set(pw::kRElbow, 10.f, 14.f);
    set(pw::kLWrist, -11.f, 26.f);
    set(pw::kRWrist, 11.f, 26.f);
    set(pw::kLWaist, -5.f, 24.f);
    set(pw::kRWaist, 5.f, 24.f);
    set(pw::kLKnee, -6.f, 40.f);
    set(pw::kRKnee, 6.f, 40.f);
    set(pw::kLAnkle, -6.f, 56.f);
    set(pw::kRAnkle, 6.f, 56.f);
    return p;
}

pw::PoseConfiguration pred_from(const pw::GroundTruthPerson& p, double score) {
    pw::PoseConfiguration pose;
    for (int t = 0; t < pw::kNumJoints; ++t)
        if (p.visible[t]) pose.joints[t] = p.joints[t];
    pose.score = score;
    return pose;
}

struct SceneRun {
    std::vector<std::vector<pw::PoseConfiguration>> preds;
    std::vector<std::vector<pw::GroundTruthPerson>> gts;
    std::vector<pw::PartLabelMap> refined, unrefined, gt_parts;
    double max_scene_s = 0.0;
};

// model trained once on moderate-noise scenes and reused everywhere
pw::LogisticModel train_shared_model() {
    const pw::SkeletonModel skel = pw::SkeletonModel::standard();
    const auto& assoc = pw::JointPartAssociation::standard();
    pw::RunConfig cfg;
    std::vector<pw::TrainSample> samples;
    for (int i = 0; i < 20; ++i) {
        const pw::Scene scene = pw::sample_scene(skel, 1 + i % 3, 192, 256, 9000 + i);
        const pw::ScoreMapSet maps =
            pw::render_score_maps(scene, training_noise(), 9500 + i);
        const auto s = pw::build_training_samples(scene, maps, assoc, cfg);
        samples.insert(samples.end(), s.begin(), s.end());
    }
    return pw::train_logistic(samples);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: acceptance <pweaver-binary> <scratch-dir>\n");
        return 1;
    }
    g_cli = argv[1];
    const fs::path tmp = argv[2];
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    const pw::SkeletonModel skel = pw::SkeletonModel::standard();
    const auto& assoc = pw::JointPartAssociation::standard();

    // ---- 1 + 2: exact solver vs oracle, heuristic quality -------------------
    {
        std::mt19937_64 rng(77);
        std::uniform_int_distribution<int> size(1, 8);
        std::vector<pw::AssemblyProblem> problems;
        for (int i = 0; i < 200; ++i) problems.push_back(random_problem(size(rng), 42000 + i));

        const auto t0 = clock_t_::now();
        double max_abs_diff = 0.0;
        std::vector<double> oracle_obj;
        for (const auto& p : problems) {
            const double o = pw::objective(p, pw::solve_oracle(p));
            const double e = pw::objective(p, pw::solve_exact(p));
            oracle_obj.push_back(o);
            max_abs_diff = std::max(max_abs_diff, std::fabs(e - o));
        }
        const double elapsed = seconds_since(t0);
        report(1, max_abs_diff <= 1e-9 && elapsed < 10.0,
               "exact solver matches the enumeration oracle on 200 random instances",
               fmt("max |diff| %.2e, %.2fs", max_abs_diff, elapsed));

        int within = 0;
        for (size_t i = 0; i < problems.size(); ++i) {
            const double h =
                pw::objective(problems[i], pw::solve_heuristic(problems[i], 3, 10000, 0));
            if (h <= oracle_obj[i] + 0.05 * std::fabs(oracle_obj[i]) + 1e-12) ++within;
        }
        report(2, within >= 190,
               "heuristic within 5% of the oracle on >= 95% of those instances",
               fmt("%d/200 within tolerance", within));
    }

    const pw::LogisticModel model = train_shared_model();

    // ---- 3: zero-noise end-to-end recovery ----------------------------------
    {
        pw::RunConfig cfg;
        SceneRun run;
        uint64_t seed = 100;
        for (int i = 0; i < 50; ++i) {
            pw::Scene scene;
            do {
                scene = pw::sample_scene(skel, 1 + i % 4, 256, 352, seed++);
            } while (!separated(scene, 16.f));
            const pw::ScoreMapSet maps =
                pw::render_score_maps(scene, pw::NoiseSpec{}, 200 + i);
            const auto boxes = pw::boxes_from_gt(scene, 0.f, 300 + i);
            const auto t0 = clock_t_::now();
            const pw::InferenceResult r = pw::run_inference(maps, boxes, model, assoc, cfg);
            run.max_scene_s = std::max(run.max_scene_s, seconds_since(t0));
            run.preds.push_back(r.poses);
            run.gts.push_back(scene.people);
        }
        const double map = pw::compute_map_multi(run.preds, run.gts).mean_ap;
        const double adk = pw::compute_adk_multi(run.preds, run.gts).mean;
        report(3, map >= 1.0 - 1e-12 && adk < 2.0 && run.max_scene_s < 2.0,
               "zero-noise scenes recover mAP 1.0 and mean ADK < 2%, < 2 s/scene",
               fmt("mAP %.4f, ADK %.3f%%, slowest scene %.2fs", map, adk, run.max_scene_s));
    }

    // ---- 4 + 9: segment-feature ablation, refinement effect -----------------
    {
        pw::RunConfig with_cfg, without_cfg;
        without_cfg.use_segment_features = false;
        SceneRun with_run, without_run;
        for (int i = 0; i < 100; ++i) {
            const pw::Scene scene = pw::sample_scene(skel, 1 + i % 3, 192, 256, 5000 + i);
            const pw::ScoreMapSet maps =
                pw::render_score_maps(scene, moderate_noise(), 6000 + i);
            const auto boxes = pw::boxes_from_gt(scene, 0.f, 7000 + i);
            const pw::InferenceResult a =
                pw::run_inference(maps, boxes, model, assoc, with_cfg);
            const pw::InferenceResult b =
                pw::run_inference(maps, boxes, model, assoc, without_cfg);
            with_run.preds.push_back(a.poses);
            without_run.preds.push_back(b.poses);
            with_run.gts.push_back(scene.people);
            with_run.refined.push_back(a.part_labels);
            with_run.unrefined.push_back(a.unrefined_labels);
            with_run.gt_parts.push_back(scene.composite_parts());
        }
        const double map_with = pw::compute_map_multi(with_run.preds, with_run.gts).mean_ap;
        const double map_without =
            pw::compute_map_multi(without_run.preds, with_run.gts).mean_ap;
        const double adk_with = pw::compute_adk_multi(with_run.preds, with_run.gts).mean;
        const double adk_without =
            pw::compute_adk_multi(without_run.preds, with_run.gts).mean;
        report(4, adk_with <= adk_without + 1e-9 && map_with >= map_without - 1e-9,
               "segment features do not hurt aggregate ADK or mAP on noisy scenes",
               fmt("ADK %.3f vs %.3f, mAP %.4f vs %.4f", adk_with, adk_without, map_with,
                   map_without));

        std::vector<const pw::PartLabelMap*> refined, unrefined, gt;
        for (size_t i = 0; i < with_run.refined.size(); ++i) {
            refined.push_back(&with_run.refined[i]);
            unrefined.push_back(&with_run.unrefined[i]);
            gt.push_back(&with_run.gt_parts[i]);
        }
        const double miou_refined = pw::compute_miou_multi(refined, gt).mean;
        const double miou_unrefined = pw::compute_miou_multi(unrefined, gt).mean;
        report(9, miou_refined >= miou_unrefined - 1e-9,
               "pose-refined part labels score at least the unrefined mIOU",
               fmt("mIOU %.4f vs %.4f", miou_refined, miou_unrefined));
    }

    // ---- 5: per-box decomposition speedup (via the CLI bench) ---------------
    {
        const fs::path data = tmp / "bench_data";
        const fs::path out = tmp / "bench_out";
        const fs::path model_path = tmp / "model.json";
        std::ofstream(model_path) << pw::model_to_json(model);
        bool ok = run_cli("synth --out-dir " + data.string() +
                          " --count 50 --min-people 4 --max-people 4 --seed 7") == 0;
        ok = ok && run_cli("bench --data " + data.string() + " --model " +
                           model_path.string() + " --out-dir " + out.string() +
                           " --reps 3 --seed 7") == 0;
        double speedup = 0.0, gap = 1.0;
        if (ok) {
            const auto j = nlohmann::json::parse(read_file(out / "bench.json"));
            double full_sum = 0.0, box_sum = 0.0;
            for (const auto& s : j["scenes"]) {
                full_sum += s["full_objective"].get<double>();
                box_sum += s["box_objective_sum"].get<double>();
            }
            speedup = j["total_full_solve_s"].get<double>() /
                      j["total_box_solve_s"].get<double>();
            gap = std::fabs(box_sum - full_sum) / std::fabs(full_sum);
        }
        report(5, ok && speedup >= 10.0 && gap <= 0.05,
               "per-box solves are >= 10x faster than the full scene graph, "
               "objective within 5%",
               fmt("speedup %.2fx, objective gap %.4f", speedup, gap));
    }

    // ---- 6: metric correctness ----------------------------------------------
    {
        const std::vector<pw::GroundTruthPerson> gt = {stick_person(40.f, 40.f),
                                                       stick_person(140.f, 40.f)};
        const std::vector<pw::PoseConfiguration> exact_preds = {pred_from(gt[0], -1.0),
                                                                pred_from(gt[1], -3.0)};
        const double map_perfect = pw::compute_map(exact_preds, gt).mean_ap;
        const double adk_perfect = pw::compute_adk(exact_preds, gt).mean;
        pw::PartLabelMap parts(16, 16);
        for (size_t i = 0; i < parts.labels.size(); ++i)
            parts.labels[i] = static_cast<uint8_t>(i % pw::kNumParts);
        const double miou_perfect = pw::compute_miou(parts, parts).mean;

        // a duplicate of person 0 that outranks the true detection of person 1
        std::vector<pw::PoseConfiguration> with_dup = exact_preds;
        with_dup.push_back(pred_from(gt[0], -2.0));
        const double map_dup = pw::compute_map(with_dup, gt).mean_ap;

        // hand-built 3x3 maps checked against direct set arithmetic
        pw::PartLabelMap a3(3, 3), b3(3, 3);
        const uint8_t av[9] = {0, 0, 1, 1, 1, 2, 2, 2, 0};
        const uint8_t bv[9] = {0, 1, 1, 1, 2, 2, 0, 2, 0};
        for (int i = 0; i < 9; ++i) {
            a3.labels[i] = av[i];
            b3.labels[i] = bv[i];
        }
        const pw::MiouResult m3 = pw::compute_miou(b3, a3);
        double expect_mean = 0.0;
        bool sets_match = true;
        for (int c = 0; c < 3; ++c) {
            int inter = 0, uni = 0;
            for (int i = 0; i < 9; ++i) {
                const bool in_a = av[i] == c, in_b = bv[i] == c;
                inter += in_a && in_b;
                uni += in_a || in_b;
            }
            const double expected = static_cast<double>(inter) / uni;
            expect_mean += expected / 3.0;
            if (!m3.per_class[c] || std::fabs(*m3.per_class[c] - expected) > 1e-12)
                sets_match = false;
        }
        sets_match = sets_match && std::fabs(m3.mean - expect_mean) <= 1e-12;

        const bool ok = map_perfect == 1.0 && adk_perfect == 0.0 && miou_perfect == 1.0 &&
                        map_dup < map_perfect && sets_match;
        report(6, ok, "metrics: perfect match scores perfectly, duplicates cost AP, "
                      "mIOU matches set arithmetic",
               fmt("mAP %.3f/%.3f with dup, ADK %.3f, mIOU %.3f, 3x3 %s", map_perfect,
                   map_dup, adk_perfect, miou_perfect, sets_match ? "ok" : "bad"));
    }

    // ---- 7: rasterization ----------------------------------------------------
    {
        pw::PoseConfiguration pose;
        pose.joints[pw::kNeck] = pw::Vec2{50.f, 50.f};
        const pw::Tensor3 circle = pw::rasterize_pose_features({pose}, 100, 100);
        long set = 0;
        for (int y = 0; y < 100; ++y)
            for (int x = 0; x < 100; ++x)
                if (circle.at(y, x, 0) > 0.f) ++set;

        std::mt19937_64 rng(6);
        std::uniform_real_distribution<float> u(10.f, 70.f);
        long stick_errors = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const pw::Vec2 a{u(rng), u(rng)};
            const pw::Vec2 b{u(rng), u(rng)};
            pw::PoseConfiguration edge;
            edge.joints[pw::kForehead] = a;
            edge.joints[pw::kNeck] = b;
            const pw::Tensor3 feats = pw::rasterize_pose_features({edge}, 80, 80);
            for (int y = 0; y < 80; ++y)
                for (int x = 0; x < 80; ++x) {
                    const float d = pw::point_segment_distance(
                        {static_cast<float>(x), static_cast<float>(y)}, a, b);
                    if (std::fabs(d - 3.5f) < 1e-3f) continue;  // boundary float noise
                    if (feats.at(y, x, 1) != (d <= 3.5f ? 1.f : 0.f)) ++stick_errors;
                }
        }
        report(7, set == 29 && stick_errors == 0,
               "radius-3 circles cover 29 pixels; width-7 sticks match the "
               "distance oracle",
               fmt("circle %ld px, stick mismatches %ld", set, stick_errors));
    }

    // ---- 8: subcommand determinism across reruns and --jobs ------------------
    {
        const fs::path det = tmp / "det";
        bool ok = true;
        std::string why;
        auto compare = [&](const char* what, const fs::path& a, const fs::path& b) {
            std::string w;
            if (!trees_equal(a, b, &w)) {
                ok = false;
                if (why.empty()) why = std::string(what) + ": " + w;
            }
        };
        auto run3 = [&](const char* what, const std::string& args_a,
                        const std::string& args_b, const std::string& args_c) {
            if (run_cli(args_a) != 0 || run_cli(args_b) != 0 || run_cli(args_c) != 0) {
                ok = false;
                if (why.empty()) why = std::string(what) + ": nonzero exit";
                return;
            }
            compare(what, det / (std::string(what) + "_a"), det / (std::string(what) + "_b"));
            compare(what, det / (std::string(what) + "_a"), det / (std::string(what) + "_c"));
        };
        const std::string noise =
            " --background-noise 0.05 --offset-noise 1 --flip-rate 0.02 --false-peaks 0.5";
        auto synth_args = [&](const char* run, int jobs) {
            return "synth --out-dir " + (det / (std::string("synth_") + run)).string() +
                   " --count 6 --min-people 1 --max-people 3 --seed 11 --jobs " +
                   std::to_string(jobs) + noise;
        };
        run3("synth", synth_args("a", 1), synth_args("b", 1), synth_args("c", 4));

        const std::string data = (det / "synth_a").string();
        auto train_args = [&](const char* run, int jobs) {
            fs::create_directories(det / (std::string("train_") + run));
            return "train --data " + data + " --out " +
                   (det / (std::string("train_") + run) / "model.json").string() +
                   " --iterations 300 --seed 11 --jobs " + std::to_string(jobs);
        };
        run3("train", train_args("a", 1), train_args("b", 1), train_args("c", 4));

        const std::string det_model = (det / "train_a" / "model.json").string();
        auto infer_args = [&](const char* run, int jobs) {
            return "infer --data " + data + " --model " + det_model + " --out-dir " +
                   (det / (std::string("infer_") + run)).string() + " --seed 11 --jobs " +
                   std::to_string(jobs);
        };
        run3("infer", infer_args("a", 1), infer_args("b", 1), infer_args("c", 4));

        const std::string pred = (det / "infer_a").string();
        auto eval_args = [&](const char* run) {
            return "eval --data " + data + " --pred " + pred + " --out-dir " +
                   (det / (std::string("eval_") + run)).string();
        };
        run3("eval", eval_args("a"), eval_args("b"), eval_args("c"));

        auto bench_args = [&](const char* run, int jobs) {
            return "bench --data " + data + " --model " + det_model + " --out-dir " +
                   (det / (std::string("bench_") + run)).string() +
                   " --no-timing --reps 1 --seed 11 --jobs " + std::to_string(jobs);
        };
        run3("bench", bench_args("a", 1), bench_args("b", 1), bench_args("c", 4));

        report(8, ok, "every subcommand is byte-identical across reruns and --jobs 1/4",
               ok ? "synth/train/infer/eval/bench stable" : why);
    }

    if (g_failures == 0) {
        std::printf("ALL CRITERIA PASS (9/9)\n");
        return 0;
    }
    std::printf("%d criterion/criteria FAILED\n", g_failures);
    return 1;
}
