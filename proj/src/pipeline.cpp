#include "pw/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include <json.hpp>

namespace pw {

namespace {

// run fn(i) for i in [0, n) on up to `jobs` threads; results land by index
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int count = std::min(jobs, n);
    workers.reserve(count);
    for (int w = 0; w < count; ++w)
        workers.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    for (auto& t : workers) t.join();
}

}  // namespace

void RunConfig::validate() const {
    auto in01 = [](float v) { return v >= 0.f && v <= 1.f; };
    if (!in01(box_filter.score_threshold) || !in01(box_filter.iou_threshold))
        throw InputError("config: detection thresholds must lie in [0,1]");
    if (!in01(proposal_nms.score_threshold) || proposal_nms.distance_threshold < 0.f ||
        proposal_nms.max_per_type < 1)
        throw InputError("config: proposal NMS parameters out of range");
    if (!in01(pose_nms.head) || !in01(pose_nms.upper) || !in01(pose_nms.lower) ||
        !in01(pose_nms.whole))
        throw InputError("config: pose NMS thresholds must lie in [0,1]");
    if (missing_joint_score <= 0.f || missing_joint_score > 1.f)
        throw InputError("config: missing_joint_score must lie in (0,1]");
    if (zoom.pad_ratio < 0.f || zoom.target_height < 1.f || zoom.min_scale <= 0.f ||
        zoom.max_scale < zoom.min_scale)
        throw InputError("config: zoom parameters out of range");
    if (refine_skel_weight < 0.f || refine_joint_weight < 0.f)
        throw InputError("config: refinement weights must be nonnegative");
    if (solver.exact_node_limit < 1 || solver.restarts < 0 || solver.move_cap < 1)
        throw InputError("config: solver limits out of range");
    if (jobs < 1) throw InputError("config: jobs must be >= 1");
}

namespace {

const char* solver_mode_name(SolverMode mode) {
    switch (mode) {
        case SolverMode::kExact:
            return "exact";
        case SolverMode::kOracle:
            return "oracle";
        default:
            return "heuristic";
    }
}

}  // namespace

RunConfig RunConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config JSON: ") + e.what());
    }
    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "proposal_score_threshold")
                cfg.proposal_nms.score_threshold = value.get<float>();
            else if (key == "proposal_distance_threshold")
                cfg.proposal_nms.distance_threshold = value.get<float>();
            else if (key == "proposals_per_type")
                cfg.proposal_nms.max_per_type = value.get<int>();
            else if (key == "detection_score_threshold")
                cfg.box_filter.score_threshold = value.get<float>();
            else if (key == "detection_iou_threshold")
                cfg.box_filter.iou_threshold = value.get<float>();
            else if (key == "missing_joint_score")
                cfg.missing_joint_score = value.get<float>();
            else if (key == "pose_nms_head")
                cfg.pose_nms.head = value.get<float>();
            else if (key == "pose_nms_upper")
                cfg.pose_nms.upper = value.get<float>();
            else if (key == "pose_nms_lower")
                cfg.pose_nms.lower = value.get<float>();
            else if (key == "pose_nms_whole")
                cfg.pose_nms.whole = value.get<float>();
            else if (key == "zoom_pad")
                cfg.zoom.pad_ratio = value.get<float>();
            else if (key == "zoom_target_height")
                cfg.zoom.target_height = value.get<float>();
            else if (key == "zoom_min_scale")
                cfg.zoom.min_scale = value.get<float>();
            else if (key == "zoom_max_scale")
                cfg.zoom.max_scale = value.get<float>();
            else if (key == "refine_skel_weight")
                cfg.refine_skel_weight = value.get<float>();
            else if (key == "refine_joint_weight")
                cfg.refine_joint_weight = value.get<float>();
            else if (key == "solver_mode")
                cfg.solver.mode = solver_mode_from_name(value.get<std::string>());
            else if (key == "exact_node_limit")
                cfg.solver.exact_node_limit = value.get<int>();
            else if (key == "heuristic_restarts")
                cfg.solver.restarts = value.get<int>();
            else if (key == "heuristic_move_cap")
                cfg.solver.move_cap = value.get<int>();
            else if (key == "use_segment_features")
                cfg.use_segment_features = value.get<bool>();
            else if (key == "seed")
                cfg.seed = value.get<uint64_t>();
            else if (key == "jobs")
                cfg.jobs = value.get<int>();
            else
                throw InputError("config: unknown key \"" + key + "\"");
        } catch (const nlohmann::json::exception& e) {
            throw InputError("config: bad value for \"" + key + "\": " + e.what());
        }
    }
    cfg.solver.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

std::string RunConfig::to_json() const {
    nlohmann::json j;
    j["proposal_score_threshold"] = proposal_nms.score_threshold;
    j["proposal_distance_threshold"] = proposal_nms.distance_threshold;
    j["proposals_per_type"] = proposal_nms.max_per_type;
    j["detection_score_threshold"] = box_filter.score_threshold;
    j["detection_iou_threshold"] = box_filter.iou_threshold;
    j["missing_joint_score"] = missing_joint_score;
    j["pose_nms_head"] = pose_nms.head;
    j["pose_nms_upper"] = pose_nms.upper;
    j["pose_nms_lower"] = pose_nms.lower;
    j["pose_nms_whole"] = pose_nms.whole;
    j["zoom_pad"] = zoom.pad_ratio;
    j["zoom_target_height"] = zoom.target_height;
    j["zoom_min_scale"] = zoom.min_scale;
    j["zoom_max_scale"] = zoom.max_scale;
    j["refine_skel_weight"] = refine_skel_weight;
    j["refine_joint_weight"] = refine_joint_weight;
    j["solver_mode"] = solver_mode_name(solver.mode);
    j["exact_node_limit"] = solver.exact_node_limit;
    j["heuristic_restarts"] = solver.restarts;
    j["heuristic_move_cap"] = solver.move_cap;
    j["use_segment_features"] = use_segment_features;
    j["seed"] = seed;
    j["jobs"] = jobs;
    return j.dump(2);
}

InferenceResult run_inference(const ScoreMapSet& scene_maps,
                              const std::vector<DetectionBox>& boxes,
                              const LogisticModel& model,
                              const JointPartAssociation& assoc, const RunConfig& cfg) {
    const std::vector<DetectionBox> kept = filter_boxes(boxes, cfg.box_filter);

    struct BoxWork {
        ZoomedRegion region;
        std::optional<PoseConfiguration> selected;
    };
    std::vector<BoxWork> work(kept.size());
    std::vector<std::exception_ptr> errors(kept.size());

    parallel_for(static_cast<int>(kept.size()), cfg.jobs, [&](int i) {
        try {
            BoxWork& bw = work[i];
            bw.region = auto_zoom(kept[i], scene_maps, cfg.zoom);
            const auto proposals = refine_proposal_locations(
                bw.region, propose_joints(bw.region, cfg.proposal_nms));
            const PartLabelMap region_labels = argmax_channel(bw.region.maps.parts);
            AssemblyProblem problem = build_problem(bw.region, proposals, model, assoc,
                                                    region_labels, cfg.use_segment_features);
            // joint and neighbor maps are no longer needed; keep parts only
            bw.region.maps.joints = Tensor3();
            bw.region.maps.neighbors = Tensor3();
            const Labeling labeling = solve(problem, cfg.solver);
            auto poses = extract_poses(labeling, problem, bw.region, cfg.missing_joint_score);
            bw.selected = select_per_box(poses, kept[i]);
            if (bw.selected) bw.selected->source_box = i;
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<PoseConfiguration> candidates;
    for (const auto& bw : work)
        if (bw.selected) candidates.push_back(*bw.selected);
    InferenceResult result;
    result.poses = pose_nms(std::move(candidates), cfg.pose_nms);

    // refine each region's part scores with the final poses in region frame
    std::vector<Tensor3> refined(work.size());
    parallel_for(static_cast<int>(work.size()), cfg.jobs, [&](int i) {
        std::vector<PoseConfiguration> region_poses;
        for (const auto& pose : result.poses) {
            PoseConfiguration rp = pose;
            for (auto& joint : rp.joints)
                if (joint) joint = work[i].region.to_scene.invert(*joint);
            region_poses.push_back(std::move(rp));
        }
        refined[i] = refine_part_scores(work[i].region.maps.parts, region_poses, assoc,
                                        cfg.refine_skel_weight, cfg.refine_joint_weight);
    });

    std::vector<std::pair<const ZoomedRegion*, const Tensor3*>> merge_inputs;
    std::vector<std::pair<const ZoomedRegion*, const Tensor3*>> unrefined_inputs;
    for (size_t i = 0; i < work.size(); ++i) {
        merge_inputs.emplace_back(&work[i].region, &refined[i]);
        unrefined_inputs.emplace_back(&work[i].region, &work[i].region.maps.parts);
    }
    result.part_scores = merge_part_scores(scene_maps.parts, merge_inputs);
    result.part_labels = argmax_channel(result.part_scores);
    result.unrefined_labels =
        argmax_channel(merge_part_scores(scene_maps.parts, unrefined_inputs));
    return result;
}

std::vector<DetectionBox> boxes_from_gt(const Scene& scene, float jitter_sd,
                                        uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> jitter(0.f, jitter_sd);
    std::vector<DetectionBox> boxes;
    for (const auto& person : scene.people) {
        RectF r = person.bbox;
        if (r.w <= 0.f || r.h <= 0.f) continue;
        if (jitter_sd > 0.f) {
            r.x += jitter(rng);
            r.y += jitter(rng);
            r.w = std::max(4.f, r.w + jitter(rng));
            r.h = std::max(4.f, r.h + jitter(rng));
        }
        boxes.push_back({r, 1.f});
    }
    return boxes;
}

std::vector<TrainSample> build_training_samples(const Scene& scene,
                                                const ScoreMapSet& maps,
                                                const JointPartAssociation& assoc,
                                                const RunConfig& cfg) {
    std::vector<TrainSample> samples;
    const auto boxes = boxes_from_gt(scene, 0.f, 0);
    for (const auto& box : boxes) {
        const ZoomedRegion region = auto_zoom(box, maps, cfg.zoom);
        const auto proposals =
            refine_proposal_locations(region, propose_joints(region, cfg.proposal_nms));
        const PartLabelMap labels = argmax_channel(region.maps.parts);
        const PartRegionStats stats = PartRegionStats::from(labels);

        // match each proposal to the nearest GT joint of its type
        const float match_radius = 6.f * region.scale;
        std::vector<int> owner(proposals.size(), -1);
        for (size_t i = 0; i < proposals.size(); ++i) {
            const Vec2 scene_loc = region.to_scene.apply(proposals[i].location);
            float best_d = match_radius;
            for (size_t p = 0; p < scene.people.size(); ++p) {
                const auto& person = scene.people[p];
                if (!person.visible[proposals[i].joint_type]) continue;
                const float d = (person.joints[proposals[i].joint_type] - scene_loc).norm();
                if (d <= best_d) {
                    best_d = d;
                    owner[i] = static_cast<int>(p);
                }
            }
        }

        for (size_t i = 0; i < proposals.size(); ++i) {
            for (size_t j = i + 1; j < proposals.size(); ++j) {
                TrainSample s;
                s.f = make_pair_feature(region, labels, stats, assoc, proposals[i],
                                        proposals[j]);
                if (!cfg.use_segment_features &&
                    proposals[i].joint_type != proposals[j].joint_type)
                    std::fill(s.f.begin() + 4, s.f.end(), 0.0);
                s.type_a = proposals[i].joint_type;
                s.type_b = proposals[j].joint_type;
                s.same_person = owner[i] >= 0 && owner[i] == owner[j];
                samples.push_back(std::move(s));
            }
        }
    }
    return samples;
}

}  // namespace pw
