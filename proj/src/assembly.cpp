#include "pw/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

namespace pw {

std::vector<PoseConfiguration> extract_poses(const Labeling& labeling,
                                             const AssemblyProblem& problem,
                                             const ZoomedRegion& region,
                                             float missing_score) {
    std::map<int, std::vector<int>> clusters;
    for (size_t i = 0; i < labeling.cluster.size(); ++i)
        if (labeling.cluster[i] >= 0) clusters[labeling.cluster[i]].push_back(static_cast<int>(i));

    std::vector<PoseConfiguration> poses;
    for (const auto& [cid, members] : clusters) {
        PoseConfiguration pose;
        double score = 0.0;
        for (int m : members) {
            const auto& node = problem.nodes[m];
            pose.joints[node.joint_type] = region.to_scene.apply(node.location);
            score += std::log(std::clamp(static_cast<double>(node.score), 1e-6, 1.0 - 1e-6));
        }
        const int missing = kNumJoints - pose.present_count();
        score += missing * std::log(static_cast<double>(missing_score));
        pose.score = score;
        poses.push_back(std::move(pose));
    }
    return poses;
}

std::optional<PoseConfiguration> select_per_box(const std::vector<PoseConfiguration>& poses,
                                                const DetectionBox& box) {
    const Vec2 center{box.rect.x + box.rect.w * 0.5f, box.rect.y + box.rect.h * 0.5f};
    const PoseConfiguration* best = nullptr;
    float best_dist = 0.f;
    for (const auto& pose : poses) {
        Vec2 sum{};
        int n = 0;
        for (const auto& j : pose.joints)
            if (j) {
                sum = sum + *j;
                ++n;
            }
        if (n == 0) continue;
        const float dist = (Vec2{sum.x / n, sum.y / n} - center).norm();
        if (!best || dist < best_dist ||
            (dist == best_dist && pose.score > best->score)) {
            best = &pose;
            best_dist = dist;
        }
    }
    if (!best) return std::nullopt;
    return *best;
}

namespace {

std::optional<RectF> joint_bbox(const PoseConfiguration& pose,
                                const std::vector<int>& types) {
    float x0 = 1e9f, y0 = 1e9f, x1 = -1e9f, y1 = -1e9f;
    bool any = false;
    for (int t : types) {
        if (!pose.joints[t]) continue;
        any = true;
        x0 = std::min(x0, pose.joints[t]->x);
        y0 = std::min(y0, pose.joints[t]->y);
        x1 = std::max(x1, pose.joints[t]->x);
        y1 = std::max(y1, pose.joints[t]->y);
    }
    if (!any) return std::nullopt;
    return RectF{x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

PoseBoxes derive_pose_boxes(const PoseConfiguration& pose) {
    PoseBoxes boxes;
    if (pose.joints[kForehead] && pose.joints[kNeck]) {
        const float ref = 0.5f * (*pose.joints[kForehead] - *pose.joints[kNeck]).norm();
        auto head = *joint_bbox(pose, {kForehead, kNeck});
        boxes.head = RectF{head.x - ref, head.y - ref, head.w + 2 * ref, head.h + 2 * ref};
    }
    boxes.upper = joint_bbox(pose, {kNeck, kLShoulder, kRShoulder, kLElbow, kRElbow,
                                    kLWrist, kRWrist});
    boxes.lower = joint_bbox(pose, {kLWaist, kRWaist, kLKnee, kRKnee, kLAnkle, kRAnkle});
    std::vector<int> all(kNumJoints);
    for (int i = 0; i < kNumJoints; ++i) all[i] = i;
    boxes.whole = joint_bbox(pose, all);
    return boxes;
}

namespace {

bool suppresses(const PoseBoxes& kept, const PoseBoxes& cand,
                const PoseNmsThresholds& thr) {
    auto over = [](const std::optional<RectF>& a, const std::optional<RectF>& b,
                   float t) { return a && b && iou(*a, *b) > t; };
    return over(kept.head, cand.head, thr.head) || over(kept.upper, cand.upper, thr.upper) ||
           over(kept.lower, cand.lower, thr.lower) || over(kept.whole, cand.whole, thr.whole);
}

}  // namespace

std::vector<PoseConfiguration> pose_nms(std::vector<PoseConfiguration> poses,
                                        const PoseNmsThresholds& thresholds) {
    std::stable_sort(poses.begin(), poses.end(),
                     [](const PoseConfiguration& a, const PoseConfiguration& b) {
                         return a.score > b.score;
                     });
    std::vector<PoseConfiguration> kept;
    std::vector<PoseBoxes> kept_boxes;
    for (auto& pose : poses) {
        const PoseBoxes boxes = derive_pose_boxes(pose);
        bool drop = false;
        for (const auto& kb : kept_boxes)
            if (suppresses(kb, boxes, thresholds)) drop = true;
        if (!drop) {
            kept.push_back(std::move(pose));
            kept_boxes.push_back(boxes);
        }
    }
    return kept;
}

Tensor3 rasterize_pose_features(const std::vector<PoseConfiguration>& poses, int height,
                                int width) {
    if (height < 1 || width < 1)
        throw std::invalid_argument("rasterize_pose_features: dims must be positive");
    Tensor3 out(height, width, 2);
    for (const auto& pose : poses) {
        for (const auto& joint : pose.joints) {
            if (!joint) continue;
            const int y0 = std::max(0, static_cast<int>(std::floor(joint->y - 3.f)));
            const int y1 = std::min(height - 1, static_cast<int>(std::ceil(joint->y + 3.f)));
            const int x0 = std::max(0, static_cast<int>(std::floor(joint->x - 3.f)));
            const int x1 = std::min(width - 1, static_cast<int>(std::ceil(joint->x + 3.f)));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const float dx = x - joint->x;
                    const float dy = y - joint->y;
                    if (dx * dx + dy * dy <= 9.f) out.at(y, x, 0) = 1.f;
                }
        }
        for (const auto& edge : kSkeletonEdges) {
            const auto& a = pose.joints[edge[0]];
            const auto& b = pose.joints[edge[1]];
            if (!a || !b) continue;
            const float half_w = 3.5f;
            const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a->y, b->y) - half_w)));
            const int y1 = std::min(height - 1,
                                    static_cast<int>(std::ceil(std::max(a->y, b->y) + half_w)));
            const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a->x, b->x) - half_w)));
            const int x1 = std::min(width - 1,
                                    static_cast<int>(std::ceil(std::max(a->x, b->x) + half_w)));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    if (point_segment_distance({static_cast<float>(x), static_cast<float>(y)},
                                               *a, *b) <= half_w)
                        out.at(y, x, 1) = 1.f;
        }
    }
    return out;
}

Tensor3 refine_part_scores(const Tensor3& parts,
                           const std::vector<PoseConfiguration>& poses,
                           const JointPartAssociation& assoc, float skel_weight,
                           float joint_weight) {
    const int h = parts.height;
    const int w = parts.width;
    Tensor3 out = parts;

    // boolean per-part indicators so overlapping sticks add the prior once
    std::vector<std::vector<uint8_t>> skel(kNumParts, std::vector<uint8_t>(h * w, 0));
    std::vector<std::vector<uint8_t>> jnt(kNumParts, std::vector<uint8_t>(h * w, 0));

    for (const auto& pose : poses) {
        for (int e = 0; e < kNumSkeletonEdges; ++e) {
            const auto& a = pose.joints[kSkeletonEdges[e][0]];
            const auto& b = pose.joints[kSkeletonEdges[e][1]];
            if (!a || !b) continue;
            const int part = assoc.edge_part[e];
            const float half_w = 3.5f;
            const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a->y, b->y) - half_w)));
            const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max(a->y, b->y) + half_w)));
            const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a->x, b->x) - half_w)));
            const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max(a->x, b->x) + half_w)));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    if (point_segment_distance({static_cast<float>(x), static_cast<float>(y)},
                                               *a, *b) <= half_w)
                        skel[part][y * w + x] = 1;
        }
        for (int t = 0; t < kNumJoints; ++t) {
            if (!pose.joints[t]) continue;
            const Vec2& c = *pose.joints[t];
            const int y0 = std::max(0, static_cast<int>(std::floor(c.y - 3.f)));
            const int y1 = std::min(h - 1, static_cast<int>(std::ceil(c.y + 3.f)));
            const int x0 = std::max(0, static_cast<int>(std::floor(c.x - 3.f)));
            const int x1 = std::min(w - 1, static_cast<int>(std::ceil(c.x + 3.f)));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const float dx = x - c.x;
                    const float dy = y - c.y;
                    if (dx * dx + dy * dy > 9.f) continue;
                    for (int part : assoc.joint_parts[t])
                        if (part != kBackground) jnt[part][y * w + x] = 1;
                }
        }
    }

    for (int part = 1; part < kNumParts; ++part)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int i = y * w + x;
                if (skel[part][i]) out.at(y, x, part) += skel_weight;
                if (jnt[part][i]) out.at(y, x, part) += joint_weight;
            }
    return out;
}

PartLabelMap refine_parts(const Tensor3& parts, const std::vector<PoseConfiguration>& poses,
                          const JointPartAssociation& assoc, float skel_weight,
                          float joint_weight) {
    return argmax_channel(refine_part_scores(parts, poses, assoc, skel_weight, joint_weight));
}

Tensor3 merge_part_scores(const Tensor3& scene_parts,
                          const std::vector<std::pair<const ZoomedRegion*, const Tensor3*>>& regions) {
    const int h = scene_parts.height;
    const int w = scene_parts.width;
    const int ch = scene_parts.channels;
    Tensor3 sum(h, w, ch);
    std::vector<int> count(static_cast<size_t>(h) * w, 0);

    for (const auto& [region, scores] : regions) {
        if (scores->channels != ch)
            throw std::invalid_argument("merge_part_scores: channel mismatch");
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const Vec2 rp = region->to_scene.invert(
                    {static_cast<float>(x), static_cast<float>(y)});
                if (rp.x < 0.f || rp.y < 0.f || rp.x > scores->width - 1.f ||
                    rp.y > scores->height - 1.f)
                    continue;
                // bilinear pull from the region grid
                const int rx0 = static_cast<int>(std::floor(rp.x));
                const int ry0 = static_cast<int>(std::floor(rp.y));
                const int rx1 = std::min(rx0 + 1, scores->width - 1);
                const int ry1 = std::min(ry0 + 1, scores->height - 1);
                const float fx = rp.x - rx0;
                const float fy = rp.y - ry0;
                for (int c = 0; c < ch; ++c) {
                    const float top = scores->at(ry0, rx0, c) * (1.f - fx) +
                                      scores->at(ry0, rx1, c) * fx;
                    const float bot = scores->at(ry1, rx0, c) * (1.f - fx) +
                                      scores->at(ry1, rx1, c) * fx;
                    sum.at(y, x, c) += top * (1.f - fy) + bot * fy;
                }
                ++count[static_cast<size_t>(y) * w + x];
            }
        }
    }

    Tensor3 out(h, w, ch);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int n = count[static_cast<size_t>(y) * w + x];
            for (int c = 0; c < ch; ++c)
                out.at(y, x, c) = n > 0 ? sum.at(y, x, c) / n : scene_parts.at(y, x, c);
        }
    return out;
}

std::string poses_to_json(const std::vector<PoseConfiguration>& poses) {
    nlohmann::json j;
    j["poses"] = nlohmann::json::array();
    for (const auto& pose : poses) {
        nlohmann::json pj;
        for (int k = 0; k < kNumJoints; ++k) {
            if (pose.joints[k])
                pj["joints"][joint_names()[k]] = {pose.joints[k]->x, pose.joints[k]->y};
            else
                pj["joints"][joint_names()[k]] = nullptr;
        }
        pj["score"] = pose.score;
        pj["box"] = pose.source_box;
        j["poses"].push_back(std::move(pj));
    }
    return j.dump(2);
}

std::vector<PoseConfiguration> poses_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        std::vector<PoseConfiguration> poses;
        for (const auto& pj : j.at("poses")) {
            PoseConfiguration pose;
            for (int k = 0; k < kNumJoints; ++k) {
                const auto& v = pj.at("joints").at(joint_names()[k]);
                if (!v.is_null())
                    pose.joints[k] = Vec2{v.at(0).get<float>(), v.at(1).get<float>()};
            }
            pose.score = pj.at("score").get<double>();
            pose.source_box = pj.value("box", -1);
            poses.push_back(std::move(pose));
        }
        return poses;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("pose JSON: ") + e.what());
    }
}

void write_overlay_ppm(const std::string& path, const PartLabelMap& labels,
                       const std::vector<PoseConfiguration>& poses) {
    static const std::array<std::array<uint8_t, 3>, 7> palette = {{
        {30, 30, 30},     // background
        {220, 180, 60},   // head
        {60, 120, 220},   // torso
        {70, 200, 90},    // upper arm
        {150, 230, 150},  // lower arm
        {200, 80, 80},    // upper leg
        {240, 150, 150},  // lower leg
    }};
    const int h = labels.height;
    const int w = labels.width;
    std::vector<uint8_t> img(static_cast<size_t>(h) * w * 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto& c = palette[labels.at(y, x) % 7];
            const size_t i = (static_cast<size_t>(y) * w + x) * 3;
            img[i] = c[0];
            img[i + 1] = c[1];
            img[i + 2] = c[2];
        }
    const Tensor3 feats = rasterize_pose_features(poses, h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = (static_cast<size_t>(y) * w + x) * 3;
            if (feats.at(y, x, 1) > 0.f) {
                img[i] = 255;
                img[i + 1] = 255;
                img[i + 2] = 255;
            }
            if (feats.at(y, x, 0) > 0.f) {
                img[i] = 255;
                img[i + 1] = 0;
                img[i + 2] = 0;
            }
        }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "P6\n" << w << " " << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
}

}  // namespace pw
