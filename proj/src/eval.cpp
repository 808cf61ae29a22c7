#include "pw/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace pw {

namespace {

std::optional<RectF> gt_whole_box(const GroundTruthPerson& person) {
    float x0 = 1e9f, y0 = 1e9f, x1 = -1e9f, y1 = -1e9f;
    bool any = false;
    for (int k = 0; k < kNumJoints; ++k) {
        if (!person.visible[k]) continue;
        any = true;
        x0 = std::min(x0, person.joints[k].x);
        y0 = std::min(y0, person.joints[k].y);
        x1 = std::max(x1, person.joints[k].x);
        y1 = std::max(y1, person.joints[k].y);
    }
    if (!any) return std::nullopt;
    return RectF{x0, y0, x1 - x0, y1 - y0};
}

float reference_scale(const GroundTruthPerson& person) {
    if (person.visible[kForehead] && person.visible[kNeck])
        return 0.5f * (person.joints[kForehead] - person.joints[kNeck]).norm();
    return -1.f;
}

// stable score-descending order of prediction indices
std::vector<int> score_order(const std::vector<PoseConfiguration>& preds) {
    std::vector<int> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return preds[a].score > preds[b].score; });
    return order;
}

// greedy IOU >= 0.5 matching in score order; returns gt index per pred
std::vector<int> match_predictions(const std::vector<PoseConfiguration>& preds,
                                   const std::vector<GroundTruthPerson>& gt) {
    std::vector<std::optional<RectF>> gt_boxes;
    gt_boxes.reserve(gt.size());
    for (const auto& g : gt) gt_boxes.push_back(gt_whole_box(g));

    std::vector<int> match(preds.size(), -1);
    std::vector<bool> taken(gt.size(), false);
    for (int pi : score_order(preds)) {
        const PoseBoxes pb = derive_pose_boxes(preds[pi]);
        if (!pb.whole) continue;
        int best = -1;
        float best_v = -1.f;
        for (size_t g = 0; g < gt.size(); ++g) {
            if (taken[g] || !gt_boxes[g]) continue;
            const float v = iou(*pb.whole, *gt_boxes[g]);
            if (v >= 0.5f && v > best_v) {  // matching gate
                best_v = v;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0) {
            match[pi] = best;
            taken[best] = true;
        }
    }
    return match;
}

double average_precision(std::vector<std::pair<double, bool>> dets, int npos) {
    // dets: (score, is_tp), npos: number of GT instances of this joint
    if (npos == 0) return dets.empty() ? 1.0 : 0.0;
    std::stable_sort(dets.begin(), dets.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<double> precision;
    std::vector<double> recall;
    int tp = 0, fp = 0;
    for (const auto& [score, is_tp] : dets) {
        (is_tp ? tp : fp)++;
        precision.push_back(static_cast<double>(tp) / (tp + fp));
        recall.push_back(static_cast<double>(tp) / npos);
    }
    // all-points interpolation: integrate the precision envelope
    double ap = 0.0;
    double prev_recall = 0.0;
    for (size_t i = 0; i < precision.size(); ++i) {
        double max_p = 0.0;
        for (size_t k = i; k < precision.size(); ++k) max_p = std::max(max_p, precision[k]);
        ap += (recall[i] - prev_recall) * max_p;
        prev_recall = recall[i];
    }
    return ap;
}

}  // namespace

MapResult compute_map_multi(const std::vector<std::vector<PoseConfiguration>>& preds,
                            const std::vector<std::vector<GroundTruthPerson>>& gts) {
    if (preds.size() != gts.size())
        throw std::invalid_argument("compute_map_multi: scene count mismatch");

    std::array<std::vector<std::pair<double, bool>>, kNumJoints> dets;
    std::array<int, kNumJoints> npos{};
    for (size_t s = 0; s < preds.size(); ++s) {
        const auto& scene_preds = preds[s];
        const auto& gt = gts[s];
        const std::vector<int> match = match_predictions(scene_preds, gt);
        for (int t = 0; t < kNumJoints; ++t) {
            for (const auto& g : gt)
                if (g.visible[t]) ++npos[t];
            for (size_t pi = 0; pi < scene_preds.size(); ++pi) {
                if (!scene_preds[pi].joints[t]) continue;
                bool tp = false;
                if (match[pi] >= 0) {
                    const auto& g = gt[match[pi]];
                    const float ref = reference_scale(g);
                    if (g.visible[t] && ref > 0.f &&
                        (*scene_preds[pi].joints[t] - g.joints[t]).norm() <= 0.5f * ref)
                        tp = true;
                }
                dets[t].emplace_back(scene_preds[pi].score, tp);
            }
        }
    }

    MapResult result;
    for (int t = 0; t < kNumJoints; ++t)
        result.per_joint_ap[t] = average_precision(std::move(dets[t]), npos[t]);
    result.mean_ap = std::accumulate(result.per_joint_ap.begin(), result.per_joint_ap.end(),
                                     0.0) /
                     kNumJoints;
    return result;
}

MapResult compute_map(const std::vector<PoseConfiguration>& preds,
                      const std::vector<GroundTruthPerson>& gt) {
    return compute_map_multi({preds}, {gt});
}

namespace {

void accumulate_adk(const std::vector<PoseConfiguration>& preds,
                    const std::vector<GroundTruthPerson>& gt,
                    std::array<double, kNumJoints>& sums,
                    std::array<int, kNumJoints>& counts, AdkResult& result) {
    for (const auto& g : gt) {
        const float ref = reference_scale(g);
        if (ref <= 0.f) {
            ++result.skipped_people;
            continue;
        }
        const auto g_box = gt_whole_box(g);
        if (!g_box) {
            ++result.skipped_people;
            continue;
        }
        // highest whole-body overlap wins, first index on ties
        const PoseConfiguration* best = nullptr;
        float best_iou = 0.f;
        for (const auto& pred : preds) {
            const PoseBoxes pb = derive_pose_boxes(pred);
            if (!pb.whole) continue;
            const float v = iou(*pb.whole, *g_box);
            if (v > best_iou) {
                best_iou = v;
                best = &pred;
            }
        }
        if (!best) continue;
        for (int t = 0; t < kNumJoints; ++t) {
            if (!g.visible[t] || !best->joints[t]) continue;
            sums[t] += (*best->joints[t] - g.joints[t]).norm() / ref;
            ++counts[t];
        }
    }
}

}  // namespace

AdkResult compute_adk_multi(const std::vector<std::vector<PoseConfiguration>>& preds,
                            const std::vector<std::vector<GroundTruthPerson>>& gts) {
    if (preds.size() != gts.size())
        throw std::invalid_argument("compute_adk_multi: scene count mismatch");
    std::array<double, kNumJoints> sums{};
    std::array<int, kNumJoints> counts{};
    AdkResult result;
    for (size_t s = 0; s < preds.size(); ++s)
        accumulate_adk(preds[s], gts[s], sums, counts, result);

    double total = 0.0;
    int with_data = 0;
    for (int t = 0; t < kNumJoints; ++t) {
        if (counts[t] == 0) continue;
        result.per_joint[t] = 100.0 * sums[t] / counts[t];
        total += *result.per_joint[t];
        ++with_data;
    }
    result.mean = with_data > 0 ? total / with_data : 0.0;
    return result;
}

AdkResult compute_adk(const std::vector<PoseConfiguration>& preds,
                      const std::vector<GroundTruthPerson>& gt) {
    return compute_adk_multi({preds}, {gt});
}

MiouResult compute_miou_multi(const std::vector<const PartLabelMap*>& preds,
                              const std::vector<const PartLabelMap*>& gts) {
    if (preds.size() != gts.size())
        throw std::invalid_argument("compute_miou_multi: scene count mismatch");
    std::array<long, kNumParts> inter{}, in_pred{}, in_gt{};
    for (size_t s = 0; s < preds.size(); ++s) {
        const auto& pred = *preds[s];
        const auto& gt = *gts[s];
        if (pred.height != gt.height || pred.width != gt.width)
            throw std::invalid_argument("compute_miou: dimension mismatch");
        for (size_t i = 0; i < pred.labels.size(); ++i) {
            ++in_pred[pred.labels[i]];
            ++in_gt[gt.labels[i]];
            if (pred.labels[i] == gt.labels[i]) ++inter[pred.labels[i]];
        }
    }
    MiouResult result;
    double total = 0.0;
    int defined = 0;
    for (int c = 0; c < kNumParts; ++c) {
        const long uni = in_pred[c] + in_gt[c] - inter[c];
        if (uni == 0) continue;  // class absent everywhere: excluded
        result.per_class[c] = static_cast<double>(inter[c]) / static_cast<double>(uni);
        total += *result.per_class[c];
        ++defined;
    }
    result.mean = defined > 0 ? total / defined : 0.0;
    return result;
}

MiouResult compute_miou(const PartLabelMap& pred, const PartLabelMap& gt) {
    return compute_miou_multi({&pred}, {&gt});
}

SizeBinnedMiou compute_size_binned_miou(const std::vector<SizeBinnedInput>& scenes) {
    // aggregate per bin: intersection/pred/gt counts per class
    std::array<std::array<long, kNumParts>, 4> inter{}, in_pred{}, in_gt{};
    std::array<bool, 4> populated{};

    for (const auto& scene : scenes) {
        const auto& gt = *scene.gt_parts;
        const auto& pred = *scene.pred;
        const auto& inst = *scene.instances;
        if (pred.height != gt.height || pred.width != gt.width)
            throw std::invalid_argument("compute_size_binned_miou: dimension mismatch");

        // instance areas from the visibility-resolved instance map
        std::vector<long> area(scene.bboxes.size(), 0);
        for (uint8_t v : inst.labels)
            if (v > 0 && v <= area.size()) ++area[v - 1];

        auto bin_of = [](long a) {
            if (a < 40L * 40L) return 0;
            if (a < 80L * 80L) return 1;
            if (a < 160L * 160L) return 2;
            return 3;
        };

        for (size_t i = 0; i < scene.bboxes.size(); ++i) {
            if (area[i] == 0) continue;
            const int bin = bin_of(area[i]);
            populated[bin] = true;
            const RectF& bb = scene.bboxes[i];
            const int x0 = std::max(0, static_cast<int>(std::floor(bb.x)));
            const int y0 = std::max(0, static_cast<int>(std::floor(bb.y)));
            const int x1 = std::min(gt.width - 1, static_cast<int>(std::ceil(bb.x2())));
            const int y1 = std::min(gt.height - 1, static_cast<int>(std::ceil(bb.y2())));
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const bool mine = inst.at(y, x) == i + 1;
                    const bool local_bg = gt.at(y, x) == 0;
                    if (!mine && !local_bg) continue;
                    const int p = pred.at(y, x);
                    const int g = gt.at(y, x);
                    ++in_pred[bin][p];
                    ++in_gt[bin][g];
                    if (p == g) ++inter[bin][p];
                }
        }
    }

    SizeBinnedMiou result;
    for (int bin = 0; bin < 4; ++bin) {
        if (!populated[bin]) continue;
        double total = 0.0;
        int defined = 0;
        for (int c = 0; c < kNumParts; ++c) {
            const long uni = in_pred[bin][c] + in_gt[bin][c] - inter[bin][c];
            if (uni == 0) continue;
            total += static_cast<double>(inter[bin][c]) / static_cast<double>(uni);
            ++defined;
        }
        if (defined > 0) result.per_bin[bin] = total / defined;
    }
    return result;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
    nlohmann::json j;
    for (int t = 0; t < kNumJoints; ++t)
        j["map"]["per_joint"][joint_names()[t]] = report.map.per_joint_ap[t];
    j["map"]["mean"] = report.map.mean_ap;
    for (int t = 0; t < kNumJoints; ++t)
        j["adk"]["per_joint"][joint_names()[t]] = optional_json(report.adk.per_joint[t]);
    j["adk"]["mean"] = report.adk.mean;
    j["adk"]["skipped_people"] = report.adk.skipped_people;
    for (int c = 0; c < kNumParts; ++c)
        j["miou"]["per_class"][part_names()[c]] = optional_json(report.miou.per_class[c]);
    j["miou"]["mean"] = report.miou.mean;
    static const char* bins[4] = {"XS", "S", "M", "L"};
    for (int b = 0; b < 4; ++b)
        j["miou_by_size"][bins[b]] = optional_json(report.size_miou.per_bin[b]);
    j["protocol"] = "box-IOU 0.5 matching gate, 0.5*reference-scale joint correctness, "
                    "all-points PR interpolation; bins XS<40^2, S<80^2, M<160^2, L otherwise";
    return j.dump(2);
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%7.3f", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "      -";
    return fmt(*v);
}

double group_mean(const std::array<double, kNumJoints>& values,
                  std::initializer_list<int> joints) {
    double s = 0.0;
    for (int j : joints) s += values[j];
    return s / static_cast<double>(joints.size());
}

}  // namespace

std::string report_to_table(const EvalReport& report) {
    std::ostringstream out;
    const auto& ap = report.map.per_joint_ap;
    out << "Pose AP        Head  Should   Elbow   Wrist     Hip    Knee   Ankle  U-Body   Total\n";
    out << "            " << fmt(group_mean(ap, {kForehead, kNeck}))
        << fmt(group_mean(ap, {kLShoulder, kRShoulder}))
        << fmt(group_mean(ap, {kLElbow, kRElbow})) << fmt(group_mean(ap, {kLWrist, kRWrist}))
        << fmt(group_mean(ap, {kLWaist, kRWaist})) << fmt(group_mean(ap, {kLKnee, kRKnee}))
        << fmt(group_mean(ap, {kLAnkle, kRAnkle}))
        << fmt(group_mean(ap, {kForehead, kNeck, kLShoulder, kRShoulder, kLElbow, kRElbow,
                               kLWrist, kRWrist}))
        << fmt(report.map.mean_ap) << "\n\n";

    auto adk_group = [&](std::initializer_list<int> joints) -> std::string {
        double s = 0.0;
        int n = 0;
        for (int j : joints)
            if (report.adk.per_joint[j]) {
                s += *report.adk.per_joint[j];
                ++n;
            }
        if (n == 0) return "      -";
        return fmt(s / n);
    };
    out << "ADK (%)    Forehd    Neck  Should   Elbow   Wrist     Hip    Knee   Ankle    Ave.\n";
    out << "           " << adk_group({kForehead}) << adk_group({kNeck})
        << adk_group({kLShoulder, kRShoulder}) << adk_group({kLElbow, kRElbow})
        << adk_group({kLWrist, kRWrist}) << adk_group({kLWaist, kRWaist})
        << adk_group({kLKnee, kRKnee}) << adk_group({kLAnkle, kRAnkle})
        << fmt(report.adk.mean) << "\n\n";

    out << "mIOU         Head   Torso  U-arms  L-arms  U-legs  L-legs  Backgr    Ave.\n";
    out << "          " << fmt_opt(report.miou.per_class[kHead])
        << fmt_opt(report.miou.per_class[kTorso]) << fmt_opt(report.miou.per_class[kUpperArm])
        << fmt_opt(report.miou.per_class[kLowerArm])
        << fmt_opt(report.miou.per_class[kUpperLeg])
        << fmt_opt(report.miou.per_class[kLowerLeg])
        << fmt_opt(report.miou.per_class[kBackground]) << fmt(report.miou.mean) << "\n\n";

    out << "mIOU by size    XS       S       M       L\n";
    out << "           " << fmt_opt(report.size_miou.per_bin[0])
        << fmt_opt(report.size_miou.per_bin[1]) << fmt_opt(report.size_miou.per_bin[2])
        << fmt_opt(report.size_miou.per_bin[3]) << "\n";
    return out.str();
}

}  // namespace pw
