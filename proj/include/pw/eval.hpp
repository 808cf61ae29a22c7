#ifndef PW_EVAL_HPP
#define PW_EVAL_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pw/assembly.hpp"
#include "pw/synth.hpp"

namespace pw {

struct MapResult {
    std::array<double, kNumJoints> per_joint_ap{};
    double mean_ap = 0.0;
};

struct AdkResult {
    // percent of reference scale; absent when no matched joint of that type
    std::array<std::optional<double>, kNumJoints> per_joint{};
    double mean = 0.0;
    int skipped_people = 0;  // GT missing forehead or neck
};

struct MiouResult {
    std::array<std::optional<double>, kNumParts> per_class{};
    double mean = 0.0;
};

struct SizeBinnedMiou {
    // XS < 40^2, S < 80^2, M < 160^2, L otherwise (instance mask area, px)
    std::array<std::optional<double>, 4> per_bin{};
};

struct EvalReport {
    MapResult map;
    AdkResult adk;
    MiouResult miou;
    SizeBinnedMiou size_miou;
};

// mAP with pose-box matching: predictions greedily matched to GT by
// whole-body box IOU >= 0.5 in score order; within a match a joint counts
// as correct within 0.5 * reference scale. AP is the all-points
// interpolated area under the PR curve.
MapResult compute_map(const std::vector<PoseConfiguration>& preds,
                      const std::vector<GroundTruthPerson>& gt);

AdkResult compute_adk(const std::vector<PoseConfiguration>& preds,
                      const std::vector<GroundTruthPerson>& gt);

MiouResult compute_miou(const PartLabelMap& pred, const PartLabelMap& gt);

// Multi-scene aggregation: detections pooled per joint type across scenes
// with per-scene matching; ADK sums and pixel counts accumulated globally.
MapResult compute_map_multi(const std::vector<std::vector<PoseConfiguration>>& preds,
                            const std::vector<std::vector<GroundTruthPerson>>& gts);
AdkResult compute_adk_multi(const std::vector<std::vector<PoseConfiguration>>& preds,
                            const std::vector<std::vector<GroundTruthPerson>>& gts);
MiouResult compute_miou_multi(const std::vector<const PartLabelMap*>& preds,
                              const std::vector<const PartLabelMap*>& gts);

// One scene's inputs for size-binned evaluation. `instances` holds 0 for no
// person and i+1 for instance i on top; `bboxes` are per-instance tight
// boxes. Per size bin, IOUs are computed over the union of that bin's
// instance pixels plus background pixels inside their bboxes.
struct SizeBinnedInput {
    const PartLabelMap* gt_parts = nullptr;
    const PartLabelMap* instances = nullptr;
    std::vector<RectF> bboxes;
    const PartLabelMap* pred = nullptr;
};

SizeBinnedMiou compute_size_binned_miou(const std::vector<SizeBinnedInput>& scenes);

std::string report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);

}  // namespace pw

#endif
