#ifndef PW_PIPELINE_HPP
#define PW_PIPELINE_HPP

#include <string>
#include <vector>

#include "pw/assembly.hpp"
#include "pw/eval.hpp"
#include "pw/inference.hpp"
#include "pw/pairwise.hpp"
#include "pw/proposals.hpp"
#include "pw/synth.hpp"

namespace pw {

// Every tunable of the pipeline with its default. Loaded from JSON (unknown
// keys rejected, ranges enforced) and overridable by CLI flags.
struct RunConfig {
    BoxFilterConfig box_filter;
    ZoomConfig zoom;
    ProposalNmsConfig proposal_nms;
    PoseNmsThresholds pose_nms;
    float missing_joint_score = 0.2f;
    float refine_skel_weight = 0.5f;
    float refine_joint_weight = 0.5f;
    SolverConfig solver{SolverMode::kHeuristic, 12, 3, 10000, 0};
    bool use_segment_features = true;
    uint64_t seed = 0;
    int jobs = 1;

    void validate() const;
    static RunConfig from_json(const std::string& text);
    std::string to_json() const;
};

struct InferenceResult {
    std::vector<PoseConfiguration> poses;
    Tensor3 part_scores;      // merged over boxes, scene frame
    PartLabelMap part_labels;
    PartLabelMap unrefined_labels;  // argmax of the merged scores without the pose prior
};

// filter -> zoom -> propose -> CRF solve -> select -> pose NMS ->
// refine -> merge. Boxes are processed concurrently when cfg.jobs > 1;
// outputs are reduced in input order.
InferenceResult run_inference(const ScoreMapSet& scene_maps,
                              const std::vector<DetectionBox>& boxes,
                              const LogisticModel& model,
                              const JointPartAssociation& assoc, const RunConfig& cfg);

// Detection boxes from GT person bboxes, with optional seeded jitter.
std::vector<DetectionBox> boxes_from_gt(const Scene& scene, float jitter_sd,
                                        uint64_t seed);

// Labeled proposal pairs for logistic training: the real proposal path runs
// on each GT box, proposals are matched back to GT joints, and pairs are
// positive exactly when both endpoints belong to the same person.
std::vector<TrainSample> build_training_samples(const Scene& scene,
                                                const ScoreMapSet& maps,
                                                const JointPartAssociation& assoc,
                                                const RunConfig& cfg);

}  // namespace pw

#endif
