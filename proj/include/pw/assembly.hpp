#ifndef PW_ASSEMBLY_HPP
#define PW_ASSEMBLY_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pw/inference.hpp"
#include "pw/proposals.hpp"
#include "pw/skeleton.hpp"

namespace pw {

struct PoseConfiguration {
    std::array<std::optional<Vec2>, kNumJoints> joints;  // scene pixels
    double score = 0.0;
    int source_box = -1;

    int present_count() const {
        int n = 0;
        for (const auto& j : joints)
            if (j) ++n;
        return n;
    }
};

struct PoseBoxes {
    std::optional<RectF> head, upper, lower, whole;
};

struct PoseNmsThresholds {
    float head = 0.65f;
    float upper = 0.5f;
    float lower = 0.5f;
    float whole = 0.4f;
};

// One pose per cluster; locations mapped to scene coordinates, score in
// natural log with `missing_score` substituted for absent joints.
std::vector<PoseConfiguration> extract_poses(const Labeling& labeling,
                                             const AssemblyProblem& problem,
                                             const ZoomedRegion& region,
                                             float missing_score = 0.2f);

// Pose whose present-joint centroid is nearest the box center; ties go to
// the higher score.
std::optional<PoseConfiguration> select_per_box(const std::vector<PoseConfiguration>& poses,
                                                const DetectionBox& box);

PoseBoxes derive_pose_boxes(const PoseConfiguration& pose);

std::vector<PoseConfiguration> pose_nms(std::vector<PoseConfiguration> poses,
                                        const PoseNmsThresholds& thresholds = {});

// channel 0: circles of radius 3 at joints; channel 1: sticks of width 7
// along skeleton edges.
Tensor3 rasterize_pose_features(const std::vector<PoseConfiguration>& poses, int height,
                                int width);

// Additive pose prior: part channels gain skel_weight on sticks of their
// associated edges and joint_weight on circles of their associated joints.
// The background channel is untouched. Poses must be in the same pixel
// frame as `parts`.
Tensor3 refine_part_scores(const Tensor3& parts,
                           const std::vector<PoseConfiguration>& poses,
                           const JointPartAssociation& assoc, float skel_weight = 0.5f,
                           float joint_weight = 0.5f);
PartLabelMap refine_parts(const Tensor3& parts, const std::vector<PoseConfiguration>& poses,
                          const JointPartAssociation& assoc, float skel_weight = 0.5f,
                          float joint_weight = 0.5f);

// Score averaging over boxes; uncovered pixels keep the scene-level scores.
Tensor3 merge_part_scores(const Tensor3& scene_parts,
                          const std::vector<std::pair<const ZoomedRegion*, const Tensor3*>>& regions);

std::string poses_to_json(const std::vector<PoseConfiguration>& poses);
std::vector<PoseConfiguration> poses_from_json(const std::string& text);

// Simple binary PPM visualization of labels + skeletons.
void write_overlay_ppm(const std::string& path, const PartLabelMap& labels,
                       const std::vector<PoseConfiguration>& poses);

}  // namespace pw

#endif
