#ifndef PW_PROPOSALS_HPP
#define PW_PROPOSALS_HPP

#include <vector>

#include "pw/geometry.hpp"
#include "pw/tensor.hpp"

namespace pw {

struct DetectionBox {
    RectF rect;
    float score = 0.f;
};

// Separable affine map from region pixels to scene pixels.
struct AffineMap {
    float sx = 1.f, sy = 1.f;
    float tx = 0.f, ty = 0.f;

    Vec2 apply(const Vec2& p) const { return {p.x * sx + tx, p.y * sy + ty}; }
    Vec2 invert(const Vec2& p) const { return {(p.x - tx) / sx, (p.y - ty) / sy}; }
};

struct ZoomedRegion {
    DetectionBox source_box;
    float scale = 1.f;     // nominal region px per scene px
    ScoreMapSet maps;      // resampled into region coordinates
    AffineMap to_scene;    // region pixel -> scene pixel
};

struct JointProposal {
    Vec2 location;  // region pixels
    int joint_type = 0;
    float score = 0.f;
};

struct BoxFilterConfig {
    float score_threshold = 0.6f;
    float iou_threshold = 0.6f;
};

struct ZoomConfig {
    float pad_ratio = 0.2f;  // total padding fraction, half per side
    float target_height = 256.f;
    float min_scale = 0.4f;
    float max_scale = 4.f;
};

struct ProposalNmsConfig {
    float score_threshold = 0.2f;
    float distance_threshold = 16.f;
    int max_per_type = 6;
};

// Score gate then greedy IOU suppression, strongest box first.
std::vector<DetectionBox> filter_boxes(std::vector<DetectionBox> boxes,
                                       const BoxFilterConfig& cfg = {});

// Pads the box, rescales so the padded height hits the target (scale
// clamped), resamples all three maps, and rescales the offset channels so
// they stay valid in region pixels.
ZoomedRegion auto_zoom(const DetectionBox& box, const ScoreMapSet& scene_maps,
                       const ZoomConfig& cfg = {});

// Per joint type: local maxima over the joint channel, score gate, greedy
// distance NMS, capped count. Deterministic under (score desc, y asc, x asc).
std::vector<JointProposal> propose_joints(const ZoomedRegion& region,
                                          const ProposalNmsConfig& cfg = {});

// Sub-pixel localization: iterated score-weighted centroid over a box window
// of the joint channel around each kept peak. NMS locations are grid-exact;
// this recovers the fractional peak the grid quantized away.
std::vector<JointProposal> refine_proposal_locations(const ZoomedRegion& region,
                                                     std::vector<JointProposal> proposals,
                                                     int radius = 4, int iterations = 3);

std::vector<DetectionBox> boxes_from_json(const std::string& text);
std::string boxes_to_json(const std::vector<DetectionBox>& boxes);

}  // namespace pw

#endif
