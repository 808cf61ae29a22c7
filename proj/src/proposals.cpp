#include "pw/proposals.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace pw {

std::vector<DetectionBox> filter_boxes(std::vector<DetectionBox> boxes,
                                       const BoxFilterConfig& cfg) {
    std::erase_if(boxes, [&](const DetectionBox& b) { return b.score < cfg.score_threshold; });
    std::stable_sort(boxes.begin(), boxes.end(),
                     [](const DetectionBox& a, const DetectionBox& b) {
                         return a.score > b.score;
                     });
    std::vector<DetectionBox> kept;
    for (const auto& b : boxes) {
        bool suppressed = false;
        for (const auto& k : kept)
            if (iou(b.rect, k.rect) > cfg.iou_threshold) suppressed = true;
        if (!suppressed) kept.push_back(b);
    }
    return kept;
}

ZoomedRegion auto_zoom(const DetectionBox& box, const ScoreMapSet& scene_maps,
                       const ZoomConfig& cfg) {
    if (box.rect.w <= 0.f || box.rect.h <= 0.f)
        throw std::invalid_argument("auto_zoom: degenerate box");
    const float scene_w = static_cast<float>(scene_maps.joints.width);
    const float scene_h = static_cast<float>(scene_maps.joints.height);

    // pad_ratio is the total padding fraction, split across the two sides
    const float px = box.rect.w * cfg.pad_ratio * 0.5f;
    const float py = box.rect.h * cfg.pad_ratio * 0.5f;
    RectF padded{box.rect.x - px, box.rect.y - py, box.rect.w + 2.f * px,
                 box.rect.h + 2.f * py};
    if (padded.x >= scene_w || padded.y >= scene_h || padded.x2() <= 0.f ||
        padded.y2() <= 0.f)
        throw std::invalid_argument("auto_zoom: box does not intersect scene");
    const float x0 = std::clamp(padded.x, 0.f, scene_w - 1.f);
    const float y0 = std::clamp(padded.y, 0.f, scene_h - 1.f);
    const float x1 = std::clamp(padded.x2(), 1.f, scene_w);
    const float y1 = std::clamp(padded.y2(), 1.f, scene_h);
    padded = {x0, y0, x1 - x0, y1 - y0};
    if (padded.w <= 0.f || padded.h <= 0.f)
        throw std::invalid_argument("auto_zoom: box does not intersect scene");

    const float scale = std::clamp(cfg.target_height / padded.h, cfg.min_scale,
                                   cfg.max_scale);
    const int out_h = std::max(1, static_cast<int>(std::lround(padded.h * scale)));
    const int out_w = std::max(1, static_cast<int>(std::lround(padded.w * scale)));

    ZoomedRegion region;
    region.source_box = box;
    region.scale = scale;
    region.maps.joints = crop_resize(scene_maps.joints, padded, out_h, out_w);
    region.maps.neighbors = crop_resize(scene_maps.neighbors, padded, out_h, out_w);
    region.maps.parts = crop_resize(scene_maps.parts, padded, out_h, out_w);
    for (float& v : region.maps.neighbors.data) v *= scale;

    region.to_scene.sx = out_w > 1 ? (padded.w - 1.f) / static_cast<float>(out_w - 1)
                                   : 1.f / scale;
    region.to_scene.sy = out_h > 1 ? (padded.h - 1.f) / static_cast<float>(out_h - 1)
                                   : 1.f / scale;
    region.to_scene.tx = padded.x;
    region.to_scene.ty = padded.y;
    return region;
}

namespace {

// Local maximum: >= every 8-neighbor and, on plateaus, first in (y, x) order
// among its equal neighbors.
bool is_local_max(const Tensor3& t, int y, int x, int c) {
    const float v = t.at(y, x, c);
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            const int ny = y + dy;
            const int nx = x + dx;
            if (ny < 0 || nx < 0 || ny >= t.height || nx >= t.width) continue;
            const float nv = t.at(ny, nx, c);
            if (nv > v) return false;
            if (nv == v && (ny < y || (ny == y && nx < x))) return false;
        }
    }
    return true;
}

}  // namespace

std::vector<JointProposal> propose_joints(const ZoomedRegion& region,
                                          const ProposalNmsConfig& cfg) {
    const Tensor3& jm = region.maps.joints;
    std::vector<JointProposal> out;
    for (int type = 0; type < jm.channels; ++type) {
        std::vector<JointProposal> peaks;
        for (int y = 0; y < jm.height; ++y)
            for (int x = 0; x < jm.width; ++x) {
                const float v = jm.at(y, x, type);
                if (v >= cfg.score_threshold && is_local_max(jm, y, x, type))
                    peaks.push_back({{static_cast<float>(x), static_cast<float>(y)}, type, v});
            }
        std::sort(peaks.begin(), peaks.end(), [](const JointProposal& a, const JointProposal& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.location.y != b.location.y) return a.location.y < b.location.y;
            return a.location.x < b.location.x;
        });
        std::vector<JointProposal> kept;
        for (const auto& p : peaks) {
            if (static_cast<int>(kept.size()) >= cfg.max_per_type) break;
            bool suppressed = false;
            for (const auto& k : kept)
                if ((p.location - k.location).norm() <= cfg.distance_threshold)
                    suppressed = true;
            if (!suppressed) kept.push_back(p);
        }
        out.insert(out.end(), kept.begin(), kept.end());
    }
    return out;
}

std::vector<JointProposal> refine_proposal_locations(const ZoomedRegion& region,
                                                     std::vector<JointProposal> proposals,
                                                     int radius, int iterations) {
    const Tensor3& jm = region.maps.joints;
    for (auto& p : proposals) {
        Vec2 c = p.location;
        for (int it = 0; it < iterations; ++it) {
            const int x0 = std::max(0, static_cast<int>(std::floor(c.x)) - radius);
            const int x1 = std::min(jm.width - 1, static_cast<int>(std::ceil(c.x)) + radius);
            const int y0 = std::max(0, static_cast<int>(std::floor(c.y)) - radius);
            const int y1 = std::min(jm.height - 1, static_cast<int>(std::ceil(c.y)) + radius);
            double sum = 0.0, sx = 0.0, sy = 0.0;
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double v = jm.at(y, x, p.joint_type);
                    sum += v;
                    sx += v * x;
                    sy += v * y;
                }
            if (sum <= 0.0) break;
            c = {static_cast<float>(sx / sum), static_cast<float>(sy / sum)};
        }
        // never drift farther than the window itself
        if (std::abs(c.x - p.location.x) <= radius && std::abs(c.y - p.location.y) <= radius)
            p.location = c;
    }
    return proposals;
}

std::vector<DetectionBox> boxes_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        std::vector<DetectionBox> boxes;
        for (const auto& bj : j.at("boxes")) {
            DetectionBox b;
            b.rect = {bj.at("x").get<float>(), bj.at("y").get<float>(),
                      bj.at("w").get<float>(), bj.at("h").get<float>()};
            b.score = bj.at("score").get<float>();
            boxes.push_back(b);
        }
        return boxes;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("boxes JSON: ") + e.what());
    }
}

std::string boxes_to_json(const std::vector<DetectionBox>& boxes) {
    nlohmann::json j;
    j["boxes"] = nlohmann::json::array();
    for (const auto& b : boxes)
        j["boxes"].push_back({{"x", b.rect.x},
                              {"y", b.rect.y},
                              {"w", b.rect.w},
                              {"h", b.rect.h},
                              {"score", b.score}});
    return j.dump(2);
}

}  // namespace pw
