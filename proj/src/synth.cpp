#include "pw/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

namespace pw {

namespace {

constexpr float kPi = 3.14159265358979323846f;
constexpr float kDown = kPi / 2.f;
constexpr float kUp = -kPi / 2.f;

// Soft one-hot values for the part score channels. The true channel must
// stay the per-pixel argmax under zero noise but be weak enough that the
// pose prior blend (weight 0.5) can overturn a flipped label.
constexpr float kPartOn = 0.55f;
constexpr float kPartOff = 0.075f;

constexpr float kLimbWidthRatio = 0.35f;
constexpr float kHeadRadiusRatio = 0.6f;
constexpr float kMaxPlacementIou = 0.3f;

}  // namespace

SkeletonModel SkeletonModel::standard() {
    SkeletonModel m{};
    int e = 0;
    auto add = [&](int parent, int child, float len, float sd, float base, float range,
                   bool rel) {
        m.edges[e++] = {parent, child, len, sd, base, range, rel};
    };
    add(kNeck, kForehead, 22.f, 2.f, kUp, 0.15f, false);
    add(kNeck, kLShoulder, 10.f, 1.f, kPi * 0.82f, 0.12f, false);
    add(kNeck, kRShoulder, 10.f, 1.f, kPi * 0.18f, 0.12f, false);
    add(kLShoulder, kLElbow, 17.f, 2.f, kDown + 0.3f, 0.35f, false);
    add(kRShoulder, kRElbow, 17.f, 2.f, kDown - 0.3f, 0.35f, false);
    add(kLElbow, kLWrist, 15.f, 2.f, 0.f, 0.6f, true);
    add(kRElbow, kRWrist, 15.f, 2.f, 0.f, 0.6f, true);
    add(kNeck, kLWaist, 30.f, 2.f, kDown + 0.16f, 0.05f, false);
    add(kNeck, kRWaist, 30.f, 2.f, kDown - 0.16f, 0.05f, false);
    add(kLWaist, kLKnee, 19.f, 2.f, kDown + 0.12f, 0.25f, false);
    add(kRWaist, kRKnee, 19.f, 2.f, kDown - 0.12f, 0.25f, false);
    add(kLKnee, kLAnkle, 17.f, 2.f, 0.f, 0.3f, true);
    add(kRKnee, kRAnkle, 17.f, 2.f, 0.f, 0.3f, true);
    return m;
}

void NoiseSpec::validate() const {
    if (joint_blob_sigma < 0.f || joint_score_peak < 0.f || joint_score_peak > 1.f ||
        background_noise_sd < 0.f || offset_noise_sd < 0.f || part_flip_rate < 0.f ||
        part_flip_rate > 1.f || false_peak_rate < 0.f)
        throw InputError("NoiseSpec: field out of range");
}

namespace {

void paint_oriented_rect(PartLabelMap& mask, const Vec2& a, const Vec2& b, float width,
                         uint8_t label) {
    const Vec2 axis = b - a;
    const float len = axis.norm();
    if (len <= 0.f) return;
    const Vec2 u{axis.x / len, axis.y / len};
    const Vec2 center = (a + b) * 0.5f;
    const float half_len = len * 0.5f;
    const float half_w = width * 0.5f;
    const float reach = half_len + half_w + 1.f;
    const int y0 = std::max(0, static_cast<int>(std::floor(center.y - reach)));
    const int y1 = std::min(mask.height - 1, static_cast<int>(std::ceil(center.y + reach)));
    const int x0 = std::max(0, static_cast<int>(std::floor(center.x - reach)));
    const int x1 = std::min(mask.width - 1, static_cast<int>(std::ceil(center.x + reach)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const Vec2 d{static_cast<float>(x) - center.x, static_cast<float>(y) - center.y};
            const float along = d.x * u.x + d.y * u.y;
            const float perp = -d.x * u.y + d.y * u.x;
            if (std::fabs(along) <= half_len && std::fabs(perp) <= half_w)
                mask.at(y, x) = label;
        }
    }
}

void paint_disc(PartLabelMap& mask, const Vec2& center, float radius, uint8_t label) {
    const int y0 = std::max(0, static_cast<int>(std::floor(center.y - radius)));
    const int y1 = std::min(mask.height - 1, static_cast<int>(std::ceil(center.y + radius)));
    const int x0 = std::max(0, static_cast<int>(std::floor(center.x - radius)));
    const int x1 = std::min(mask.width - 1, static_cast<int>(std::ceil(center.x + radius)));
    const float r2 = radius * radius;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const float dx = static_cast<float>(x) - center.x;
            const float dy = static_cast<float>(y) - center.y;
            if (dx * dx + dy * dy <= r2) mask.at(y, x) = label;
        }
    }
}

void paint_limb(PartLabelMap& mask, const Vec2& a, const Vec2& b, uint8_t label) {
    paint_oriented_rect(mask, a, b, (b - a).norm() * kLimbWidthRatio, label);
}

PartLabelMap render_person_mask(const std::array<Vec2, kNumJoints>& j, int h, int w) {
    PartLabelMap mask(h, w);
    const Vec2 waist_mid = (j[kLWaist] + j[kRWaist]) * 0.5f;
    const float shoulder_span = (j[kLShoulder] - j[kRShoulder]).norm();
    // torso slightly overshoots neck..waist so shoulders and waists land inside
    const Vec2 t_axis = waist_mid - j[kNeck];
    const Vec2 t_a = j[kNeck] - t_axis * 0.08f;
    const Vec2 t_b = waist_mid + t_axis * 0.08f;
    paint_oriented_rect(mask, t_a, t_b, shoulder_span * 1.15f, kTorso);
    paint_limb(mask, j[kLWaist], j[kLKnee], kUpperLeg);
    paint_limb(mask, j[kRWaist], j[kRKnee], kUpperLeg);
    paint_limb(mask, j[kLKnee], j[kLAnkle], kLowerLeg);
    paint_limb(mask, j[kRKnee], j[kRAnkle], kLowerLeg);
    paint_limb(mask, j[kLShoulder], j[kLElbow], kUpperArm);
    paint_limb(mask, j[kRShoulder], j[kRElbow], kUpperArm);
    paint_limb(mask, j[kLElbow], j[kLWrist], kLowerArm);
    paint_limb(mask, j[kRElbow], j[kRWrist], kLowerArm);
    const float neck_dist = (j[kForehead] - j[kNeck]).norm();
    paint_disc(mask, (j[kForehead] + j[kNeck]) * 0.5f, kHeadRadiusRatio * neck_dist, kHead);
    return mask;
}

RectF mask_bbox(const PartLabelMap& mask) {
    int min_x = mask.width, min_y = mask.height, max_x = -1, max_y = -1;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(y, x) != 0) {
                min_x = std::min(min_x, x);
                min_y = std::min(min_y, y);
                max_x = std::max(max_x, x);
                max_y = std::max(max_y, y);
            }
    if (max_x < 0) return {};
    return {static_cast<float>(min_x), static_cast<float>(min_y),
            static_cast<float>(max_x - min_x + 1), static_cast<float>(max_y - min_y + 1)};
}

}  // namespace

Scene sample_scene(const SkeletonModel& model, int n_people, int height, int width,
                   uint64_t seed) {
    if (n_people < 1) throw std::invalid_argument("sample_scene: n_people must be >= 1");
    if (height < 16 || width < 16)
        throw std::invalid_argument("sample_scene: canvas too small");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> unit(0.f, 1.f);

    Scene scene;
    scene.height = height;
    scene.width = width;
    scene.seed = seed;

    for (int p = 0; p < n_people; ++p) {
        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            std::array<Vec2, kNumJoints> joints{};
            joints[kNeck] = {width * (0.1f + 0.8f * unit(rng)),
                             height * (0.25f + 0.25f * unit(rng))};
            std::array<float, kNumJoints> edge_angle_of{};  // absolute angle reaching a joint
            bool ok = true;
            for (const auto& e : model.edges) {
                std::normal_distribution<float> len_dist(e.len_mean, e.len_sd);
                const float len = std::max(1.f, len_dist(rng));
                float ang = e.ang_base + (2.f * unit(rng) - 1.f) * e.ang_range;
                if (e.relative_to_parent) ang += edge_angle_of[e.parent];
                joints[e.child] = joints[e.parent] +
                                  Vec2{std::cos(ang) * len, std::sin(ang) * len};
                edge_angle_of[e.child] = ang;
                const Vec2& c = joints[e.child];
                if (c.x < 2.f || c.y < 2.f || c.x > width - 3.f || c.y > height - 3.f)
                    ok = false;
            }
            if (!ok) continue;

            GroundTruthPerson person;
            person.joints = joints;
            person.visible.fill(true);
            person.part_mask = render_person_mask(joints, height, width);
            person.bbox = mask_bbox(person.part_mask);
            person.depth_rank = p;
            bool overlaps = false;
            for (const auto& other : scene.people)
                if (iou(person.bbox, other.bbox) > kMaxPlacementIou) overlaps = true;
            if (overlaps) continue;
            scene.people.push_back(std::move(person));
            placed = true;
        }
        if (!placed)
            throw std::runtime_error("sample_scene: could not place person after 100 attempts");
    }
    return scene;
}

PartLabelMap Scene::composite_parts() const {
    PartLabelMap out(height, width);
    for (const auto& person : people)  // people are stored in depth order
        for (size_t i = 0; i < out.labels.size(); ++i)
            if (person.part_mask.labels[i] != 0) out.labels[i] = person.part_mask.labels[i];
    return out;
}

PartLabelMap Scene::instance_map() const {
    PartLabelMap out(height, width);
    for (size_t p = 0; p < people.size(); ++p)
        for (size_t i = 0; i < out.labels.size(); ++i)
            if (people[p].part_mask.labels[i] != 0)
                out.labels[i] = static_cast<uint8_t>(p + 1);
    return out;
}

namespace {

void add_blob(Tensor3& t, int channel, const Vec2& center, float peak, float sigma) {
    if (sigma <= 0.f) {
        const int x = static_cast<int>(std::lround(center.x));
        const int y = static_cast<int>(std::lround(center.y));
        if (x >= 0 && y >= 0 && x < t.width && y < t.height)
            t.at(y, x, channel) += peak;
        return;
    }
    const float reach = 3.f * sigma;
    const int y0 = std::max(0, static_cast<int>(std::floor(center.y - reach)));
    const int y1 = std::min(t.height - 1, static_cast<int>(std::ceil(center.y + reach)));
    const int x0 = std::max(0, static_cast<int>(std::floor(center.x - reach)));
    const int x1 = std::min(t.width - 1, static_cast<int>(std::ceil(center.x + reach)));
    const float inv = 1.f / (2.f * sigma * sigma);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const float dx = static_cast<float>(x) - center.x;
            const float dy = static_cast<float>(y) - center.y;
            t.at(y, x, channel) += peak * std::exp(-(dx * dx + dy * dy) * inv);
        }
    }
}

}  // namespace

ScoreMapSet render_score_maps(const Scene& scene, const NoiseSpec& noise, uint64_t seed) {
    noise.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> unit(0.f, 1.f);

    const int h = scene.height;
    const int w = scene.width;
    ScoreMapSet maps;
    maps.joints = Tensor3(h, w, kNumJoints);
    maps.neighbors = Tensor3(h, w, kNeighborChannels);
    maps.parts = Tensor3(h, w, kNumParts);

    // --- joint score channels ---
    for (const auto& person : scene.people)
        for (int k = 0; k < kNumJoints; ++k)
            if (person.visible[k])
                add_blob(maps.joints, k, person.joints[k], noise.joint_score_peak,
                         noise.joint_blob_sigma);
    if (noise.false_peak_rate > 0.f) {
        std::poisson_distribution<int> count(noise.false_peak_rate);
        for (int k = 0; k < kNumJoints; ++k) {
            const int n = count(rng);
            for (int i = 0; i < n; ++i) {
                const Vec2 at{unit(rng) * (w - 1), unit(rng) * (h - 1)};
                const float peak = noise.joint_score_peak * (0.4f + 0.6f * unit(rng));
                add_blob(maps.joints, k, at, peak, noise.joint_blob_sigma);
            }
        }
    }
    if (noise.background_noise_sd > 0.f) {
        std::normal_distribution<float> bg(0.f, noise.background_noise_sd);
        for (float& v : maps.joints.data) v += bg(rng);
    }
    for (float& v : maps.joints.data) v = std::clamp(v, 0.f, 1.f);

    // --- neighbor offset channels: each pixel follows the nearest person ---
    if (!scene.people.empty()) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const Vec2 p{static_cast<float>(x), static_cast<float>(y)};
                size_t best = 0;
                float best_d = std::numeric_limits<float>::max();
                for (size_t pi = 0; pi < scene.people.size(); ++pi) {
                    for (int k = 0; k < kNumJoints; ++k) {
                        if (!scene.people[pi].visible[k]) continue;
                        const float d = (scene.people[pi].joints[k] - p).norm();
                        if (d < best_d) {
                            best_d = d;
                            best = pi;
                        }
                    }
                }
                const auto& person = scene.people[best];
                for (int src = 0; src < kNumJoints; ++src) {
                    for (int dst = 0; dst < kNumJoints; ++dst) {
                        if (dst == src) continue;
                        const Vec2 off = person.visible[dst] ? person.joints[dst] - p : Vec2{};
                        maps.neighbors.at(y, x, neighbor_channel(src, dst, 0)) = off.x;
                        maps.neighbors.at(y, x, neighbor_channel(src, dst, 1)) = off.y;
                    }
                }
            }
        }
    }
    if (noise.offset_noise_sd > 0.f) {
        std::normal_distribution<float> od(0.f, noise.offset_noise_sd);
        for (float& v : maps.neighbors.data) v += od(rng);
    }

    // --- part score channels: soft one-hot with label flips ---
    const PartLabelMap composite = scene.composite_parts();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int label = composite.at(y, x);
            if (noise.part_flip_rate > 0.f && unit(rng) < noise.part_flip_rate) {
                const int shift = 1 + static_cast<int>(unit(rng) * (kNumParts - 1));
                label = (label + std::min(shift, kNumParts - 1)) % kNumParts;
            }
            for (int c = 0; c < kNumParts; ++c)
                maps.parts.at(y, x, c) = (c == label) ? kPartOn : kPartOff;
        }
    }
    if (noise.background_noise_sd > 0.f) {
        std::normal_distribution<float> bg(0.f, noise.background_noise_sd);
        for (float& v : maps.parts.data) v += bg(rng);
    }
    for (float& v : maps.parts.data) v = std::clamp(v, 0.f, 1.f);

    return maps;
}

std::string scene_to_json(const Scene& scene) {
    nlohmann::json j;
    j["height"] = scene.height;
    j["width"] = scene.width;
    j["people"] = nlohmann::json::array();
    for (const auto& person : scene.people) {
        nlohmann::json pj;
        for (int k = 0; k < kNumJoints; ++k) {
            if (person.visible[k])
                pj["joints"][joint_names()[k]] = {person.joints[k].x, person.joints[k].y};
            else
                pj["joints"][joint_names()[k]] = nullptr;
        }
        pj["depth"] = person.depth_rank;
        pj["bbox"] = {person.bbox.x, person.bbox.y, person.bbox.w, person.bbox.h};
        j["people"].push_back(std::move(pj));
    }
    return j.dump(2);
}

Scene scene_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("scene JSON: ") + e.what());
    }
    Scene scene;
    try {
        scene.height = j.at("height").get<int>();
        scene.width = j.at("width").get<int>();
        for (const auto& pj : j.at("people")) {
            GroundTruthPerson person;
            person.visible.fill(false);
            for (int k = 0; k < kNumJoints; ++k) {
                const auto& v = pj.at("joints").at(joint_names()[k]);
                if (!v.is_null()) {
                    person.joints[k] = {v.at(0).get<float>(), v.at(1).get<float>()};
                    person.visible[k] = true;
                }
            }
            person.depth_rank = pj.at("depth").get<int>();
            if (pj.contains("bbox")) {
                const auto& b = pj.at("bbox");
                person.bbox = {b.at(0).get<float>(), b.at(1).get<float>(),
                               b.at(2).get<float>(), b.at(3).get<float>()};
            } else {
                float x0 = 1e9f, y0 = 1e9f, x1 = -1e9f, y1 = -1e9f;
                for (int k = 0; k < kNumJoints; ++k) {
                    if (!person.visible[k]) continue;
                    x0 = std::min(x0, person.joints[k].x);
                    y0 = std::min(y0, person.joints[k].y);
                    x1 = std::max(x1, person.joints[k].x);
                    y1 = std::max(y1, person.joints[k].y);
                }
                if (x1 >= x0) person.bbox = {x0, y0, x1 - x0, y1 - y0};
            }
            scene.people.push_back(std::move(person));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("scene JSON: ") + e.what());
    }
    return scene;
}

}  // namespace pw
