#include "pw/pairwise.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace pw {

namespace {

Vec2 read_offset(const ZoomedRegion& region, const JointProposal& from, int toward_type) {
    const Tensor3& n = region.maps.neighbors;
    const int x = static_cast<int>(std::lround(from.location.x));
    const int y = static_cast<int>(std::lround(from.location.y));
    if (x < 0 || y < 0 || x >= n.width || y >= n.height)
        throw std::invalid_argument("neighbor_features: proposal out of region bounds");
    return {n.at(y, x, neighbor_channel(from.joint_type, toward_type, 0)),
            n.at(y, x, neighbor_channel(from.joint_type, toward_type, 1))};
}

}  // namespace

std::array<double, 4> neighbor_features(const ZoomedRegion& region,
                                        const JointProposal& c_i,
                                        const JointProposal& c_j) {
    if (c_i.joint_type == c_j.joint_type)
        throw std::invalid_argument("neighbor_features: same-type pair");
    const Vec2 v_ij = c_j.location - c_i.location;
    const Vec2 v_ji = c_i.location - c_j.location;
    const Vec2 vp_ij = read_offset(region, c_i, c_j.joint_type);
    const Vec2 vp_ji = read_offset(region, c_j, c_i.joint_type);
    return {(v_ji - vp_ji).norm(), (v_ij - vp_ij).norm(),
            angle_between(v_ji, vp_ji), angle_between(v_ij, vp_ij)};
}

PartRegionStats PartRegionStats::from(const PartLabelMap& labels) {
    PartRegionStats s;
    for (uint8_t l : labels.labels) ++s.counts[l];
    return s;
}

namespace {

bool inside_part(const PartLabelMap& labels, const Vec2& p, int part) {
    const int x = static_cast<int>(std::lround(p.x));
    const int y = static_cast<int>(std::lround(p.y));
    if (x < 0 || y < 0 || x >= labels.width || y >= labels.height) return false;
    return labels.at(y, x) == part;
}

// Within 3 px of both a region pixel and a non-region pixel.
bool near_boundary(const PartLabelMap& labels, const Vec2& p, int part) {
    const int cx = static_cast<int>(std::lround(p.x));
    const int cy = static_cast<int>(std::lround(p.y));
    bool saw_in = false;
    bool saw_out = false;
    for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
            if (dx * dx + dy * dy > 9) continue;
            const int x = cx + dx;
            const int y = cy + dy;
            if (x < 0 || y < 0 || x >= labels.width || y >= labels.height) continue;
            (labels.at(y, x) == part ? saw_in : saw_out) = true;
            if (saw_in && saw_out) return true;
        }
    }
    return false;
}

std::vector<std::array<int, 2>> bresenham(int x0, int y0, int x1, int y1) {
    std::vector<std::array<int, 2>> pts;
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        pts.push_back({x0, y0});
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
    return pts;
}

double line_inside_proportion(const PartLabelMap& labels, const Vec2& a, const Vec2& b,
                              int part) {
    const auto pts = bresenham(static_cast<int>(std::lround(a.x)),
                               static_cast<int>(std::lround(a.y)),
                               static_cast<int>(std::lround(b.x)),
                               static_cast<int>(std::lround(b.y)));
    long inside = 0;
    for (const auto& p : pts) {
        if (p[0] < 0 || p[1] < 0 || p[0] >= labels.width || p[1] >= labels.height) continue;
        if (labels.at(p[1], p[0]) == part) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(pts.size());
}

// Pixel IOU between the oriented rectangle spanned by a->b (aspect 2.5:1)
// and the pixels labeled `part`.
double oriented_rect_iou(const PartLabelMap& labels, const PartRegionStats& stats,
                         const Vec2& a, const Vec2& b, int part) {
    const Vec2 axis = b - a;
    const float len = axis.norm();
    if (len <= 0.f) return 0.0;
    const Vec2 u{axis.x / len, axis.y / len};
    const Vec2 center = (a + b) * 0.5f;
    const float half_len = len * 0.5f;
    const float half_w = len / 2.5f * 0.5f;
    const float reach = half_len + half_w + 1.f;
    const int y0 = std::max(0, static_cast<int>(std::floor(center.y - reach)));
    const int y1 = std::min(labels.height - 1, static_cast<int>(std::ceil(center.y + reach)));
    const int x0 = std::max(0, static_cast<int>(std::floor(center.x - reach)));
    const int x1 = std::min(labels.width - 1, static_cast<int>(std::ceil(center.x + reach)));
    long rect = 0;
    long both = 0;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const Vec2 d{static_cast<float>(x) - center.x, static_cast<float>(y) - center.y};
            const float along = d.x * u.x + d.y * u.y;
            const float perp = -d.x * u.y + d.y * u.x;
            if (std::fabs(along) > half_len || std::fabs(perp) > half_w) continue;
            ++rect;
            if (labels.at(y, x) == part) ++both;
        }
    }
    const long uni = rect + stats.counts[part] - both;
    return uni > 0 ? static_cast<double>(both) / static_cast<double>(uni) : 0.0;
}

}  // namespace

std::array<double, 8> segment_features(const PartLabelMap& labels,
                                       const PartRegionStats& stats,
                                       const JointPartAssociation& assoc,
                                       const JointProposal& c_i,
                                       const JointProposal& c_j) {
    std::array<double, 8> f{};
    const int part_i = assoc.joint_parts[c_i.joint_type][0];
    f[0] = inside_part(labels, c_i.location, part_i) ? 1.0 : 0.0;
    f[1] = near_boundary(labels, c_i.location, part_i) ? 1.0 : 0.0;

    const auto& parts_j = assoc.joint_parts[c_j.joint_type];
    f[2] = inside_part(labels, c_j.location, parts_j[0]) ? 1.0 : 0.0;
    f[3] = near_boundary(labels, c_j.location, parts_j[0]) ? 1.0 : 0.0;
    if (parts_j[1] != kBackground) {
        f[4] = inside_part(labels, c_j.location, parts_j[1]) ? 1.0 : 0.0;
        f[5] = near_boundary(labels, c_j.location, parts_j[1]) ? 1.0 : 0.0;
    }

    const int edge = skeleton_edge_index(c_i.joint_type, c_j.joint_type);
    if (edge >= 0) {  // far-apart joint pairs keep these truncated to 0
        const int part = assoc.edge_part[edge];
        f[6] = line_inside_proportion(labels, c_i.location, c_j.location, part);
        f[7] = oriented_rect_iou(labels, stats, c_i.location, c_j.location, part);
    }
    return f;
}

std::array<double, 8> segment_features(const PartLabelMap& labels,
                                       const JointPartAssociation& assoc,
                                       const JointProposal& c_i,
                                       const JointProposal& c_j) {
    return segment_features(labels, PartRegionStats::from(labels), assoc, c_i, c_j);
}

PairFeature make_pair_feature(const ZoomedRegion& region, const PartLabelMap& labels,
                              const PartRegionStats& stats,
                              const JointPartAssociation& assoc,
                              const JointProposal& c_i, const JointProposal& c_j) {
    PairFeature f{};
    if (c_i.joint_type == c_j.joint_type) {
        f[0] = (c_j.location - c_i.location).norm();
        return f;
    }
    const auto fn = neighbor_features(region, c_i, c_j);
    const auto fs = segment_features(labels, stats, assoc, c_i, c_j);
    std::copy(fn.begin(), fn.end(), f.begin());
    std::copy(fs.begin(), fs.end(), f.begin() + 4);
    return f;
}

int LogisticModel::pair_key(int type_a, int type_b) {
    return std::min(type_a, type_b) * kNumJoints + std::max(type_a, type_b);
}

namespace {

double unit_logit(const LogisticModel::Unit& u, const PairFeature& f) {
    double z = u.b;
    for (int i = 0; i < kPairFeatureDim; ++i) z += u.w[i] * f[i];
    return z;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double pair_probability(const LogisticModel& model, const PairFeature& f, int type_i,
                        int type_j) {
    const LogisticModel::Unit* unit = nullptr;
    if (type_i == type_j) {
        unit = &model.same_type;
    } else {
        const auto it = model.pairs.find(LogisticModel::pair_key(type_i, type_j));
        unit = it != model.pairs.end() ? &it->second : &model.pooled;
    }
    return sigmoid(unit_logit(*unit, f));
}

double logistic_loss(const LogisticModel::Unit& unit,
                     const std::vector<const TrainSample*>& samples, double l2) {
    double loss = 0.0;
    for (const auto* s : samples) {
        const double z = unit_logit(unit, s->f);
        // numerically stable -log p(y|z)
        const double y = s->same_person ? 1.0 : 0.0;
        loss += std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::fabs(z)));
    }
    loss /= static_cast<double>(samples.size());
    double w2 = 0.0;
    for (double w : unit.w) w2 += w * w;
    return loss + 0.5 * l2 * w2;
}

namespace {

LogisticModel::Unit train_unit(const std::vector<const TrainSample*>& samples,
                               const TrainConfig& cfg) {
    LogisticModel::Unit unit;
    if (samples.empty()) return unit;
    double step = cfg.step;
    if (step <= 0.0) {
        // 1 / (smoothness bound) keeps full-batch descent monotone
        double max_f2 = 0.0;
        for (const auto* s : samples) {
            double f2 = 0.0;
            for (double v : s->f) f2 += v * v;
            max_f2 = std::max(max_f2, f2);
        }
        step = 1.0 / (0.25 * (max_f2 + 1.0) + cfg.l2);
    }
    const double inv_n = 1.0 / static_cast<double>(samples.size());
    for (int it = 0; it < cfg.iterations; ++it) {
        std::array<double, kPairFeatureDim> gw{};
        double gb = 0.0;
        for (const auto* s : samples) {
            const double err = sigmoid(unit_logit(unit, s->f)) - (s->same_person ? 1.0 : 0.0);
            for (int i = 0; i < kPairFeatureDim; ++i) gw[i] += err * s->f[i];
            gb += err;
        }
        for (int i = 0; i < kPairFeatureDim; ++i)
            unit.w[i] -= step * (gw[i] * inv_n + cfg.l2 * unit.w[i]);
        unit.b -= step * gb * inv_n;
    }
    return unit;
}

}  // namespace

LogisticModel train_logistic(const std::vector<TrainSample>& samples,
                             const TrainConfig& cfg) {
    if (samples.empty()) throw InputError("train_logistic: empty sample set");

    std::map<int, std::vector<const TrainSample*>> per_pair;
    std::vector<const TrainSample*> typed;
    std::vector<const TrainSample*> same_type;
    for (const auto& s : samples) {
        if (s.type_a == s.type_b) {
            same_type.push_back(&s);
        } else {
            typed.push_back(&s);
            per_pair[LogisticModel::pair_key(s.type_a, s.type_b)].push_back(&s);
        }
    }

    LogisticModel model;
    model.train_iterations = cfg.iterations;
    model.train_step = cfg.step;
    model.train_seed = cfg.seed;

    if (!typed.empty()) model.pooled = train_unit(typed, cfg);
    for (const auto& [key, group] : per_pair) {
        bool has_pos = false;
        bool has_neg = false;
        for (const auto* s : group) (s->same_person ? has_pos : has_neg) = true;
        if (group.size() >= 2 && has_pos && has_neg)
            model.pairs[key] = train_unit(group, cfg);
        // else: pooled fallback at lookup time
    }
    if (!same_type.empty()) {
        model.same_type = train_unit(same_type, cfg);
    } else {
        // mild default repulsion between duplicate candidates
        model.same_type.b = std::log(0.3 / 0.7);
    }
    return model;
}

std::string model_to_json(const LogisticModel& model) {
    nlohmann::json j;
    auto unit_json = [](const LogisticModel::Unit& u) {
        nlohmann::json uj;
        uj["w"] = u.w;
        uj["b"] = u.b;
        return uj;
    };
    j["pairs"] = nlohmann::json::object();
    for (const auto& [key, unit] : model.pairs) {
        const int a = key / kNumJoints;
        const int b = key % kNumJoints;
        j["pairs"][std::to_string(a) + "-" + std::to_string(b)] = unit_json(unit);
    }
    j["pooled"] = unit_json(model.pooled);
    j["same_type"] = unit_json(model.same_type);
    j["meta"] = {{"iterations", model.train_iterations},
                 {"step", model.train_step},
                 {"seed", model.train_seed}};
    return j.dump(2);
}

LogisticModel model_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        auto unit_from = [](const nlohmann::json& uj) {
            LogisticModel::Unit u;
            const auto& w = uj.at("w");
            if (w.size() != kPairFeatureDim)
                throw InputError("model JSON: weight vector must have 12 entries");
            for (int i = 0; i < kPairFeatureDim; ++i) u.w[i] = w.at(i).get<double>();
            u.b = uj.at("b").get<double>();
            return u;
        };
        LogisticModel model;
        for (const auto& [name, uj] : j.at("pairs").items()) {
            const auto dash = name.find('-');
            const int a = std::stoi(name.substr(0, dash));
            const int b = std::stoi(name.substr(dash + 1));
            if (a < 0 || b < 0 || a >= kNumJoints || b >= kNumJoints || a >= b)
                throw InputError("model JSON: bad pair key " + name);
            model.pairs[LogisticModel::pair_key(a, b)] = unit_from(uj);
        }
        model.pooled = unit_from(j.at("pooled"));
        if (j.contains("same_type")) model.same_type = unit_from(j.at("same_type"));
        if (j.contains("meta")) {
            model.train_iterations = j["meta"].value("iterations", 0);
            model.train_step = j["meta"].value("step", 0.0);
            model.train_seed = j["meta"].value("seed", uint64_t{0});
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("model JSON: ") + e.what());
    }
}

}  // namespace pw
