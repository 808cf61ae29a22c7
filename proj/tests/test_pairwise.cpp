#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pw/pairwise.hpp"

namespace {

constexpr float kPi = 3.14159265358979f;

// region whose neighbor map predicts a fixed offset everywhere
pw::ZoomedRegion offset_region(int h, int w) {
    pw::ZoomedRegion region;
    region.maps.joints = pw::Tensor3(h, w, pw::kNumJoints);
    region.maps.neighbors = pw::Tensor3(h, w, pw::kNeighborChannels);
    region.maps.parts = pw::Tensor3(h, w, pw::kNumParts);
    return region;
}

void set_offset(pw::ZoomedRegion& region, int src, int dst, pw::Vec2 off) {
    auto& n = region.maps.neighbors;
    for (int y = 0; y < n.height; ++y)
        for (int x = 0; x < n.width; ++x) {
            n.at(y, x, pw::neighbor_channel(src, dst, 0)) = off.x;
            n.at(y, x, pw::neighbor_channel(src, dst, 1)) = off.y;
        }
}

pw::JointProposal prop(float x, float y, int type) { return {{x, y}, type, 0.9f}; }

}  // namespace

TEST_CASE("neighbor features vanish when predictions are exact") {
    auto region = offset_region(32, 32);
    const auto c_i = prop(10.f, 10.f, pw::kForehead);
    const auto c_j = prop(13.f, 14.f, pw::kNeck);  // v_ij = (3,4)
    set_offset(region, pw::kForehead, pw::kNeck, {3.f, 4.f});
    set_offset(region, pw::kNeck, pw::kForehead, {-3.f, -4.f});
    const auto f = pw::neighbor_features(region, c_i, c_j);
    for (double v : f) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("neighbor features: orthogonal prediction gives angle pi/2") {
    auto region = offset_region(32, 32);
    const auto c_i = prop(10.f, 10.f, pw::kForehead);
    const auto c_j = prop(11.f, 10.f, pw::kNeck);  // v_ij = (1,0)
    set_offset(region, pw::kForehead, pw::kNeck, {0.f, 1.f});
    set_offset(region, pw::kNeck, pw::kForehead, {0.f, -1.f});
    const auto f = pw::neighbor_features(region, c_i, c_j);
    CHECK(f[1] == doctest::Approx(std::sqrt(2.0)));
    CHECK(f[3] == doctest::Approx(kPi / 2.f));
}

TEST_CASE("neighbor features: antipodal prediction gives angle pi") {
    auto region = offset_region(32, 32);
    const auto c_i = prop(10.f, 10.f, pw::kForehead);
    const auto c_j = prop(14.f, 10.f, pw::kNeck);  // v_ij = (4,0)
    set_offset(region, pw::kForehead, pw::kNeck, {-4.f, 0.f});
    set_offset(region, pw::kNeck, pw::kForehead, {4.f, 0.f});
    const auto f = pw::neighbor_features(region, c_i, c_j);
    CHECK(f[2] == doctest::Approx(kPi));
    CHECK(f[3] == doctest::Approx(kPi));
}

TEST_CASE("neighbor features swap slots when the pair swaps") {
    auto region = offset_region(32, 32);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<float> u(-6.f, 6.f);
    set_offset(region, pw::kForehead, pw::kNeck, {u(rng), u(rng)});
    set_offset(region, pw::kNeck, pw::kForehead, {u(rng), u(rng)});
    const auto c_i = prop(12.f, 9.f, pw::kForehead);
    const auto c_j = prop(17.f, 20.f, pw::kNeck);
    const auto f = pw::neighbor_features(region, c_i, c_j);
    const auto g = pw::neighbor_features(region, c_j, c_i);
    CHECK(f[0] == doctest::Approx(g[1]));
    CHECK(f[1] == doctest::Approx(g[0]));
    CHECK(f[2] == doctest::Approx(g[3]));
    CHECK(f[3] == doctest::Approx(g[2]));
}

TEST_CASE("neighbor features reject same-type and out-of-bounds input") {
    auto region = offset_region(16, 16);
    CHECK_THROWS(pw::neighbor_features(region, prop(1.f, 1.f, 0), prop(2.f, 2.f, 0)));
    CHECK_THROWS(pw::neighbor_features(region, prop(-5.f, 1.f, 0), prop(2.f, 2.f, 1)));
}

TEST_CASE("segment features: interior head point scores inside without boundary") {
    pw::PartLabelMap labels(40, 40);
    for (int y = 5; y <= 25; ++y)
        for (int x = 5; x <= 25; ++x) labels.at(y, x) = pw::kHead;
    const auto& assoc = pw::JointPartAssociation::standard();
    const auto f = pw::segment_features(labels, assoc, prop(15.f, 15.f, pw::kForehead),
                                        prop(35.f, 35.f, pw::kNeck));
    CHECK(f[0] == 1.0);  // inside
    CHECK(f[1] == 0.0);  // more than 3 px from the region edge
}

TEST_CASE("segment features: line-inside proportion counts lattice pixels") {
    // 9-pixel vertical line, rows 0..4 labeled head -> 5/9
    pw::PartLabelMap labels(16, 16);
    for (int y = 0; y <= 4; ++y)
        for (int x = 0; x < 16; ++x) labels.at(y, x) = pw::kHead;
    const auto& assoc = pw::JointPartAssociation::standard();
    const auto f = pw::segment_features(labels, assoc, prop(0.f, 0.f, pw::kForehead),
                                        prop(0.f, 8.f, pw::kNeck));
    CHECK(f[6] == doctest::Approx(5.0 / 9.0));
}

TEST_CASE("segment features: oriented rectangle IOU against its exact footprint") {
    // segment (0,5)->(10,5): rectangle 11 x 5 pixels centered on the segment
    pw::PartLabelMap labels(16, 16);
    for (int y = 3; y <= 7; ++y)
        for (int x = 0; x <= 10; ++x) labels.at(y, x) = pw::kHead;
    const auto& assoc = pw::JointPartAssociation::standard();
    const auto f = pw::segment_features(labels, assoc, prop(0.f, 5.f, pw::kForehead),
                                        prop(10.f, 5.f, pw::kNeck));
    CHECK(f[7] == doctest::Approx(1.0));

    const pw::PartLabelMap empty(16, 16);
    const auto g = pw::segment_features(empty, assoc, prop(0.f, 5.f, pw::kForehead),
                                        prop(10.f, 5.f, pw::kNeck));
    CHECK(g[7] == 0.0);
}

TEST_CASE("segment features truncate line/IOU slots for non-edge pairs") {
    pw::PartLabelMap labels(20, 20);
    for (auto& l : labels.labels) l = pw::kTorso;
    const auto& assoc = pw::JointPartAssociation::standard();
    // forehead-wrist is not a skeleton edge
    const auto f = pw::segment_features(labels, assoc, prop(2.f, 2.f, pw::kForehead),
                                        prop(12.f, 12.f, pw::kLWrist));
    CHECK(f[6] == 0.0);
    CHECK(f[7] == 0.0);
}

TEST_CASE("second-association slots zero-fill for single-part joints") {
    pw::PartLabelMap labels(20, 20);
    for (auto& l : labels.labels) l = pw::kLowerArm;
    const auto& assoc = pw::JointPartAssociation::standard();
    // wrists associate with lower-arm only
    const auto f = pw::segment_features(labels, assoc, prop(2.f, 2.f, pw::kForehead),
                                        prop(12.f, 12.f, pw::kLWrist));
    CHECK(f[2] == 1.0);
    CHECK(f[4] == 0.0);
    CHECK(f[5] == 0.0);
}

TEST_CASE("same-type pair features collapse to the distance slot") {
    auto region = offset_region(32, 32);
    const pw::PartLabelMap labels(32, 32);
    const auto stats = pw::PartRegionStats::from(labels);
    const auto& assoc = pw::JointPartAssociation::standard();
    const auto f = pw::make_pair_feature(region, labels, stats, assoc,
                                         prop(0.f, 0.f, 3), prop(3.f, 4.f, 3));
    CHECK(f[0] == doctest::Approx(5.0));
    for (int i = 1; i < pw::kPairFeatureDim; ++i) CHECK(f[i] == 0.0);
}

TEST_CASE("pair probability: zero weights give even odds, logit ln 9 gives 0.9") {
    pw::LogisticModel model;  // all-zero units
    pw::PairFeature f{};
    CHECK(pw::pair_probability(model, f, 0, 1) == doctest::Approx(0.5));

    model.pooled.b = std::log(9.0);
    CHECK(pw::pair_probability(model, f, 0, 1) == doctest::Approx(0.9));

    model.pooled.w[0] = -1.0;
    f[0] = 50.0;  // strongly negative logit
    CHECK(pw::pair_probability(model, f, 0, 1) < 1e-10);
}

TEST_CASE("training separates a linearly separable corpus") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 0.3);
    std::vector<pw::TrainSample> samples;
    for (int i = 0; i < 200; ++i) {
        pw::TrainSample s;
        s.type_a = pw::kForehead;
        s.type_b = pw::kNeck;
        s.same_person = i % 2 == 0;
        s.f[0] = (s.same_person ? 1.0 : 4.0) + n(rng);
        s.f[2] = (s.same_person ? 0.2 : 2.0) + n(rng);
        samples.push_back(s);
    }
    const pw::LogisticModel model = pw::train_logistic(samples);
    int correct = 0;
    for (const auto& s : samples) {
        const double p = pw::pair_probability(model, s.f, s.type_a, s.type_b);
        if ((p > 0.5) == s.same_person) ++correct;
    }
    CHECK(correct >= 190);  // >= 95% training accuracy
}

TEST_CASE("training loss is non-increasing under the automatic step") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<pw::TrainSample> samples;
    for (int i = 0; i < 60; ++i) {
        pw::TrainSample s;
        s.type_a = 0;
        s.type_b = 1;
        s.same_person = i % 3 == 0;
        for (auto& v : s.f) v = n(rng);
        samples.push_back(s);
    }
    std::vector<const pw::TrainSample*> ptrs;
    for (const auto& s : samples) ptrs.push_back(&s);

    pw::TrainConfig cfg;
    double prev = std::numeric_limits<double>::max();
    for (int iters : {1, 5, 25, 125, 625}) {
        cfg.iterations = iters;
        const pw::LogisticModel m = pw::train_logistic(samples, cfg);
        const auto it = m.pairs.find(pw::LogisticModel::pair_key(0, 1));
        REQUIRE(it != m.pairs.end());
        const double loss = pw::logistic_loss(it->second, ptrs, cfg.l2);
        CHECK(loss <= prev + 1e-12);
        prev = loss;
    }
}

TEST_CASE("single-class pairs fall back to the pooled unit") {
    std::vector<pw::TrainSample> samples;
    for (int i = 0; i < 10; ++i) {
        pw::TrainSample s;
        s.type_a = 0;
        s.type_b = 1;
        s.same_person = true;  // no negatives for this pair
        s.f[0] = 1.0 + i;
        samples.push_back(s);
        s.type_a = 2;
        s.type_b = 3;
        s.same_person = i % 2 == 0;
        samples.push_back(s);
    }
    const pw::LogisticModel model = pw::train_logistic(samples);
    CHECK(model.pairs.find(pw::LogisticModel::pair_key(0, 1)) == model.pairs.end());
    CHECK(model.pairs.find(pw::LogisticModel::pair_key(2, 3)) != model.pairs.end());
}

TEST_CASE("training is deterministic") {
    std::vector<pw::TrainSample> samples;
    for (int i = 0; i < 30; ++i) {
        pw::TrainSample s;
        s.type_a = 4;
        s.type_b = 6;
        s.same_person = i % 2 == 0;
        s.f[0] = 0.1 * i;
        s.f[5] = s.same_person ? 1.0 : 0.0;
        samples.push_back(s);
    }
    const std::string a = pw::model_to_json(pw::train_logistic(samples));
    const std::string b = pw::model_to_json(pw::train_logistic(samples));
    CHECK(a == b);
    CHECK_THROWS_AS(pw::train_logistic({}), pw::InputError);
}

TEST_CASE("model JSON roundtrip") {
    std::vector<pw::TrainSample> samples;
    for (int i = 0; i < 20; ++i) {
        pw::TrainSample s;
        s.type_a = i % 2 == 0 ? 0 : 2;
        s.type_b = i % 2 == 0 ? 1 : 2;  // includes same-type samples
        s.same_person = i % 4 < 2;
        s.f[0] = i * 0.5;
        samples.push_back(s);
    }
    const pw::LogisticModel model = pw::train_logistic(samples);
    const pw::LogisticModel back = pw::model_from_json(pw::model_to_json(model));
    CHECK(back.pooled.b == doctest::Approx(model.pooled.b));
    CHECK(back.same_type.w[0] == doctest::Approx(model.same_type.w[0]));
    CHECK(back.pairs.size() == model.pairs.size());
    CHECK_THROWS_AS(pw::model_from_json("{}"), pw::InputError);
}
