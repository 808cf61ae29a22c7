#ifndef PW_PAIRWISE_HPP
#define PW_PAIRWISE_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pw/proposals.hpp"
#include "pw/skeleton.hpp"
#include "pw/tensor.hpp"

namespace pw {

inline constexpr int kPairFeatureDim = 12;

using PairFeature = std::array<double, kPairFeatureDim>;

// Geometric agreement between observed and predicted inter-joint vectors:
// [|v_ji - v'_ji|, |v_ij - v'_ij|, angle(v_ji, v'_ji), angle(v_ij, v'_ij)].
std::array<double, 4> neighbor_features(const ZoomedRegion& region,
                                        const JointProposal& c_i,
                                        const JointProposal& c_j);

// Per-part pixel counts of a label map, reused across many feature calls.
struct PartRegionStats {
    std::array<long, kNumParts> counts{};
    static PartRegionStats from(const PartLabelMap& labels);
};

// Segment-joint consistency features: inside/boundary indicators for both
// endpoints, line-inside proportion and oriented-rectangle IOU. The last two
// are identically 0 for joint-type pairs that are not skeleton edges.
std::array<double, 8> segment_features(const PartLabelMap& labels,
                                       const PartRegionStats& stats,
                                       const JointPartAssociation& assoc,
                                       const JointProposal& c_i,
                                       const JointProposal& c_j);
std::array<double, 8> segment_features(const PartLabelMap& labels,
                                       const JointPartAssociation& assoc,
                                       const JointProposal& c_i,
                                       const JointProposal& c_j);

// Full 12-d feature. Same-type pairs get the fixed [distance, 0, ...] form
// consumed by the dedicated same-type model.
PairFeature make_pair_feature(const ZoomedRegion& region, const PartLabelMap& labels,
                              const PartRegionStats& stats,
                              const JointPartAssociation& assoc,
                              const JointProposal& c_i, const JointProposal& c_j);

struct LogisticModel {
    struct Unit {
        std::array<double, kPairFeatureDim> w{};
        double b = 0.0;
    };
    // key = min_type * 14 + max_type, distinct-type pairs only
    std::map<int, Unit> pairs;
    Unit pooled;
    Unit same_type;
    int train_iterations = 0;
    double train_step = 0.0;
    uint64_t train_seed = 0;

    static int pair_key(int type_a, int type_b);
};

// P(same person) for a proposal pair; falls back to the pooled unit when the
// type pair has no dedicated weights.
double pair_probability(const LogisticModel& model, const PairFeature& f, int type_i,
                        int type_j);

struct TrainSample {
    PairFeature f{};
    int type_a = 0;
    int type_b = 0;
    bool same_person = false;
};

struct TrainConfig {
    int iterations = 2000;
    // <= 0 selects a step from the corpus that keeps full-batch gradient
    // descent monotone (1 / smoothness bound)
    double step = 0.0;
    double l2 = 1e-4;
    uint64_t seed = 0;
};

LogisticModel train_logistic(const std::vector<TrainSample>& samples,
                             const TrainConfig& cfg = {});

// Mean cross-entropy with L2 penalty, exposed for convergence checks.
double logistic_loss(const LogisticModel::Unit& unit,
                     const std::vector<const TrainSample*>& samples, double l2);

std::string model_to_json(const LogisticModel& model);
LogisticModel model_from_json(const std::string& text);

}  // namespace pw

#endif
