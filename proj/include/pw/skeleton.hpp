#ifndef PW_SKELETON_HPP
#define PW_SKELETON_HPP

#include <array>
#include <string>

namespace pw {

// Canonical joint indices, frozen project-wide.
enum Joint : int {
    kForehead = 0,
    kNeck,
    kLShoulder,
    kRShoulder,
    kLElbow,
    kRElbow,
    kLWrist,
    kRWrist,
    kLWaist,
    kRWaist,
    kLKnee,
    kRKnee,
    kLAnkle,
    kRAnkle,
};

// Part labels; 0 is background.
enum Part : int {
    kBackground = 0,
    kHead,
    kTorso,
    kUpperArm,
    kLowerArm,
    kUpperLeg,
    kLowerLeg,
};

inline constexpr int kNumSkeletonEdges = 13;

inline constexpr std::array<std::array<int, 2>, kNumSkeletonEdges> kSkeletonEdges = {{
    {kForehead, kNeck},
    {kNeck, kLShoulder},
    {kNeck, kRShoulder},
    {kLShoulder, kLElbow},
    {kRShoulder, kRElbow},
    {kLElbow, kLWrist},
    {kRElbow, kRWrist},
    {kNeck, kLWaist},
    {kNeck, kRWaist},
    {kLWaist, kLKnee},
    {kRWaist, kRKnee},
    {kLKnee, kLAnkle},
    {kRKnee, kRAnkle},
}};

const std::array<std::string, 14>& joint_names();
const std::array<std::string, 7>& part_names();
int joint_index_from_name(const std::string& name);  // -1 if unknown

// Index into kSkeletonEdges for an unordered joint-type pair, or -1 if the
// pair is not a skeleton edge.
int skeleton_edge_index(int joint_a, int joint_b);

// Per joint type one or two associated semantic parts; per skeleton edge
// exactly one associated part.
struct JointPartAssociation {
    // second entry is kBackground when the joint has a single association
    std::array<std::array<int, 2>, 14> joint_parts;
    std::array<int, kNumSkeletonEdges> edge_part;

    static const JointPartAssociation& standard();
};

}  // namespace pw

#endif
