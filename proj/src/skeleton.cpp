#include "pw/skeleton.hpp"

namespace pw {

const std::array<std::string, 14>& joint_names() {
    static const std::array<std::string, 14> names = {
        "forehead", "neck",    "l_shoulder", "r_shoulder", "l_elbow",
        "r_elbow",  "l_wrist", "r_wrist",    "l_waist",    "r_waist",
        "l_knee",   "r_knee",  "l_ankle",    "r_ankle"};
    return names;
}

const std::array<std::string, 7>& part_names() {
    static const std::array<std::string, 7> names = {
        "background", "head", "torso", "upper_arm", "lower_arm", "upper_leg", "lower_leg"};
    return names;
}

int joint_index_from_name(const std::string& name) {
    const auto& names = joint_names();
    for (int i = 0; i < 14; ++i)
        if (names[i] == name) return i;
    return -1;
}

int skeleton_edge_index(int joint_a, int joint_b) {
    for (int e = 0; e < kNumSkeletonEdges; ++e) {
        const auto& edge = kSkeletonEdges[e];
        if ((edge[0] == joint_a && edge[1] == joint_b) ||
            (edge[0] == joint_b && edge[1] == joint_a))
            return e;
    }
    return -1;
}

const JointPartAssociation& JointPartAssociation::standard() {
    static const JointPartAssociation assoc = [] {
        JointPartAssociation a{};
        a.joint_parts[kForehead] = {kHead, kBackground};
        a.joint_parts[kNeck] = {kHead, kTorso};
        a.joint_parts[kLShoulder] = {kTorso, kUpperArm};
        a.joint_parts[kRShoulder] = {kTorso, kUpperArm};
        a.joint_parts[kLElbow] = {kUpperArm, kLowerArm};
        a.joint_parts[kRElbow] = {kUpperArm, kLowerArm};
        a.joint_parts[kLWrist] = {kLowerArm, kBackground};
        a.joint_parts[kRWrist] = {kLowerArm, kBackground};
        a.joint_parts[kLWaist] = {kTorso, kUpperLeg};
        a.joint_parts[kRWaist] = {kTorso, kUpperLeg};
        a.joint_parts[kLKnee] = {kUpperLeg, kLowerLeg};
        a.joint_parts[kRKnee] = {kUpperLeg, kLowerLeg};
        a.joint_parts[kLAnkle] = {kLowerLeg, kBackground};
        a.joint_parts[kRAnkle] = {kLowerLeg, kBackground};

        a.edge_part[skeleton_edge_index(kForehead, kNeck)] = kHead;
        a.edge_part[skeleton_edge_index(kNeck, kLShoulder)] = kTorso;
        a.edge_part[skeleton_edge_index(kNeck, kRShoulder)] = kTorso;
        a.edge_part[skeleton_edge_index(kLShoulder, kLElbow)] = kUpperArm;
        a.edge_part[skeleton_edge_index(kRShoulder, kRElbow)] = kUpperArm;
        a.edge_part[skeleton_edge_index(kLElbow, kLWrist)] = kLowerArm;
        a.edge_part[skeleton_edge_index(kRElbow, kRWrist)] = kLowerArm;
        a.edge_part[skeleton_edge_index(kNeck, kLWaist)] = kTorso;
        a.edge_part[skeleton_edge_index(kNeck, kRWaist)] = kTorso;
        a.edge_part[skeleton_edge_index(kLWaist, kLKnee)] = kUpperLeg;
        a.edge_part[skeleton_edge_index(kRWaist, kRKnee)] = kUpperLeg;
        a.edge_part[skeleton_edge_index(kLKnee, kLAnkle)] = kLowerLeg;
        a.edge_part[skeleton_edge_index(kRKnee, kRAnkle)] = kLowerLeg;
        return a;
    }();
    return assoc;
}

}  // namespace pw
