#ifndef PW_SYNTH_HPP
#define PW_SYNTH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pw/geometry.hpp"
#include "pw/skeleton.hpp"
#include "pw/tensor.hpp"

namespace pw {

// Articulated generator for ground-truth people. Each edge grows a child
// joint from its parent at a sampled length and angle; angles are absolute
// image angles (x right, y down) unless relative_to_parent, in which case
// they bend relative to the parent edge direction.
struct SkeletonModel {
    struct Edge {
        int parent;
        int child;
        float len_mean;
        float len_sd;
        float ang_base;
        float ang_range;
        bool relative_to_parent;
    };
    std::array<Edge, kNumSkeletonEdges> edges;

    static SkeletonModel standard();
};

struct GroundTruthPerson {
    std::array<Vec2, kNumJoints> joints;
    std::array<bool, kNumJoints> visible;
    PartLabelMap part_mask;  // canvas-sized, this person only, pre-occlusion
    RectF bbox;              // tight over part_mask
    int depth_rank = 0;
};

struct Scene {
    int height = 0;
    int width = 0;
    std::vector<GroundTruthPerson> people;
    uint64_t seed = 0;

    // Painter's composite over depth_rank; later people occlude.
    PartLabelMap composite_parts() const;
    // 0 = no person, i+1 = person i visible on top.
    PartLabelMap instance_map() const;
};

// Score-map corruption parameters. Blob sigma/peak shape the clean joint
// signal; the remaining fields are pure noise and default to zero.
struct NoiseSpec {
    float joint_blob_sigma = 1.5f;
    float joint_score_peak = 0.9f;
    float background_noise_sd = 0.f;
    float offset_noise_sd = 0.f;
    float part_flip_rate = 0.f;
    float false_peak_rate = 0.f;

    void validate() const;
};

Scene sample_scene(const SkeletonModel& model, int n_people, int height, int width,
                   uint64_t seed);

ScoreMapSet render_score_maps(const Scene& scene, const NoiseSpec& noise, uint64_t seed);

std::string scene_to_json(const Scene& scene);
// Masks are not stored in the JSON; people loaded this way carry an empty
// part_mask. bbox comes from the file when present, else from visible joints.
Scene scene_from_json(const std::string& text);

}  // namespace pw

#endif
