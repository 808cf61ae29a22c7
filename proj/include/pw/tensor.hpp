#ifndef PW_TENSOR_HPP
#define PW_TENSOR_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pw/geometry.hpp"

namespace pw {

// Bad user-supplied input (malformed files, out-of-range config values).
// Distinct from std::runtime_error so the CLI can map it to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense H x W x C float grid, row-major (row, column, channel).
struct Tensor3 {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    Tensor3() = default;
    Tensor3(int h, int w, int c, float fill = 0.f)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {}

    size_t index(int y, int x, int c) const {
        return (static_cast<size_t>(y) * width + x) * channels + c;
    }
    float& at(int y, int x, int c) { return data[index(y, x, c)]; }
    float at(int y, int x, int c) const { return data[index(y, x, c)]; }

    bool operator==(const Tensor3& o) const {
        return height == o.height && width == o.width && channels == o.channels &&
               data == o.data;
    }
};

// Per-pixel part label, 0 = background, 1..6 = semantic parts.
struct PartLabelMap {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> labels;

    PartLabelMap() = default;
    PartLabelMap(int h, int w, uint8_t fill = 0)
        : height(h), width(w), labels(static_cast<size_t>(h) * w, fill) {}

    uint8_t& at(int y, int x) { return labels[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return labels[static_cast<size_t>(y) * width + x]; }

    bool operator==(const PartLabelMap& o) const {
        return height == o.height && width == o.width && labels == o.labels;
    }
};

inline constexpr int kNumJoints = 14;
inline constexpr int kNumParts = 7;  // background + 6 parts
inline constexpr int kNeighborChannels = kNumJoints * (kNumJoints - 1) * 2;  // 364

// Channel of the (dx, dy) offset predicted at a pixel of source type `src`
// toward target type `dst`. Targets are laid out in canonical joint order
// with the source itself skipped; axis 0 = dx, 1 = dy.
inline int neighbor_channel(int src, int dst, int axis) {
    const int slot = dst < src ? dst : dst - 1;
    return src * (kNumJoints - 1) * 2 + slot * 2 + axis;
}

// The three per-region score maps the pipeline consumes.
struct ScoreMapSet {
    Tensor3 joints;     // H x W x 14
    Tensor3 neighbors;  // H x W x 364
    Tensor3 parts;      // H x W x 7
};

void save_tensor(const Tensor3& t, std::ostream& out);
Tensor3 load_tensor(std::istream& in);
void save_tensor_file(const Tensor3& t, const std::string& path);
Tensor3 load_tensor_file(const std::string& path);

Tensor3 tensor_from_labels(const PartLabelMap& m);
PartLabelMap labels_from_tensor(const Tensor3& t);

// Per pixel, the lowest channel index attaining the maximum value.
PartLabelMap argmax_channel(const Tensor3& t);

// Bilinear resample of `box` to (out_h, out_w); samples outside the source
// clamp to the nearest valid pixel.
Tensor3 crop_resize(const Tensor3& t, const RectF& box, int out_h, int out_w);

}  // namespace pw

#endif
