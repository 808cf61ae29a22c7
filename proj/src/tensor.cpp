#include "pw/tensor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

namespace pw {

namespace {

constexpr char kMagic[4] = {'P', 'W', 'T', '1'};

void write_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& in, const char* field) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw InputError(std::string("tensor file truncated reading ") + field);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void save_tensor(const Tensor3& t, std::ostream& out) {
    if (t.height < 1 || t.width < 1 || t.channels < 1 ||
        t.data.size() != static_cast<size_t>(t.height) * t.width * t.channels)
        throw std::invalid_argument("save_tensor: invalid tensor dimensions");
    out.write(kMagic, 4);
    write_u32(out, static_cast<uint32_t>(t.height));
    write_u32(out, static_cast<uint32_t>(t.width));
    write_u32(out, static_cast<uint32_t>(t.channels));
    // IEEE-754 float little-endian; this targets little-endian hosts.
    for (float v : t.data) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        write_u32(out, bits);
    }
    if (!out) throw std::runtime_error("save_tensor: write failure");
}

Tensor3 load_tensor(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw InputError("tensor file: bad magic, expected PWT1");
    const uint32_t h = read_u32(in, "height");
    const uint32_t w = read_u32(in, "width");
    const uint32_t c = read_u32(in, "channels");
    if (h < 1 || w < 1 || c < 1)
        throw InputError("tensor file: zero dimension in header");
    Tensor3 t(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    for (size_t i = 0; i < t.data.size(); ++i) {
        const uint32_t bits = read_u32(in, "payload");
        float v;
        std::memcpy(&v, &bits, 4);
        if (!std::isfinite(v))
            throw InputError("tensor file: non-finite value in payload");
        t.data[i] = v;
    }
    return t;
}

void save_tensor_file(const Tensor3& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save_tensor(t, out);
}

Tensor3 load_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open tensor file: " + path);
    return load_tensor(in);
}

Tensor3 tensor_from_labels(const PartLabelMap& m) {
    Tensor3 t(m.height, m.width, 1);
    for (size_t i = 0; i < m.labels.size(); ++i)
        t.data[i] = static_cast<float>(m.labels[i]);
    return t;
}

PartLabelMap labels_from_tensor(const Tensor3& t) {
    if (t.channels != 1)
        throw InputError("label tensor must have a single channel");
    PartLabelMap m(t.height, t.width);
    for (size_t i = 0; i < t.data.size(); ++i) {
        const float v = t.data[i];
        if (v < 0.f || v > 6.f || v != std::floor(v))
            throw InputError("label tensor: value outside {0..6}");
        m.labels[i] = static_cast<uint8_t>(v);
    }
    return m;
}

PartLabelMap argmax_channel(const Tensor3& t) {
    PartLabelMap m(t.height, t.width);
    for (int y = 0; y < t.height; ++y) {
        for (int x = 0; x < t.width; ++x) {
            int best = 0;
            float best_v = t.at(y, x, 0);
            for (int c = 1; c < t.channels; ++c) {
                const float v = t.at(y, x, c);
                if (v > best_v) {
                    best_v = v;
                    best = c;
                }
            }
            m.at(y, x) = static_cast<uint8_t>(best);
        }
    }
    return m;
}

namespace {

float sample_bilinear(const Tensor3& t, float y, float x, int c) {
    y = std::clamp(y, 0.f, static_cast<float>(t.height - 1));
    x = std::clamp(x, 0.f, static_cast<float>(t.width - 1));
    const int y0 = static_cast<int>(std::floor(y));
    const int x0 = static_cast<int>(std::floor(x));
    const int y1 = std::min(y0 + 1, t.height - 1);
    const int x1 = std::min(x0 + 1, t.width - 1);
    const float fy = y - static_cast<float>(y0);
    const float fx = x - static_cast<float>(x0);
    const float top = t.at(y0, x0, c) * (1.f - fx) + t.at(y0, x1, c) * fx;
    const float bot = t.at(y1, x0, c) * (1.f - fx) + t.at(y1, x1, c) * fx;
    return top * (1.f - fy) + bot * fy;
}

}  // namespace

Tensor3 crop_resize(const Tensor3& t, const RectF& box, int out_h, int out_w) {
    if (box.w <= 0.f || box.h <= 0.f)
        throw std::invalid_argument("crop_resize: empty box");
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("crop_resize: output dims must be >= 1");
    if (box.x2() <= 0.f || box.y2() <= 0.f ||
        box.x >= static_cast<float>(t.width) || box.y >= static_cast<float>(t.height))
        throw std::invalid_argument("crop_resize: box does not intersect tensor");
    Tensor3 out(out_h, out_w, t.channels);
    // Sample grid spans [y, y+h-1] x [x, x+w-1] so a full-extent box at the
    // source resolution is the identity.
    const float sy = out_h > 1 ? (box.h - 1.f) / static_cast<float>(out_h - 1) : 0.f;
    const float sx = out_w > 1 ? (box.w - 1.f) / static_cast<float>(out_w - 1) : 0.f;
    const float oy = out_h > 1 ? box.y : box.y + (box.h - 1.f) * 0.5f;
    const float ox = out_w > 1 ? box.x : box.x + (box.w - 1.f) * 0.5f;
    for (int r = 0; r < out_h; ++r) {
        const float src_y = oy + sy * static_cast<float>(r);
        for (int col = 0; col < out_w; ++col) {
            const float src_x = ox + sx * static_cast<float>(col);
            for (int c = 0; c < t.channels; ++c)
                out.at(r, col, c) = sample_bilinear(t, src_y, src_x, c);
        }
    }
    return out;
}

}  // namespace pw
