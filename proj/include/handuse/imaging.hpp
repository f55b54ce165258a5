#pragma once

#include <optional>
#include <vector>

#include "handuse/core.hpp"

namespace handuse {

// Intensities in [0,1], row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    GrayImage() = default;
    GrayImage(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0) {}

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, double v) { values[static_cast<std::size_t>(y) * width + x] = v; }
};

struct HsvImage {
    int width = 0;
    int height = 0;
    std::vector<double> h;  // [0, 360); 0 when s == 0
    std::vector<double> s;  // [0, 1]
    std::vector<double> v;  // [0, 1]
};

// Per-pixel displacement in pixels/frame estimating prev -> curr motion.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> dx;
    std::vector<float> dy;

    FlowField() = default;
    FlowField(int w, int h)
        : width(w), height(h),
          dx(static_cast<std::size_t>(w) * h, 0.0f),
          dy(static_cast<std::size_t>(w) * h, 0.0f) {}
};

struct PointI {
    int x = 0;
    int y = 0;
};

// Outer boundary of one 8-connected component plus its filled pixel set.
struct Contour {
    std::vector<PointI> boundary;  // ordered closed chain
    std::vector<PointI> pixels;    // all component pixels
    double area = 0.0;             // pixel count
    double arc_length = 0.0;       // polygonal boundary length
};

// Skin probability per quantized RGB value. 5 bits per channel,
// index = (r>>3)<<10 | (g>>3)<<5 | (b>>3).
class SkinModel {
public:
    static constexpr int kTableSize = 32768;

    SkinModel() : lut_(kTableSize, 0.0) {}
    explicit SkinModel(std::vector<double> lut);

    // Posterior skin probability from the Jones & Rehg mixture-of-Gaussians
    // skin / non-skin colour models, with equal priors.
    static SkinModel builtin();
    // .csv -> one probability per line; anything else -> raw little-endian
    // float64 table of 32768 values.
    static SkinModel load(const std::string& path);

    void save_binary(const std::string& path) const;
    void save_csv(const std::string& path) const;

    double probability(std::uint8_t r, std::uint8_t g, std::uint8_t b) const {
        return lut_[static_cast<std::size_t>(r >> 3) << 10 |
                    static_cast<std::size_t>(g >> 3) << 5 |
                    static_cast<std::size_t>(b >> 3)];
    }
    const std::vector<double>& table() const { return lut_; }

private:
    std::vector<double> lut_;
};

GrayImage to_gray(const FrameImage& frame);
HsvImage rgb_to_hsv(const FrameImage& frame);

FrameImage crop_frame(const FrameImage& frame, const BoundingBox& box);
GrayImage resize_bilinear(const GrayImage& src, int out_w, int out_h);
double bilinear_sample(const GrayImage& img, double x, double y);

// Pixel set iff skin probability >= threshold_frac * max probability over the
// given frame. An all-zero probability map yields an empty mask.
BinaryMask back_project(const FrameImage& frame, const SkinModel& model, double threshold_frac);

BinaryMask morph_dilate(const BinaryMask& mask, int radius);
BinaryMask morph_erode(const BinaryMask& mask, int radius);
// Dilation followed by erosion with a square element of side 2*radius+1,
// applied `iterations` times.
BinaryMask morph_close(const BinaryMask& mask, int radius, int iterations);

std::vector<Contour> find_contours(const BinaryMask& mask);

// Gradient magnitude by central differences; pixel set iff the magnitude is
// >= threshold_frac * max magnitude. Constant images give an empty mask.
BinaryMask edge_map(const GrayImage& gray, double threshold_frac);

// Multi-scale block matching: 3 pyramid levels, 8x8 blocks, +-4 px search per
// level, bilinear upsampling of the coarse field between levels.
FlowField dense_flow(const GrayImage& prev, const GrayImage& curr);

}  // namespace handuse
