#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace handuse {

// Thrown for malformed input files (bad JSON, bad image data, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a value violates a documented invariant or contract.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for filesystem-level failures (missing file, short read, ...).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Laterality { Left, Right, Other };

const char* to_string(Laterality lat);
Laterality laterality_from_string(const std::string& s);

struct BoundingBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    long long area() const { return static_cast<long long>(w) * h; }
    double perimeter() const { return 2.0 * (w + h); }
    bool contains(int px, int py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
};

// Shifts the box (keeping its size) so it lies inside frame_w x frame_h.
// Shrinks only if the box is larger than the frame.
BoundingBox clamp_to_frame(const BoundingBox& box, int frame_w, int frame_h);

// One decoded RGB frame, 8 bits per channel, row-major.
struct FrameImage {
    int index = 0;
    double timestamp_s = 0.0;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3

    std::uint8_t r(int x, int y) const { return pixels[3 * (static_cast<std::size_t>(y) * width + x)]; }
    std::uint8_t g(int x, int y) const { return pixels[3 * (static_cast<std::size_t>(y) * width + x) + 1]; }
    std::uint8_t b(int x, int y) const { return pixels[3 * (static_cast<std::size_t>(y) * width + x) + 2]; }
    void set_rgb(int x, int y, std::uint8_t rr, std::uint8_t gg, std::uint8_t bb) {
        std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
        pixels[i] = rr;
        pixels[i + 1] = gg;
        pixels[i + 2] = bb;
    }
    void validate() const;
};

FrameImage make_frame(int index, int width, int height, double fps);

// Row-major bit mask; dimensions match the image region it annotates.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    std::size_t count() const;
    bool empty_mask() const { return count() == 0; }
};

// Every numeric constant of the pipeline lives here. Values not present in a
// config file keep the defaults below.
struct PipelineConfig {
    double fps = 30.0;
    double skin_threshold = 0.75;    // fraction of max back-projection value
    double edge_threshold = 0.05;    // fraction of max edge strength
    double contour_area_min_frac = 0.02;
    double contour_area_max_frac = 0.75;
    double contour_arc_min_frac = 0.90;
    double contour_arc_max_frac = 1.10;
    int haar_step_deg = 1;
    int haar_bin_deg = 5;
    int flow_bins = 15;
    double flow_mag_cap_frac = 0.05;  // magnitude cap as a fraction of frame diagonal
    int hog_raw_dim = 960;
    int pca_dim = 60;
    int colour_bins_h = 16;
    int colour_bins_s = 16;
    int forest_trees = 150;
    int forest_min_samples_split = 2;
    int forest_max_depth = 0;  // 0 = unbounded
    int forest_mtry = 0;       // 0 = floor(sqrt(feature_dim))
    int prolong_frames = 90;   // 3 s at 30 fps
    int smooth_frames = 120;   // 4 s at 30 fps
    bool smooth_centred = true;
    double binarize_threshold = 0.5;
    int morph_radius = 1;
    int morph_iterations = 2;
    int overlap_dilate_radius = 2;
    std::uint64_t rng_seed = 0;

    void validate() const;  // throws ValidationError naming the offending field
};

PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(const std::string& json_text);
std::string serialize_config(const PipelineConfig& cfg);

// A verified hand in one frame. The mask is local to recentred_box.
struct HandObservation {
    int frame_index = 0;
    BoundingBox box;            // as detected
    BoundingBox recentred_box;  // after segmentation re-centering
    Laterality laterality = Laterality::Other;
    BinaryMask mask;
    double detector_confidence = 0.0;
};

// Angle convention used everywhere: 0 deg points toward the LEFT image edge
// and angles grow through the TOP (90 = top, 180 = right, 270 = bottom).
// This is the unique convention under which "Quadrant III (180-270) = bottom
// right" and "Quadrant IV (270-360) = bottom left" both hold; see README.
double vector_angle_deg(double dx, double dy);  // [0, 360); (0,0) maps to 0
void angle_to_direction(double deg, double& dx, double& dy);

// Deterministic RNG. Streams derived from (seed, stream_id) are independent,
// so per-tree / per-worker draws do not depend on scheduling. All helpers are
// implemented on raw mt19937_64 output and produce identical sequences on any
// conforming platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    // Unbiased draw in [0, bound), bound >= 1.
    std::uint64_t uniform_u64(std::uint64_t bound);
    int uniform_int(int lo, int hi);  // inclusive range
    double uniform01();               // [0, 1) with 53 random bits
    double uniform(double lo, double hi);
    double gaussian();  // standard normal, Box-Muller

private:
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace handuse
