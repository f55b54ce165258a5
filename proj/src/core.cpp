#include "handuse/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace handuse {

const char* to_string(Laterality lat) {
    switch (lat) {
        case Laterality::Left: return "left";
        case Laterality::Right: return "right";
        case Laterality::Other: return "other";
    }
    return "other";
}

Laterality laterality_from_string(const std::string& s) {
    if (s == "left" || s == "Left" || s == "L") return Laterality::Left;
    if (s == "right" || s == "Right" || s == "R") return Laterality::Right;
    if (s == "other" || s == "Other" || s == "O") return Laterality::Other;
    throw ValidationError("unknown laterality: '" + s + "'");
}

BoundingBox clamp_to_frame(const BoundingBox& box, int frame_w, int frame_h) {
    BoundingBox out = box;
    out.w = std::min(out.w, frame_w);
    out.h = std::min(out.h, frame_h);
    out.x = std::clamp(out.x, 0, frame_w - out.w);
    out.y = std::clamp(out.y, 0, frame_h - out.h);
    return out;
}

void FrameImage::validate() const {
    if (width <= 0 || height <= 0)
        throw ValidationError("frame dimensions must be positive");
    if (pixels.size() != static_cast<std::size_t>(width) * height * 3)
        throw ValidationError("frame pixel buffer length != width*height*3");
    if (index < 0) throw ValidationError("frame index must be non-negative");
}

FrameImage make_frame(int index, int width, int height, double fps) {
    FrameImage f;
    f.index = index;
    f.timestamp_s = fps > 0 ? index / fps : 0.0;
    f.width = width;
    f.height = height;
    f.pixels.assign(static_cast<std::size_t>(width) * height * 3, 0);
    return f;
}

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits) n += b != 0;
    return n;
}

namespace {

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw ValidationError(std::string("config field '") + field + "' " + what);
}

}  // namespace

void PipelineConfig::validate() const {
    require(fps > 0, "fps", "must be > 0");
    require(skin_threshold > 0 && skin_threshold <= 1, "skin_threshold", "must be in (0,1]");
    require(edge_threshold > 0 && edge_threshold <= 1, "edge_threshold", "must be in (0,1]");
    require(binarize_threshold > 0 && binarize_threshold <= 1, "binarize_threshold", "must be in (0,1]");
    require(contour_area_min_frac > 0 && contour_area_min_frac <= 1, "contour_area_min_frac", "must be in (0,1]");
    require(contour_area_max_frac > 0 && contour_area_max_frac <= 1, "contour_area_max_frac", "must be in (0,1]");
    require(contour_area_min_frac < contour_area_max_frac, "contour_area_min_frac", "must be < contour_area_max_frac");
    require(contour_arc_min_frac > 0, "contour_arc_min_frac", "must be > 0");
    require(contour_arc_max_frac > contour_arc_min_frac, "contour_arc_max_frac", "must be > contour_arc_min_frac");
    require(haar_step_deg >= 1, "haar_step_deg", "must be >= 1");
    require(haar_bin_deg >= 1 && 360 % haar_bin_deg == 0, "haar_bin_deg", "must divide 360");
    require(haar_bin_deg % haar_step_deg == 0, "haar_step_deg", "must divide haar_bin_deg");
    require(flow_bins >= 1, "flow_bins", "must be >= 1");
    require(flow_mag_cap_frac > 0 && flow_mag_cap_frac <= 1, "flow_mag_cap_frac", "must be in (0,1]");
    require(hog_raw_dim == 960, "hog_raw_dim", "must be 960 (48x128 crop, 8px cells, 10 bins)");
    require(pca_dim >= 1 && pca_dim <= hog_raw_dim, "pca_dim", "must be in [1, hog_raw_dim]");
    require(colour_bins_h >= 1, "colour_bins_h", "must be >= 1");
    require(colour_bins_s >= 1, "colour_bins_s", "must be >= 1");
    require(forest_trees >= 1, "forest_trees", "must be >= 1");
    require(forest_min_samples_split >= 2, "forest_min_samples_split", "must be >= 2");
    require(forest_max_depth >= 0, "forest_max_depth", "must be >= 0");
    require(forest_mtry >= 0, "forest_mtry", "must be >= 0");
    require(prolong_frames >= 0, "prolong_frames", "must be >= 0");
    require(smooth_frames > 0, "smooth_frames", "must be > 0");
    require(morph_radius >= 1, "morph_radius", "must be >= 1");
    require(morph_iterations >= 1, "morph_iterations", "must be >= 1");
    require(overlap_dilate_radius >= 0, "overlap_dilate_radius", "must be >= 0");
}

namespace {

using nlohmann::json;

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config field '") + key + "' has wrong type: " + e.what());
    }
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    if (j.is_null()) j = json::object();
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");

    static const char* known[] = {
        "fps", "skin_threshold", "edge_threshold", "contour_area_min_frac",
        "contour_area_max_frac", "contour_arc_min_frac", "contour_arc_max_frac",
        "haar_step_deg", "haar_bin_deg", "flow_bins", "flow_mag_cap_frac",
        "hog_raw_dim", "pca_dim", "colour_bins_h", "colour_bins_s",
        "forest_trees", "forest_min_samples_split", "forest_max_depth",
        "forest_mtry", "prolong_frames", "smooth_frames", "smooth_centred",
        "binarize_threshold", "morph_radius", "morph_iterations",
        "overlap_dilate_radius", "rng_seed"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ValidationError("unknown config field '" + it.key() + "'");
    }

    PipelineConfig cfg;
    read_field(j, "fps", cfg.fps);
    read_field(j, "skin_threshold", cfg.skin_threshold);
    read_field(j, "edge_threshold", cfg.edge_threshold);
    read_field(j, "contour_area_min_frac", cfg.contour_area_min_frac);
    read_field(j, "contour_area_max_frac", cfg.contour_area_max_frac);
    read_field(j, "contour_arc_min_frac", cfg.contour_arc_min_frac);
    read_field(j, "contour_arc_max_frac", cfg.contour_arc_max_frac);
    read_field(j, "haar_step_deg", cfg.haar_step_deg);
    read_field(j, "haar_bin_deg", cfg.haar_bin_deg);
    read_field(j, "flow_bins", cfg.flow_bins);
    read_field(j, "flow_mag_cap_frac", cfg.flow_mag_cap_frac);
    read_field(j, "hog_raw_dim", cfg.hog_raw_dim);
    read_field(j, "pca_dim", cfg.pca_dim);
    read_field(j, "colour_bins_h", cfg.colour_bins_h);
    read_field(j, "colour_bins_s", cfg.colour_bins_s);
    read_field(j, "forest_trees", cfg.forest_trees);
    read_field(j, "forest_min_samples_split", cfg.forest_min_samples_split);
    read_field(j, "forest_max_depth", cfg.forest_max_depth);
    read_field(j, "forest_mtry", cfg.forest_mtry);
    read_field(j, "prolong_frames", cfg.prolong_frames);
    read_field(j, "smooth_frames", cfg.smooth_frames);
    read_field(j, "smooth_centred", cfg.smooth_centred);
    read_field(j, "binarize_threshold", cfg.binarize_threshold);
    read_field(j, "morph_radius", cfg.morph_radius);
    read_field(j, "morph_iterations", cfg.morph_iterations);
    read_field(j, "overlap_dilate_radius", cfg.overlap_dilate_radius);
    read_field(j, "rng_seed", cfg.rng_seed);
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) text = "{}";
    return parse_config(text);
}

std::string serialize_config(const PipelineConfig& cfg) {
    nlohmann::ordered_json j;
    j["fps"] = cfg.fps;
    j["skin_threshold"] = cfg.skin_threshold;
    j["edge_threshold"] = cfg.edge_threshold;
    j["contour_area_min_frac"] = cfg.contour_area_min_frac;
    j["contour_area_max_frac"] = cfg.contour_area_max_frac;
    j["contour_arc_min_frac"] = cfg.contour_arc_min_frac;
    j["contour_arc_max_frac"] = cfg.contour_arc_max_frac;
    j["haar_step_deg"] = cfg.haar_step_deg;
    j["haar_bin_deg"] = cfg.haar_bin_deg;
    j["flow_bins"] = cfg.flow_bins;
    j["flow_mag_cap_frac"] = cfg.flow_mag_cap_frac;
    j["hog_raw_dim"] = cfg.hog_raw_dim;
    j["pca_dim"] = cfg.pca_dim;
    j["colour_bins_h"] = cfg.colour_bins_h;
    j["colour_bins_s"] = cfg.colour_bins_s;
    j["forest_trees"] = cfg.forest_trees;
    j["forest_min_samples_split"] = cfg.forest_min_samples_split;
    j["forest_max_depth"] = cfg.forest_max_depth;
    j["forest_mtry"] = cfg.forest_mtry;
    j["prolong_frames"] = cfg.prolong_frames;
    j["smooth_frames"] = cfg.smooth_frames;
    j["smooth_centred"] = cfg.smooth_centred;
    j["binarize_threshold"] = cfg.binarize_threshold;
    j["morph_radius"] = cfg.morph_radius;
    j["morph_iterations"] = cfg.morph_iterations;
    j["overlap_dilate_radius"] = cfg.overlap_dilate_radius;
    j["rng_seed"] = cfg.rng_seed;
    return j.dump(2) + "\n";
}

double vector_angle_deg(double dx, double dy) {
    if (dx == 0.0 && dy == 0.0) return 0.0;
    double a = std::atan2(-dy, -dx) * 180.0 / std::numbers::pi;
    if (a < 0) a += 360.0;
    if (a >= 360.0) a -= 360.0;
    return a;
}

void angle_to_direction(double deg, double& dx, double& dy) {
    double rad = deg * std::numbers::pi / 180.0;
    dx = -std::cos(rad);
    dy = -std::sin(rad);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

// xoshiro256** seeded through splitmix64.
Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t sm = seed;
    std::uint64_t mixed = splitmix64(sm) ^ (stream_id * 0x9e3779b97f4a7c15ULL);
    return Rng(mixed + stream_id);
}

std::uint64_t Rng::next_u64() {
    std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

std::uint64_t Rng::uniform_u64(std::uint64_t bound) {
    // rejection sampling to avoid modulo bias
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold) return r % bound;
    }
}

int Rng::uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform_u64(static_cast<std::uint64_t>(hi) - lo + 1));
}

double Rng::uniform01() {
    return (next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double Rng::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform01();
    } while (u1 <= 1e-300);
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

}  // namespace handuse
