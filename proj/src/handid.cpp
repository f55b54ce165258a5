#include "handuse/handid.hpp"

#include <algorithm>
#include <cmath>

namespace handuse {

namespace {

struct StripStats {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++count;
    }
    // std/mean; 0 for empty strips or near-zero means
    double cov() const {
        if (count == 0) return 0.0;
        double mean = sum / count;
        if (mean < 1e-6) return 0.0;
        double var = std::max(0.0, sum_sq / count - mean * mean);
        return std::sqrt(var) / mean;
    }
};

// Distance from point c along unit direction d to the image rectangle border.
double ray_length(double cx, double cy, double dx, double dy, int w, int h) {
    double t = std::numeric_limits<double>::infinity();
    if (dx > 1e-12) t = std::min(t, ((w - 1) - cx) / dx);
    if (dx < -1e-12) t = std::min(t, (0 - cx) / dx);
    if (dy > 1e-12) t = std::min(t, ((h - 1) - cy) / dy);
    if (dy < -1e-12) t = std::min(t, (0 - cy) / dy);
    if (!std::isfinite(t)) t = 0.0;
    return std::max(0.0, t);
}

}  // namespace

HaarFeature haar_feature(const GrayImage& gray, const BoundingBox& box, const PipelineConfig& cfg) {
    if (box.w <= 0 || box.h <= 0) throw ValidationError("haar_feature: empty box");
    if (box.x < 0 || box.y < 0 || box.x + box.w > gray.width || box.y + box.h > gray.height)
        throw ValidationError("haar_feature: box outside frame");

    const double cx = box.cx(), cy = box.cy();
    const double strip_w = std::max(8.0, box.w / 2.0);
    const int across = std::max(1, static_cast<int>(std::lround(strip_w)));
    const int n_bins = 360 / cfg.haar_bin_deg;

    HaarFeature feat;
    feat.bins.assign(n_bins, 0.0);

    for (int deg = 0; deg < 360; deg += cfg.haar_step_deg) {
        double dx, dy;
        angle_to_direction(static_cast<double>(deg), dx, dy);
        const double px = -dy, py = dx;  // perpendicular
        const double len = ray_length(cx, cy, dx, dy, gray.width, gray.height);

        StripStats strip[3];  // centre, side+, side-
        const double offsets[3] = {0.0, strip_w, -strip_w};
        const int n_along = static_cast<int>(len);
        for (int ti = 0; ti < n_along; ++ti) {
            double t = ti + 0.5;
            double bx = cx + t * dx, by = cy + t * dy;
            for (int ui = 0; ui < across; ++ui) {
                double u = ui - (across - 1) / 2.0;
                for (int s = 0; s < 3; ++s) {
                    double x = bx + (u + offsets[s]) * px;
                    double y = by + (u + offsets[s]) * py;
                    if (x < 0.0 || y < 0.0 || x > gray.width - 1 || y > gray.height - 1) continue;
                    strip[s].add(bilinear_sample(gray, x, y));
                }
            }
        }
        double centre = strip[0].cov();
        double score = 0.5 * ((strip[1].cov() - centre) + (strip[2].cov() - centre));
        feat.bins[deg / cfg.haar_bin_deg] += score;
    }
    return feat;
}

bool verify(const HaarFeature& feature, const ForestModel& verifier) {
    if (!verifier.trained()) throw ValidationError("verify: verifier model is untrained");
    return forest_predict(verifier, feature.bins).label == InteractionLabel::Interaction;
}

Laterality laterality(const HaarFeature& feature) {
    const std::size_t n = feature.bins.size();
    if (n == 0 || n % 4 != 0)
        throw ValidationError("laterality: bin count must be a positive multiple of 4");
    const std::size_t half = n / 2;          // 180 deg
    const std::size_t three_q = 3 * n / 4;   // 270 deg
    double other = 0.0, right = 0.0, left = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < half)
            other += feature.bins[i];
        else if (i < three_q)
            right += feature.bins[i];
        else
            left += feature.bins[i];
    }
    Laterality best = Laterality::Left;
    double best_sum = left;
    if (right > best_sum) {
        best = Laterality::Right;
        best_sum = right;
    }
    if (other > best_sum) best = Laterality::Other;
    return best;
}

}  // namespace handuse
