#pragma once

#include <array>
#include <optional>
#include <span>

#include "handuse/core.hpp"
#include "handuse/imaging.hpp"

namespace handuse {

enum class Region : int { Hand = 0, Box = 1, Background = 2 };

// Disjoint partition of the frame: hand pixels (mask within the re-centred
// box), the rest of the box, and everything outside the box.
struct RegionTriple {
    int frame_w = 0;
    int frame_h = 0;
    BoundingBox box;  // re-centred box, clamped to frame
    BinaryMask hand;  // box-local

    Region region_of(int x, int y) const {
        if (!box.contains(x, y)) return Region::Background;
        return hand.get(x - box.x, y - box.y) ? Region::Hand : Region::Box;
    }
};

RegionTriple make_regions(const HandObservation& obs, int frame_w, int frame_h);

struct RegionHistogram {
    std::vector<double> magnitude;  // flow_bins entries, L1-normalized
    std::vector<double> direction;  // flow_bins entries, L1-normalized
    std::size_t pixel_count = 0;
};

// Per-region flow histograms. Magnitude bins are linear over
// [0, flow_mag_cap_frac * frame diagonal] with an open last bin; direction
// bins cover [0,360) in the shared angle convention (zero flow -> bin 0).
// An empty region gives zero histograms; callers treat that as invalid.
std::array<RegionHistogram, 3> flow_histograms(const FlowField& flow, const RegionTriple& regions,
                                               const PipelineConfig& cfg);

struct FlowFeature {
    std::vector<double> values;  // 4*flow_bins: [hand-box mag,dir; background-box mag,dir]
    bool valid = false;
};

FlowFeature flow_feature(const FlowField& flow, const RegionTriple& regions,
                         const PipelineConfig& cfg);

// Crop -> 48x128 bilinear resize -> central-difference gradients -> 10
// unsigned orientation bins over 8x8 cells (6x16 grid), per-cell L2
// normalization. nullopt when the clamped box is degenerate (w or h < 8).
std::optional<std::vector<double>> hog_raw(const FrameImage& frame, const BoundingBox& box,
                                           const PipelineConfig& cfg);

struct PcaModel {
    int in_dim = 0;
    int out_dim = 0;
    std::vector<double> mean;                // in_dim
    std::vector<double> components;          // out_dim x in_dim, row-major, orthonormal rows
    std::vector<double> explained_variance;  // out_dim, non-increasing

    bool trained() const { return in_dim > 0 && out_dim > 0; }
    std::span<const double> component(int i) const {
        return {components.data() + static_cast<std::size_t>(i) * in_dim,
                static_cast<std::size_t>(in_dim)};
    }
};

// Eigendecomposition of the sample covariance; components ordered by
// decreasing variance, sign fixed so each row's largest-magnitude entry is
// positive. The seed parameter is accepted for interface symmetry; the
// decomposition itself is deterministic.
PcaModel pca_fit(const std::vector<std::vector<double>>& samples, int dim, std::uint64_t seed = 0);

std::vector<double> pca_project(const PcaModel& model, std::span<const double> raw);

void save_pca(const std::string& path, const PcaModel& model);
PcaModel load_pca(const std::string& path);
void export_pca_csv(const std::string& path, const PcaModel& model);

struct ColourDistances {
    double hand_box = 1.0;
    double box_background = 1.0;
    bool valid = false;
};

// Bhattacharyya distances between H-S histograms of the three regions.
ColourDistances colour_distances(const HsvImage& hsv, const RegionTriple& regions,
                                 const PipelineConfig& cfg);

double bhattacharyya_distance(std::span<const double> p, std::span<const double> q);

struct InteractionFeature {
    std::vector<double> values;  // flow (60) + hog pca (60) + colour (2) = 122
    bool valid = false;
};

InteractionFeature assemble(const FlowFeature& flow, const std::vector<double>& hog_pca,
                            const ColourDistances& colour);

}  // namespace handuse
