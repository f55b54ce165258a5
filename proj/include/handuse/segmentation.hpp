#pragma once

#include <optional>

#include "handuse/core.hpp"
#include "handuse/imaging.hpp"

namespace handuse {

struct SegmentationResult {
    BoundingBox recentred_box;  // frame coordinates, same size as the input box
    BinaryMask mask;            // local to recentred_box, >= 1 set pixel
    Contour selected;           // box-local coordinates of the detection box
    int candidates_considered = 0;
};

// Closed edge mask for the box region (edge_map + morph_close), box-local.
BinaryMask closed_edge_mask(const FrameImage& frame, const BoundingBox& box,
                            const PipelineConfig& cfg);

// Skin back-projection within the box, cut by the closed edge mask, then
// contour extraction. Empty skin mask -> empty list (frame treated as
// hand-lost by the caller). Contours are in box-local coordinates.
std::vector<Contour> candidate_contours(const FrameImage& frame, const BoundingBox& box,
                                        const SkinModel& skin, const PipelineConfig& cfg);

// Area/arc filters, edge-overlap scoring and re-centering. nullopt when every
// candidate is filtered out or the re-centred mask comes up empty (hand lost).
std::optional<SegmentationResult> select_hand_contour(const std::vector<Contour>& candidates,
                                                      const BoundingBox& box,
                                                      const BinaryMask& closed_edges,
                                                      const PipelineConfig& cfg, int frame_w,
                                                      int frame_h);

// candidate_contours + select_hand_contour with a single edge-mask pass.
std::optional<SegmentationResult> segment_hand(const FrameImage& frame, const BoundingBox& box,
                                               const SkinModel& skin, const PipelineConfig& cfg);

}  // namespace handuse
