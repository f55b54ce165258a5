#include "handuse/segmentation.hpp"

#include <algorithm>
#include <cmath>

namespace handuse {

BinaryMask closed_edge_mask(const FrameImage& frame, const BoundingBox& box,
                            const PipelineConfig& cfg) {
    FrameImage crop = crop_frame(frame, box);
    BinaryMask edges = edge_map(to_gray(crop), cfg.edge_threshold);
    return morph_close(edges, cfg.morph_radius, cfg.morph_iterations);
}

std::vector<Contour> candidate_contours(const FrameImage& frame, const BoundingBox& box,
                                        const SkinModel& skin, const PipelineConfig& cfg) {
    FrameImage crop = crop_frame(frame, box);
    BinaryMask skin_mask = back_project(crop, skin, cfg.skin_threshold);
    if (skin_mask.empty_mask()) return {};
    BinaryMask edges = closed_edge_mask(frame, box, cfg);
    // cut skin blobs at hand boundaries
    for (std::size_t i = 0; i < skin_mask.bits.size(); ++i)
        if (edges.bits[i]) skin_mask.bits[i] = 0;
    return find_contours(skin_mask);
}

std::optional<SegmentationResult> select_hand_contour(const std::vector<Contour>& candidates,
                                                      const BoundingBox& box,
                                                      const BinaryMask& closed_edges,
                                                      const PipelineConfig& cfg, int frame_w,
                                                      int frame_h) {
    if (candidates.empty()) return std::nullopt;

    const double box_area = static_cast<double>(box.area());
    const double box_perimeter = box.perimeter();
    const double area_lo = cfg.contour_area_min_frac * box_area;
    const double area_hi = cfg.contour_area_max_frac * box_area;
    const double arc_lo = cfg.contour_arc_min_frac * box_perimeter;
    const double arc_hi = cfg.contour_arc_max_frac * box_perimeter;

    BinaryMask overlap_edges = cfg.overlap_dilate_radius > 0
                                   ? morph_dilate(closed_edges, cfg.overlap_dilate_radius)
                                   : closed_edges;

    const Contour* best = nullptr;
    double best_overlap = -1.0;
    for (const Contour& c : candidates) {
        if (c.area < area_lo || c.area > area_hi) continue;
        if (c.arc_length >= arc_lo && c.arc_length <= arc_hi) continue;  // box-shaped artifact
        double shared = 0.0;
        for (const PointI& p : c.pixels)
            if (p.x >= 0 && p.x < overlap_edges.width && p.y >= 0 && p.y < overlap_edges.height &&
                overlap_edges.get(p.x, p.y))
                shared += 1.0;
        double overlap = shared / c.area;
        if (overlap > best_overlap || (overlap == best_overlap && best && c.area > best->area)) {
            best_overlap = overlap;
            best = &c;
        }
    }
    if (!best) return std::nullopt;

    double sx = 0.0, sy = 0.0;
    PointI top = best->pixels.front();
    for (const PointI& p : best->pixels) {
        sx += p.x;
        sy += p.y;
        if (p.y < top.y || (p.y == top.y && p.x < top.x)) top = p;
    }
    const double centroid_x = sx / best->area, centroid_y = sy / best->area;
    // new centre = midpoint of contour centroid and top pixel, favouring the
    // hand over the arm below it
    const double new_cx = 0.5 * (centroid_x + top.x) + box.x;
    const double new_cy = 0.5 * (centroid_y + top.y) + box.y;

    BoundingBox recentred;
    recentred.w = box.w;
    recentred.h = box.h;
    recentred.x = static_cast<int>(std::lround(new_cx - box.w / 2.0));
    recentred.y = static_cast<int>(std::lround(new_cy - box.h / 2.0));
    recentred = clamp_to_frame(recentred, frame_w, frame_h);

    BinaryMask mask(recentred.w, recentred.h);
    std::size_t kept = 0;
    for (const PointI& p : best->pixels) {
        int fx = p.x + box.x, fy = p.y + box.y;
        int lx = fx - recentred.x, ly = fy - recentred.y;
        if (lx >= 0 && lx < recentred.w && ly >= 0 && ly < recentred.h) {
            mask.set(lx, ly, true);
            ++kept;
        }
    }
    if (kept == 0) return std::nullopt;

    SegmentationResult result;
    result.recentred_box = recentred;
    result.mask = std::move(mask);
    result.selected = *best;
    result.candidates_considered = static_cast<int>(candidates.size());
    return result;
}

std::optional<SegmentationResult> segment_hand(const FrameImage& frame, const BoundingBox& box,
                                               const SkinModel& skin, const PipelineConfig& cfg) {
    BoundingBox clamped = clamp_to_frame(box, frame.width, frame.height);
    FrameImage crop = crop_frame(frame, clamped);
    BinaryMask skin_mask = back_project(crop, skin, cfg.skin_threshold);
    if (skin_mask.empty_mask()) return std::nullopt;
    BinaryMask edges = morph_close(edge_map(to_gray(crop), cfg.edge_threshold), cfg.morph_radius,
                                   cfg.morph_iterations);
    for (std::size_t i = 0; i < skin_mask.bits.size(); ++i)
        if (edges.bits[i]) skin_mask.bits[i] = 0;
    std::vector<Contour> candidates = find_contours(skin_mask);
    if (candidates.empty()) return std::nullopt;
    return select_hand_contour(candidates, clamped, edges, cfg, frame.width, frame.height);
}

}  // namespace handuse
