#pragma once

#include <string>
#include <vector>

#include "handuse/core.hpp"

namespace handuse {

enum class FrameState : std::uint8_t { NoInteraction = 0, Interaction = 1, Missing = 2 };

struct Timeline {
    Laterality laterality = Laterality::Other;
    double fps = 30.0;
    std::vector<FrameState> states;
};

struct UseMetrics {
    double interaction_fraction = 0.0;   // interaction frames / total frames
    double mean_duration_s = 0.0;        // 0 when there are no interactions
    double interactions_per_hour = 0.0;
    std::int64_t interaction_count = 0;
};

// Missing runs directly after an Interaction frame stay Interaction for up to
// prolong_frames; every other Missing frame becomes NoInteraction.
Timeline prolong(const Timeline& tl, const PipelineConfig& cfg);

// Centred moving average over smooth_frames. Boundary windows are shrunk but
// keep the nominal window-length parity, so strictly alternating inputs
// average to an exactly constant signal. Requires a Missing-free timeline.
std::vector<double> smooth_average(const Timeline& tl, const PipelineConfig& cfg);

// smooth_average, min-max normalized over the whole sequence (skipped when
// max-min < 1e-9), then thresholded with strict > binarize_threshold.
Timeline smooth_binarize(const Timeline& tl, const PipelineConfig& cfg);

UseMetrics metrics(const Timeline& tl);

struct DecidedObservation {
    int frame_index = 0;
    Laterality laterality = Laterality::Other;
    double confidence = 0.0;
    bool interaction = false;
};

struct TimelineSet {
    Timeline left;
    Timeline right;
    Timeline other;

    const Timeline& of(Laterality lat) const {
        switch (lat) {
            case Laterality::Left: return left;
            case Laterality::Right: return right;
            default: return other;
        }
    }
    Timeline& of(Laterality lat) {
        return const_cast<Timeline&>(static_cast<const TimelineSet*>(this)->of(lat));
    }
};

// Per frame and laterality, the decision of the highest-confidence
// observation; frames with no observation stay Missing.
TimelineSet assign_detections(const std::vector<DecidedObservation>& observations,
                              int frame_count, double fps);

// CSV columns: frame,time_s,left,right,other; cells are 0, 1 or M.
void write_timeline_csv(const std::string& path, const TimelineSet& timelines);
TimelineSet read_timeline_csv(const std::string& path);

}  // namespace handuse
