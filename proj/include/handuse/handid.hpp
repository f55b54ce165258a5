#pragma once

#include "handuse/classify.hpp"
#include "handuse/core.hpp"
#include "handuse/imaging.hpp"

namespace handuse {

// One value per angular bin; bin k covers [k*haar_bin_deg, (k+1)*haar_bin_deg)
// degrees in the shared angle convention (0 = left edge, 90 = top).
struct HaarFeature {
    std::vector<double> bins;
};

struct CandidateDetection {
    int frame_index = 0;
    BoundingBox box;
    double confidence = 0.0;
};

// Three parallel strips swept around the box centroid. For each angle the
// centre strip runs from the centroid to the image border; the side strips
// sit one strip width to either side. score = mean of (side CoV - centre CoV)
// over both sides, so a uniform arm under the centre strip maximises it.
HaarFeature haar_feature(const GrayImage& gray, const BoundingBox& box, const PipelineConfig& cfg);

// true iff the majority of the verifier forest's trees vote "hand".
bool verify(const HaarFeature& feature, const ForestModel& verifier);

// Quadrant sums: [0,180) -> Other, [180,270) -> Right, [270,360) -> Left.
// Ties resolve Left > Right > Other.
Laterality laterality(const HaarFeature& feature);

}  // namespace handuse
