#pragma once

#include <span>
#include <string>
#include <vector>

#include "handuse/core.hpp"

namespace handuse {

enum class InteractionLabel : std::uint8_t { NoInteraction = 0, Interaction = 1 };

struct LabelledSample {
    std::vector<double> feature;
    InteractionLabel label = InteractionLabel::NoInteraction;
    std::string subject_id;
    int frame_index = 0;
    Laterality laterality = Laterality::Other;
};

// Axis-aligned split node. feature < 0 marks a leaf; leaves keep the class
// counts of the training samples that reached them.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t count_no = 0;
    std::uint32_t count_yes = 0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    int feature_dim = 0;
    std::uint64_t seed = 0;
    std::uint64_t sample_count = 0;

    bool trained() const { return !trees.empty() && feature_dim > 0; }
};

struct Prediction {
    InteractionLabel label = InteractionLabel::NoInteraction;
    double vote_fraction = 0.0;  // trees voting Interaction / tree count
};

// Bootstrap-aggregated trees with Gini splits on sqrt(d) feature candidates.
// Bootstrap indices are drawn against the samples sorted by
// (subject, frame, laterality), so the model is invariant to input order.
// Deterministic for a fixed seed, including under parallel tree building.
ForestModel forest_fit(const std::vector<LabelledSample>& samples, const PipelineConfig& cfg,
                       std::uint64_t seed, int jobs = 1);

Prediction forest_predict(const ForestModel& model, std::span<const double> feature);

void save_forest(const std::string& path, const ForestModel& model);
ForestModel load_forest(const std::string& path);

struct AblationViews {
    std::vector<double> flow;    // dims [0, 60)
    std::vector<double> hog;     // dims [60, 120)
    std::vector<double> colour;  // dims [120, 122)
};

AblationViews feature_ablation_views(std::span<const double> full_feature);

}  // namespace handuse
