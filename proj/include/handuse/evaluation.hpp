#pragma once

#include <string>
#include <vector>

#include "handuse/classify.hpp"
#include "handuse/core.hpp"
#include "handuse/timeline.hpp"

namespace handuse {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
};

struct FrameScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    ConfusionCounts counts;
};

FrameScores scores_from_confusion(const ConfusionCounts& counts);
FrameScores frame_scores(const Timeline& pred, const Timeline& truth);

struct LosoSplit {
    std::vector<LabelledSample> train;
    std::vector<LabelledSample> test;
};

// Hold out one subject; train on the rest. The roster lists the valid subject
// ids (an unknown held-out id is an error; a known id with no samples gives
// an empty test set).
LosoSplit loso_split(const std::vector<LabelledSample>& samples, const std::string& held_out,
                     const std::vector<std::string>& roster);
LosoSplit loso_split(const std::vector<LabelledSample>& samples, const std::string& held_out);

std::vector<std::string> subject_ids(const std::vector<LabelledSample>& samples);

struct CorrelationReport {
    double pearson_r = 0.0;
    double pearson_p_one_tailed = 1.0;
    double spearman_rho = 0.0;
    double spearman_p_one_tailed = 1.0;
    int n = 0;
    bool defined = false;  // false when either input has zero variance
};

// Pearson on raw values, Spearman as Pearson on mid-ranks. One-tailed
// (right) p-values from the t distribution with n-2 degrees of freedom.
CorrelationReport correlations(const std::vector<double>& predicted,
                               const std::vector<double>& actual);

std::vector<double> midranks(const std::vector<double>& values);

enum class FeatureFamily { Flow, Hog, Colour };

const char* to_string(FeatureFamily family);

struct SubjectScore {
    std::string subject_id;
    double f1 = 0.0;
    double accuracy = 0.0;
    ConfusionCounts counts;
};

// LOSO evaluation restricted to one feature family of the assembled 122-dim
// samples: per-subject classifier scores on the held-out samples.
std::vector<SubjectScore> ablation_run(const std::vector<LabelledSample>& dataset,
                                       FeatureFamily family, const PipelineConfig& cfg,
                                       std::uint64_t seed, int jobs = 1);

// Same LOSO loop over the full feature vectors.
std::vector<SubjectScore> loso_run(const std::vector<LabelledSample>& dataset,
                                   const PipelineConfig& cfg, std::uint64_t seed, int jobs = 1);

}  // namespace handuse
