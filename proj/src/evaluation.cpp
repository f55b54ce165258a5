#include "handuse/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>

namespace handuse {

FrameScores scores_from_confusion(const ConfusionCounts& c) {
    FrameScores s;
    s.counts = c;
    s.precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
    s.recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    s.f1 = (s.precision + s.recall) > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                        : 0.0;
    s.accuracy = c.total() > 0 ? static_cast<double>(c.tp + c.tn) / c.total() : 0.0;
    return s;
}

FrameScores frame_scores(const Timeline& pred, const Timeline& truth) {
    if (pred.states.size() != truth.states.size())
        throw ValidationError("frame_scores: timeline lengths differ");
    ConfusionCounts c;
    for (std::size_t t = 0; t < pred.states.size(); ++t) {
        FrameState p = pred.states[t], g = truth.states[t];
        if (p == FrameState::Missing || g == FrameState::Missing)
            throw ValidationError("frame_scores: timelines must be binary");
        if (p == FrameState::Interaction)
            (g == FrameState::Interaction ? c.tp : c.fp)++;
        else
            (g == FrameState::Interaction ? c.fn : c.tn)++;
    }
    return scores_from_confusion(c);
}

std::vector<std::string> subject_ids(const std::vector<LabelledSample>& samples) {
    std::set<std::string> ids;
    for (const auto& s : samples) ids.insert(s.subject_id);
    return {ids.begin(), ids.end()};
}

LosoSplit loso_split(const std::vector<LabelledSample>& samples, const std::string& held_out,
                     const std::vector<std::string>& roster) {
    if (roster.size() < 2) throw ValidationError("loso_split: need at least 2 subjects");
    if (std::find(roster.begin(), roster.end(), held_out) == roster.end())
        throw ValidationError("loso_split: unknown subject id '" + held_out + "'");
    LosoSplit split;
    for (const auto& s : samples) {
        if (s.subject_id == held_out)
            split.test.push_back(s);
        else
            split.train.push_back(s);
    }
    return split;
}

LosoSplit loso_split(const std::vector<LabelledSample>& samples, const std::string& held_out) {
    return loso_split(samples, held_out, subject_ids(samples));
}

std::vector<double> midranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double rank = (static_cast<double>(i) + j) / 2.0 + 1.0;  // 1-based mid-rank
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

struct PearsonResult {
    double r = 0.0;
    bool defined = false;
};

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    PearsonResult res;
    if (sxx <= 0.0 || syy <= 0.0) return res;
    res.r = sxy / std::sqrt(sxx * syy);
    res.r = std::clamp(res.r, -1.0, 1.0);
    res.defined = true;
    return res;
}

double one_tailed_right_p(double r, int n) {
    double denom = 1.0 - r * r;
    if (denom <= 1e-15) return r > 0 ? 0.0 : 1.0;
    double t = r * std::sqrt((n - 2) / denom);
    boost::math::students_t dist(n - 2);
    return boost::math::cdf(boost::math::complement(dist, t));
}

}  // namespace

CorrelationReport correlations(const std::vector<double>& predicted,
                               const std::vector<double>& actual) {
    if (predicted.size() != actual.size())
        throw ValidationError("correlations: list lengths differ");
    if (predicted.size() < 3) throw ValidationError("correlations: need n >= 3");
    CorrelationReport report;
    report.n = static_cast<int>(predicted.size());

    PearsonResult pr = pearson(predicted, actual);
    PearsonResult sr = pearson(midranks(predicted), midranks(actual));
    report.defined = pr.defined && sr.defined;
    if (!report.defined) return report;
    report.pearson_r = pr.r;
    report.pearson_p_one_tailed = one_tailed_right_p(pr.r, report.n);
    report.spearman_rho = sr.r;
    report.spearman_p_one_tailed = one_tailed_right_p(sr.r, report.n);
    return report;
}

const char* to_string(FeatureFamily family) {
    switch (family) {
        case FeatureFamily::Flow: return "flow";
        case FeatureFamily::Hog: return "hog";
        case FeatureFamily::Colour: return "colour";
    }
    return "flow";
}

namespace {

std::vector<SubjectScore> loso_scores(const std::vector<LabelledSample>& dataset,
                                      const PipelineConfig& cfg, std::uint64_t seed, int jobs) {
    std::vector<std::string> roster = subject_ids(dataset);
    if (roster.size() < 2) throw ValidationError("LOSO evaluation needs at least 2 subjects");
    std::vector<SubjectScore> out;
    for (const std::string& subject : roster) {
        LosoSplit split = loso_split(dataset, subject, roster);
        if (split.test.empty()) continue;
        ForestModel model = forest_fit(split.train, cfg, seed, jobs);
        ConfusionCounts c;
        for (const auto& s : split.test) {
            Prediction p = forest_predict(model, s.feature);
            bool pred = p.label == InteractionLabel::Interaction;
            bool truth = s.label == InteractionLabel::Interaction;
            if (pred) (truth ? c.tp : c.fp)++;
            else (truth ? c.fn : c.tn)++;
        }
        FrameScores fs = scores_from_confusion(c);
        out.push_back({subject, fs.f1, fs.accuracy, c});
    }
    return out;
}

}  // namespace

std::vector<SubjectScore> loso_run(const std::vector<LabelledSample>& dataset,
                                   const PipelineConfig& cfg, std::uint64_t seed, int jobs) {
    return loso_scores(dataset, cfg, seed, jobs);
}

std::vector<SubjectScore> ablation_run(const std::vector<LabelledSample>& dataset,
                                       FeatureFamily family, const PipelineConfig& cfg,
                                       std::uint64_t seed, int jobs) {
    std::vector<LabelledSample> sliced;
    sliced.reserve(dataset.size());
    for (const auto& s : dataset) {
        AblationViews views = feature_ablation_views(s.feature);
        LabelledSample copy = s;
        switch (family) {
            case FeatureFamily::Flow: copy.feature = std::move(views.flow); break;
            case FeatureFamily::Hog: copy.feature = std::move(views.hog); break;
            case FeatureFamily::Colour: copy.feature = std::move(views.colour); break;
        }
        sliced.push_back(std::move(copy));
    }
    return loso_scores(sliced, cfg, seed, jobs);
}

}  // namespace handuse
