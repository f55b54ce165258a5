#include "handuse/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <thread>
#include <tuple>

namespace handuse {

namespace {

struct SplitResult {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double gini(std::size_t yes, std::size_t no) {
    std::size_t n = yes + no;
    if (n == 0) return 0.0;
    double py = static_cast<double>(yes) / n;
    double pn = static_cast<double>(no) / n;
    return 1.0 - py * py - pn * pn;
}

class TreeBuilder {
public:
    TreeBuilder(const std::vector<const LabelledSample*>& sorted, const PipelineConfig& cfg,
                int dim, std::uint64_t seed, std::uint64_t tree_index)
        : sorted_(sorted), cfg_(cfg), dim_(dim), rng_(Rng::stream(seed, tree_index)) {}

    DecisionTree build() {
        std::size_t n = sorted_.size();
        std::vector<std::uint32_t> bag(n);
        for (auto& b : bag) b = static_cast<std::uint32_t>(rng_.uniform_u64(n));
        std::sort(bag.begin(), bag.end());
        DecisionTree tree;
        grow(tree, bag, 0);
        return tree;
    }

private:
    std::uint32_t grow(DecisionTree& tree, const std::vector<std::uint32_t>& idx, int depth) {
        std::uint32_t node_id = static_cast<std::uint32_t>(tree.nodes.size());
        tree.nodes.emplace_back();

        std::size_t yes = 0;
        for (std::uint32_t i : idx) yes += sorted_[i]->label == InteractionLabel::Interaction;
        std::size_t no = idx.size() - yes;
        tree.nodes[node_id].count_no = static_cast<std::uint32_t>(no);
        tree.nodes[node_id].count_yes = static_cast<std::uint32_t>(yes);

        bool depth_capped = cfg_.forest_max_depth > 0 && depth >= cfg_.forest_max_depth;
        if (yes == 0 || no == 0 || idx.size() < static_cast<std::size_t>(cfg_.forest_min_samples_split) ||
            depth_capped)
            return node_id;

        SplitResult split = best_split(idx, gini(yes, no));
        if (split.feature < 0) return node_id;

        std::vector<std::uint32_t> left, right;
        for (std::uint32_t i : idx) {
            if (sorted_[i]->feature[split.feature] <= split.threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        tree.nodes[node_id].feature = split.feature;
        tree.nodes[node_id].threshold = split.threshold;
        std::uint32_t l = grow(tree, left, depth + 1);
        std::uint32_t r = grow(tree, right, depth + 1);
        tree.nodes[node_id].left = l;
        tree.nodes[node_id].right = r;
        return node_id;
    }

    // Walks a fresh random permutation of the features, scoring the best
    // threshold of each non-constant candidate until mtry candidates were
    // tried. Constant features never consume a slot, so padding the data
    // with constants cannot change the fitted tree's decisions.
    SplitResult best_split(const std::vector<std::uint32_t>& idx, double parent_gini) {
        int mtry = cfg_.forest_mtry > 0
                       ? cfg_.forest_mtry
                       : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(dim_)))));
        std::vector<int> perm(dim_);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = dim_ - 1; i > 0; --i)
            std::swap(perm[i], perm[rng_.uniform_u64(static_cast<std::uint64_t>(i) + 1)]);

        SplitResult best;
        int tried = 0;
        std::vector<std::pair<double, std::uint8_t>> vals;
        vals.reserve(idx.size());
        for (int f : perm) {
            if (tried >= mtry && best.feature >= 0) break;
            vals.clear();
            for (std::uint32_t i : idx)
                vals.emplace_back(sorted_[i]->feature[f],
                                  sorted_[i]->label == InteractionLabel::Interaction ? 1 : 0);
            std::sort(vals.begin(), vals.end());
            if (vals.front().first == vals.back().first) continue;  // constant here
            ++tried;

            std::size_t total_yes = 0;
            for (auto& v : vals) total_yes += v.second;
            std::size_t n = vals.size();
            std::size_t left_yes = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_yes += vals[i].second;
                if (vals[i].first == vals[i + 1].first) continue;
                std::size_t nl = i + 1, nr = n - nl;
                double g = parent_gini -
                           (static_cast<double>(nl) / n) * gini(left_yes, nl - left_yes) -
                           (static_cast<double>(nr) / n) * gini(total_yes - left_yes, nr - (total_yes - left_yes));
                if (g > best.gain + 1e-15) {
                    best.gain = g;
                    best.feature = f;
                    best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }
        if (best.gain <= 1e-15) best.feature = -1;
        return best;
    }

    const std::vector<const LabelledSample*>& sorted_;
    const PipelineConfig& cfg_;
    int dim_;
    Rng rng_;
};

}  // namespace

ForestModel forest_fit(const std::vector<LabelledSample>& samples, const PipelineConfig& cfg,
                       std::uint64_t seed, int jobs) {
    if (samples.size() < 2) throw ValidationError("forest_fit needs at least 2 samples");
    const std::size_t dim = samples.front().feature.size();
    if (dim == 0) throw ValidationError("forest_fit: empty feature vectors");
    std::size_t yes = 0;
    for (const auto& s : samples) {
        if (s.feature.size() != dim)
            throw ValidationError("forest_fit: inconsistent feature lengths");
        yes += s.label == InteractionLabel::Interaction;
    }
    if (yes == 0) throw ValidationError("forest_fit: training set has no Interaction samples");
    if (yes == samples.size())
        throw ValidationError("forest_fit: training set has no NoInteraction samples");

    std::vector<const LabelledSample*> sorted(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) sorted[i] = &samples[i];
    std::sort(sorted.begin(), sorted.end(), [](const LabelledSample* a, const LabelledSample* b) {
        return std::tie(a->subject_id, a->frame_index, a->laterality) <
               std::tie(b->subject_id, b->frame_index, b->laterality);
    });

    ForestModel model;
    model.feature_dim = static_cast<int>(dim);
    model.seed = seed;
    model.sample_count = samples.size();
    model.trees.resize(cfg.forest_trees);

    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (int t = 0; t < cfg.forest_trees; ++t)
            model.trees[t] = TreeBuilder(sorted, cfg, static_cast<int>(dim), seed, t).build();
    } else {
        std::vector<std::thread> workers;
        std::atomic<int> next{0};
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    int t = next.fetch_add(1);
                    if (t >= cfg.forest_trees) return;
                    model.trees[t] = TreeBuilder(sorted, cfg, static_cast<int>(dim), seed, t).build();
                }
            });
        }
        for (auto& w : workers) w.join();
    }
    return model;
}

Prediction forest_predict(const ForestModel& model, std::span<const double> feature) {
    if (!model.trained()) throw ValidationError("forest_predict: model is untrained");
    if (feature.size() != static_cast<std::size_t>(model.feature_dim))
        throw ValidationError("forest_predict: feature length " + std::to_string(feature.size()) +
                              " != model dimension " + std::to_string(model.feature_dim));
    std::size_t votes_yes = 0;
    for (const auto& tree : model.trees) {
        std::uint32_t node = 0;
        while (tree.nodes[node].feature >= 0) {
            const TreeNode& n = tree.nodes[node];
            node = feature[n.feature] <= n.threshold ? n.left : n.right;
        }
        votes_yes += tree.nodes[node].count_yes > tree.nodes[node].count_no;
    }
    Prediction p;
    p.vote_fraction = static_cast<double>(votes_yes) / model.trees.size();
    p.label = 2 * votes_yes > model.trees.size() ? InteractionLabel::Interaction
                                                 : InteractionLabel::NoInteraction;
    return p;
}

namespace {

constexpr char kForestMagic[4] = {'R', 'F', 'M', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("forest model file truncated");
}

}  // namespace

void save_forest(const std::string& path, const ForestModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write forest model file: " + path);
    out.write(kForestMagic, 4);
    write_pod(out, std::uint32_t{1});
    write_pod(out, static_cast<std::uint32_t>(model.feature_dim));
    write_pod(out, static_cast<std::uint32_t>(model.trees.size()));
    write_pod(out, model.seed);
    write_pod(out, model.sample_count);
    for (const auto& tree : model.trees) {
        write_pod(out, static_cast<std::uint32_t>(tree.nodes.size()));
        for (const auto& n : tree.nodes) {
            write_pod(out, n.feature);
            write_pod(out, n.threshold);
            write_pod(out, n.left);
            write_pod(out, n.right);
            write_pod(out, n.count_no);
            write_pod(out, n.count_yes);
        }
    }
}

ForestModel load_forest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open forest model file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kForestMagic, 4) != 0)
        throw ConfigError("not a forest model file: " + path);
    std::uint32_t version = 0, dim = 0, n_trees = 0;
    read_pod(in, version);
    if (version != 1) throw ConfigError("unsupported forest model version");
    read_pod(in, dim);
    read_pod(in, n_trees);
    ForestModel model;
    model.feature_dim = static_cast<int>(dim);
    read_pod(in, model.seed);
    read_pod(in, model.sample_count);
    model.trees.resize(n_trees);
    for (auto& tree : model.trees) {
        std::uint32_t n_nodes = 0;
        read_pod(in, n_nodes);
        tree.nodes.resize(n_nodes);
        for (auto& n : tree.nodes) {
            read_pod(in, n.feature);
            read_pod(in, n.threshold);
            read_pod(in, n.left);
            read_pod(in, n.right);
            read_pod(in, n.count_no);
            read_pod(in, n.count_yes);
        }
    }
    return model;
}

AblationViews feature_ablation_views(std::span<const double> full_feature) {
    if (full_feature.size() != 122)
        throw ValidationError("feature_ablation_views expects the assembled 122-dim feature");
    AblationViews v;
    v.flow.assign(full_feature.begin(), full_feature.begin() + 60);
    v.hog.assign(full_feature.begin() + 60, full_feature.begin() + 120);
    v.colour.assign(full_feature.begin() + 120, full_feature.end());
    return v;
}

}  // namespace handuse
