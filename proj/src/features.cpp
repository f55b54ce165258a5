#include "handuse/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include <Eigen/Dense>

namespace handuse {

RegionTriple make_regions(const HandObservation& obs, int frame_w, int frame_h) {
    if (obs.mask.width != obs.recentred_box.w || obs.mask.height != obs.recentred_box.h)
        throw ValidationError("make_regions: mask dimensions must equal the re-centred box");
    RegionTriple r;
    r.frame_w = frame_w;
    r.frame_h = frame_h;
    r.box = clamp_to_frame(obs.recentred_box, frame_w, frame_h);
    r.hand = obs.mask;
    return r;
}

std::array<RegionHistogram, 3> flow_histograms(const FlowField& flow, const RegionTriple& regions,
                                               const PipelineConfig& cfg) {
    if (flow.width != regions.frame_w || flow.height != regions.frame_h)
        throw ValidationError("flow_histograms: flow dimensions must match the frame");
    const int bins = cfg.flow_bins;
    std::array<RegionHistogram, 3> out;
    for (auto& h : out) {
        h.magnitude.assign(bins, 0.0);
        h.direction.assign(bins, 0.0);
    }
    const double diag = std::hypot(static_cast<double>(flow.width), static_cast<double>(flow.height));
    const double mag_cap = cfg.flow_mag_cap_frac * diag;
    const double mag_bin = mag_cap / bins;
    const double dir_bin = 360.0 / bins;

    for (int y = 0; y < flow.height; ++y) {
        for (int x = 0; x < flow.width; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * flow.width + x;
            auto& h = out[static_cast<int>(regions.region_of(x, y))];
            double dx = flow.dx[i], dy = flow.dy[i];
            double mag = std::hypot(dx, dy);
            int mb = mag_bin > 0 ? std::min(bins - 1, static_cast<int>(mag / mag_bin)) : 0;
            int db = std::min(bins - 1, static_cast<int>(vector_angle_deg(dx, dy) / dir_bin));
            h.magnitude[mb] += 1.0;
            h.direction[db] += 1.0;
            ++h.pixel_count;
        }
    }
    for (auto& h : out) {
        if (h.pixel_count == 0) continue;
        for (auto& v : h.magnitude) v /= h.pixel_count;
        for (auto& v : h.direction) v /= h.pixel_count;
    }
    return out;
}

FlowFeature flow_feature(const FlowField& flow, const RegionTriple& regions,
                         const PipelineConfig& cfg) {
    auto hists = flow_histograms(flow, regions, cfg);
    FlowFeature f;
    f.valid = hists[0].pixel_count > 0 && hists[1].pixel_count > 0 && hists[2].pixel_count > 0;
    f.values.reserve(4 * cfg.flow_bins);
    auto push_diff = [&](const RegionHistogram& a, const RegionHistogram& b) {
        for (int i = 0; i < cfg.flow_bins; ++i) f.values.push_back(a.magnitude[i] - b.magnitude[i]);
        for (int i = 0; i < cfg.flow_bins; ++i) f.values.push_back(a.direction[i] - b.direction[i]);
    };
    const auto& hand = hists[static_cast<int>(Region::Hand)];
    const auto& box = hists[static_cast<int>(Region::Box)];
    const auto& bg = hists[static_cast<int>(Region::Background)];
    push_diff(hand, box);
    push_diff(bg, box);
    return f;
}

namespace {

constexpr int kHogH = 48;    // 10% of 480p frame height
constexpr int kHogW = 128;   // 15% of 854 px frame width
constexpr int kHogCell = 8;
constexpr int kHogBins = 10;
constexpr double kHogEps = 1e-6;

}  // namespace

std::optional<std::vector<double>> hog_raw(const FrameImage& frame, const BoundingBox& box,
                                           const PipelineConfig& cfg) {
    BoundingBox c = clamp_to_frame(box, frame.width, frame.height);
    if (c.w < kHogCell || c.h < kHogCell) return std::nullopt;
    GrayImage crop = to_gray(crop_frame(frame, c));
    GrayImage img = resize_bilinear(crop, kHogW, kHogH);

    const int cells_x = kHogW / kHogCell, cells_y = kHogH / kHogCell;
    std::vector<double> feat(static_cast<std::size_t>(cells_x) * cells_y * kHogBins, 0.0);
    for (int y = 0; y < kHogH; ++y) {
        for (int x = 0; x < kHogW; ++x) {
            double gx = (img.at(std::min(x + 1, kHogW - 1), y) - img.at(std::max(x - 1, 0), y)) * 0.5;
            double gy = (img.at(x, std::min(y + 1, kHogH - 1)) - img.at(x, std::max(y - 1, 0))) * 0.5;
            double mag = std::hypot(gx, gy);
            if (mag <= 0.0) continue;
            double ang = std::atan2(gy, gx);  // unsigned orientation in [0, pi)
            if (ang < 0) ang += std::numbers::pi;
            if (ang >= std::numbers::pi) ang -= std::numbers::pi;
            int bin = std::min(kHogBins - 1, static_cast<int>(ang / std::numbers::pi * kHogBins));
            std::size_t cell = static_cast<std::size_t>(y / kHogCell) * cells_x + x / kHogCell;
            feat[cell * kHogBins + bin] += mag;
        }
    }
    for (int cell = 0; cell < cells_x * cells_y; ++cell) {
        double* v = feat.data() + static_cast<std::size_t>(cell) * kHogBins;
        double norm_sq = 0.0;
        for (int b = 0; b < kHogBins; ++b) norm_sq += v[b] * v[b];
        double norm = std::sqrt(norm_sq + kHogEps * kHogEps);
        for (int b = 0; b < kHogBins; ++b) v[b] /= norm;
    }
    if (static_cast<int>(feat.size()) != cfg.hog_raw_dim)
        throw ValidationError("hog_raw: grid does not produce hog_raw_dim values");
    return feat;
}

PcaModel pca_fit(const std::vector<std::vector<double>>& samples, int dim, std::uint64_t) {
    if (dim < 1) throw ValidationError("pca_fit: dim must be >= 1");
    if (samples.size() < static_cast<std::size_t>(dim))
        throw ValidationError("pca_fit: need at least " + std::to_string(dim) + " samples, got " +
                              std::to_string(samples.size()));
    const std::size_t n = samples.size();
    const std::size_t d = samples.front().size();
    if (d < static_cast<std::size_t>(dim))
        throw ValidationError("pca_fit: dim exceeds the input dimensionality");
    for (const auto& s : samples)
        if (s.size() != d) throw ValidationError("pca_fit: inconsistent sample lengths");

    Eigen::MatrixXd x(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) x(i, j) = samples[i][j];
    Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw ValidationError("pca_fit: eigendecomposition failed");

    PcaModel model;
    model.in_dim = static_cast<int>(d);
    model.out_dim = dim;
    model.mean.assign(mean.data(), mean.data() + d);
    model.components.resize(static_cast<std::size_t>(dim) * d);
    model.explained_variance.resize(dim);
    // Eigen orders eigenvalues ascending; take the top `dim` in reverse.
    for (int k = 0; k < dim; ++k) {
        int src = static_cast<int>(d) - 1 - k;
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        int max_idx = 0;
        for (int j = 1; j < v.size(); ++j)
            if (std::abs(v[j]) > std::abs(v[max_idx])) max_idx = j;
        if (v[max_idx] < 0) v = -v;
        for (std::size_t j = 0; j < d; ++j)
            model.components[static_cast<std::size_t>(k) * d + j] = v[j];
        model.explained_variance[k] = std::max(0.0, solver.eigenvalues()[src]);
    }
    return model;
}

std::vector<double> pca_project(const PcaModel& model, std::span<const double> raw) {
    if (!model.trained()) throw ValidationError("pca_project: model is untrained");
    if (raw.size() != static_cast<std::size_t>(model.in_dim))
        throw ValidationError("pca_project: input length " + std::to_string(raw.size()) +
                              " != model dimension " + std::to_string(model.in_dim));
    std::vector<double> out(model.out_dim, 0.0);
    for (int k = 0; k < model.out_dim; ++k) {
        auto comp = model.component(k);
        double acc = 0.0;
        for (int j = 0; j < model.in_dim; ++j) acc += comp[j] * (raw[j] - model.mean[j]);
        out[k] = acc;
    }
    return out;
}

namespace {

constexpr char kPcaMagic[4] = {'P', 'C', 'A', '1'};

}  // namespace

void save_pca(const std::string& path, const PcaModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write PCA model file: " + path);
    out.write(kPcaMagic, 4);
    std::uint32_t version = 1, in_dim = model.in_dim, out_dim = model.out_dim;
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&in_dim), 4);
    out.write(reinterpret_cast<const char*>(&out_dim), 4);
    out.write(reinterpret_cast<const char*>(model.mean.data()), model.mean.size() * 8);
    out.write(reinterpret_cast<const char*>(model.components.data()), model.components.size() * 8);
    out.write(reinterpret_cast<const char*>(model.explained_variance.data()),
              model.explained_variance.size() * 8);
}

PcaModel load_pca(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open PCA model file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kPcaMagic, 4) != 0)
        throw ConfigError("not a PCA model file: " + path);
    std::uint32_t version = 0, in_dim = 0, out_dim = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&in_dim), 4);
    in.read(reinterpret_cast<char*>(&out_dim), 4);
    if (!in || version != 1) throw ConfigError("unsupported PCA model version");
    PcaModel model;
    model.in_dim = static_cast<int>(in_dim);
    model.out_dim = static_cast<int>(out_dim);
    model.mean.resize(in_dim);
    model.components.resize(static_cast<std::size_t>(in_dim) * out_dim);
    model.explained_variance.resize(out_dim);
    in.read(reinterpret_cast<char*>(model.mean.data()), model.mean.size() * 8);
    in.read(reinterpret_cast<char*>(model.components.data()), model.components.size() * 8);
    in.read(reinterpret_cast<char*>(model.explained_variance.data()),
            model.explained_variance.size() * 8);
    if (!in) throw IoError("PCA model file truncated: " + path);
    return model;
}

void export_pca_csv(const std::string& path, const PcaModel& model) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write PCA csv: " + path);
    out.precision(17);
    out << "mean";
    for (double v : model.mean) out << "," << v;
    out << "\n";
    for (int k = 0; k < model.out_dim; ++k) {
        out << "component_" << k;
        for (double v : model.component(k)) out << "," << v;
        out << "\n";
    }
    out << "explained_variance";
    for (double v : model.explained_variance) out << "," << v;
    out << "\n";
}

double bhattacharyya_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw ValidationError("bhattacharyya_distance: histogram sizes differ");
    double coeff = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) coeff += std::sqrt(p[i] * q[i]);
    return std::sqrt(std::max(0.0, 1.0 - coeff));
}

ColourDistances colour_distances(const HsvImage& hsv, const RegionTriple& regions,
                                 const PipelineConfig& cfg) {
    if (hsv.width != regions.frame_w || hsv.height != regions.frame_h)
        throw ValidationError("colour_distances: HSV dimensions must match the frame");
    const int nh = cfg.colour_bins_h, ns = cfg.colour_bins_s;
    std::array<std::vector<double>, 3> hist;
    std::array<std::size_t, 3> counts{0, 0, 0};
    for (auto& h : hist) h.assign(static_cast<std::size_t>(nh) * ns, 0.0);

    for (int y = 0; y < hsv.height; ++y) {
        for (int x = 0; x < hsv.width; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * hsv.width + x;
            int r = static_cast<int>(regions.region_of(x, y));
            int hb = std::min(nh - 1, static_cast<int>(hsv.h[i] / 360.0 * nh));
            int sb = std::min(ns - 1, static_cast<int>(hsv.s[i] * ns));
            hist[r][static_cast<std::size_t>(hb) * ns + sb] += 1.0;
            ++counts[r];
        }
    }
    for (int r = 0; r < 3; ++r)
        if (counts[r] > 0)
            for (auto& v : hist[r]) v /= counts[r];

    ColourDistances out;
    out.valid = counts[0] > 0 && counts[1] > 0 && counts[2] > 0;
    if (!out.valid) return out;  // distances stay at 1.0
    out.hand_box = bhattacharyya_distance(hist[static_cast<int>(Region::Hand)],
                                          hist[static_cast<int>(Region::Box)]);
    out.box_background = bhattacharyya_distance(hist[static_cast<int>(Region::Box)],
                                                hist[static_cast<int>(Region::Background)]);
    return out;
}

InteractionFeature assemble(const FlowFeature& flow, const std::vector<double>& hog_pca,
                            const ColourDistances& colour) {
    InteractionFeature f;
    const bool hog_valid = !hog_pca.empty();
    f.valid = flow.valid && colour.valid && hog_valid;
    f.values.reserve(flow.values.size() * 2 + 2);
    f.values.insert(f.values.end(), flow.values.begin(), flow.values.end());
    if (hog_valid)
        f.values.insert(f.values.end(), hog_pca.begin(), hog_pca.end());
    else  // keep the 122-value layout even when the hog stage failed
        f.values.insert(f.values.end(), flow.values.size(), 0.0);
    f.values.push_back(colour.hand_box);
    f.values.push_back(colour.box_background);
    return f;
}

}  // namespace handuse
