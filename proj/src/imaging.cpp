#include "handuse/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <numbers>

namespace handuse {

namespace {

// Jones & Rehg mixture-of-Gaussians colour models (16 kernels each, RGB
// means / diagonal variances / weights).
struct MogKernel {
    double mean[3];
    double var[3];
    double weight;
};

constexpr MogKernel kSkinKernels[16] = {
    {{73.53, 29.94, 17.76}, {765.40, 121.44, 112.80}, 0.0294},
    {{249.71, 233.94, 217.49}, {39.94, 154.44, 396.05}, 0.0331},
    {{161.68, 116.25, 96.95}, {291.03, 60.48, 162.85}, 0.0654},
    {{186.07, 136.62, 114.40}, {274.95, 64.60, 198.27}, 0.0756},
    {{189.26, 98.37, 51.18}, {633.18, 222.40, 250.69}, 0.0554},
    {{247.00, 152.20, 90.84}, {65.23, 691.53, 609.92}, 0.0314},
    {{150.10, 72.66, 37.76}, {408.63, 200.77, 257.57}, 0.0454},
    {{206.85, 171.09, 102.34}, {530.08, 155.08, 572.79}, 0.0469},
    {{212.78, 152.82, 112.52}, {160.57, 84.52, 243.90}, 0.0956},
    {{234.87, 175.43, 146.13}, {163.80, 121.57, 279.22}, 0.0763},
    {{151.19, 97.74, 51.16}, {425.40, 73.56, 175.11}, 0.1100},
    {{120.52, 77.55, 61.85}, {330.45, 70.34, 151.82}, 0.0676},
    {{192.20, 119.62, 82.13}, {152.76, 92.14, 259.15}, 0.0755},
    {{214.29, 136.08, 75.10}, {204.90, 140.17, 270.19}, 0.0500},
    {{99.57, 54.33, 26.58}, {448.13, 90.18, 151.29}, 0.0667},
    {{238.88, 203.08, 130.11}, {178.38, 156.27, 404.99}, 0.0749},
};

constexpr MogKernel kNonSkinKernels[16] = {
    {{254.37, 254.41, 253.82}, {2.77, 2.81, 5.46}, 0.0637},
    {{9.39, 8.09, 8.52}, {46.84, 33.59, 32.48}, 0.0516},
    {{96.57, 96.95, 91.53}, {280.69, 156.79, 436.58}, 0.0864},
    {{160.44, 162.49, 159.06}, {355.98, 115.89, 591.24}, 0.0636},
    {{74.98, 63.23, 46.33}, {414.84, 245.95, 361.27}, 0.0747},
    {{121.83, 60.88, 18.31}, {2502.24, 1383.53, 237.18}, 0.0365},
    {{202.18, 154.88, 91.04}, {957.42, 1766.94, 1582.52}, 0.0349},
    {{193.06, 201.93, 206.55}, {562.88, 190.23, 447.28}, 0.0649},
    {{51.88, 57.14, 61.55}, {344.11, 191.77, 433.40}, 0.0656},
    {{30.88, 26.84, 25.32}, {222.07, 118.65, 182.41}, 0.1189},
    {{44.97, 85.96, 131.95}, {651.32, 840.52, 963.67}, 0.0362},
    {{236.02, 236.27, 230.70}, {225.03, 117.29, 331.95}, 0.0849},
    {{207.86, 191.20, 164.12}, {494.04, 237.69, 533.52}, 0.0368},
    {{99.83, 148.11, 188.17}, {955.88, 654.95, 916.70}, 0.0389},
    {{135.06, 131.92, 123.10}, {350.35, 130.30, 277.27}, 0.0943},
    {{135.96, 103.89, 66.88}, {806.44, 642.20, 350.36}, 0.0477},
};

double mog_likelihood(const MogKernel* kernels, double r, double g, double b) {
    double total = 0.0;
    for (int k = 0; k < 16; ++k) {
        const MogKernel& kn = kernels[k];
        double e = 0.0;
        double norm = 1.0;
        const double x[3] = {r, g, b};
        for (int c = 0; c < 3; ++c) {
            double d = x[c] - kn.mean[c];
            e += d * d / kn.var[c];
            norm *= 2.0 * std::numbers::pi * kn.var[c];
        }
        total += kn.weight * std::exp(-0.5 * e) / std::sqrt(norm);
    }
    return total;
}

}  // namespace

SkinModel::SkinModel(std::vector<double> lut) : lut_(std::move(lut)) {
    if (lut_.size() != kTableSize)
        throw ValidationError("skin model table must have 32768 entries");
    for (double p : lut_)
        if (!(p >= 0.0 && p <= 1.0))
            throw ValidationError("skin model probabilities must be in [0,1]");
}

SkinModel SkinModel::builtin() {
    std::vector<double> lut(kTableSize);
    for (int ri = 0; ri < 32; ++ri) {
        for (int gi = 0; gi < 32; ++gi) {
            for (int bi = 0; bi < 32; ++bi) {
                double r = ri * 8 + 3.5, g = gi * 8 + 3.5, b = bi * 8 + 3.5;
                double ls = mog_likelihood(kSkinKernels, r, g, b);
                double ln = mog_likelihood(kNonSkinKernels, r, g, b);
                double denom = ls + ln;
                lut[static_cast<std::size_t>(ri) << 10 | gi << 5 | bi] =
                    denom > 1e-300 ? ls / denom : 0.0;
            }
        }
    }
    return SkinModel(std::move(lut));
}

SkinModel SkinModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open skin model file: " + path);
    std::vector<double> lut;
    lut.reserve(kTableSize);
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            lut.push_back(std::stod(line));
        }
    } else {
        lut.resize(kTableSize);
        in.read(reinterpret_cast<char*>(lut.data()), kTableSize * sizeof(double));
        if (in.gcount() != static_cast<std::streamsize>(kTableSize * sizeof(double)))
            throw IoError("skin model file truncated: " + path);
    }
    return SkinModel(std::move(lut));
}

void SkinModel::save_binary(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write skin model file: " + path);
    out.write(reinterpret_cast<const char*>(lut_.data()), kTableSize * sizeof(double));
}

void SkinModel::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write skin model file: " + path);
    out.precision(17);
    for (double p : lut_) out << p << "\n";
}

GrayImage to_gray(const FrameImage& frame) {
    frame.validate();
    GrayImage g(frame.width, frame.height);
    const std::uint8_t* p = frame.pixels.data();
    for (std::size_t i = 0; i < g.values.size(); ++i, p += 3)
        g.values[i] = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
    return g;
}

HsvImage rgb_to_hsv(const FrameImage& frame) {
    frame.validate();
    HsvImage out;
    out.width = frame.width;
    out.height = frame.height;
    std::size_t n = static_cast<std::size_t>(frame.width) * frame.height;
    out.h.resize(n);
    out.s.resize(n);
    out.v.resize(n);
    const std::uint8_t* p = frame.pixels.data();
    for (std::size_t i = 0; i < n; ++i, p += 3) {
        double r = p[0] / 255.0, g = p[1] / 255.0, b = p[2] / 255.0;
        double mx = std::max({r, g, b});
        double mn = std::min({r, g, b});
        double delta = mx - mn;
        out.v[i] = mx;
        out.s[i] = mx > 0.0 ? delta / mx : 0.0;
        double h = 0.0;
        if (delta > 0.0) {
            if (mx == r)
                h = 60.0 * ((g - b) / delta);
            else if (mx == g)
                h = 60.0 * ((b - r) / delta + 2.0);
            else
                h = 60.0 * ((r - g) / delta + 4.0);
            if (h < 0) h += 360.0;
            if (h >= 360.0) h -= 360.0;
        }
        out.h[i] = h;
    }
    return out;
}

FrameImage crop_frame(const FrameImage& frame, const BoundingBox& box) {
    BoundingBox c = clamp_to_frame(box, frame.width, frame.height);
    FrameImage out = make_frame(frame.index, c.w, c.h, 0.0);
    out.timestamp_s = frame.timestamp_s;
    for (int y = 0; y < c.h; ++y) {
        const std::uint8_t* src = &frame.pixels[3 * (static_cast<std::size_t>(c.y + y) * frame.width + c.x)];
        std::memcpy(&out.pixels[3 * static_cast<std::size_t>(y) * c.w], src, static_cast<std::size_t>(c.w) * 3);
    }
    return out;
}

double bilinear_sample(const GrayImage& img, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    int x0 = static_cast<int>(x);
    int y0 = static_cast<int>(y);
    int x1 = std::min(x0 + 1, img.width - 1);
    int y1 = std::min(y0 + 1, img.height - 1);
    double fx = x - x0, fy = y - y0;
    double top = img.at(x0, y0) * (1 - fx) + img.at(x1, y0) * fx;
    double bot = img.at(x0, y1) * (1 - fx) + img.at(x1, y1) * fx;
    return top * (1 - fy) + bot * fy;
}

GrayImage resize_bilinear(const GrayImage& src, int out_w, int out_h) {
    GrayImage out(out_w, out_h);
    double sx = static_cast<double>(src.width) / out_w;
    double sy = static_cast<double>(src.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            out.set(x, y, bilinear_sample(src, fx, fy));
        }
    }
    return out;
}

BinaryMask back_project(const FrameImage& frame, const SkinModel& model, double threshold_frac) {
    if (!(threshold_frac > 0.0 && threshold_frac <= 1.0))
        throw ValidationError("back_project threshold_frac must be in (0,1]");
    std::size_t n = static_cast<std::size_t>(frame.width) * frame.height;
    std::vector<double> prob(n);
    const std::uint8_t* p = frame.pixels.data();
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i, p += 3) {
        prob[i] = model.probability(p[0], p[1], p[2]);
        mx = std::max(mx, prob[i]);
    }
    BinaryMask mask(frame.width, frame.height);
    if (mx <= 0.0) return mask;
    double thr = threshold_frac * mx;
    for (std::size_t i = 0; i < n; ++i) mask.bits[i] = prob[i] >= thr ? 1 : 0;
    return mask;
}

namespace {

// Separable sliding-window OR / AND. Outside-of-image counts as background
// for dilation and as foreground for erosion, so closing leaves solid shapes
// at the image border intact.
BinaryMask morph_pass(const BinaryMask& mask, int radius, bool dilate) {
    const int w = mask.width, h = mask.height;
    BinaryMask tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int lo = std::max(0, x - radius), hi = std::min(w - 1, x + radius);
            bool hit = dilate ? false : true;
            for (int i = lo; i <= hi; ++i) {
                bool v = mask.get(i, y);
                if (dilate) hit = hit || v;
                else hit = hit && v;
            }
            tmp.set(x, y, hit);
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int lo = std::max(0, y - radius), hi = std::min(h - 1, y + radius);
            bool hit = dilate ? false : true;
            for (int i = lo; i <= hi; ++i) {
                bool v = tmp.get(x, i);
                if (dilate) hit = hit || v;
                else hit = hit && v;
            }
            out.set(x, y, hit);
        }
    }
    return out;
}

}  // namespace

BinaryMask morph_dilate(const BinaryMask& mask, int radius) {
    if (radius < 1) throw ValidationError("morphology radius must be >= 1");
    return morph_pass(mask, radius, true);
}

BinaryMask morph_erode(const BinaryMask& mask, int radius) {
    if (radius < 1) throw ValidationError("morphology radius must be >= 1");
    return morph_pass(mask, radius, false);
}

BinaryMask morph_close(const BinaryMask& mask, int radius, int iterations) {
    BinaryMask out = mask;
    for (int i = 0; i < iterations; ++i) out = morph_erode(morph_dilate(out, radius), radius);
    return out;
}

namespace {

// Moore neighbourhood in clockwise order (y grows downward).
constexpr int kOffX[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kOffY[8] = {0, -1, -1, -1, 0, 1, 1, 1};

std::vector<PointI> trace_boundary(const BinaryMask& mask, const std::vector<int>& label,
                                   int comp, PointI start) {
    auto inside = [&](int x, int y) {
        return x >= 0 && x < mask.width && y >= 0 && y < mask.height &&
               label[static_cast<std::size_t>(y) * mask.width + x] == comp;
    };
    std::vector<PointI> chain;
    chain.push_back(start);
    PointI cur = start;
    int back = 0;  // entered from the west on the first step
    const std::size_t guard = mask.bits.size() * 4 + 16;
    for (std::size_t iter = 0; iter < guard; ++iter) {
        bool moved = false;
        for (int k = 1; k <= 8; ++k) {
            int j = (back + k) % 8;
            int nx = cur.x + kOffX[j], ny = cur.y + kOffY[j];
            if (inside(nx, ny)) {
                // next backtrack: direction from the new pixel toward the last
                // background pixel scanned before it
                int px = cur.x + kOffX[(j + 7) % 8], py = cur.y + kOffY[(j + 7) % 8];
                int bj = 0;
                for (int d = 0; d < 8; ++d)
                    if (nx + kOffX[d] == px && ny + kOffY[d] == py) bj = d;
                cur = {nx, ny};
                back = bj;
                moved = true;
                break;
            }
        }
        if (!moved) break;  // isolated pixel
        if (cur.x == start.x && cur.y == start.y && back == 0) break;
        chain.push_back(cur);
    }
    return chain;
}

}  // namespace

std::vector<Contour> find_contours(const BinaryMask& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<Contour> out;
    int comp = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.get(x, y) || label[static_cast<std::size_t>(y) * w + x] >= 0) continue;
            Contour c;
            std::deque<PointI> queue{{x, y}};
            label[static_cast<std::size_t>(y) * w + x] = comp;
            while (!queue.empty()) {
                PointI p = queue.front();
                queue.pop_front();
                c.pixels.push_back(p);
                for (int d = 0; d < 8; ++d) {
                    int nx = p.x + kOffX[d], ny = p.y + kOffY[d];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    std::size_t idx = static_cast<std::size_t>(ny) * w + nx;
                    if (mask.get(nx, ny) && label[idx] < 0) {
                        label[idx] = comp;
                        queue.push_back({nx, ny});
                    }
                }
            }
            c.boundary = trace_boundary(mask, label, comp, {x, y});
            c.area = static_cast<double>(c.pixels.size());
            double len = 0.0;
            if (c.boundary.size() > 1) {
                for (std::size_t i = 0; i < c.boundary.size(); ++i) {
                    const PointI& a = c.boundary[i];
                    const PointI& b = c.boundary[(i + 1) % c.boundary.size()];
                    int dx = b.x - a.x, dy = b.y - a.y;
                    len += (dx != 0 && dy != 0) ? std::numbers::sqrt2 : 1.0;
                }
            }
            c.arc_length = len;
            out.push_back(std::move(c));
            ++comp;
        }
    }
    return out;
}

BinaryMask edge_map(const GrayImage& gray, double threshold_frac) {
    if (!(threshold_frac > 0.0 && threshold_frac <= 1.0))
        throw ValidationError("edge_map threshold_frac must be in (0,1]");
    const int w = gray.width, h = gray.height;
    std::vector<double> mag(static_cast<std::size_t>(w) * h);
    double mx = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double gx = (gray.at(std::min(x + 1, w - 1), y) - gray.at(std::max(x - 1, 0), y)) * 0.5;
            double gy = (gray.at(x, std::min(y + 1, h - 1)) - gray.at(x, std::max(y - 1, 0))) * 0.5;
            double m = std::hypot(gx, gy);
            mag[static_cast<std::size_t>(y) * w + x] = m;
            mx = std::max(mx, m);
        }
    }
    BinaryMask out(w, h);
    if (mx <= 0.0) return out;
    double thr = threshold_frac * mx;
    for (std::size_t i = 0; i < mag.size(); ++i) out.bits[i] = mag[i] >= thr ? 1 : 0;
    return out;
}

namespace {

constexpr int kFlowLevels = 3;
constexpr int kBlock = 8;
constexpr int kSearch = 4;

GrayImage downsample2(const GrayImage& src) {
    GrayImage out(std::max(1, src.width / 2), std::max(1, src.height / 2));
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            int x0 = 2 * x, y0 = 2 * y;
            int x1 = std::min(x0 + 1, src.width - 1), y1 = std::min(y0 + 1, src.height - 1);
            out.set(x, y, 0.25 * (src.at(x0, y0) + src.at(x1, y0) + src.at(x0, y1) + src.at(x1, y1)));
        }
    }
    return out;
}

FlowField upsample_flow(const FlowField& src, int out_w, int out_h) {
    FlowField out(out_w, out_h);
    double sx = static_cast<double>(src.width) / out_w;
    double sy = static_cast<double>(src.height) / out_h;
    auto sample = [&](const std::vector<float>& plane, double x, double y) {
        x = std::clamp(x, 0.0, static_cast<double>(src.width - 1));
        y = std::clamp(y, 0.0, static_cast<double>(src.height - 1));
        int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
        int x1 = std::min(x0 + 1, src.width - 1), y1 = std::min(y0 + 1, src.height - 1);
        double fx = x - x0, fy = y - y0;
        auto at = [&](int xx, int yy) { return plane[static_cast<std::size_t>(yy) * src.width + xx]; };
        return (at(x0, y0) * (1 - fx) + at(x1, y0) * fx) * (1 - fy) +
               (at(x0, y1) * (1 - fx) + at(x1, y1) * fx) * fy;
    };
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            std::size_t i = static_cast<std::size_t>(y) * out_w + x;
            out.dx[i] = static_cast<float>(2.0 * sample(src.dx, fx, fy));
            out.dy[i] = static_cast<float>(2.0 * sample(src.dy, fx, fy));
        }
    }
    return out;
}

// Mean absolute difference over the in-bounds part of the displaced block;
// +inf when the displaced block has no overlap with the image.
double block_cost(const GrayImage& prev, const GrayImage& curr, int bx, int by, int bw, int bh,
                  int dx, int dy) {
    double sum = 0.0;
    int count = 0;
    for (int y = by; y < by + bh; ++y) {
        int cy = y + dy;
        if (cy < 0 || cy >= curr.height) continue;
        for (int x = bx; x < bx + bw; ++x) {
            int cx = x + dx;
            if (cx < 0 || cx >= curr.width) continue;
            sum += std::abs(prev.at(x, y) - curr.at(cx, cy));
            ++count;
        }
    }
    if (count == 0) return std::numeric_limits<double>::infinity();
    return sum / count;
}

FlowField match_level(const GrayImage& prev, const GrayImage& curr, const FlowField* init) {
    FlowField out(prev.width, prev.height);
    for (int by = 0; by < prev.height; by += kBlock) {
        int bh = std::min(kBlock, prev.height - by);
        for (int bx = 0; bx < prev.width; bx += kBlock) {
            int bw = std::min(kBlock, prev.width - bx);
            int gx = 0, gy = 0;
            if (init) {
                std::size_t ci = static_cast<std::size_t>(std::min(by + bh / 2, init->height - 1)) * init->width +
                                 std::min(bx + bw / 2, init->width - 1);
                gx = static_cast<int>(std::lround(init->dx[ci]));
                gy = static_cast<int>(std::lround(init->dy[ci]));
            }
            int best_dx = gx, best_dy = gy;
            double best = block_cost(prev, curr, bx, by, bw, bh, gx, gy);
            for (int dy = -kSearch; dy <= kSearch; ++dy) {
                for (int dx = -kSearch; dx <= kSearch; ++dx) {
                    if (dx == 0 && dy == 0) continue;  // guess already scored
                    double c = block_cost(prev, curr, bx, by, bw, bh, gx + dx, gy + dy);
                    if (c < best) {
                        best = c;
                        best_dx = gx + dx;
                        best_dy = gy + dy;
                    }
                }
            }
            if (std::isinf(best)) {
                best_dx = 0;
                best_dy = 0;
            }
            for (int y = by; y < by + bh; ++y) {
                for (int x = bx; x < bx + bw; ++x) {
                    std::size_t i = static_cast<std::size_t>(y) * out.width + x;
                    out.dx[i] = static_cast<float>(best_dx);
                    out.dy[i] = static_cast<float>(best_dy);
                }
            }
        }
    }
    return out;
}

}  // namespace

FlowField dense_flow(const GrayImage& prev, const GrayImage& curr) {
    if (prev.width != curr.width || prev.height != curr.height)
        throw ValidationError("dense_flow: frame dimensions differ");
    std::vector<GrayImage> pp{prev}, cp{curr};
    for (int l = 1; l < kFlowLevels; ++l) {
        if (std::min(pp.back().width, pp.back().height) < 2 * kBlock) break;
        pp.push_back(downsample2(pp.back()));
        cp.push_back(downsample2(cp.back()));
    }
    FlowField field;
    for (int l = static_cast<int>(pp.size()) - 1; l >= 0; --l) {
        if (l == static_cast<int>(pp.size()) - 1) {
            field = match_level(pp[l], cp[l], nullptr);
        } else {
            FlowField init = upsample_flow(field, pp[l].width, pp[l].height);
            field = match_level(pp[l], cp[l], &init);
        }
    }
    return field;
}

}  // namespace handuse
