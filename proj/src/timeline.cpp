#include "handuse/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace handuse {

Timeline prolong(const Timeline& tl, const PipelineConfig& cfg) {
    Timeline out = tl;
    int carried = 0;
    bool after_interaction = false;
    for (std::size_t t = 0; t < out.states.size(); ++t) {
        switch (out.states[t]) {
            case FrameState::Interaction:
                after_interaction = true;
                carried = 0;
                break;
            case FrameState::NoInteraction:
                after_interaction = false;
                carried = 0;
                break;
            case FrameState::Missing:
                if (after_interaction && carried < cfg.prolong_frames) {
                    out.states[t] = FrameState::Interaction;
                    ++carried;
                } else {
                    out.states[t] = FrameState::NoInteraction;
                    after_interaction = false;
                }
                break;
        }
    }
    return out;
}

std::vector<double> smooth_average(const Timeline& tl, const PipelineConfig& cfg) {
    const std::size_t n = tl.states.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        if (tl.states[t] == FrameState::Missing)
            throw ValidationError("smooth_average: timeline still has Missing frames");
        prefix[t + 1] = prefix[t] + (tl.states[t] == FrameState::Interaction ? 1.0 : 0.0);
    }
    const int w = cfg.smooth_frames;
    const int parity = w % 2;
    std::vector<double> out(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        long lo, hi;  // inclusive window bounds
        if (cfg.smooth_centred) {
            lo = static_cast<long>(t) - w / 2;
            hi = static_cast<long>(t) + (w - 1) / 2;
        } else {
            lo = static_cast<long>(t) - (w - 1);
            hi = static_cast<long>(t);
        }
        bool lo_clamped = lo < 0, hi_clamped = hi >= static_cast<long>(n);
        lo = std::max(lo, 0L);
        hi = std::min(hi, static_cast<long>(n) - 1);
        long len = hi - lo + 1;
        // keep the nominal window parity so symmetric inputs stay constant
        if (len > 1 && (len % 2) != parity) {
            if (lo_clamped) --hi;
            else if (hi_clamped) ++lo;
            len = hi - lo + 1;
        }
        out[t] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(len);
    }
    return out;
}

Timeline smooth_binarize(const Timeline& tl, const PipelineConfig& cfg) {
    std::vector<double> avg = smooth_average(tl, cfg);
    Timeline out = tl;
    if (avg.empty()) return out;
    auto [mn_it, mx_it] = std::minmax_element(avg.begin(), avg.end());
    double mn = *mn_it, mx = *mx_it;
    if (mx - mn >= 1e-9)
        for (auto& v : avg) v = (v - mn) / (mx - mn);
    for (std::size_t t = 0; t < avg.size(); ++t)
        out.states[t] = avg[t] > cfg.binarize_threshold ? FrameState::Interaction
                                                        : FrameState::NoInteraction;
    return out;
}

UseMetrics metrics(const Timeline& tl) {
    if (tl.states.empty()) throw ValidationError("metrics: empty timeline");
    if (tl.fps <= 0) throw ValidationError("metrics: fps must be > 0");
    std::int64_t ones = 0, runs = 0;
    bool in_run = false;
    for (FrameState s : tl.states) {
        if (s == FrameState::Missing)
            throw ValidationError("metrics: timeline must be binary (prolong first)");
        if (s == FrameState::Interaction) {
            ++ones;
            if (!in_run) {
                ++runs;
                in_run = true;
            }
        } else {
            in_run = false;
        }
    }
    UseMetrics m;
    const double total = static_cast<double>(tl.states.size());
    m.interaction_count = runs;
    m.interaction_fraction = static_cast<double>(ones) / total;
    m.mean_duration_s = runs > 0 ? (static_cast<double>(ones) / runs) / tl.fps : 0.0;
    m.interactions_per_hour = static_cast<double>(runs) / (total / tl.fps / 3600.0);
    return m;
}

TimelineSet assign_detections(const std::vector<DecidedObservation>& observations,
                              int frame_count, double fps) {
    if (frame_count < 0) throw ValidationError("assign_detections: negative frame count");
    TimelineSet set;
    for (Laterality lat : {Laterality::Left, Laterality::Right, Laterality::Other}) {
        Timeline& tl = set.of(lat);
        tl.laterality = lat;
        tl.fps = fps;
        tl.states.assign(frame_count, FrameState::Missing);
    }
    std::vector<double> best_conf[3];
    for (auto& b : best_conf)
        b.assign(frame_count, -std::numeric_limits<double>::infinity());
    for (const auto& obs : observations) {
        if (obs.frame_index < 0 || obs.frame_index >= frame_count)
            throw ValidationError("assign_detections: frame index out of range");
        int lat = static_cast<int>(obs.laterality);
        if (obs.confidence > best_conf[lat][obs.frame_index]) {
            best_conf[lat][obs.frame_index] = obs.confidence;
            set.of(obs.laterality).states[obs.frame_index] =
                obs.interaction ? FrameState::Interaction : FrameState::NoInteraction;
        }
    }
    return set;
}

namespace {

char state_char(FrameState s) {
    switch (s) {
        case FrameState::NoInteraction: return '0';
        case FrameState::Interaction: return '1';
        case FrameState::Missing: return 'M';
    }
    return 'M';
}

FrameState state_from(const std::string& s) {
    if (s == "0") return FrameState::NoInteraction;
    if (s == "1") return FrameState::Interaction;
    if (s == "M" || s == "m") return FrameState::Missing;
    throw ValidationError("timeline CSV: bad state value '" + s + "'");
}

}  // namespace

void write_timeline_csv(const std::string& path, const TimelineSet& timelines) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write timeline CSV: " + path);
    out << "frame,time_s,left,right,other\n";
    const std::size_t n = timelines.left.states.size();
    const double fps = timelines.left.fps;
    for (std::size_t t = 0; t < n; ++t) {
        out << t << "," << (fps > 0 ? t / fps : 0.0) << "," << state_char(timelines.left.states[t])
            << "," << state_char(timelines.right.states[t]) << ","
            << state_char(timelines.other.states[t]) << "\n";
    }
}

TimelineSet read_timeline_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open timeline CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("timeline CSV is empty: " + path);
    TimelineSet set;
    set.left.laterality = Laterality::Left;
    set.right.laterality = Laterality::Right;
    set.other.laterality = Laterality::Other;
    double prev_time = -1.0;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string frame_s, time_s, l, r, o;
        if (!std::getline(ss, frame_s, ',') || !std::getline(ss, time_s, ',') ||
            !std::getline(ss, l, ',') || !std::getline(ss, r, ',') || !std::getline(ss, o, ','))
            throw ConfigError("timeline CSV: malformed line " + std::to_string(row));
        set.left.states.push_back(state_from(l));
        set.right.states.push_back(state_from(r));
        set.other.states.push_back(state_from(o));
        double t = std::stod(time_s);
        if (prev_time >= 0 && t > prev_time) {
            double fps = 1.0 / (t - prev_time);
            set.left.fps = set.right.fps = set.other.fps = fps;
        }
        prev_time = t;
    }
    return set;
}

}  // namespace handuse
