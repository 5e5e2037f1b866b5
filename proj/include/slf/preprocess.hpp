#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "slf/core.hpp"
#include "slf/simkit.hpp"

namespace slf::preprocess {

/// Fixed-length cut of a measurement track.
struct Window {
    std::vector<Vec2> points;  // length tau
    int track_id = 0;
    int start_index = 1;  // 1-based index of points[0] in the source track
};

/// Window after heading normalization: the first segment lies on the
/// positive x-axis and every consecutive segment length is preserved.
struct RotatedWindow {
    std::vector<Vec2> points;
    double alpha = 0.0;  // radians
};

/// 2(tau-1) relative-displacement scalars, oldest to newest, x then y per
/// slot. Entries are kMissing where the padded window has no measurement.
using FeatureVector = std::vector<double>;

struct Sample {
    FeatureVector features;
    Vec2 target;  // position error after rotation, meters
    double alpha = 0.0;
    int track_id = 0;
    int window_index = 0;  // == start_index of the parent window
    int k = 1;             // in-window time, 1..tau
};

struct Dataset {
    std::vector<Sample> samples;
    int skipped_windows = 0;  // degenerate rotation basis
};

inline Vec2 rotate_vec(Vec2 v, double alpha) {
    const double c = std::cos(alpha);
    const double s = std::sin(alpha);
    return {v.x * c - v.y * s, v.y * c + v.x * s};
}

inline Vec2 inverse_rotate_vec(Vec2 t, double alpha) {
    const double c = std::cos(alpha);
    const double s = std::sin(alpha);
    return {t.x * c + t.y * s, t.y * c - t.x * s};
}

/// Angle that maps the segment z1->z2 onto the non-negative x-axis.
inline double rotation_angle(Vec2 z1, Vec2 z2) {
    if (z1 == z2) throw DegenerateBasis("rotation_angle: identical basis points");
    return -std::atan2(z2.y - z1.y, z2.x - z1.x);
}

inline std::vector<Window> window_tracks(const std::vector<Vec2>& seq, int tau,
                                         int track_id = 0) {
    if (tau < 2) throw InvalidArgument("window_tracks: tau must be >= 2");
    const int t_len = static_cast<int>(seq.size());
    if (t_len < tau)
        throw InsufficientLength("window_tracks: sequence shorter than tau");
    std::vector<Window> out;
    out.reserve(static_cast<std::size_t>(t_len - tau + 1));
    for (int start = 1; start <= t_len - tau + 1; ++start) {
        Window w;
        w.track_id = track_id;
        w.start_index = start;
        w.points.assign(seq.begin() + (start - 1), seq.begin() + (start - 1 + tau));
        out.push_back(std::move(w));
    }
    return out;
}

/// Anchors the window at its first point and accumulates rotated increments,
/// so the first segment lands on the horizontal ray from points[0].
inline RotatedWindow rotate_window(const Window& w) {
    RotatedWindow rw;
    rw.alpha = rotation_angle(w.points.at(0), w.points.at(1));
    rw.points.resize(w.points.size());
    rw.points[0] = w.points[0];
    for (std::size_t i = 1; i < w.points.size(); ++i)
        rw.points[i] = rotate_vec(w.points[i] - w.points[i - 1], rw.alpha) + rw.points[i - 1];
    return rw;
}

/// Features for `count` real points padded to a `tau`-slot window on the old
/// side. The current measurement occupies the last slot; each earlier slot
/// contributes its displacement from the current one.
inline FeatureVector padded_features(const Vec2* pts, int count, int tau) {
    const Vec2 cur = pts[count - 1];
    FeatureVector f(static_cast<std::size_t>(2 * (tau - 1)), kMissing);
    const int pad = tau - count;
    for (int slot = pad; slot < tau - 1; ++slot) {
        const Vec2 d = pts[slot - pad] - cur;
        f[static_cast<std::size_t>(2 * slot)] = d.x;
        f[static_cast<std::size_t>(2 * slot + 1)] = d.y;
    }
    return f;
}

inline FeatureVector extract_features(const RotatedWindow& rw, int k) {
    const int tau = static_cast<int>(rw.points.size());
    if (k < 1 || k > tau)
        throw InvalidArgument("extract_features: k out of range");
    return padded_features(rw.points.data(), k, tau);
}

/// Measurement-to-truth error expressed in the rotated frame.
inline Vec2 rotate_target(Vec2 x, Vec2 z, double alpha) {
    return rotate_vec(x - z, alpha);
}

/// With `rotate` false every window keeps alpha = 0 and raw geometry; this
/// is the heading-normalization ablation, not a separate pipeline.
inline Dataset build_dataset(const std::vector<simkit::TrackPair>& tracks, int tau,
                             bool rotate = true) {
    Dataset ds;
    for (const auto& track : tracks) {
        std::vector<Vec2> zs(track.meas.size());
        for (std::size_t i = 0; i < track.meas.size(); ++i)
            zs[i] = track.meas[i].position();
        for (Window& w : window_tracks(zs, tau, track.track_id)) {
            RotatedWindow rw;
            if (rotate) {
                try {
                    rw = rotate_window(w);
                } catch (const DegenerateBasis&) {
                    ++ds.skipped_windows;
                    continue;
                }
            } else {
                rw.alpha = 0.0;
                rw.points = w.points;
            }
            for (int k = 1; k <= tau; ++k) {
                const int abs_idx = w.start_index + k - 1;  // 1-based
                Sample s;
                s.features = padded_features(rw.points.data(), k, tau);
                s.target = rotate_target(track.truth[static_cast<std::size_t>(abs_idx - 1)].position(),
                                         zs[static_cast<std::size_t>(abs_idx - 1)], rw.alpha);
                s.alpha = rw.alpha;
                s.track_id = track.track_id;
                s.window_index = w.start_index;
                s.k = k;
                ds.samples.push_back(std::move(s));
            }
        }
    }
    return ds;
}

}  // namespace slf::preprocess
