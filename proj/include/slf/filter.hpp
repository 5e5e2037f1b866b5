#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "slf/core.hpp"
#include "slf/gbt.hpp"
#include "slf/preprocess.hpp"
#include "slf/simkit.hpp"

namespace slf {

/// One boosted model per output coordinate over shared window features.
struct SlfModel {
    gbt::BoostedModel model_x;
    gbt::BoostedModel model_y;
    int tau = 20;
    gbt::TrainParams train_params;
    bool rotation_enabled = true;
    double training_rmse = 0.0;  // pooled 2-D RMSE over all training samples
    int skipped_windows = 0;
};

struct PointEstimate {
    Vec2 position;
    bool raw_fallback = false;  // no rotation basis: k = 1 or degenerate window
};

inline SlfModel slf_train(const std::vector<simkit::TrackPair>& tracks, int tau,
                          const gbt::TrainParams& params, bool rotate = true) {
    const preprocess::Dataset ds = preprocess::build_dataset(tracks, tau, rotate);
    if (ds.samples.empty()) throw InvalidArgument("slf_train: empty dataset");

    const std::size_t n = ds.samples.size();
    const std::size_t dim = ds.samples.front().features.size();
    gbt::FeatureMatrix x(n, dim);
    std::vector<double> tx(n), ty(n);
    for (std::size_t i = 0; i < n; ++i) {
        const preprocess::Sample& s = ds.samples[i];
        std::copy(s.features.begin(), s.features.end(), x.data.begin() + i * dim);
        tx[i] = s.target.x;
        ty[i] = s.target.y;
    }

    gbt::Booster booster(x);
    std::vector<double> px, py;
    SlfModel m;
    m.model_x = booster.train(tx, params, &px);
    m.model_y = booster.train(ty, params, &py);
    m.tau = tau;
    m.train_params = params;
    m.rotation_enabled = rotate;
    m.skipped_windows = ds.skipped_windows;

    double se = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ex = px[i] - tx[i];
        const double ey = py[i] - ty[i];
        se += ex * ex + ey * ey;
    }
    m.training_rmse = std::sqrt(se / static_cast<double>(n));
    return m;
}

/// Estimate for the newest measurement from the trailing window: rotate,
/// build padded features, predict the rotated error, rotate it back, and
/// add it to the raw measurement.
inline PointEstimate slf_estimate_point(const SlfModel& model,
                                        std::span<const Vec2> recent) {
    if (recent.size() < 2)
        throw InsufficientHistory("slf_estimate_point: need >= 2 measurements");
    if (recent.size() > static_cast<std::size_t>(model.tau))
        recent = recent.last(static_cast<std::size_t>(model.tau));
    const int count = static_cast<int>(recent.size());

    double alpha = 0.0;
    if (model.rotation_enabled) {
        if (recent[0] == recent[1]) return {recent.back(), true};
        alpha = preprocess::rotation_angle(recent[0], recent[1]);
    }

    std::vector<Vec2> rot(recent.size());
    rot[0] = recent[0];
    for (std::size_t i = 1; i < recent.size(); ++i)
        rot[i] = preprocess::rotate_vec(recent[i] - recent[i - 1], alpha) + rot[i - 1];

    const preprocess::FeatureVector features =
        preprocess::padded_features(rot.data(), count, model.tau);
    const Vec2 rotated_err{model.model_x.predict(features),
                           model.model_y.predict(features)};
    const Vec2 err = model.rotation_enabled
                         ? preprocess::inverse_rotate_vec(rotated_err, alpha)
                         : rotated_err;
    return {err + recent.back(), false};
}

/// Causal per-step estimates; the first step has no basis and passes the
/// raw measurement through.
inline std::vector<PointEstimate> slf_filter_track(
    const SlfModel& model, const std::vector<simkit::Measurement>& meas) {
    if (meas.size() < 2)
        throw InsufficientLength("slf_filter_track: need >= 2 measurements");
    std::vector<Vec2> zs(meas.size());
    for (std::size_t i = 0; i < meas.size(); ++i) zs[i] = meas[i].position();

    std::vector<PointEstimate> out;
    out.reserve(meas.size());
    out.push_back({zs[0], true});
    for (std::size_t k = 2; k <= meas.size(); ++k) {
        const std::size_t take = std::min<std::size_t>(k, static_cast<std::size_t>(model.tau));
        out.push_back(slf_estimate_point(
            model, std::span<const Vec2>(zs.data() + (k - take), take)));
    }
    return out;
}

}  // namespace slf
