#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "slf/core.hpp"

namespace slf::simkit {

/// 4-D kinematic truth, state ordering [px, vx, py, vy].
struct StateVector {
    double px = 0.0;  // m
    double vx = 0.0;  // m/s
    double py = 0.0;  // m
    double vy = 0.0;  // m/s

    Vec2 position() const { return {px, py}; }

    Eigen::Vector4d to_eigen() const { return {px, vx, py, vy}; }
    static StateVector from_eigen(const Eigen::Vector4d& v) {
        return {v[0], v[1], v[2], v[3]};
    }
};

/// Position measurement at 1-based time index k.
struct Measurement {
    double zx = 0.0;
    double zy = 0.0;
    int k = 1;

    Vec2 position() const { return {zx, zy}; }
};

struct ProcessNoiseSpec {
    enum class Kind { Gaussian, TimeVarying, GaussPlusExp };

    Kind kind = Kind::Gaussian;
    double qs = 1.0;     // intensity (Gaussian, GaussPlusExp)
    double slope = 0.0;  // intensity per step (TimeVarying)
    double kappa = 1.0;  // exponential rate (GaussPlusExp)

    static ProcessNoiseSpec gaussian(double qs) {
        return {Kind::Gaussian, qs, 0.0, 1.0};
    }
    static ProcessNoiseSpec time_varying(double slope) {
        return {Kind::TimeVarying, 0.0, slope, 1.0};
    }
    static ProcessNoiseSpec gauss_plus_exp(double qs, double kappa) {
        return {Kind::GaussPlusExp, qs, 0.0, kappa};
    }
};

struct MeasNoiseSpec {
    enum class Kind { Gaussian, GaussTimesExp };

    Kind kind = Kind::Gaussian;
    double vx2 = 30.0;   // m^2
    double vy2 = 20.0;   // m^2
    double kappa = 1.0;  // exponential rate (GaussTimesExp)

    static MeasNoiseSpec gaussian(double vx2, double vy2) {
        return {Kind::Gaussian, vx2, vy2, 1.0};
    }
    static MeasNoiseSpec gauss_times_exp(double vx2, double vy2, double kappa) {
        return {Kind::GaussTimesExp, vx2, vy2, kappa};
    }
};

/// Per-component [lo, hi] ranges for the initial state, ordering [px, vx, py, vy].
using InitBox = std::array<std::array<double, 2>, 4>;

/// Initial-state box used throughout the experiments:
/// position +-5000 m, vx +-25 m/s, vy +-30 m/s.
inline constexpr InitBox kDefaultInitBox = {{{-5000.0, 5000.0},
                                             {-25.0, 25.0},
                                             {-5000.0, 5000.0},
                                             {-30.0, 30.0}}};

struct ScenarioConfig {
    double dt = 1.0;  // s
    int T = 50;       // steps per track
    int n_tracks = 1;
    InitBox init_box = kDefaultInitBox;
    ProcessNoiseSpec proc;
    MeasNoiseSpec meas;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(dt > 0.0)) throw InvalidArgument("ScenarioConfig: dt must be > 0");
        if (T < 2) throw InvalidArgument("ScenarioConfig: T must be >= 2");
        if (n_tracks < 1) throw InvalidArgument("ScenarioConfig: n_tracks must be >= 1");
        for (const auto& range : init_box)
            if (!(range[0] <= range[1]))
                throw InvalidArgument("ScenarioConfig: init_box lower > upper");
        switch (proc.kind) {
            case ProcessNoiseSpec::Kind::Gaussian:
                if (proc.qs < 0.0) throw InvalidArgument("process noise: qs must be >= 0");
                break;
            case ProcessNoiseSpec::Kind::TimeVarying:
                if (proc.slope < 0.0) throw InvalidArgument("process noise: slope must be >= 0");
                break;
            case ProcessNoiseSpec::Kind::GaussPlusExp:
                if (proc.qs < 0.0) throw InvalidArgument("process noise: qs must be >= 0");
                if (!(proc.kappa > 0.0)) throw InvalidArgument("process noise: kappa must be > 0");
                break;
        }
        if (meas.vx2 < 0.0 || meas.vy2 < 0.0)
            throw InvalidArgument("measurement noise: variances must be >= 0");
        if (meas.kind == MeasNoiseSpec::Kind::GaussTimesExp && !(meas.kappa > 0.0))
            throw InvalidArgument("measurement noise: kappa must be > 0");
    }
};

/// Aligned truth and measurement sequences for one target.
struct TrackPair {
    std::vector<StateVector> truth;
    std::vector<Measurement> meas;
    int track_id = 0;
};

// -- model matrices ---------------------------------------------------------

/// Constant-velocity transition matrix F = I2 (x) [[1, dt], [0, 1]].
inline Eigen::Matrix4d transition_matrix(double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("transition_matrix: dt must be > 0");
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 1) = dt;
    f(2, 3) = dt;
    return f;
}

/// White-noise-acceleration covariance Q = qs * I2 (x) [[dt^3/3, dt^2/2], [dt^2/2, dt]].
inline Eigen::Matrix4d process_cov(double qs, double dt) {
    if (qs < 0.0) throw InvalidArgument("process_cov: qs must be >= 0");
    if (!(dt > 0.0)) throw InvalidArgument("process_cov: dt must be > 0");
    Eigen::Matrix2d block;
    block << dt * dt * dt / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt;
    Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
    q.topLeftCorner<2, 2>() = qs * block;
    q.bottomRightCorner<2, 2>() = qs * block;
    return q;
}

inline Eigen::Matrix2d meas_cov(double vx2, double vy2) {
    if (vx2 < 0.0 || vy2 < 0.0) throw InvalidArgument("meas_cov: variances must be >= 0");
    Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
    r(0, 0) = vx2;
    r(1, 1) = vy2;
    return r;
}

/// Position-only measurement matrix H (Cartesian x/y rows).
inline Eigen::Matrix<double, 2, 4> measurement_matrix() {
    Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
    h(0, 0) = 1.0;
    h(1, 2) = 1.0;
    return h;
}

namespace detail {

/// Lower Cholesky factor of one per-axis Q block, in closed form.
struct AxisNoiseChol {
    double l11, l21, l22;

    AxisNoiseChol(double qs, double dt)
        : l11(std::sqrt(qs * dt * dt * dt / 3.0)),
          l21(std::sqrt(3.0 * qs * dt) / 2.0),
          l22(std::sqrt(qs * dt) / 2.0) {}

    // maps two unit normals to correlated [position, velocity] noise
    void apply(double n1, double n2, double& wp, double& wv) const {
        wp = l11 * n1;
        wv = l21 * n1 + l22 * n2;
    }
};

}  // namespace detail

/// Generates `n_tracks` independent truth/measurement pairs under the CV
/// model with the configured noise variants. Deterministic: each track's
/// stream is derived from (seed, track_id), so outputs are reproducible
/// and insensitive to n_tracks changes.
inline std::vector<TrackPair> simulate_tracks(const ScenarioConfig& cfg) {
    cfg.validate();

    const double dt = cfg.dt;
    const double sx = std::sqrt(cfg.meas.vx2);
    const double sy = std::sqrt(cfg.meas.vy2);

    std::vector<TrackPair> tracks(static_cast<std::size_t>(cfg.n_tracks));
    for (int id = 0; id < cfg.n_tracks; ++id) {
        auto rng = substream(cfg.seed, static_cast<std::uint64_t>(id));
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::exponential_distribution<double> proc_exp(cfg.proc.kappa);
        std::exponential_distribution<double> meas_exp(cfg.meas.kappa);

        TrackPair& tp = tracks[static_cast<std::size_t>(id)];
        tp.track_id = id;
        tp.truth.reserve(static_cast<std::size_t>(cfg.T));
        tp.meas.reserve(static_cast<std::size_t>(cfg.T));

        StateVector x;
        {
            std::array<double, 4> init;
            for (int c = 0; c < 4; ++c) {
                std::uniform_real_distribution<double> u(cfg.init_box[c][0],
                                                         cfg.init_box[c][1]);
                init[static_cast<std::size_t>(c)] = u(rng);
            }
            x = {init[0], init[1], init[2], init[3]};
        }

        for (int k = 1; k <= cfg.T; ++k) {
            tp.truth.push_back(x);

            Measurement z;
            z.k = k;
            z.zx = x.px + sx * gauss(rng);
            z.zy = x.py + sy * gauss(rng);
            if (cfg.meas.kind == MeasNoiseSpec::Kind::GaussTimesExp) {
                z.zx = x.px + (z.zx - x.px) * meas_exp(rng);
                z.zy = x.py + (z.zy - x.py) * meas_exp(rng);
            }
            tp.meas.push_back(z);

            if (k == cfg.T) break;

            double qs = cfg.proc.qs;
            if (cfg.proc.kind == ProcessNoiseSpec::Kind::TimeVarying)
                qs = cfg.proc.slope * static_cast<double>(k);
            const detail::AxisNoiseChol chol(qs, dt);

            StateVector next;
            next.px = x.px + dt * x.vx;
            next.vx = x.vx;
            next.py = x.py + dt * x.vy;
            next.vy = x.vy;

            double wp, wv;
            chol.apply(gauss(rng), gauss(rng), wp, wv);
            next.px += wp;
            next.vx += wv;
            chol.apply(gauss(rng), gauss(rng), wp, wv);
            next.py += wp;
            next.vy += wv;

            if (cfg.proc.kind == ProcessNoiseSpec::Kind::GaussPlusExp) {
                next.px += proc_exp(rng);
                next.vx += proc_exp(rng);
                next.py += proc_exp(rng);
                next.vy += proc_exp(rng);
            }
            x = next;
        }
    }
    return tracks;
}

}  // namespace slf::simkit
