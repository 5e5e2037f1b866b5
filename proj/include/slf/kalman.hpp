#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "slf/core.hpp"
#include "slf/simkit.hpp"

namespace slf::kalman {

struct KfState {
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();

    simkit::StateVector state() const { return simkit::StateVector::from_eigen(mean); }
    Vec2 position() const { return {mean[0], mean[2]}; }
};

struct KfModel {
    Eigen::Matrix4d f;
    Eigen::Matrix<double, 2, 4> h;
    Eigen::Matrix4d q;
    Eigen::Matrix2d r;

    /// CV model with white-noise-acceleration Q and diagonal R.
    static KfModel cv(double dt, double qs, double vx2, double vy2) {
        return {simkit::transition_matrix(dt), simkit::measurement_matrix(),
                simkit::process_cov(qs, dt), simkit::meas_cov(vx2, vy2)};
    }
};

/// Two-point differencing: position from z2, velocity from the difference.
/// Covariance per axis is [[r, r/dt], [r/dt, 2r/dt^2 + q_vel]], so the
/// position block equals R and the velocity variance reflects both the
/// differenced measurement noise and one step of process noise.
inline KfState kf_init(const simkit::Measurement& z1, const simkit::Measurement& z2,
                       const KfModel& model, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("kf_init: dt must be > 0");
    KfState s;
    s.mean << z2.zx, (z2.zx - z1.zx) / dt, z2.zy, (z2.zy - z1.zy) / dt;
    const double rx = model.r(0, 0);
    const double ry = model.r(1, 1);
    s.cov(0, 0) = rx;
    s.cov(0, 1) = s.cov(1, 0) = rx / dt;
    s.cov(1, 1) = 2.0 * rx / (dt * dt) + model.q(1, 1);
    s.cov(2, 2) = ry;
    s.cov(2, 3) = s.cov(3, 2) = ry / dt;
    s.cov(3, 3) = 2.0 * ry / (dt * dt) + model.q(3, 3);
    return s;
}

inline KfState kf_predict(const KfState& s, const KfModel& model) {
    KfState out;
    out.mean = model.f * s.mean;
    out.cov = model.f * s.cov * model.f.transpose() + model.q;
    return out;
}

inline KfState kf_update(const KfState& s, const simkit::Measurement& z,
                         const KfModel& model) {
    const Eigen::Matrix2d innov_cov =
        model.h * s.cov * model.h.transpose() + model.r;
    const double det = innov_cov.determinant();
    if (!(std::abs(det) > 0.0))
        throw SingularInnovation("kf_update: innovation covariance not invertible");
    const Eigen::Matrix<double, 4, 2> gain =
        s.cov * model.h.transpose() * innov_cov.inverse();
    const Eigen::Vector2d resid =
        Eigen::Vector2d(z.zx, z.zy) - model.h * s.mean;

    KfState out;
    out.mean = s.mean + gain * resid;
    const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - gain * model.h;
    out.cov = ikh * s.cov * ikh.transpose() +
              gain * model.r * gain.transpose();
    return out;
}

/// Position estimates per step: raw z1, then the two-point init at k=2,
/// then posterior means.
inline std::vector<Vec2> kf_run(const std::vector<simkit::Measurement>& track,
                                const KfModel& model, double dt) {
    if (track.size() < 2) throw InsufficientLength("kf_run: need >= 2 measurements");
    std::vector<Vec2> est;
    est.reserve(track.size());
    est.push_back(track[0].position());
    KfState s = kf_init(track[0], track[1], model, dt);
    est.push_back(s.position());
    for (std::size_t i = 2; i < track.size(); ++i) {
        s = kf_update(kf_predict(s, model), track[i], model);
        est.push_back(s.position());
    }
    return est;
}

/// Posterior covariance fixed point of the predict/update recursion.
inline Eigen::Matrix4d steady_state_cov(const KfModel& model) {
    Eigen::Matrix4d p = Eigen::Matrix4d::Identity();
    for (int iter = 0; iter < 100000; ++iter) {
        KfState s;
        s.cov = p;
        s = kf_predict(s, model);
        const Eigen::Matrix2d innov_cov =
            model.h * s.cov * model.h.transpose() + model.r;
        const double det = innov_cov.determinant();
        if (!(std::abs(det) > 0.0))
            throw SingularInnovation("steady_state_cov: singular innovation");
        const Eigen::Matrix<double, 4, 2> gain =
            s.cov * model.h.transpose() * innov_cov.inverse();
        const Eigen::Matrix4d ikh = Eigen::Matrix4d::Identity() - gain * model.h;
        const Eigen::Matrix4d next =
            ikh * s.cov * ikh.transpose() + gain * model.r * gain.transpose();
        if ((next - p).cwiseAbs().maxCoeff() < 1e-10) return next;
        p = next;
    }
    throw ConvergenceFailure("steady_state_cov: no fixed point after 1e5 iterations");
}

}  // namespace slf::kalman
