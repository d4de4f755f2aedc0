#pragma once

#include <Eigen/Dense>

#include <stdexcept>

#include "mt3/sim/config.hpp"

namespace mt3::pmbm {

using State = sim::State;
using Measurement = sim::Measurement;
using Matrix4d = Eigen::Matrix4d;
using Matrix3d = Eigen::Matrix3d;

/// Raised when a covariance stops being positive definite or the
/// measurement map is undefined at a sigma point. Callers drop the
/// offending hypothesis.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Gaussian {
    State mean = State::Zero();
    Matrix4d cov = Matrix4d::Identity();
};

/// Either the radar map (range, range-rate, bearing) with state-dependent
/// noise and a finite FOV, or a linear stand-in z = A x + e, e ~ N(0, R),
/// observed everywhere.
struct MeasurementModel {
    enum class Kind { Radar, Linear };
    Kind kind = Kind::Radar;
    sim::FovBounds fov;
    sim::CovModel cov;
    Eigen::Matrix<double, 3, 4> a = Eigen::Matrix<double, 3, 4>::Zero();
    Matrix3d r = Matrix3d::Identity();

    static MeasurementModel radar(const sim::FovBounds& fov, const sim::CovModel& cov);
    static MeasurementModel linear(const Eigen::Matrix<double, 3, 4>& a, const Matrix3d& r);

    Measurement h(const State& x) const;
    /// Noise covariance with the map linearized about x.
    Matrix3d noise(const State& x) const;
    /// a - b, with the bearing difference wrapped to (-pi, pi] for radar.
    Measurement residual(const Measurement& a, const Measurement& b) const;
    bool observable(const State& x) const;
};

/// Unscented sigma points: 2n+1 points with kappa = 1, so every weight is
/// positive (w0 = 1/5, wi = 1/10 in four dimensions).
struct SigmaPoints {
    static constexpr double kKappa = 1.0;
    std::array<State, 9> points;
    std::array<double, 9> weights;
};

SigmaPoints sigma_points(const Gaussian& g);

/// Statistical linear regression of the measurement map about g:
/// h(x) ~ A x + b with residual covariance omega.
struct Linearization {
    Eigen::Matrix<double, 3, 4> a;
    Measurement b;
    Matrix3d omega;
};

Linearization linearize(const Gaussian& g, const MeasurementModel& model);

struct PredictedMeasurement {
    Measurement mean;
    Matrix3d s;   // innovation covariance, noise included
};

/// Predicted measurement under the prior itself (one regression, no
/// iteration). Used for gating.
PredictedMeasurement predict_measurement(const Gaussian& prior, const MeasurementModel& model);

double mahalanobis2(const Measurement& z, const PredictedMeasurement& pred, const MeasurementModel& model);

struct UpdateResult {
    Gaussian posterior;
    double log_likelihood = 0.0;   // log N(z; A m + b, S) at the final linearization
};

/// Iterated posterior linearization: regress the map about the current
/// posterior, Kalman-update the prior with that linear model, repeat.
/// The noise covariance follows the current linearization point.
UpdateResult sigma_point_update(const Gaussian& prior, const Measurement& z, const MeasurementModel& model,
                                int iterations = 5);

/// p_d times the sigma-point weight falling inside the FOV (linear: p_d).
double detection_probability(const Gaussian& g, const MeasurementModel& model, double p_d);

}  // namespace mt3::pmbm
