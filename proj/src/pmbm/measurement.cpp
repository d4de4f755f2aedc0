#include "mt3/pmbm/measurement.hpp"

#include <cmath>
#include <numbers>

#include "mt3/sim/scenario.hpp"

namespace mt3::pmbm {

namespace {

double wrap(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    return a == -std::numbers::pi ? std::numbers::pi : a;
}

template <int N>
Eigen::Matrix<double, N, N> symmetrize(const Eigen::Matrix<double, N, N>& m) {
    return 0.5 * (m + m.transpose());
}

}  // namespace

MeasurementModel MeasurementModel::radar(const sim::FovBounds& fov, const sim::CovModel& cov) {
    MeasurementModel m;
    m.kind = Kind::Radar;
    m.fov = fov;
    m.cov = cov;
    return m;
}

MeasurementModel MeasurementModel::linear(const Eigen::Matrix<double, 3, 4>& a, const Matrix3d& r) {
    MeasurementModel m;
    m.kind = Kind::Linear;
    m.a = a;
    m.r = r;
    return m;
}

Measurement MeasurementModel::h(const State& x) const {
    if (kind == Kind::Linear) return a * x;
    try {
        return sim::measure_state(x);
    } catch (const sim::DegenerateGeometryError& e) {
        throw NumericalError(e.what());
    }
}

Matrix3d MeasurementModel::noise(const State& x) const {
    if (kind == Kind::Linear) return r;
    return cov.covariance(h(x), fov);
}

Measurement MeasurementModel::residual(const Measurement& x, const Measurement& y) const {
    Measurement d = x - y;
    if (kind == Kind::Radar) d[2] = wrap(d[2]);
    return d;
}

bool MeasurementModel::observable(const State& x) const {
    return kind == Kind::Linear || sim::state_in_fov(x, fov);
}

SigmaPoints sigma_points(const Gaussian& g) {
    constexpr int n = 4;
    const Eigen::LLT<Matrix4d> llt((n + SigmaPoints::kKappa) * g.cov);
    if (llt.info() != Eigen::Success) throw NumericalError("sigma_points: covariance not positive definite");
    const Matrix4d l = llt.matrixL();
    SigmaPoints s;
    s.points[0] = g.mean;
    s.weights[0] = SigmaPoints::kKappa / (n + SigmaPoints::kKappa);
    for (int i = 0; i < n; ++i) {
        s.points[1 + i] = g.mean + l.col(i);
        s.points[1 + n + i] = g.mean - l.col(i);
        s.weights[1 + i] = s.weights[1 + n + i] = 0.5 / (n + SigmaPoints::kKappa);
    }
    return s;
}

Linearization linearize(const Gaussian& g, const MeasurementModel& model) {
    const auto sp = sigma_points(g);
    std::array<Measurement, 9> zs;
    for (int i = 0; i < 9; ++i) zs[i] = model.h(sp.points[i]);
    // Average residuals about the central point so bearings never straddle
    // the branch cut.
    Measurement zbar = Measurement::Zero();
    for (int i = 0; i < 9; ++i) zbar += sp.weights[i] * model.residual(zs[i], zs[0]);
    zbar += zs[0];

    Eigen::Matrix<double, 4, 3> psi = Eigen::Matrix<double, 4, 3>::Zero();
    Matrix3d phi = Matrix3d::Zero();
    for (int i = 0; i < 9; ++i) {
        const Measurement dz = model.residual(zs[i], zbar);
        psi += sp.weights[i] * (sp.points[i] - g.mean) * dz.transpose();
        phi += sp.weights[i] * dz * dz.transpose();
    }
    Linearization lin;
    lin.a = (g.cov.llt().solve(psi)).transpose();
    lin.b = zbar - lin.a * g.mean;
    lin.omega = symmetrize<3>(phi - lin.a * g.cov * lin.a.transpose());
    return lin;
}

PredictedMeasurement predict_measurement(const Gaussian& prior, const MeasurementModel& model) {
    const auto lin = linearize(prior, model);
    PredictedMeasurement p;
    p.mean = lin.a * prior.mean + lin.b;
    p.s = symmetrize<3>(lin.a * prior.cov * lin.a.transpose() + lin.omega + model.noise(prior.mean));
    return p;
}

double mahalanobis2(const Measurement& z, const PredictedMeasurement& pred, const MeasurementModel& model) {
    const Eigen::LLT<Matrix3d> llt(pred.s);
    if (llt.info() != Eigen::Success) throw NumericalError("mahalanobis2: innovation covariance not positive definite");
    const Measurement nu = model.residual(z, pred.mean);
    return nu.dot(llt.solve(nu));
}

UpdateResult sigma_point_update(const Gaussian& prior, const Measurement& z, const MeasurementModel& model,
                                int iterations) {
    if (iterations < 1) throw std::invalid_argument("sigma_point_update: iterations must be >= 1");
    Gaussian current = prior;
    UpdateResult out;
    for (int it = 0; it < iterations; ++it) {
        const auto lin = linearize(current, model);
        const Matrix3d s =
            symmetrize<3>(lin.a * prior.cov * lin.a.transpose() + lin.omega + model.noise(current.mean));
        const Eigen::LLT<Matrix3d> llt(s);
        if (llt.info() != Eigen::Success) throw NumericalError("sigma_point_update: S not positive definite");
        const Measurement nu = model.residual(z, lin.a * prior.mean + lin.b);
        const Eigen::Matrix<double, 4, 3> k = llt.solve(lin.a * prior.cov).transpose();
        current.mean = prior.mean + k * nu;
        current.cov = symmetrize<4>(prior.cov - k * s * k.transpose());

        const Matrix3d l = llt.matrixL();
        out.log_likelihood = -0.5 * (3.0 * std::log(2.0 * std::numbers::pi) +
                                     2.0 * l.diagonal().array().log().sum() + nu.dot(llt.solve(nu)));
    }
    if (Eigen::LLT<Matrix4d>(current.cov).info() != Eigen::Success)
        throw NumericalError("sigma_point_update: posterior covariance not positive definite");
    out.posterior = current;
    return out;
}

double detection_probability(const Gaussian& g, const MeasurementModel& model, double p_d) {
    if (model.kind == MeasurementModel::Kind::Linear) return p_d;
    const auto sp = sigma_points(g);
    double inside = 0.0;
    for (int i = 0; i < 9; ++i)
        if (model.observable(sp.points[i])) inside += sp.weights[i];
    return p_d * inside;
}

}  // namespace mt3::pmbm
