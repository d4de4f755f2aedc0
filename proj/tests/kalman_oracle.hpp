#pragma once
// Textbook Kalman filter and the degenerate single-object PMBM setting it
// must reproduce: linear measurements, p_d = 1, no clutter, p_s = 1.

#include <Eigen/Dense>

#include <algorithm>
#include <random>

#include "mt3/pmbm/pmbm.hpp"

namespace mt3::test {

using Mat34 = Eigen::Matrix<double, 3, 4>;

inline Mat34 stand_in_matrix() {
    Mat34 a;
    a << 1.0, 0.0, 0.0, 0.0,
         0.0, 1.0, 0.0, 0.0,
         0.0, 0.0, 0.7, 0.7;
    return a;
}

struct Kalman {
    Eigen::Vector4d m;
    Eigen::Matrix4d p;
    void predict(const Eigen::Matrix4d& f, const Eigen::Matrix4d& q) {
        m = f * m;
        p = f * p * f.transpose() + q;
    }
    void update(const Eigen::Vector3d& z, const Mat34& h, const Eigen::Matrix3d& r) {
        const Eigen::Matrix3d s = h * p * h.transpose() + r;
        const Eigen::Matrix<double, 4, 3> k = p * h.transpose() * s.inverse();
        const Eigen::Matrix4d i = Eigen::Matrix4d::Identity();
        m = m + k * (z - h * m);
        p = (i - k * h) * p * (i - k * h).transpose() + k * r * k.transpose();
    }
};

inline pmbm::PmbmConfig linear_config() {
    pmbm::PmbmConfig cfg;
    cfg.p_s = 1.0;
    cfg.p_d = 1.0;
    cfg.clutter_intensity = 0.0;
    cfg.lambda0 = 1.0;
    cfg.lambda_b = 0.0;
    cfg.birth_mean = {5.0, -3.0, 1.0, 0.5};
    cfg.birth_cov = Eigen::Vector4d{4.0, 4.0, 1.0, 1.0}.asDiagonal();
    cfg.f = sim::transition_matrix(0.1);
    cfg.q = sim::process_noise(0.5, 0.1);
    cfg.model = pmbm::MeasurementModel::linear(stand_in_matrix(), Eigen::Vector3d{0.3, 0.2, 0.1}.asDiagonal());
    return cfg;
}

struct DegeneracyStep {
    std::size_t globals = 0;
    std::size_t bernoullis = 0;
    double existence = 0.0;
    double mean_err = 0.0;  // max abs deviation from the Kalman mean
    double cov_err = 0.0;
};

/// Simulates one object for `steps` steps and runs both filters side by side.
inline std::vector<DegeneracyStep> run_degenerate(std::uint64_t seed, int steps = 20) {
    std::mt19937_64 rng(seed);
    const auto cfg = linear_config();
    const pmbm::PmbmFilter f(cfg);
    const Eigen::Matrix3d r = cfg.model.r;
    const Eigen::Matrix3d rl = r.llt().matrixL();
    const Eigen::Matrix4d ql = cfg.q.llt().matrixL();
    std::normal_distribution<double> g;
    Eigen::Vector4d x = cfg.birth_mean + Eigen::Vector4d{g(rng), g(rng), g(rng), g(rng)};
    Kalman kf{cfg.birth_mean, cfg.birth_cov};
    pmbm::PmbmState s = f.initial_state();
    std::vector<DegeneracyStep> out;
    for (int t = 0; t < steps; ++t) {
        if (t > 0) {
            x = cfg.f * x + ql * Eigen::Vector4d{g(rng), g(rng), g(rng), g(rng)};
            s = f.predict(s);
            kf.predict(cfg.f, cfg.q);
        }
        const Eigen::Vector3d z = cfg.model.a * x + rl * Eigen::Vector3d{g(rng), g(rng), g(rng)};
        s = f.update(s, {z});
        kf.update(z, cfg.model.a, r);
        DegeneracyStep st;
        st.globals = s.globals.size();
        const auto pmb = pmbm::to_pmb(s, 1.0);
        st.bernoullis = pmb.bernoullis.size();
        if (st.bernoullis == 1) {
            st.existence = pmb.bernoullis[0].existence;
            st.mean_err = (pmb.bernoullis[0].mean - kf.m).cwiseAbs().maxCoeff();
            st.cov_err = (pmb.bernoullis[0].cov - kf.p).cwiseAbs().maxCoeff();
        } else {
            st.mean_err = st.cov_err = INFINITY;
        }
        out.push_back(st);
    }
    return out;
}

}  // namespace mt3::test
