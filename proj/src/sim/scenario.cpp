#include "mt3/sim/scenario.hpp"

#include <cmath>

namespace mt3::sim {

Eigen::Matrix4d transition_matrix(double dt) {
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;
    return f;
}

Eigen::Matrix4d process_noise(double sigma_q, double dt) {
    const double q = sigma_q * sigma_q;
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    for (int axis = 0; axis < 2; ++axis) {
        m(axis, axis) = q * dt * dt * dt / 3.0;
        m(axis, axis + 2) = m(axis + 2, axis) = q * dt * dt / 2.0;
        m(axis + 2, axis + 2) = q * dt;
    }
    return m;
}

namespace {

Eigen::Vector4d standard_normal4(RandomSource& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::Vector4d v;
    for (int i = 0; i < 4; ++i) v[i] = n01(rng);
    return v;
}

double uniform01(RandomSource& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

int poisson(double mean, RandomSource& rng) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<int>(mean)(rng);
}

}  // namespace

State propagate_state(const State& x, const ScenarioConfig& cfg, RandomSource& rng) {
    const State mean = transition_matrix(cfg.dt) * x;
    if (cfg.sigma_q == 0.0) return mean;
    const Eigen::Matrix4d l = process_noise(cfg.sigma_q, cfg.dt).llt().matrixL();
    return mean + l * standard_normal4(rng);
}

Measurement measure_state(const State& x) {
    const double r = std::hypot(x[0], x[1]);
    if (r == 0.0) throw DegenerateGeometryError("measure_state: object at the sensor origin");
    return {r, (x[0] * x[2] + x[1] * x[3]) / r, std::atan2(x[1], x[0])};
}

bool state_in_fov(const State& x, const FovBounds& fov) {
    if (x[0] == 0.0 && x[1] == 0.0) return false;
    return fov.contains(measure_state(x));
}

std::vector<State> GroundTruthSample::final_states(const FovBounds& fov, bool in_fov_only) const {
    std::vector<State> out;
    for (const auto& tr : trajectories) {
        if (!tr.alive_at(final_step)) continue;
        const State& x = tr.state_at(final_step);
        if (in_fov_only && !state_in_fov(x, fov)) continue;
        out.push_back(x);
    }
    return out;
}

std::vector<int> GroundTruthSample::final_object_ids(const FovBounds& fov, bool in_fov_only) const {
    std::vector<int> out;
    for (const auto& tr : trajectories) {
        if (!tr.alive_at(final_step)) continue;
        if (in_fov_only && !state_in_fov(tr.state_at(final_step), fov)) continue;
        out.push_back(tr.object_id);
    }
    return out;
}

std::vector<int> MeasurementSet::labels() const {
    std::vector<int> out;
    out.reserve(items.size());
    for (const auto& m : items) out.push_back(m.label);
    return out;
}

Scenario sample_scenario(const ScenarioConfig& cfg, RandomSource& rng) {
    const Eigen::Matrix4d birth_l = cfg.birth_cov.llt().matrixL();
    const double volume = fov_volume(cfg.fov);

    Scenario sc;
    sc.measurements.first_step = 0;
    sc.measurements.last_step = cfg.tau;
    sc.truth.final_step = cfg.tau;

    auto& trajs = sc.truth.trajectories;
    std::vector<std::size_t> alive;
    int next_id = 0;
    auto spawn = [&](int step) {
        Trajectory tr;
        tr.object_id = next_id++;
        tr.birth_step = step;
        tr.states.push_back(cfg.birth_mean + birth_l * standard_normal4(rng));
        alive.push_back(trajs.size());
        trajs.push_back(std::move(tr));
    };

    const int initial = poisson(cfg.lambda0, rng);
    for (int i = 0; i < initial; ++i) spawn(0);

    for (int t = 0; t <= cfg.tau; ++t) {
        if (t > 0) {
            std::vector<std::size_t> survivors;
            for (std::size_t idx : alive) {
                if (uniform01(rng) < cfg.p_s) {
                    trajs[idx].states.push_back(propagate_state(trajs[idx].states.back(), cfg, rng));
                    survivors.push_back(idx);
                }
            }
            alive = std::move(survivors);
            const int births = poisson(cfg.lambda_b, rng);
            for (int i = 0; i < births; ++i) spawn(t);
        }

        std::normal_distribution<double> n01(0.0, 1.0);
        for (std::size_t idx : alive) {
            auto& tr = trajs[idx];
            const bool detected = uniform01(rng) < cfg.p_d;
            tr.detected.push_back(detected ? 1 : 0);
            if (!detected) continue;
            const State& x = tr.states.back();
            if (x[0] == 0.0 && x[1] == 0.0) continue;
            const Measurement h = measure_state(x);
            const Eigen::Vector3d sd = cfg.meas_cov.covariance(h, cfg.fov).diagonal().cwiseSqrt();
            Measurement z;
            for (int d = 0; d < 3; ++d) z[d] = h[d] + sd[d] * n01(rng);
            if (cfg.fov.contains(z)) sc.measurements.items.push_back({z, t, tr.object_id});
        }

        const int clutter = poisson(cfg.lambda_c * volume, rng);
        for (int i = 0; i < clutter; ++i) {
            Measurement z;
            z[0] = cfg.fov.r.min + cfg.fov.r.extent() * uniform01(rng);
            z[1] = cfg.fov.rdot.min + cfg.fov.rdot.extent() * uniform01(rng);
            z[2] = cfg.fov.theta.min + cfg.fov.theta.extent() * uniform01(rng);
            sc.measurements.items.push_back({z, t, -1});
        }
    }
    return sc;
}

Scenario sample_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
    RandomSource rng(seed);
    return sample_scenario(cfg, rng);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(base) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

}  // namespace mt3::sim
