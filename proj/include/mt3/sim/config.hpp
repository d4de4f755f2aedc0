#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mt3::sim {

using State = Eigen::Vector4d;         // (px, py, vx, vy)
using Measurement = Eigen::Vector3d;   // (range, range-rate, bearing)

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Interval {
    double min = 0.0;
    double max = 0.0;

    double extent() const { return max - min; }
    double center() const { return 0.5 * (min + max); }
    bool contains(double x) const { return x > min && x < max; }
};

/// Field of view in measurement space.
struct FovBounds {
    Interval r{0.5, 150.0};
    Interval rdot{0.0, 30.0};
    Interval theta{-1.3, 1.3};

    void validate() const;
    bool contains(const Measurement& z) const;
    Measurement center() const { return {r.center(), rdot.center(), theta.center()}; }
    Measurement half_extent() const { return {0.5 * r.extent(), 0.5 * rdot.extent(), 0.5 * theta.extent()}; }
    /// Affine map of each dimension onto [-1, 1].
    Measurement normalize(const Measurement& z) const;
    Measurement denormalize(const Measurement& u) const;
};

/// (r_max - r_min) * (rdot_max - rdot_min) * (theta_max - theta_min).
/// Throws ConfigError for degenerate bounds.
double fov_volume(const FovBounds& fov);

/// Measurement noise covariance model. EdgeGrowing scales each base variance
/// by (1 + g_d * eta_d)^2, eta_d in [0, 1] being the normalized distance of
/// the noiseless measurement from the FOV center along dimension d.
struct CovModel {
    enum class Kind { Constant, EdgeGrowing };

    Kind kind = Kind::Constant;
    Eigen::Vector3d base_diag{5.62e-3, 9.56e-1, 1.00e-2};
    Eigen::Vector3d growth{5.0, 5.0, 5.0};

    void validate() const;
    Eigen::Matrix3d covariance(const Measurement& noiseless, const FovBounds& fov) const;
};

struct ScenarioConfig {
    double lambda0 = 2.0;
    double lambda_b = 1.3e-4;
    double p_s = 0.95;
    double p_d = 0.95;
    double lambda_c = 4.4e-3;
    double sigma_q = 0.2;
    double dt = 0.1;
    int tau = 20;
    Eigen::Vector4d birth_mean{7.0, 0.0, 0.0, 0.0};
    Eigen::Matrix4d birth_cov = Eigen::Vector4d{10.0, 30.0, 3.0, 3.0}.asDiagonal();
    FovBounds fov;
    CovModel meas_cov;

    void validate() const;
    /// Expected clutter count per time-step.
    double clutter_mean() const { return lambda_c * fov_volume(fov); }
};

/// Built-in task presets: "1", "2", "3", "4" and "toy".
ScenarioConfig task_config(std::string_view task);

ScenarioConfig parse_config(std::string_view text);
std::string format_config(const ScenarioConfig& cfg);
ScenarioConfig load_config(const std::filesystem::path& path);
void save_config(const ScenarioConfig& cfg, const std::filesystem::path& path);

}  // namespace mt3::sim
