#include "mt3/sim/config.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <vector>

namespace mt3::sim {

namespace {

void check_interval(const Interval& iv, const char* name) {
    if (!(iv.min < iv.max)) throw ConfigError(std::string("FOV interval '") + name + "' must satisfy min < max");
}

}  // namespace

void FovBounds::validate() const {
    check_interval(r, "r");
    check_interval(rdot, "rdot");
    check_interval(theta, "theta");
}

bool FovBounds::contains(const Measurement& z) const {
    return r.contains(z[0]) && rdot.contains(z[1]) && theta.contains(z[2]);
}

Measurement FovBounds::normalize(const Measurement& z) const {
    return (z - center()).cwiseQuotient(half_extent());
}

Measurement FovBounds::denormalize(const Measurement& u) const {
    return center() + u.cwiseProduct(half_extent());
}

double fov_volume(const FovBounds& fov) {
    fov.validate();
    return fov.r.extent() * fov.rdot.extent() * fov.theta.extent();
}

void CovModel::validate() const {
    if ((base_diag.array() <= 0.0).any()) throw ConfigError("measurement covariance diagonal must be positive");
    if (kind == Kind::EdgeGrowing && (growth.array() < 0.0).any())
        throw ConfigError("edge growth factors must be non-negative");
}

Eigen::Matrix3d CovModel::covariance(const Measurement& noiseless, const FovBounds& fov) const {
    if (kind == Kind::Constant) return base_diag.asDiagonal();
    const Measurement eta =
        ((noiseless - fov.center()).cwiseAbs().cwiseQuotient(fov.half_extent())).cwiseMin(1.0);
    const Eigen::Vector3d scale = (Eigen::Vector3d::Ones() + growth.cwiseProduct(eta)).array().square();
    return base_diag.cwiseProduct(scale).asDiagonal();
}

void ScenarioConfig::validate() const {
    if (p_s < 0.0 || p_s > 1.0) throw ConfigError("p_s must lie in [0, 1]");
    if (p_d < 0.0 || p_d > 1.0) throw ConfigError("p_d must lie in [0, 1]");
    if (!(lambda0 > 0.0) || !(lambda_b > 0.0) || !(lambda_c > 0.0))
        throw ConfigError("lambda0, lambda_b and lambda_c must be positive");
    if (!(sigma_q > 0.0) || !(dt > 0.0)) throw ConfigError("sigma_q and dt must be positive");
    if (tau < 1) throw ConfigError("tau must be >= 1");
    fov.validate();
    meas_cov.validate();
    Eigen::LLT<Eigen::Matrix4d> llt(birth_cov);
    if (llt.info() != Eigen::Success) throw ConfigError("birth_cov must be positive definite");
}

ScenarioConfig task_config(std::string_view task) {
    ScenarioConfig cfg;
    if (task == "1" || task == "3") {
        // defaults are task 1
    } else if (task == "2" || task == "4") {
        cfg.lambda0 = 6.0;
        cfg.p_d = 0.7;
        cfg.lambda_c = 2.6e-2;
        cfg.sigma_q = 0.9;
        cfg.lambda_b = 3.5e-4;
    } else if (task == "toy") {
        cfg.lambda0 = 3.0;
        cfg.lambda_c = 4.4e-4;
        cfg.meas_cov.base_diag /= 4.0;
    } else {
        throw ConfigError("unknown task '" + std::string(task) + "'");
    }
    if (task == "3" || task == "4") cfg.meas_cov.kind = CovModel::Kind::EdgeGrowing;
    return cfg;
}

namespace {

std::vector<double> numbers(std::istringstream& in) {
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    return out;
}

std::vector<double> expect(const std::string& key, std::vector<double> v, std::size_t n) {
    if (v.size() != n)
        throw ConfigError("key '" + key + "' expects " + std::to_string(n) + " values, got " + std::to_string(v.size()));
    return v;
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
    ScenarioConfig cfg;
    std::istringstream lines{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = line.substr(0, eq);
        key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
        std::istringstream rest(line.substr(eq + 1));

        if (key == "meas_cov") {
            std::string kind;
            rest >> kind;
            auto v = numbers(rest);
            if (kind == "constant") {
                v = expect(key, v, 3);
                cfg.meas_cov.kind = CovModel::Kind::Constant;
            } else if (kind == "edge_growing") {
                v = expect(key, v, 6);
                cfg.meas_cov.kind = CovModel::Kind::EdgeGrowing;
                cfg.meas_cov.growth = {v[3], v[4], v[5]};
            } else {
                throw ConfigError("meas_cov kind must be 'constant' or 'edge_growing'");
            }
            cfg.meas_cov.base_diag = {v[0], v[1], v[2]};
            continue;
        }

        auto v = numbers(rest);
        if (key == "lambda0") cfg.lambda0 = expect(key, v, 1)[0];
        else if (key == "lambda_b") cfg.lambda_b = expect(key, v, 1)[0];
        else if (key == "p_s") cfg.p_s = expect(key, v, 1)[0];
        else if (key == "p_d") cfg.p_d = expect(key, v, 1)[0];
        else if (key == "lambda_c") cfg.lambda_c = expect(key, v, 1)[0];
        else if (key == "sigma_q") cfg.sigma_q = expect(key, v, 1)[0];
        else if (key == "dt") cfg.dt = expect(key, v, 1)[0];
        else if (key == "tau") cfg.tau = static_cast<int>(expect(key, v, 1)[0]);
        else if (key == "birth_mean") {
            v = expect(key, v, 4);
            cfg.birth_mean = {v[0], v[1], v[2], v[3]};
        } else if (key == "birth_cov") {
            if (v.size() == 4) {
                cfg.birth_cov = Eigen::Vector4d{v[0], v[1], v[2], v[3]}.asDiagonal();
            } else {
                v = expect(key, v, 16);
                cfg.birth_cov = Eigen::Map<const Eigen::Matrix<double, 4, 4, Eigen::RowMajor>>(v.data());
            }
        } else if (key == "fov_r") {
            v = expect(key, v, 2);
            cfg.fov.r = {v[0], v[1]};
        } else if (key == "fov_rdot") {
            v = expect(key, v, 2);
            cfg.fov.rdot = {v[0], v[1]};
        } else if (key == "fov_theta") {
            v = expect(key, v, 2);
            cfg.fov.theta = {v[0], v[1]};
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

std::string format_config(const ScenarioConfig& cfg) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "lambda0 = " << cfg.lambda0 << '\n'
        << "lambda_b = " << cfg.lambda_b << '\n'
        << "p_s = " << cfg.p_s << '\n'
        << "p_d = " << cfg.p_d << '\n'
        << "lambda_c = " << cfg.lambda_c << '\n'
        << "sigma_q = " << cfg.sigma_q << '\n'
        << "dt = " << cfg.dt << '\n'
        << "tau = " << cfg.tau << '\n';
    out << "birth_mean =";
    for (int i = 0; i < 4; ++i) out << ' ' << cfg.birth_mean[i];
    out << "\nbirth_cov =";
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out << ' ' << cfg.birth_cov(r, c);
    out << "\nfov_r = " << cfg.fov.r.min << ' ' << cfg.fov.r.max << '\n'
        << "fov_rdot = " << cfg.fov.rdot.min << ' ' << cfg.fov.rdot.max << '\n'
        << "fov_theta = " << cfg.fov.theta.min << ' ' << cfg.fov.theta.max << '\n';
    const auto& m = cfg.meas_cov;
    out << "meas_cov = " << (m.kind == CovModel::Kind::Constant ? "constant" : "edge_growing");
    for (int i = 0; i < 3; ++i) out << ' ' << m.base_diag[i];
    if (m.kind == CovModel::Kind::EdgeGrowing)
        for (int i = 0; i < 3; ++i) out << ' ' << m.growth[i];
    out << '\n';
    return out.str();
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void save_config(const ScenarioConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config " + path.string());
    out << format_config(cfg);
}

}  // namespace mt3::sim
