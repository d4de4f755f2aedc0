#include "mt3/losses/losses.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "mt3/assignment/hungarian.hpp"

namespace mt3::losses {

using namespace mt3::ad;

namespace {
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
}

double match_cost(const State& mean, double p, const std::optional<State>& x) {
    if (!x) return 0.0;
    return (mean - *x).norm() - std::log(std::max(p, kLogClamp));
}

MatchResult optimal_match(const std::vector<State>& means, const std::vector<double>& probs,
                          const std::vector<State>& truth) {
    const std::size_t k = means.size();
    if (probs.size() != k) throw DimensionError("optimal_match: means/probs length mismatch");
    if (truth.size() > k) throw ContractError("optimal_match: more truths than Bernoullis");
    MatchResult r;
    if (truth.empty()) {
        r.sigma.resize(k);
        std::iota(r.sigma.begin(), r.sigma.end(), 0);
        return r;
    }
    assignment::CostMatrix c(k, k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < truth.size(); ++j) c(i, j) = match_cost(means[i], probs[i], truth[j]);
    auto a = assignment::hungarian(c);
    r.sigma = std::move(a.row_to_col);
    r.cost = a.cost;
    return r;
}

double bernoulli_nll(const State& mean, const Eigen::Vector4d& var, double p, const std::optional<State>& x) {
    if (!x) return -std::log(std::max(1.0 - p, kLogClamp));
    double s = 0.0;
    for (int d = 0; d < 4; ++d) {
        const double e = (*x)[d] - mean[d];
        s += kLog2Pi + std::log(var[d]) + e * e / var[d];
    }
    return -std::log(std::max(p, kLogClamp)) + 0.5 * s;
}

Tensor layer_nll(const model::LayerOutput& y, const std::vector<State>& truth, const MatchResult& match) {
    Tape& t = y.mean.tape();
    const std::size_t k = y.mean.cols();
    if (match.sigma.size() != k) throw DimensionError("layer_nll: match length differs from k");
    std::vector<double> target(4 * k, 0.0), detected(k, 0.0), missed(k, 1.0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = static_cast<std::size_t>(match.sigma[i]);
        if (j >= truth.size()) continue;
        detected[i] = 1.0;
        missed[i] = 0.0;
        for (int d = 0; d < 4; ++d) target[d * k + i] = truth[j][d];
    }
    const Tensor x = t.constant({4, k}, std::move(target));
    const Tensor quad = div(square(sub(y.mean, x)), y.var);
    const Tensor gauss = scale(add_scalar(sum_rows(add(quad, log(y.var))), 4.0 * kLog2Pi), 0.5);
    const Tensor det = add(gauss, softplus(neg(y.logit)));  // −log p − log N
    const Tensor miss = softplus(y.logit);                   // −log(1 − p)
    return sum(add(mul(det, t.constant({1, k}, std::move(detected))), mul(miss, t.constant({1, k}, std::move(missed)))));
}

Tensor contrastive_loss(const Tensor& u, const std::vector<int>& labels, double beta) {
    Tape& t = u.tape();
    const std::size_t n = u.cols();
    if (labels.size() != n) throw DimensionError("contrastive_loss: label count differs from embeddings");
    // Column j is anchor j; weights[i][j] = 1/|P_j| for i in P_j.
    std::vector<double> weights(n * n, 0.0), off_diag(n * n, 1.0), has_pos(n, 0.0);
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
        off_diag[j * n + j] = 0.0;
        if (labels[j] < 0) continue;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) count += (i != j && labels[i] == labels[j]);
        if (count == 0) continue;
        any = true;
        has_pos[j] = 1.0;
        for (std::size_t i = 0; i < n; ++i)
            if (i != j && labels[i] == labels[j]) weights[i * n + j] = 1.0 / static_cast<double>(count);
    }
    if (!any || n < 2) return t.constant({1, 1}, 0.0);
    const Tensor sim = matmul_tn(u, u);
    const Tensor log_den = log(sum_rows(mul(exp(sim), t.constant({n, n}, std::move(off_diag)))));
    const Tensor pos = sum(mul(sim, t.constant({n, n}, std::move(weights))));
    return scale(sub(sum(mul(log_den, t.constant({1, n}, std::move(has_pos)))), pos), beta);
}

void layer_values(const model::LayerOutput& y, std::vector<State>& means, std::vector<double>& probs) {
    const std::size_t k = y.mean.cols();
    means.assign(k, State::Zero());
    probs.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (int d = 0; d < 4; ++d) means[i][d] = y.mean.at(d, i);
        probs[i] = y.prob.at(0, i);
    }
}

TrainingLoss training_loss(const std::vector<model::LayerOutput>& layers, const std::vector<State>& truth,
                           const Tensor& u, const std::vector<int>& labels, double beta,
                           const std::vector<MatchResult>* frozen) {
    if (layers.empty()) throw ContractError("training_loss: no decoder layers");
    const std::size_t k = layers[0].mean.cols();
    if (truth.size() > k) throw ContractError("training_loss: more truths than queries");
    if (frozen && frozen->size() != layers.size()) throw ContractError("training_loss: frozen match count mismatch");
    TrainingLoss out;
    Tensor total;
    std::vector<State> means;
    std::vector<double> probs;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        MatchResult m;
        if (frozen) {
            m = (*frozen)[l];
        } else {
            layer_values(layers[l], means, probs);
            m = optimal_match(means, probs, truth);
        }
        const Tensor nll = layer_nll(layers[l], truth, m);
        out.layer_nll.push_back(nll.item());
        total = total.valid() ? add(total, nll) : nll;
        out.matches.push_back(std::move(m));
    }
    if (u.valid() && beta != 0.0) {
        const Tensor c = contrastive_loss(u, labels, beta);
        out.contrastive = c.item();
        total = add(total, c);
    }
    out.total = total;
    return out;
}

}  // namespace mt3::losses
