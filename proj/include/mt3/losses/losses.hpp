#pragma once

#include <optional>
#include <vector>

#include "mt3/model/mt3v2.hpp"

namespace mt3::losses {

using ad::Tensor;
using sim::State;

inline constexpr double kDefaultBeta = 4.0;

/// σ maps Bernoulli i to padded-truth slot sigma[i]; slots >= m are ∅.
struct MatchResult {
    std::vector<int> sigma;
    double cost = 0.0;
};

/// 0 for ∅, else ‖μ − x‖₂ − log p.
double match_cost(const State& mean, double p, const std::optional<State>& x);

/// Minimum-cost bijection between k Bernoullis and the truth padded with ∅
/// to length k. All-∅ returns the identity.
MatchResult optimal_match(const std::vector<State>& means, const std::vector<double>& probs,
                          const std::vector<State>& truth);

/// −log p − log N(x; μ, diag(var)) for a state, −log(1 − p) for ∅.
double bernoulli_nll(const State& mean, const Eigen::Vector4d& var, double p, const std::optional<State>& x);

/// Same, on the tape, summed over the k Bernoullis of one layer for a fixed
/// assignment. Uses the existence logits for stable log p / log(1 − p).
Tensor layer_nll(const model::LayerOutput& y, const std::vector<State>& truth, const MatchResult& match);

/// Supervised contrastive loss on unit vectors u (d×n) with labels b (−1 =
/// clutter). Anchors without positives contribute nothing; every other
/// measurement, clutter included, sits in the denominator.
Tensor contrastive_loss(const Tensor& u, const std::vector<int>& labels, double beta = kDefaultBeta);

struct TrainingLoss {
    Tensor total;
    std::vector<double> layer_nll;
    double contrastive = 0.0;
    std::vector<MatchResult> matches;
};

/// Σ_l matched NLL of layer l (own Hungarian match per layer, treated as a
/// constant) + contrastive term. Pass `frozen` to reuse earlier matches.
TrainingLoss training_loss(const std::vector<model::LayerOutput>& layers, const std::vector<State>& truth,
                           const Tensor& u, const std::vector<int>& labels, double beta = kDefaultBeta,
                           const std::vector<MatchResult>* frozen = nullptr);

/// Means and existence probabilities of one layer, read off the tape.
void layer_values(const model::LayerOutput& y, std::vector<State>& means, std::vector<double>& probs);

}  // namespace mt3::losses
