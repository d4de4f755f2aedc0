#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mt3/autodiff/checkpoint.hpp"
#include "mt3/metrics/density.hpp"
#include "mt3/sim/scenario.hpp"
#include "mt3/transformer/transformer.hpp"

namespace mt3::model {

using ad::Tensor;
using nn::Bound;
using nn::Rng;

struct Mt3v2Config {
    std::size_t d_model = 256;
    std::size_t n_encoder = 6;
    std::size_t n_decoder = 6;
    std::size_t n_heads = 8;
    std::size_t k = 16;
    std::size_t ffn_hidden = 2048;
    std::size_t head_hidden = 128;
    std::size_t contrastive_hidden = 256;
    std::size_t contrastive_dim = 256;
    double dropout = 0.1;
    int window = 20;  // tau; the temporal table has window+1 entries
    sim::FovBounds fov;
    // Network outputs live in a normalised state space; this maps them back
    // (px, py, vx, vy). Means scale by s, variances by s².
    std::array<double, 4> state_scale{150.0, 150.0, 30.0, 30.0};

    void validate() const;

    static Mt3v2Config full_scale();
    /// d'=32, N=M=2, two heads, k=8, narrow FFNs.
    static Mt3v2Config toy();
};

struct Selection {
    std::vector<std::size_t> indices;  // into the (padded) measurement sequence
    Tensor scores;                     // 1×n, sigmoid outputs
    Tensor delta;                      // 3×k, adjustments for the selected
    Tensor z_tilde;                    // 3×k, normalised measurement space
    Tensor queries;                    // d×k
    Tensor query_pos;                  // d×k
};

struct LayerOutput {
    Tensor mean;    // 4×k
    Tensor var;     // 4×k, diagonal of Σ
    Tensor logit;   // 1×k
    Tensor prob;    // 1×k, sigmoid(logit)
    Tensor delta;   // 4×k, state-space adjustment added at this layer
};

struct Preprocessed {
    Tensor z_norm;    // 3×n, FOV-normalised to [-1, 1]
    Tensor lifted;    // d×n
    Tensor temporal;  // d×n
    std::vector<int> labels;
    std::size_t n_real = 0;  // columns past this are padding sentinels
};

struct ForwardOptions {
    bool train = false;
    Rng* rng = nullptr;
    /// Skip top-k and use these indices instead (for gradient checks).
    const std::vector<std::size_t>* forced_indices = nullptr;
};

struct ForwardOutput {
    Preprocessed input;
    Tensor embeddings;  // d×n
    Selection selection;
    Tensor mu0;         // 4×k
    std::vector<LayerOutput> layers;
};

/// Indices of the k largest scores, descending, ties to the lower index.
/// Entries at or past `n_real` rank after every real entry.
std::vector<std::size_t> top_k(const std::vector<double>& scores, std::size_t k, std::size_t n_real);

class Mt3v2 {
public:
    Mt3v2(const Mt3v2Config& cfg, std::uint64_t seed);

    const Mt3v2Config& config() const { return cfg_; }
    ad::ParameterStore& params() { return params_; }
    const ad::ParameterStore& params() const { return params_; }

    Preprocessed preprocess(const Bound& p, const sim::MeasurementSet& ms) const;
    Selection select(const Bound& p, const Tensor& e, const Tensor& z_norm, std::size_t n_real,
                     const std::vector<std::size_t>* forced = nullptr) const;
    /// Unit-norm projections used by the contrastive loss (d_u×n).
    Tensor contrastive_embeddings(const Bound& p, const Tensor& e) const;
    /// (r cos θ, r sin θ, 0, 0) from normalised measurement columns.
    Tensor initial_means(const Tensor& z_tilde) const;
    ForwardOutput forward(const Bound& p, const sim::MeasurementSet& ms, const ForwardOptions& opt = {}) const;

    /// Final-layer multi-Bernoulli, evaluated without gradients.
    metrics::MultiBernoulli predict(const sim::MeasurementSet& ms) const;
    static metrics::MultiBernoulli to_multi_bernoulli(const LayerOutput& out);

    void save(const std::filesystem::path& dir, ad::Metadata extra = {}) const;
    static Mt3v2 load(const std::filesystem::path& dir, ad::Metadata* meta = nullptr);

    // Named sub-modules, exposed for tests.
    struct Heads {
        nn::FeedForward delta, cov, exist;
    };
    nn::Linear lift;
    std::size_t temporal = 0;
    std::vector<nn::EncoderBlock> encoder;
    std::vector<nn::DecoderBlock> decoder;
    nn::FeedForward score_ffn, delta_ffn, query_ffn, pos_ffn, contrastive_ffn;
    std::vector<Heads> heads;

private:
    Mt3v2(const Mt3v2Config& cfg, Rng&& rng);

    Mt3v2Config cfg_;
    ad::ParameterStore params_;
};

ad::Metadata config_metadata(const Mt3v2Config& cfg);
Mt3v2Config config_from_metadata(const ad::Metadata& meta);

}  // namespace mt3::model
