#pragma once

#include <vector>

#include "mt3/transformer/layers.hpp"

namespace mt3::nn {

struct EncoderBlock {
    MultiHeadAttention attn;
    LayerNormParams norm1, norm2;
    FeedForward ffn;

    static EncoderBlock create(ad::ParameterStore& s, const std::string& name, std::size_t d, std::size_t heads,
                               std::size_t ffn_hidden, Rng& rng);
    /// z̃ = z + q;  t̃ = LN(z̃ + MHA(z̃));  out = LN(t̃ + FFN(t̃)).
    Tensor operator()(const Bound& p, const Tensor& z, const Tensor& q, const ForwardContext& ctx) const;
};

struct DecoderBlock {
    MultiHeadAttention self_attn, cross_attn;
    LayerNormParams norm1, norm2, norm3;
    FeedForward ffn;

    static DecoderBlock create(ad::ParameterStore& s, const std::string& name, std::size_t d, std::size_t heads,
                               std::size_t ffn_hidden, Rng& rng);
    /// õ = o + q;  r̃ = LN(õ + MHA(õ));  ē = LN(r̃ + Cross(r̃, e));  out = LN(ē + FFN(ē)).
    Tensor operator()(const Bound& p, const Tensor& o, const Tensor& q, const Tensor& e,
                      const ForwardContext& ctx) const;
};

/// Runs the blocks in order, re-adding q before each. Zero blocks is identity.
Tensor encoder_forward(const Bound& p, const std::vector<EncoderBlock>& blocks, const Tensor& z, const Tensor& q,
                       const ForwardContext& ctx = {});

/// Output of every decoder block, first to last. Zero blocks gives an empty list.
std::vector<Tensor> decoder_forward(const Bound& p, const std::vector<DecoderBlock>& blocks, const Tensor& o,
                                    const Tensor& q, const Tensor& e, const ForwardContext& ctx = {});

}  // namespace mt3::nn
