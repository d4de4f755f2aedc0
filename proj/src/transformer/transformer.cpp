#include "mt3/transformer/transformer.hpp"

namespace mt3::nn {

using namespace mt3::ad;

EncoderBlock EncoderBlock::create(ParameterStore& s, const std::string& name, std::size_t d, std::size_t heads,
                                  std::size_t ffn_hidden, Rng& rng) {
    EncoderBlock b;
    b.attn = MultiHeadAttention::create(s, name + ".attn", d, heads, rng);
    b.norm1 = LayerNormParams::create(s, name + ".norm1", d);
    b.ffn = FeedForward::create(s, name + ".ffn", d, ffn_hidden, d, rng);
    b.norm2 = LayerNormParams::create(s, name + ".norm2", d);
    return b;
}

Tensor EncoderBlock::operator()(const Bound& p, const Tensor& z, const Tensor& q, const ForwardContext& ctx) const {
    const Tensor zq = add(z, q);
    const Tensor t = norm1(p, add(zq, ctx.drop(attn(p, zq))));
    return norm2(p, add(t, ffn(p, t, ctx)));
}

DecoderBlock DecoderBlock::create(ParameterStore& s, const std::string& name, std::size_t d, std::size_t heads,
                                  std::size_t ffn_hidden, Rng& rng) {
    DecoderBlock b;
    b.self_attn = MultiHeadAttention::create(s, name + ".self", d, heads, rng);
    b.norm1 = LayerNormParams::create(s, name + ".norm1", d);
    b.cross_attn = MultiHeadAttention::create(s, name + ".cross", d, heads, rng);
    b.norm2 = LayerNormParams::create(s, name + ".norm2", d);
    b.ffn = FeedForward::create(s, name + ".ffn", d, ffn_hidden, d, rng);
    b.norm3 = LayerNormParams::create(s, name + ".norm3", d);
    return b;
}

Tensor DecoderBlock::operator()(const Bound& p, const Tensor& o, const Tensor& q, const Tensor& e,
                                const ForwardContext& ctx) const {
    const Tensor oq = add(o, q);
    const Tensor r = norm1(p, add(oq, ctx.drop(self_attn(p, oq))));
    const Tensor eb = norm2(p, add(r, ctx.drop(cross_attn(p, r, e))));
    return norm3(p, add(eb, ffn(p, eb, ctx)));
}

Tensor encoder_forward(const Bound& p, const std::vector<EncoderBlock>& blocks, const Tensor& z, const Tensor& q,
                       const ForwardContext& ctx) {
    if (z.shape() != q.shape()) throw DimensionError("encoder: inputs and encodings differ in shape");
    Tensor x = z;
    for (const auto& b : blocks) x = b(p, x, q, ctx);
    return x;
}

std::vector<Tensor> decoder_forward(const Bound& p, const std::vector<DecoderBlock>& blocks, const Tensor& o,
                                    const Tensor& q, const Tensor& e, const ForwardContext& ctx) {
    if (o.shape() != q.shape()) throw DimensionError("decoder: queries and encodings differ in shape");
    if (!blocks.empty() && e.rows() != o.rows()) throw DimensionError("decoder: memory width differs from queries");
    std::vector<Tensor> out;
    Tensor x = o;
    for (const auto& b : blocks) {
        x = b(p, x, q, e, ctx);
        out.push_back(x);
    }
    return out;
}

}  // namespace mt3::nn
