#include "mt3/model/mt3v2.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mt3::model {

using namespace mt3::ad;

void Mt3v2Config::validate() const {
    if (d_model == 0 || n_heads == 0 || k == 0 || ffn_hidden == 0 || head_hidden == 0 || contrastive_hidden == 0 ||
        contrastive_dim == 0)
        throw std::invalid_argument("model widths and counts must be positive");
    if (n_decoder == 0) throw std::invalid_argument("at least one decoder block is required");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must lie in [0, 1)");
    for (double s : state_scale)
        if (!(s > 0.0)) throw std::invalid_argument("state scale must be positive");
    fov.validate();
}

Mt3v2Config Mt3v2Config::full_scale() { return {}; }

Mt3v2Config Mt3v2Config::toy() {
    Mt3v2Config c;
    c.d_model = 32;
    c.n_encoder = 2;
    c.n_decoder = 2;
    c.n_heads = 2;
    c.k = 8;
    c.ffn_hidden = 128;
    c.head_hidden = 64;
    c.contrastive_hidden = 64;
    c.contrastive_dim = 32;
    return c;
}

std::vector<std::size_t> top_k(const std::vector<double>& scores, std::size_t k, std::size_t n_real) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    k = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](std::size_t a, std::size_t b) {
        const bool ra = a < n_real, rb = b < n_real;
        if (ra != rb) return ra;
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    idx.resize(k);
    return idx;
}

Mt3v2::Mt3v2(const Mt3v2Config& cfg, std::uint64_t seed) : Mt3v2(cfg, Rng(seed)) {}

Mt3v2::Mt3v2(const Mt3v2Config& cfg, Rng&& rng) : cfg_(cfg) {
    cfg_.validate();
    const auto d = cfg_.d_model;
    const auto hh = cfg_.head_hidden;
    auto& s = params_;
    lift = nn::Linear::create(s, "lift", 3, d, rng);
    {
        std::normal_distribution<double> n(0.0, 0.1);
        std::vector<double> table(d * (cfg_.window + 1));
        for (auto& v : table) v = n(rng);
        temporal = s.add("temporal", {d, std::size_t(cfg_.window + 1)}, std::move(table));
    }
    for (std::size_t i = 0; i < cfg_.n_encoder; ++i)
        encoder.push_back(nn::EncoderBlock::create(s, "enc" + std::to_string(i), d, cfg_.n_heads, cfg_.ffn_hidden, rng));
    score_ffn = nn::FeedForward::create(s, "sel.score", d, hh, 1, rng);
    delta_ffn = nn::FeedForward::create(s, "sel.delta", d, hh, 3, rng, true);
    query_ffn = nn::FeedForward::create(s, "sel.query", d, hh, d, rng);
    pos_ffn = nn::FeedForward::create(s, "sel.pos", d, hh, d, rng);
    for (std::size_t i = 0; i < cfg_.n_decoder; ++i) {
        const auto name = "dec" + std::to_string(i);
        decoder.push_back(nn::DecoderBlock::create(s, name, d, cfg_.n_heads, cfg_.ffn_hidden, rng));
        Heads h;
        h.delta = nn::FeedForward::create(s, name + ".head.delta", d, hh, 4, rng, true);
        h.cov = nn::FeedForward::create(s, name + ".head.cov", d, hh, 4, rng);
        h.exist = nn::FeedForward::create(s, name + ".head.exist", d, hh, 1, rng);
        heads.push_back(h);
    }
    contrastive_ffn =
        nn::FeedForward::create(s, "contrastive", d, cfg_.contrastive_hidden, cfg_.contrastive_dim, rng);
}

Preprocessed Mt3v2::preprocess(const Bound& p, const sim::MeasurementSet& ms) const {
    if (ms.empty()) throw ContractError("preprocess: empty measurement set");
    Tape& tape = p[lift.w].tape();
    const std::size_t n_real = ms.size();
    const std::size_t n = std::max(n_real, cfg_.k);
    std::vector<double> z(3 * n, 0.0);
    std::vector<std::size_t> t_idx(n, std::size_t(cfg_.window));
    Preprocessed out;
    out.labels.assign(n, -1);
    out.n_real = n_real;
    for (std::size_t j = 0; j < n_real; ++j) {
        const auto& m = ms.items[j];
        const int rel = m.t - (ms.last_step - cfg_.window);
        if (rel < 0 || rel > cfg_.window || m.t > ms.last_step)
            throw ContractError("preprocess: measurement at step " + std::to_string(m.t) + " outside the window");
        const auto zn = cfg_.fov.normalize(m.z);
        for (int r = 0; r < 3; ++r) z[r * n + j] = zn[r];
        t_idx[j] = std::size_t(rel);
        out.labels[j] = m.label;
    }
    out.z_norm = tape.constant({3, n}, std::move(z));
    out.lifted = lift(p, out.z_norm);
    out.temporal = select_cols(p[temporal], t_idx);
    return out;
}

Selection Mt3v2::select(const Bound& p, const Tensor& e, const Tensor& z_norm, std::size_t n_real,
                        const std::vector<std::size_t>* forced) const {
    Selection s;
    s.scores = sigmoid(score_ffn(p, e));
    if (forced) {
        if (forced->size() != cfg_.k) throw ContractError("select: forced index count differs from k");
        s.indices = *forced;
    } else {
        auto v = s.scores.value();
        s.indices = top_k({v.begin(), v.end()}, cfg_.k, n_real);
    }
    const Tensor e_sel = select_cols(e, s.indices);
    s.delta = delta_ffn(p, e_sel);
    s.z_tilde = add(select_cols(z_norm, s.indices), s.delta);
    s.queries = query_ffn(p, e_sel);
    s.query_pos = pos_ffn(p, e_sel);
    return s;
}

Tensor Mt3v2::contrastive_embeddings(const Bound& p, const Tensor& e) const {
    const Tensor f = contrastive_ffn(p, e);
    // eps keeps the zero vector (and its gradient) finite.
    constexpr double eps = 1e-12;
    const Tensor norm = ad::sqrt(add_scalar(sum_rows(square(f)), eps * eps));
    return div(f, norm);
}

Tensor Mt3v2::initial_means(const Tensor& z_tilde) const {
    const auto& fov = cfg_.fov;
    const Tensor r = add_scalar(scale(slice_rows(z_tilde, 0, 1), 0.5 * fov.r.extent()), fov.r.center());
    const Tensor th = add_scalar(scale(slice_rows(z_tilde, 2, 3), 0.5 * fov.theta.extent()), fov.theta.center());
    const Tensor zeros = z_tilde.tape().constant({2, z_tilde.cols()}, 0.0);
    return concat_rows({mul(r, ad::cos(th)), mul(r, ad::sin(th)), zeros});
}

ForwardOutput Mt3v2::forward(const Bound& p, const sim::MeasurementSet& ms, const ForwardOptions& opt) const {
    Tape& tape = p[lift.w].tape();
    const nn::ForwardContext ctx{opt.train, cfg_.dropout, opt.rng};
    ForwardOutput out;
    out.input = preprocess(p, ms);
    out.embeddings = nn::encoder_forward(p, encoder, out.input.lifted, out.input.temporal, ctx);
    out.selection = select(p, out.embeddings, out.input.z_norm, out.input.n_real, opt.forced_indices);
    out.mu0 = initial_means(out.selection.z_tilde);

    const auto& sc = cfg_.state_scale;
    const Tensor s = tape.constant({4, 1}, {sc[0], sc[1], sc[2], sc[3]});
    const Tensor s2 = tape.constant({4, 1}, {sc[0] * sc[0], sc[1] * sc[1], sc[2] * sc[2], sc[3] * sc[3]});
    const auto decoded =
        nn::decoder_forward(p, decoder, out.selection.queries, out.selection.query_pos, out.embeddings, ctx);
    Tensor mu = out.mu0;
    for (std::size_t l = 0; l < decoded.size(); ++l) {
        const auto& h = heads[l];
        LayerOutput y;
        y.delta = mul(h.delta(p, decoded[l], ctx), s);
        mu = add(mu, y.delta);
        y.mean = mu;
        y.var = mul(softplus(h.cov(p, decoded[l], ctx)), s2);
        y.logit = h.exist(p, decoded[l], ctx);
        y.prob = sigmoid(y.logit);
        out.layers.push_back(y);
    }
    return out;
}

metrics::MultiBernoulli Mt3v2::to_multi_bernoulli(const LayerOutput& out) {
    const std::size_t k = out.mean.cols();
    metrics::MultiBernoulli mb(k);
    for (std::size_t i = 0; i < k; ++i) {
        auto& b = mb[i];
        b.cov.setZero();
        for (int r = 0; r < 4; ++r) {
            b.mean[r] = out.mean.at(r, i);
            b.cov(r, r) = out.var.at(r, i);
        }
        b.existence = out.prob.at(0, i);
    }
    return mb;
}

metrics::MultiBernoulli Mt3v2::predict(const sim::MeasurementSet& ms) const {
    Tape tape(false);
    const auto p = params_.bind(tape, false);
    const auto out = forward(p, ms);
    return to_multi_bernoulli(out.layers.back());
}

ad::Metadata config_metadata(const Mt3v2Config& c) {
    auto num = [](double v) {
        std::ostringstream o;
        o.precision(17);
        o << v;
        return o.str();
    };
    ad::Metadata m;
    m["d_model"] = std::to_string(c.d_model);
    m["n_encoder"] = std::to_string(c.n_encoder);
    m["n_decoder"] = std::to_string(c.n_decoder);
    m["n_heads"] = std::to_string(c.n_heads);
    m["k"] = std::to_string(c.k);
    m["ffn_hidden"] = std::to_string(c.ffn_hidden);
    m["head_hidden"] = std::to_string(c.head_hidden);
    m["contrastive_hidden"] = std::to_string(c.contrastive_hidden);
    m["contrastive_dim"] = std::to_string(c.contrastive_dim);
    m["dropout"] = num(c.dropout);
    m["window"] = std::to_string(c.window);
    m["fov"] = num(c.fov.r.min) + " " + num(c.fov.r.max) + " " + num(c.fov.rdot.min) + " " + num(c.fov.rdot.max) +
               " " + num(c.fov.theta.min) + " " + num(c.fov.theta.max);
    m["state_scale"] = num(c.state_scale[0]) + " " + num(c.state_scale[1]) + " " + num(c.state_scale[2]) + " " +
                       num(c.state_scale[3]);
    return m;
}

Mt3v2Config config_from_metadata(const ad::Metadata& m) {
    auto get = [&](const char* key) -> const std::string& {
        auto it = m.find(key);
        if (it == m.end()) throw CheckpointError(std::string("checkpoint metadata lacks ") + key);
        return it->second;
    };
    auto size = [&](const char* key) { return static_cast<std::size_t>(std::stoull(get(key))); };
    Mt3v2Config c;
    c.d_model = size("d_model");
    c.n_encoder = size("n_encoder");
    c.n_decoder = size("n_decoder");
    c.n_heads = size("n_heads");
    c.k = size("k");
    c.ffn_hidden = size("ffn_hidden");
    c.head_hidden = size("head_hidden");
    c.contrastive_hidden = size("contrastive_hidden");
    c.contrastive_dim = size("contrastive_dim");
    c.dropout = std::stod(get("dropout"));
    c.window = std::stoi(get("window"));
    std::istringstream f(get("fov"));
    f >> c.fov.r.min >> c.fov.r.max >> c.fov.rdot.min >> c.fov.rdot.max >> c.fov.theta.min >> c.fov.theta.max;
    std::istringstream s(get("state_scale"));
    for (auto& v : c.state_scale) s >> v;
    if (!f || !s) throw CheckpointError("malformed fov/state_scale metadata");
    return c;
}

void Mt3v2::save(const std::filesystem::path& dir, ad::Metadata extra) const {
    auto meta = config_metadata(cfg_);
    meta.insert(extra.begin(), extra.end());
    save_checkpoint(dir, params_, meta);
}

Mt3v2 Mt3v2::load(const std::filesystem::path& dir, ad::Metadata* meta) {
    auto ck = load_checkpoint(dir);
    Mt3v2 m(config_from_metadata(ck.meta), 0);
    if (m.params_.size() != ck.params.size()) throw CheckpointError("checkpoint parameter count mismatch");
    for (std::size_t i = 0; i < ck.params.size(); ++i) {
        if (m.params_[i].name != ck.params[i].name || m.params_[i].shape != ck.params[i].shape)
            throw CheckpointError("checkpoint parameter " + ck.params[i].name + " does not fit the model");
        m.params_[i].value = std::move(ck.params[i].value);
    }
    if (meta) *meta = std::move(ck.meta);
    return m;
}

}  // namespace mt3::model
