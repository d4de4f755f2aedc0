#include "mt3/pmbm/pmbm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "mt3/assignment/murty.hpp"

namespace mt3::pmbm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogFloor = -700.0;

double log_sum_exp(const std::vector<double>& v) {
    double top = kNegInf;
    for (double x : v) top = std::max(top, x);
    if (top == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(std::max(x - top, kLogFloor));
    return top + std::log(s);
}

double floored(double logw) { return std::max(logw, kLogFloor); }

Gaussian predict_gaussian(const Gaussian& g, const PmbmConfig& cfg) {
    Gaussian out;
    out.mean = cfg.f * g.mean;
    out.cov = cfg.f * g.cov * cfg.f.transpose() + cfg.q;
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

double safe_detection_probability(const Gaussian& g, const PmbmConfig& cfg) {
    try {
        return detection_probability(g, cfg.model, cfg.p_d);
    } catch (const NumericalError&) {
        return 0.0;
    }
}

// Single Gaussian matching the first two moments of a weighted mixture.
Gaussian moment_match(const std::vector<Gaussian>& comps, const std::vector<double>& log_w) {
    const double norm = log_sum_exp(log_w);
    Gaussian out;
    out.mean.setZero();
    out.cov.setZero();
    std::vector<double> w(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) {
        w[i] = std::exp(log_w[i] - norm);
        out.mean += w[i] * comps[i].mean;
    }
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const State d = comps[i].mean - out.mean;
        out.cov += w[i] * (comps[i].cov + d * d.transpose());
    }
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

// Child hypotheses of one parent local hypothesis.
struct Children {
    int miss = -1;
    double miss_logw = 0.0;
    std::vector<int> det;          // per measurement, -1 when not gated
    std::vector<double> det_logw;  // per measurement
};

}  // namespace

void PmbmConfig::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(p_s) || !prob(p_d)) throw std::invalid_argument("PmbmConfig: probabilities must lie in [0, 1]");
    if (clutter_intensity < 0.0 || lambda0 < 0.0 || lambda_b < 0.0)
        throw std::invalid_argument("PmbmConfig: rates must be non-negative");
    if (!(gate > 0.0) || max_hypotheses == 0 || iterations < 1)
        throw std::invalid_argument("PmbmConfig: gate, hypothesis budget and iterations must be positive");
}

PmbmConfig pmbm_config(const sim::ScenarioConfig& sc) {
    PmbmConfig cfg;
    cfg.p_s = sc.p_s;
    cfg.p_d = sc.p_d;
    cfg.clutter_intensity = sc.lambda_c;
    cfg.lambda0 = sc.lambda0;
    cfg.lambda_b = sc.lambda_b;
    cfg.birth_mean = sc.birth_mean;
    cfg.birth_cov = sc.birth_cov;
    cfg.f = sim::transition_matrix(sc.dt);
    cfg.q = sim::process_noise(sc.sigma_q, sc.dt);
    cfg.model = MeasurementModel::radar(sc.fov, sc.meas_cov);
    return cfg;
}

PmbmFilter::PmbmFilter(PmbmConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

PmbmState PmbmFilter::initial_state() const {
    PmbmState s;
    if (cfg_.lambda0 > 0.0) s.ppp.push_back({cfg_.lambda0, cfg_.birth_mean, cfg_.birth_cov});
    s.globals.push_back({0.0, {}});
    return s;
}

PmbmState PmbmFilter::predict(const PmbmState& s) const {
    PmbmState out = s;
    for (auto& c : out.ppp) {
        const Gaussian g = predict_gaussian({c.mean, c.cov}, cfg_);
        c = {c.weight * cfg_.p_s, g.mean, g.cov};
    }
    if (cfg_.lambda_b > 0.0) out.ppp.push_back({cfg_.lambda_b, cfg_.birth_mean, cfg_.birth_cov});
    for (auto& t : out.tracks)
        for (auto& h : t.hypotheses) {
            h.existence *= cfg_.p_s;
            h.state = predict_gaussian(h.state, cfg_);
        }
    return out;
}

PmbmState PmbmFilter::update(const PmbmState& s, const std::vector<Measurement>& z) const {
    const std::size_t nz = z.size(), nt = s.tracks.size();
    const auto& model = cfg_.model;

    // Undetected objects: one potential new track per measurement.
    std::vector<PredictedMeasurement> ppp_pred(s.ppp.size());
    std::vector<char> ppp_ok(s.ppp.size(), 1);
    for (std::size_t c = 0; c < s.ppp.size(); ++c) {
        try {
            ppp_pred[c] = predict_measurement({s.ppp[c].mean, s.ppp[c].cov}, model);
        } catch (const NumericalError&) {
            ppp_ok[c] = 0;
        }
    }
    std::vector<double> new_logw(nz, kNegInf);
    std::vector<LocalHypothesis> new_hyp(nz);
    const double log_kappa = cfg_.clutter_intensity > 0.0 ? std::log(cfg_.clutter_intensity) : kNegInf;
    for (std::size_t j = 0; j < nz; ++j) {
        std::vector<Gaussian> post;
        std::vector<double> logw;
        for (std::size_t c = 0; c < s.ppp.size(); ++c) {
            if (!ppp_ok[c]) continue;
            try {
                if (mahalanobis2(z[j], ppp_pred[c], model) >= cfg_.gate) continue;
                const auto u = sigma_point_update({s.ppp[c].mean, s.ppp[c].cov}, z[j], model, cfg_.iterations);
                const double pd = safe_detection_probability(u.posterior, cfg_);
                if (pd <= 0.0) continue;
                post.push_back(u.posterior);
                logw.push_back(std::log(s.ppp[c].weight) + std::log(pd) + u.log_likelihood);
            } catch (const NumericalError&) {
            }
        }
        const double log_e = log_sum_exp(logw);
        new_logw[j] = log_sum_exp({log_kappa, log_e});
        if (log_e > kNegInf) {
            new_hyp[j].existence = std::exp(log_e - new_logw[j]);
            new_hyp[j].state = moment_match(post, logw);
        }
    }

    PmbmState out;
    for (const auto& c : s.ppp) {
        const double w = c.weight * (1.0 - safe_detection_probability({c.mean, c.cov}, cfg_));
        if (w >= cfg_.prune_ppp) out.ppp.push_back({w, c.mean, c.cov});
    }

    // Existing tracks: missed-detection and per-measurement children of
    // every local hypothesis.
    std::vector<std::vector<Children>> children(nt);
    out.tracks.resize(nt + nz);
    for (std::size_t i = 0; i < nt; ++i) {
        auto& dst = out.tracks[i].hypotheses;
        for (const auto& h : s.tracks[i].hypotheses) {
            Children ch;
            ch.det.assign(nz, -1);
            ch.det_logw.assign(nz, kNegInf);
            if (h.existence <= 0.0) {
                ch.miss = static_cast<int>(dst.size());
                dst.push_back(h);
                children[i].push_back(std::move(ch));
                continue;
            }
            const double pd = safe_detection_probability(h.state, cfg_);
            const double stay = 1.0 - h.existence * pd;
            ch.miss = static_cast<int>(dst.size());
            ch.miss_logw = floored(std::log(stay));
            dst.push_back({stay > 0.0 ? h.existence * (1.0 - pd) / stay : 0.0, h.state});

            PredictedMeasurement pred;
            try {
                pred = predict_measurement(h.state, model);
            } catch (const NumericalError&) {
                children[i].push_back(std::move(ch));
                continue;
            }
            for (std::size_t j = 0; j < nz; ++j) {
                try {
                    if (mahalanobis2(z[j], pred, model) >= cfg_.gate) continue;
                    const auto u = sigma_point_update(h.state, z[j], model, cfg_.iterations);
                    const double pd_post = safe_detection_probability(u.posterior, cfg_);
                    if (pd_post <= 0.0) continue;
                    ch.det[j] = static_cast<int>(dst.size());
                    ch.det_logw[j] = std::log(h.existence) + std::log(pd_post) + u.log_likelihood;
                    dst.push_back({1.0, u.posterior});
                } catch (const NumericalError&) {
                }
            }
            children[i].push_back(std::move(ch));
        }
    }
    for (std::size_t j = 0; j < nz; ++j) out.tracks[nt + j].hypotheses = {LocalHypothesis{}, new_hyp[j]};

    // Normalized parent weights set the per-parent Murty budget.
    std::vector<double> parent_logw;
    for (const auto& g : s.globals) parent_logw.push_back(g.log_weight);
    const double parent_norm = log_sum_exp(parent_logw);

    std::vector<GlobalHypothesis> next;
    for (const auto& g : s.globals) {
        double base = g.log_weight;
        for (std::size_t i = 0; i < nt; ++i) base += children[i][g.local[i]].miss_logw;

        GlobalHypothesis all_missed;
        all_missed.local.resize(nt + nz, 0);
        for (std::size_t i = 0; i < nt; ++i) all_missed.local[i] = children[i][g.local[i]].miss;

        // Measurements no track can take are fixed to a new track; only the
        // contested ones go to Murty.
        std::vector<std::size_t> rows;
        std::vector<std::size_t> cols;
        std::vector<char> col_used(nt, 0);
        double fixed = 0.0;
        for (std::size_t j = 0; j < nz; ++j) {
            bool contested = false;
            for (std::size_t i = 0; i < nt; ++i)
                if (children[i][g.local[i]].det[j] >= 0) {
                    contested = true;
                    col_used[i] = 1;
                }
            if (contested) {
                rows.push_back(j);
            } else if (new_logw[j] > kNegInf) {
                fixed += new_logw[j];
                all_missed.local[nt + j] = 1;
            }
        }
        for (std::size_t i = 0; i < nt; ++i)
            if (col_used[i]) cols.push_back(i);

        if (rows.empty()) {
            all_missed.log_weight = base + fixed;
            next.push_back(std::move(all_missed));
            continue;
        }

        const std::size_t nr = rows.size(), nc = cols.size();
        assignment::CostMatrix cost(nr, nc + nr, assignment::kForbidden);
        for (std::size_t r = 0; r < nr; ++r) {
            const std::size_t j = rows[r];
            for (std::size_t c = 0; c < nc; ++c) {
                const auto& ch = children[cols[c]][g.local[cols[c]]];
                if (ch.det[j] >= 0) cost(r, c) = -(ch.det_logw[j] - ch.miss_logw);
            }
            if (new_logw[j] > kNegInf) cost(r, nc + r) = -new_logw[j];
        }
        const double share = std::exp(g.log_weight - parent_norm);
        const auto k = static_cast<std::size_t>(
            std::max(1.0, std::ceil(static_cast<double>(cfg_.max_hypotheses) * share - 1e-9)));

        std::vector<assignment::Assignment> best;
        try {
            best = assignment::murty_kbest(cost, k);
        } catch (const assignment::InfeasibleError&) {
            all_missed.log_weight = base + fixed;
            next.push_back(std::move(all_missed));
            continue;
        }
        for (const auto& a : best) {
            GlobalHypothesis child = all_missed;
            child.log_weight = base + fixed - a.cost;
            for (std::size_t r = 0; r < nr; ++r) {
                const int c = a.row_to_col[r];
                if (c < static_cast<int>(nc)) {
                    const std::size_t i = cols[c];
                    child.local[i] = children[i][g.local[i]].det[rows[r]];
                } else {
                    child.local[nt + rows[r]] = 1;
                }
            }
            next.push_back(std::move(child));
        }
    }

    // Normalize, prune, renormalize.
    auto normalize = [](std::vector<GlobalHypothesis>& gs) {
        std::vector<double> lw;
        for (const auto& g : gs) lw.push_back(g.log_weight);
        const double n = log_sum_exp(lw);
        for (auto& g : gs) g.log_weight -= n;
    };
    normalize(next);
    const double log_prune = std::log(cfg_.prune_hypothesis);
    const auto top = std::max_element(next.begin(), next.end(), [](const auto& a, const auto& b) {
        return a.log_weight < b.log_weight;
    });
    std::vector<GlobalHypothesis> kept;
    for (auto it = next.begin(); it != next.end(); ++it)
        if (it->log_weight >= log_prune || it == top) kept.push_back(std::move(*it));
    normalize(kept);

    // Bernoullis below the existence threshold become non-existent; tracks
    // left with nothing but non-existent hypotheses are dropped.
    for (auto& t : out.tracks)
        for (auto& h : t.hypotheses)
            if (h.existence < cfg_.prune_existence) h.existence = 0.0;
    std::vector<Track> tracks;
    std::vector<std::vector<int>> remap(out.tracks.size());
    std::vector<std::size_t> kept_tracks;
    for (std::size_t i = 0; i < out.tracks.size(); ++i) {
        std::vector<char> used(out.tracks[i].hypotheses.size(), 0);
        bool alive = false;
        for (const auto& g : kept) {
            used[g.local[i]] = 1;
            alive = alive || out.tracks[i].hypotheses[g.local[i]].existence > 0.0;
        }
        if (!alive) continue;
        Track t;
        remap[i].assign(used.size(), -1);
        for (std::size_t l = 0; l < used.size(); ++l)
            if (used[l]) {
                remap[i][l] = static_cast<int>(t.hypotheses.size());
                t.hypotheses.push_back(out.tracks[i].hypotheses[l]);
            }
        kept_tracks.push_back(i);
        tracks.push_back(std::move(t));
    }
    out.tracks = std::move(tracks);

    // Dropping tracks can make hypotheses coincide; merge them.
    std::map<std::vector<int>, double> merged;
    std::vector<std::vector<int>> order;
    for (const auto& g : kept) {
        std::vector<int> local;
        for (std::size_t i : kept_tracks) local.push_back(remap[i][g.local[i]]);
        auto [it, inserted] = merged.try_emplace(local, g.log_weight);
        if (inserted)
            order.push_back(local);
        else
            it->second = log_sum_exp({it->second, g.log_weight});
    }
    for (auto& local : order) out.globals.push_back({merged[local], std::move(local)});
    normalize(out.globals);
    return out;
}

PmbmState PmbmFilter::run(const sim::MeasurementSet& ms) const {
    PmbmState s = initial_state();
    std::size_t next = 0;
    for (int t = ms.first_step; t <= ms.last_step; ++t) {
        if (t > ms.first_step) s = predict(s);
        std::vector<Measurement> z;
        while (next < ms.items.size() && ms.items[next].t == t) z.push_back(ms.items[next++].z);
        s = update(s, z);
    }
    return s;
}

metrics::PmbDensity to_pmb(const PmbmState& s, double cap) {
    if (s.globals.empty()) throw std::logic_error("to_pmb: no global hypotheses");
    const auto best = std::max_element(s.globals.begin(), s.globals.end(), [](const auto& a, const auto& b) {
        return a.log_weight < b.log_weight;
    });
    metrics::PmbDensity d;
    for (std::size_t i = 0; i < s.tracks.size(); ++i) {
        const auto& h = s.tracks[i].hypotheses[best->local[i]];
        if (h.existence <= 0.0) continue;
        d.bernoullis.push_back({h.state.mean, h.state.cov, std::min(h.existence, cap)});
    }
    d.ppp = metrics::PoissonIntensity::gaussian_mixture(s.ppp);
    return d;
}

}  // namespace mt3::pmbm
