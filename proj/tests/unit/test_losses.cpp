#include "mt3/losses/losses.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gradcheck.hpp"
#include "model_fixtures.hpp"
#include "oracles.hpp"

using namespace mt3::losses;
using mt3::ad::Tape;
using mt3::model::LayerOutput;

namespace {

using Rng = std::mt19937_64;

State random_state(Rng& rng, double sd = 5.0) {
    std::normal_distribution<double> n(0.0, sd);
    return {n(rng), n(rng), n(rng), n(rng)};
}

// Independent density evaluation through a full covariance matrix.
double gaussian_pdf(const State& x, const State& mu, const Eigen::Vector4d& var) {
    const Eigen::Matrix4d S = var.asDiagonal();
    const State d = x - mu;
    const double q = d.transpose() * S.inverse() * d;
    return std::exp(-0.5 * q) / std::sqrt(std::pow(2 * std::numbers::pi, 4) * S.determinant());
}

struct Layer {
    std::vector<State> means;
    std::vector<Eigen::Vector4d> vars;
    std::vector<double> logits;
};

Layer random_layer(Rng& rng, std::size_t k) {
    Layer l;
    std::uniform_real_distribution<double> u(0.2, 3.0), lg(-3, 3);
    for (std::size_t i = 0; i < k; ++i) {
        l.means.push_back(random_state(rng));
        l.vars.push_back({u(rng), u(rng), u(rng), u(rng)});
        l.logits.push_back(lg(rng));
    }
    return l;
}

LayerOutput record(Tape& t, const Layer& l) {
    const std::size_t k = l.means.size();
    std::vector<double> m(4 * k), v(4 * k);
    for (std::size_t i = 0; i < k; ++i)
        for (int d = 0; d < 4; ++d) {
            m[d * k + i] = l.means[i][d];
            v[d * k + i] = l.vars[i][d];
        }
    LayerOutput y;
    y.mean = t.leaf({4, k}, m);
    y.var = t.leaf({4, k}, v);
    y.logit = t.leaf({1, k}, l.logits);
    y.prob = mt3::ad::sigmoid(y.logit);
    return y;
}

double prob(double logit) { return 1.0 / (1.0 + std::exp(-logit)); }

}  // namespace

TEST(MatchCost, Examples) {
    EXPECT_EQ(match_cost(State::Zero(), 0.3, std::nullopt), 0.0);
    EXPECT_DOUBLE_EQ(match_cost(State::Zero(), 1.0, State{3, 4, 0, 0}), 5.0);
    const State x{1, 2, 3, 4};
    EXPECT_NEAR(match_cost(x, 0.5, x), std::log(2.0), 1e-15);
}

TEST(OptimalMatch, Examples) {
    auto r0 = optimal_match({State::Zero(), State::Ones()}, {0.3, 0.6}, {});
    EXPECT_EQ(r0.sigma, (std::vector<int>{0, 1}));
    EXPECT_EQ(r0.cost, 0.0);
    auto r = optimal_match({State{1, 0, 0, 0}, State{2, 0, 0, 0}}, {1.0, 1.0}, {State::Zero(), State{3, 0, 0, 0}});
    EXPECT_EQ(r.sigma, (std::vector<int>{0, 1}));
    EXPECT_DOUBLE_EQ(r.cost, 2.0);
    EXPECT_THROW(optimal_match({State::Zero()}, {0.5}, {State::Zero(), State::Zero()}), mt3::ad::ContractError);
}

TEST(OptimalMatch, EqualsFactorialEnumeration) {
    Rng rng(1);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t k = 1 + rng() % 6, m = rng() % (k + 1);
        auto l = random_layer(rng, k);
        std::vector<double> p;
        for (double a : l.logits) p.push_back(prob(a));
        std::vector<State> truth;
        for (std::size_t j = 0; j < m; ++j) truth.push_back(random_state(rng));
        auto cost_of = [&](const std::vector<int>& s) {
            double c = 0;
            for (std::size_t i = 0; i < k; ++i)
                c += s[i] < int(m) ? match_cost(l.means[i], p[i], truth[s[i]]) : 0.0;
            return c;
        };
        double best = INFINITY;
        mt3::test::for_each_injection(k, k, [&](const std::vector<int>& s) { best = std::min(best, cost_of(s)); });
        auto r = optimal_match(l.means, p, truth);
        EXPECT_NEAR(r.cost, best, 1e-9);
        EXPECT_NEAR(cost_of(r.sigma), r.cost, 1e-9);
        std::vector<int> id(k);
        std::iota(id.begin(), id.end(), 0);
        EXPECT_LE(r.cost, cost_of(id) + 1e-12);
    }
}

TEST(BernoulliNll, Examples) {
    const State x{1, -2, 0.5, 3};
    EXPECT_NEAR(bernoulli_nll(x, Eigen::Vector4d::Ones(), 0.5, std::nullopt), std::log(2.0), 1e-15);
    const double eps = 1e-9;
    EXPECT_NEAR(bernoulli_nll(x, Eigen::Vector4d::Ones(), 1 - eps, x), 2 * std::log(2 * std::numbers::pi), 1e-8);
    EXPECT_NEAR(2 * std::log(2 * std::numbers::pi), 3.6758, 1e-4);
}

TEST(BernoulliNll, MatchesGaussianPdfOracle) {
    Rng rng(2);
    for (int rep = 0; rep < 500; ++rep) {
        auto l = random_layer(rng, 1);
        const State x = l.means[0] + random_state(rng, 1.0);
        const double p = prob(l.logits[0]);
        const double expect = -std::log(p * gaussian_pdf(x, l.means[0], l.vars[0]));
        EXPECT_NEAR(bernoulli_nll(l.means[0], l.vars[0], p, x), expect, 1e-10 * std::max(1.0, std::abs(expect)));
    }
}

TEST(LayerNll, TapeEqualsScalarSum) {
    Rng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t k = 1 + rng() % 6, m = rng() % (k + 1);
        auto l = random_layer(rng, k);
        std::vector<State> truth;
        for (std::size_t j = 0; j < m; ++j) truth.push_back(random_state(rng));
        std::vector<int> sigma(k);
        std::iota(sigma.begin(), sigma.end(), 0);
        std::shuffle(sigma.begin(), sigma.end(), rng);
        double expect = 0;
        for (std::size_t i = 0; i < k; ++i) {
            std::optional<State> x;
            if (sigma[i] < int(m)) x = truth[sigma[i]];
            expect += bernoulli_nll(l.means[i], l.vars[i], prob(l.logits[i]), x);
        }
        Tape t;
        auto got = layer_nll(record(t, l), truth, MatchResult{sigma, 0}).item();
        EXPECT_NEAR(got, expect, 1e-10 * std::max(1.0, std::abs(expect)));
    }
}

TEST(TrainingLoss, Examples) {
    Tape t;
    Layer l;
    for (int i = 0; i < 4; ++i) {
        l.means.push_back(State::Zero());
        l.vars.push_back(Eigen::Vector4d::Ones());
        l.logits.push_back(0.0);
    }
    auto y = record(t, l);
    auto one = training_loss({y}, {}, {}, {});
    EXPECT_NEAR(one.total.item(), 4 * std::log(2.0), 1e-14);

    auto l2 = random_layer(*std::make_unique<Rng>(4), 4);
    std::vector<State> truth{State{1, 1, 0, 0}, State{-3, 2, 1, 0}};
    auto y2 = record(t, l2);
    const double single = training_loss({y2}, truth, {}, {}).total.item();
    EXPECT_EQ(training_loss({y2, y2}, truth, {}, {}).total.item(), 2 * single);

    std::vector<State> too_many(5, State::Zero());
    EXPECT_THROW(training_loss({y}, too_many, {}, {}), mt3::ad::ContractError);
}

TEST(TrainingLoss, EqualsEnumeratedMatchAcrossLayers) {
    Rng rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t k = 3;
        std::vector<State> truth{random_state(rng, 20), random_state(rng, 20)};
        std::vector<Layer> layers{random_layer(rng, k), random_layer(rng, k)};
        double expect = 0;
        for (const auto& l : layers) {
            double best = INFINITY, nll = 0;
            mt3::test::for_each_injection(k, k, [&](const std::vector<int>& s) {
                double c = 0, v = 0;
                for (std::size_t i = 0; i < k; ++i) {
                    std::optional<State> x;
                    if (s[i] < 2) x = truth[s[i]];
                    c += match_cost(l.means[i], prob(l.logits[i]), x);
                    v += bernoulli_nll(l.means[i], l.vars[i], prob(l.logits[i]), x);
                }
                if (c < best) {
                    best = c;
                    nll = v;
                }
            });
            expect += nll;
        }
        Tape t;
        auto got = training_loss({record(t, layers[0]), record(t, layers[1])}, truth, {}, {}).total.item();
        EXPECT_NEAR(got, expect, 1e-10 * std::max(1.0, std::abs(expect)));
    }
}

TEST(TrainingLoss, LowerExistenceLowersEmptyMatchedTerm) {
    Rng rng(6);
    for (int rep = 0; rep < 100; ++rep) {
        auto l = random_layer(rng, 3);
        Tape t;
        MatchResult all_empty{{0, 1, 2}, 0};
        const double before = layer_nll(record(t, l), {}, all_empty).item();
        l.logits[rep % 3] -= 0.5;
        const double after = layer_nll(record(t, l), {}, all_empty).item();
        EXPECT_LT(after, before);
    }
}

TEST(Contrastive, ZeroCases) {
    Tape t;
    auto u = t.leaf({2, 2}, {0.6, 0.6, 0.8, 0.8});
    EXPECT_NEAR(contrastive_loss(u, {5, 5}).item(), 0.0, 1e-15);
    Rng rng(7);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + rng() % 8;
        std::normal_distribution<double> g;
        std::vector<double> v(3 * n);
        for (auto& x : v) x = g(rng);
        auto ur = t.leaf({3, n}, v);
        EXPECT_EQ(contrastive_loss(ur, std::vector<int>(n, -1)).item(), 0.0);
        // Distinct labels: every positive set is empty.
        std::vector<int> distinct(n);
        std::iota(distinct.begin(), distinct.end(), 0);
        EXPECT_EQ(contrastive_loss(ur, distinct).item(), 0.0);
    }
}

TEST(Contrastive, HandExpandedThreeElements) {
    Rng rng(8);
    for (int rep = 0; rep < 100; ++rep) {
        std::normal_distribution<double> g;
        std::array<Eigen::Vector3d, 3> u;
        for (auto& x : u) x = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
        const double s01 = u[0].dot(u[1]), s02 = u[0].dot(u[2]), s12 = u[1].dot(u[2]);
        // labels (1, 1, -1): anchors 0 and 1 each have the other as sole positive.
        const double l0 = -std::log(std::exp(s01) / (std::exp(s01) + std::exp(s02)));
        const double l1 = -std::log(std::exp(s01) / (std::exp(s01) + std::exp(s12)));
        const double expect = 4.0 * (l0 + l1);
        std::vector<double> v(9);
        for (int j = 0; j < 3; ++j)
            for (int r = 0; r < 3; ++r) v[r * 3 + j] = u[j][r];
        Tape t;
        EXPECT_NEAR(contrastive_loss(t.leaf({3, 3}, v), {1, 1, -1}, 4.0).item(), expect, 1e-12);
    }
}

TEST(Contrastive, JointPermutationInvariance) {
    Rng rng(9);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + rng() % 10;
        std::normal_distribution<double> g;
        std::vector<Eigen::Vector4d> u(n);
        std::vector<int> b(n);
        for (std::size_t j = 0; j < n; ++j) {
            u[j] = Eigen::Vector4d(g(rng), g(rng), g(rng), g(rng)).normalized();
            b[j] = int(rng() % 4) - 1;
        }
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        auto pack = [&](const std::vector<std::size_t>& order, std::vector<int>& labels) {
            std::vector<double> v(4 * n);
            labels.resize(n);
            for (std::size_t j = 0; j < n; ++j) {
                for (int r = 0; r < 4; ++r) v[r * n + j] = u[order[j]][r];
                labels[j] = b[order[j]];
            }
            return v;
        };
        std::vector<std::size_t> id(n);
        std::iota(id.begin(), id.end(), 0);
        std::vector<int> la, lb;
        Tape t;
        auto va = pack(id, la), vb = pack(perm, lb);
        const double a = contrastive_loss(t.leaf({4, n}, va), la).item();
        const double c = contrastive_loss(t.leaf({4, n}, vb), lb).item();
        EXPECT_NEAR(a, c, 1e-12 * std::max(1.0, std::abs(a)));
    }
}

TEST(Gradients, LossesFiniteDifferences) {
    Rng rng(10);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t k = 3;
        auto l = random_layer(rng, k);
        std::vector<State> truth{l.means[1] + random_state(rng, 0.5)};
        std::vector<mt3::test::GradInput> in;
        std::vector<double> m(12), v(12);
        for (std::size_t i = 0; i < k; ++i)
            for (int d = 0; d < 4; ++d) {
                m[d * k + i] = l.means[i][d];
                v[d * k + i] = l.vars[i][d];
            }
        in.push_back({{4, k}, m});
        in.push_back({{4, k}, v});
        in.push_back({{1, k}, l.logits});
        std::normal_distribution<double> g;
        std::vector<double> u(3 * 5);
        for (auto& x : u) x = g(rng);
        in.push_back({{3, 5}, u});
        const MatchResult match{{2, 0, 1}, 0};
        auto f = [&](Tape&, const std::vector<mt3::ad::Tensor>& x) {
            LayerOutput y{x[0], x[1], x[2], mt3::ad::sigmoid(x[2]), {}};
            return mt3::ad::add(layer_nll(y, truth, match), contrastive_loss(x[3], {0, 1, 0, -1, 1}));
        };
        EXPECT_LT(mt3::test::check_gradients(in, f).max_rel, 1e-4);
    }
}

TEST(Gradients, EndToEndModelLoss) {
    Rng rng(11);
    for (int rep = 0; rep < 3; ++rep) {
        mt3::model::Mt3v2 model(mt3::test::tiny_config(), rng());
        mt3::test::perturb(model.params(), rng, 0.2);
        auto ms = mt3::test::random_measurements(rng, 5, model.config().fov, 20, 2);
        std::vector<State> truth{State{40, 10, 1, -1}, State{80, -30, 0, 2}};

        // Fix the top-k indices and the per-layer matches from an unperturbed pass.
        Tape base;
        auto bp = model.params().bind(base, false);
        auto out = model.forward(bp, ms);
        const auto indices = out.selection.indices;
        const auto labels = out.input.labels;
        auto u0 = model.contrastive_embeddings(bp, out.embeddings);
        const auto matches = training_loss(out.layers, truth, u0, labels).matches;

        std::vector<mt3::test::GradInput> in;
        for (const auto& p : model.params()) in.push_back({p.shape, p.value});
        auto f = [&](Tape&, const std::vector<mt3::ad::Tensor>& leaves) {
            mt3::model::ForwardOptions opt;
            opt.forced_indices = &indices;
            auto o = model.forward(leaves, ms, opt);
            auto u = model.contrastive_embeddings(leaves, o.embeddings);
            return training_loss(o.layers, truth, u, o.input.labels, kDefaultBeta, &matches).total;
        };
        auto r = mt3::test::check_gradients(in, f);
        EXPECT_LT(r.max_rel, 1e-3) << "checked " << r.checked << " max_abs " << r.max_abs;
    }
}
