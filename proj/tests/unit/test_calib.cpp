#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "dabm/calib/flow.hpp"
#include "dabm/calib/gvi.hpp"
#include "dabm/calib/mmd.hpp"
#include "dabm/calib/models.hpp"
#include "dabm/calib/prior.hpp"
#include "dabm/calib/tape.hpp"
#include "dabm/models/sir.hpp"

using namespace dabm;
using namespace dabm::calib;
using dabm::ad::Dual;

namespace {

Prior std_normal_prior(std::size_t d) {
    Prior p;
    for (std::size_t i = 0; i < d; ++i) p.push_back({"x" + std::to_string(i), PriorKind::normal, 0.0, 1.0});
    return p;
}

Posterior gaussian_posterior(std::vector<double> phi) {
    FamilySpec fs;
    fs.kind = FamilyKind::diagonal_gaussian;
    fs.dim = phi.size() / 2;
    return Posterior(VariationalFamily(fs), std_normal_prior(fs.dim), std::move(phi));
}

// Quadratic loss 0.5 sum c_i (theta_i - m_i)^2; with a N(0, 1) prior the
// generalised posterior is N(c m / (c + 1), 1 / (c + 1)) per coordinate.
const std::vector<double> kC = {2.0, 0.5};
const std::vector<double> kM = {1.0, -2.0};

Dual quad_loss(std::span<const Dual> th) {
    Dual l(0.0);
    for (std::size_t i = 0; i < th.size(); ++i) l = l + 0.5 * kC[i] * (th[i] - kM[i]) * (th[i] - kM[i]);
    return l;
}

double quad_loss_d(std::span<const double> th) {
    double l = 0.0;
    for (std::size_t i = 0; i < th.size(); ++i) l += 0.5 * kC[i] * (th[i] - kM[i]) * (th[i] - kM[i]);
    return l;
}

std::vector<double> z_draw(std::uint64_t master, std::uint64_t step, std::size_t b, std::size_t d) {
    Rng r = seed_split(master, stream_id(step, StreamPurpose::variational, b));
    std::vector<double> z(d);
    for (auto& v : z) v = r.normal();
    return z;
}

PointSet<double> normal_points(Rng& rng, int n, double mean) {
    PointSet<double> s;
    for (int i = 0; i < n; ++i) s.push_back({mean + rng.normal()});
    return s;
}

}  // namespace

TEST_SUITE("calib") {
    TEST_CASE("mmd: identical sets, singletons, separated distributions") {
        const PointSet<double> a = {{0.0, 1.0}, {2.0, -1.0}, {0.5, 0.5}};
        CHECK(std::abs(mmd_squared(a, a, 1.3)) < 1e-14);

        const PointSet<double> u = {{0.2}}, v = {{1.1}};
        const double k = std::exp(-0.81 / (2 * 0.7 * 0.7));
        CHECK(mmd_squared(u, v, 0.7) == doctest::Approx(2.0 - 2.0 * k));

        Rng rng(1);
        const auto x = normal_points(rng, 200, 0.0), y = normal_points(rng, 200, 0.0), z = normal_points(rng, 200, 3.0);
        const double h = median_heuristic(x);
        CHECK(mmd_squared(z, x, h) >= 10.0 * mmd_squared(y, x, h));

        CHECK_THROWS(mmd_squared(PointSet<double>{}, a, 1.0));
        CHECK_THROWS(mmd_squared(a, a, 0.0));
    }

    TEST_CASE("mmd loss on trajectories") {
        const PointSet<double> obs = {{1.0, 0.0}, {3.0, 1.0}, {2.0, 4.0}, {0.5, 2.0}};
        const MmdLoss loss({obs});
        CHECK(std::abs(loss(std::vector<PointSet<double>>{obs})) < 1e-14);
        const PointSet<double> other = {{5.0, 0.0}, {3.0, 1.0}, {2.0, 9.0}, {0.5, 2.0}};
        CHECK(loss(std::vector<PointSet<double>>{other}) > 0.0);
        CHECK(loss.bandwidth() > 0.0);
        CHECK_THROWS(MmdLoss({obs, PointSet<double>{{1.0, 0.0}}}));
    }

    TEST_CASE("reverse tape matches finite differences") {
        auto f = [](auto x, auto y) { return exp(x * y) / (1.0 + x) + log1p(y * y) - tanh(x) * sigmoid(y) + softplus(x - y); };
        Tape tape;
        const Var x = tape.variable(0.3), y = tape.variable(-0.8);
        const Var out = f(x, y);
        const auto g = tape.gradient(out, {x, y});
        const double h = 1e-6;
        auto fd = [&](double dx, double dy) {
            return f(Var(0.3 + dx), Var(-0.8 + dy)).value();
        };
        CHECK(g[0] == doctest::Approx((fd(h, 0) - fd(-h, 0)) / (2 * h)).epsilon(1e-7));
        CHECK(g[1] == doctest::Approx((fd(0, h) - fd(0, -h)) / (2 * h)).epsilon(1e-7));
    }

    TEST_CASE("prior bijectors round-trip and stay in support") {
        const Prior pr = {{"u", PriorKind::uniform, -2.0, 0.5},
                          {"e", PriorKind::exponential, 1.0, 2.0},
                          {"n", PriorKind::normal, 0.3, 1.5}};
        Rng rng(2);
        for (const auto& p : pr) {
            p.validate();
            for (int k = 0; k < 200; ++k) {
                const double u = 6.0 * rng.normal();
                const double th = p.forward(u);
                CHECK(p.in_support(th));
                if (std::abs(u) < 15) CHECK(p.inverse(th) == doctest::Approx(u).epsilon(1e-9));
                // log|Jacobian| against a finite difference of forward.
                if (std::abs(u) < 5) {
                    const double h = 1e-6;
                    const double jac = (p.forward(u + h) - p.forward(u - h)) / (2 * h);
                    CHECK(p.log_abs_det(u) == doctest::Approx(std::log(jac)).epsilon(1e-6));
                }
            }
            for (int k = 0; k < 100; ++k) CHECK(p.in_support(p.sample(rng)));
        }
        CHECK_THROWS(ParamPrior{"bad", PriorKind::uniform, 1.0, 1.0}.validate());
    }

    TEST_CASE("one-dimensional flow density integrates to one") {
        FamilySpec fs;
        fs.dim = 1;
        fs.hidden = 8;
        const VariationalFamily fam(fs);
        Rng rng(3);
        auto phi = fam.init(rng);
        for (auto& v : phi) v += 0.3 * rng.normal();
        double total = 0.0;
        const double lo = -40.0, hi = 40.0;
        const int n = 80000;
        const double dx = (hi - lo) / n;
        for (int k = 0; k <= n; ++k) {
            const std::vector<double> u = {lo + k * dx};
            const double w = (k == 0 || k == n) ? 0.5 : 1.0;
            total += w * std::exp(fam.log_density(std::span<const double>(phi), std::span<const double>(u))) * dx;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
    }

    TEST_CASE("flow sampling agrees with its density") {
        FamilySpec fs;
        fs.dim = 3;
        const VariationalFamily fam(fs);
        Rng rng(4);
        auto phi = fam.init(rng);
        for (auto& v : phi) v += 0.1 * rng.normal();
        for (int k = 0; k < 20; ++k) {
            const std::vector<double> z = {rng.normal(), rng.normal(), rng.normal()};
            const auto s = fam.sample(std::span<const double>(phi), std::span<const double>(z));
            const double ld = fam.log_density(std::span<const double>(phi), std::span<const double>(s.u));
            CHECK(s.log_q == doctest::Approx(ld).epsilon(1e-9));
        }
    }

    TEST_CASE("reverse and forward mode agree on the flow log-density") {
        FamilySpec fs;
        fs.dim = 2;
        fs.hidden = 6;
        const VariationalFamily fam(fs);
        Rng rng(5);
        auto phi = fam.init(rng);
        for (auto& v : phi) v += 0.1 * rng.normal();
        const std::vector<double> u = {0.4, -1.1};
        Tape tape;
        std::vector<Var> pv;
        for (double v : phi) pv.push_back(tape.variable(v));
        const std::vector<Var> uv(u.begin(), u.end());
        const auto g = tape.gradient(fam.log_density(std::span<const Var>(pv), std::span<const Var>(uv)), pv);
        for (std::size_t i = 0; i < phi.size(); i += 7) {
            std::vector<Dual> pd(phi.begin(), phi.end());
            pd[i] = Dual::variable(phi[i], 1, 0);
            const std::vector<Dual> ud(u.begin(), u.end());
            const Dual f = fam.log_density(std::span<const Dual>(pd), std::span<const Dual>(ud));
            CHECK(g[i] == doctest::Approx(f.d(0)).epsilon(1e-9));
        }
    }

    TEST_CASE("pathwise gradient: closed-form Gaussian oracle") {
        const std::vector<double> phi = {0.2, -0.4, -0.3, 0.1};  // mu, rho
        const auto post = gaussian_posterior(phi);
        GviConfig cfg;
        cfg.batch = 6;
        const auto est = pathwise_grad(post, ThetaLoss(quad_loss), cfg, 7, 3);
        REQUIRE(est.grad.size() == phi.size());

        // Per-draw derivative of l + log q - log p along theta = mu + exp(rho) z.
        std::vector<double> expect(4, 0.0);
        for (int b = 0; b < cfg.batch; ++b) {
            const auto z = z_draw(7, 3, b, 2);
            for (std::size_t i = 0; i < 2; ++i) {
                const double s = std::exp(phi[2 + i]);
                const double th = phi[i] + s * z[i];
                const double dth = kC[i] * (th - kM[i]) + th;
                expect[i] += dth / cfg.batch;
                expect[2 + i] += (dth * s * z[i] - 1.0) / cfg.batch;
            }
        }
        for (std::size_t k = 0; k < 4; ++k) CHECK(est.grad[k] == doctest::Approx(expect[k]).epsilon(1e-10));

        // Large batch: close to the gradient of KL(q || posterior).
        cfg.batch = 20000;
        const auto big = pathwise_grad(post, ThetaLoss(quad_loss), cfg, 8, 0);
        for (std::size_t i = 0; i < 2; ++i) {
            const double s2 = std::exp(2 * phi[2 + i]);
            const double gmu = (kC[i] + 1) * phi[i] - kC[i] * kM[i];
            const double grho = (kC[i] + 1) * s2 - 1.0;
            CHECK(big.grad[i] == doctest::Approx(gmu).epsilon(0.03).scale(1.0));
            CHECK(big.grad[2 + i] == doctest::Approx(grho).epsilon(0.03).scale(1.0));
        }
    }

    TEST_CASE("pathwise gradient with a constant loss is the KL-only gradient") {
        const auto post = gaussian_posterior({0.5, -0.2, 0.3, -0.6});
        GviConfig cfg;
        cfg.batch = 4;
        const auto zero = pathwise_grad(post, ThetaLoss([](std::span<const Dual>) { return Dual(0.0); }), cfg, 1, 0);
        const auto five = pathwise_grad(post, ThetaLoss([](std::span<const Dual>) { return Dual(5.0); }), cfg, 1, 0);
        for (std::size_t k = 0; k < zero.grad.size(); ++k) CHECK(five.grad[k] == doctest::Approx(zero.grad[k]));
        CHECK(five.mean_loss == 5.0);

        // q equal to the prior and l = 0: the objective vanishes draw by draw.
        const auto prior_like = gaussian_posterior({0.0, 0.0, 0.0, 0.0});
        const auto kl = pathwise_grad(prior_like, ThetaLoss([](std::span<const Dual>) { return Dual(0.0); }), cfg, 1, 0);
        CHECK(std::abs(kl.objective) < 1e-12);
    }

    TEST_CASE("vargrad: constant weights and the two-sample identity") {
        GviConfig cfg;
        cfg.batch = 5;
        const auto prior_like = gaussian_posterior({0.0, 0.0, 0.0, 0.0});
        const auto flat = vargrad(prior_like, [](std::span<const double>) { return 0.0; }, cfg, 2, 0);
        for (double g : flat.grad) CHECK(std::abs(g) < 1e-12);

        const std::vector<double> phi = {0.3, -0.1, -0.5, 0.2};
        const auto post = gaussian_posterior(phi);
        cfg.batch = 2;
        const auto two = vargrad(post, quad_loss_d, cfg, 9, 4);
        double w[2];
        std::vector<double> score[2];
        for (int b = 0; b < 2; ++b) {
            const auto z = z_draw(9, 4, b, 2);
            double lq = 0.0, lp = 0.0;
            std::vector<double> th(2);
            score[b].assign(4, 0.0);
            for (std::size_t i = 0; i < 2; ++i) {
                const double s = std::exp(phi[2 + i]);
                th[i] = phi[i] + s * z[i];
                lq += -0.5 * z[i] * z[i] - 0.5 * std::log(2 * M_PI) - phi[2 + i];
                lp += -0.5 * th[i] * th[i] - 0.5 * std::log(2 * M_PI);
                score[b][i] = z[i] / s;
                score[b][2 + i] = z[i] * z[i] - 1.0;
            }
            w[b] = quad_loss_d(th) + lq - lp;
        }
        CHECK(two.surrogate == doctest::Approx((w[0] - w[1]) * (w[0] - w[1]) / 2));
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(two.grad[k] == doctest::Approx((w[0] - w[1]) * (score[0][k] - score[1][k])).epsilon(1e-9));
        }
        cfg.batch = 1;
        CHECK_THROWS(vargrad(post, quad_loss_d, cfg, 9, 4));
    }

    TEST_CASE("pathwise and vargrad reach the same Gaussian optimum") {
        for (auto which : {GradientEstimator::pathwise, GradientEstimator::vargrad}) {
            auto post = gaussian_posterior({0.0, 0.0, 0.0, 0.0});
            AdamWConfig oc;
            oc.lr = 0.02;
            AdamW opt(oc, post.phi.size());
            GviConfig cfg;
            cfg.batch = 16;
            for (int step = 0; step < 3000; ++step) {
                const auto g = which == GradientEstimator::pathwise
                                   ? pathwise_grad(post, ThetaLoss(quad_loss), cfg, 21, step)
                                   : vargrad(post, quad_loss_d, cfg, 21, step);
                opt.step(post.phi, g.grad);
            }
            for (std::size_t i = 0; i < 2; ++i) {
                CHECK(post.phi[i] == doctest::Approx(kC[i] * kM[i] / (kC[i] + 1)).epsilon(0.1).scale(1.0));
                CHECK(std::exp(post.phi[2 + i]) == doctest::Approx(1.0 / std::sqrt(kC[i] + 1)).epsilon(0.1).scale(1.0));
            }
        }
    }

    TEST_CASE("AdamW: first step has size lr; clipping and decay") {
        AdamWConfig c;
        c.lr = 0.1;
        c.clip_unit_norm = false;
        AdamW opt(c, 2);
        std::vector<double> p = {1.0, 1.0};
        opt.step(p, {3.0, -0.001});
        CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-6));
        CHECK(p[1] == doctest::Approx(1.1).epsilon(1e-4));

        c.weight_decay = 0.5;
        AdamW decay(c, 1);
        std::vector<double> q = {2.0};
        decay.step(q, {0.0});
        CHECK(q[0] == doctest::Approx(2.0 * (1 - 0.1 * 0.5)));
        CHECK_THROWS(AdamW(AdamWConfig{-1.0}, 1));
    }

    TEST_CASE("training bookkeeping and checkpoints") {
        namespace sir = dabm::models::sir;
        Rng grng(1);
        const auto graph = sir::ContactGraph::erdos_renyi(150, 0.05, grng);
        sir::SimConfig cfg;
        cfg.steps = 15;
        const auto model = sir_calib_model(sir::default_params(), {sir::Param::log10_I0, sir::Param::log10_beta},
                                           graph, cfg, est::EstimatorKind{});
        const auto obs = model.simulate(std::vector<double>{-2.0, std::log10(0.4)}, 5);
        const MmdLoss loss({obs});
        const Prior prior = {{"log10_I0", PriorKind::uniform, -4.0, -1.0}, {"log10_beta", PriorKind::uniform, -2.0, 0.5}};
        FamilySpec fs;
        fs.hidden = 8;
        fs.layers = 2;
        fs.blocks = 1;
        const auto init = make_posterior(fs, prior, 3);

        TrainConfig tc;
        tc.epochs = 0;
        const auto none = train(tc, init, model, loss);
        CHECK(none.history.empty());
        CHECK(none.best_epoch == -1);
        CHECK(none.posterior.phi == init.phi);

        tc.epochs = 3;
        tc.gvi.batch = 2;
        int calls = 0;
        const auto res = train(tc, init, model, loss, [&](const HistoryRow&) { ++calls; });
        CHECK(res.history.size() == 3);
        CHECK(calls == 3);
        for (const auto& h : res.history) {
            CHECK(std::isfinite(h.train_loss));
            CHECK(std::isfinite(h.val_loss));
        }
        Rng srng(2);
        for (const auto& th : res.posterior.sample(50, srng)) {
            CHECK(prior[0].in_support(th[0]));
            CHECK(prior[1].in_support(th[1]));
        }

        std::stringstream ss;
        save_checkpoint(ss, res.posterior);
        const auto back = load_checkpoint(ss);
        CHECK(back.phi == res.posterior.phi);
        CHECK(back.prior.size() == 2);
        CHECK(back.prior[1].b == 0.5);
        std::istringstream bad("not a checkpoint");
        CHECK_THROWS(load_checkpoint(bad));
    }

    TEST_CASE("pathwise gradients vary less than vargrad on the nine-parameter SIR case") {
        namespace sir = dabm::models::sir;
        Rng grng(2);
        const auto graph = sir::ContactGraph::erdos_renyi(200, 0.05, grng);
        sir::SimConfig cfg;
        cfg.steps = 30;
        std::vector<sir::Param> free;
        for (std::size_t i = 0; i < sir::kNumParams; ++i) free.push_back(static_cast<sir::Param>(i));
        const auto model = sir_calib_model(sir::default_params(), free, graph, cfg, est::EstimatorKind{});
        const auto th = sir::default_params();
        const auto obs = model.simulate(std::vector<double>(th.begin(), th.end()), 11);
        const MmdLoss loss({obs});
        Prior prior;
        const auto names = sir::param_names();
        for (std::size_t i = 0; i < sir::kNumParams; ++i) {
            const double half = i < 3 ? 0.5 : (i == 5 || i == 8 ? 0.2 : 5.0);
            prior.push_back({names[i], PriorKind::uniform, th[i] - half, th[i] + half});
        }
        FamilySpec fs;
        fs.hidden = 16;
        fs.layers = 2;
        fs.blocks = 1;
        const auto post = make_posterior(fs, prior, 4);
        GviConfig gc;
        gc.batch = 4;
        auto spread = [&](bool pathwise) {
            const int R = 12;
            std::vector<std::vector<double>> gs;
            for (int r = 0; r < R; ++r) {
                gs.push_back(pathwise ? pathwise_grad(post, model, loss, gc, 31, r).grad
                                      : vargrad(post, model, loss, gc, 31, r).grad);
            }
            double total = 0.0;
            for (std::size_t k = 0; k < gs[0].size(); ++k) {
                double m = 0.0, v = 0.0;
                for (const auto& g : gs) m += g[k] / R;
                for (const auto& g : gs) v += (g[k] - m) * (g[k] - m) / (R - 1);
                total += v;
            }
            return total;
        };
        const double vp = spread(true), vv = spread(false);
        MESSAGE("total gradient variance: pathwise " << vp << ", vargrad " << vv);
        CHECK(vp <= vv);
    }
}
