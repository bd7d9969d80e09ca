#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "dabm/gradval/gradval.hpp"
#include "dabm/gradval/probes.hpp"
#include "dabm/models/axtell.hpp"
#include "dabm/models/sir.hpp"

using namespace dabm;
using gradval::Series;

namespace {

// Deterministic smooth toy: y_t = sin(theta0 t / 10) + theta1^2 t, t = 0..T-1.
gradval::ModelProbe toy_probe(int T) {
    gradval::ModelProbe m;
    m.name = "toy";
    m.param_names = {"a", "b"};
    m.classes = {gradval::ParamClass::probability, gradval::ParamClass::probability};
    m.primal = [T](std::span<const double> th, std::uint64_t) {
        Series y(T);
        for (int t = 0; t < T; ++t) y[t] = std::sin(th[0] * t / 10.0) + th[1] * th[1] * t;
        return y;
    };
    m.ad = [T](std::span<const double> th, std::span<const std::size_t> active, std::uint64_t, std::uint64_t) {
        std::vector<Series> g;
        for (auto i : active) {
            Series d(T);
            for (int t = 0; t < T; ++t) d[t] = i == 0 ? std::cos(th[0] * t / 10.0) * t / 10.0 : 2 * th[1] * t;
            g.push_back(d);
        }
        return g;
    };
    return m;
}

}  // namespace

TEST_SUITE("gradval") {
    TEST_CASE("central differences on polynomials") {
        gradval::FdConfig cfg;
        cfg.n_fd = 3;
        for (double eps : {1e-3, 0.1, 1.0}) {
            cfg.epsilon = {eps};
            const auto lin = gradval::central_diff(
                [](std::span<const double> th, std::uint64_t) { return Series{3.0 * th[0]}; },
                std::vector<double>{0.7}, 0, cfg, 1);
            CHECK(lin.mean[0] == doctest::Approx(3.0).epsilon(1e-12));
        }
        cfg.epsilon = {1e-3};
        const auto quad = gradval::central_diff(
            [](std::span<const double> th, std::uint64_t) { return Series{th[0] * th[0]}; },
            std::vector<double>{1.0}, 0, cfg, 1);
        CHECK(std::abs(quad.mean[0] - 2.0) < 1e-6);
    }

    TEST_CASE("compare on a deterministic toy model") {
        const int T = 12;
        const auto probe = toy_probe(T);
        auto fd = gradval::default_fd(probe, 2);
        fd.epsilon = {1e-4, 1e-4};
        const std::vector<double> theta = {0.8, 0.5};
        const std::vector<std::size_t> active = {0, 1};
        const auto rep = gradval::compare(probe, theta, active, fd, 2, 3);
        CHECK(rep.rows.size() == active.size() * T);
        for (const auto& r : rep.rows) {
            if (r.fd_mean != 0.0) CHECK(r.rel_err < 1e-5);
        }
        CHECK(rep.sign_agreement() == 1.0);

        std::ostringstream os;
        rep.write_csv(os);
        CHECK(os.str().find("rel_err") != std::string::npos);
    }

    TEST_CASE("summaries") {
        const auto s = gradval::summarize({{1.0, 2.0}, {3.0, 2.0}});
        CHECK(s.mean[0] == 2.0);
        CHECK(s.se[0] == doctest::Approx(1.0));
        CHECK(s.se[1] == 0.0);
    }

    TEST_CASE("sensitivity of a constant model is zero") {
        gradval::ModelProbe m = toy_probe(5);
        m.ad = [](std::span<const double>, std::span<const std::size_t> active, std::uint64_t, std::uint64_t) {
            return std::vector<Series>(active.size(), Series(5, 0.0));
        };
        const std::vector<double> theta = {0.1, 0.2};
        const std::vector<std::size_t> active = {0, 1};
        const auto tab = gradval::sensitivity(m, theta, active, 4, 1);
        for (const auto& g : tab.grads) {
            for (double x : g.mean) CHECK(x == 0.0);
        }
    }

    TEST_CASE("SIR quarantine-start sensitivity vanishes before quarantine") {
        namespace sir = dabm::models::sir;
        Rng grng(1);
        const auto graph = sir::ContactGraph::erdos_renyi(500, 0.02, grng);
        sir::SimConfig cfg;
        cfg.steps = 40;
        est::EstimatorKind st;
        const auto probe = gradval::sir_probe(cfg, graph, st);
        const auto th = sir::default_params();
        const std::vector<double> theta(th.begin(), th.end());
        const std::vector<std::size_t> active = {static_cast<std::size_t>(sir::Param::q_start)};
        const auto tab = gradval::sensitivity(probe, theta, active, 20, 5);
        double peak = 0.0;
        for (double x : tab.grads[0].mean) peak = std::max(peak, std::abs(x));
        REQUIRE(peak > 0.0);
        for (int t = 0; t < 15; ++t) CHECK(std::abs(tab.grads[0].mean[t]) < 1e-3 * peak);
    }

    TEST_CASE("AMOF effort-shape sensitivity decays") {
        namespace ax = dabm::models::axtell;
        ax::SimConfig cfg;
        cfg.agents = 200;
        cfg.steps = 31;
        const auto probe = gradval::axtell_probe(cfg, "mean_output");
        const auto th = ax::default_params();
        const std::vector<double> theta(th.begin(), th.end());
        const std::vector<std::size_t> active = {2};  // e_alpha
        const auto tab = gradval::sensitivity(probe, theta, active, 50, 6);
        const auto& g = tab.grads[0].mean;
        double peak = 0.0;
        for (double x : g) peak = std::max(peak, std::abs(x));
        CHECK(std::abs(g[30]) < 0.1 * peak);
    }
}
