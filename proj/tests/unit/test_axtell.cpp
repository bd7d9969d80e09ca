#include <cmath>
#include <vector>

#include "doctest.h"
#include "dabm/ad/dual.hpp"
#include "dabm/models/axtell.hpp"

using namespace dabm;
namespace ax = dabm::models::axtell;
using dabm::ad::Dual;

TEST_SUITE("axtell") {
    TEST_CASE("production") {
        CHECK(ax::production(0.0, 0.7, 0.2) == 0.0);
        CHECK(ax::production(2.0, 1.0, 0.0) == 2.0);
        CHECK(ax::production(2.0, 0.5, 0.5) == 3.0);
    }

    TEST_CASE("utility") {
        // theta = 0: pure leisure, best at e = 0.
        CHECK(ax::utility(0.0, 0.0, 1.0, 1.0, 0.5, 3.0) == doctest::Approx(1.0));
        CHECK(ax::utility(0.4, 0.0, 1.0, 1.0, 0.5, 3.0) == doctest::Approx(0.6));
        // theta = 1: output share, increasing in e.
        CHECK(ax::utility(0.2, 1.0, 1.0, 1.0, 0.5, 3.0) < ax::utility(0.8, 1.0, 1.0, 1.0, 0.5, 3.0));
        CHECK(ax::utility(0.5, 1.0, 0.0, 1.0, 0.0, 2.0) == doctest::Approx(0.25));
        CHECK(ax::utility(0.5, 0.5, 0.0, 1.0, 0.0, 1.0) == doctest::Approx(0.5));
    }

    TEST_CASE("optimal effort matches a grid search") {
        CHECK(ax::optimal_effort(0.0, 0.3, 1.0, 0.5) == 0.0);
        CHECK(ax::optimal_effort(1.0, 0.3, 1.0, 0.5) == doctest::Approx(1.0));
        CHECK(ax::optimal_effort(0.5, 0.0, 1.0, 0.0) == doctest::Approx(0.5));

        const double th = 0.6, a = 0.3, b = 0.7, Em = 1.2;
        double best_e = 0.0, best_u = -1.0;
        for (int k = 0; k <= 10000; ++k) {
            const double e = k * 1e-4;
            const double u = ax::utility(e, th, Em, a, b, 1.0);
            if (u > best_u) {
                best_u = u;
                best_e = e;
            }
        }
        CHECK(std::abs(ax::optimal_effort(th, Em, a, b) - best_e) < 2e-4);
    }

    TEST_CASE("optimal effort derivative matches finite differences") {
        const double h = 1e-6;
        const Dual e = ax::optimal_effort(Dual::variable(0.6, 1, 0), Dual(1.2), Dual(0.3), Dual(0.7));
        const double fd = (ax::optimal_effort(0.6 + h, 1.2, 0.3, 0.7) - ax::optimal_effort(0.6 - h, 1.2, 0.3, 0.7)) / (2 * h);
        CHECK(e.d(0) == doctest::Approx(fd).epsilon(1e-6));
    }

    TEST_CASE("firm selection weights") {
        std::vector<double> w;
        const std::vector<double> one = {0.7};
        CHECK(ax::select_firm<double>(one, 1.0, w).index == 0);
        CHECK(w[0] == 1.0);

        const std::vector<double> tie = {0.4, 0.4};
        CHECK(ax::select_firm<double>(tie, 1.0, w).index == 0);
        CHECK(w[0] == doctest::Approx(0.5));
        CHECK(w[1] == doctest::Approx(0.5));

        const std::vector<double> u = {0.1, 0.9, -0.3, 0.5};
        CHECK(ax::select_firm<double>(u, 0.3, w).index == 1);
        double s = 0;
        for (double x : w) s += x;
        CHECK(s == doctest::Approx(1.0));
    }

    TEST_CASE("simulation conserves agents and is deterministic") {
        ax::SimConfig cfg;
        cfg.agents = 60;
        cfg.steps = 15;
        Rng r1(5), r2(5);
        const auto a = ax::simulate(ax::default_params(), cfg, r1);
        const auto b = ax::simulate(ax::default_params(), cfg, r2);
        CHECK(a.mean_output == b.mean_output);
        CHECK(a.mean_effort == b.mean_effort);
        for (double n : a.total_size) CHECK(n == 60.0);
        for (double e : a.mean_effort) {
            CHECK(e >= 0.0);
            CHECK(e <= 1.0);
        }
    }

    TEST_CASE("a lone agent stays a singleton firm") {
        ax::SimConfig cfg;
        cfg.agents = 1;
        cfg.steps = 10;
        cfg.min_friends = 0;
        cfg.max_friends = 0;
        Rng rng(1);
        const auto t = ax::simulate(ax::default_params(), cfg, rng);
        for (double s : t.mean_size) CHECK(s == 1.0);
    }

    TEST_CASE("friendship lists respect the bounds and exclude self") {
        Rng rng(2);
        const auto f = ax::friendship_network(50, 1, 4, rng);
        REQUIRE(f.size() == 50);
        for (std::size_t i = 0; i < f.size(); ++i) {
            for (auto j : f[i]) CHECK(j != i);
        }
    }
}
