#include <cmath>
#include <vector>

#include "doctest.h"
#include "dabm/ad/dual.hpp"
#include "dabm/ad/smooth.hpp"

using namespace dabm::ad;

namespace {

// Standard normal CDF by its Taylor series, independent of std::erf.
double phi_series(double x) {
    const double z = x / std::sqrt(2.0);
    double term = z, sum = z;
    for (int n = 1; n < 200; ++n) {
        term *= -z * z / n;
        sum += term / (2 * n + 1);
    }
    return 0.5 + sum / std::sqrt(M_PI);
}

}  // namespace

TEST_SUITE("ad") {
    TEST_CASE("dual arithmetic follows the product, exp and log rules") {
        const double tb[] = {2.0}, td[] = {5.0};
        const Dual a(3.0, tb), c(4.0, td);
        const Dual p = a * c;
        CHECK(p.value() == 12.0);
        CHECK(p.d(0) == doctest::Approx(3.0 * 5.0 + 2.0 * 4.0));

        const Dual e = exp(Dual::variable(0.0, 1, 0));
        CHECK(e.value() == 1.0);
        CHECK(e.d(0) == 1.0);

        const Dual l = log(Dual::variable(2.0, 1, 0));
        CHECK(l.value() == doctest::Approx(std::log(2.0)));
        CHECK(l.d(0) == 0.5);
    }

    TEST_CASE("dual quotient and chain rule agree with central differences") {
        auto f = [](auto x) { return sin(x) * exp(x) / (1.0 + x * x); };
        const double x0 = 0.7, h = 1e-6;
        const double fd = (std::sin(x0 + h) * std::exp(x0 + h) / (1 + (x0 + h) * (x0 + h)) -
                           std::sin(x0 - h) * std::exp(x0 - h) / (1 + (x0 - h) * (x0 - h))) /
                          (2 * h);
        CHECK(f(Dual::variable(x0, 1, 0)).d(0) == doctest::Approx(fd).epsilon(1e-8));
    }

    TEST_CASE("dual rejects oversize tangents and mismatched dimensions") {
        CHECK_THROWS(Dual::variable(1.0, kMaxTangent + 1, 0));
        CHECK_THROWS(Dual::variable(1.0, 2, 2));
        CHECK_THROWS(Dual::variable(1.0, 2, 0) + Dual::variable(1.0, 3, 0));
        CHECK_THROWS(Dual(1.0) / Dual(0.0));
    }

    TEST_CASE("smoothers hit their anchor values") {
        SmootherConfig sig{SmootherKind::sigmoid, 7.0};
        CHECK(smooth_step(0.0, sig) == doctest::Approx(0.5));
        SmootherConfig pw{SmootherKind::piecewise_linear, 1.0, 2.0, 3.0};
        CHECK(smooth_step(-2.0, pw) == 0.0);
        CHECK(smooth_step(3.0, pw) == 1.0);
        CHECK(smooth_step(0.5, pw) == doctest::Approx(0.5));
        SmootherConfig g{SmootherKind::gaussian_cdf, 1.5};
        CHECK(smooth_step(3 * 1.5, g) == doctest::Approx(phi_series(3.0)).epsilon(1e-4));
        CHECK(phi_series(3.0) == doctest::Approx(0.99865).epsilon(1e-4));
        CHECK(smooth_step(0.8, g) == doctest::Approx(phi_series(0.8 / 1.5)).epsilon(1e-10));
    }

    TEST_CASE("smoother slopes match finite differences") {
        for (auto kind : {SmootherKind::gaussian_cdf, SmootherKind::sigmoid, SmootherKind::piecewise_linear}) {
            SmootherConfig c{kind, 1.3, 0.7, 1.1};
            for (double x : {-0.4, 0.1, 0.5}) {
                const double h = 1e-6;
                const double fd = (smooth_step(x + h, c) - smooth_step(x - h, c)) / (2 * h);
                CHECK(smooth_step_point(x, c).slope == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }

    TEST_CASE("tempered softmax") {
        const std::vector<double> uni = {0.3, 0.3, 0.3, 0.3};
        for (double v : tempered_softmax(uni, 0.7)) CHECK(v == doctest::Approx(0.25));

        const std::vector<double> v = {std::log(1.0), std::log(2.0), std::log(3.0)};
        const auto s = tempered_softmax(v, 1.0);
        CHECK(s[0] == doctest::Approx(1.0 / 6));
        CHECK(s[1] == doctest::Approx(2.0 / 6));
        CHECK(s[2] == doctest::Approx(3.0 / 6));

        const std::vector<double> w = {0.1, 0.9, 0.4};
        const auto cold = tempered_softmax(w, 1e-3);
        CHECK(cold[1] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(cold[0] < 1e-6);
        CHECK(cold[2] < 1e-6);

        CHECK_THROWS(tempered_softmax(w, 0.0));
    }

    TEST_CASE("masked conditionals select or blend branches") {
        const std::vector<double> branches = {1.5, -2.0, 7.0};
        const std::vector<double> e2 = {0.0, 0.0, 1.0};
        CHECK(masked_cond_checked<double>(e2, branches) == 7.0);
        const std::vector<double> half = {0.5, 0.5};
        const std::vector<double> two = {3.0, 5.0};
        CHECK(masked_cond_checked<double>(half, two) == 4.0);
        CHECK(ifelse(0.3, 5.0, 3.0) == doctest::Approx(0.3 * 5.0 + 0.7 * 3.0));
        const std::vector<double> bad = {0.6, 0.6};
        CHECK_THROWS(masked_cond_checked<double>(bad, two));
    }

    TEST_CASE("surrogate combination keeps the hard primal and the smooth tangent") {
        const SmootherConfig sig{SmootherKind::sigmoid, 1.0};
        const Dual x = Dual::variable(0.3, 1, 0);
        const Dual h(hard_step(x.value()));
        const Dual out = surrogate_combine(h, smooth_step(x, sig));
        const double s = sigmoid(0.3);
        CHECK(out.value() == 1.0);
        CHECK(out.d(0) == doctest::Approx(s * (1 - s)));

        const Dual same = surrogate_combine(exp(x), exp(x));
        CHECK(same.value() == exp(x).value());
        CHECK(same.d(0) == exp(x).d(0));

        CHECK(surrogate_combine(exp(x), Dual(2.0)).d(0) == 0.0);
    }
}
