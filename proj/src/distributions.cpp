#include "dabm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace dabm {

namespace {
constexpr double kUniformClamp = 1e-12;

double clamp_u(double u) { return std::clamp(u, kUniformClamp, 1.0 - kUniformClamp); }

void check_shapes(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw std::domain_error("beta shapes must be positive and finite");
    }
}
}  // namespace

double beta_quantile(double alpha, double beta, double u) {
    check_shapes(alpha, beta);
    return boost::math::ibeta_inv(alpha, beta, clamp_u(u));
}

ad::Dual beta_quantile(const ad::Dual& alpha, const ad::Dual& beta, double u) {
    const double a = alpha.value();
    const double b = beta.value();
    const double x = beta_quantile(a, b, u);
    if (alpha.dim() == 0 && beta.dim() == 0) return ad::Dual(x);

    const double pdf = boost::math::ibeta_derivative(a, b, x);
    double dx_da = 0.0;
    double dx_db = 0.0;
    if (pdf > 0.0 && std::isfinite(pdf)) {
        const double ha = 1e-6 * std::max(1.0, a);
        const double hb = 1e-6 * std::max(1.0, b);
        const double dI_da = (boost::math::ibeta(a + ha, b, x) - boost::math::ibeta(a - std::min(ha, 0.5 * a), b, x)) /
                             (ha + std::min(ha, 0.5 * a));
        const double dI_db = (boost::math::ibeta(a, b + hb, x) - boost::math::ibeta(a, b - std::min(hb, 0.5 * b), x)) /
                             (hb + std::min(hb, 0.5 * b));
        dx_da = -dI_da / pdf;
        dx_db = -dI_db / pdf;
    }
    const std::size_t n = std::max(alpha.dim(), beta.dim());
    ad::Dual out = ad::Dual::zeros(x, n);
    for (std::size_t i = 0; i < n; ++i) out.set_d(i, dx_da * alpha.d(i) + dx_db * beta.d(i));
    return out;
}

std::size_t categorical_index(const double* probs, std::size_t k, double u) {
    if (k == 0) throw std::invalid_argument("categorical_index: empty support");
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += probs[i];
    const double target = u * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        acc += probs[i];
        if (target < acc) return i;
    }
    // u * total can round up to the last edge; fall back to the last non-zero entry.
    for (std::size_t i = k; i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    return k - 1;
}

}  // namespace dabm
