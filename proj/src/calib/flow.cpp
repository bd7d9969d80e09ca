#include "dabm/calib/flow.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dabm::calib {

using ad::Dual;

std::string to_string(FamilyKind k) { return k == FamilyKind::maf ? "maf" : "diagonal-gaussian"; }

FamilyKind family_kind_from_string(const std::string& s) {
    if (s == "maf" || s == "flow") return FamilyKind::maf;
    if (s == "diagonal-gaussian" || s == "gaussian") return FamilyKind::diagonal_gaussian;
    throw std::invalid_argument("unknown variational family '" + s + "'");
}

void FamilySpec::validate() const {
    if (dim < 1) throw std::invalid_argument("variational family needs at least one dimension");
    if (kind == FamilyKind::maf && (layers < 1 || hidden < 1 || blocks < 0)) {
        throw std::invalid_argument("maf needs layers >= 1, hidden >= 1, blocks >= 0");
    }
}

namespace {

constexpr double kScaleFloor = 1e-3;
const double kDiagInit = std::log(std::expm1(1.0 - kScaleFloor));  // softplus^-1(0.999)

template <class S>
S relu_(const S& x) {
    using ad::value;
    return value(x) > 0.0 ? x : S(0.0);
}

template <class S>
S sigmoid_(const S& x) {
    using ad::sigmoid;
    return sigmoid(x);
}

template <class S>
S softplus_(const S& x) {
    using ad::softplus;
    return softplus(x);
}

template <class S>
S log_(const S& x) {
    using ad::log;
    using std::log;
    return log(x);
}

template <class S>
S exp_(const S& x) {
    using ad::exp;
    using std::exp;
    return exp(x);
}

}  // namespace

template <class S>
S standard_normal_log_density(std::span<const S> z) {
    S ss(0.0);
    for (const auto& v : z) ss += v * v;
    return -0.5 * ss - 0.5 * static_cast<double>(z.size()) * std::log(2.0 * std::numbers::pi);
}

VariationalFamily::VariationalFamily(FamilySpec spec) : spec_(spec) {
    spec_.validate();
    const std::size_t D = spec_.dim;
    if (spec_.kind == FamilyKind::diagonal_gaussian) {
        num_params_ = 2 * D;
        return;
    }
    const std::size_t H = static_cast<std::size_t>(spec_.hidden);
    in_degree_.resize(D);
    for (std::size_t i = 0; i < D; ++i) in_degree_[i] = static_cast<int>(i) + 1;
    const int max_d = std::max<int>(1, static_cast<int>(D) - 1);
    const int min_d = std::min<int>(1, static_cast<int>(D) - 1);
    hidden_degree_.resize(H);
    for (std::size_t h = 0; h < H; ++h) hidden_degree_[h] = static_cast<int>(h) % max_d + min_d;

    std::size_t at = 0;
    auto take = [&at](std::size_t n) {
        const std::size_t o = at;
        at += n;
        return o;
    };
    for (int l = 0; l < spec_.layers; ++l) {
        LayerOffsets off;
        off.lower = take(D * (D - 1) / 2);
        off.upper = take(D * (D - 1) / 2);
        off.diag = take(D);
        off.w_in = take(H * D);
        off.b_in = take(H);
        for (int b = 0; b < spec_.blocks; ++b) {
            off.w1.push_back(take(H * H));
            off.b1.push_back(take(H));
            off.w2.push_back(take(H * H));
            off.b2.push_back(take(H));
        }
        off.w_out = take(2 * D * H);
        off.b_out = take(2 * D);
        layers_.push_back(std::move(off));
    }
    num_params_ = at;
}

std::vector<double> VariationalFamily::init(Rng& rng) const {
    std::vector<double> phi(num_params_, 0.0);
    if (spec_.kind == FamilyKind::diagonal_gaussian) return phi;
    const std::size_t D = spec_.dim;
    const std::size_t H = static_cast<std::size_t>(spec_.hidden);
    auto fill = [&](std::size_t off, std::size_t n, double bound) {
        for (std::size_t k = 0; k < n; ++k) phi[off + k] = bound * (2.0 * rng.uniform() - 1.0);
    };
    const double in_bound = 1.0 / std::sqrt(static_cast<double>(D));
    const double h_bound = 1.0 / std::sqrt(static_cast<double>(H));
    for (const auto& off : layers_) {
        for (std::size_t i = 0; i < D; ++i) phi[off.diag + i] = kDiagInit;
        fill(off.w_in, H * D, in_bound);
        fill(off.b_in, H, in_bound);
        for (std::size_t b = 0; b < off.w1.size(); ++b) {
            fill(off.w1[b], H * H, h_bound);
            fill(off.b1[b], H, h_bound);
            fill(off.w2[b], H * H, 1e-3);
            fill(off.b2[b], H, 1e-3);
        }
        fill(off.w_out, 2 * D * H, h_bound);
        fill(off.b_out, 2 * D, h_bound);
    }
    return phi;
}

template <class S>
void VariationalFamily::made(std::span<const S> phi, const LayerOffsets& off, std::span<const S> y,
                             std::vector<S>& raw_scale, std::vector<S>& shift) const {
    const std::size_t D = spec_.dim;
    const std::size_t H = static_cast<std::size_t>(spec_.hidden);
    std::vector<S> h(H), t(H), t2(H);
    for (std::size_t j = 0; j < H; ++j) {
        S acc = phi[off.b_in + j];
        for (std::size_t i = 0; i < D; ++i) {
            if (hidden_degree_[j] >= in_degree_[i]) acc += phi[off.w_in + j * D + i] * y[i];
        }
        h[j] = acc;
    }
    for (std::size_t b = 0; b < off.w1.size(); ++b) {
        for (std::size_t j = 0; j < H; ++j) t[j] = relu_(h[j]);
        for (std::size_t j = 0; j < H; ++j) {
            S acc = phi[off.b1[b] + j];
            for (std::size_t k = 0; k < H; ++k) {
                if (hidden_degree_[j] >= hidden_degree_[k]) acc += phi[off.w1[b] + j * H + k] * t[k];
            }
            t2[j] = relu_(acc);
        }
        for (std::size_t j = 0; j < H; ++j) {
            S acc = phi[off.b2[b] + j];
            for (std::size_t k = 0; k < H; ++k) {
                if (hidden_degree_[j] >= hidden_degree_[k]) acc += phi[off.w2[b] + j * H + k] * t2[k];
            }
            h[j] += acc;
        }
    }
    raw_scale.assign(D, S(0.0));
    shift.assign(D, S(0.0));
    for (std::size_t o = 0; o < 2 * D; ++o) {
        const int deg = in_degree_[o % D];
        S acc = phi[off.b_out + o];
        for (std::size_t k = 0; k < H; ++k) {
            if (deg > hidden_degree_[k]) acc += phi[off.w_out + o * H + k] * h[k];
        }
        if (o < D) raw_scale[o] = acc;
        else shift[o - D] = acc;
    }
}

namespace {

// Strictly-triangular index helpers (row-major over the stored half).
inline std::size_t lower_index(std::size_t i, std::size_t j) { return i * (i - 1) / 2 + j; }  // j < i
inline std::size_t upper_index(std::size_t i, std::size_t j, std::size_t D) {               // j > i
    return i * D - i * (i + 1) / 2 + (j - i - 1);
}

}  // namespace

template <class S>
std::vector<S> VariationalFamily::lu_apply(std::span<const S> phi, const LayerOffsets& off, std::span<const S> y,
                                           S& logdet) const {
    const std::size_t D = spec_.dim;
    std::vector<S> a(D), x(D);
    for (std::size_t i = 0; i < D; ++i) {
        const S d = softplus_(phi[off.diag + i]) + kScaleFloor;
        logdet += log_(d);
        S acc = d * y[i];
        for (std::size_t j = i + 1; j < D; ++j) acc += phi[off.upper + upper_index(i, j, D)] * y[j];
        a[i] = acc;
    }
    for (std::size_t i = 0; i < D; ++i) {
        S acc = a[i];
        for (std::size_t j = 0; j < i; ++j) acc += phi[off.lower + lower_index(i, j)] * a[j];
        x[i] = acc;
    }
    return x;
}

template <class S>
std::vector<S> VariationalFamily::lu_solve(std::span<const S> phi, const LayerOffsets& off, std::span<const S> x,
                                           S& logdet) const {
    const std::size_t D = spec_.dim;
    std::vector<S> a(D), y(D);
    for (std::size_t i = 0; i < D; ++i) {
        S acc = x[i];
        for (std::size_t j = 0; j < i; ++j) acc -= phi[off.lower + lower_index(i, j)] * a[j];
        a[i] = acc;
    }
    for (std::size_t i = D; i-- > 0;) {
        const S d = softplus_(phi[off.diag + i]) + kScaleFloor;
        logdet += log_(d);
        S acc = a[i];
        for (std::size_t j = i + 1; j < D; ++j) acc -= phi[off.upper + upper_index(i, j, D)] * y[j];
        y[i] = acc / d;
    }
    return y;
}

template <class S>
FlowSample<S> VariationalFamily::sample(std::span<const S> phi, std::span<const double> z) const {
    if (phi.size() != num_params_) throw std::invalid_argument("flow: wrong number of parameters");
    if (z.size() != spec_.dim) throw std::invalid_argument("flow: base sample has the wrong dimension");
    const std::size_t D = spec_.dim;
    std::vector<S> cur(z.begin(), z.end());
    FlowSample<S> out;
    S logdet(0.0);
    if (spec_.kind == FamilyKind::diagonal_gaussian) {
        out.u.resize(D);
        for (std::size_t i = 0; i < D; ++i) {
            out.u[i] = phi[i] + exp_(phi[D + i]) * z[i];
            logdet += phi[D + i];
        }
        out.log_q = standard_normal_log_density(std::span<const S>(cur)) - logdet;
        return out;
    }
    std::vector<S> raw, shift;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const auto& off = layers_[l];
        // Invert x = y * s(y_<i) + m(y_<i) one coordinate at a time.
        std::vector<S> y(D, S(0.0));
        for (std::size_t i = 0; i < D; ++i) {
            made(phi, off, std::span<const S>(y), raw, shift);
            const S s = sigmoid_(raw[i] + 2.0) + kScaleFloor;
            y[i] = (cur[i] - shift[i]) / s;
        }
        made(phi, off, std::span<const S>(y), raw, shift);
        for (std::size_t i = 0; i < D; ++i) logdet += log_(sigmoid_(raw[i] + 2.0) + kScaleFloor);
        const auto w = lu_solve(phi, off, std::span<const S>(y), logdet);
        for (std::size_t i = 0; i < D; ++i) cur[i] = w[D - 1 - i];
    }
    std::vector<S> zs(z.begin(), z.end());
    out.u = std::move(cur);
    out.log_q = standard_normal_log_density(std::span<const S>(zs)) + logdet;
    return out;
}

template <class S>
S VariationalFamily::log_density(std::span<const S> phi, std::span<const S> u) const {
    if (phi.size() != num_params_) throw std::invalid_argument("flow: wrong number of parameters");
    if (u.size() != spec_.dim) throw std::invalid_argument("flow: point has the wrong dimension");
    const std::size_t D = spec_.dim;
    S logdet(0.0);
    std::vector<S> cur(u.begin(), u.end());
    if (spec_.kind == FamilyKind::diagonal_gaussian) {
        for (std::size_t i = 0; i < D; ++i) {
            cur[i] = (u[i] - phi[i]) / exp_(phi[D + i]);
            logdet += phi[D + i];
        }
        return standard_normal_log_density(std::span<const S>(cur)) - logdet;
    }
    std::vector<S> raw, shift, rev(D);
    for (const auto& off : layers_) {
        for (std::size_t i = 0; i < D; ++i) rev[i] = cur[D - 1 - i];
        const auto y = lu_apply(phi, off, std::span<const S>(rev), logdet);
        made(phi, off, std::span<const S>(y), raw, shift);
        for (std::size_t i = 0; i < D; ++i) {
            const S s = sigmoid_(raw[i] + 2.0) + kScaleFloor;
            logdet += log_(s);
            cur[i] = y[i] * s + shift[i];
        }
    }
    return standard_normal_log_density(std::span<const S>(cur)) + logdet;
}

template double standard_normal_log_density(std::span<const double>);
template Dual standard_normal_log_density(std::span<const Dual>);
template Var standard_normal_log_density(std::span<const Var>);

#define DABM_FLOW_INSTANTIATE(S)                                                                            \
    template FlowSample<S> VariationalFamily::sample(std::span<const S>, std::span<const double>) const;    \
    template S VariationalFamily::log_density(std::span<const S>, std::span<const S>) const;

DABM_FLOW_INSTANTIATE(double)
DABM_FLOW_INSTANTIATE(Dual)
DABM_FLOW_INSTANTIATE(Var)

#undef DABM_FLOW_INSTANTIATE

}  // namespace dabm::calib
