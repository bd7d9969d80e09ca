#pragma once

// Forward-mode dual numbers with a dense tangent vector.
//
// A Dual carries a primal value and one tangent slot per active parameter, so
// a single forward pass produces the derivative of every output with respect
// to all active parameters.  The tangent length is a runtime quantity bounded
// by kMaxTangent; a Dual with dim() == 0 is a constant and combines with a
// Dual of any dimension.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace dabm::ad {

inline constexpr std::size_t kMaxTangent = 16;

class Dual {
public:
    constexpr Dual() = default;
    constexpr Dual(double value) : value_(value) {}  // NOLINT: constants promote implicitly

    Dual(double value, std::span<const double> tangent) : value_(value) {
        if (tangent.size() > kMaxTangent) {
            throw std::invalid_argument("Dual: tangent length " + std::to_string(tangent.size()) +
                                        " exceeds capacity " + std::to_string(kMaxTangent));
        }
        dim_ = static_cast<std::uint8_t>(tangent.size());
        std::copy(tangent.begin(), tangent.end(), tangent_.begin());
    }

    /// Independent variable: unit tangent in slot `index` of a `dim`-long vector.
    static Dual variable(double value, std::size_t dim, std::size_t index) {
        if (dim > kMaxTangent || index >= dim) {
            throw std::invalid_argument("Dual::variable: bad slot");
        }
        Dual d(value);
        d.dim_ = static_cast<std::uint8_t>(dim);
        d.tangent_[index] = 1.0;
        return d;
    }

    /// Value with an all-zero tangent of the given length.
    static Dual zeros(double value, std::size_t dim) {
        if (dim > kMaxTangent) throw std::invalid_argument("Dual::zeros: dim too large");
        Dual d(value);
        d.dim_ = static_cast<std::uint8_t>(dim);
        return d;
    }

    constexpr double value() const { return value_; }
    constexpr std::size_t dim() const { return dim_; }
    double d(std::size_t i) const { return i < dim_ ? tangent_[i] : 0.0; }
    std::span<const double> tangent() const { return {tangent_.data(), dim_}; }

    void set_d(std::size_t i, double v) {
        if (i >= dim_) throw std::out_of_range("Dual::set_d");
        tangent_[i] = v;
    }

    Dual& operator+=(const Dual& o) {
        const std::size_t n = merged_dim(*this, o);
        value_ += o.value_;
        for (std::size_t i = 0; i < o.dim_; ++i) tangent_[i] += o.tangent_[i];
        dim_ = static_cast<std::uint8_t>(n);
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        const std::size_t n = merged_dim(*this, o);
        value_ -= o.value_;
        for (std::size_t i = 0; i < o.dim_; ++i) tangent_[i] -= o.tangent_[i];
        dim_ = static_cast<std::uint8_t>(n);
        return *this;
    }
    Dual& operator*=(const Dual& o) { return *this = *this * o; }
    Dual& operator/=(const Dual& o) { return *this = *this / o; }

    friend Dual operator-(const Dual& a) {
        Dual r(-a.value_);
        r.dim_ = a.dim_;
        for (std::size_t i = 0; i < a.dim_; ++i) r.tangent_[i] = -a.tangent_[i];
        return r;
    }
    friend Dual operator+(Dual a, const Dual& b) { return a += b; }
    friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
    friend Dual operator*(const Dual& a, const Dual& b) {
        const std::size_t n = merged_dim(a, b);
        Dual r(a.value_ * b.value_);
        r.dim_ = static_cast<std::uint8_t>(n);
        for (std::size_t i = 0; i < n; ++i) {
            r.tangent_[i] = a.tangent_[i] * b.value_ + a.value_ * b.tangent_[i];
        }
        return r;
    }
    friend Dual operator/(const Dual& a, const Dual& b) {
        if (b.value_ == 0.0) throw std::domain_error("Dual: division by zero");
        const std::size_t n = merged_dim(a, b);
        const double q = a.value_ / b.value_;
        Dual r(q);
        r.dim_ = static_cast<std::uint8_t>(n);
        for (std::size_t i = 0; i < n; ++i) {
            r.tangent_[i] = (a.tangent_[i] - q * b.tangent_[i]) / b.value_;
        }
        return r;
    }

    // Comparisons act on the primal only.
    friend bool operator==(const Dual& a, const Dual& b) { return a.value_ == b.value_; }
    friend auto operator<=>(const Dual& a, const Dual& b) { return a.value_ <=> b.value_; }

    /// Chain rule for a scalar function with primal f and derivative df at value().
    Dual apply(double f, double df) const {
        Dual r(f);
        r.dim_ = dim_;
        for (std::size_t i = 0; i < dim_; ++i) r.tangent_[i] = df * tangent_[i];
        return r;
    }

private:
    static std::size_t merged_dim(const Dual& a, const Dual& b) {
        if (a.dim_ == b.dim_ || b.dim_ == 0) return a.dim_;
        if (a.dim_ == 0) return b.dim_;
        throw std::invalid_argument("Dual: tangent length mismatch (" + std::to_string(a.dim_) +
                                    " vs " + std::to_string(b.dim_) + ")");
    }

    double value_ = 0.0;
    std::array<double, kMaxTangent> tangent_{};
    std::uint8_t dim_ = 0;
};

inline double value(double x) { return x; }
inline double value(const Dual& x) { return x.value(); }

/// Same primal, tangent discarded.
inline double stop_gradient(double x) { return x; }
inline Dual stop_gradient(const Dual& x) { return Dual(x.value()); }

inline Dual exp(const Dual& x) {
    const double e = std::exp(x.value());
    return x.apply(e, e);
}
inline Dual log(const Dual& x) { return x.apply(std::log(x.value()), 1.0 / x.value()); }
inline Dual log1p(const Dual& x) { return x.apply(std::log1p(x.value()), 1.0 / (1.0 + x.value())); }
inline Dual expm1(const Dual& x) { return x.apply(std::expm1(x.value()), std::exp(x.value())); }
inline Dual sqrt(const Dual& x) {
    const double s = std::sqrt(x.value());
    return x.apply(s, 0.5 / s);
}
inline Dual pow(const Dual& x, double p) {
    return x.apply(std::pow(x.value(), p), p * std::pow(x.value(), p - 1.0));
}
inline Dual pow(const Dual& x, const Dual& p) { return exp(p * log(x)); }
inline Dual sin(const Dual& x) { return x.apply(std::sin(x.value()), std::cos(x.value())); }
inline Dual cos(const Dual& x) { return x.apply(std::cos(x.value()), -std::sin(x.value())); }
inline Dual tanh(const Dual& x) {
    const double t = std::tanh(x.value());
    return x.apply(t, 1.0 - t * t);
}
inline Dual erf(const Dual& x) {
    constexpr double two_over_sqrt_pi = 1.1283791670955126;
    return x.apply(std::erf(x.value()), two_over_sqrt_pi * std::exp(-x.value() * x.value()));
}
inline Dual abs(const Dual& x) { return x.value() < 0.0 ? -x : x; }

// Hard min/max: ties resolve to the first argument on both channels.
inline Dual min(const Dual& a, const Dual& b) { return b.value() < a.value() ? b : a; }
inline Dual max(const Dual& a, const Dual& b) { return b.value() > a.value() ? b : a; }

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}
inline Dual sigmoid(const Dual& x) {
    const double s = sigmoid(x.value());
    return x.apply(s, s * (1.0 - s));
}

inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline Dual softplus(const Dual& x) { return x.apply(softplus(x.value()), sigmoid(x.value())); }

/// Smooth maximum log(exp(a)+exp(b)); used where a differentiable max is wanted.
inline double logaddexp(double a, double b) {
    const double m = std::max(a, b);
    if (std::isinf(m) && m < 0) return m;
    return m + std::log1p(std::exp(-std::abs(a - b)));
}
inline Dual logaddexp(const Dual& a, const Dual& b) {
    const Dual& hi = a.value() >= b.value() ? a : b;
    const Dual& lo = a.value() >= b.value() ? b : a;
    return hi + log1p(exp(lo - hi));
}

}  // namespace dabm::ad
