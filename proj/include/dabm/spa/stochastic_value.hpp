#pragma once

// Program-level pruned SPA.
//
// A StochasticValue carries the primal x, the infinitesimal part delta of one
// perturbation direction, and at most one pending jump: "under tag k, x moves
// by dx".  Each tag has a signed weight held by the PruningContext.  Whenever
// two different live tags would meet in one value, the context keeps one with
// probability |w_i| / W and kills the other everywhere, rescaling the survivor
// to W.  The derivative estimate of any value is delta + w(tag) * dx.
//
// Pruning randomness comes from the context's own stream, so the primal
// program sees exactly the same draws with or without the estimator.

#include <cmath>
#include <cstdint>
#include <vector>

#include "dabm/rng.hpp"
#include "dabm/spa/triple.hpp"

namespace dabm::spa {

class PruningContext {
public:
    explicit PruningContext(Rng rng) : rng_(rng) { tags_.push_back({0.0, false}); }

    /// Registers a jump source with signed weight; returns its tag.
    std::uint32_t new_tag(double signed_weight);
    bool alive(std::uint32_t tag) const { return tag != 0 && tags_[tag].alive; }
    double weight(std::uint32_t tag) const { return alive(tag) ? tags_[tag].weight : 0.0; }
    /// Keeps one of two live tags with weight-proportional probability.
    std::uint32_t merge(std::uint32_t a, std::uint32_t b);
    std::size_t tag_count() const { return tags_.size() - 1; }

private:
    struct TagState {
        double weight;
        bool alive;
    };
    std::vector<TagState> tags_;
    Rng rng_;
};

class StochasticValue {
public:
    StochasticValue() = default;
    StochasticValue(double x) : x_(x) {}  // NOLINT: constants promote implicitly
    StochasticValue(double x, double delta, double dx = 0.0, std::uint32_t tag = 0, PruningContext* ctx = nullptr)
        : x_(x), delta_(delta), dx_(dx), tag_(tag), ctx_(ctx) {}

    static StochasticValue variable(double x, double delta, PruningContext* ctx) { return {x, delta, 0.0, 0, ctx}; }

    double value() const { return x_; }
    double delta() const { return delta_; }
    double jump() const { return perturbed() ? dx_ : 0.0; }
    std::uint32_t tag() const { return perturbed() ? tag_ : 0; }
    PruningContext* context() const { return ctx_; }
    bool perturbed() const { return ctx_ != nullptr && dx_ != 0.0 && ctx_->alive(tag_); }

    /// Unbiased derivative estimate delta + w * dx.
    double derivative() const { return perturbed() ? delta_ + ctx_->weight(tag_) * dx_ : delta_; }

    /// Generic smooth map with the primal f, slope df and the jump image f(x + dx).
    template <class F>
    StochasticValue map(F&& f, double df) const {
        StochasticValue r(f(x_), df * delta_, 0.0, 0, ctx_);
        if (perturbed()) {
            r.dx_ = f(x_ + dx_) - r.x_;
            r.tag_ = tag_;
        }
        return r;
    }

    /// Generic binary map; jumps of the operands are combined or pruned.
    template <class F>
    static StochasticValue combine(const StochasticValue& a, const StochasticValue& b, F&& f, double dfa, double dfb) {
        StochasticValue r(f(a.x_, b.x_), dfa * a.delta_ + dfb * b.delta_, 0.0, 0, a.ctx_ ? a.ctx_ : b.ctx_);
        const bool pa = a.perturbed();
        const bool pb = b.perturbed();
        if (!pa && !pb) return r;
        if (pa && pb && a.tag_ == b.tag_) {
            r.dx_ = f(a.x_ + a.dx_, b.x_ + b.dx_) - r.x_;
            r.tag_ = a.tag_;
            return r;
        }
        const double ja = pa ? f(a.x_ + a.dx_, b.x_) - r.x_ : 0.0;
        const double jb = pb ? f(a.x_, b.x_ + b.dx_) - r.x_ : 0.0;
        if (ja != 0.0 && jb != 0.0) {
            r.tag_ = r.ctx_->merge(a.tag_, b.tag_);
            r.dx_ = r.tag_ == a.tag_ ? ja : jb;
        } else if (ja != 0.0) {
            r.dx_ = ja;
            r.tag_ = a.tag_;
        } else if (jb != 0.0) {
            r.dx_ = jb;
            r.tag_ = b.tag_;
        }
        return r;
    }

    StochasticValue& operator+=(const StochasticValue& o) { return *this = *this + o; }
    StochasticValue& operator-=(const StochasticValue& o) { return *this = *this - o; }
    StochasticValue& operator*=(const StochasticValue& o) { return *this = *this * o; }
    StochasticValue& operator/=(const StochasticValue& o) { return *this = *this / o; }

    friend StochasticValue operator+(const StochasticValue& a, const StochasticValue& b) {
        return combine(a, b, [](double u, double v) { return u + v; }, 1.0, 1.0);
    }
    friend StochasticValue operator-(const StochasticValue& a, const StochasticValue& b) {
        return combine(a, b, [](double u, double v) { return u - v; }, 1.0, -1.0);
    }
    friend StochasticValue operator*(const StochasticValue& a, const StochasticValue& b) {
        return combine(a, b, [](double u, double v) { return u * v; }, b.x_, a.x_);
    }
    friend StochasticValue operator/(const StochasticValue& a, const StochasticValue& b);
    friend StochasticValue operator-(const StochasticValue& a) {
        return a.map([](double u) { return -u; }, -1.0);
    }

    friend bool operator==(const StochasticValue& a, const StochasticValue& b) { return a.x_ == b.x_; }
    friend auto operator<=>(const StochasticValue& a, const StochasticValue& b) { return a.x_ <=> b.x_; }

private:
    double x_ = 0.0;
    double delta_ = 0.0;
    double dx_ = 0.0;
    std::uint32_t tag_ = 0;
    PruningContext* ctx_ = nullptr;
};

inline double value(const StochasticValue& v) { return v.value(); }
inline StochasticValue stop_gradient(const StochasticValue& v) { return StochasticValue(v.value()); }

StochasticValue exp(const StochasticValue& v);
StochasticValue log(const StochasticValue& v);
StochasticValue expm1(const StochasticValue& v);
StochasticValue log1p(const StochasticValue& v);
StochasticValue sqrt(const StochasticValue& v);
StochasticValue pow(const StochasticValue& v, double p);
StochasticValue min(const StochasticValue& a, const StochasticValue& b);
StochasticValue max(const StochasticValue& a, const StochasticValue& b);

/// Bernoulli(p) draw from frozen uniform u (sample = 1 iff u < p).
/// The input's own jump is carried to the sample as 1[u < p + dp] - x, and the
/// new right/left SPA jump for delta(p) is registered as a fresh tag.
StochasticValue bernoulli(const StochasticValue& p, double u, PerturbationSide side);

}  // namespace dabm::spa
