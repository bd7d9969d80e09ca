#include "dabm/calib/tape.hpp"

#include <stdexcept>

namespace dabm::calib {

namespace {

Tape* tape_of(const Var& a, const Var& b) {
    if (a.tape && b.tape && a.tape != b.tape) throw std::logic_error("Var operands recorded on different tapes");
    return a.tape ? a.tape : b.tape;
}

}  // namespace

Var Tape::variable(double x) {
    nodes_.push_back({-1, -1, 0.0, 0.0});
    return Var(x, static_cast<std::int64_t>(nodes_.size()) - 1, this);
}

Var Tape::push(double value, const Var& a, double da, const Var& b, double db) {
    const std::int64_t ia = a.idx >= 0 && da != 0.0 ? a.idx : -1;
    const std::int64_t ib = b.idx >= 0 && db != 0.0 ? b.idx : -1;
    if (ia < 0 && ib < 0) return Var(value);
    nodes_.push_back({ia, ib, da, db});
    return Var(value, static_cast<std::int64_t>(nodes_.size()) - 1, this);
}

std::vector<double> Tape::backward(const Var& out) const {
    std::vector<double> adj(nodes_.size(), 0.0);
    if (out.idx < 0) return adj;
    if (out.tape != this) throw std::logic_error("backward: output not recorded on this tape");
    adj[static_cast<std::size_t>(out.idx)] = 1.0;
    for (std::int64_t i = out.idx; i >= 0; --i) {
        const double g = adj[static_cast<std::size_t>(i)];
        if (g == 0.0) continue;
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.a >= 0) adj[static_cast<std::size_t>(n.a)] += g * n.da;
        if (n.b >= 0) adj[static_cast<std::size_t>(n.b)] += g * n.db;
    }
    return adj;
}

std::vector<double> Tape::gradient(const Var& out, const std::vector<Var>& wrt) const {
    const auto adj = backward(out);
    std::vector<double> g(wrt.size(), 0.0);
    for (std::size_t k = 0; k < wrt.size(); ++k) {
        if (wrt[k].idx >= 0) g[k] = adj[static_cast<std::size_t>(wrt[k].idx)];
    }
    return g;
}

Var& Var::operator+=(const Var& o) { return *this = *this + o; }
Var& Var::operator-=(const Var& o) { return *this = *this - o; }
Var& Var::operator*=(const Var& o) { return *this = *this * o; }

Var operator+(const Var& a, const Var& b) {
    Tape* t = tape_of(a, b);
    return t ? t->push(a.v + b.v, a, 1.0, b, 1.0) : Var(a.v + b.v);
}

Var operator-(const Var& a, const Var& b) {
    Tape* t = tape_of(a, b);
    return t ? t->push(a.v - b.v, a, 1.0, b, -1.0) : Var(a.v - b.v);
}

Var operator*(const Var& a, const Var& b) {
    Tape* t = tape_of(a, b);
    return t ? t->push(a.v * b.v, a, b.v, b, a.v) : Var(a.v * b.v);
}

Var operator/(const Var& a, const Var& b) {
    const double q = a.v / b.v;
    Tape* t = tape_of(a, b);
    return t ? t->push(q, a, 1.0 / b.v, b, -q / b.v) : Var(q);
}

Var operator-(const Var& a) { return a.tape ? a.tape->push(-a.v, a, -1.0) : Var(-a.v); }

namespace {
Var unary(const Var& x, double v, double d) { return x.tape ? x.tape->push(v, x, d) : Var(v); }
}  // namespace

Var exp(const Var& x) {
    const double e = std::exp(x.v);
    return unary(x, e, e);
}
Var log(const Var& x) { return unary(x, std::log(x.v), 1.0 / x.v); }
Var log1p(const Var& x) { return unary(x, std::log1p(x.v), 1.0 / (1.0 + x.v)); }
Var sqrt(const Var& x) {
    const double s = std::sqrt(x.v);
    return unary(x, s, 0.5 / s);
}
Var tanh(const Var& x) {
    const double t = std::tanh(x.v);
    return unary(x, t, 1.0 - t * t);
}
Var sigmoid(const Var& x) {
    const double s = x.v >= 0.0 ? 1.0 / (1.0 + std::exp(-x.v)) : std::exp(x.v) / (1.0 + std::exp(x.v));
    return unary(x, s, s * (1.0 - s));
}
Var softplus(const Var& x) {
    const double v = x.v > 0.0 ? x.v + std::log1p(std::exp(-x.v)) : std::log1p(std::exp(x.v));
    const double s = x.v >= 0.0 ? 1.0 / (1.0 + std::exp(-x.v)) : std::exp(x.v) / (1.0 + std::exp(x.v));
    return unary(x, v, s);
}
Var relu(const Var& x) { return unary(x, x.v > 0.0 ? x.v : 0.0, x.v > 0.0 ? 1.0 : 0.0); }

}  // namespace dabm::calib
