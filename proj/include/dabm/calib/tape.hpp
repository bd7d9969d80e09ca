#pragma once

// Minimal reverse-mode tape for the variational family.
//
// Every operation on Var appends one node holding at most two parent
// indices and their local partials; backward() sweeps the tape once.
// Only the flow and the prior/bijector terms are recorded here; the
// simulators never see a Var.

#include <cmath>
#include <cstdint>
#include <vector>

namespace dabm::calib {

class Tape;

struct Var {
    double v = 0.0;
    std::int64_t idx = -1;  // -1: constant
    Tape* tape = nullptr;

    Var() = default;
    Var(double x) : v(x) {}  // NOLINT: constants convert implicitly
    Var(double x, std::int64_t i, Tape* t) : v(x), idx(i), tape(t) {}

    double value() const { return v; }
    Var& operator+=(const Var& o);
    Var& operator-=(const Var& o);
    Var& operator*=(const Var& o);
};

class Tape {
public:
    Var variable(double x);
    /// Node with up to two parents (constants are skipped).
    Var push(double value, const Var& a, double da, const Var& b = Var(), double db = 0.0);

    /// Adjoints of every node for d(out)/d(node).
    std::vector<double> backward(const Var& out) const;
    /// Adjoints restricted to the given variables.
    std::vector<double> gradient(const Var& out, const std::vector<Var>& wrt) const;

    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    struct Node {
        std::int64_t a, b;
        double da, db;
    };
    std::vector<Node> nodes_;
};

inline double value(const Var& x) { return x.v; }
inline Var stop_gradient(const Var& x) { return Var(x.v); }

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
inline Var operator+(const Var& a, double b) { return a + Var(b); }
inline Var operator+(double a, const Var& b) { return Var(a) + b; }
inline Var operator-(const Var& a, double b) { return a - Var(b); }
inline Var operator-(double a, const Var& b) { return Var(a) - b; }
inline Var operator*(const Var& a, double b) { return a * Var(b); }
inline Var operator*(double a, const Var& b) { return Var(a) * b; }
inline Var operator/(const Var& a, double b) { return a / Var(b); }
inline Var operator/(double a, const Var& b) { return Var(a) / b; }

inline bool operator<(const Var& a, const Var& b) { return a.v < b.v; }
inline bool operator>(const Var& a, const Var& b) { return a.v > b.v; }

Var exp(const Var& x);
Var log(const Var& x);
Var log1p(const Var& x);
Var sqrt(const Var& x);
Var tanh(const Var& x);
Var sigmoid(const Var& x);
Var relu(const Var& x);
Var softplus(const Var& x);

}  // namespace dabm::calib
