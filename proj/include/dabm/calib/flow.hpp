#pragma once

// Variational families over the unconstrained parameter space.
//
// maf: masked affine autoregressive flow.  Each layer, in the density
// direction y -> x, reverses the coordinate order, applies an LU-factored
// linear map W = L U (unit-lower L, upper U with softplus diagonal) and then
// x_i = y_i * s_i(y_<i) + m_i(y_<i), s = sigmoid(raw + 2) + 1e-3, where
// (raw, m) come from a MADE network with residual blocks.  Sampling runs
// the layers backwards, inverting each MAF step one coordinate at a time.
//
// diagonal_gaussian: u = mu + exp(rho) z.
//
// Everything is templated on the scalar so the same code runs on double,
// ad::Dual (forward tangents in phi) and calib::Var (reverse tape).

#include <span>
#include <string>
#include <vector>

#include "dabm/ad/dual.hpp"
#include "dabm/calib/tape.hpp"
#include "dabm/rng.hpp"

namespace dabm::calib {

enum class FamilyKind { diagonal_gaussian, maf };

std::string to_string(FamilyKind k);
FamilyKind family_kind_from_string(const std::string& s);

struct FamilySpec {
    FamilyKind kind = FamilyKind::maf;
    std::size_t dim = 1;
    int layers = 4;
    int hidden = 32;
    int blocks = 2;

    void validate() const;
};

template <class S>
struct FlowSample {
    std::vector<S> u;  // unconstrained point
    S log_q;           // log density of u
};

class VariationalFamily {
public:
    explicit VariationalFamily(FamilySpec spec);

    const FamilySpec& spec() const { return spec_; }
    std::size_t dim() const { return spec_.dim; }
    std::size_t num_params() const { return num_params_; }

    /// Initial phi: PyTorch-style uniform(+-1/sqrt(fan_in)) weights, near-zero
    /// residual outputs, identity LU.  Diagonal Gaussian starts at N(0, I).
    std::vector<double> init(Rng& rng) const;

    /// u = T_phi(z) and log q(u).
    template <class S>
    FlowSample<S> sample(std::span<const S> phi, std::span<const double> z) const;

    /// log q(u) via the density direction.
    template <class S>
    S log_density(std::span<const S> phi, std::span<const S> u) const;

private:
    struct LayerOffsets {
        std::size_t lower, upper, diag;               // LU
        std::size_t w_in, b_in;                       // D -> H
        std::vector<std::size_t> w1, b1, w2, b2;      // residual blocks, H -> H
        std::size_t w_out, b_out;                     // H -> 2D
    };

    template <class S>
    void made(std::span<const S> phi, const LayerOffsets& off, std::span<const S> y, std::vector<S>& raw_scale,
              std::vector<S>& shift) const;
    template <class S>
    std::vector<S> lu_apply(std::span<const S> phi, const LayerOffsets& off, std::span<const S> y, S& logdet) const;
    template <class S>
    std::vector<S> lu_solve(std::span<const S> phi, const LayerOffsets& off, std::span<const S> x, S& logdet) const;

    FamilySpec spec_;
    std::size_t num_params_ = 0;
    std::vector<LayerOffsets> layers_;
    std::vector<int> in_degree_, hidden_degree_;
};

/// Log density of N(0, I) at z.
template <class S>
S standard_normal_log_density(std::span<const S> z);

}  // namespace dabm::calib
