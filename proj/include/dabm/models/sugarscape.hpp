#pragma once

// Sugarscape on a toroidal grid.
//
// Cell choice is an argmax over a local score window on the primal and a
// softmax over the same window on the tangent, where the vision mask is the
// p-weighted mixture of the candidate vision matrices.  Survival is a hard
// threshold with a smoothed tangent.  Sugar itself carries no tangent: the
// harvested cell is emptied and regrowth is parameter free.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dabm/ad/dual.hpp"
#include "dabm/ad/smooth.hpp"
#include "dabm/rng.hpp"

namespace dabm::models::sugarscape {

inline constexpr std::size_t kNumParams = 6;

/// m_alpha, m_beta, w_alpha, w_beta, then the unnormalized probabilities of
/// the two vision ranges.
template <class T>
using Params = std::array<T, kNumParams>;

Params<double> default_params();  // m (2, 5), w (5, 2), p (0.2, 0.8)

struct SimConfig {
    std::size_t agents = 100;
    std::size_t grid = 25;
    int steps = 50;
    double regen = 1.0;
    double peak_capacity = 4.0;
    double peak_width = 0.25;  // bump standard deviation as a fraction of the grid size
    std::array<int, 2> visions = {1, 3};
    bool strict_vision = false;  // Manhattan distance < v instead of <= v
    double tau = 1.0;            // cell-choice softmax temperature
    ad::SmootherConfig survival;
};

std::vector<std::string> param_names(const SimConfig& cfg);  // "m_alpha", ..., "p_1", "p_3"

/// Row-major (2V+1)^2 0/1 mask of offsets within distance v of the centre.
std::vector<double> vision_matrix(int v, int V, bool strict = false);

/// sum_k p_k M_{v_k} with p normalized to the simplex.
template <class T>
std::vector<T> mixed_vision(std::span<const T> p, std::span<const int> visions, int V, bool strict = false);

struct Grid {
    std::size_t size = 0;
    double regen = 0.0;
    std::vector<double> sugar;
    std::vector<double> capacity;
    std::vector<int> occupant;        // agent index or -1
    std::vector<unsigned char> harvested;

    static Grid two_peaks(std::size_t m, double peak, double regen, double width = 0.25);
    std::size_t index(long x, long y) const;  // toroidal wrap
};

/// s <- min(s (1 - o) + r, c); clears the harvested flags.
void regenerate(Grid& grid);

template <class T>
struct Move {
    std::size_t x = 0, y = 0;
    std::size_t choice = 0;       // flat window index of the chosen cell
    T harvest = T(0.0);           // primal: sugar of the chosen cell; tangent: <Z~, S>
    std::vector<double> sugar;    // local window S
    std::vector<double> free;     // local window O (own cell counts as free)
    std::vector<T> soft;          // Z~, zero outside the soft support
};

/// Scores the local window and picks the destination.  `hard_mask` is the
/// agent's own vision matrix, `mixed_mask` the tangent-pass mixture.
template <class T>
Move<T> score_and_move(const Grid& grid, std::size_t x, std::size_t y, int V, const std::vector<double>& hard_mask,
                       const std::vector<T>& mixed_mask, double tau);

/// h' = h + (harvest - m) a; a' = a * step(h' > 0) with a smoothed tangent.
template <class T>
void harvest_and_metabolize(T& holdings, T& alive, const T& harvest, const T& metabolism,
                            const ad::SmootherConfig& smoother);

template <class T>
struct Trajectory {
    std::vector<T> mean_holdings;   // over living agents
    std::vector<T> fraction_alive;
};

struct Snapshot {
    int step = 0;
    std::vector<double> sugar;
    std::vector<std::array<double, 4>> agents;  // x, y, holdings, alive
};

template <class T>
Trajectory<T> simulate(const Params<T>& params, const SimConfig& cfg, Rng& rng,
                       std::vector<Snapshot>* snapshots = nullptr);

}  // namespace dabm::models::sugarscape
