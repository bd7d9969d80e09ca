#include "dabm/models/sugarscape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <type_traits>

#include "dabm/distributions.hpp"

namespace dabm::models::sugarscape {

using ad::Dual;
using ad::value;

Params<double> default_params() { return {2.0, 5.0, 5.0, 2.0, 0.2, 0.8}; }

std::vector<std::string> param_names(const SimConfig& cfg) {
    return {"m_alpha", "m_beta", "w_alpha", "w_beta", "p_" + std::to_string(cfg.visions[0]),
            "p_" + std::to_string(cfg.visions[1])};
}

std::vector<double> vision_matrix(int v, int V, bool strict) {
    if (V < 1) throw std::invalid_argument("vision_matrix: V must be at least 1");
    if (v < 1 || v > V) {
        throw std::invalid_argument("vision_matrix: range " + std::to_string(v) + " outside [1, " +
                                    std::to_string(V) + "]");
    }
    const int w = 2 * V + 1;
    std::vector<double> m(static_cast<std::size_t>(w * w), 0.0);
    for (int k = 0; k < w; ++k) {
        for (int l = 0; l < w; ++l) {
            const int d = std::abs(k - V) + std::abs(l - V);
            if (strict ? d < v : d <= v) m[static_cast<std::size_t>(k * w + l)] = 1.0;
        }
    }
    return m;
}

template <class T>
std::vector<T> mixed_vision(std::span<const T> p, std::span<const int> visions, int V, bool strict) {
    if (p.size() != visions.size() || p.empty()) throw std::invalid_argument("mixed_vision: size mismatch");
    T total(0.0);
    for (const auto& x : p) {
        if (value(x) < 0.0) throw std::domain_error("mixed_vision: negative probability");
        total += x;
    }
    if (!(value(total) > 0.0)) throw std::domain_error("mixed_vision: probabilities sum to zero");
    const std::size_t w = static_cast<std::size_t>(2 * V + 1);
    std::vector<T> out(w * w, T(0.0));
    for (std::size_t k = 0; k < p.size(); ++k) {
        const auto m = vision_matrix(visions[k], V, strict);
        const T weight = p[k] / total;
        for (std::size_t c = 0; c < out.size(); ++c) {
            if (m[c] != 0.0) out[c] += weight;
        }
    }
    return out;
}

Grid Grid::two_peaks(std::size_t m, double peak, double regen, double width) {
    if (m == 0) throw std::invalid_argument("grid size must be positive");
    if (!(width > 0.0)) throw std::invalid_argument("peak width must be positive");
    Grid g;
    g.size = m;
    g.regen = regen;
    g.capacity.assign(m * m, 0.0);
    const double M = static_cast<double>(m);
    const double s = M * width;
    const std::array<std::array<double, 2>, 2> centres = {{{M / 4.0, M / 4.0}, {3.0 * M / 4.0, 3.0 * M / 4.0}}};
    for (std::size_t x = 0; x < m; ++x) {
        for (std::size_t y = 0; y < m; ++y) {
            double best = 0.0;
            for (const auto& c : centres) {
                double dx = std::abs(static_cast<double>(x) - c[0]);
                double dy = std::abs(static_cast<double>(y) - c[1]);
                dx = std::min(dx, M - dx);
                dy = std::min(dy, M - dy);
                best = std::max(best, std::exp(-(dx * dx + dy * dy) / (2.0 * s * s)));
            }
            g.capacity[x * m + y] = peak * best;
        }
    }
    g.sugar = g.capacity;
    g.occupant.assign(m * m, -1);
    g.harvested.assign(m * m, 0);
    return g;
}

std::size_t Grid::index(long x, long y) const {
    const long m = static_cast<long>(size);
    const long xi = ((x % m) + m) % m;
    const long yi = ((y % m) + m) % m;
    return static_cast<std::size_t>(xi * m + yi);
}

void regenerate(Grid& grid) {
    for (std::size_t c = 0; c < grid.sugar.size(); ++c) {
        const double kept = grid.harvested[c] ? 0.0 : grid.sugar[c];
        grid.sugar[c] = std::min(kept + grid.regen, grid.capacity[c]);
        grid.harvested[c] = 0;
    }
}

template <class T>
Move<T> score_and_move(const Grid& grid, std::size_t x, std::size_t y, int V, const std::vector<double>& hard_mask,
                       const std::vector<T>& mixed_mask, double tau) {
    const std::size_t w = static_cast<std::size_t>(2 * V + 1);
    if (hard_mask.size() != w * w || mixed_mask.size() != w * w) {
        throw std::invalid_argument("score_and_move: mask does not match the window");
    }
    if (!(tau > 0.0)) throw std::invalid_argument("score_and_move: temperature must be positive");
    Move<T> mv;
    mv.sugar.resize(w * w);
    mv.free.resize(w * w);
    const std::size_t centre = static_cast<std::size_t>(V) * w + static_cast<std::size_t>(V);
    for (std::size_t k = 0; k < w; ++k) {
        for (std::size_t l = 0; l < w; ++l) {
            const auto c = grid.index(static_cast<long>(x) + static_cast<long>(k) - V,
                                      static_cast<long>(y) + static_cast<long>(l) - V);
            mv.sugar[k * w + l] = grid.sugar[c];
            mv.free[k * w + l] = grid.occupant[c] < 0 ? 1.0 : 0.0;
        }
    }
    mv.free[centre] = 1.0;

    // Primal: first maximum in row-major order among visible free cells.
    mv.choice = centre;
    double best = -1.0;
    for (std::size_t c = 0; c < w * w; ++c) {
        if (hard_mask[c] * mv.free[c] == 0.0 && c != centre) continue;
        if (mv.sugar[c] > best) {
            best = mv.sugar[c];
            mv.choice = c;
        }
    }
    mv.x = grid.index(static_cast<long>(x) + static_cast<long>(mv.choice / w) - V, 0) / grid.size;
    mv.y = grid.index(0, static_cast<long>(y) + static_cast<long>(mv.choice % w) - V);

    mv.soft.assign(w * w, T(0.0));
    if constexpr (std::is_same_v<T, double>) {
        mv.soft[mv.choice] = 1.0;
        mv.harvest = mv.sugar[mv.choice];
    } else {
        // Tangent: softmax of Z = S * O * M~ over cells the mixture can see.
        std::vector<std::size_t> support;
        std::vector<T> scores;
        for (std::size_t c = 0; c < w * w; ++c) {
            if (mv.free[c] == 0.0 || (value(mixed_mask[c]) <= 0.0 && c != centre)) continue;
            support.push_back(c);
            scores.push_back(mv.sugar[c] * mixed_mask[c]);
        }
        const auto pi = ad::tempered_softmax(std::span<const T>(scores), tau);
        T expected(0.0);
        for (std::size_t k = 0; k < support.size(); ++k) {
            mv.soft[support[k]] = pi[k];
            expected += pi[k] * mv.sugar[support[k]];
        }
        mv.harvest = ad::surrogate_combine(T(mv.sugar[mv.choice]), expected);
    }
    return mv;
}

template <class T>
void harvest_and_metabolize(T& holdings, T& alive, const T& harvest, const T& metabolism,
                            const ad::SmootherConfig& smoother) {
    // Dead agents are frozen, so the indicator of positive holdings is the
    // survival state itself; relaxing it directly (rather than multiplying
    // per-step relaxations) keeps near-threshold steps from piling up.
    holdings = holdings + (harvest - metabolism) * value(alive);
    const double survived = value(alive) > 0.0 && value(holdings) > 0.0 ? 1.0 : 0.0;
    if constexpr (std::is_same_v<T, double>) {
        alive = survived;
    } else {
        alive = ad::surrogate_combine(T(survived), ad::smooth_step(holdings, smoother));
    }
}

template <class T>
Trajectory<T> simulate(const Params<T>& params, const SimConfig& cfg, Rng& rng, std::vector<Snapshot>* snapshots) {
    const std::size_t n = cfg.agents;
    const std::size_t m = cfg.grid;
    if (n > m * m) throw std::invalid_argument("sugarscape: more agents than cells");
    if (cfg.steps < 1) throw std::invalid_argument("sugarscape: steps must be positive");
    for (std::size_t k = 0; k < 4; ++k) {
        if (!(value(params[k]) > 0.0)) throw std::domain_error("sugarscape: Beta shapes must be positive");
    }
    const int V = std::max(cfg.visions[0], cfg.visions[1]);
    if (std::min(cfg.visions[0], cfg.visions[1]) < 1) throw std::invalid_argument("sugarscape: vision must be >= 1");
    if (m < static_cast<std::size_t>(2 * V + 1)) throw std::invalid_argument("sugarscape: grid smaller than the window");
    cfg.survival.validate();

    Grid grid = Grid::two_peaks(m, cfg.peak_capacity, cfg.regen, cfg.peak_width);
    const std::array<T, 2> p = {params[4], params[5]};
    const auto mixed = mixed_vision(std::span<const T>(p), std::span<const int>(cfg.visions), V, cfg.strict_vision);
    const std::array<std::vector<double>, 2> hard = {vision_matrix(cfg.visions[0], V, cfg.strict_vision),
                                                     vision_matrix(cfg.visions[1], V, cfg.strict_vision)};

    const auto cells = rng.permutation(m * m);
    std::vector<std::size_t> px(n), py(n);
    for (std::size_t i = 0; i < n; ++i) {
        px[i] = cells[i] / m;
        py[i] = cells[i] % m;
        grid.occupant[cells[i]] = static_cast<int>(i);
    }
    std::vector<T> holdings(n), metabolism(n), alive(n, T(1.0));
    for (std::size_t i = 0; i < n; ++i) holdings[i] = 6.0 + 19.0 * beta_quantile(params[2], params[3], rng.uniform());
    for (std::size_t i = 0; i < n; ++i) metabolism[i] = 2.0 + 2.0 * beta_quantile(params[0], params[1], rng.uniform());
    std::vector<T> shadow = holdings;
    const std::array<double, 2> pv = {value(p[0]), value(p[1])};
    std::vector<std::size_t> vision(n);
    for (std::size_t i = 0; i < n; ++i) vision[i] = categorical_index(pv.data(), 2, rng.uniform());

    Trajectory<T> out;
    for (int step = 0; step < cfg.steps; ++step) {
        const auto order = rng.permutation(n);
        for (const std::size_t i : order) {
            if (value(alive[i]) == 0.0) {
                // Holdings are frozen; the survival relaxation follows a shadow
                // balance that keeps paying metabolism, so a death's tangent
                // fades once the death time is no longer marginal.
                shadow[i] = shadow[i] - metabolism[i];
                if constexpr (!std::is_same_v<T, double>) {
                    alive[i] = ad::surrogate_combine(T(0.0), ad::smooth_step(shadow[i], cfg.survival));
                }
                continue;
            }
            const auto mv = score_and_move(grid, px[i], py[i], V, hard[vision[i]], mixed, cfg.tau);
            grid.occupant[grid.index(static_cast<long>(px[i]), static_cast<long>(py[i]))] = -1;
            px[i] = mv.x;
            py[i] = mv.y;
            const auto cell = grid.index(static_cast<long>(px[i]), static_cast<long>(py[i]));
            grid.sugar[cell] = 0.0;
            grid.harvested[cell] = 1;
            harvest_and_metabolize(holdings[i], alive[i], mv.harvest, metabolism[i], cfg.survival);
            shadow[i] = holdings[i];
            grid.occupant[cell] = value(alive[i]) > 0.0 ? static_cast<int>(i) : -1;
        }
        regenerate(grid);

        T wealth(0.0), living(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            wealth += alive[i] * holdings[i];
            living += alive[i];
        }
        out.mean_holdings.push_back(value(living) > 0.0 ? wealth / living : T(0.0));
        out.fraction_alive.push_back(living / static_cast<double>(n));

        if (snapshots) {
            Snapshot snap;
            snap.step = step + 1;
            snap.sugar = grid.sugar;
            for (std::size_t i = 0; i < n; ++i) {
                snap.agents.push_back({static_cast<double>(px[i]), static_cast<double>(py[i]), value(holdings[i]),
                                       value(alive[i])});
            }
            snapshots->push_back(std::move(snap));
        }
    }
    return out;
}

template std::vector<double> mixed_vision(std::span<const double>, std::span<const int>, int, bool);
template std::vector<Dual> mixed_vision(std::span<const Dual>, std::span<const int>, int, bool);
template Move<double> score_and_move(const Grid&, std::size_t, std::size_t, int, const std::vector<double>&,
                                     const std::vector<double>&, double);
template Move<Dual> score_and_move(const Grid&, std::size_t, std::size_t, int, const std::vector<double>&,
                                   const std::vector<Dual>&, double);
template void harvest_and_metabolize(double&, double&, const double&, const double&, const ad::SmootherConfig&);
template void harvest_and_metabolize(Dual&, Dual&, const Dual&, const Dual&, const ad::SmootherConfig&);
template Trajectory<double> simulate(const Params<double>&, const SimConfig&, Rng&, std::vector<Snapshot>*);
template Trajectory<Dual> simulate(const Params<Dual>&, const SimConfig&, Rng&, std::vector<Snapshot>*);

}  // namespace dabm::models::sugarscape
