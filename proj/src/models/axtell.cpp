#include "dabm/models/axtell.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <type_traits>

#include "dabm/ad/smooth.hpp"
#include "dabm/distributions.hpp"

namespace dabm::models::axtell {

using ad::Dual;
using ad::value;

const std::array<std::string, kNumParams>& param_names() {
    static const std::array<std::string, kNumParams> names = {"theta_alpha", "theta_beta", "e_alpha", "e_beta",
                                                               "a_alpha",     "a_beta",     "b_alpha", "b_beta"};
    return names;
}

Params<double> default_params() { return {1.0, 3.0, 2.0, 1.0, 2.0, 5.0, 5.0, 2.0}; }

template <class T>
T utility(const T& e, const T& theta, const T& E_minus, const T& a, const T& b, const T& n) {
    using std::exp;
    using std::log;
    const T share = production(e + E_minus, a, b) / n;
    const T leisure = 1.0 - e;
    const T rest = 1.0 - theta;
    T log_u(0.0);
    if (value(theta) > 0.0) {
        if (!(value(share) > 0.0)) return T(0.0);
        log_u = theta * log(share);
    }
    if (value(rest) > 0.0) {
        if (!(value(leisure) > 0.0)) return T(0.0);
        log_u = log_u + rest * log(leisure);
    }
    return exp(log_u);
}

template <class T>
T optimal_effort(const T& theta, const T& E_minus, const T& a, const T& b) {
    using std::sqrt;
    const T K = 1.0 + E_minus;
    const T A = b * (1.0 + theta);
    const T B = a - 2.0 * theta * b * K;
    const T C = theta * a * K;  // constant term is -C
    T E;
    if (value(A) == 0.0) {
        if (value(B) <= 0.0) return T(value(theta) > 0.0 ? 1.0 : 0.0);
        E = C / B;
    } else {
        const T disc = sqrt(B * B + 4.0 * A * C);
        E = value(B) >= 0.0 ? (2.0 * C) / (B + disc) : (disc - B) / (2.0 * A);
    }
    const T e = E - E_minus;
    if (value(e) <= 0.0) return T(0.0);
    if (value(e) >= 1.0) return T(1.0);
    return e;
}

template <class T>
Choice select_firm(std::span<const T> utilities, double tau, std::vector<T>& soft_weights) {
    if (utilities.empty()) throw std::invalid_argument("select_firm: no candidate firms");
    Choice c;
    for (std::size_t k = 1; k < utilities.size(); ++k) {
        if (value(utilities[k]) > value(utilities[c.index])) c.index = k;
    }
    soft_weights = ad::tempered_softmax(utilities, tau);
    return c;
}

std::vector<std::vector<std::uint32_t>> friendship_network(std::size_t n, int min_friends, int max_friends, Rng& rng) {
    if (min_friends < 0 || max_friends < min_friends) throw std::invalid_argument("friendship_network: bad range");
    std::vector<std::vector<std::uint32_t>> friends(n);
    if (n < 2) return friends;
    const auto span = static_cast<std::uint64_t>(max_friends - min_friends + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto want = std::min<std::size_t>(static_cast<std::size_t>(min_friends) + rng.index(span), n - 1);
        std::size_t added = 0;
        while (added < want) {
            auto j = static_cast<std::uint32_t>(rng.index(n - 1));
            if (j >= i) ++j;
            if (std::find(friends[i].begin(), friends[i].end(), j) != friends[i].end()) {
                if (friends[i].size() >= n - 1) break;
                continue;
            }
            friends[i].push_back(j);
            friends[j].push_back(static_cast<std::uint32_t>(i));
            ++added;
        }
    }
    for (auto& f : friends) {
        std::sort(f.begin(), f.end());
        f.erase(std::unique(f.begin(), f.end()), f.end());
    }
    return friends;
}

template <class T>
Trajectory<T> simulate(const Params<T>& params, const SimConfig& cfg, Rng& rng) {
    const std::size_t n = cfg.agents;
    if (n == 0) throw std::invalid_argument("axtell: need at least one agent");
    if (cfg.steps < 1) throw std::invalid_argument("axtell: steps must be positive");
    if (!(cfg.tau > 0.0)) throw std::invalid_argument("axtell: tau must be positive");
    for (const auto& p : params) {
        if (!(value(p) > 0.0)) throw std::domain_error("axtell: Beta shapes must be positive");
    }

    const auto friends = friendship_network(n, cfg.min_friends, cfg.max_friends, rng);
    const auto order = rng.permutation(n);

    std::vector<T> pref(n), effort(n), scale(n), returns(n);
    for (std::size_t i = 0; i < n; ++i) pref[i] = beta_quantile(params[0], params[1], rng.uniform());
    for (std::size_t i = 0; i < n; ++i) effort[i] = beta_quantile(params[2], params[3], rng.uniform());
    for (std::size_t f = 0; f < n; ++f) scale[f] = beta_quantile(params[4], params[5], rng.uniform());
    for (std::size_t f = 0; f < n; ++f) returns[f] = beta_quantile(params[6], params[7], rng.uniform());

    // Firm slots: agent i starts alone in slot i.
    std::vector<std::size_t> firm(n);
    std::vector<T> size(n, T(1.0)), total(n);
    for (std::size_t i = 0; i < n; ++i) {
        firm[i] = i;
        total[i] = effort[i];
    }
    std::set<std::size_t> empty_slots;

    Trajectory<T> out;
    std::vector<std::size_t> cand;
    std::vector<T> util, best_effort, soft;
    for (int step = 0; step < cfg.steps; ++step) {
        for (const std::size_t i : order) {
            const std::size_t old = firm[i];
            cand.clear();
            cand.push_back(old);
            for (const auto j : friends[i]) {
                if (std::find(cand.begin(), cand.end(), firm[j]) == cand.end()) cand.push_back(firm[j]);
            }
            if (value(size[old]) > 1.0 && !empty_slots.empty()) cand.push_back(*empty_slots.begin());

            util.clear();
            best_effort.clear();
            for (const std::size_t f : cand) {
                // Evaluate f with i as a member; i's own effort is never double counted.
                const bool current = f == old;
                const T E_minus = current ? total[f] - effort[i] : total[f];
                const T members = current ? size[f] : size[f] + 1.0;
                const T e = optimal_effort(pref[i], E_minus, scale[f], returns[f]);
                best_effort.push_back(e);
                util.push_back(utility(e, pref[i], E_minus, scale[f], returns[f], members));
            }

            Choice choice;
            if (std::is_same_v<T, double> || !cfg.relax_choice) {
                for (std::size_t k = 1; k < util.size(); ++k) {
                    if (util[k] > util[choice.index]) choice.index = k;
                }
                soft.assign(util.size(), T(0.0));
                if constexpr (!std::is_same_v<T, double>) soft[choice.index] = T(1.0);
            } else {
                choice = select_firm(std::span<const T>(util), cfg.tau, soft);
            }

            // Tangent of the next effort: the softmax-weighted mixture of candidate optima.
            // By default the candidates' optima enter as constants except the chosen one,
            // which removes a cross-firm feedback loop that is unstable in large firms.
            T mixed_effort(0.0);
            if (cfg.full_effort_mixture) {
                for (std::size_t k = 0; k < cand.size(); ++k) mixed_effort += soft[k] * best_effort[k];
            } else {
                const T& chosen_e = best_effort[choice.index];
                mixed_effort = chosen_e - ad::stop_gradient(chosen_e);
                for (std::size_t k = 0; k < cand.size(); ++k) mixed_effort += soft[k] * ad::stop_gradient(best_effort[k]);
            }
            const T new_effort = ad::surrogate_combine(best_effort[choice.index], mixed_effort);

            // Leave the old firm, then join the chosen one (softly on the tangent).
            size[old] = size[old] - 1.0;
            total[old] = total[old] - effort[i];
            for (std::size_t k = 0; k < cand.size(); ++k) {
                const T member = ad::surrogate_combine(T(k == choice.index ? 1.0 : 0.0), soft[k]);
                size[cand[k]] = size[cand[k]] + member;
                total[cand[k]] = total[cand[k]] + member * new_effort;
            }
            effort[i] = new_effort;

            const std::size_t chosen = cand[choice.index];
            firm[i] = chosen;
            empty_slots.erase(chosen);
            if (value(size[old]) == 0.0) empty_slots.insert(old);
        }

        T effort_sum(0.0), size_sum(0.0), output_sum(0.0);
        double size_primal = 0.0;
        double active = 0.0;
        for (std::size_t i = 0; i < n; ++i) effort_sum += effort[i];
        for (std::size_t f = 0; f < n; ++f) {
            size_primal += value(size[f]);
            if (value(size[f]) > 0.0) {
                active += 1.0;
                size_sum += size[f];
                output_sum += production(total[f], scale[f], returns[f]);
            }
        }
        out.mean_effort.push_back(effort_sum / static_cast<double>(n));
        out.mean_size.push_back(size_sum / active);
        out.mean_output.push_back(output_sum / active);
        out.total_size.push_back(size_primal);
        out.active_firms.push_back(active);
    }
    return out;
}

template double utility(const double&, const double&, const double&, const double&, const double&, const double&);
template Dual utility(const Dual&, const Dual&, const Dual&, const Dual&, const Dual&, const Dual&);
template double optimal_effort(const double&, const double&, const double&, const double&);
template Dual optimal_effort(const Dual&, const Dual&, const Dual&, const Dual&);
template Choice select_firm(std::span<const double>, double, std::vector<double>&);
template Choice select_firm(std::span<const Dual>, double, std::vector<Dual>&);
template Trajectory<double> simulate(const Params<double>&, const SimConfig&, Rng&);
template Trajectory<Dual> simulate(const Params<Dual>&, const SimConfig&, Rng&);

}  // namespace dabm::models::axtell
