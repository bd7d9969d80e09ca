#include "dabm/calib/mmd.hpp"

#include <algorithm>

namespace dabm::calib {

double median_heuristic(const PointSet<double>& obs) {
    std::vector<double> dist;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        for (std::size_t j = i + 1; j < obs.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < obs[i].size(); ++k) d2 += (obs[i][k] - obs[j][k]) * (obs[i][k] - obs[j][k]);
            dist.push_back(std::sqrt(d2));
        }
    }
    if (dist.empty()) return 1.0;
    const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    double med = *mid;
    if (dist.size() % 2 == 0) med = 0.5 * (med + *std::max_element(dist.begin(), mid));
    return med > 0.0 ? med : 1.0;
}

}  // namespace dabm::calib
