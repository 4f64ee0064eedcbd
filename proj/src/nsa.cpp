#include "nsv/nsa.hpp"

#include "nsv/errors.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace nsv {

double l1_distance(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw Error("l1_distance: length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += std::abs(a[i] - b[i]);
    return sum;
}

bool is_self_match(const Box& candidate, const std::vector<Box>& self_set,
                   double self_radius)
{
    const std::vector<double> c = center(candidate);
    for (const Box& self : self_set) {
        if (l1_distance(c, center(self)) <= self_radius)
            return true;
    }
    return false;
}

DetectorSet generate_detectors(const std::vector<Box>& pool,
                               const std::vector<Box>& self_set,
                               const NsaParams& params)
{
    if (pool.empty())
        throw Error("generate_detectors: candidate pool is empty");
    if (params.num_detectors > pool.size())
        throw Error("generate_detectors: requested " +
                    std::to_string(params.num_detectors) + " detectors from a pool of " +
                    std::to_string(pool.size()));

    const std::size_t max_attempts = params.effective_max_attempts();

    std::mt19937_64 rng(params.seed);

    // Partial Fisher-Yates: order[0..tried) holds the cells drawn so far, so
    // each draw is uniform over the not-yet-tried remainder of the pool.
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);

    DetectorSet result;
    result.params = params;
    std::size_t tried = 0;
    while (result.detectors.size() < params.num_detectors) {
        if (tried == pool.size() || tried == max_attempts) {
            const char* why = tried == pool.size() ? "pool exhausted"
                                                   : "attempt budget exhausted";
            throw DetectorShortfall(
                std::string("generate_detectors: ") + why + " after " +
                    std::to_string(tried) + " attempts with " +
                    std::to_string(result.detectors.size()) + " of " +
                    std::to_string(params.num_detectors) +
                    " detectors found (N or r_s too large?)",
                result.detectors.size());
        }

        std::uniform_int_distribution<std::size_t> pick(tried, pool.size() - 1);
        std::swap(order[tried], order[pick(rng)]);
        const Box& candidate = pool[order[tried]];
        ++tried;

        if (!is_self_match(candidate, self_set, params.self_radius))
            result.detectors.push_back(candidate);
    }
    result.attempts_used = tried;
    return result;
}

} // namespace nsv
