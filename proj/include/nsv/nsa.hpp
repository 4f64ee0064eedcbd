#ifndef NSV_NSA_HPP
#define NSV_NSA_HPP

#include "nsv/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nsv {

// Parameters of the real-valued negative selection run.
struct NsaParams {
    double self_radius = 0.0;       // r_s, L1 units of the normalized input space
    std::size_t num_detectors = 0;  // N, detectors threshold
    std::uint64_t seed = 0;
    std::size_t max_attempts = 0;   // 0 selects the default 50 * N

    std::size_t effective_max_attempts() const
    {
        return max_attempts == 0 ? 50 * num_detectors : max_attempts;
    }
};

// Output of detector generation: the surviving cells plus run bookkeeping.
struct DetectorSet {
    std::vector<Box> detectors;
    NsaParams params;
    std::size_t attempts_used = 0;
};

// Sum of absolute coordinate differences.
double l1_distance(std::span<const double> a, std::span<const double> b);

// True iff the candidate's center lies within self_radius (L1) of at least
// one self center. An empty self set matches nothing.
bool is_self_match(const Box& candidate, const std::vector<Box>& self_set,
                   double self_radius);

// Detector generation: draw not-yet-tried pool cells uniformly at random
// (seeded) and keep those that clear every self member by more than
// self_radius, until num_detectors are collected. Throws DetectorShortfall
// when the pool or the attempt budget runs out first.
DetectorSet generate_detectors(const std::vector<Box>& pool,
                               const std::vector<Box>& self_set,
                               const NsaParams& params);

} // namespace nsv

#endif
