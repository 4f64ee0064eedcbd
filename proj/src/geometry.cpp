#include "nsv/geometry.hpp"

#include "nsv/errors.hpp"

#include <algorithm>
#include <string>

namespace nsv {

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_)
{
    if (!(lo <= hi))
        throw Error("invalid interval: lo " + std::to_string(lo_) + " > hi " +
                    std::to_string(hi_));
}

Box::Box(std::vector<Interval> dims, std::optional<std::size_t> id)
    : dims_(std::move(dims)), id_(id)
{
    if (dims_.empty())
        throw Error("box needs at least one dimension");
}

double step_size(const Interval& iv, std::size_t n)
{
    if (n == 0)
        throw Error("step_size: n must be positive");
    return (iv.hi - iv.lo) / static_cast<double>(n);
}

std::vector<Interval> subintervals(const Interval& iv, std::size_t n)
{
    const double gamma = step_size(iv, n);

    std::vector<double> endpoints(n + 1);
    endpoints[0] = iv.lo;
    for (std::size_t j = 1; j < n; ++j)
        endpoints[j] = std::min(iv.lo + static_cast<double>(j) * gamma, iv.hi);
    // Snap the last endpoint so the union reproduces the interval exactly.
    endpoints[n] = iv.hi;

    std::vector<Interval> result;
    result.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        result.emplace_back(endpoints[j], endpoints[j + 1]);
    return result;
}

static void validate_spec(const Box& box, const PartitionSpec& spec)
{
    if (spec.num_subintervals == 0)
        throw Error("partition: num_subintervals must be positive");
    if (spec.split_dims.empty())
        throw Error("partition: split_dims must not be empty");
    for (std::size_t d : spec.split_dims)
        if (d >= box.dimension())
            throw Error("partition: split dimension " + std::to_string(d) +
                        " out of range for a " + std::to_string(box.dimension()) +
                        "-dimensional box");
}

std::vector<Box> partition(const Box& box, const PartitionSpec& spec)
{
    validate_spec(box, spec);

    std::vector<std::size_t> split(spec.split_dims);
    std::sort(split.begin(), split.end());
    split.erase(std::unique(split.begin(), split.end()), split.end());

    std::vector<std::vector<Interval>> per_dim(box.dimension());
    for (std::size_t d = 0; d < box.dimension(); ++d) {
        const bool listed = std::binary_search(split.begin(), split.end(), d);
        if (listed && box.dim(d).width() >= spec.min_split_width)
            per_dim[d] = subintervals(box.dim(d), spec.num_subintervals);
        else
            per_dim[d] = {box.dim(d)};
    }

    std::size_t total = 1;
    for (const auto& ivs : per_dim)
        total *= ivs.size();

    // Odometer over sub-interval indices, last dimension fastest, so cells
    // come out in lexicographic (dim 0, dim 1, ...) index order.
    std::vector<Box> cells;
    cells.reserve(total);
    std::vector<std::size_t> idx(box.dimension(), 0);
    for (std::size_t ordinal = 0; ordinal < total; ++ordinal) {
        std::vector<Interval> dims;
        dims.reserve(box.dimension());
        for (std::size_t d = 0; d < box.dimension(); ++d)
            dims.push_back(per_dim[d][idx[d]]);
        cells.emplace_back(std::move(dims), ordinal);

        for (std::size_t d = box.dimension(); d-- > 0;) {
            if (++idx[d] < per_dim[d].size())
                break;
            idx[d] = 0;
        }
    }
    return cells;
}

std::vector<double> center(const Box& box)
{
    std::vector<double> mid;
    mid.reserve(box.dimension());
    for (const Interval& iv : box.dims())
        mid.push_back(iv.midpoint());
    return mid;
}

bool contains(const Box& box, std::span<const double> x)
{
    if (x.size() != box.dimension())
        throw Error("contains: point dimension " + std::to_string(x.size()) +
                    " does not match box dimension " +
                    std::to_string(box.dimension()));
    for (std::size_t d = 0; d < box.dimension(); ++d)
        if (!box.dim(d).contains(x[d]))
            return false;
    return true;
}

} // namespace nsv
