#ifndef NSV_GEOMETRY_HPP
#define NSV_GEOMETRY_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace nsv {

// Closed interval [lo, hi] in normalized input units.
struct Interval {
    double lo;
    double hi;

    Interval(double lo_, double hi_);

    double width() const { return hi - lo; }
    double midpoint() const { return lo + 0.5 * (hi - lo); }
    bool contains(double x) const { return lo <= x && x <= hi; }

    bool operator==(const Interval&) const = default;
};

// Axis-aligned hyper-rectangle of input bounds; one partition cell is a
// sub-requirement. The id, when set, is the cell's stable ordinal within
// the partition that produced it.
class Box {
public:
    explicit Box(std::vector<Interval> dims,
                 std::optional<std::size_t> id = std::nullopt);

    std::size_t dimension() const { return dims_.size(); }
    const std::vector<Interval>& dims() const { return dims_; }
    const Interval& dim(std::size_t i) const { return dims_[i]; }
    std::optional<std::size_t> id() const { return id_; }
    void set_id(std::size_t id) { id_ = id; }

    bool operator==(const Box&) const = default;

private:
    std::vector<Interval> dims_;
    std::optional<std::size_t> id_;
};

// Which dimensions to split and into how many sub-intervals each.
// Dimensions narrower than min_split_width are kept whole even when listed.
struct PartitionSpec {
    std::vector<std::size_t> split_dims;
    std::size_t num_subintervals = 1;
    double min_split_width = 1e-9;
};

// Partitioning step size gamma = (hi - lo) / n.
double step_size(const Interval& iv, std::size_t n);

// The n closed sub-intervals [lo + (j-1)*gamma, lo + j*gamma], j = 1..n.
// The first lo and the last hi reproduce the input endpoints bit-for-bit.
std::vector<Interval> subintervals(const Interval& iv, std::size_t n);

// Cartesian product of per-dimension sub-interval lists, in lexicographic
// order of the sub-interval indices (last dimension fastest). Each cell
// carries id = its ordinal, starting at 0.
std::vector<Box> partition(const Box& box, const PartitionSpec& spec);

// Midpoint per dimension; the cell's representative point for NSA distances.
std::vector<double> center(const Box& box);

// Closed-interval membership per dimension.
bool contains(const Box& box, std::span<const double> x);

} // namespace nsv

#endif
