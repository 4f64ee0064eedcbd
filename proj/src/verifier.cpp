#include "nsv/verifier.hpp"

#include "nsv/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace nsv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void validate_query(const VerificationQuery& q)
{
    if (q.network == nullptr)
        throw Error("verification query carries no network");
    if (q.box.dimension() != q.network->input_dim())
        throw Error("query box dimension " + std::to_string(q.box.dimension()) +
                    " does not match network input_dim " +
                    std::to_string(q.network->input_dim()));
    if (q.condition.dnf.empty())
        throw Error("output condition must have at least one disjunct");
    for (const Conjunction& conj : q.condition.dnf)
        for (const LinearInequality& ineq : conj)
            if (static_cast<std::size_t>(ineq.coeffs.size()) != q.network->output_dim())
                throw Error("condition coefficient length " +
                            std::to_string(ineq.coeffs.size()) +
                            " does not match network output_dim " +
                            std::to_string(q.network->output_dim()));
}

Eigen::VectorXd box_lo(const Box& box)
{
    Eigen::VectorXd lo(static_cast<Eigen::Index>(box.dimension()));
    for (std::size_t d = 0; d < box.dimension(); ++d)
        lo[static_cast<Eigen::Index>(d)] = box.dim(d).lo;
    return lo;
}

Eigen::VectorXd box_hi(const Box& box)
{
    Eigen::VectorXd hi(static_cast<Eigen::Index>(box.dimension()));
    for (std::size_t d = 0; d < box.dimension(); ++d)
        hi[static_cast<Eigen::Index>(d)] = box.dim(d).hi;
    return hi;
}

// Lowest value coeffs.y can take over the output interval box.
double interval_min(const Eigen::VectorXd& coeffs, const Eigen::VectorXd& lo,
                    const Eigen::VectorXd& hi)
{
    double m = 0.0;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i)
        m += coeffs[i] >= 0.0 ? coeffs[i] * lo[i] : coeffs[i] * hi[i];
    return m;
}

// A disjunct survives when no member inequality is already impossible
// against the node's output interval.
bool disjunct_possible(const Conjunction& conj, const Eigen::VectorXd& out_lo,
                       const Eigen::VectorXd& out_hi)
{
    for (const LinearInequality& ineq : conj)
        if (interval_min(ineq.coeffs, out_lo, out_hi) > ineq.decision_rhs())
            return false;
    return true;
}

struct AffineMap {
    Eigen::MatrixXd A;
    Eigen::VectorXd c;
};

// With every ReLU phase fixed on the node, the network is affine; compose the
// map layer by layer using the IBP-derived phase masks.
AffineMap compose_affine(const Network& net, const std::vector<LayerBounds>& bounds)
{
    const auto d = static_cast<Eigen::Index>(net.input_dim());
    AffineMap map{Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d)};
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const Layer& layer = net.layers()[l];
        map.A = layer.weights * map.A;
        map.c = layer.weights * map.c + layer.biases;
        if (layer.activation == Activation::ReLU) {
            for (Eigen::Index k = 0; k < map.A.rows(); ++k) {
                // pre_lo >= 0 keeps the neuron; a [0,0] interval is harmless
                // either way since the value is 0.
                if (bounds[l].pre_lo[k] < 0.0) {
                    map.A.row(k).setZero();
                    map.c[k] = 0.0;
                }
            }
        }
    }
    return map;
}

// Feasibility of {x in box : G x <= h} by enumerating candidate vertices:
// every vertex of the (bounded) polytope is the intersection of d active
// planes drawn from the box faces and the constraint hyperplanes.
class PolytopeDecider {
public:
    PolytopeDecider(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                    const Eigen::VectorXd& lo, const Eigen::VectorXd& hi)
        : G_(G), h_(h), lo_(lo), hi_(hi), dim_(lo.size())
    {
    }

    // Returns feasible points, centroid first when several vertices exist.
    std::vector<Eigen::VectorXd> feasible_points() const
    {
        std::vector<Eigen::VectorXd> vertices;
        const std::size_t planes = 2 * static_cast<std::size_t>(dim_) +
                                   static_cast<std::size_t>(G_.rows());
        std::vector<std::size_t> combo(static_cast<std::size_t>(dim_));
        enumerate(combo, 0, 0, planes, vertices);
        if (vertices.empty())
            return {};

        std::vector<Eigen::VectorXd> points;
        if (vertices.size() > 1) {
            Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim_);
            for (const auto& v : vertices)
                centroid += v;
            centroid /= static_cast<double>(vertices.size());
            if (feasible(centroid))
                points.push_back(clamp(centroid));
        }
        for (const auto& v : vertices)
            points.push_back(clamp(v));
        return points;
    }

private:
    static constexpr double kFeasTol = 1e-9;

    void plane(std::size_t index, Eigen::RowVectorXd& normal, double& offset) const
    {
        const auto d = static_cast<std::size_t>(dim_);
        normal.setZero(dim_);
        if (index < d) {
            normal[static_cast<Eigen::Index>(index)] = 1.0;
            offset = lo_[static_cast<Eigen::Index>(index)];
        } else if (index < 2 * d) {
            normal[static_cast<Eigen::Index>(index - d)] = 1.0;
            offset = hi_[static_cast<Eigen::Index>(index - d)];
        } else {
            normal = G_.row(static_cast<Eigen::Index>(index - 2 * d));
            offset = h_[static_cast<Eigen::Index>(index - 2 * d)];
        }
    }

    void enumerate(std::vector<std::size_t>& combo, std::size_t pos,
                   std::size_t start, std::size_t planes,
                   std::vector<Eigen::VectorXd>& vertices) const
    {
        if (pos == combo.size()) {
            try_vertex(combo, vertices);
            return;
        }
        for (std::size_t p = start; p + (combo.size() - pos) <= planes; ++p) {
            combo[pos] = p;
            enumerate(combo, pos + 1, p + 1, planes, vertices);
        }
    }

    void try_vertex(const std::vector<std::size_t>& combo,
                    std::vector<Eigen::VectorXd>& vertices) const
    {
        Eigen::MatrixXd M(dim_, dim_);
        Eigen::VectorXd v(dim_);
        Eigen::RowVectorXd normal(dim_);
        double offset = 0.0;
        for (std::size_t i = 0; i < combo.size(); ++i) {
            plane(combo[i], normal, offset);
            M.row(static_cast<Eigen::Index>(i)) = normal;
            v[static_cast<Eigen::Index>(i)] = offset;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
        if (!lu.isInvertible())
            return;
        Eigen::VectorXd x = lu.solve(v);
        if (feasible(x))
            vertices.push_back(x);
    }

    bool feasible(const Eigen::VectorXd& x) const
    {
        for (Eigen::Index i = 0; i < dim_; ++i)
            if (x[i] < lo_[i] - kFeasTol || x[i] > hi_[i] + kFeasTol)
                return false;
        for (Eigen::Index r = 0; r < G_.rows(); ++r) {
            const double tol = kFeasTol * (1.0 + std::abs(h_[r]));
            if (G_.row(r).dot(x) > h_[r] + tol)
                return false;
        }
        return true;
    }

    Eigen::VectorXd clamp(const Eigen::VectorXd& x) const
    {
        return x.cwiseMax(lo_).cwiseMin(hi_);
    }

    const Eigen::MatrixXd& G_;
    const Eigen::VectorXd& h_;
    const Eigen::VectorXd& lo_;
    const Eigen::VectorXd& hi_;
    Eigen::Index dim_;
};

// Exact decision of one disjunct over an affine region. Returns a witness
// confirmed by exact forward evaluation, or nothing when infeasible.
std::optional<Eigen::VectorXd> decide_affine_disjunct(
    const Network& net, const Box& box, const OutputCondition& condition,
    const AffineMap& map, const Conjunction& conj, const Eigen::VectorXd& lo,
    const Eigen::VectorXd& hi)
{
    const auto rows = static_cast<Eigen::Index>(conj.size());
    Eigen::MatrixXd G(rows, map.A.cols());
    Eigen::VectorXd h(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const LinearInequality& ineq = conj[static_cast<std::size_t>(i)];
        G.row(i) = ineq.coeffs.transpose() * map.A;
        h[i] = ineq.decision_rhs() - ineq.coeffs.dot(map.c);
    }

    PolytopeDecider decider(G, h, lo, hi);
    for (const Eigen::VectorXd& x : decider.feasible_points()) {
        // The candidate came from the composed affine map; accept it only if
        // the real network agrees.
        if (condition.satisfied(net.forward(x), 0.0))
            return x;
    }
    return std::nullopt;
}

struct SplitChoice {
    bool found = false;
    std::size_t dim = 0;
};

// The spec's branching rule: take the unstable ReLU with the widest
// pre-activation interval and bisect the input dimension with the largest
// width x accumulated-weight-magnitude influence on it.
SplitChoice choose_split(const Network& net, const Box& box,
                         const std::vector<LayerBounds>& bounds,
                         const std::vector<Eigen::MatrixXd>& abs_weight_prefix)
{
    double widest = -1.0;
    std::size_t layer = 0;
    Eigen::Index neuron = 0;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        if (net.layers()[l].activation != Activation::ReLU)
            continue;
        for (Eigen::Index k = 0; k < bounds[l].pre_lo.size(); ++k) {
            if (bounds[l].pre_lo[k] < 0.0 && bounds[l].pre_hi[k] > 0.0) {
                const double width = bounds[l].pre_hi[k] - bounds[l].pre_lo[k];
                if (width > widest) {
                    widest = width;
                    layer = l;
                    neuron = k;
                }
            }
        }
    }
    if (widest < 0.0)
        return {};

    SplitChoice choice;
    double best = -1.0;
    for (std::size_t d = 0; d < box.dimension(); ++d) {
        const double width = box.dim(d).width();
        if (width <= kMinSplitWidth)
            continue;
        const double score =
            width * abs_weight_prefix[layer](neuron, static_cast<Eigen::Index>(d));
        if (score > best) {
            best = score;
            choice.found = true;
            choice.dim = d;
        }
    }
    return choice;
}

std::vector<Eigen::MatrixXd> abs_weight_prefixes(const Network& net)
{
    std::vector<Eigen::MatrixXd> prefix;
    prefix.reserve(net.num_layers());
    Eigen::MatrixXd acc;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const Eigen::MatrixXd abs_w = net.layers()[l].weights.cwiseAbs();
        acc = l == 0 ? abs_w : Eigen::MatrixXd(abs_w * acc);
        prefix.push_back(acc);
    }
    return prefix;
}

} // namespace

std::string to_string(Status s)
{
    switch (s) {
    case Status::Sat:
        return "sat";
    case Status::Unsat:
        return "unsat";
    case Status::Unknown:
        return "unknown";
    }
    return "unknown";
}

bool OutputCondition::satisfied(const Eigen::VectorXd& y, double slack) const
{
    for (const Conjunction& conj : dnf) {
        bool all = true;
        for (const LinearInequality& ineq : conj) {
            if (ineq.coeffs.dot(y) > ineq.decision_rhs() + slack) {
                all = false;
                break;
            }
        }
        if (all)
            return true;
    }
    return false;
}

namespace {

OutputCondition comparison_condition(std::size_t k, std::size_t m, double sign,
                                     bool negated)
{
    if (k >= m)
        throw Error("output index out of range");
    OutputCondition cond;
    if (!negated) {
        Conjunction conj;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == k)
                continue;
            Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
            coeffs[static_cast<Eigen::Index>(k)] = sign;
            coeffs[static_cast<Eigen::Index>(j)] = -sign;
            conj.push_back({std::move(coeffs), 0.0, Relation::LessEq});
        }
        cond.dnf.push_back(std::move(conj));
    } else {
        for (std::size_t j = 0; j < m; ++j) {
            if (j == k)
                continue;
            Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
            coeffs[static_cast<Eigen::Index>(j)] = sign;
            coeffs[static_cast<Eigen::Index>(k)] = -sign;
            cond.dnf.push_back({{std::move(coeffs), 0.0, Relation::Less}});
        }
    }
    return cond;
}

} // namespace

OutputCondition OutputCondition::output_minimal(std::size_t k, std::size_t m)
{
    return comparison_condition(k, m, 1.0, false);
}

OutputCondition OutputCondition::output_not_minimal(std::size_t k, std::size_t m)
{
    return comparison_condition(k, m, 1.0, true);
}

OutputCondition OutputCondition::output_maximal(std::size_t k, std::size_t m)
{
    return comparison_condition(k, m, -1.0, false);
}

OutputCondition OutputCondition::output_not_maximal(std::size_t k, std::size_t m)
{
    return comparison_condition(k, m, -1.0, true);
}

std::vector<LayerBounds> ibp_bounds(const Network& net, const Box& box)
{
    if (box.dimension() != net.input_dim())
        throw Error("ibp_bounds: box dimension does not match network input_dim");

    Eigen::VectorXd lo = box_lo(box);
    Eigen::VectorXd hi = box_hi(box);

    std::vector<LayerBounds> bounds;
    bounds.reserve(net.num_layers());
    for (const Layer& layer : net.layers()) {
        const Eigen::MatrixXd pos = layer.weights.cwiseMax(0.0);
        const Eigen::MatrixXd neg = layer.weights.cwiseMin(0.0);
        LayerBounds lb;
        lb.pre_lo = pos * lo + neg * hi + layer.biases;
        lb.pre_hi = pos * hi + neg * lo + layer.biases;
        if (layer.activation == Activation::ReLU) {
            lb.post_lo = lb.pre_lo.cwiseMax(0.0);
            lb.post_hi = lb.pre_hi.cwiseMax(0.0);
        } else {
            lb.post_lo = lb.pre_lo;
            lb.post_hi = lb.pre_hi;
        }
        lo = lb.post_lo;
        hi = lb.post_hi;
        bounds.push_back(std::move(lb));
    }
    return bounds;
}

bool check_witness(const Network& net, const Box& box,
                   const OutputCondition& condition,
                   const Eigen::VectorXd& witness, double slack)
{
    if (static_cast<std::size_t>(witness.size()) != box.dimension())
        return false;
    std::vector<double> point(witness.data(), witness.data() + witness.size());
    if (!contains(box, point))
        return false;
    return condition.satisfied(net.forward(witness), slack);
}

Verdict complete_verify(const VerificationQuery& q)
{
    validate_query(q);
    const Network& net = *q.network;
    const auto start = Clock::now();
    const auto prefixes = abs_weight_prefixes(net);

    Verdict verdict;
    verdict.backend = "builtin";

    std::vector<Box> stack{q.box};
    while (!stack.empty()) {
        if (q.timeout_s > 0.0 && seconds_since(start) > q.timeout_s) {
            verdict.status = Status::Unknown;
            verdict.stats.time_s = seconds_since(start);
            return verdict;
        }

        Box node = std::move(stack.back());
        stack.pop_back();
        ++verdict.stats.nodes;

        // Cheap SAT probe at the node center before any bound work.
        Eigen::VectorXd mid(static_cast<Eigen::Index>(node.dimension()));
        for (std::size_t d = 0; d < node.dimension(); ++d)
            mid[static_cast<Eigen::Index>(d)] = node.dim(d).midpoint();
        if (q.condition.satisfied(net.forward(mid), 0.0)) {
            verdict.status = Status::Sat;
            verdict.witness = mid;
            verdict.stats.time_s = seconds_since(start);
            return verdict;
        }

        const auto bounds = ibp_bounds(net, node);
        const Eigen::VectorXd& out_lo = bounds.back().post_lo;
        const Eigen::VectorXd& out_hi = bounds.back().post_hi;

        std::vector<const Conjunction*> open;
        for (const Conjunction& conj : q.condition.dnf)
            if (disjunct_possible(conj, out_lo, out_hi))
                open.push_back(&conj);
        if (open.empty())
            continue; // node proved safe by interval bounds

        const SplitChoice split = choose_split(net, node, bounds, prefixes);
        const bool any_unstable = [&] {
            for (std::size_t l = 0; l < net.num_layers(); ++l) {
                if (net.layers()[l].activation != Activation::ReLU)
                    continue;
                for (Eigen::Index k = 0; k < bounds[l].pre_lo.size(); ++k)
                    if (bounds[l].pre_lo[k] < 0.0 && bounds[l].pre_hi[k] > 0.0)
                        return true;
            }
            return false;
        }();

        if (!any_unstable) {
            // Affine region: decide each surviving disjunct exactly.
            const AffineMap map = compose_affine(net, bounds);
            const Eigen::VectorXd lo = box_lo(node);
            const Eigen::VectorXd hi = box_hi(node);
            for (const Conjunction* conj : open) {
                auto witness = decide_affine_disjunct(net, node, q.condition, map,
                                                      *conj, lo, hi);
                if (witness) {
                    verdict.status = Status::Sat;
                    verdict.witness = std::move(*witness);
                    verdict.stats.time_s = seconds_since(start);
                    return verdict;
                }
            }
            continue; // all disjuncts infeasible on this node
        }

        if (!split.found) {
            // Box too narrow to bisect: the center probe above was the
            // decision; record the fallback and move on.
            ++verdict.stats.width_limited;
            continue;
        }

        const Interval& iv = node.dim(split.dim);
        const double cut = iv.midpoint();
        if (!(iv.lo < cut && cut < iv.hi)) {
            // Midpoint collapsed onto an endpoint; no representable progress.
            ++verdict.stats.width_limited;
            continue;
        }
        std::vector<Interval> lower_dims = node.dims();
        std::vector<Interval> upper_dims = node.dims();
        lower_dims[split.dim] = Interval(iv.lo, cut);
        upper_dims[split.dim] = Interval(cut, iv.hi);
        stack.emplace_back(std::move(upper_dims), node.id());
        stack.emplace_back(std::move(lower_dims), node.id());
        ++verdict.stats.splits;
    }

    verdict.status = Status::Unsat;
    verdict.stats.time_s = seconds_since(start);
    return verdict;
}

Verdict falsify_sample(const VerificationQuery& q, std::size_t samples,
                       std::uint64_t seed)
{
    validate_query(q);
    const Network& net = *q.network;
    const auto start = Clock::now();

    Verdict verdict;
    verdict.backend = "sampler";

    std::mt19937_64 rng(seed);
    Eigen::VectorXd x(static_cast<Eigen::Index>(q.box.dimension()));
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t d = 0; d < q.box.dimension(); ++d) {
            const Interval& iv = q.box.dim(d);
            if (iv.width() == 0.0) {
                x[static_cast<Eigen::Index>(d)] = iv.lo;
            } else {
                std::uniform_real_distribution<double> dist(iv.lo, iv.hi);
                x[static_cast<Eigen::Index>(d)] = dist(rng);
            }
        }
        if (q.condition.satisfied(net.forward(x), 0.0)) {
            verdict.status = Status::Sat;
            verdict.witness = x;
            verdict.stats.nodes = s + 1;
            verdict.stats.time_s = seconds_since(start);
            return verdict;
        }
    }
    verdict.status = Status::Unknown;
    verdict.stats.nodes = samples;
    verdict.stats.time_s = seconds_since(start);
    return verdict;
}

} // namespace nsv
