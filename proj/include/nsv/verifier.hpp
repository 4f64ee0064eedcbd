#ifndef NSV_VERIFIER_HPP
#define NSV_VERIFIER_HPP

#include "nsv/geometry.hpp"
#include "nsv/network.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nsv {

// Strict inequalities are decided as coeffs.y <= rhs - kStrictMargin so the
// floating-point procedure keeps a margin; witness validation is looser
// (kWitnessSlack). Conditions should be chosen away from these margins.
inline constexpr double kStrictMargin = 1e-9;
inline constexpr double kWitnessSlack = 1e-6;

// Input boxes narrower than this are not bisected further; such nodes are
// decided by center-point evaluation and counted in SearchStats.
inline constexpr double kMinSplitWidth = 1e-7;

enum class Relation { LessEq, Less };

// coeffs . y <= rhs   (or strict).
struct LinearInequality {
    Eigen::VectorXd coeffs;
    double rhs = 0.0;
    Relation relation = Relation::LessEq;

    // rhs shifted by the strict margin; the value the decision procedure uses.
    double decision_rhs() const
    {
        return relation == Relation::Less ? rhs - kStrictMargin : rhs;
    }
};

using Conjunction = std::vector<LinearInequality>;

// Unsafe output condition in disjunctive normal form: satisfied when any
// conjunction holds. SAT means an input in the box triggers the condition.
struct OutputCondition {
    std::vector<Conjunction> dnf;

    // True iff some disjunct holds at y under decision semantics, with every
    // rhs relaxed by `slack` (0 = decision check, kWitnessSlack = validation).
    bool satisfied(const Eigen::VectorXd& y, double slack = 0.0) const;

    // ACAS Xu style sugar over m outputs: "output k is minimal" is the
    // conjunction of y_k <= y_j for all j != k; "not minimal" the disjunction
    // of the strict reversals. Maximal variants mirror these.
    static OutputCondition output_minimal(std::size_t k, std::size_t m);
    static OutputCondition output_not_minimal(std::size_t k, std::size_t m);
    static OutputCondition output_maximal(std::size_t k, std::size_t m);
    static OutputCondition output_not_maximal(std::size_t k, std::size_t m);
};

enum class BackendKind { Builtin, Sampler, External };

struct VerificationQuery {
    const Network* network = nullptr;
    Box box{{Interval(0.0, 0.0)}};
    OutputCondition condition;
    double timeout_s = 60.0;
};

enum class Status { Sat, Unsat, Unknown };

std::string to_string(Status s);

struct SearchStats {
    std::size_t nodes = 0;
    std::size_t splits = 0;
    std::size_t width_limited = 0; // nodes decided by the min-width fallback
    double time_s = 0.0;
};

struct Verdict {
    Status status = Status::Unknown;
    std::optional<Eigen::VectorXd> witness;
    SearchStats stats;
    std::string backend;
};

// Interval bounds of one layer: pre-activation and post-activation.
struct LayerBounds {
    Eigen::VectorXd pre_lo, pre_hi;
    Eigen::VectorXd post_lo, post_hi;
};

// Sound interval propagation through every layer: all activations reachable
// from the box lie inside the returned intervals.
std::vector<LayerBounds> ibp_bounds(const Network& net, const Box& box);

// Witness validation: in-box and condition satisfied by exact forward
// evaluation within `slack` absolute.
bool check_witness(const Network& net, const Box& box,
                   const OutputCondition& condition,
                   const Eigen::VectorXd& witness,
                   double slack = kWitnessSlack);

// Complete branch-and-bound decision of the box/condition problem: IBP
// pruning, exact affine decision once every ReLU phase is fixed on the node,
// input-box bisection otherwise. UNKNOWN only on timeout.
Verdict complete_verify(const VerificationQuery& query);

// Seeded uniform sampling falsifier: SAT with witness on the first hit,
// otherwise UNKNOWN. Never UNSAT.
Verdict falsify_sample(const VerificationQuery& query, std::size_t samples,
                       std::uint64_t seed);

// External complete backend reached through the file protocol:
// query JSON in, `<exe> <query.json> <verdict.json>`, verdict JSON out.
struct ExternalAdapterConfig {
    std::filesystem::path executable;
    // Scratch directory for query/verdict/network files; a fresh temporary
    // directory is created (and removed) when empty.
    std::filesystem::path work_dir;
};

// Runs the adapter and re-checks any witness locally before accepting it;
// protocol violations raise ProtocolError, process failures nsv::Error.
Verdict external_verify(const VerificationQuery& query,
                        const ExternalAdapterConfig& adapter);

} // namespace nsv

#endif
