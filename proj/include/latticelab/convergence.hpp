#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latticelab/family.hpp"

namespace latticelab {

struct CheckOptions {
  double tolerance = 1e-9;
  /// Members examined: min(family horizon, horizon).
  std::uint64_t horizon = 10000;
  /// Convergence is judged on members n >= floor(settle_fraction * H) + 1.
  double settle_fraction = 0.5;
  /// Space for order-boundedness; default bounded on metric carriers, linf on index sets.
  std::optional<SpaceTag> tag;
  std::uint64_t seed = 0;
};

enum class Mode { Order, Uo, Buo, BuoCauchy };
enum class Outcome { Holds, Fails, Inconclusive };

std::string to_string(Mode m);
std::string to_string(Outcome o);

/// Regulator z at checkpoints m: z_m = sup_{m <= n <= H} |x_n - x|, with
/// the supremum over tail coordinates kept separately as a scalar.
struct OrderCertificate {
  std::vector<std::uint64_t> thresholds;  // increasing checkpoints N_m
  std::vector<LatticeElement> regulators;  // z at each checkpoint, pointwise decreasing
  std::vector<double> tail_bounds;         // index sets only
  std::uint64_t settle = 1;
  std::uint64_t horizon = 0;
  double tolerance = 0.0;
};

/// eps_m = 2 sup_{n >= m} ||x_n - limit||_inf from declared uniform norms.
/// eps has length L; eps_m = eps[L-1] for m > L.
struct UniformCauchyCertificate {
  std::vector<double> eps;
  std::optional<std::uint64_t> stationary_from;
  std::uint64_t settle = 1;
  double tolerance = 0.0;

  double at(std::uint64_t m) const;
};

/// Monotone coordinates dominated by a bound in the tag: every subsequence
/// difference is dominated by 2 * bound and tends to 0 coordinatewise.
struct MonotoneBoundCertificate {
  Monotonicity direction = Monotonicity::None;
  LatticeElement bound;
  SpaceTag tag;
  std::string membership_reason;
};

/// Coordinate that does not settle: coordinate 0 denotes the tail beyond
/// the stored prefix.
struct StuckCoordinate {
  std::uint64_t coordinate = 0;
  double value = 0.0;
  std::uint64_t member = 0;  // a member n >= settle attaining value
  std::string probe;         // uo probe name, empty otherwise
};

struct SubsequenceFailure {
  std::vector<std::uint64_t> subsequence;
  std::size_t position = 0;  // k: the difference x_{n_{k+1}} - x_{n_k}, 0-based
  std::uint64_t coordinate = 0;
  double magnitude = 0.0;
  bool positional = false;  // judged on trailing half (never reached the settle index)
};

struct SampledReport {
  std::size_t count = 0;
  std::size_t max_len = 0;
  std::uint64_t seed = 0;
  std::size_t evaluated = 0;
  std::size_t included = 0;
  std::uint64_t settle = 1;
};

struct ConvergenceVerdict {
  Mode mode = Mode::Order;
  Outcome outcome = Outcome::Inconclusive;
  bool positive = false;  // inconclusive-positive: sampled search found nothing
  std::string summary;
  double tolerance = 0.0;
  std::uint64_t horizon = 0;
  std::uint64_t settle = 1;
  std::uint64_t seed = 0;
  std::optional<SpaceTag> tag;
  std::optional<LatticeElement> limit;
  std::optional<LatticeElement> dominator;
  std::optional<double> bound_M;
  std::optional<OrderCertificate> order_certificate;
  std::optional<UniformCauchyCertificate> uniform_certificate;
  std::optional<MonotoneBoundCertificate> monotone_certificate;
  std::optional<StuckCoordinate> stuck;
  std::optional<SubsequenceFailure> failure;
  std::optional<SampledReport> sampled;
  std::vector<std::string> notes;
  std::vector<ConvergenceVerdict> parts;
};

struct LimitReport {
  std::optional<LatticeElement> limit;
  std::optional<StuckCoordinate> divergence;  // value = oscillation over the window
  std::uint64_t window_first = 1;
  std::uint64_t window_last = 1;
  std::vector<std::string> notes;
};

LimitReport pointwise_limit(const SequenceFamily& family, const CheckOptions& opts = {});

struct DominatorReport {
  LatticeElement element;
  std::optional<std::string> warning;
  bool unbounded_growth = false;
  std::uint64_t horizon = 0;
};

DominatorReport dominating_element(const SequenceFamily& family, const CheckOptions& opts = {});

ConvergenceVerdict check_order_convergence(const SequenceFamily& family, const LatticeElement& candidate,
                                           const CheckOptions& opts = {});
ConvergenceVerdict check_uo_convergence(const SequenceFamily& family, const LatticeElement& candidate,
                                        const CheckOptions& opts = {});
ConvergenceVerdict check_buo_convergence(const SequenceFamily& family, const LatticeElement& candidate,
                                         const CheckOptions& opts = {});

/// Replays every stored inequality of an order certificate. Returns the
/// first failing member, or nothing when the certificate holds.
std::optional<std::uint64_t> replay_order_certificate(const SequenceFamily& family, const LatticeElement& candidate,
                                                      const OrderCertificate& cert);
/// Checks |x_{n+1} - x_n| <= eps_m for n >= m over consecutive members up
/// to the certificate's verified range. Returns the first failing n.
std::optional<std::uint64_t> replay_uniform_certificate(const SequenceFamily& family,
                                                        const UniformCauchyCertificate& cert,
                                                        std::uint64_t upto);

struct EquivalenceReport {
  ConvergenceVerdict order;
  ConvergenceVerdict buo;
  bool equal = false;
  LatticeElement w;  // (|x| - y)^+
};

/// Runs both checks independently. Throws InvariantError when they disagree.
EquivalenceReport buo_equals_order(const SequenceFamily& family, const LatticeElement& candidate,
                                   const CheckOptions& opts = {});

struct BuoCauchyPolicy {
  enum class Kind { Certificate, Sampled };
  Kind kind = Kind::Certificate;
  std::size_t count = 64;
  std::size_t max_len = 32;
  /// Subsequences evaluated before the sampled ones (sampled mode only).
  std::vector<std::vector<std::uint64_t>> include;

  static BuoCauchyPolicy certificate() { return {}; }
  static BuoCauchyPolicy sampled(std::size_t count = 64, std::size_t max_len = 32) {
    return {Kind::Sampled, count, max_len, {}};
  }
  /// "certificate", "sampled" or "sampled:count=N,max_len=L".
  static BuoCauchyPolicy parse(std::string_view text);
};

ConvergenceVerdict check_buo_cauchy(const SequenceFamily& family, const BuoCauchyPolicy& policy,
                                    const CheckOptions& opts = {});

/// The subsequences sampled mode evaluates after the included ones.
std::vector<std::vector<std::uint64_t>> sample_subsequences(std::uint64_t horizon, std::uint64_t settle,
                                                            std::size_t count, std::size_t max_len,
                                                            std::uint64_t seed);

struct NormBoundReport {
  double M = 0.0;
  std::string norm;
  std::uint64_t horizon = 0;
  std::uint64_t argmax = 1;
  bool declared_unbounded = false;
  std::optional<double> declared_supremum;
  /// Greedy n_1 < n_2 < ... with ||x_{n_{k+1}}|| >= ||x_{n_k}|| + (k+1).
  std::vector<std::uint64_t> gap_subsequence;
};

/// norm is linf or lp; throws InputError on undecidable tails.
NormBoundReport norm_bound(const SequenceFamily& family, const SpaceTag& norm, const CheckOptions& opts = {});

/// Effective horizon and settle index for a family under opts.
std::uint64_t effective_horizon(const SequenceFamily& family, const CheckOptions& opts);
std::uint64_t settle_index(std::uint64_t horizon, double settle_fraction);

/// sup |x| over all coordinates, with a coordinate attaining it (1-based).
std::pair<double, std::uint64_t> sup_with_argmax(const LatticeElement& x);

}  // namespace latticelab
