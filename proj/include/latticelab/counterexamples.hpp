#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "latticelab/convergence.hpp"
#include "latticelab/envelopes.hpp"
#include "latticelab/trend.hpp"

namespace latticelab {

enum class RefinementKind { CaseA, CaseB };

std::string to_string(RefinementKind k);
/// "A"/"caseA"/"case-a" and the B equivalents.
RefinementKind parse_refinement_kind(std::string_view text);

/// One level X_N of a refinement family.
///
/// CaseA: a space with a designated accumulating point x0. CaseB: N pairs
/// (a_n, b_n) with d(a_n, b_n) < 1/n, the finite Case-B model.
struct RefinementLevel {
  RefinementKind kind = RefinementKind::CaseA;
  std::uint64_t N = 0;
  std::shared_ptr<const FiniteMetricSpace> space;
  std::size_t x0 = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  /// Distance at which the limit object escapes: d(x0) for CaseA, the
  /// smallest pair gap for CaseB.
  double escape_scale = 0.0;
  /// Uniform discreteness constant of the whole space.
  double delta = 0.0;
  std::string model;  // "line {0} u {scale/k}", "finite Case-B model", "user metric"
};

struct RefinementParams {
  double scale = 1.0;       // CaseA: points scale/k
  double separation = 2.0;  // CaseB: a_n = separation * n, must be >= 1 + 1/2
};

/// CaseA: {0} u {scale/k : k <= N} on the line. CaseB: a_n = separation*n,
/// b_n = a_n + 1/(n+1), each pair confirmed through find_close_pair against
/// the labels already used. Throws InputError for N < 2 or bad parameters.
RefinementLevel build_refinement(RefinementKind kind, std::uint64_t N, const RefinementParams& params = {});

/// CaseA level over a user-supplied space; x0 must not be isolated at the
/// minimum radius of a singleton.
RefinementLevel refinement_from_space(std::shared_ptr<const FiniteMetricSpace> space, std::string_view x0_label);

/// Levels in increasing N. Checks that the escape scale strictly decreases.
struct RefinementFamily {
  RefinementKind kind = RefinementKind::CaseA;
  std::vector<RefinementLevel> levels;
};

RefinementFamily build_refinement_family(RefinementKind kind, const std::vector<std::uint64_t>& Ns,
                                         const RefinementParams& params = {});

/// f_n(x) = (1 - n d(x, x0))^+ for n = 1..horizon. Metadata: decreasing,
/// bounded by 1, each member n-Lipschitz (checked on the verified members).
SequenceFamily hat_family(std::shared_ptr<const FiniteMetricSpace> space, std::string_view x0_label,
                          std::uint64_t horizon);
SequenceFamily hat_family(const RefinementLevel& level, std::uint64_t horizon);

/// y_n = x_1 meet ... meet x_n; declared decreasing, bounded by |x_1| join
/// the base family's common bound when present.
SequenceFamily running_meet_family(const SequenceFamily& base);

struct LipCounterexample {
  RefinementLevel level;
  std::vector<std::string> A;
  std::vector<std::string> b;
  std::vector<std::string> a_prime;  // nearest point of A to each b_n
  std::vector<double> t;             // dist(b_n, A), strictly decreasing, in (0, 1)
  std::vector<double> ratios;        // |g(b_n) - g(a'_n)| / d(b_n, a'_n)
  LatticeElement g;
  double lipschitz_g = 0.0;
  std::vector<EnvelopeResult> envelopes;  // n = 1..n_max
  std::uint64_t n_star = 0;               // g_n == g from here on
  SequenceFamily g_family;
  UniformCauchyCertificate certificate;
  std::string model;
};

/// g = sqrt(dist(., A)) meet 1 and its inf-convolutions. Every invariant is
/// checked before returning; a violation raises InvariantError.
LipCounterexample lip_counterexample(const RefinementLevel& level, std::size_t n_max = 20);

struct EscapeLevel {
  std::uint64_t N = 0;
  double escape_scale = 0.0;
  double delta = 0.0;
  double omega_at_escape = 0.0;  // hat: omega of the limit at the escape scale
  double omega_at_delta = 0.0;
  double lipschitz = 0.0;        // Lip of the limit (hat) or of g (lip)
  bool limit_reached = true;
};

struct EscapeReport {
  std::string kind;  // "hat", "lip" or "family"
  SpaceTag tag;
  std::vector<EscapeLevel> levels;
  std::optional<PowerLawFit> fit_escape;  // Lip vs escape scale
  std::optional<PowerLawFit> fit_delta;   // Lip vs delta
  bool diverges = false;
  std::string trend;
  std::vector<std::string> notes;
};

/// Hat families at every level: omega of the pointwise limit at the escape
/// scale and at delta, plus the Lipschitz trend of the limit.
EscapeReport verify_escape(const RefinementFamily& family, const SpaceTag& tag, const CheckOptions& opts = {});
/// Lipschitz constant of g across levels (at least 3), fitted against the
/// escape scale and against delta.
EscapeReport verify_escape(const std::vector<LipCounterexample>& levels, const SpaceTag& tag);
/// Single family: does the pointwise limit stay inside the tag?
EscapeReport verify_escape(const SequenceFamily& family, const SpaceTag& tag, const CheckOptions& opts = {});

}  // namespace latticelab
