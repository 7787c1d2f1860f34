#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "latticelab/lattice.hpp"

namespace latticelab {

enum class Monotonicity { None, Decreasing, Increasing };
enum class NormGrowth { Undeclared, Bounded, Unbounded };

std::string to_string(Monotonicity m);
std::string to_string(NormGrowth g);

/// Declared uniform approach to a limit: ||x_n - limit||_inf <= r[n-1] for
/// n <= r.size(), <= tail_bound for r.size() < n < stationary_from, and
/// x_n == limit from stationary_from on.
struct UniformNorms {
  LatticeElement limit;
  std::vector<double> r;
  double tail_bound = 0.0;
  std::optional<std::uint64_t> stationary_from;
};

struct FamilyMetadata {
  Monotonicity monotone = Monotonicity::None;
  std::optional<LatticeElement> common_bound;  // |x_n| <= bound for every n
  std::optional<UniformNorms> uniform;
  NormGrowth norm_growth = NormGrowth::Undeclared;
  std::optional<double> norm_supremum;  // declared sup_n ||x_n||_inf
  std::optional<TailDescriptor> limit_tail;
  std::optional<TailDescriptor> dominator_tail;
  /// How many members the construction-time verification covers; 0 means
  /// min(horizon, 10^4) consecutive members plus a logarithmic sample.
  std::uint64_t verify_limit = 0;
};

/// An ordered family x_1, x_2, ... of elements on one carrier, either a
/// stored list or a closed-form generator evaluated on demand.
///
/// Declared metadata is verified when the family is built; a declaration
/// that the available members contradict raises InputError.
class SequenceFamily {
 public:
  using Generator = std::function<LatticeElement(std::uint64_t)>;

  static SequenceFamily extensional(std::vector<LatticeElement> members, FamilyMetadata meta = {},
                                    std::string name = "extensional");
  /// `params` is recorded verbatim so the family can be serialised and rebuilt.
  static SequenceFamily generator(std::string name, Carrier carrier, Generator gen, std::uint64_t horizon,
                                  FamilyMetadata meta = {}, nlohmann::ordered_json params = nlohmann::ordered_json::object(),
                                  bool memoize = false);

  bool is_generator() const { return static_cast<bool>(gen_); }
  const std::string& name() const { return name_; }
  const Carrier& carrier() const { return carrier_; }
  std::uint64_t horizon() const { return horizon_; }
  const FamilyMetadata& metadata() const { return meta_; }
  const nlohmann::ordered_json& params() const { return params_; }
  /// Members actually checked against the metadata at construction.
  const std::vector<std::uint64_t>& verified_indices() const { return verified_; }

  /// 1-based; throws InputError outside [1, horizon].
  LatticeElement member(std::uint64_t n) const;

  /// Same generator with a different horizon (metadata re-verified).
  SequenceFamily with_horizon(std::uint64_t horizon) const;

 private:
  SequenceFamily() = default;
  void verify();

  std::string name_;
  Carrier carrier_ = Carrier::index_set(1);
  std::vector<LatticeElement> members_;
  Generator gen_;
  std::uint64_t horizon_ = 0;
  FamilyMetadata meta_;
  nlohmann::ordered_json params_ = nlohmann::ordered_json::object();
  std::vector<std::uint64_t> verified_;
  struct Memo;
  std::shared_ptr<Memo> memo_;
};

/// True when a(j) <= b(j) for every j > from - 1 covered by both tails, as
/// provable from the descriptors alone.
bool tail_le(const TailDescriptor& a, const TailDescriptor& b, std::uint64_t from);

// Named closed-form families.

/// x_n(j) = j^(-exponent) for j <= n, 0 beyond; prefix of `prefix` stored
/// coordinates, the rest exact through the tail. Limit tail Power(exponent).
SequenceFamily harmonic_truncation(double exponent, std::size_t prefix, std::uint64_t horizon);
/// x_n(k) = height for k <= n, 0 beyond.
SequenceFamily step_family(double height, std::size_t prefix, std::uint64_t horizon);
/// x_n = (1/n) * 1.
SequenceFamily reciprocal_family(std::size_t size, std::uint64_t horizon);
/// x_n = (-1)^n * 1.
SequenceFamily alternating_family(std::size_t size, std::uint64_t horizon);
/// x_n = n * e_n (declared unbounded growth).
SequenceFamily scaled_unit_family(std::size_t size, std::uint64_t horizon);
/// x_n = (1 - 1/n) * 1, declared supremum 1.
SequenceFamily affine_approach_family(std::size_t size, std::uint64_t horizon);
/// x_n = c_n * 1 with c_n = n(n+1)/2, so ||x_{n+1}|| = ||x_n|| + (n+1).
SequenceFamily gap_norm_family(std::size_t size, std::uint64_t horizon);
/// x_n = x for every n.
SequenceFamily constant_family(const LatticeElement& x, std::uint64_t horizon);

}  // namespace latticelab
