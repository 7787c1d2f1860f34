#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "latticelab/convergence.hpp"

namespace latticelab {

/// Constants of the witness constructions. The jump construction needs
/// eps_factor > 2 (so eps_factor * eps - eps > eps); the block construction
/// needs block_mass - 2 * tail_budget > 1.
struct WitnessConstants {
  double eps_factor = 3.0;
  double tail_budget = 0.25;
  double block_mass = 2.0;

  /// "eps-factor=3,tail-budget=0.25,block-mass=2" (any subset, any order).
  static WitnessConstants parse(std::string_view text);
  /// Throws InputError when the constants break the estimates above.
  void validate() const;
};

/// One step of the jump construction: the finite sets E_n and F_n at the
/// current index, restricted to the usable coordinates (capped at 256 each).
struct JumpStep {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> e_set;
  std::vector<std::uint64_t> f_set;
  std::size_t e_size = 0;
  std::size_t f_size = 0;
  std::uint64_t chosen = 0;
};

struct JumpWitness {
  double eps = 0.0;
  double eps_factor = 3.0;
  std::vector<std::uint64_t> indices;      // n_1 < ... < n_{count+1}
  std::vector<std::uint64_t> coordinates;  // k_1 < ... < k_count
  std::vector<double> jump_values;         // x_{n_{i+1}}(k_i) - x_{n_i}(k_i)
  std::uint64_t horizon = 0;
  bool relabelled = true;
  std::string caveat;
  std::vector<JumpStep> log;

  std::size_t count() const { return coordinates.size(); }
};

struct BlockWitness {
  double p = 1.0;
  WitnessConstants constants;
  std::vector<std::uint64_t> indices;                           // n_1 < ... < n_{count+1}
  std::vector<std::pair<std::uint64_t, std::uint64_t>> blocks;  // [k_i, l_i)
  std::vector<double> block_norms;   // ||(x_{n_{i+1}} - x_{n_i}) 1_{I_i}||_p
  std::vector<double> limit_norms;   // ||x 1_{I_i}||_p
  std::uint64_t horizon = 0;

  std::size_t count() const { return blocks.size(); }
};

/// The horizon ran out before `count` items were found. Carries the
/// partial witness so callers can report it.
class HorizonExhausted : public std::runtime_error {
 public:
  HorizonExhausted(std::string what, std::vector<std::uint64_t> usable)
      : std::runtime_error(std::move(what)), usable_(std::move(usable)) {}
  const std::vector<std::uint64_t>& usable() const { return usable_; }
  std::optional<JumpWitness> partial_jump;
  std::optional<BlockWitness> partial_block;

 private:
  std::vector<std::uint64_t> usable_;
};

/// No coordinate of A has sup_n |x_n(k)| > eps_factor * eps on the horizon.
class DominatingConditionUnmet : public InputError {
 public:
  using InputError::InputError;
};

/// The pointwise limit lies in l_p, so no block witness can exist.
class LimitInLp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Greedy E_n/F_n construction; A lists 1-based coordinates (empty = every
/// stored coordinate). Smallest qualifying coordinate and index always win.
JumpWitness extract_big_jump_witness(const SequenceFamily& family, std::vector<std::uint64_t> A, double eps,
                                     std::size_t count, const WitnessConstants& constants = {},
                                     const CheckOptions& opts = {});

BlockWitness extract_lp_block_witness(const SequenceFamily& family, double p, std::size_t count,
                                      const WitnessConstants& constants = {}, const CheckOptions& opts = {});

struct ReplayResult {
  bool ok = true;
  std::size_t failing_index = 0;  // 0-based pair / block number
  std::string reason;
};

/// Re-evaluates every stored inequality against the family.
ReplayResult verify_jump_witness(const SequenceFamily& family, const JumpWitness& w);
ReplayResult verify_block_witness(const SequenceFamily& family, const BlockWitness& w);

struct RefutationCertificate {
  std::string kind;  // "jump" or "block"
  SpaceTag tag;
  std::size_t count = 0;
  /// jump: every dominator exceeds lower_bound on each listed coordinate.
  double lower_bound = 0.0;
  std::vector<std::uint64_t> coordinates;
  /// block: ||z||_p >= count^(1/p); witnessed_norm = (sum of block_norm^p)^(1/p).
  double norm_lower_bound = 0.0;
  double witnessed_norm = 0.0;
  std::string statement;
};

/// Structural re-verification first (InvariantError when malformed, InputError
/// when empty or the tag does not fit); with a family, also a full replay.
RefutationCertificate refute_order_boundedness(const JumpWitness& w, const SpaceTag& tag,
                                               const SequenceFamily* family = nullptr);
RefutationCertificate refute_order_boundedness(const BlockWitness& w, const SpaceTag& tag,
                                               const SequenceFamily* family = nullptr);

}  // namespace latticelab
