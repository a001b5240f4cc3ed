// Nested dyadic intervals J_1 ⊃ J_2 ⊃ ... avoiding the dangerous sets.
//
// J_n = [W_n, W_n + 2^-l_n] lies on the grid of level l_n. Step n picks the
// first grid cell of J_{n-1} that
//   (i)  misses every cover at level l_n for k in (k_{n-1}, k_n], and
//   (ii) keeps at least half its length outside the covers at level
//        l_{n+1} for k in (k_n, k_{n+1}].
// Step 1 scans [(1 + 2^-6) eta, 2 eta] instead, with k in [1, k_1] for (i).

#ifndef FRACPOW_SCHLAG_HPP
#define FRACPOW_SCHLAG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracpow/danger.hpp"

namespace fracpow {

struct RunOptions {
  bool strict = true;
  bool census = false;
  std::optional<std::uint64_t> census_cap;  // stop counting admissible cells here
  unsigned threads = 0;                     // 0: hardware concurrency
};

/// Half-open k-range (lo, hi].
struct KRange {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  bool empty() const { return hi <= lo; }
  friend bool operator==(const KRange&, const KRange&) = default;
};

struct StepRecord {
  std::uint64_t n = 0;
  std::int64_t level = 0;  // l_n
  mpz_class w;             // W_n = w / 2^level
  KRange checked;          // condition (i) range at level l_n
  KRange lookahead;        // condition (ii) range at level lookahead_level
  std::int64_t lookahead_level = 0;
  mpz_class cells_inspected;
  mpz_class admissible_count;  // 1 unless census mode
  bool census = false;
  bool census_complete = false;
  RealInterval covered_measure;  // of J_n by the look-ahead covers
  bool covered_exact = true;
  std::optional<RealInterval> lemma1_max_ratio;  // steps n >= 2
  bool cover_ratio_certified = true;             // lambda(cover) <= 4 lambda(A)
  std::vector<std::string> warnings;

  DyadicRational W() const { return DyadicRational::on_grid(w, level); }
  DyadicWindow interval() const { return DyadicWindow::cell(w, level); }
};

struct Chain {
  ConstructionParams params;
  bool strict = true;
  std::vector<StepRecord> steps;
  RealInterval xi_enclosure;
  RealInterval epsilon_enclosure;
  DyadicRational epsilon_representative;  // ln(1 + eps) lies in J_N
  DyadicRational guarantee;  // lower bound on the distance for every k <= k_max
  std::uint64_t k_max = 0;
};

/// 2^-l_1 < 2 psi / (h ceil(e^(2 eta h))) <= 2^(1 - l_1), or the override.
std::int64_t compute_l1(const ConstructionParams& params);

/// ceil(log2(4 k exp(anchor k) / psi)).
std::int64_t level_from_anchor(const DyadicRational& anchor, std::uint64_t k,
                               const ConstructionParams& params);

/// l_n (n >= 2), anchored at W_1 + 2^-l_1 for n = 2 and at
/// W_{n-2} + 2^-l_{n-2} afterwards; only the anchor step must be recorded.
/// With psi = 0 there is no danger to resolve and l_n = l_1 + 2t (n - 1).
std::int64_t compute_ln(std::uint64_t n, const std::vector<StepRecord>& steps,
                        const ConstructionParams& params);

/// Empty when 2t <= next - prev <= 2h, otherwise a description of the breach.
std::optional<std::string> check_level_gap(std::int64_t prev, std::int64_t next,
                                           const ConstructionParams& params);

struct SurvivorMeasure {
  DyadicRational window_length;
  DyadicRational covered_lo;  // exact union of the enumerated covers
  DyadicRational covered_hi;  // plus bounds for k with too many candidates
  bool exact = true;
  // Surviving runs [start, end) in units of 2^-level; filled only when exact.
  std::vector<std::pair<mpz_class, mpz_class>> runs;
  mpz_class candidates;

  DyadicRational survivor_lo() const { return window_length - covered_hi; }
  bool at_least_half() const { return covered_hi.ldexp(1) <= window_length; }
};

/// Measure of J outside the level-l covers for k in (range.lo, range.hi].
/// J must lie on the level-l grid.
SurvivorMeasure survivor_measure(const DyadicWindow& J, KRange range, std::int64_t level,
                                 const ConstructionParams& params, unsigned threads = 1);

/// Enclosure of max over k in [k_first, k_last] of lambda(J ∩ Â_k) / lambda(J).
RealInterval max_cover_ratio(const DyadicWindow& J, std::uint64_t k_first, std::uint64_t k_last,
                             std::int64_t level, const ConstructionParams& params,
                             unsigned threads = 1);

/// Sufficient test for lambda(Â) <= 4 lambda(A) for every k <= k_max and
/// every m with A(k, m) meeting J: k m <= 3 psi 2^level at the largest such
/// k and m.
bool cover_ratio_certified(const DyadicWindow& J, std::uint64_t k_max, std::int64_t level,
                           const ConstructionParams& params);

/// The first level-l cover meeting the closed cell for some k in the range.
std::optional<DyadicCover> cell_obstruction(const mpz_class& w, std::int64_t level, KRange range,
                                            const ConstructionParams& params, unsigned threads = 1);

StepRecord initial_step(const ConstructionParams& params, const RunOptions& options = {});
StepRecord inductive_step(const ConstructionParams& params, const std::vector<StepRecord>& steps,
                          std::uint64_t n, const RunOptions& options = {});

/// Lower bound on |scale (1 + eps)^k + shift_k - m| for eps with
/// ln(1 + eps) outside every A(k, m), k <= k_max.
DyadicRational distance_guarantee(const ConstructionParams& params, std::uint64_t k_max);

/// Runs N steps and attaches the eps enclosure and representative.
Chain run_construction(const ConstructionParams& params, std::uint64_t steps,
                       const RunOptions& options = {});

}  // namespace fracpow

#endif  // FRACPOW_SCHLAG_HPP
