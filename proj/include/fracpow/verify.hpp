// Independent checks of construction outputs.
//
// Distances are enclosed by incremental powering: x_{k+1} = x_k * base,
// re-seeded from the exact base every 4096 steps. The distance to the
// nearest integer of an enclosure is reported as [inf, sup] over the
// enclosure, so a positive lower end certifies the claim.

#ifndef FRACPOW_VERIFY_HPP
#define FRACPOW_VERIFY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracpow/cantor.hpp"
#include "fracpow/schlag.hpp"

namespace fracpow {

struct ScanResult {
  std::uint64_t K = 0;
  RealInterval min_dist;  // min over k <= K of ||xi base^k + shift_k||
  std::uint64_t argmin_k = 0;
  std::uint64_t escalations = 0;
  bool complete = true;  // false when some k stayed undecided
  std::optional<std::uint64_t> undecided_k;
};

struct ScanOptions {
  long fraction_bits = 64;  // bits kept below the binary point
  long max_bits = kDefaultMaxBits;
  unsigned threads = 1;
};

/// ||y||: enclosure [inf, sup] of the distance to the nearest integer over y.
RealInterval distance_to_integer(const RealInterval& y);

/// Scans k = 1..K. `base` yields enclosures of 1 + eps that tighten with
/// precision (a fixed enclosure is allowed; escalation then stops early).
ScanResult min_distance_scan(const Refiner& base, const mpq_class& xi, const std::vector<mpq_class>& shifts,
                             std::uint64_t K, const ScanOptions& options = {});
ScanResult min_distance_scan(const mpq_class& base, std::uint64_t K, const ScanOptions& options = {});

struct Verdict {
  bool accepted = true;
  std::string violation;  // short code of the first failed check, empty when accepted
  std::optional<std::string> first_violation;
  RealInterval margin;

  static Verdict reject(std::string code, std::string message) {
    Verdict v;
    v.accepted = false;
    v.violation = std::move(code);
    v.first_violation = std::move(message);
    return v;
  }
};

/// Threshold C eps / |ln eps|.
RealInterval theorem1_threshold(const mpq_class& epsilon, const mpq_class& C, Precision p = Precision(128));

/// Accepts iff min_{k <= K} ||(1 + eps)^k|| > C eps / |ln eps|; margin is
/// the ratio of the two.
Verdict check_theorem1_bound(const mpq_class& epsilon, std::uint64_t K,
                             const mpq_class& C = mpq_class(1, 1 << 17), const ScanOptions& options = {},
                             ScanResult* scan = nullptr);

/// Exact check of a_n <= {xi alpha^n} <= a_n + eps for n = 1..N over the
/// whole (dyadic) interval alpha. Margin is the smallest slack.
Verdict check_band_membership(const RealInterval& alpha, const mpq_class& xi, const BandSequence& bands,
                              const mpq_class& epsilon, std::uint64_t N);

/// First (k, m) with A(k, m) meeting the open interval of the cell, for k
/// in the range; uses exponentials of the window ends only.
struct DangerHit {
  std::uint64_t k;
  mpz_class m;
};
std::optional<DangerHit> find_danger_hit(const DyadicWindow& cell, KRange range, const ConstructionParams& params);

struct CertificateCheckOptions {
  bool scan_distance = true;
  unsigned threads = 1;
};

/// Re-derives every recorded step of a chain and re-scans the distances.
/// Violation codes: params, level_gap, schedule, grid, nested, condition_i,
/// condition_ii, lemma1, cover_ratio, epsilon, guarantee, distance.
Verdict verify_chain(const Chain& chain, const CertificateCheckOptions& options = {},
                     ScanResult* scan = nullptr);

}  // namespace fracpow

#endif  // FRACPOW_VERIFY_HPP
