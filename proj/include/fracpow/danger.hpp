// The dangerous-set model.
//
// For a step size x = log(1 + eps), the interval A(k, m) collects the x for
// which (1 + eps)^k lands within roughly psi of the integer m:
//
//   A(k, m) = ( log(q)/k - psi/(k m), log(q)/k + psi/(k m) ),  q = (m - s_k)/a
//
// where a is the target scale and s_k the target shift (a = 1, s_k = 0 for
// the plain problem). The construction avoids, for every k, the union of
// these intervals over the integers m between floor(a e^(eta k) + s_k) and
// ceil(a e^(2 eta k) + s_k), replacing each A(k, m) by its shortest cover
// on the dyadic grid of the current step.

#ifndef FRACPOW_DANGER_HPP
#define FRACPOW_DANGER_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracpow/mpreal.hpp"

namespace fracpow {

enum class TargetMode { theorem1, theorem2 };

std::string to_string(TargetMode mode);
TargetMode parse_target_mode(const std::string& text);

struct ParamOverrides {
  std::optional<mpz_class> a_psi;        // default 2^14
  std::optional<long> h_const_log2;      // default 6, h = (t + c) 2^(t + c)
  std::optional<std::uint64_t> h;        // explicit block length
  std::optional<std::int64_t> first_level;
  bool zero_psi = false;                 // degenerate: no dangerous set at all
  TargetMode mode = TargetMode::theorem1;
  mpq_class scale = 1;
  std::vector<mpq_class> shifts;         // shifts[k - 1] applies to power k
  std::optional<mpq_class> scale_bound;  // M with |scale| <= M
  std::optional<std::uint64_t> lookahead_span;
  long max_bits = kDefaultMaxBits;
  std::size_t enumeration_limit = 64;
};

struct FeasibilityCheck {
  std::string name;
  std::string formula;
  bool passed = false;
  bool required = true;  // advisory checks do not affect feasibility
  std::string detail;
};

struct ConstructionParams {
  int t = 0;
  DyadicRational eta;
  mpz_class a_psi;
  long h_const_log2 = 6;
  std::uint64_t h = 0;
  bool h_overridden = false;
  bool psi_zero = false;
  RealInterval psi;  // 128-bit enclosure, used for bounds and reporting
  TargetMode mode = TargetMode::theorem1;
  mpq_class scale = 1;
  std::vector<mpq_class> shifts;  // reduced into [0, 1), trailing zeros dropped
  mpq_class scale_bound = 1;
  std::optional<std::uint64_t> lookahead_span;
  long max_bits = kDefaultMaxBits;
  std::size_t enumeration_limit = 64;
  std::int64_t first_level = 0;
  bool first_level_overridden = false;
  std::vector<FeasibilityCheck> feasibility;

  std::uint64_t k_at(std::uint64_t n) const { return h * n; }
  /// Upper end of the look-ahead block that follows k_n.
  std::uint64_t lookahead_end(std::uint64_t n) const {
    return lookahead_span ? k_at(n) + *lookahead_span : k_at(n + 1);
  }
  RealInterval psi_at(Precision p) const;
  const mpq_class& shift(std::uint64_t k) const;
  bool unit_targets() const { return scale == 1 && shifts.empty(); }
  /// True when every required feasibility check passed.
  bool feasible() const;
};

/// Builds the parameter set for eta = 2^-t, psi = eta / (A_psi ln(1/eta)),
/// h = (t + c) 2^(t + c), k_n = h n, with the feasibility report attached.
ConstructionParams params_from_t(int t, const ParamOverrides& overrides = {});

/// Overrides that make params_from_t(params.t, ...) rebuild `params`.
ParamOverrides overrides_of(const ConstructionParams& params);

/// Finest-grid level of the first step: 2^-l < 2 psi / (h ceil(e^(2 eta h))) <= 2^(1-l).
std::int64_t first_grid_level(const ConstructionParams& params);

struct MRange {
  mpz_class lo;
  mpz_class hi;
};

/// (floor(a e^(eta k) + s_k), ceil(a e^(2 eta k) + s_k)), decided exactly.
MRange m_range_for_k(std::uint64_t k, const ConstructionParams& params);

struct DangerInterval {
  std::uint64_t k = 0;
  mpz_class m;
  RealInterval lower;  // encloses log(q)/k - psi/(k m)
  RealInterval upper;  // encloses log(q)/k + psi/(k m)

  RealInterval enclosure() const { return hull(lower, upper); }
};

/// A(k, m) enclosed at (about) p.bits absolute bits; nullopt when q <= 0.
std::optional<DangerInterval> danger_interval(std::uint64_t k, const mpz_class& m,
                                              const ConstructionParams& params,
                                              Precision p = Precision(128));

/// Open interval (a1 / 2^level, a2 / 2^level).
struct DyadicCover {
  mpz_class a1;
  mpz_class a2;
  std::int64_t level = 0;

  DyadicRational lo() const { return DyadicRational::on_grid(a1, level); }
  DyadicRational hi() const { return DyadicRational::on_grid(a2, level); }
  DyadicRational length() const { return DyadicRational::on_grid(a2 - a1, level); }
  bool contains(const DyadicCover& other) const { return lo() <= other.lo() && other.hi() <= hi(); }
};

/// Shortest grid-level cover of A(k, m), decided exactly.
DyadicCover dyadic_cover(const DangerInterval& d, std::int64_t level, const ConstructionParams& params);
/// Shortest grid-level cover of the open rational interval (lo, hi).
DyadicCover dyadic_cover(const mpq_class& lo, const mpq_class& hi, std::int64_t level);

/// Closed dyadic interval [lo, hi].
struct DyadicWindow {
  DyadicRational lo;
  DyadicRational hi;

  static DyadicWindow cell(const mpz_class& w, std::int64_t level) {
    return {DyadicRational::on_grid(w, level), DyadicRational::on_grid(w + 1, level)};
  }
  DyadicRational length() const { return hi - lo; }
};

/// The m for which A(k, m) meets J, ascending and duplicate-free.
std::vector<mpz_class> dangerous_m_in_window(std::uint64_t k, const DyadicWindow& window,
                                             const ConstructionParams& params);

// ---------------------------------------------------------------------------
// Lower-level enumeration machinery shared by the construction and verifier.

/// Exponentials that localize the candidate m for one k and one window.
struct KEnclosures {
  std::uint64_t k = 0;
  RealInterval exp_lo;    // e^(k * window.lo)
  RealInterval exp_hi;    // e^(k * window.hi)
  RealInterval exp_eta;   // e^(eta k)
  RealInterval exp_2eta;  // e^(2 eta k)
};

/// Working precision that keeps every KEnclosures value for k <= k_max
/// accurate to well below one unit.
Precision sweep_precision(std::uint64_t k_max, const DyadicWindow& window,
                          const ConstructionParams& params);

KEnclosures k_enclosures(std::uint64_t k, const DyadicWindow& window, const ConstructionParams& params);

/// Incremental KEnclosures for consecutive k.
class KSweeper {
 public:
  KSweeper(const DyadicWindow& window, std::uint64_t k_first, std::uint64_t k_max,
           const ConstructionParams& params);
  ~KSweeper();
  KSweeper(KSweeper&&) noexcept;
  KEnclosures current() const;
  void advance();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// Inclusive integer range [first, last]; empty when first > last.
struct CandidateRange {
  mpz_class first;
  mpz_class last;

  bool empty() const { return first > last; }
  mpz_class count() const { return empty() ? mpz_class(0) : mpz_class(last - first + 1); }
};

/// Superset of the m whose A(k, m) meets the open window, clipped to the
/// admissible m-range, with a one-integer margin on each side.
CandidateRange candidate_range(const KEnclosures& ke, const DyadicWindow& window,
                               const ConstructionParams& params);

/// Exact test: does A(k, m) meet the open interval (window.lo, window.hi)?
/// The closed grid cell meets the cover of A(k, m) at any level at least as
/// fine as the cell's exactly when this holds.
bool danger_meets_window(std::uint64_t k, const mpz_class& m, const DyadicWindow& window,
                         const ConstructionParams& params, const KEnclosures* ke = nullptr);

/// Covers of one k inside one window.
struct CoverTally {
  bool exact = true;
  // Covers clipped to the window, as [start, end) in units of 2^-cover_level.
  std::vector<std::pair<mpz_class, mpz_class>> clipped;
  mpz_class candidates;
  // Upper bound on the measure covered inside the window; equals the exact
  // union measure of `clipped` only when `exact` holds.
  DyadicRational measure_upper;
  // Covers whose length could not be shown to be at most 4 lambda(A(k, m)).
  std::size_t ratio_failures = 0;
};

CoverTally tally_covers(const KEnclosures& ke, const DyadicWindow& window, std::int64_t cover_level,
                        const ConstructionParams& params);

/// First cover (ascending m) meeting the closed cell, if any; also counts
/// covers whose length could not be certified against 4 lambda(A).
std::optional<DyadicCover> first_hit(const KEnclosures& ke, const DyadicWindow& cell,
                                     std::int64_t level, const ConstructionParams& params,
                                     std::size_t* ratio_failures = nullptr);

/// Exact measure of a union of half-open integer intervals.
mpz_class union_length(std::vector<std::pair<mpz_class, mpz_class>> parts);

}  // namespace fracpow

#endif  // FRACPOW_DANGER_HPP
