// Reals alpha with a_n <= {xi alpha^n} <= a_n + eps for n = 1..D.
//
// A node at depth j is identified by an integer i; its interval
//   [((i + a_j)/xi)^(1/j), ((i + b_j)/xi)^(1/j)],  b_j = a_j + eps,
// is exactly the set of alpha > 0 with xi alpha^j in [i + a_j, i + b_j].
// Its children use c consecutive integers inside the image window
// [xi lo^(j+1), xi hi^(j+1)]. All window and containment decisions are made
// on exact rationals; stored enclosures are caches.

#ifndef FRACPOW_CANTOR_HPP
#define FRACPOW_CANTOR_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fracpow/mpreal.hpp"

namespace fracpow {

/// a_n as a finite list, a constant, or a periodic pattern (1-based n).
class BandSequence {
 public:
  enum class Kind { finite, constant, periodic };

  static BandSequence finite(std::vector<mpq_class> values);
  static BandSequence constant(mpq_class value);
  static BandSequence periodic(std::vector<mpq_class> pattern);

  Kind kind() const { return kind_; }
  const std::vector<mpq_class>& values() const { return values_; }
  /// Largest n with a_n defined; nullopt when unbounded.
  std::optional<std::uint64_t> length() const;
  /// a_n; depth beyond a finite list is an error.
  const mpq_class& at(std::uint64_t n) const;

 private:
  Kind kind_ = Kind::constant;
  std::vector<mpq_class> values_;
};

struct BandSpec {
  mpq_class epsilon;
  BandSequence bands = BandSequence::constant(0);
  mpq_class xi = 1;
  mpq_class eta;
  mpz_class H;
  mpz_class c;  // floor(H^eta) - 2

  mpq_class b(std::uint64_t n) const { return bands.at(n) + epsilon; }
};

/// floor(H^eta) for rational eta, exactly.
mpz_class floor_power(const mpz_class& H, const mpq_class& eta);

/// Smallest H with eps H > H^eta > 2 and c >= 1, decided exactly.
/// Requires 0 < eps <= 1/2 and 0 < eta < 1.
BandSpec choose_params(const mpq_class& epsilon, const mpq_class& eta, const mpq_class& xi = 1);

/// Spec with an explicit H; c is derived. Call validate() before use.
BandSpec make_band_spec(const mpq_class& epsilon, const mpq_class& eta, const mpz_class& H,
                        BandSequence bands, const mpq_class& xi = 1);

/// Throws DomainError naming the first violated requirement; bands are
/// checked through `depth` (or the whole list when depth is 0).
void validate(const BandSpec& spec, std::uint64_t depth = 0);

struct CantorNode {
  std::uint64_t depth = 0;
  mpz_class i;            // xi alpha^depth lies in [i + a_depth, i + b_depth]
  RealInterval interval;  // outward enclosure of the exact node interval
  std::optional<mpz_class> window_start;  // j_x once the children are known
  mpz_class c;
};

CantorNode root_node(const BandSpec& spec, Precision p = Precision(128));

/// Smallest j_x with [j_x, j_x + c] inside the depth-(j+1) image window of
/// the node. Throws ConstructionError when the window is too narrow.
mpz_class next_integers(const CantorNode& node, const BandSpec& spec);

/// The c children, ascending. Containment in the parent is checked exactly.
std::vector<CantorNode> children(const CantorNode& node, const BandSpec& spec,
                                 Precision p = Precision(128));

struct FirstSelector {};
struct IndexSelector {
  std::vector<std::uint64_t> indices;  // child index for depths 2, 3, ...
};
struct RandomSelector {
  std::uint64_t seed = 0;
};
using Selector = std::variant<FirstSelector, IndexSelector, RandomSelector>;

struct CantorPath {
  BandSpec spec;
  std::vector<CantorNode> nodes;
  std::vector<std::uint64_t> choices;  // child index taken at depths 2..D
  RealInterval alpha;                  // inner dyadic interval of the deepest node
};

CantorPath build_path(const BandSpec& spec, std::uint64_t depth, const Selector& selector = FirstSelector{});

/// Enclosure of ln c / ln H.
RealInterval dimension_lower_bound(const mpz_class& H, const mpz_class& c, Precision p = Precision(128));

}  // namespace fracpow

#endif  // FRACPOW_CANTOR_HPP
