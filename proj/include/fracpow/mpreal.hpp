// Exact dyadic rationals and outward-rounded real intervals.
//
// DyadicRational is an exact number mantissa * 2^exponent. RealInterval is a
// pair of MPFR numbers (themselves dyadic) that encloses an exact real value;
// every operation below rounds its endpoints away from the interior, so the
// enclosure property survives arbitrary chains of operations.

#ifndef FRACPOW_MPREAL_HPP
#define FRACPOW_MPREAL_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>
#include <mpfr.h>

namespace fracpow {

/// Raised when an argument lies outside the domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a precision-escalation loop exhausts its bit budget.
class UndecidableError : public std::runtime_error {
 public:
  UndecidableError(const std::string& what, std::string last_enclosure)
      : std::runtime_error(what + " (last enclosure " + last_enclosure + ")"),
        last_enclosure_(std::move(last_enclosure)) {}
  const std::string& last_enclosure() const { return last_enclosure_; }

 private:
  std::string last_enclosure_;
};

/// Default escalation budget for exact decisions.
/// A construction found no admissible candidate or breached a strict-mode
/// inequality.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr long kDefaultMaxBits = 1L << 24;

struct Precision {
  long bits;
  long guard;

  explicit Precision(long bits, long guard = 64) : bits(bits), guard(guard) {
    if (bits < 8) throw DomainError("precision must be at least 8 bits");
    if (guard < 0) throw DomainError("guard bits must be non-negative");
  }
  long working() const { return bits + guard; }
  Precision doubled() const { return Precision(2 * bits, guard); }
};

class DyadicRational {
 public:
  DyadicRational() = default;
  DyadicRational(long value) : mantissa_(value) { canonicalize(); }  // NOLINT
  explicit DyadicRational(mpz_class mantissa, std::int64_t exponent = 0);

  /// 2^e.
  static DyadicRational pow2(std::int64_t e) { return DyadicRational(1, e); }
  /// w / 2^level.
  static DyadicRational on_grid(const mpz_class& w, std::int64_t level) {
    return DyadicRational(w, -level);
  }
  /// Exact value of an MPFR number (which is always dyadic).
  static DyadicRational from_mpfr(mpfr_srcptr x);

  const mpz_class& mantissa() const { return mantissa_; }
  std::int64_t exponent() const { return exponent_; }
  int sign() const { return sgn(mantissa_); }
  bool is_zero() const { return mantissa_ == 0; }
  bool is_integer() const { return exponent_ >= 0 || mantissa_ == 0; }

  DyadicRational ldexp(std::int64_t e) const;
  DyadicRational operator-() const { return DyadicRational(-mantissa_, exponent_); }
  friend DyadicRational operator+(const DyadicRational& a, const DyadicRational& b);
  friend DyadicRational operator-(const DyadicRational& a, const DyadicRational& b);
  friend DyadicRational operator*(const DyadicRational& a, const DyadicRational& b);
  DyadicRational& operator+=(const DyadicRational& o) { return *this = *this + o; }
  DyadicRational& operator-=(const DyadicRational& o) { return *this = *this - o; }

  friend std::strong_ordering operator<=>(const DyadicRational& a, const DyadicRational& b);
  friend bool operator==(const DyadicRational& a, const DyadicRational& b) {
    return a.exponent_ == b.exponent_ && a.mantissa_ == b.mantissa_;
  }

  mpz_class floor() const;
  mpz_class ceil() const;
  /// value * 2^level when that is an integer.
  std::optional<mpz_class> scaled_integer(std::int64_t level) const;
  /// Number of significant mantissa bits (0 for zero).
  long mantissa_bits() const;
  mpq_class to_rational() const;
  double to_double() const;
  /// Loads the value into `out`, rounding with `rnd` at the precision of `out`.
  void to_mpfr(mpfr_ptr out, mpfr_rnd_t rnd) const;
  /// Short human-readable decimal approximation.
  std::string to_string(int digits = 20) const;

 private:
  void canonicalize();

  mpz_class mantissa_{0};
  std::int64_t exponent_ = 0;
};

/// RAII owner of an mpfr_t.
class BigFloat {
 public:
  explicit BigFloat(mpfr_prec_t prec = 64) { mpfr_init2(value_, prec); mpfr_set_zero(value_, 1); }
  BigFloat(const BigFloat& o) {
    mpfr_init2(value_, mpfr_get_prec(o.value_));
    mpfr_set(value_, o.value_, MPFR_RNDN);
  }
  BigFloat(BigFloat&& o) noexcept {
    mpfr_init2(value_, MPFR_PREC_MIN);
    mpfr_swap(value_, o.value_);
  }
  BigFloat& operator=(const BigFloat& o) {
    if (this != &o) {
      mpfr_set_prec(value_, mpfr_get_prec(o.value_));
      mpfr_set(value_, o.value_, MPFR_RNDN);
    }
    return *this;
  }
  BigFloat& operator=(BigFloat&& o) noexcept {
    mpfr_swap(value_, o.value_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(value_); }

  mpfr_ptr get() { return value_; }
  mpfr_srcptr get() const { return value_; }
  mpfr_prec_t precision() const { return mpfr_get_prec(value_); }

 private:
  mpfr_t value_;
};

/// Closed interval [lo, hi] with dyadic endpoints enclosing an exact real.
class RealInterval {
 public:
  RealInterval() : RealInterval(DyadicRational(0)) {}
  /// The degenerate interval [x, x]; exact.
  explicit RealInterval(const DyadicRational& x);
  /// [lo, hi], exact endpoints; throws DomainError if lo > hi.
  RealInterval(const DyadicRational& lo, const DyadicRational& hi);
  static RealInterval from_integer(const mpz_class& n);
  static RealInterval from_rational(const mpq_class& q, Precision p);
  /// Adopts endpoints that were already rounded outward by the caller.
  static RealInterval from_bounds(BigFloat lo, BigFloat hi);

  DyadicRational lo() const { return DyadicRational::from_mpfr(lo_.get()); }
  DyadicRational hi() const { return DyadicRational::from_mpfr(hi_.get()); }
  mpfr_srcptr lo_ptr() const { return lo_.get(); }
  mpfr_srcptr hi_ptr() const { return hi_.get(); }

  bool is_point() const { return mpfr_equal_p(lo_.get(), hi_.get()) != 0; }
  bool contains(const DyadicRational& x) const;
  bool contains(const RealInterval& other) const;
  bool contains_zero() const { return mpfr_sgn(lo_.get()) <= 0 && mpfr_sgn(hi_.get()) >= 0; }
  /// True when some integer lies in [lo, hi].
  bool contains_integer() const;
  bool positive() const { return mpfr_sgn(lo_.get()) > 0; }
  DyadicRational width() const { return hi() - lo(); }
  double mid_double() const;
  /// Exact midpoint (one bit longer than the longer endpoint).
  DyadicRational midpoint() const { return (lo() + hi()).ldexp(-1); }

  std::string to_string(int digits = 20) const;

 private:
  BigFloat lo_, hi_;
};

RealInterval hull(const RealInterval& a, const RealInterval& b);
/// Intersection; throws DomainError when disjoint.
RealInterval intersect(const RealInterval& a, const RealInterval& b);

enum class ArithOp { add, sub, mul, div };

RealInterval interval_arith(ArithOp op, const RealInterval& a, const RealInterval& b, Precision p);
RealInterval add(const RealInterval& a, const RealInterval& b, Precision p);
RealInterval sub(const RealInterval& a, const RealInterval& b, Precision p);
RealInterval mul(const RealInterval& a, const RealInterval& b, Precision p);
RealInterval div(const RealInterval& a, const RealInterval& b, Precision p);
/// Exact scaling by 2^e.
RealInterval ldexp(const RealInterval& a, std::int64_t e);
RealInterval negate(const RealInterval& a);

/// Encloses {e^x : x in x}.
RealInterval exp_interval(const RealInterval& x, Precision p);
/// Encloses ln q for an exact positive rational q; ln 1 is exactly [0, 0].
RealInterval ln_interval(const mpq_class& q, Precision p);
/// Encloses {ln y : y in x}; requires x.lo > 0.
RealInterval ln_interval(const RealInterval& x, Precision p);
/// Encloses {y^(1/j) : y in x}; requires x.lo > 0.
RealInterval root_interval(const RealInterval& x, unsigned long j, Precision p);
/// Encloses {y^n : y in x}.
RealInterval pow_interval(const RealInterval& x, unsigned long n, Precision p);
/// Encloses ln 2.
RealInterval ln2_interval(Precision p);

/// Produces an enclosure of a fixed real number at any requested precision.
using Refiner = std::function<RealInterval(Precision)>;

struct IntegerBounds {
  mpz_class floor;
  mpz_class ceil;
};

/// Floor and ceiling of the real number enclosed by `refine`, obtained by
/// doubling the precision until no integer lies strictly inside the enclosure
/// (or the enclosure collapses onto an integer). Throws UndecidableError once
/// the precision would exceed `max_bits`.
IntegerBounds exact_integer_bounds(const Refiner& refine, Precision start,
                                   long max_bits = kDefaultMaxBits);
IntegerBounds exact_integer_bounds(const DyadicRational& x);
IntegerBounds exact_integer_bounds(const mpq_class& x);

/// Sign of (y - x) for the real y enclosed by `refine`; 0 only when the
/// enclosure collapses onto x.
int compare_escalating(const Refiner& refine, const DyadicRational& x, Precision start,
                       long max_bits = kDefaultMaxBits);
/// Same as above against an exact rational.
int compare_escalating(const Refiner& refine, const mpq_class& x, Precision start,
                       long max_bits = kDefaultMaxBits);

/// Smallest integer L with y <= 2^L for the positive real y enclosed by `refine`.
std::int64_t ceil_log2_escalating(const Refiner& refine, Precision start,
                                  long max_bits = kDefaultMaxBits);

// Exact rational helpers. Accepted text forms: "p", "p/q", decimals such as
// "-0.15" or "1.5e-3".
mpq_class parse_rational(std::string_view text);
std::string format_rational(const mpq_class& q);
mpz_class parse_integer(std::string_view text);

}  // namespace fracpow

#endif  // FRACPOW_MPREAL_HPP
