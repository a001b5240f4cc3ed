#include "fracpow/mpreal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <vector>

namespace fracpow {

namespace {

mpz_class pow10(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

// Rounds a rational into `out` in direction `rnd`.
void set_rational(mpfr_ptr out, const mpq_class& q, mpfr_rnd_t rnd) {
  mpfr_set_q(out, q.get_mpq_t(), rnd);
}

}  // namespace

// ---------------------------------------------------------------------------
// DyadicRational

DyadicRational::DyadicRational(mpz_class mantissa, std::int64_t exponent)
    : mantissa_(std::move(mantissa)), exponent_(exponent) {
  canonicalize();
}

void DyadicRational::canonicalize() {
  if (mantissa_ == 0) {
    exponent_ = 0;
    return;
  }
  const mp_bitcnt_t tz = mpz_scan1(mantissa_.get_mpz_t(), 0);
  if (tz > 0) {
    mpz_tdiv_q_2exp(mantissa_.get_mpz_t(), mantissa_.get_mpz_t(), tz);
    exponent_ += static_cast<std::int64_t>(tz);
  }
}

DyadicRational DyadicRational::from_mpfr(mpfr_srcptr x) {
  if (!mpfr_number_p(x)) throw DomainError("non-finite value cannot be made dyadic");
  if (mpfr_zero_p(x)) return DyadicRational();
  mpz_class z;
  const mpfr_exp_t e = mpfr_get_z_2exp(z.get_mpz_t(), x);
  return DyadicRational(std::move(z), static_cast<std::int64_t>(e));
}

DyadicRational DyadicRational::ldexp(std::int64_t e) const {
  if (mantissa_ == 0) return *this;
  DyadicRational r = *this;
  r.exponent_ += e;
  return r;
}

DyadicRational operator+(const DyadicRational& a, const DyadicRational& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const std::int64_t e = std::min(a.exponent_, b.exponent_);
  mpz_class x = a.mantissa_, y = b.mantissa_;
  if (a.exponent_ > e) x <<= static_cast<mp_bitcnt_t>(a.exponent_ - e);
  if (b.exponent_ > e) y <<= static_cast<mp_bitcnt_t>(b.exponent_ - e);
  return DyadicRational(x + y, e);
}

DyadicRational operator-(const DyadicRational& a, const DyadicRational& b) { return a + (-b); }

DyadicRational operator*(const DyadicRational& a, const DyadicRational& b) {
  return DyadicRational(a.mantissa_ * b.mantissa_, a.exponent_ + b.exponent_);
}

std::strong_ordering operator<=>(const DyadicRational& a, const DyadicRational& b) {
  const int sa = a.sign(), sb = b.sign();
  if (sa != sb) return sa <=> sb;
  if (a == b) return std::strong_ordering::equal;
  const int s = (a - b).sign();
  return s <=> 0;
}

mpz_class DyadicRational::floor() const {
  mpz_class r;
  if (exponent_ >= 0) {
    mpz_mul_2exp(r.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<mp_bitcnt_t>(exponent_));
  } else {
    mpz_fdiv_q_2exp(r.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<mp_bitcnt_t>(-exponent_));
  }
  return r;
}

mpz_class DyadicRational::ceil() const {
  mpz_class r;
  if (exponent_ >= 0) {
    mpz_mul_2exp(r.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<mp_bitcnt_t>(exponent_));
  } else {
    mpz_cdiv_q_2exp(r.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<mp_bitcnt_t>(-exponent_));
  }
  return r;
}

std::optional<mpz_class> DyadicRational::scaled_integer(std::int64_t level) const {
  const DyadicRational s = ldexp(level);
  if (!s.is_integer()) return std::nullopt;
  return s.floor();
}

long DyadicRational::mantissa_bits() const {
  if (mantissa_ == 0) return 0;
  return static_cast<long>(mpz_sizeinbase(mantissa_.get_mpz_t(), 2));
}

mpq_class DyadicRational::to_rational() const {
  mpq_class q(mantissa_);
  if (exponent_ >= 0) {
    mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(exponent_));
  } else {
    mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-exponent_));
  }
  return q;
}

void DyadicRational::to_mpfr(mpfr_ptr out, mpfr_rnd_t rnd) const {
  mpfr_set_z_2exp(out, mantissa_.get_mpz_t(), static_cast<mpfr_exp_t>(exponent_), rnd);
}

double DyadicRational::to_double() const {
  BigFloat f(53);
  to_mpfr(f.get(), MPFR_RNDN);
  return mpfr_get_d(f.get(), MPFR_RNDN);
}

std::string DyadicRational::to_string(int digits) const {
  BigFloat f(std::max<long>(mantissa_bits(), MPFR_PREC_MIN));
  to_mpfr(f.get(), MPFR_RNDN);
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Rg", digits, f.get());
  std::string s(buf);
  mpfr_free_str(buf);
  return s;
}

// ---------------------------------------------------------------------------
// RealInterval

namespace {

BigFloat exact_float(const DyadicRational& x) {
  BigFloat f(std::max<long>(x.mantissa_bits(), MPFR_PREC_MIN));
  x.to_mpfr(f.get(), MPFR_RNDN);
  return f;
}

mpfr_prec_t wp(const Precision& p) { return static_cast<mpfr_prec_t>(p.working()); }

}  // namespace

RealInterval::RealInterval(const DyadicRational& x) : lo_(exact_float(x)), hi_(exact_float(x)) {}

RealInterval::RealInterval(const DyadicRational& lo, const DyadicRational& hi)
    : lo_(exact_float(lo)), hi_(exact_float(hi)) {
  if (lo > hi) throw DomainError("interval endpoints out of order");
}

RealInterval RealInterval::from_integer(const mpz_class& n) { return RealInterval(DyadicRational(n)); }

RealInterval RealInterval::from_rational(const mpq_class& q, Precision p) {
  BigFloat lo(wp(p)), hi(wp(p));
  set_rational(lo.get(), q, MPFR_RNDD);
  set_rational(hi.get(), q, MPFR_RNDU);
  return from_bounds(std::move(lo), std::move(hi));
}

RealInterval RealInterval::from_bounds(BigFloat lo, BigFloat hi) {
  if (!mpfr_number_p(lo.get()) || !mpfr_number_p(hi.get()))
    throw DomainError("non-finite interval endpoint");
  if (mpfr_cmp(lo.get(), hi.get()) > 0) throw DomainError("interval endpoints out of order");
  RealInterval r;
  r.lo_ = std::move(lo);
  r.hi_ = std::move(hi);
  return r;
}

bool RealInterval::contains(const DyadicRational& x) const {
  BigFloat f = exact_float(x);
  return mpfr_lessequal_p(lo_.get(), f.get()) && mpfr_lessequal_p(f.get(), hi_.get());
}

bool RealInterval::contains(const RealInterval& other) const {
  return mpfr_lessequal_p(lo_.get(), other.lo_.get()) &&
         mpfr_lessequal_p(other.hi_.get(), hi_.get());
}

bool RealInterval::contains_integer() const {
  mpz_class c;
  mpfr_get_z(c.get_mpz_t(), lo_.get(), MPFR_RNDU);
  return mpfr_cmp_z(hi_.get(), c.get_mpz_t()) >= 0;
}

double RealInterval::mid_double() const {
  return 0.5 * (mpfr_get_d(lo_.get(), MPFR_RNDN) + mpfr_get_d(hi_.get(), MPFR_RNDN));
}

std::string RealInterval::to_string(int digits) const {
  char* buf = nullptr;
  mpfr_asprintf(&buf, "[%.*Rg, %.*Rg]", digits, lo_.get(), digits, hi_.get());
  std::string s(buf);
  mpfr_free_str(buf);
  return s;
}

RealInterval hull(const RealInterval& a, const RealInterval& b) {
  BigFloat lo(std::max(mpfr_get_prec(a.lo_ptr()), mpfr_get_prec(b.lo_ptr())));
  BigFloat hi(std::max(mpfr_get_prec(a.hi_ptr()), mpfr_get_prec(b.hi_ptr())));
  mpfr_min(lo.get(), a.lo_ptr(), b.lo_ptr(), MPFR_RNDD);
  mpfr_max(hi.get(), a.hi_ptr(), b.hi_ptr(), MPFR_RNDU);
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

RealInterval intersect(const RealInterval& a, const RealInterval& b) {
  BigFloat lo(std::max(mpfr_get_prec(a.lo_ptr()), mpfr_get_prec(b.lo_ptr())));
  BigFloat hi(std::max(mpfr_get_prec(a.hi_ptr()), mpfr_get_prec(b.hi_ptr())));
  mpfr_max(lo.get(), a.lo_ptr(), b.lo_ptr(), MPFR_RNDD);
  mpfr_min(hi.get(), a.hi_ptr(), b.hi_ptr(), MPFR_RNDU);
  if (mpfr_cmp(lo.get(), hi.get()) > 0) throw DomainError("intersection of disjoint intervals");
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

RealInterval add(const RealInterval& a, const RealInterval& b, Precision p) {
  BigFloat lo(wp(p)), hi(wp(p));
  mpfr_add(lo.get(), a.lo_ptr(), b.lo_ptr(), MPFR_RNDD);
  mpfr_add(hi.get(), a.hi_ptr(), b.hi_ptr(), MPFR_RNDU);
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

RealInterval sub(const RealInterval& a, const RealInterval& b, Precision p) {
  BigFloat lo(wp(p)), hi(wp(p));
  mpfr_sub(lo.get(), a.lo_ptr(), b.hi_ptr(), MPFR_RNDD);
  mpfr_sub(hi.get(), a.hi_ptr(), b.lo_ptr(), MPFR_RNDU);
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

namespace {

using BinaryFn = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);

// Min and max of f over the four endpoint combinations, rounded outward.
RealInterval corner_extrema(BinaryFn f, const RealInterval& a, const RealInterval& b, Precision p) {
  BigFloat lo(wp(p)), hi(wp(p)), t(wp(p));
  mpfr_srcptr as[2] = {a.lo_ptr(), a.hi_ptr()};
  mpfr_srcptr bs[2] = {b.lo_ptr(), b.hi_ptr()};
  bool first = true;
  for (auto x : as) {
    for (auto y : bs) {
      f(t.get(), x, y, MPFR_RNDD);
      if (first || mpfr_less_p(t.get(), lo.get())) mpfr_set(lo.get(), t.get(), MPFR_RNDD);
      f(t.get(), x, y, MPFR_RNDU);
      if (first || mpfr_greater_p(t.get(), hi.get())) mpfr_set(hi.get(), t.get(), MPFR_RNDU);
      first = false;
    }
  }
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

}  // namespace

RealInterval mul(const RealInterval& a, const RealInterval& b, Precision p) {
  if (mpfr_sgn(a.lo_ptr()) >= 0 && mpfr_sgn(b.lo_ptr()) >= 0) {
    BigFloat lo(wp(p)), hi(wp(p));
    mpfr_mul(lo.get(), a.lo_ptr(), b.lo_ptr(), MPFR_RNDD);
    mpfr_mul(hi.get(), a.hi_ptr(), b.hi_ptr(), MPFR_RNDU);
    return RealInterval::from_bounds(std::move(lo), std::move(hi));
  }
  return corner_extrema(mpfr_mul, a, b, p);
}

RealInterval div(const RealInterval& a, const RealInterval& b, Precision p) {
  if (b.contains_zero()) throw DomainError("division by an interval containing zero");
  return corner_extrema(mpfr_div, a, b, p);
}

RealInterval interval_arith(ArithOp op, const RealInterval& a, const RealInterval& b, Precision p) {
  switch (op) {
    case ArithOp::add: return add(a, b, p);
    case ArithOp::sub: return sub(a, b, p);
    case ArithOp::mul: return mul(a, b, p);
    case ArithOp::div: return div(a, b, p);
  }
  throw DomainError("unknown arithmetic operation");
}

RealInterval ldexp(const RealInterval& a, std::int64_t e) {
  BigFloat lo(mpfr_get_prec(a.lo_ptr())), hi(mpfr_get_prec(a.hi_ptr()));
  mpfr_mul_2si(lo.get(), a.lo_ptr(), static_cast<long>(e), MPFR_RNDD);
  mpfr_mul_2si(hi.get(), a.hi_ptr(), static_cast<long>(e), MPFR_RNDU);
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

RealInterval negate(const RealInterval& a) {
  BigFloat lo(mpfr_get_prec(a.hi_ptr())), hi(mpfr_get_prec(a.lo_ptr()));
  mpfr_neg(lo.get(), a.hi_ptr(), MPFR_RNDD);
  mpfr_neg(hi.get(), a.lo_ptr(), MPFR_RNDU);
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

RealInterval exp_interval(const RealInterval& x, Precision p) {
  BigFloat lo(wp(p)), hi(wp(p));
  mpfr_exp(lo.get(), x.lo_ptr(), MPFR_RNDD);
  mpfr_exp(hi.get(), x.hi_ptr(), MPFR_RNDU);
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

RealInterval ln_interval(const mpq_class& q, Precision p) {
  if (sgn(q) <= 0) throw DomainError("logarithm of a non-positive number");
  if (q == 1) return RealInterval();
  BigFloat qlo(wp(p) + 2), qhi(wp(p) + 2);
  set_rational(qlo.get(), q, MPFR_RNDD);
  set_rational(qhi.get(), q, MPFR_RNDU);
  BigFloat lo(wp(p)), hi(wp(p));
  mpfr_log(lo.get(), qlo.get(), MPFR_RNDD);
  mpfr_log(hi.get(), qhi.get(), MPFR_RNDU);
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

RealInterval ln_interval(const RealInterval& x, Precision p) {
  if (!x.positive()) throw DomainError("logarithm of an interval reaching zero");
  BigFloat lo(wp(p)), hi(wp(p));
  mpfr_log(lo.get(), x.lo_ptr(), MPFR_RNDD);
  mpfr_log(hi.get(), x.hi_ptr(), MPFR_RNDU);
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

RealInterval root_interval(const RealInterval& x, unsigned long j, Precision p) {
  if (j == 0) throw DomainError("zeroth root");
  if (!x.positive()) throw DomainError("root of a non-positive interval");
  BigFloat lo(wp(p)), hi(wp(p));
  mpfr_rootn_ui(lo.get(), x.lo_ptr(), j, MPFR_RNDD);
  mpfr_rootn_ui(hi.get(), x.hi_ptr(), j, MPFR_RNDU);
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

RealInterval pow_interval(const RealInterval& x, unsigned long n, Precision p) {
  if (n == 0) return RealInterval(DyadicRational(1));
  BigFloat lo(wp(p)), hi(wp(p));
  const bool even = (n % 2) == 0;
  if (mpfr_sgn(x.lo_ptr()) >= 0 || !even) {
    mpfr_pow_ui(lo.get(), x.lo_ptr(), n, MPFR_RNDD);
    mpfr_pow_ui(hi.get(), x.hi_ptr(), n, MPFR_RNDU);
  } else if (mpfr_sgn(x.hi_ptr()) <= 0) {
    mpfr_pow_ui(lo.get(), x.hi_ptr(), n, MPFR_RNDD);
    mpfr_pow_ui(hi.get(), x.lo_ptr(), n, MPFR_RNDU);
  } else {
    BigFloat m(std::max(mpfr_get_prec(x.lo_ptr()), mpfr_get_prec(x.hi_ptr())));
    mpfr_neg(m.get(), x.lo_ptr(), MPFR_RNDU);
    mpfr_max(m.get(), m.get(), x.hi_ptr(), MPFR_RNDU);
    mpfr_set_zero(lo.get(), 1);
    mpfr_pow_ui(hi.get(), m.get(), n, MPFR_RNDU);
  }
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

RealInterval ln2_interval(Precision p) {
  BigFloat lo(wp(p)), hi(wp(p));
  mpfr_const_log2(lo.get(), MPFR_RNDD);
  mpfr_const_log2(hi.get(), MPFR_RNDU);
  return RealInterval::from_bounds(std::move(lo), std::move(hi));
}

// ---------------------------------------------------------------------------
// Escalation loops

namespace {

// Next precision in an escalation sequence, or nullopt once over budget.
std::optional<Precision> escalate(const Precision& p, long max_bits) {
  Precision next = p.doubled();
  if (next.working() > max_bits) return std::nullopt;
  return next;
}

}  // namespace

IntegerBounds exact_integer_bounds(const Refiner& refine, Precision start, long max_bits) {
  std::optional<Precision> p = start;
  RealInterval last;
  while (p) {
    last = refine(*p);
    if (last.is_point() && last.lo().is_integer()) {
      mpz_class n = last.lo().floor();
      return {n, n};
    }
    mpz_class f;
    mpfr_get_z(f.get_mpz_t(), last.hi_ptr(), MPFR_RNDD);
    if (mpfr_cmp_z(last.lo_ptr(), f.get_mpz_t()) > 0) return {f, f + 1};
    p = escalate(*p, max_bits);
  }
  throw UndecidableError("integer bounds undecided within the escalation budget", last.to_string(40));
}

IntegerBounds exact_integer_bounds(const DyadicRational& x) { return {x.floor(), x.ceil()}; }

IntegerBounds exact_integer_bounds(const mpq_class& x) {
  mpz_class f, c;
  mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  mpz_cdiv_q(c.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return {f, c};
}

int compare_escalating(const Refiner& refine, const DyadicRational& x, Precision start, long max_bits) {
  BigFloat fx(std::max<long>(x.mantissa_bits(), MPFR_PREC_MIN));
  x.to_mpfr(fx.get(), MPFR_RNDN);
  std::optional<Precision> p = start;
  RealInterval last;
  while (p) {
    last = refine(*p);
    if (mpfr_greater_p(last.lo_ptr(), fx.get())) return 1;
    if (mpfr_less_p(last.hi_ptr(), fx.get())) return -1;
    if (last.is_point()) return 0;
    p = escalate(*p, max_bits);
  }
  throw UndecidableError("comparison undecided within the escalation budget", last.to_string(40));
}

int compare_escalating(const Refiner& refine, const mpq_class& x, Precision start, long max_bits) {
  std::optional<Precision> p = start;
  RealInterval last;
  while (p) {
    last = refine(*p);
    if (mpfr_cmp_q(last.lo_ptr(), x.get_mpq_t()) > 0) return 1;
    if (mpfr_cmp_q(last.hi_ptr(), x.get_mpq_t()) < 0) return -1;
    if (last.is_point()) return 0;
    p = escalate(*p, max_bits);
  }
  throw UndecidableError("comparison undecided within the escalation budget", last.to_string(40));
}

std::int64_t ceil_log2_escalating(const Refiner& refine, Precision start, long max_bits) {
  std::optional<Precision> p = start;
  RealInterval last;
  while (p) {
    last = refine(*p);
    if (mpfr_sgn(last.hi_ptr()) <= 0) throw DomainError("log2 of a non-positive number");
    if (mpfr_sgn(last.lo_ptr()) > 0) {
      // hi = f * 2^e with f in [1/2, 1).
      const mpfr_exp_t e = mpfr_get_exp(last.hi_ptr());
      const bool power_of_two = mpfr_cmp_ui_2exp(last.hi_ptr(), 1, e - 1) == 0;
      const std::int64_t level = power_of_two ? e - 1 : e;
      if (mpfr_cmp_ui_2exp(last.lo_ptr(), 1, static_cast<mpfr_exp_t>(level - 1)) > 0) return level;
    }
    p = escalate(*p, max_bits);
  }
  throw UndecidableError("binary logarithm ceiling undecided within the escalation budget",
                         last.to_string(40));
}

// ---------------------------------------------------------------------------
// Rationals

mpz_class parse_integer(std::string_view text) {
  if (text.empty()) throw DomainError("empty integer");
  std::size_t i = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  if (i == text.size()) throw DomainError("malformed integer '" + std::string(text) + "'");
  for (std::size_t j = i; j < text.size(); ++j)
    if (!std::isdigit(static_cast<unsigned char>(text[j])))
      throw DomainError("malformed integer '" + std::string(text) + "'");
  std::string digits(text.substr(text[0] == '+' ? 1 : 0));
  return mpz_class(digits, 10);
}

mpq_class parse_rational(std::string_view text) {
  const std::string original(text);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    mpz_class num = parse_integer(text.substr(0, slash));
    mpz_class den = parse_integer(text.substr(slash + 1));
    if (den == 0) throw DomainError("zero denominator in '" + original + "'");
    mpq_class q(num, den);
    q.canonicalize();
    return q;
  }
  bool negative = false;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
    negative = text[0] == '-';
    text.remove_prefix(1);
  }
  long exp10 = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    const mpz_class ez = parse_integer(text.substr(e + 1));
    if (!ez.fits_slong_p() || abs(ez) > 100000) throw DomainError("exponent too large in '" + original + "'");
    exp10 = ez.get_si();
    text = text.substr(0, e);
  }
  std::string digits;
  bool seen_point = false, seen_digit = false;
  for (char ch : text) {
    if (ch == '.' && !seen_point) {
      seen_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits.push_back(ch);
      seen_digit = true;
      if (seen_point) --exp10;
    } else {
      throw DomainError("malformed rational '" + original + "'");
    }
  }
  if (!seen_digit) throw DomainError("malformed rational '" + original + "'");
  mpq_class q{mpz_class(digits, 10)};
  if (exp10 > 0) q *= pow10(static_cast<unsigned long>(exp10));
  if (exp10 < 0) q /= pow10(static_cast<unsigned long>(-exp10));
  q.canonicalize();
  return negative ? mpq_class(-q) : q;
}

std::string format_rational(const mpq_class& q) { return q.get_str(10); }

}  // namespace fracpow
