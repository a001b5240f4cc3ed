#include "fracpow/danger.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracpow/detail/exp_sweep.hpp"

namespace fracpow {

namespace {

constexpr double kLog2E = 1.4426950408889634;

mpz_class to_mpz(std::uint64_t v) { return mpz_class(static_cast<unsigned long>(v)); }

const mpq_class kZero = 0;

long bit_length(const mpz_class& z) {
  return z == 0 ? 0 : static_cast<long>(mpz_sizeinbase(z.get_mpz_t(), 2));
}

// Number of fractional bits needed to resolve a window's endpoints.
long window_bits(const DyadicWindow& w) {
  std::int64_t b = 0;
  for (const DyadicRational* x : {&w.lo, &w.hi})
    if (!x->is_zero()) b = std::max<std::int64_t>(b, -x->exponent());
  return static_cast<long>(b);
}

// scale * x + shift over an enclosure x.
RealInterval affine_target(const RealInterval& x, const ConstructionParams& params, std::uint64_t k,
                           Precision p) {
  if (params.unit_targets()) return x;
  const RealInterval scaled = mul(RealInterval::from_rational(params.scale, p), x, p);
  return add(scaled, RealInterval::from_rational(params.shift(k), p), p);
}

mpq_class target_quotient(std::uint64_t k, const mpz_class& m, const ConstructionParams& params) {
  mpq_class q = (mpq_class(m) - params.shift(k)) / params.scale;
  q.canonicalize();
  return q;
}

}  // namespace

std::string to_string(TargetMode mode) {
  return mode == TargetMode::theorem1 ? "theorem1" : "theorem2";
}

TargetMode parse_target_mode(const std::string& text) {
  if (text == "theorem1") return TargetMode::theorem1;
  if (text == "theorem2") return TargetMode::theorem2;
  throw DomainError("unknown mode '" + text + "' (expected theorem1 or theorem2)");
}

RealInterval ConstructionParams::psi_at(Precision p) const {
  if (psi_zero) return RealInterval();
  // psi = eta / (A ln(1/eta)) = 1 / (2^t A t ln 2)
  const RealInterval denom =
      mul(ln2_interval(p), RealInterval::from_integer(a_psi * t), p);
  return ldexp(div(RealInterval(DyadicRational(1)), denom, p), -t);
}

const mpq_class& ConstructionParams::shift(std::uint64_t k) const {
  if (k >= 1 && k <= shifts.size()) return shifts[k - 1];
  return kZero;
}

bool ConstructionParams::feasible() const {
  return std::all_of(feasibility.begin(), feasibility.end(),
                     [](const FeasibilityCheck& c) { return c.passed || !c.required; });
}

std::int64_t first_grid_level(const ConstructionParams& params) {
  if (params.psi_zero) throw DomainError("first grid level is undefined for psi = 0");
  const std::uint64_t h = params.h;
  const DyadicRational two_eta_h = params.eta * DyadicRational(to_mpz(2 * h));
  const long mag = static_cast<long>(two_eta_h.to_double() * kLog2E) + 64;
  const mpz_class top = exact_integer_bounds(
      [&](Precision p) { return exp_interval(RealInterval(two_eta_h), p); },
      Precision(mag), params.max_bits).ceil;
  // Y = h ceil(e^(2 eta h)) / (2 psi); the level is floor(log2 Y) + 1.
  const mpz_class num = to_mpz(h) * top;
  Refiner y = [&](Precision p) {
    const RealInterval two_psi = ldexp(params.psi_at(p), 1);
    return div(RealInterval::from_integer(num), two_psi, p);
  };
  const Precision start(bit_length(num) + 64);
  const std::int64_t ceil_l = ceil_log2_escalating(y, start, params.max_bits);
  if (compare_escalating(y, DyadicRational::pow2(ceil_l), start, params.max_bits) == 0)
    return ceil_l + 1;
  return ceil_l;
}

ConstructionParams params_from_t(int t, const ParamOverrides& o) {
  if (t < 2) throw DomainError("t must be at least 2");
  ConstructionParams p;
  p.t = t;
  p.eta = DyadicRational::pow2(-t);
  p.a_psi = o.a_psi.value_or(mpz_class(1) << 14);
  if (p.a_psi <= 0) throw DomainError("A_psi must be positive");
  p.h_const_log2 = o.h_const_log2.value_or(6);
  if (o.h) {
    if (*o.h == 0) throw DomainError("h must be positive");
    p.h = *o.h;
    p.h_overridden = true;
  } else {
    const long e = t + p.h_const_log2;
    if (e < 1 || e > 56) throw DomainError("t + log2(B_h) must lie in [1, 56]");
    p.h = static_cast<std::uint64_t>(e) << e;
  }
  p.psi_zero = o.zero_psi;
  p.psi = p.psi_at(Precision(128));
  if (!p.psi_zero && mpfr_cmp_ui_2exp(p.psi.hi_ptr(), 1, -2) > 0)
    throw DomainError("psi must not exceed 1/4");
  p.max_bits = o.max_bits;
  p.enumeration_limit = o.enumeration_limit;
  p.lookahead_span = o.lookahead_span;

  p.mode = o.mode;
  if (o.scale <= 0) throw DomainError("target scale must be positive");
  if (p.mode == TargetMode::theorem1 && (o.scale != 1 || !o.shifts.empty()))
    throw DomainError("theorem1 mode takes no scale or shifts");
  p.scale = o.scale;
  for (const mpq_class& s : o.shifts) {
    // Only the shift modulo 1 matters for the distance to the nearest integer.
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), s.get_num_mpz_t(), s.get_den_mpz_t());
    mpq_class r = s - f;
    r.canonicalize();
    p.shifts.push_back(r);
  }
  while (!p.shifts.empty() && p.shifts.back() == 0) p.shifts.pop_back();
  p.scale_bound = o.scale_bound.value_or(std::max(mpq_class(1), p.scale));
  if (p.scale > p.scale_bound) throw DomainError("target scale exceeds its bound M");

  if (o.first_level) {
    p.first_level = *o.first_level;
    p.first_level_overridden = true;
  } else {
    p.first_level = first_grid_level(p);
  }

  // Feasibility report.
  const RealInterval h_iv = RealInterval::from_integer(to_mpz(p.h));
  const Precision rp(128);
  {
    FeasibilityCheck c{"psi_h_bound", "32*psi*h <= 1/2", false, true, {}};
    const RealInterval v = ldexp(mul(p.psi, h_iv, rp), 5);
    c.passed = mpfr_cmp_ui_2exp(v.hi_ptr(), 1, -1) <= 0;
    c.detail = "32*psi*h = " + v.to_string(6);
    p.feasibility.push_back(c);
  }
  {
    FeasibilityCheck c{"first_level_bound", "l_1 >= 5t", false, true, {}};
    c.passed = p.first_level >= 5 * static_cast<std::int64_t>(t);
    c.detail = "l_1 = " + std::to_string(p.first_level);
    p.feasibility.push_back(c);
  }
  {
    FeasibilityCheck c{"second_step_growth", "e^(eta*h/32) * psi >= 16", false, true, {}};
    const DyadicRational arg = p.eta * DyadicRational(to_mpz(p.h)) * DyadicRational::pow2(-5);
    const RealInterval v = mul(exp_interval(RealInterval(arg), rp), p.psi, rp);
    c.passed = mpfr_cmp_ui(v.lo_ptr(), 16) >= 0;
    c.detail = "value = " + v.to_string(6);
    p.feasibility.push_back(c);
  }
  {
    FeasibilityCheck c{"initial_union_bound", "psi*h*2^(3-t) <= 2^(-5-t)", false, true, {}};
    c.required = false;
    const RealInterval v = mul(p.psi, h_iv, rp);  // equivalent: psi*h <= 2^-8
    c.passed = mpfr_cmp_ui_2exp(v.hi_ptr(), 1, -8) <= 0;
    c.detail = "psi*h = " + v.to_string(6);
    p.feasibility.push_back(c);
  }
  return p;
}

MRange m_range_for_k(std::uint64_t k, const ConstructionParams& params) {
  if (k == 0) throw DomainError("k must be positive");
  const DyadicRational a = params.eta * DyadicRational(to_mpz(k));
  const DyadicRational b = a.ldexp(1);
  const long mag = static_cast<long>(b.to_double() * kLog2E) + 64 + bit_length(params.scale.get_num());
  MRange r;
  r.lo = exact_integer_bounds(
      [&](Precision p) { return affine_target(exp_interval(RealInterval(a), p), params, k, p); },
      Precision(mag), params.max_bits).floor;
  r.hi = exact_integer_bounds(
      [&](Precision p) { return affine_target(exp_interval(RealInterval(b), p), params, k, p); },
      Precision(mag), params.max_bits).ceil;
  return r;
}

std::optional<DangerInterval> danger_interval(std::uint64_t k, const mpz_class& m,
                                              const ConstructionParams& params, Precision p) {
  if (k == 0) throw DomainError("k must be positive");
  if (m < 1) return std::nullopt;
  const mpq_class q = target_quotient(k, m, params);
  if (q <= 0) return std::nullopt;
  // log q can be as large as the bit length of q; keep p.bits absolute bits.
  const long mag = bit_length(q.get_num()) + bit_length(q.get_den());
  const Precision wp(p.bits + 32 + bit_length(mpz_class(mag)), p.guard);
  const RealInterval kk = RealInterval::from_integer(to_mpz(k));
  const RealInterval center = div(ln_interval(q, wp), kk, wp);
  const RealInterval radius = div(params.psi_at(wp), RealInterval::from_integer(to_mpz(k) * m), wp);
  return DangerInterval{k, m, sub(center, radius, wp), add(center, radius, wp)};
}

namespace {

// floor / ceil of x * 2^level when decidable from the enclosure.
std::optional<mpz_class> decided_floor(const RealInterval& x, std::int64_t level) {
  const RealInterval s = ldexp(x, level);
  mpz_class f;
  mpfr_get_z(f.get_mpz_t(), s.hi_ptr(), MPFR_RNDD);
  if (mpfr_cmp_z(s.lo_ptr(), f.get_mpz_t()) >= 0) return f;
  return std::nullopt;
}

std::optional<mpz_class> decided_ceil(const RealInterval& x, std::int64_t level) {
  const RealInterval s = ldexp(x, level);
  mpz_class c;
  mpfr_get_z(c.get_mpz_t(), s.lo_ptr(), MPFR_RNDU);
  if (mpfr_cmp_z(s.hi_ptr(), c.get_mpz_t()) <= 0) return c;
  return std::nullopt;
}

}  // namespace

DyadicCover dyadic_cover(const DangerInterval& d, std::int64_t level, const ConstructionParams& params) {
  if (level < 0) throw DomainError("cover level must be non-negative");
  std::optional<mpz_class> a1 = decided_floor(d.lower, level);
  std::optional<mpz_class> a2 = decided_ceil(d.upper, level);
  Precision p(std::max<long>(static_cast<long>(level) + 64, 128));
  while (!a1 || !a2) {
    if (p.working() > params.max_bits) {
      throw UndecidableError("cover of A(" + std::to_string(d.k) + ", " + d.m.get_str() +
                                 ") undecided within the escalation budget",
                             d.enclosure().to_string(40));
    }
    const auto refined = danger_interval(d.k, d.m, params, p);
    if (!a1) a1 = decided_floor(refined->lower, level);
    if (!a2) a2 = decided_ceil(refined->upper, level);
    p = p.doubled();
  }
  return DyadicCover{*a1, *a2, level};
}

DyadicCover dyadic_cover(const mpq_class& lo, const mpq_class& hi, std::int64_t level) {
  if (level < 0) throw DomainError("cover level must be non-negative");
  if (lo >= hi) throw DomainError("cover of an empty interval");
  const mpq_class scale(mpz_class(1) << static_cast<mp_bitcnt_t>(level));
  return DyadicCover{exact_integer_bounds(mpq_class(lo * scale)).floor,
                     exact_integer_bounds(mpq_class(hi * scale)).ceil, level};
}

// ---------------------------------------------------------------------------
// Enumeration machinery

Precision sweep_precision(std::uint64_t k_max, const DyadicWindow& window,
                          const ConstructionParams& params) {
  const double top = std::max(window.hi.to_double(), 2 * params.eta.to_double());
  const double bits = static_cast<double>(k_max) * std::max(top, 0.0) * kLog2E;
  const long scale_bits = bit_length(params.scale.get_num()) - bit_length(params.scale.get_den()) + 2;
  return Precision(static_cast<long>(std::ceil(bits)) + std::max(0L, scale_bits) + 32);
}

KEnclosures k_enclosures(std::uint64_t k, const DyadicWindow& window, const ConstructionParams& params) {
  const Precision p = sweep_precision(k, window, params);
  KEnclosures ke;
  ke.k = k;
  ke.exp_lo = detail::exp_multiple(window.lo, k, p);
  ke.exp_hi = detail::exp_multiple(window.hi, k, p);
  ke.exp_eta = detail::exp_multiple(params.eta, k, p);
  ke.exp_2eta = mul(ke.exp_eta, ke.exp_eta, p);
  return ke;
}

struct KSweeper::State {
  State(const DyadicWindow& w, std::uint64_t k, Precision p, const ConstructionParams& params)
      : p(p), lo(w.lo, k, p), hi(w.hi, k, p), eta(params.eta, k, p) {}
  Precision p;
  detail::ExpSweep lo, hi, eta;
};

KSweeper::KSweeper(const DyadicWindow& window, std::uint64_t k_first, std::uint64_t k_max,
                   const ConstructionParams& params)
    : state_(std::make_unique<State>(window, k_first, sweep_precision(k_max, window, params), params)) {}

KSweeper::~KSweeper() = default;
KSweeper::KSweeper(KSweeper&&) noexcept = default;

KEnclosures KSweeper::current() const {
  KEnclosures ke;
  ke.k = state_->lo.k();
  ke.exp_lo = state_->lo.value();
  ke.exp_hi = state_->hi.value();
  ke.exp_eta = state_->eta.value();
  ke.exp_2eta = mul(ke.exp_eta, ke.exp_eta, state_->p);
  return ke;
}

void KSweeper::advance() {
  state_->lo.advance();
  state_->hi.advance();
  state_->eta.advance();
}

CandidateRange candidate_range(const KEnclosures& ke, const DyadicWindow& window,
                               const ConstructionParams& params) {
  (void)window;
  const mpfr_prec_t prec = std::max<mpfr_prec_t>(mpfr_get_prec(ke.exp_hi.hi_ptr()), 64);
  mpfr_srcptr psi_hi = params.psi.hi_ptr();
  const mpq_class& s = params.shift(ke.k);
  mpq_srcptr scale = params.scale.get_mpq_t();

  // Any m whose A(k, m) meets the window exceeds a e^(k lo) (1 - psi) + s.
  BigFloat t(prec);
  mpfr_ui_sub(t.get(), 1, psi_hi, MPFR_RNDD);
  mpfr_mul(t.get(), t.get(), ke.exp_lo.lo_ptr(), MPFR_RNDD);
  mpfr_mul_q(t.get(), t.get(), scale, MPFR_RNDD);
  mpz_class m1;
  mpfr_get_z(m1.get_mpz_t(), t.get(), MPFR_RNDD);
  if (m1 < 1) m1 = 1;

  // With r = psi / m1, e^(-psi/m) >= 1 - r and e^(psi/m) <= 1 + 2r.
  BigFloat r(64);
  mpfr_div_z(r.get(), psi_hi, m1.get_mpz_t(), MPFR_RNDU);

  BigFloat lo(prec), hi(prec);
  mpfr_ui_sub(lo.get(), 1, r.get(), MPFR_RNDD);
  mpfr_mul(lo.get(), lo.get(), ke.exp_lo.lo_ptr(), MPFR_RNDD);
  mpfr_mul_q(lo.get(), lo.get(), scale, MPFR_RNDD);
  mpfr_add_q(lo.get(), lo.get(), s.get_mpq_t(), MPFR_RNDD);

  mpfr_mul_2ui(hi.get(), r.get(), 1, MPFR_RNDU);
  mpfr_add_ui(hi.get(), hi.get(), 1, MPFR_RNDU);
  mpfr_mul(hi.get(), hi.get(), ke.exp_hi.hi_ptr(), MPFR_RNDU);
  mpfr_mul_q(hi.get(), hi.get(), scale, MPFR_RNDU);
  mpfr_add_q(hi.get(), hi.get(), s.get_mpq_t(), MPFR_RNDU);

  CandidateRange cr;
  mpfr_get_z(cr.first.get_mpz_t(), lo.get(), MPFR_RNDD);
  mpfr_get_z(cr.last.get_mpz_t(), hi.get(), MPFR_RNDU);
  if (cr.first < 1) cr.first = 1;

  // Clip to the admissible m-range, deciding its ends exactly only when the
  // enclosures cannot rule out an overlap.
  std::optional<MRange> range;
  BigFloat edge(prec);
  mpfr_mul_q(edge.get(), ke.exp_eta.hi_ptr(), scale, MPFR_RNDU);
  mpfr_add_q(edge.get(), edge.get(), s.get_mpq_t(), MPFR_RNDU);
  mpz_class bound;
  mpfr_get_z(bound.get_mpz_t(), edge.get(), MPFR_RNDD);
  if (cr.first <= bound) {
    range = m_range_for_k(ke.k, params);
    cr.first = std::max(cr.first, range->lo);
  }
  mpfr_mul_q(edge.get(), ke.exp_2eta.lo_ptr(), scale, MPFR_RNDD);
  mpfr_add_q(edge.get(), edge.get(), s.get_mpq_t(), MPFR_RNDD);
  mpfr_get_z(bound.get_mpz_t(), edge.get(), MPFR_RNDU);
  if (cr.last >= bound) {
    if (!range) range = m_range_for_k(ke.k, params);
    cr.last = std::min(cr.last, range->hi);
  }
  return cr;
}

bool danger_meets_window(std::uint64_t k, const mpz_class& m, const DyadicWindow& window,
                         const ConstructionParams& params, const KEnclosures* ke) {
  if (params.psi_zero) return false;
  const mpq_class q = target_quotient(k, m, params);
  if (q <= 0 || m < 1) return false;

  if (ke != nullptr) {
    const mpfr_prec_t prec = std::max<mpfr_prec_t>(mpfr_get_prec(ke->exp_hi.hi_ptr()), 64);
    BigFloat x(prec);
    // q e^(-psi/m) >= q (1 - psi/m): at or beyond e^(k hi) means no overlap.
    mpfr_div_z(x.get(), params.psi.hi_ptr(), m.get_mpz_t(), MPFR_RNDU);
    mpfr_ui_sub(x.get(), 1, x.get(), MPFR_RNDD);
    mpfr_mul_q(x.get(), x.get(), q.get_mpq_t(), MPFR_RNDD);
    if (mpfr_greaterequal_p(x.get(), ke->exp_hi.hi_ptr())) return false;
    // q e^(psi/m) <= q (1 + 2 psi/m): at or below e^(k lo) means no overlap.
    mpfr_div_z(x.get(), params.psi.hi_ptr(), m.get_mpz_t(), MPFR_RNDU);
    mpfr_mul_2ui(x.get(), x.get(), 1, MPFR_RNDU);
    mpfr_add_ui(x.get(), x.get(), 1, MPFR_RNDU);
    mpfr_mul_q(x.get(), x.get(), q.get_mpq_t(), MPFR_RNDU);
    if (mpfr_lessequal_p(x.get(), ke->exp_lo.lo_ptr())) return false;
    // Center strictly inside the window.
    if (mpfr_cmp_q(ke->exp_lo.hi_ptr(), q.get_mpq_t()) < 0 &&
        mpfr_cmp_q(ke->exp_hi.lo_ptr(), q.get_mpq_t()) > 0)
      return true;
  }

  std::optional<bool> below_hi, above_lo;  // lower end < hi, upper end > lo
  BigFloat whi(std::max<long>(window.hi.mantissa_bits(), MPFR_PREC_MIN));
  BigFloat wlo(std::max<long>(window.lo.mantissa_bits(), MPFR_PREC_MIN));
  window.hi.to_mpfr(whi.get(), MPFR_RNDN);
  window.lo.to_mpfr(wlo.get(), MPFR_RNDN);
  Precision p(std::max<long>(window_bits(window) + 64, 128));
  while (true) {
    if (p.working() > params.max_bits)
      throw UndecidableError("window test for A(" + std::to_string(k) + ", " + m.get_str() +
                                 ") undecided within the escalation budget",
                             "");
    const auto d = danger_interval(k, m, params, p);
    if (!below_hi) {
      if (mpfr_less_p(d->lower.hi_ptr(), whi.get())) below_hi = true;
      else if (mpfr_greaterequal_p(d->lower.lo_ptr(), whi.get())) below_hi = false;
    }
    if (!above_lo) {
      if (mpfr_greater_p(d->upper.lo_ptr(), wlo.get())) above_lo = true;
      else if (mpfr_lessequal_p(d->upper.hi_ptr(), wlo.get())) above_lo = false;
    }
    if ((below_hi && !*below_hi) || (above_lo && !*above_lo)) return false;
    if (below_hi && above_lo) return true;
    p = p.doubled();
  }
}

std::vector<mpz_class> dangerous_m_in_window(std::uint64_t k, const DyadicWindow& window,
                                             const ConstructionParams& params) {
  if (window.lo >= window.hi) throw DomainError("window must have positive length");
  const KEnclosures ke = k_enclosures(k, window, params);
  const CandidateRange cr = candidate_range(ke, window, params);
  if (cr.count() > (1 << 24)) throw DomainError("too many candidates to enumerate individually");
  std::vector<mpz_class> out;
  for (mpz_class m = cr.first; m <= cr.last; ++m)
    if (danger_meets_window(k, m, window, params, &ke)) out.push_back(m);
  return out;
}

namespace {

// Is lambda(cover) <= 4 lambda(A(k, m)) = 8 psi / (k m)?
bool ratio_certified(const DyadicCover& c, std::uint64_t k, const mpz_class& m,
                     const ConstructionParams& params) {
  const DyadicRational lhs = c.length() * DyadicRational(to_mpz(k) * m);
  BigFloat x(std::max<long>(lhs.mantissa_bits(), MPFR_PREC_MIN));
  lhs.to_mpfr(x.get(), MPFR_RNDN);
  BigFloat rhs(mpfr_get_prec(params.psi.lo_ptr()));
  mpfr_mul_ui(rhs.get(), params.psi.lo_ptr(), 8, MPFR_RNDD);
  return mpfr_lessequal_p(x.get(), rhs.get());
}

}  // namespace

CoverTally tally_covers(const KEnclosures& ke, const DyadicWindow& window, std::int64_t cover_level,
                        const ConstructionParams& params) {
  CoverTally tally;
  if (params.psi_zero) return tally;
  const CandidateRange cr = candidate_range(ke, window, params);
  tally.candidates = cr.count();
  if (cr.empty()) return tally;

  if (tally.candidates <= params.enumeration_limit) {
    const auto lo_units = window.lo.scaled_integer(cover_level);
    const auto hi_units = window.hi.scaled_integer(cover_level);
    if (!lo_units || !hi_units) throw DomainError("window is not on the cover grid");
    for (mpz_class m = cr.first; m <= cr.last; ++m) {
      if (!danger_meets_window(ke.k, m, window, params, &ke)) continue;
      const auto d = danger_interval(ke.k, m, params, Precision(cover_level + 64));
      const DyadicCover c = dyadic_cover(*d, cover_level, params);
      if (!ratio_certified(c, ke.k, m, params)) ++tally.ratio_failures;
      mpz_class s = std::max(c.a1, *lo_units), e = std::min(c.a2, *hi_units);
      if (s < e) tally.clipped.emplace_back(std::move(s), std::move(e));
    }
    tally.measure_upper = DyadicRational::on_grid(union_length(tally.clipped), cover_level);
    return tally;
  }

  // Too many to enumerate: every cover is at most 2 psi/(k m) + 2^(1 - level) long.
  tally.exact = false;
  BigFloat per(64);
  mpz_class km = to_mpz(ke.k) * std::max(cr.first, mpz_class(1));
  mpfr_div_z(per.get(), params.psi.hi_ptr(), km.get_mpz_t(), MPFR_RNDU);
  mpfr_mul_2ui(per.get(), per.get(), 1, MPFR_RNDU);
  BigFloat grid(64);
  mpfr_set_ui_2exp(grid.get(), 1, static_cast<mpfr_exp_t>(1 - cover_level), MPFR_RNDN);
  mpfr_add(per.get(), per.get(), grid.get(), MPFR_RNDU);
  DyadicRational total = DyadicRational::from_mpfr(per.get()) * DyadicRational(tally.candidates);
  tally.measure_upper = std::min(total, window.length());

  // Sufficient condition for the length ratio: k m <= 3 psi 2^level.
  BigFloat cap(mpfr_get_prec(params.psi.lo_ptr()));
  mpfr_mul_ui(cap.get(), params.psi.lo_ptr(), 3, MPFR_RNDD);
  mpfr_mul_2si(cap.get(), cap.get(), static_cast<long>(cover_level), MPFR_RNDD);
  const mpz_class km_max = to_mpz(ke.k) * cr.last;
  if (mpfr_cmp_z(cap.get(), km_max.get_mpz_t()) < 0) ++tally.ratio_failures;
  return tally;
}

std::optional<DyadicCover> first_hit(const KEnclosures& ke, const DyadicWindow& cell,
                                     std::int64_t level, const ConstructionParams& params,
                                     std::size_t* ratio_failures) {
  if (params.psi_zero) return std::nullopt;
  const CandidateRange cr = candidate_range(ke, cell, params);
  for (mpz_class m = cr.first; m <= cr.last; ++m) {
    if (!danger_meets_window(ke.k, m, cell, params, &ke)) continue;
    const auto d = danger_interval(ke.k, m, params, Precision(level + 64));
    DyadicCover c = dyadic_cover(*d, level, params);
    if (ratio_failures != nullptr && !ratio_certified(c, ke.k, m, params)) ++*ratio_failures;
    return c;
  }
  return std::nullopt;
}

mpz_class union_length(std::vector<std::pair<mpz_class, mpz_class>> parts) {
  std::sort(parts.begin(), parts.end());
  mpz_class total = 0;
  bool open = false;
  mpz_class cur_s, cur_e;
  for (auto& [s, e] : parts) {
    if (s >= e) continue;
    if (!open || s > cur_e) {
      if (open) total += cur_e - cur_s;
      cur_s = s;
      cur_e = e;
      open = true;
    } else if (e > cur_e) {
      cur_e = e;
    }
  }
  if (open) total += cur_e - cur_s;
  return total;
}

ParamOverrides overrides_of(const ConstructionParams& p) {
  ParamOverrides o;
  o.a_psi = p.a_psi;
  o.h_const_log2 = p.h_const_log2;
  if (p.h_overridden) o.h = p.h;
  if (p.first_level_overridden) o.first_level = p.first_level;
  o.zero_psi = p.psi_zero;
  o.mode = p.mode;
  o.scale = p.scale;
  o.shifts = p.shifts;
  o.scale_bound = p.scale_bound;
  o.lookahead_span = p.lookahead_span;
  o.max_bits = p.max_bits;
  o.enumeration_limit = p.enumeration_limit;
  return o;
}

}  // namespace fracpow
