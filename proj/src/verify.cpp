#include "fracpow/verify.hpp"

#include <algorithm>
#include <cmath>

#include "fracpow/detail/parallel.hpp"

namespace fracpow {

namespace {

constexpr double kLog2E = 1.4426950408889634;
constexpr std::uint64_t kReseed = detail::kReseedInterval;

mpz_class to_mpz(std::uint64_t v) { return mpz_class(static_cast<unsigned long>(v)); }

long bits_of(const mpz_class& z) { return z == 0 ? 0 : static_cast<long>(mpz_sizeinbase(z.get_mpz_t(), 2)); }

const mpq_class& shift_at(const std::vector<mpq_class>& shifts, std::uint64_t k) {
  static const mpq_class zero = 0;
  return k >= 1 && k <= shifts.size() ? shifts[k - 1] : zero;
}

RealInterval rational(const mpq_class& q, Precision p) { return RealInterval::from_rational(q, p); }

// Lower bound on the distance; exact when the enclosure is a point.
struct KDistance {
  std::uint64_t k;
  RealInterval d;
};

bool better(const KDistance& a, const KDistance& b) {
  const int c = mpfr_cmp(a.d.lo_ptr(), b.d.lo_ptr());
  return c < 0 || (c == 0 && a.k < b.k);
}

}  // namespace

RealInterval distance_to_integer(const RealInterval& y) {
  mpz_class f;
  mpfr_get_z(f.get_mpz_t(), y.lo_ptr(), MPFR_RNDD);
  const DyadicRational lo = y.lo(), hi = y.hi();
  const DyadicRational fd(f);
  const DyadicRational half = DyadicRational::pow2(-1);
  auto dist = [&](const DyadicRational& x) {
    const DyadicRational frac = x - fd;
    return std::min(frac, DyadicRational(1) - frac);
  };
  if (hi >= fd + DyadicRational(1)) {
    // An integer lies inside.
    const DyadicRational sup = (hi - lo >= DyadicRational(1) || (lo <= fd + half) || (hi >= fd + DyadicRational(1) + half))
                                   ? half
                                   : std::max(dist(lo), hi - fd - DyadicRational(1));
    return RealInterval(DyadicRational(0), sup);
  }
  if (lo == fd) {
    return RealInterval(DyadicRational(0), lo <= fd + half && hi >= fd + half ? half : dist(hi));
  }
  const DyadicRational inf = std::min(lo - fd, fd + DyadicRational(1) - hi);
  const DyadicRational sup = (lo <= fd + half && hi >= fd + half) ? half : std::max(dist(lo), dist(hi));
  return RealInterval(inf, sup);
}

ScanResult min_distance_scan(const Refiner& base, const mpq_class& xi, const std::vector<mpq_class>& shifts,
                             std::uint64_t K, const ScanOptions& options) {
  if (K == 0) throw DomainError("scan bound K must be at least 1");
  if (xi <= 0) throw DomainError("scale must be positive");
  const RealInterval probe = base(Precision(64));
  if (mpfr_cmp_ui(probe.lo_ptr(), 1) <= 0) throw DomainError("base must exceed 1");

  const double log2_base = std::log2(probe.mid_double());
  const double log2_xi = std::log2(std::max(1.0, xi.get_d()));
  auto chunk_precision = [&](std::uint64_t k_last) {
    const double top = static_cast<double>(k_last) * log2_base + log2_xi;
    return Precision(static_cast<long>(std::ceil(top)) + options.fraction_bits + 32 +
                     static_cast<long>(std::log2(static_cast<double>(kReseed))));
  };
  auto direct = [&](std::uint64_t k, Precision p) {
    const RealInterval x = pow_interval(base(p), static_cast<unsigned long>(k), p);
    return add(mul(rational(xi, p), x, p), rational(shift_at(shifts, k), p), p);
  };

  struct Part {
    std::optional<KDistance> best;
    std::uint64_t escalations = 0;
    std::optional<std::uint64_t> undecided;
  };
  const auto chunks = detail::k_chunks(1, K);
  const auto parts = detail::parallel_map<Part>(chunks, options.threads, [&](const detail::KChunk& c) {
    Part part;
    const Precision p = chunk_precision(c.last);
    const RealInterval b = base(p);
    const RealInterval scale = rational(xi, p);
    RealInterval x = pow_interval(b, static_cast<unsigned long>(c.first), p);
    for (std::uint64_t k = c.first;; ++k) {
      RealInterval y = add(mul(scale, x, p), rational(shift_at(shifts, k), p), p);
      RealInterval d = distance_to_integer(y);
      // A straddled integer: refine from the base directly.
      Precision q = p;
      DyadicRational width = y.width();
      while (d.lo().is_zero() && !y.is_point()) {
        q = q.doubled();
        if (q.working() > options.max_bits) {
          if (!part.undecided) part.undecided = k;
          break;
        }
        ++part.escalations;
        y = direct(k, q);
        d = distance_to_integer(y);
        const DyadicRational w = y.width();
        if (w.ldexp(1) > width) break;  // the base enclosure no longer tightens
        width = w;
      }
      KDistance kd{k, d};
      if (!part.best || better(kd, *part.best)) part.best = kd;
      if (k == c.last) break;
      x = mul(x, b, p);
    }
    return part;
  });

  ScanResult out;
  out.K = K;
  std::optional<KDistance> best;
  for (const Part& part : parts) {
    out.escalations += part.escalations;
    if (part.undecided && !out.undecided_k) out.undecided_k = part.undecided;
    if (part.best && (!best || better(*part.best, *best))) best = part.best;
  }
  out.complete = !out.undecided_k.has_value();
  out.min_dist = best->d;
  out.argmin_k = best->k;
  return out;
}

ScanResult min_distance_scan(const mpq_class& base, std::uint64_t K, const ScanOptions& options) {
  return min_distance_scan([base](Precision p) { return RealInterval::from_rational(base, p); }, 1, {}, K,
                           options);
}

RealInterval theorem1_threshold(const mpq_class& epsilon, const mpq_class& C, Precision p) {
  if (epsilon <= 0 || epsilon >= 1) throw DomainError("epsilon must lie in (0, 1)");
  const RealInterval abs_ln = negate(ln_interval(epsilon, p));
  return div(mul(rational(C, p), rational(epsilon, p), p), abs_ln, p);
}

Verdict check_theorem1_bound(const mpq_class& epsilon, std::uint64_t K, const mpq_class& C,
                             const ScanOptions& options, ScanResult* scan_out) {
  if (epsilon <= 0 || epsilon >= mpq_class(1, 2)) throw DomainError("epsilon must lie in (0, 1/2)");
  const ScanResult scan = min_distance_scan(mpq_class(1 + epsilon), K, options);
  if (scan_out) *scan_out = scan;
  const Precision p(128);
  const RealInterval threshold = theorem1_threshold(epsilon, C, p);
  Verdict v;
  v.margin = div(scan.min_dist, threshold, p);
  if (mpfr_cmp(scan.min_dist.lo_ptr(), threshold.hi_ptr()) <= 0) {
    return Verdict::reject("distance", "min distance " + scan.min_dist.to_string(8) + " at k = " +
                                           std::to_string(scan.argmin_k) + " does not exceed " +
                                           threshold.to_string(8));
  }
  return v;
}

Verdict check_band_membership(const RealInterval& alpha, const mpq_class& xi, const BandSequence& bands,
                              const mpq_class& epsilon, std::uint64_t N) {
  const mpq_class lo = alpha.lo().to_rational(), hi = alpha.hi().to_rational();
  if (lo <= 1) throw DomainError("alpha must exceed 1");
  if (xi <= 0) throw DomainError("xi must be positive");
  mpq_class plo = 1, phi = 1;
  std::optional<mpq_class> slack;
  for (std::uint64_t n = 1; n <= N; ++n) {
    plo *= lo;
    phi *= hi;
    plo.canonicalize();
    phi.canonicalize();
    const mpq_class ylo = xi * plo, yhi = xi * phi;
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), ylo.get_num_mpz_t(), ylo.get_den_mpz_t());
    const mpq_class& a = bands.at(n);
    const mpq_class s1 = ylo - f - a;
    const mpq_class s2 = f + a + epsilon - yhi;
    if (s1 < 0 || s2 < 0) {
      return Verdict::reject("band", "n = " + std::to_string(n) + ": fractional part leaves [" +
                                         format_rational(a) + ", " + format_rational(a + epsilon) + "]");
    }
    const mpq_class s = std::min(s1, s2);
    if (!slack || s < *slack) slack = s;
  }
  Verdict v;
  if (slack) v.margin = RealInterval::from_rational(*slack, Precision(128));
  return v;
}

std::optional<DangerHit> find_danger_hit(const DyadicWindow& cell, KRange range, const ConstructionParams& params) {
  if (range.empty() || params.psi_zero) return std::nullopt;
  const DyadicRational L = cell.lo, U = cell.hi;
  const long scale_bits = std::max(0L, bits_of(params.scale.get_num()) - bits_of(params.scale.get_den()) + 1);
  const Precision p(static_cast<long>(std::ceil(static_cast<double>(range.hi) *
                                                std::max(U.to_double(), 2 * params.eta.to_double()) * kLog2E)) +
                    scale_bits + 64);
  const RealInterval psi = params.psi_at(p);
  const RealInterval scale = rational(params.scale, p);
  RealInterval eL, eU, eEta, stepL, stepU, stepEta;
  auto seed = [&](std::uint64_t k) {
    const DyadicRational kk(to_mpz(k));
    eL = exp_interval(RealInterval(L * kk), p);
    eU = exp_interval(RealInterval(U * kk), p);
    eEta = exp_interval(RealInterval(params.eta * kk), p);
  };
  stepL = exp_interval(RealInterval(L), p);
  stepU = exp_interval(RealInterval(U), p);
  stepEta = exp_interval(RealInterval(params.eta), p);

  // Does A(k, m) meet (L, U)?  <=>  q e^(-psi/m) < e^(kU) and q e^(psi/m) > e^(kL).
  auto meets = [&](std::uint64_t k, const mpz_class& m) -> bool {
    mpq_class q = (mpq_class(m) - params.shift(k)) / params.scale;
    q.canonicalize();
    std::optional<bool> below, above;
    for (Precision r = p;; r = r.doubled()) {
      if (r.working() > params.max_bits)
        throw UndecidableError("danger test undecided at k = " + std::to_string(k), "");
      const DyadicRational kk(to_mpz(k));
      const RealInterval u = r.bits == p.bits ? eU : exp_interval(RealInterval(U * kk), r);
      const RealInterval l = r.bits == p.bits ? eL : exp_interval(RealInterval(L * kk), r);
      const RealInterval t = div(params.psi_at(r), RealInterval::from_integer(m), r);
      const RealInterval qq = rational(q, r);
      const RealInterval left = mul(qq, exp_interval(negate(t), r), r);
      const RealInterval right = mul(qq, exp_interval(t, r), r);
      if (!below) {
        if (mpfr_less_p(left.hi_ptr(), u.lo_ptr())) below = true;
        else if (mpfr_greaterequal_p(left.lo_ptr(), u.hi_ptr())) below = false;
      }
      if (!above) {
        if (mpfr_greater_p(right.lo_ptr(), l.hi_ptr())) above = true;
        else if (mpfr_lessequal_p(right.hi_ptr(), l.lo_ptr())) above = false;
      }
      if ((below && !*below) || (above && !*above)) return false;
      if (below && above) return true;
    }
  };

  // m ranges over [floor(a e^(eta k) + s), ceil(a e^(2 eta k) + s)].
  auto in_range = [&](std::uint64_t k, const mpz_class& m) {
    const DyadicRational kk(to_mpz(k));
    const mpq_class& s = params.shift(k);
    auto target = [&](const DyadicRational& x) {
      return [&, x](Precision r) {
        return add(mul(rational(params.scale, r), exp_interval(RealInterval(x), r), r), rational(s, r), r);
      };
    };
    // Decided from the swept enclosure unless m sits next to an end.
    BigFloat e(p.working());
    mpfr_mul(e.get(), eEta.hi_ptr(), scale.hi_ptr(), MPFR_RNDU);
    mpfr_add_q(e.get(), e.get(), s.get_mpq_t(), MPFR_RNDU);
    const bool above_lo = mpfr_cmp_z(e.get(), m.get_mpz_t()) < 0;
    mpfr_sqr(e.get(), eEta.lo_ptr(), MPFR_RNDD);
    mpfr_mul(e.get(), e.get(), scale.lo_ptr(), MPFR_RNDD);
    mpfr_add_q(e.get(), e.get(), s.get_mpq_t(), MPFR_RNDD);
    const bool below_hi = mpfr_cmp_z(e.get(), m.get_mpz_t()) > 0;
    if (above_lo && below_hi) return true;
    const mpz_class lo = exact_integer_bounds(target(params.eta * kk), p, params.max_bits).floor;
    const mpz_class hi = exact_integer_bounds(target(params.eta.ldexp(1) * kk), p, params.max_bits).ceil;
    return lo <= m && m <= hi;
  };

  BigFloat t(p.working());
  seed(range.lo + 1);
  for (std::uint64_t k = range.lo + 1; k <= range.hi; ++k) {
    if (k != range.lo + 1) {
      if (k % kReseed == 0) {
        seed(k);
      } else {
        eL = mul(eL, stepL, p);
        eU = mul(eU, stepU, p);
        eEta = mul(eEta, stepEta, p);
      }
    }
    const mpq_class& s = params.shift(k);
    // Candidates satisfy m >= m0, so
    // e^(-psi/m) >= 1 - psi/m0 and e^(psi/m) <= 1 + 2 psi/m0.
    mpfr_mul(t.get(), eEta.lo_ptr(), scale.lo_ptr(), MPFR_RNDD);
    mpfr_add_q(t.get(), t.get(), s.get_mpq_t(), MPFR_RNDD);
    mpz_class m0;
    mpfr_get_z(m0.get_mpz_t(), t.get(), MPFR_RNDD);
    m0 = std::max(m0, mpz_class(1));
    // psi/m <= psi also gives m > a e^(kL) (1 - psi) + s, usually far above m0.
    mpfr_ui_sub(t.get(), 1, psi.hi_ptr(), MPFR_RNDD);
    mpfr_mul(t.get(), t.get(), eL.lo_ptr(), MPFR_RNDD);
    mpfr_mul(t.get(), t.get(), scale.lo_ptr(), MPFR_RNDD);
    mpfr_add_q(t.get(), t.get(), s.get_mpq_t(), MPFR_RNDD);
    mpz_class m1;
    mpfr_get_z(m1.get_mpz_t(), t.get(), MPFR_RNDD);
    m0 = std::max(m0, m1);
    BigFloat rel(p.working());
    mpfr_div_z(rel.get(), psi.hi_ptr(), m0.get_mpz_t(), MPFR_RNDU);
    mpfr_ui_sub(t.get(), 1, rel.get(), MPFR_RNDD);
    mpfr_mul(t.get(), t.get(), eL.lo_ptr(), MPFR_RNDD);
    mpfr_mul(t.get(), t.get(), scale.lo_ptr(), MPFR_RNDD);
    mpfr_add_q(t.get(), t.get(), s.get_mpq_t(), MPFR_RNDD);
    mpz_class first;
    mpfr_get_z(first.get_mpz_t(), t.get(), MPFR_RNDD);
    ++first;  // both conditions are strict
    mpfr_mul_2ui(t.get(), rel.get(), 1, MPFR_RNDU);
    mpfr_add_ui(t.get(), t.get(), 1, MPFR_RNDU);
    mpfr_mul(t.get(), t.get(), eU.hi_ptr(), MPFR_RNDU);
    mpfr_mul(t.get(), t.get(), scale.hi_ptr(), MPFR_RNDU);
    mpfr_add_q(t.get(), t.get(), s.get_mpq_t(), MPFR_RNDU);
    mpz_class last;
    mpfr_get_z(last.get_mpz_t(), t.get(), MPFR_RNDU);
    --last;
    first = std::max(first, m0);
    if (last - first > (1 << 20)) throw DomainError("too many danger candidates at k = " + std::to_string(k));
    for (mpz_class m = first; m <= last; ++m) {
      if (meets(k, m) && in_range(k, m)) return DangerHit{k, m};
    }
  }
  return std::nullopt;
}

namespace {

std::string step_tag(std::uint64_t n) { return "step " + std::to_string(n) + ": "; }

// ceil(log2(4 k exp(anchor k) / psi)), evaluated here rather than borrowed.
std::int64_t schedule_level(const DyadicRational& anchor, std::uint64_t k, const ConstructionParams& params) {
  const DyadicRational x = anchor * DyadicRational(to_mpz(k));
  const long mag = static_cast<long>(std::max(0.0, x.to_double()) * kLog2E) + 64;
  return ceil_log2_escalating(
      [&](Precision p) {
        const RealInterval v = mul(RealInterval(DyadicRational(to_mpz(4 * k))), exp_interval(RealInterval(x), p), p);
        return div(v, params.psi_at(p), p);
      },
      Precision(mag), params.max_bits);
}

bool same(const RealInterval& a, const RealInterval& b) { return a.lo() == b.lo() && a.hi() == b.hi(); }

bool params_match(const ConstructionParams& a, const ConstructionParams& b) {
  if (a.t != b.t || a.h != b.h || a.first_level != b.first_level || a.a_psi != b.a_psi ||
      a.psi_zero != b.psi_zero || a.mode != b.mode || a.scale != b.scale || a.shifts != b.shifts ||
      !(a.eta == b.eta) || !same(a.psi, b.psi) || a.feasibility.size() != b.feasibility.size())
    return false;
  for (std::size_t i = 0; i < a.feasibility.size(); ++i)
    if (a.feasibility[i].passed != b.feasibility[i].passed || a.feasibility[i].name != b.feasibility[i].name)
      return false;
  return true;
}


}  // namespace

Verdict verify_chain(const Chain& chain, const CertificateCheckOptions& options, ScanResult* scan_out) {
  const ConstructionParams& params = chain.params;
  const bool strict = chain.strict;
  if (chain.steps.empty()) return Verdict::reject("params", "no steps recorded");

  ConstructionParams fresh;
  try {
    fresh = params_from_t(params.t, overrides_of(params));
  } catch (const DomainError& e) {
    return Verdict::reject("params", e.what());
  }
  if (!params_match(fresh, params)) return Verdict::reject("params", "recorded parameters do not reproduce");
  if (strict && !params.feasible()) return Verdict::reject("params", "strict certificate with failing parameter checks");

  BigFloat sixteen_psi(mpfr_get_prec(params.psi.lo_ptr()));
  mpfr_mul_ui(sixteen_psi.get(), params.psi.lo_ptr(), 16, MPFR_RNDD);

  for (std::size_t idx = 0; idx < chain.steps.size(); ++idx) {
    const StepRecord& s = chain.steps[idx];
    const std::uint64_t n = idx + 1;
    const std::string tag = step_tag(n);
    if (s.n != n) return Verdict::reject("schedule", tag + "step index out of order");

    // Level gaps to the current and the look-ahead level.
    if (strict) {
      if (n == 1 && s.level < 5 * static_cast<std::int64_t>(params.t))
        return Verdict::reject("level_gap", tag + "l_1 below 5t");
      if (n >= 2) {
        if (auto gap = check_level_gap(chain.steps[idx - 1].level, s.level, params))
          return Verdict::reject("level_gap", tag + *gap);
      }
      if (auto gap = check_level_gap(s.level, s.lookahead_level, params))
        return Verdict::reject("level_gap", tag + "look-ahead " + *gap);
    }

    // Schedule.
    const std::uint64_t k_n = params.k_at(n);
    const KRange expect_checked{n == 1 ? 0 : params.k_at(n - 1), k_n};
    const KRange expect_lookahead{k_n, params.lookahead_end(n)};
    if (!(s.checked == expect_checked) || !(s.lookahead == expect_lookahead))
      return Verdict::reject("schedule", tag + "recorded k-ranges differ from the schedule");
    std::int64_t level = 0, next = 0;
    if (params.psi_zero) {
      level = params.first_level + 2 * static_cast<std::int64_t>(params.t) * static_cast<std::int64_t>(n - 1);
      next = level + 2 * static_cast<std::int64_t>(params.t);
    } else {
      level = n == 1 ? params.first_level
              : n == 2 ? chain.steps[0].lookahead_level
                       : schedule_level(chain.steps[n - 3].W() + DyadicRational::pow2(-chain.steps[n - 3].level),
                                        params.k_at(n), params);
      const StepRecord& anchor = n == 1 ? s : chain.steps[n - 2];
      next = schedule_level(anchor.W() + DyadicRational::pow2(-anchor.level), params.k_at(n + 1), params);
    }
    if (s.level != level) return Verdict::reject("schedule", tag + "l_n does not match the schedule");
    if (s.lookahead_level != next) return Verdict::reject("schedule", tag + "look-ahead level does not match");

    // Grid and nesting.
    const DyadicWindow J = s.interval();
    if (n == 1) {
      const DyadicRational floor_w = params.eta + params.eta.ldexp(-6);
      if (J.lo < floor_w || J.hi > params.eta.ldexp(1))
        return Verdict::reject("grid", tag + "J_1 outside [(1 + 2^-6) eta, 2 eta]");
    } else {
      const DyadicWindow P = chain.steps[idx - 1].interval();
      if (J.lo < P.lo || J.hi > P.hi) return Verdict::reject("nested", tag + "J_n is not inside J_{n-1}");
    }

    // (i): no cover at level l_n meets J_n.
    if (auto hit = find_danger_hit(J, s.checked, params)) {
      return Verdict::reject("condition_i", tag + "J_n meets the cover of A(" + std::to_string(hit->k) + ", " +
                                                hit->m.get_str() + ")");
    }

    // (ii): at least half of J_n survives the look-ahead covers.
    const SurvivorMeasure sm = survivor_measure(J, s.lookahead, s.lookahead_level, params, options.threads);
    if (!sm.at_least_half()) return Verdict::reject("condition_ii", tag + "less than half of J_n survives");
    if (!(sm.covered_lo == s.covered_measure.lo()) || !(sm.covered_hi == s.covered_measure.hi()))
      return Verdict::reject("condition_ii", tag + "recorded covered measure does not reproduce");

    // Ratio of covered measure to window length, and the cover-length ratio.
    if (n >= 2 && !params.psi_zero) {
      const DyadicWindow P = chain.steps[idx - 1].interval();
      const RealInterval ratio = max_cover_ratio(P, k_n, std::max(k_n, params.lookahead_end(n)), s.lookahead_level,
                                                 params, options.threads);
      if (!s.lemma1_max_ratio || !same(ratio, *s.lemma1_max_ratio))
        return Verdict::reject("lemma1", tag + "recorded cover ratio does not reproduce");
      if (strict && !mpfr_less_p(ratio.hi_ptr(), sixteen_psi.get()))
        return Verdict::reject("lemma1", tag + "cover ratio " + ratio.to_string(6) + " not below 16 psi");
    }
    if (strict) {
      const DyadicWindow ratio_window = n == 1 ? J : chain.steps[idx - 1].interval();
      bool ok = cover_ratio_certified(ratio_window, params.lookahead_end(n), s.lookahead_level, params);
      if (n == 1)
        ok = ok && cover_ratio_certified({params.eta, params.eta.ldexp(1)}, k_n, s.level, params);
      if (!ok) return Verdict::reject("cover_ratio", tag + "cover length ratio not certified");
    }
  }

  // Epsilon: the representative must map into J_N, the enclosure must reproduce.
  const StepRecord& last = chain.steps.back();
  const DyadicWindow JN = last.interval();
  if (!(chain.xi_enclosure.lo() == JN.lo) || !(chain.xi_enclosure.hi() == JN.hi))
    return Verdict::reject("epsilon", "xi enclosure differs from J_N");
  const Precision pe(last.level + 64);
  const RealInterval eps = sub(exp_interval(RealInterval(JN.lo, JN.hi), pe), RealInterval(DyadicRational(1)), pe);
  if (!same(eps, chain.epsilon_enclosure)) return Verdict::reject("epsilon", "epsilon enclosure does not reproduce");
  const DyadicRational base = chain.epsilon_representative + DyadicRational(1);
  if (!chain.epsilon_enclosure.contains(chain.epsilon_representative))
    return Verdict::reject("epsilon", "epsilon representative outside its enclosure");
  {
    const RealInterval back = ln_interval(RealInterval(base), Precision(last.level + 64));
    if (!(JN.lo < back.lo() && back.hi() < JN.hi))
      return Verdict::reject("epsilon", "ln(1 + eps) of the representative is not inside J_N");
  }

  if (chain.k_max != params.k_at(chain.steps.size()))
    return Verdict::reject("guarantee", "recorded k range differs from k_N");
  if (!(chain.guarantee == distance_guarantee(params, chain.k_max)))
    return Verdict::reject("guarantee", "recorded distance guarantee does not reproduce");

  Verdict v;
  if (options.scan_distance) {
    ScanOptions so;
    so.threads = options.threads;
    so.max_bits = params.max_bits;
    const ScanResult scan = min_distance_scan([&](Precision) { return RealInterval(base); }, params.scale,
                                              params.shifts, chain.k_max, so);
    if (scan_out) *scan_out = scan;
    v.margin = div(scan.min_dist, RealInterval(chain.guarantee), Precision(128));
    if (DyadicRational(scan.min_dist.lo()) < chain.guarantee) {
      return Verdict::reject("distance", "min distance " + scan.min_dist.to_string(8) + " at k = " +
                                             std::to_string(scan.argmin_k) + " is below the guarantee " +
                                             chain.guarantee.to_string(8));
    }
  }
  return v;
}

}  // namespace fracpow
