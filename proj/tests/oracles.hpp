// Brute-force reference computations shared by the unit and acceptance
// tests. They avoid the library's candidate localization and sweeps: every m
// is tried, every sub-cell is rasterized, every power is exact.

#ifndef FRACPOW_TESTS_ORACLES_HPP
#define FRACPOW_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "fracpow/danger.hpp"
#include "fracpow/verify.hpp"

namespace oracle {

using namespace fracpow;

// Does A(k, m) meet the open window? Decided on direct enclosures of the
// interval ends; nullopt if 4096 bits do not separate them.
inline std::optional<bool> meets(std::uint64_t k, const mpz_class& m, const DyadicWindow& w,
                                 const ConstructionParams& params) {
  if (params.unit_targets() && !params.psi_zero && m.fits_slong_p()) {
    // Doubles carry ~1e-16 relative error here; a 1e-9 margin settles most m.
    const double md = static_cast<double>(m.get_si());
    const double c = std::log(md) / static_cast<double>(k);
    const double half = params.psi.mid_double() / (static_cast<double>(k) * md);
    const double lo = w.lo.to_double(), hi = w.hi.to_double();
    if (c - half > hi + 1e-9 || c + half < lo - 1e-9) return false;
    if (c - half < hi - 1e-9 && c + half > lo + 1e-9) return true;
  }
  for (long bits = 256; bits <= 4096; bits *= 2) {
    const auto d = danger_interval(k, m, params, Precision(bits));
    if (!d) return false;
    const RealInterval lo(w.lo), hi(w.hi);
    // meets iff lower < w.hi and upper > w.lo
    const bool below_known = mpfr_less_p(d->lower.hi_ptr(), hi.lo_ptr());
    const bool below_fails = mpfr_greaterequal_p(d->lower.lo_ptr(), hi.hi_ptr());
    const bool above_known = mpfr_greater_p(d->upper.lo_ptr(), lo.hi_ptr());
    const bool above_fails = mpfr_lessequal_p(d->upper.hi_ptr(), lo.lo_ptr());
    if (below_fails || above_fails) return false;
    if (below_known && above_known) return true;
  }
  return std::nullopt;
}

// Every m of the m-range, tested one by one.
inline std::vector<mpz_class> dangerous_m_exhaustive(std::uint64_t k, const DyadicWindow& w,
                                                     const ConstructionParams& params, bool* undecided = nullptr) {
  std::vector<mpz_class> out;
  const MRange r = m_range_for_k(k, params);
  for (mpz_class m = r.lo; m <= r.hi; ++m) {
    const auto hit = meets(k, m, w, params);
    if (!hit) {
      if (undecided) *undecided = true;
      continue;
    }
    if (*hit) out.push_back(m);
  }
  return out;
}

// Covered measure of J, in units of 2^-(level + extra), by rasterizing J at
// that mesh against the level-l covers of every dangerous (k, m).
inline mpz_class rasterized_cover(const DyadicWindow& J, KRange range, std::int64_t level,
                                  const ConstructionParams& params, int extra = 4) {
  const std::int64_t mesh = level + extra;
  const mpz_class first = *J.lo.scaled_integer(mesh);
  const mpz_class last = *J.hi.scaled_integer(mesh);
  const std::size_t cells = mpz_class(last - first).get_ui();
  std::vector<char> covered(cells, 0);
  for (std::uint64_t k = range.lo + 1; k <= range.hi; ++k) {
    for (const mpz_class& m : dangerous_m_exhaustive(k, J, params)) {
      const auto d = danger_interval(k, m, params, Precision(256));
      const DyadicCover c = dyadic_cover(*d, level, params);
      const mpz_class a = c.a1 << extra, b = c.a2 << extra;  // on the mesh grid
      for (std::size_t i = 0; i < cells; ++i) {
        const mpz_class cell = first + static_cast<unsigned long>(i);
        if (cell >= a && cell + 1 <= b) covered[i] = 1;
      }
    }
  }
  mpz_class total = 0;
  for (char c : covered) total += c;
  return total;
}

struct ExactMin {
  mpq_class dist;
  std::uint64_t k = 0;
};

// min over k <= K of ||base^k||, by exact rational powering.
inline ExactMin exact_min_distance(const mpq_class& base, std::uint64_t K) {
  ExactMin best{mpq_class(1), 0};
  mpq_class x = 1;
  for (std::uint64_t k = 1; k <= K; ++k) {
    x *= base;
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    const mpq_class frac = x - f;
    const mpq_class d = std::min(frac, mpq_class(1 - frac));
    if (best.k == 0 || d < best.dist) best = {d, k};
  }
  return best;
}

// Toy parameter sets: eta = 2^-t, small psi constant, short blocks.
inline ConstructionParams toy_params(int t = 3) {
  ParamOverrides o;
  o.a_psi = 4;
  o.h_const_log2 = -1;
  return params_from_t(t, o);
}

}  // namespace oracle

#endif  // FRACPOW_TESTS_ORACLES_HPP
