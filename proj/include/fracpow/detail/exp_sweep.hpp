#ifndef FRACPOW_DETAIL_EXP_SWEEP_HPP
#define FRACPOW_DETAIL_EXP_SWEEP_HPP

#include <cstdint>

#include "fracpow/mpreal.hpp"

namespace fracpow::detail {

inline constexpr std::uint64_t kReseedInterval = 4096;

/// Encloses e^(k*x) directly.
RealInterval exp_multiple(const DyadicRational& x, std::uint64_t k, Precision p);

/// Encloses e^(k*x) for consecutive k by repeated multiplication with an
/// enclosure of e^x. The running product is re-seeded from a direct
/// exponential whenever k is a multiple of kReseedInterval, so the value at
/// a given k depends only on k and the starting point of the sweep when that
/// start lies in the same reseed block.
class ExpSweep {
 public:
  ExpSweep(DyadicRational x, std::uint64_t k_first, Precision p);

  std::uint64_t k() const { return k_; }
  mpfr_srcptr lo() const { return lo_.get(); }
  mpfr_srcptr hi() const { return hi_.get(); }
  RealInterval value() const { return RealInterval::from_bounds(lo_, hi_); }
  void advance();

 private:
  void seed();

  DyadicRational x_;
  std::uint64_t k_;
  Precision p_;
  BigFloat step_lo_, step_hi_, lo_, hi_;
};

}  // namespace fracpow::detail

#endif  // FRACPOW_DETAIL_EXP_SWEEP_HPP
