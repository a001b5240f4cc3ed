#include "fracpow/detail/exp_sweep.hpp"

namespace fracpow::detail {

RealInterval exp_multiple(const DyadicRational& x, std::uint64_t k, Precision p) {
  const DyadicRational kx = x * DyadicRational(mpz_class(static_cast<unsigned long>(k)));
  return exp_interval(RealInterval(kx), p);
}

ExpSweep::ExpSweep(DyadicRational x, std::uint64_t k_first, Precision p)
    : x_(std::move(x)),
      k_(k_first),
      p_(p),
      step_lo_(p.working()),
      step_hi_(p.working()),
      lo_(p.working()),
      hi_(p.working()) {
  const RealInterval step = exp_interval(RealInterval(x_), p_);
  mpfr_set(step_lo_.get(), step.lo_ptr(), MPFR_RNDD);
  mpfr_set(step_hi_.get(), step.hi_ptr(), MPFR_RNDU);
  seed();
}

void ExpSweep::seed() {
  const RealInterval v = exp_multiple(x_, k_, p_);
  mpfr_set(lo_.get(), v.lo_ptr(), MPFR_RNDD);
  mpfr_set(hi_.get(), v.hi_ptr(), MPFR_RNDU);
}

void ExpSweep::advance() {
  ++k_;
  if (k_ % kReseedInterval == 0) {
    seed();
    return;
  }
  // Both factors are positive, so endpoint products bound the product set.
  mpfr_mul(lo_.get(), lo_.get(), step_lo_.get(), MPFR_RNDD);
  mpfr_mul(hi_.get(), hi_.get(), step_hi_.get(), MPFR_RNDU);
}

}  // namespace fracpow::detail
