#include "fracpow/schlag.hpp"

#include <algorithm>
#include <cmath>

#include "fracpow/detail/parallel.hpp"

namespace fracpow {

namespace {

constexpr double kLog2E = 1.4426950408889634;

mpz_class to_mpz(std::uint64_t v) { return mpz_class(static_cast<unsigned long>(v)); }

std::string describe(const DyadicWindow& J) {
  return "[" + J.lo.to_string(12) + ", " + J.hi.to_string(12) + "]";
}

// Sorted, pairwise disjoint and non-adjacent.
std::vector<std::pair<mpz_class, mpz_class>> merge_runs(std::vector<std::pair<mpz_class, mpz_class>> parts) {
  std::sort(parts.begin(), parts.end());
  std::vector<std::pair<mpz_class, mpz_class>> out;
  for (auto& [s, e] : parts) {
    if (s >= e) continue;
    if (!out.empty() && s <= out.back().second) {
      if (e > out.back().second) out.back().second = e;
    } else {
      out.emplace_back(std::move(s), std::move(e));
    }
  }
  return out;
}

// Runs chunk tasks in batches of `threads`, stopping after the first batch
// in which `done` holds for some result. Results are in chunk order.
template <class R, class F, class Done>
std::vector<R> chunked_until(const std::vector<detail::KChunk>& chunks, unsigned threads, F f, Done done) {
  const std::size_t batch = detail::resolve_threads(threads);
  std::vector<R> out;
  for (std::size_t i = 0; i < chunks.size(); i += batch) {
    const std::vector<detail::KChunk> part(chunks.begin() + static_cast<std::ptrdiff_t>(i),
                                           chunks.begin() + static_cast<std::ptrdiff_t>(std::min(chunks.size(), i + batch)));
    auto results = detail::parallel_map<R>(part, threads, f);
    bool stop = false;
    for (auto& r : results) {
      stop = stop || done(r);
      out.push_back(std::move(r));
    }
    if (stop) break;
  }
  return out;
}

void require(bool ok, bool strict, const std::string& message, std::vector<std::string>& warnings) {
  if (ok) return;
  if (strict) throw ConstructionError(message);
  warnings.push_back(message);
}

DyadicWindow base_window(const ConstructionParams& params) {
  return {params.eta, params.eta.ldexp(1)};
}

}  // namespace

std::int64_t compute_l1(const ConstructionParams& params) { return params.first_level; }

std::int64_t level_from_anchor(const DyadicRational& anchor, std::uint64_t k,
                               const ConstructionParams& params) {
  if (params.psi_zero) throw DomainError("the level schedule needs psi > 0");
  const DyadicRational x = anchor * DyadicRational(to_mpz(k));
  const Refiner y = [&](Precision p) {
    const RealInterval num = ldexp(mul(RealInterval::from_integer(to_mpz(k)),
                                       exp_interval(RealInterval(x), p), p), 2);
    return div(num, params.psi_at(p), p);
  };
  const long mag = static_cast<long>(std::max(0.0, x.to_double()) * kLog2E);
  return ceil_log2_escalating(y, Precision(mag + 64), params.max_bits);
}

std::int64_t compute_ln(std::uint64_t n, const std::vector<StepRecord>& steps,
                        const ConstructionParams& params) {
  if (n < 2) throw DomainError("compute_ln needs n >= 2");
  if (steps.size() < std::max<std::uint64_t>(1, n - 2))
    throw DomainError("compute_ln needs the step it is anchored at");
  if (params.psi_zero) return steps[0].level + 2 * static_cast<std::int64_t>(params.t) * (n - 1);
  const StepRecord& anchor = n == 2 ? steps[0] : steps[n - 3];
  return level_from_anchor(anchor.W() + DyadicRational::pow2(-anchor.level), params.k_at(n), params);
}

std::optional<std::string> check_level_gap(std::int64_t prev, std::int64_t next,
                                           const ConstructionParams& params) {
  const std::int64_t gap = next - prev;
  const std::int64_t lo = 2 * static_cast<std::int64_t>(params.t);
  const auto hi = static_cast<std::int64_t>(2 * params.h);
  if (lo <= gap && gap <= hi) return std::nullopt;
  return "level gap " + std::to_string(gap) + " outside [2t, 2h] = [" + std::to_string(lo) + ", " +
         std::to_string(hi) + "]";
}

SurvivorMeasure survivor_measure(const DyadicWindow& J, KRange range, std::int64_t level,
                                 const ConstructionParams& params, unsigned threads) {
  const auto lo_units = J.lo.scaled_integer(level);
  const auto hi_units = J.hi.scaled_integer(level);
  if (!lo_units || !hi_units || *lo_units >= *hi_units)
    throw DomainError("survivor window must be a non-empty interval on the level grid");

  struct Part {
    std::vector<std::pair<mpz_class, mpz_class>> runs;
    DyadicRational bound;
    mpz_class candidates;
    bool exact = true;
  };
  std::vector<detail::KChunk> chunks;
  if (!range.empty()) chunks = detail::k_chunks(range.lo + 1, range.hi);
  const auto parts = detail::parallel_map<Part>(chunks, threads, [&](const detail::KChunk& c) {
    Part part;
    KSweeper sweep(J, c.first, range.hi, params);
    std::vector<std::pair<mpz_class, mpz_class>> raw;
    for (std::uint64_t k = c.first;; sweep.advance(), ++k) {
      CoverTally tally = tally_covers(sweep.current(), J, level, params);
      part.candidates += tally.candidates;
      if (tally.exact) {
        for (auto& r : tally.clipped) raw.push_back(std::move(r));
      } else {
        part.exact = false;
        part.bound += tally.measure_upper;
      }
      if (k == c.last) break;
    }
    part.runs = merge_runs(std::move(raw));
    return part;
  });

  SurvivorMeasure out;
  out.window_length = J.length();
  std::vector<std::pair<mpz_class, mpz_class>> all;
  DyadicRational bound;
  for (const Part& p : parts) {
    all.insert(all.end(), p.runs.begin(), p.runs.end());
    bound += p.bound;
    out.candidates += p.candidates;
    out.exact = out.exact && p.exact;
  }
  const auto covered = merge_runs(std::move(all));
  mpz_class covered_units = 0;
  for (const auto& [s, e] : covered) covered_units += e - s;
  out.covered_lo = DyadicRational::on_grid(covered_units, level);
  out.covered_hi = std::min(out.covered_lo + bound, out.window_length);
  if (out.exact) {
    mpz_class cursor = *lo_units;
    for (const auto& [s, e] : covered) {
      if (s > cursor) out.runs.emplace_back(cursor, s);
      cursor = std::max(cursor, e);
    }
    if (cursor < *hi_units) out.runs.emplace_back(cursor, *hi_units);
  }
  return out;
}

RealInterval max_cover_ratio(const DyadicWindow& J, std::uint64_t k_first, std::uint64_t k_last,
                             std::int64_t level, const ConstructionParams& params, unsigned threads) {
  if (k_first == 0 || k_first > k_last) throw DomainError("cover ratio needs 1 <= k_first <= k_last");
  struct Part {
    DyadicRational lo, hi;
  };
  const auto chunks = detail::k_chunks(k_first, k_last);
  const auto parts = detail::parallel_map<Part>(chunks, threads, [&](const detail::KChunk& c) {
    Part part;
    KSweeper sweep(J, c.first, k_last, params);
    for (std::uint64_t k = c.first;; sweep.advance(), ++k) {
      const CoverTally tally = tally_covers(sweep.current(), J, level, params);
      if (tally.exact) {
        const DyadicRational m = DyadicRational::on_grid(union_length(tally.clipped), level);
        part.lo = std::max(part.lo, m);
        part.hi = std::max(part.hi, m);
      } else {
        part.hi = std::max(part.hi, tally.measure_upper);
      }
      if (k == c.last) break;
    }
    return part;
  });
  DyadicRational lo, hi;
  for (const Part& p : parts) {
    lo = std::max(lo, p.lo);
    hi = std::max(hi, p.hi);
  }
  const Precision p(128);
  const RealInterval len(J.length());
  const RealInterval rlo = div(RealInterval(lo), len, p);
  const RealInterval rhi = div(RealInterval(hi), len, p);
  return RealInterval(rlo.lo(), rhi.hi());
}

bool cover_ratio_certified(const DyadicWindow& J, std::uint64_t k_max, std::int64_t level,
                           const ConstructionParams& params) {
  if (params.psi_zero || k_max == 0) return true;
  const KEnclosures ke = k_enclosures(k_max, J, params);
  const CandidateRange cr = candidate_range(ke, J, params);
  if (cr.empty()) return true;
  // The largest m meeting J grows with k, so k_max and cr.last dominate.
  BigFloat cap(mpfr_get_prec(params.psi.lo_ptr()));
  mpfr_mul_ui(cap.get(), params.psi.lo_ptr(), 3, MPFR_RNDD);
  mpfr_mul_2si(cap.get(), cap.get(), static_cast<long>(level), MPFR_RNDD);
  const mpz_class km = to_mpz(k_max) * cr.last;
  return mpfr_cmp_z(cap.get(), km.get_mpz_t()) >= 0;
}

std::optional<DyadicCover> cell_obstruction(const mpz_class& w, std::int64_t level, KRange range,
                                            const ConstructionParams& params, unsigned threads) {
  if (range.empty() || params.psi_zero) return std::nullopt;
  const DyadicWindow cell = DyadicWindow::cell(w, level);
  using Hit = std::optional<DyadicCover>;
  const auto chunks = detail::k_chunks(range.lo + 1, range.hi);
  const auto hits = chunked_until<Hit>(
      chunks, threads,
      [&](const detail::KChunk& c) -> Hit {
        KSweeper sweep(cell, c.first, range.hi, params);
        for (std::uint64_t k = c.first;; sweep.advance(), ++k) {
          if (auto hit = first_hit(sweep.current(), cell, level, params)) return hit;
          if (k == c.last) return std::nullopt;
        }
      },
      [](const Hit& h) { return h.has_value(); });
  for (const Hit& h : hits)
    if (h) return h;
  return std::nullopt;
}

namespace {

struct CellScan {
  mpz_class first;  // first cell index
  mpz_class end;    // one past the last cell index
  std::int64_t level;
  KRange avoid;
  KRange lookahead;
};

struct Candidate {
  mpz_class w;
  std::int64_t lookahead_level;
  SurvivorMeasure survivor;
  std::vector<std::string> warnings;
};

// First-fit scan over grid cells. `lookahead_level_for` maps an obstruction
// free cell to its look-ahead level (nullopt rejects the cell).
template <class LevelFor>
StepRecord scan_cells(std::uint64_t n, const CellScan& scan, const ConstructionParams& params,
                      const RunOptions& options, LevelFor lookahead_level_for) {
  StepRecord rec;
  rec.n = n;
  rec.level = scan.level;
  rec.checked = scan.avoid;
  rec.lookahead = scan.lookahead;
  rec.census = options.census;
  std::optional<Candidate> chosen;
  mpz_class admissible = 0;
  mpz_class w = scan.first;
  std::size_t obstructed = 0;
  while (w < scan.end) {
    if (options.census && options.census_cap && admissible >= *options.census_cap) break;
    if (auto hit = cell_obstruction(w, scan.level, scan.avoid, params, options.threads)) {
      ++obstructed;
      w = std::max(mpz_class(w + 1), hit->a2);
      continue;
    }
    std::vector<std::string> warnings;
    const std::optional<std::int64_t> next_level = lookahead_level_for(w, warnings);
    if (next_level) {
      const DyadicWindow cell = DyadicWindow::cell(w, scan.level);
      SurvivorMeasure sm = survivor_measure(cell, scan.lookahead, *next_level, params, options.threads);
      if (sm.at_least_half()) {
        ++admissible;
        if (!chosen) {
          chosen = Candidate{w, *next_level, std::move(sm), std::move(warnings)};
          rec.cells_inspected = w - scan.first + 1;
          if (!options.census) break;
        }
      }
    }
    ++w;
  }
  if (!chosen) {
    throw ConstructionError("step " + std::to_string(n) + ": no admissible cell at level " +
                            std::to_string(scan.level) + " (" + std::to_string(obstructed) +
                            " obstructed runs)");
  }
  rec.w = chosen->w;
  rec.lookahead_level = chosen->lookahead_level;
  rec.admissible_count = admissible;
  rec.census_complete = options.census && w >= scan.end;
  rec.covered_measure = RealInterval(chosen->survivor.covered_lo, chosen->survivor.covered_hi);
  rec.covered_exact = chosen->survivor.exact;
  rec.warnings = std::move(chosen->warnings);
  return rec;
}

}  // namespace

StepRecord initial_step(const ConstructionParams& params, const RunOptions& options) {
  const std::int64_t l1 = compute_l1(params);
  if (l1 < 1) throw DomainError("first level must be positive");
  std::vector<std::string> warnings;
  require(l1 >= 5 * static_cast<std::int64_t>(params.t), options.strict,
          "l_1 = " + std::to_string(l1) + " is below 5t", warnings);

  CellScan scan;
  scan.level = l1;
  // W_1 >= (1 + 2^-6) eta and J_1 ⊆ [eta, 2 eta].
  scan.first = ((params.eta + params.eta.ldexp(-6)).ldexp(l1)).ceil();
  scan.end = (params.eta.ldexp(1)).ldexp(l1).floor();
  scan.avoid = {0, params.k_at(1)};
  scan.lookahead = {params.k_at(1), params.lookahead_end(1)};

  auto level_for = [&](const mpz_class& w, std::vector<std::string>& notes) -> std::optional<std::int64_t> {
    if (params.psi_zero) return l1 + 2 * params.t;
    const DyadicRational anchor = DyadicRational::on_grid(w + 1, l1);
    const std::int64_t l2 = level_from_anchor(anchor, params.k_at(2), params);
    if (l2 < l1) return std::nullopt;
    if (auto gap = check_level_gap(l1, l2, params)) {
      if (options.strict) throw ConstructionError("step 1: " + *gap);
      notes.push_back("step 1: " + *gap);
    }
    return l2;
  };
  StepRecord rec = scan_cells(1, scan, params, options, level_for);
  rec.warnings.insert(rec.warnings.begin(), warnings.begin(), warnings.end());

  rec.cover_ratio_certified =
      cover_ratio_certified(base_window(params), params.k_at(1), l1, params) &&
      cover_ratio_certified(rec.interval(), params.lookahead_end(1), rec.lookahead_level, params);
  require(rec.cover_ratio_certified, options.strict,
          "step 1: cover length ratio not certified", rec.warnings);
  require(rec.covered_measure.hi().ldexp(1) <= DyadicRational::pow2(-l1), options.strict,
          "step 1: survivor measure below half", rec.warnings);
  return rec;
}

StepRecord inductive_step(const ConstructionParams& params, const std::vector<StepRecord>& steps,
                          std::uint64_t n, const RunOptions& options) {
  if (n < 2 || steps.size() != n - 1) throw DomainError("inductive step needs steps 1..n-1");
  const StepRecord& prev = steps.back();
  std::vector<std::string> warnings;
  const std::string tag = "step " + std::to_string(n) + ": ";

  const std::int64_t ln = compute_ln(n, steps, params);
  if (ln != prev.lookahead_level)
    throw ConstructionError(tag + "level differs from the previous look-ahead level");
  if (ln < prev.level) throw ConstructionError(tag + "level decreased");

  // l_{n+1} is anchored at W_{n-1}, which is already fixed.
  const std::int64_t next = compute_ln(n + 1, steps, params);
  if (next < ln) throw ConstructionError(tag + "look-ahead level below the current level");
  if (auto gap = check_level_gap(ln, next, params)) require(false, options.strict, tag + *gap, warnings);

  const DyadicWindow parent = prev.interval();
  const std::uint64_t k_n = params.k_at(n);
  const std::uint64_t k_next = params.lookahead_end(n);

  std::optional<RealInterval> lemma1;
  if (!params.psi_zero) {
    lemma1 = max_cover_ratio(parent, k_n, std::max(k_n, k_next), next, params, options.threads);
    BigFloat bound(mpfr_get_prec(params.psi.lo_ptr()));
    mpfr_mul_ui(bound.get(), params.psi.lo_ptr(), 16, MPFR_RNDD);
    require(mpfr_less_p(lemma1->hi_ptr(), bound.get()) != 0, options.strict,
            tag + "cover ratio " + lemma1->to_string(6) + " not below 16 psi", warnings);
  }

  CellScan scan;
  scan.level = ln;
  const auto shift = static_cast<mp_bitcnt_t>(ln - prev.level);
  scan.first = prev.w << shift;
  scan.end = mpz_class(prev.w + 1) << shift;
  scan.avoid = {params.k_at(n - 1), k_n};
  scan.lookahead = {k_n, k_next};
  StepRecord rec = scan_cells(n, scan, params, options,
                              [&](const mpz_class&, std::vector<std::string>&) -> std::optional<std::int64_t> {
                                return next;
                              });
  rec.lemma1_max_ratio = lemma1;
  rec.cover_ratio_certified = cover_ratio_certified(parent, k_next, next, params);
  rec.warnings.insert(rec.warnings.begin(), warnings.begin(), warnings.end());
  require(rec.cover_ratio_certified, options.strict, tag + "cover length ratio not certified in " +
          describe(parent), rec.warnings);
  return rec;
}

DyadicRational distance_guarantee(const ConstructionParams& params, std::uint64_t k_max) {
  if (params.psi_zero) return DyadicRational(0);
  // (1 - shift_k / m) is smallest at the smallest admissible m.
  mpq_class rho = 1;
  const std::uint64_t last = std::min<std::uint64_t>(k_max, params.shifts.size());
  for (std::uint64_t k = 1; k <= last; ++k) {
    const mpq_class& s = params.shift(k);
    if (s == 0) continue;
    const mpz_class m = std::max(m_range_for_k(k, params).lo, mpz_class(1));
    rho = std::min(rho, mpq_class(1 - s / mpq_class(m)));
  }
  mpq_class bound = params.psi.lo().to_rational() * rho / 2;
  bound.canonicalize();
  const long level = static_cast<long>(mpz_sizeinbase(bound.get_den_mpz_t(), 2)) + 64;
  DyadicRational out = DyadicRational::on_grid(
      exact_integer_bounds(mpq_class(bound * mpq_class(mpz_class(1) << level))).floor, level);

  // Powers whose target range starts below 1 also have 0 as a candidate.
  if (params.scale < 1) {
    const double reach = std::log(1.0 / params.scale.get_d()) / params.eta.to_double();
    const auto k_stop = std::min<std::uint64_t>(k_max, static_cast<std::uint64_t>(reach) + 2);
    for (std::uint64_t k = 1; k <= k_stop; ++k) {
      if (m_range_for_k(k, params).lo != 0) continue;
      const Precision p(128);
      const DyadicRational x = params.eta * DyadicRational(to_mpz(k));
      const RealInterval y = add(mul(RealInterval::from_rational(params.scale, p),
                                     exp_interval(RealInterval(x), p), p),
                                 RealInterval::from_rational(params.shift(k), p), p);
      out = std::min(out, y.lo());
    }
  }
  return out;
}

Chain run_construction(const ConstructionParams& params, std::uint64_t n_steps, const RunOptions& options) {
  if (n_steps == 0) throw DomainError("at least one step is required");
  if (options.strict && !params.feasible()) {
    std::string failed;
    for (const auto& c : params.feasibility)
      if (c.required && !c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
    throw ConstructionError("strict mode: parameter checks failed (" + failed + ")");
  }
  Chain chain;
  chain.params = params;
  chain.strict = options.strict;
  chain.steps.push_back(initial_step(params, options));
  for (std::uint64_t n = 2; n <= n_steps; ++n)
    chain.steps.push_back(inductive_step(params, chain.steps, n, options));

  const StepRecord& last = chain.steps.back();
  const DyadicWindow J = last.interval();
  chain.xi_enclosure = RealInterval(J.lo, J.hi);
  const Precision p(last.level + 64);
  chain.epsilon_enclosure = sub(exp_interval(chain.xi_enclosure, p), RealInterval(DyadicRational(1)), p);

  // Representative: exp of the midpoint, checked to map back into J_N.
  const DyadicRational mid = J.lo + DyadicRational::pow2(-last.level - 1);
  for (Precision q = p;; q = q.doubled()) {
    if (q.working() > params.max_bits)
      throw UndecidableError("epsilon representative not certified", chain.epsilon_enclosure.to_string());
    const DyadicRational base = exp_interval(RealInterval(mid), q).midpoint();
    const RealInterval back = ln_interval(RealInterval(base), q);
    if (J.lo < back.lo() && back.hi() < J.hi) {
      chain.epsilon_representative = base - DyadicRational(1);
      break;
    }
  }
  chain.k_max = params.k_at(n_steps);
  chain.guarantee = distance_guarantee(params, chain.k_max);
  return chain;
}

}  // namespace fracpow
