#include "fracpow/cantor.hpp"

#include <random>

namespace fracpow {

namespace {

mpq_class pow_q(const mpq_class& x, unsigned long n) {
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), x.get_num_mpz_t(), n);
  mpz_pow_ui(den.get_mpz_t(), x.get_den_mpz_t(), n);
  mpq_class out(num, den);
  out.canonicalize();
  return out;
}

mpz_class pow_z(const mpz_class& x, unsigned long n) {
  mpz_class out;
  mpz_pow_ui(out.get_mpz_t(), x.get_mpz_t(), n);
  return out;
}

// Smallest integer r >= 0 with r^j >= R, for R >= 0.
mpz_class ceil_root(const mpq_class& R, unsigned long j) {
  mpz_class f, r;
  mpz_fdiv_q(f.get_mpz_t(), R.get_num_mpz_t(), R.get_den_mpz_t());
  mpz_root(r.get_mpz_t(), f.get_mpz_t(), j);  // floor(R^(1/j))
  if (mpq_class(pow_z(r, j)) < R) ++r;
  return r;
}

unsigned long as_exponent(std::uint64_t j) {
  if (j == 0 || j > (1UL << 30)) throw DomainError("depth out of range");
  return static_cast<unsigned long>(j);
}

long bits_of(const mpz_class& z) { return static_cast<long>(mpz_sizeinbase(z.get_mpz_t(), 2)); }

// Endpoint j-th powers of the node interval: (i + a_j)/xi and (i + b_j)/xi.
struct NodePowers {
  mpq_class lo, hi;
};

NodePowers node_powers(std::uint64_t depth, const mpz_class& i, const BandSpec& spec) {
  NodePowers out{(mpq_class(i) + spec.bands.at(depth)) / spec.xi, (mpq_class(i) + spec.b(depth)) / spec.xi};
  out.lo.canonicalize();
  out.hi.canonicalize();
  return out;
}

Precision node_precision(const mpz_class& i, Precision p) {
  return Precision(std::max(p.bits, 2 * bits_of(i) + 64), p.guard);
}

struct EndpointEnclosures {
  RealInterval lo, hi;
};

EndpointEnclosures endpoint_enclosures(std::uint64_t depth, const mpz_class& i, const BandSpec& spec,
                                       Precision p) {
  const NodePowers np = node_powers(depth, i, spec);
  const unsigned long j = as_exponent(depth);
  return {root_interval(RealInterval::from_rational(np.lo, p), j, p),
          root_interval(RealInterval::from_rational(np.hi, p), j, p)};
}

CantorNode make_node(std::uint64_t depth, const mpz_class& i, const BandSpec& spec, Precision p) {
  const Precision q = node_precision(i, p);
  const EndpointEnclosures e = endpoint_enclosures(depth, i, spec, q);
  CantorNode node;
  node.depth = depth;
  node.i = i;
  node.interval = RealInterval(e.lo.lo(), e.hi.hi());
  node.c = spec.c;
  return node;
}

CantorNode child_at(const CantorNode& node, const BandSpec& spec, const mpz_class& j_x,
                    const mpz_class& index, Precision p) {
  const std::uint64_t depth = node.depth + 1;
  const mpz_class i = j_x + index;
  // Exact containment: ((i + a')/xi)^j >= L^(j+1) and ((i + b')/xi)^j <= U^(j+1).
  const unsigned long j = as_exponent(node.depth);
  const NodePowers parent = node_powers(node.depth, node.i, spec);
  const NodePowers child = node_powers(depth, i, spec);
  if (pow_q(child.lo, j) < pow_q(parent.lo, j + 1) || pow_q(child.hi, j) > pow_q(parent.hi, j + 1)) {
    throw ConstructionError("depth " + std::to_string(depth) + ": child " + i.get_str() +
                            " is not inside its parent");
  }
  CantorNode out = make_node(depth, i, spec, p);
  out.interval = intersect(out.interval, node.interval);
  return out;
}

}  // namespace

BandSequence BandSequence::finite(std::vector<mpq_class> values) {
  BandSequence s;
  s.kind_ = Kind::finite;
  s.values_ = std::move(values);
  return s;
}

BandSequence BandSequence::constant(mpq_class value) {
  BandSequence s;
  s.kind_ = Kind::constant;
  s.values_ = {std::move(value)};
  return s;
}

BandSequence BandSequence::periodic(std::vector<mpq_class> pattern) {
  if (pattern.empty()) throw DomainError("periodic band pattern must not be empty");
  BandSequence s;
  s.kind_ = Kind::periodic;
  s.values_ = std::move(pattern);
  return s;
}

std::optional<std::uint64_t> BandSequence::length() const {
  if (kind_ == Kind::finite) return values_.size();
  return std::nullopt;
}

const mpq_class& BandSequence::at(std::uint64_t n) const {
  if (n == 0) throw DomainError("bands are indexed from 1");
  switch (kind_) {
    case Kind::finite:
      if (n > values_.size())
        throw DomainError("band a_" + std::to_string(n) + " not supplied (list has " +
                          std::to_string(values_.size()) + " entries)");
      return values_[n - 1];
    case Kind::constant:
      return values_.front();
    case Kind::periodic:
      return values_[(n - 1) % values_.size()];
  }
  throw DomainError("unknown band kind");
}

mpz_class floor_power(const mpz_class& H, const mpq_class& eta) {
  if (H < 1 || eta <= 0) throw DomainError("floor_power needs H >= 1 and eta > 0");
  const mpz_class& p = eta.get_num();
  const mpz_class& q = eta.get_den();
  if (!p.fits_ulong_p() || !q.fits_ulong_p()) throw DomainError("eta has too large a numerator or denominator");
  mpz_class r;
  mpz_root(r.get_mpz_t(), pow_z(H, p.get_ui()).get_mpz_t(), q.get_ui());
  return r;
}

namespace {

// eps H > H^eta  <=>  (eps H)^q > H^p, with eta = p/q.
bool linear_beats_power(const mpz_class& H, const mpq_class& eps, const mpq_class& eta) {
  const unsigned long p = eta.get_num().get_ui(), q = eta.get_den().get_ui();
  return pow_q(mpq_class(eps * H), q) > mpq_class(pow_z(H, p));
}

// H^eta > y  <=>  H^p > y^q.
bool power_exceeds(const mpz_class& H, const mpq_class& eta, unsigned long y) {
  const unsigned long p = eta.get_num().get_ui(), q = eta.get_den().get_ui();
  return pow_z(H, p) > pow_z(mpz_class(y), q);
}

// Smallest H >= 1 with pred(H), for pred monotone in H.
template <class Pred>
mpz_class smallest(Pred pred) {
  mpz_class hi = 1;
  while (!pred(hi)) hi *= 2;
  mpz_class lo = hi / 2;  // pred(lo) is false unless lo == 0
  while (hi - lo > 1) {
    const mpz_class mid = (lo + hi) / 2;
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

BandSpec choose_params(const mpq_class& epsilon, const mpq_class& eta, const mpq_class& xi) {
  if (epsilon <= 0 || epsilon > mpq_class(1, 2)) throw DomainError("epsilon must lie in (0, 1/2]");
  if (eta <= 0 || eta >= 1) throw DomainError("eta must lie in (0, 1)");
  if (xi <= 0) throw DomainError("xi must be positive");
  floor_power(1, eta);  // validates the size of eta
  BandSpec spec;
  spec.epsilon = epsilon;
  spec.eta = eta;
  spec.xi = xi;
  // Both conditions are monotone in H; c >= 1 additionally needs H^eta >= 3.
  const mpz_class h1 = smallest([&](const mpz_class& H) { return linear_beats_power(H, epsilon, eta); });
  const mpz_class h2 = smallest([&](const mpz_class& H) { return power_exceeds(H, eta, 2); });
  const mpz_class h3 = smallest([&](const mpz_class& H) { return floor_power(H, eta) >= 3; });
  spec.H = std::max({h1, h2, h3});
  spec.c = floor_power(spec.H, eta) - 2;
  return spec;
}

BandSpec make_band_spec(const mpq_class& epsilon, const mpq_class& eta, const mpz_class& H,
                        BandSequence bands, const mpq_class& xi) {
  BandSpec spec;
  spec.epsilon = epsilon;
  spec.eta = eta;
  spec.xi = xi;
  spec.H = H;
  spec.bands = std::move(bands);
  spec.c = floor_power(H, eta) - 2;
  return spec;
}

void validate(const BandSpec& spec, std::uint64_t depth) {
  if (spec.epsilon <= 0 || spec.epsilon >= 1) throw DomainError("epsilon must lie in (0, 1)");
  if (spec.eta <= 0 || spec.eta >= 1) throw DomainError("eta must lie in (0, 1)");
  if (spec.xi <= 0) throw DomainError("xi must be positive");
  if (spec.H < 2) throw DomainError("H must be at least 2");
  if (!power_exceeds(spec.H, spec.eta, 2)) throw DomainError("H^eta > 2 fails");
  if (!linear_beats_power(spec.H, spec.epsilon, spec.eta)) throw DomainError("eps H > H^eta fails");
  if (spec.c != floor_power(spec.H, spec.eta) - 2) throw DomainError("c must equal floor(H^eta) - 2");
  if (spec.c < 1) throw DomainError("c = floor(H^eta) - 2 must be at least 1");
  std::uint64_t last = depth;
  if (last == 0) last = spec.bands.length().value_or(spec.bands.values().size());
  for (std::uint64_t n = 1; n <= last; ++n) {
    const mpq_class& a = spec.bands.at(n);
    if (a < 0 || a >= 1 - spec.epsilon)
      throw DomainError("band a_" + std::to_string(n) + " must satisfy 0 <= a < 1 - eps");
  }
}

CantorNode root_node(const BandSpec& spec, Precision p) { return make_node(1, spec.H, spec, p); }

mpz_class next_integers(const CantorNode& node, const BandSpec& spec) {
  const unsigned long j = as_exponent(node.depth);
  const NodePowers np = node_powers(node.depth, node.i, spec);
  // Window ends raised to the j-th power: xi^j L^(j+1) and xi^j U^(j+1).
  const mpq_class xj = pow_q(spec.xi, j);
  const mpq_class lo_j = xj * pow_q(np.lo, j + 1);
  const mpq_class hi_j = xj * pow_q(np.hi, j + 1);
  const mpz_class j_x = ceil_root(lo_j, j);
  if (mpq_class(pow_z(j_x + spec.c, j)) > hi_j) {
    const Precision p(2 * bits_of(node.i) + 64);
    const RealInterval width = sub(root_interval(RealInterval::from_rational(hi_j, p), j, p),
                                   root_interval(RealInterval::from_rational(lo_j, p), j, p), p);
    throw ConstructionError("depth " + std::to_string(node.depth) + ": image window of width " +
                            width.to_string(8) + " holds no " + mpz_class(spec.c + 1).get_str() +
                            " consecutive integers");
  }
  return j_x;
}

std::vector<CantorNode> children(const CantorNode& node, const BandSpec& spec, Precision p) {
  if (spec.c > (1 << 20)) throw DomainError("too many children to list");
  const mpz_class j_x = next_integers(node, spec);
  std::vector<CantorNode> out;
  for (mpz_class idx = 0; idx < spec.c; ++idx) out.push_back(child_at(node, spec, j_x, idx, p));
  return out;
}

CantorPath build_path(const BandSpec& spec, std::uint64_t depth, const Selector& selector) {
  if (depth == 0) throw DomainError("depth must be at least 1");
  validate(spec, depth);
  CantorPath path;
  path.spec = spec;
  path.nodes.push_back(root_node(spec));
  std::mt19937_64 rng(std::holds_alternative<RandomSelector>(selector) ? std::get<RandomSelector>(selector).seed : 0);
  for (std::uint64_t d = 2; d <= depth; ++d) {
    CantorNode& parent = path.nodes.back();
    const mpz_class j_x = next_integers(parent, spec);
    parent.window_start = j_x;
    std::uint64_t index = 0;
    if (const auto* s = std::get_if<IndexSelector>(&selector)) {
      if (s->indices.size() < d - 1) throw DomainError("index selector too short for depth " + std::to_string(d));
      index = s->indices[d - 2];
    } else if (std::holds_alternative<RandomSelector>(selector)) {
      if (!spec.c.fits_ulong_p()) throw DomainError("branching too large for the random selector");
      index = std::uniform_int_distribution<std::uint64_t>(0, spec.c.get_ui() - 1)(rng);
    }
    if (mpz_class(static_cast<unsigned long>(index)) >= spec.c)
      throw DomainError("child index " + std::to_string(index) + " out of range");
    path.choices.push_back(index);
    path.nodes.push_back(child_at(parent, spec, j_x, mpz_class(static_cast<unsigned long>(index)), Precision(128)));
  }

  // alpha: the part of the deepest node certainly inside the exact interval.
  const CantorNode& leaf = path.nodes.back();
  for (Precision p = node_precision(leaf.i, Precision(128));; p = p.doubled()) {
    if (p.working() > kDefaultMaxBits) throw UndecidableError("alpha interval undecided", leaf.interval.to_string());
    const EndpointEnclosures e = endpoint_enclosures(leaf.depth, leaf.i, spec, p);
    if (e.lo.hi() < e.hi.lo()) {
      path.alpha = RealInterval(e.lo.hi(), e.hi.lo());
      break;
    }
  }
  return path;
}

RealInterval dimension_lower_bound(const mpz_class& H, const mpz_class& c, Precision p) {
  if (c < 1 || H < 2) throw DomainError("dimension bound needs c >= 1 and H >= 2");
  if (c == 1) return RealInterval();
  if (c == H) return RealInterval(DyadicRational(1));
  return div(ln_interval(mpq_class(c), p), ln_interval(mpq_class(H), p), p);
}

}  // namespace fracpow
