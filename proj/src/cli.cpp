#include "fracpow/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fracpow/certificate.hpp"
#include "fracpow/detail/parallel.hpp"

namespace fracpow {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
  if (!f.flush()) throw UsageError("cannot write " + path);
}

mpq_class rational_arg(const std::string& text, const char* what) {
  try {
    return parse_rational(text);
  } catch (const DomainError& e) {
    throw UsageError(std::string(what) + ": " + e.what());
  }
}

// Options that shape the parameter set, shared by params and construct-eps.
struct ParamArgs {
  int t = 0;
  std::string a_psi;
  std::optional<long> h_log2;
  std::optional<std::uint64_t> h;
  std::optional<std::int64_t> first_level;
  bool zero_psi = false;
  std::string mode = "theorem1";
  std::string xi;
  std::string shifts_file;
  std::optional<std::uint64_t> lookahead_span;
  long max_bits = kDefaultMaxBits;

  void attach(CLI::App* app) {
    app->add_option("--t", t, "eta = 2^-t")->required()->check(CLI::Range(2, 64));
    app->add_option("--a-psi", a_psi, "psi constant A (default 2^14)");
    app->add_option("--b-h-log2,--h-log2", h_log2, "c in h = (t + c) 2^(t + c) (default 6)");
    app->add_option("--block-length", h, "explicit block length h");
    app->add_option("--first-level", first_level, "explicit l_1");
    app->add_flag("--zero-psi", zero_psi, "degenerate run with psi = 0");
    app->add_option("--mode", mode, "theorem1 or theorem2")->check(CLI::IsMember({"theorem1", "theorem2"}));
    app->add_option("--xi", xi, "target scale (theorem2)");
    app->add_option("--shifts", shifts_file, "JSON list of target shifts from k = 1 (theorem2)");
    app->add_option("--lookahead-span", lookahead_span, "look-ahead block length (default h)");
    app->add_option("--max-bits", max_bits, "precision escalation budget")->check(CLI::PositiveNumber);
  }

  ConstructionParams build() const {
    ParamOverrides o;
    if (!a_psi.empty()) {
      try {
        o.a_psi = parse_integer(a_psi);
      } catch (const DomainError& e) {
        throw UsageError(std::string("--a-psi: ") + e.what());
      }
    }
    o.h_const_log2 = h_log2;
    o.h = h;
    o.first_level = first_level;
    o.zero_psi = zero_psi;
    o.mode = parse_target_mode(mode);
    if (!xi.empty()) o.scale = rational_arg(xi, "--xi");
    if (!shifts_file.empty()) o.shifts = read_shifts(read_file(shifts_file));
    if (o.mode == TargetMode::theorem1 && (!xi.empty() || !shifts_file.empty()))
      throw UsageError("--xi and --shifts need --mode theorem2");
    o.lookahead_span = lookahead_span;
    o.max_bits = max_bits;
    try {
      return params_from_t(t, o);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
};

void print_params(const ConstructionParams& p, std::ostream& os) {
  os << "t = " << p.t << "\n";
  os << "eta = " << p.eta.to_string(20) << "\n";
  os << "psi = " << p.psi.to_string(20) << (p.psi_zero ? " (zero_psi)" : "") << "\n";
  os << "h = " << p.h << "\n";
  os << "l_1 = " << p.first_level << "\n";
  os << "mode = " << to_string(p.mode) << "\n";
  for (const FeasibilityCheck& c : p.feasibility) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.formula << (c.required ? "" : " [advisory]");
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << "\n";
  }
}

int cmd_params(const ParamArgs& args, std::ostream& out) {
  const ConstructionParams p = args.build();
  print_params(p, out);
  return p.feasible() ? kExitAccepted : kExitRejected;
}

struct ConstructArgs {
  ParamArgs params;
  std::uint64_t steps = 0;
  bool strict = false;
  bool relaxed = false;
  unsigned threads = 0;
  bool census = false;
  std::uint64_t census_cap = 64;
  bool scan = false;
  std::string out;
};

int cmd_construct_eps(const ConstructArgs& args, std::ostream& out, std::ostream& err) {
  if (args.steps == 0) throw UsageError("--steps must be at least 1");
  const ConstructionParams p = args.params.build();
  RunOptions ro;
  ro.strict = !args.relaxed;
  ro.census = args.census;
  if (args.census) ro.census_cap = args.census_cap;
  ro.threads = args.threads;
  Certificate cert;
  cert.chain = run_construction(p, args.steps, ro);
  const Chain& c = cert.chain;
  if (args.scan) {
    ScanOptions so;
    so.threads = detail::resolve_threads(args.threads);
    so.max_bits = p.max_bits;
    const DyadicRational base = c.epsilon_representative + DyadicRational(1);
    cert.verification =
        min_distance_scan([&](Precision) { return RealInterval(base); }, p.scale, p.shifts, c.k_max, so);
  }
  std::ostream& summary = args.out.empty() || args.out == "-" ? err : out;
  for (const StepRecord& s : c.steps) {
    summary << "step " << s.n << ": l = " << s.level << ", W = " << s.W().to_string(20)
            << ", cells inspected = " << s.cells_inspected.get_str() << "\n";
    for (const std::string& w : s.warnings) summary << "  warning: " << w << "\n";
  }
  summary << "epsilon in " << c.epsilon_enclosure.to_string(25) << "\n";
  summary << "representative = " << c.epsilon_representative.to_string(25) << "\n";
  summary << "guaranteed distance >= " << c.guarantee.to_string(10) << " for k <= " << c.k_max << "\n";
  if (cert.verification)
    summary << "scanned min = " << cert.verification->min_dist.to_string(10) << " at k = "
            << cert.verification->argmin_k << "\n";
  write_output(args.out, write_certificate(cert), out);
  return kExitAccepted;
}

struct AlphaArgs {
  std::string bands;
  std::uint64_t depth = 0;
  std::string select = "first";
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> indices;
  std::string out;
};

int cmd_construct_alpha(const AlphaArgs& args, std::ostream& out, std::ostream& err) {
  if (args.depth == 0) throw UsageError("--depth must be at least 1");
  const BandSpec spec = read_band_spec(read_file(args.bands));
  Selector selector = FirstSelector{};
  if (args.select == "random") selector = RandomSelector{args.seed};
  if (args.select == "indices") selector = IndexSelector{args.indices};
  const CantorPath path = build_path(spec, args.depth, selector);
  const PathDocument doc = path_document(path);
  std::ostream& summary = args.out.empty() || args.out == "-" ? err : out;
  summary << "H = " << spec.H.get_str() << ", c = " << spec.c.get_str() << "\n";
  for (const auto& [j, i] : doc.nodes) summary << "(" << j << ", " << i.get_str() << ")\n";
  summary << "alpha in " << doc.alpha.to_string(25) << "\n";
  summary << "dimension >= " << doc.dimension.to_string(10) << "\n";
  write_output(args.out, write_path(doc), out);
  return kExitAccepted;
}

struct VerifyArgs {
  std::string value;
  std::string epsilon;
  std::string cert;
  std::optional<std::uint64_t> K;
  std::string threshold;
  std::string C;
  std::string xi;
  std::string shifts;
  std::string path;
  std::string bands;
  std::string alpha;
  std::optional<std::uint64_t> N;
  bool no_scan = false;
  unsigned threads = 0;
  long max_bits = kDefaultMaxBits;
  long fraction_bits = 64;
};

int report(const Verdict& v, const ScanResult* scan, std::ostream& out, std::ostream& err) {
  out << write_verdict(v, scan);
  if (v.accepted) {
    err << "accepted";
    if (scan) err << ": min distance " << scan->min_dist.to_string(12) << " at k = " << scan->argmin_k;
    err << "\n";
    return kExitAccepted;
  }
  err << "rejected [" << v.violation << "]: " << v.first_violation.value_or("") << "\n";
  return kExitRejected;
}

int cmd_verify_eps(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const int sources = !a.value.empty() + !a.epsilon.empty() + !a.cert.empty();
  if (sources != 1) throw UsageError("give exactly one of --value, --epsilon, --cert");
  ScanOptions so;
  so.threads = detail::resolve_threads(a.threads);
  so.max_bits = a.max_bits;
  so.fraction_bits = a.fraction_bits;
  const Precision p(128);

  if (!a.epsilon.empty()) {
    if (!a.K) throw UsageError("--K is required");
    const mpq_class eps = rational_arg(a.epsilon, "--epsilon");
    const mpq_class C = a.C.empty() ? mpq_class(1, 1 << 17) : rational_arg(a.C, "--C");
    ScanResult scan;
    const Verdict v = check_theorem1_bound(eps, *a.K, C, so, &scan);
    return report(v, &scan, out, err);
  }

  if (!a.value.empty()) {
    if (!a.K) throw UsageError("--K is required");
    const mpq_class base = rational_arg(a.value, "--value");
    const mpq_class xi = a.xi.empty() ? mpq_class(1) : rational_arg(a.xi, "--xi");
    const std::vector<mpq_class> shifts = a.shifts.empty() ? std::vector<mpq_class>{} : read_shifts(read_file(a.shifts));
    const ScanResult scan =
        min_distance_scan([&](Precision q) { return RealInterval::from_rational(base, q); }, xi, shifts, *a.K, so);
    Verdict v;
    if (a.threshold.empty()) {
      v.margin = scan.min_dist;
      if (!scan.min_dist.positive())
        v = Verdict::reject("distance", "distance 0 not excluded at k = " + std::to_string(scan.argmin_k));
    } else {
      const mpq_class th = rational_arg(a.threshold, "--threshold");
      if (th <= 0) throw UsageError("--threshold must be positive");
      v.margin = div(scan.min_dist, RealInterval::from_rational(th, p), p);
      if (scan.min_dist.lo().to_rational() < th)
        v = Verdict::reject("distance", "min distance " + scan.min_dist.to_string(12) + " at k = " +
                                            std::to_string(scan.argmin_k) + " is below " + format_rational(th));
    }
    return report(v, &scan, out, err);
  }

  const Certificate cert = read_certificate(read_file(a.cert));
  const Chain& c = cert.chain;
  const std::uint64_t K = a.K.value_or(c.k_max);
  const DyadicRational base = c.epsilon_representative + DyadicRational(1);
  const ScanResult scan = min_distance_scan([&](Precision) { return RealInterval(base); }, c.params.scale,
                                            c.params.shifts, K, so);
  DyadicRational threshold = c.guarantee;
  if (!a.threshold.empty()) {
    const RealInterval th = RealInterval::from_rational(rational_arg(a.threshold, "--threshold"), p);
    threshold = th.hi();
  } else if (K > c.k_max) {
    throw UsageError("the recorded guarantee covers k <= " + std::to_string(c.k_max) + "; give --threshold");
  }
  Verdict v;
  v.margin = div(scan.min_dist, RealInterval(threshold), p);
  if (scan.min_dist.lo() < threshold) {
    v = Verdict::reject("distance", "min distance " + scan.min_dist.to_string(12) + " at k = " +
                                        std::to_string(scan.argmin_k) + " is below " + threshold.to_string(12));
  } else if (a.threshold.empty() && c.params.unit_targets()) {
    // The guarantee itself must clear C eps / |ln eps| at the representative.
    const mpq_class eps = c.epsilon_representative.to_rational();
    const mpq_class C = a.C.empty() ? mpq_class(1, 1 << 17) : rational_arg(a.C, "--C");
    if (eps > 0 && eps < 1) {
      const RealInterval t1 = theorem1_threshold(eps, C, p);
      if (!mpfr_greaterequal_p(RealInterval(c.guarantee).lo_ptr(), t1.hi_ptr())) {
        v = Verdict::reject("theorem1", "guarantee " + c.guarantee.to_string(12) + " is below C eps/|ln eps| = " +
                                            t1.to_string(12));
      } else {
        err << "guarantee " << c.guarantee.to_string(12) << " >= C eps/|ln eps| = " << t1.to_string(12) << "\n";
      }
    }
  }
  return report(v, &scan, out, err);
}

int cmd_verify_alpha(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  BandSpec spec;
  RealInterval alpha;
  std::uint64_t N = 0;
  if (!a.path.empty()) {
    const PathDocument doc = read_path(read_file(a.path));
    spec = doc.spec;
    alpha = doc.alpha;
    N = doc.nodes.size();
  } else {
    if (a.bands.empty() || a.alpha.empty()) throw UsageError("give --path, or --bands with --alpha LO[,HI]");
    spec = read_band_spec(read_file(a.bands));
    const auto comma = a.alpha.find(',');
    const mpq_class lo = rational_arg(a.alpha.substr(0, comma), "--alpha");
    const mpq_class hi = comma == std::string::npos ? lo : rational_arg(a.alpha.substr(comma + 1), "--alpha");
    if (hi < lo) throw UsageError("--alpha: LO exceeds HI");
    const Precision p(256);
    alpha = hull(RealInterval::from_rational(lo, p), RealInterval::from_rational(hi, p));
  }
  if (a.N) N = *a.N;
  if (N == 0) throw UsageError("--N is required");
  Verdict v;
  try {
    v = check_band_membership(alpha, spec.xi, spec.bands, spec.epsilon, N);
  } catch (const std::out_of_range& e) {
    throw UsageError(e.what());
  }
  return report(v, nullptr, out, err);
}

int cmd_verify_cert(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const Certificate cert = read_certificate(read_file(a.cert));
  CertificateCheckOptions co;
  co.scan_distance = !a.no_scan;
  co.threads = detail::resolve_threads(a.threads);
  ScanResult scan;
  Verdict v = verify_chain(cert.chain, co, &scan);
  if (v.accepted && cert.verification && co.scan_distance) {
    const ScanResult& r = *cert.verification;
    if (r.K != scan.K || r.argmin_k != scan.argmin_k || !(r.min_dist.lo() == scan.min_dist.lo()) ||
        !(r.min_dist.hi() == scan.min_dist.hi()))
      v = Verdict::reject("verification", "embedded scan does not reproduce");
  }
  return report(v, co.scan_distance ? &scan : nullptr, out, err);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Powers of reals kept away from integers: constructions and verification", "fracpow"};
  app.require_subcommand(1);

  ParamArgs params_args;
  CLI::App* params = app.add_subcommand("params", "Print the parameter set and its feasibility report");
  params_args.attach(params);

  ConstructArgs cargs;
  CLI::App* ceps = app.add_subcommand("construct-eps", "Run the nested-interval construction and write a certificate");
  cargs.params.attach(ceps);
  ceps->add_option("--steps,-N", cargs.steps, "number of steps N")->required();
  auto* strict = ceps->add_flag("--strict", cargs.strict, "fail on any breached inequality (default)");
  auto* relaxed = ceps->add_flag("--relaxed", cargs.relaxed, "record breaches as warnings");
  strict->excludes(relaxed);
  ceps->add_option("--threads", cargs.threads, "worker threads (0: all cores)");
  auto* census = ceps->add_flag("--census", cargs.census, "count admissible cells");
  ceps->add_option("--census-cap", cargs.census_cap, "stop counting at this many cells")->needs(census);
  ceps->add_flag("--scan", cargs.scan, "embed a distance scan to k_N");
  ceps->add_option("--out,-o", cargs.out, "certificate path (default stdout)");

  AlphaArgs aargs;
  CLI::App* calpha = app.add_subcommand("construct-alpha", "Build a Cantor-tree path for a band specification");
  calpha->add_option("--bands", aargs.bands, "band specification file")->required();
  calpha->add_option("--depth,-D", aargs.depth, "path depth")->required();
  calpha->add_option("--select", aargs.select, "first, random or indices")
      ->check(CLI::IsMember({"first", "random", "indices"}));
  calpha->add_option("--seed", aargs.seed, "seed for --select random");
  calpha->add_option("--indices", aargs.indices, "child indices for depths 2, 3, ...")->delimiter(',');
  calpha->add_option("--out,-o", aargs.out, "path file (default stdout)");

  VerifyArgs vargs;
  CLI::App* verify = app.add_subcommand("verify", "Independent verification");
  verify->require_subcommand(1);
  auto common = [&](CLI::App* sub) {
    sub->add_option("--threads", vargs.threads, "worker threads (0: all cores)");
    sub->add_option("--max-bits", vargs.max_bits, "precision escalation budget")->check(CLI::PositiveNumber);
  };
  CLI::App* veps = verify->add_subcommand("eps", "Scan min over k <= K of ||xi base^k + shift_k||");
  veps->add_option("--value", vargs.value, "the base 1 + eps, exact rational");
  veps->add_option("--epsilon", vargs.epsilon, "eps; checks the C eps/|ln eps| bound");
  veps->add_option("--cert", vargs.cert, "certificate; scans its representative against its guarantee");
  veps->add_option("--K", vargs.K, "scan bound (default k_N of the certificate)");
  veps->add_option("--threshold", vargs.threshold, "required lower bound on the minimum");
  veps->add_option("--C", vargs.C, "constant C (default 2^-17)");
  veps->add_option("--xi", vargs.xi, "target scale for --value");
  veps->add_option("--shifts", vargs.shifts, "target shifts file for --value");
  veps->add_option("--fraction-bits", vargs.fraction_bits, "bits kept below the binary point");
  common(veps);
  CLI::App* valpha = verify->add_subcommand("alpha", "Check band membership of alpha");
  valpha->add_option("--path", vargs.path, "path file from construct-alpha");
  valpha->add_option("--bands", vargs.bands, "band specification file");
  valpha->add_option("--alpha", vargs.alpha, "alpha as LO[,HI] exact rationals");
  valpha->add_option("--N", vargs.N, "depth to check (default: path depth)");
  CLI::App* vcert = verify->add_subcommand("cert", "Re-derive every step of a certificate");
  vcert->add_option("certificate", vargs.cert, "certificate file")->required();
  vcert->add_flag("--no-scan", vargs.no_scan, "skip the distance scan");
  common(vcert);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitAccepted : kExitUsage;
  }

  try {
    if (*params) return cmd_params(params_args, out);
    if (*ceps) return cmd_construct_eps(cargs, out, err);
    if (*calpha) return cmd_construct_alpha(aargs, out, err);
    if (*veps) return cmd_verify_eps(vargs, out, err);
    if (*valpha) return cmd_verify_alpha(vargs, out, err);
    if (*vcert) return cmd_verify_cert(vargs, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConstructionError& e) {
    err << "construction failed: " << e.what() << "\n";
    return kExitRejected;
  } catch (const UndecidableError& e) {
    err << "undecided: " << e.what() << "\n";
    return kExitRejected;
  }
  err << "error: no command\n";
  return kExitUsage;
}

}  // namespace fracpow
