#include "fracpow/certificate.hpp"

#include <json.hpp>

namespace fracpow {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& what) { throw FormatError(what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

std::string text_of(const Json& j, const char* what) {
  if (!j.is_string()) bad(std::string(what) + " must be a string");
  return j.get<std::string>();
}

template <class T>
T int_of(const Json& j, const char* what) {
  if (!j.is_number_integer()) bad(std::string(what) + " must be an integer");
  return j.get<T>();
}

bool bool_of(const Json& j, const char* what) {
  if (!j.is_boolean()) bad(std::string(what) + " must be a boolean");
  return j.get<bool>();
}

// Integers may also be plain JSON integers; fractions must be strings so
// that no binary floating point is involved.
std::string exact_text(const Json& j, const char* what) {
  if (j.is_number_integer()) return j.dump();
  return text_of(j, what);
}

Json z_json(const mpz_class& z) { return z.get_str(); }
mpz_class z_from(const Json& j, const char* what) {
  try {
    return parse_integer(exact_text(j, what));
  } catch (const DomainError& e) {
    bad(std::string(what) + ": " + e.what());
  }
}

Json q_json(const mpq_class& q) { return format_rational(q); }
mpq_class q_from(const Json& j, const char* what) {
  try {
    return parse_rational(exact_text(j, what));
  } catch (const DomainError& e) {
    bad(std::string(what) + ": " + e.what());
  }
}

Json d_json(const DyadicRational& d) {
  return Json{{"mantissa", d.mantissa().get_str()}, {"exponent", d.exponent()}};
}
DyadicRational d_from(const Json& j) {
  return DyadicRational(z_from(field(j, "mantissa"), "mantissa"),
                        int_of<std::int64_t>(field(j, "exponent"), "exponent"));
}

Json i_json(const RealInterval& x) { return Json{{"lo", d_json(x.lo())}, {"hi", d_json(x.hi())}}; }
RealInterval i_from(const Json& j) {
  try {
    return RealInterval(d_from(field(j, "lo")), d_from(field(j, "hi")));
  } catch (const DomainError& e) {
    bad(std::string("interval: ") + e.what());
  }
}

Json k_json(const KRange& r) { return Json{{"lo", r.lo}, {"hi", r.hi}}; }
KRange k_from(const Json& j) {
  return {int_of<std::uint64_t>(field(j, "lo"), "k-range"), int_of<std::uint64_t>(field(j, "hi"), "k-range")};
}

Json params_json(const ConstructionParams& p) {
  Json feas = Json::array();
  for (const FeasibilityCheck& c : p.feasibility) {
    feas.push_back(Json{{"name", c.name},
                        {"formula", c.formula},
                        {"passed", c.passed},
                        {"required", c.required},
                        {"detail", c.detail}});
  }
  Json shifts = Json::array();
  for (const mpq_class& s : p.shifts) shifts.push_back(q_json(s));
  return Json{{"t", p.t},
              {"eta", d_json(p.eta)},
              {"a_psi", z_json(p.a_psi)},
              {"h_const_log2", p.h_const_log2},
              {"h", p.h},
              {"h_overridden", p.h_overridden},
              {"zero_psi", p.psi_zero},
              {"psi", i_json(p.psi)},
              {"scale", q_json(p.scale)},
              {"shifts", shifts},
              {"scale_bound", q_json(p.scale_bound)},
              {"lookahead_span", p.lookahead_span ? Json(*p.lookahead_span) : Json(nullptr)},
              {"max_bits", p.max_bits},
              {"enumeration_limit", p.enumeration_limit},
              {"first_level", p.first_level},
              {"first_level_overridden", p.first_level_overridden},
              {"feasibility", feas}};
}

ConstructionParams params_from(const Json& j, TargetMode mode) {
  ConstructionParams p;
  p.t = int_of<int>(field(j, "t"), "t");
  p.eta = d_from(field(j, "eta"));
  p.a_psi = z_from(field(j, "a_psi"), "a_psi");
  p.h_const_log2 = int_of<long>(field(j, "h_const_log2"), "h_const_log2");
  p.h = int_of<std::uint64_t>(field(j, "h"), "h");
  p.h_overridden = bool_of(field(j, "h_overridden"), "h_overridden");
  p.psi_zero = bool_of(field(j, "zero_psi"), "zero_psi");
  p.psi = i_from(field(j, "psi"));
  p.mode = mode;
  p.scale = q_from(field(j, "scale"), "scale");
  const Json& shifts = field(j, "shifts");
  if (!shifts.is_array()) bad("shifts must be a list");
  for (const Json& s : shifts) p.shifts.push_back(q_from(s, "shift"));
  p.scale_bound = q_from(field(j, "scale_bound"), "scale_bound");
  const Json& span = field(j, "lookahead_span");
  if (!span.is_null()) p.lookahead_span = int_of<std::uint64_t>(span, "lookahead_span");
  p.max_bits = int_of<long>(field(j, "max_bits"), "max_bits");
  p.enumeration_limit = int_of<std::size_t>(field(j, "enumeration_limit"), "enumeration_limit");
  p.first_level = int_of<std::int64_t>(field(j, "first_level"), "first_level");
  p.first_level_overridden = bool_of(field(j, "first_level_overridden"), "first_level_overridden");
  const Json& feas = field(j, "feasibility");
  if (!feas.is_array()) bad("feasibility must be a list");
  for (const Json& c : feas) {
    p.feasibility.push_back({text_of(field(c, "name"), "name"), text_of(field(c, "formula"), "formula"),
                             bool_of(field(c, "passed"), "passed"), bool_of(field(c, "required"), "required"),
                             text_of(field(c, "detail"), "detail")});
  }
  return p;
}

Json step_json(const StepRecord& s) {
  Json warnings = Json::array();
  for (const std::string& w : s.warnings) warnings.push_back(w);
  return Json{{"n", s.n},
              {"level", s.level},
              {"w", z_json(s.w)},
              {"checked", k_json(s.checked)},
              {"lookahead", k_json(s.lookahead)},
              {"lookahead_level", s.lookahead_level},
              {"cells_inspected", z_json(s.cells_inspected)},
              {"admissible_count", z_json(s.admissible_count)},
              {"census", s.census},
              {"census_complete", s.census_complete},
              {"covered_measure", i_json(s.covered_measure)},
              {"covered_exact", s.covered_exact},
              {"lemma1_max_ratio", s.lemma1_max_ratio ? i_json(*s.lemma1_max_ratio) : Json(nullptr)},
              {"cover_ratio_certified", s.cover_ratio_certified},
              {"warnings", warnings}};
}

StepRecord step_from(const Json& j) {
  StepRecord s;
  s.n = int_of<std::uint64_t>(field(j, "n"), "n");
  s.level = int_of<std::int64_t>(field(j, "level"), "level");
  s.w = z_from(field(j, "w"), "w");
  s.checked = k_from(field(j, "checked"));
  s.lookahead = k_from(field(j, "lookahead"));
  s.lookahead_level = int_of<std::int64_t>(field(j, "lookahead_level"), "lookahead_level");
  s.cells_inspected = z_from(field(j, "cells_inspected"), "cells_inspected");
  s.admissible_count = z_from(field(j, "admissible_count"), "admissible_count");
  s.census = bool_of(field(j, "census"), "census");
  s.census_complete = bool_of(field(j, "census_complete"), "census_complete");
  s.covered_measure = i_from(field(j, "covered_measure"));
  s.covered_exact = bool_of(field(j, "covered_exact"), "covered_exact");
  const Json& ratio = field(j, "lemma1_max_ratio");
  if (!ratio.is_null()) s.lemma1_max_ratio = i_from(ratio);
  s.cover_ratio_certified = bool_of(field(j, "cover_ratio_certified"), "cover_ratio_certified");
  const Json& warnings = field(j, "warnings");
  if (!warnings.is_array()) bad("warnings must be a list");
  for (const Json& w : warnings) s.warnings.push_back(text_of(w, "warning"));
  return s;
}

Json scan_json(const ScanResult& r) {
  return Json{{"K", r.K},
              {"min_dist", i_json(r.min_dist)},
              {"argmin_k", r.argmin_k},
              {"escalations", r.escalations},
              {"complete", r.complete},
              {"undecided_k", r.undecided_k ? Json(*r.undecided_k) : Json(nullptr)}};
}

ScanResult scan_from(const Json& j) {
  ScanResult r;
  r.K = int_of<std::uint64_t>(field(j, "K"), "K");
  r.min_dist = i_from(field(j, "min_dist"));
  r.argmin_k = int_of<std::uint64_t>(field(j, "argmin_k"), "argmin_k");
  r.escalations = int_of<std::uint64_t>(field(j, "escalations"), "escalations");
  r.complete = bool_of(field(j, "complete"), "complete");
  const Json& u = field(j, "undecided_k");
  if (!u.is_null()) r.undecided_k = int_of<std::uint64_t>(u, "undecided_k");
  return r;
}

Json parse_document(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    bad(std::string("not valid JSON: ") + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json bands_json(const BandSequence& b) {
  Json values = Json::array();
  for (const mpq_class& v : b.values()) values.push_back(q_json(v));
  switch (b.kind()) {
    case BandSequence::Kind::finite:
      return values;
    case BandSequence::Kind::constant:
      return Json{{"constant", values.at(0)}};
    case BandSequence::Kind::periodic:
      return Json{{"periodic", values}};
  }
  return values;
}

BandSequence bands_from(const Json& j) {
  auto list = [](const Json& a) {
    if (!a.is_array() || a.empty()) bad("band list must be a non-empty list");
    std::vector<mpq_class> out;
    for (const Json& v : a) out.push_back(q_from(v, "band value"));
    return out;
  };
  if (j.is_array()) return BandSequence::finite(list(j));
  if (j.is_object() && j.contains("constant")) return BandSequence::constant(q_from(j.at("constant"), "constant"));
  if (j.is_object() && j.contains("periodic")) return BandSequence::periodic(list(j.at("periodic")));
  bad("bands must be a list, {\"constant\": a} or {\"periodic\": [...]}");
}

Json spec_json(const BandSpec& s) {
  return Json{{"epsilon", q_json(s.epsilon)},
              {"eta", q_json(s.eta)},
              {"xi", q_json(s.xi)},
              {"H", z_json(s.H)},
              {"bands", bands_json(s.bands)}};
}

BandSpec spec_from(const Json& j) {
  const mpq_class eps = q_from(field(j, "epsilon"), "epsilon");
  const mpq_class eta = q_from(field(j, "eta"), "eta");
  const mpq_class xi = j.contains("xi") ? q_from(j.at("xi"), "xi") : mpq_class(1);
  BandSequence bands = bands_from(field(j, "bands"));
  try {
    if (j.contains("H")) return make_band_spec(eps, eta, z_from(j.at("H"), "H"), std::move(bands), xi);
    BandSpec spec = choose_params(eps, eta, xi);
    spec.bands = std::move(bands);
    return spec;
  } catch (const DomainError& e) {
    bad(std::string("band spec: ") + e.what());
  }
}

}  // namespace

std::string write_certificate(const Certificate& cert) {
  const Chain& c = cert.chain;
  Json steps = Json::array();
  for (const StepRecord& s : c.steps) steps.push_back(step_json(s));
  Json j{{"version", cert.version},
         {"mode", to_string(c.params.mode)},
         {"strict", c.strict},
         {"params", params_json(c.params)},
         {"steps", steps},
         {"epsilon",
          Json{{"xi_enclosure", i_json(c.xi_enclosure)},
               {"enclosure", i_json(c.epsilon_enclosure)},
               {"exact_representative", d_json(c.epsilon_representative)}}},
         {"guarantee", d_json(c.guarantee)},
         {"k_max", c.k_max},
         {"verification", cert.verification ? scan_json(*cert.verification) : Json(nullptr)}};
  return dump(j);
}

Certificate read_certificate(std::string_view text) {
  const Json j = parse_document(text);
  try {
    Certificate cert;
    cert.version = int_of<int>(field(j, "version"), "version");
    if (cert.version != kCertificateVersion) bad("unsupported certificate version " + std::to_string(cert.version));
    TargetMode mode;
    try {
      mode = parse_target_mode(text_of(field(j, "mode"), "mode"));
    } catch (const DomainError& e) {
      bad(e.what());
    }
    Chain& c = cert.chain;
    c.strict = bool_of(field(j, "strict"), "strict");
    c.params = params_from(field(j, "params"), mode);
    const Json& steps = field(j, "steps");
    if (!steps.is_array()) bad("steps must be a list");
    for (const Json& s : steps) c.steps.push_back(step_from(s));
    const Json& eps = field(j, "epsilon");
    c.xi_enclosure = i_from(field(eps, "xi_enclosure"));
    c.epsilon_enclosure = i_from(field(eps, "enclosure"));
    c.epsilon_representative = d_from(field(eps, "exact_representative"));
    c.guarantee = d_from(field(j, "guarantee"));
    c.k_max = int_of<std::uint64_t>(field(j, "k_max"), "k_max");
    const Json& v = field(j, "verification");
    if (!v.is_null()) cert.verification = scan_from(v);
    return cert;
  } catch (const Json::exception& e) {
    bad(std::string("certificate: ") + e.what());
  }
}

BandSpec read_band_spec(std::string_view text) { return spec_from(parse_document(text)); }

std::string write_band_spec(const BandSpec& spec) { return dump(spec_json(spec)); }

PathDocument path_document(const CantorPath& path) {
  PathDocument doc;
  doc.spec = path.spec;
  for (const CantorNode& node : path.nodes) doc.nodes.emplace_back(node.depth, node.i);
  doc.choices = path.choices;
  doc.alpha = path.alpha;
  doc.dimension = dimension_lower_bound(path.spec.H, path.spec.c);
  return doc;
}

std::string write_path(const PathDocument& doc) {
  Json nodes = Json::array();
  for (const auto& [j, i] : doc.nodes) nodes.push_back(Json{{"j", j}, {"i", z_json(i)}});
  Json j{{"spec", spec_json(doc.spec)},
         {"c", z_json(doc.spec.c)},
         {"nodes", nodes},
         {"choices", doc.choices},
         {"alpha", i_json(doc.alpha)},
         {"dimension_lower_bound", i_json(doc.dimension)}};
  return dump(j);
}

PathDocument read_path(std::string_view text) {
  const Json j = parse_document(text);
  try {
    PathDocument doc;
    doc.spec = spec_from(field(j, "spec"));
    const Json& nodes = field(j, "nodes");
    if (!nodes.is_array()) bad("nodes must be a list");
    for (const Json& n : nodes)
      doc.nodes.emplace_back(int_of<std::uint64_t>(field(n, "j"), "j"), z_from(field(n, "i"), "i"));
    const Json& choices = field(j, "choices");
    if (!choices.is_array()) bad("choices must be a list");
    for (const Json& c : choices) doc.choices.push_back(int_of<std::uint64_t>(c, "choice"));
    doc.alpha = i_from(field(j, "alpha"));
    doc.dimension = i_from(field(j, "dimension_lower_bound"));
    return doc;
  } catch (const Json::exception& e) {
    bad(std::string("path: ") + e.what());
  }
}

std::vector<mpq_class> read_shifts(std::string_view text) {
  const Json j = parse_document(text);
  if (!j.is_array()) bad("shifts file must be a JSON list of rationals");
  std::vector<mpq_class> out;
  for (const Json& v : j) out.push_back(q_from(v, "shift"));
  return out;
}

std::string write_scan(const ScanResult& scan) { return dump(scan_json(scan)); }

std::string write_verdict(const Verdict& v, const ScanResult* scan) {
  Json j{{"accepted", v.accepted},
         {"violation", v.violation.empty() ? Json(nullptr) : Json(v.violation)},
         {"first_violation", v.first_violation ? Json(*v.first_violation) : Json(nullptr)},
         {"margin", i_json(v.margin)}};
  if (scan) j["scan"] = scan_json(*scan);
  return dump(j);
}

}  // namespace fracpow
