// File formats: construction certificates, Cantor paths, band specs and
// shift lists. Every number is written as an integer or a decimal string;
// dyadics as {"mantissa", "exponent"} and intervals as {"lo", "hi"}. The
// writers are deterministic, so equal values give byte-identical files.

#ifndef FRACPOW_CERTIFICATE_HPP
#define FRACPOW_CERTIFICATE_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fracpow/cantor.hpp"
#include "fracpow/schlag.hpp"
#include "fracpow/verify.hpp"

namespace fracpow {

/// Malformed or unsupported document.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCertificateVersion = 1;

struct Certificate {
  int version = kCertificateVersion;
  Chain chain;  // chain.params.mode is the mode tag
  std::optional<ScanResult> verification;
};

std::string write_certificate(const Certificate& cert);
/// Restores the recorded values verbatim; nothing is recomputed.
Certificate read_certificate(std::string_view text);

/// Band spec: {"epsilon", "eta", "xi"?, "H"?, "bands"} where "bands" is a
/// list (finite), {"constant": a} or {"periodic": [...]}. Without "H" the
/// smallest admissible H is chosen.
BandSpec read_band_spec(std::string_view text);
std::string write_band_spec(const BandSpec& spec);

struct PathDocument {
  BandSpec spec;
  std::vector<std::pair<std::uint64_t, mpz_class>> nodes;  // (j, i)
  std::vector<std::uint64_t> choices;
  RealInterval alpha;
  RealInterval dimension;
};

PathDocument path_document(const CantorPath& path);
std::string write_path(const PathDocument& doc);
PathDocument read_path(std::string_view text);

/// JSON list of rationals, shifts[k - 1] for power k.
std::vector<mpq_class> read_shifts(std::string_view text);

std::string write_scan(const ScanResult& scan);
/// Machine-readable verdict, with the scan that produced it when given.
std::string write_verdict(const Verdict& verdict, const ScanResult* scan = nullptr);

}  // namespace fracpow

#endif  // FRACPOW_CERTIFICATE_HPP
