#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "porous/construction.hpp"
#include "porous/surfaces.hpp"

namespace porous {

/// Ceilings C_config for the audited inequalities whose constants the theory leaves open.
struct AuditConstants {
  double budget = 0.054;   // Σ|B| <= C (∫|grad g|^2 + Σ eps)
  double dbound = 1.0;     // |B| <= C ∫_{R_k(B)} |grad(g - a)|^2
  double area = 82.0;      // omega_n h^n <= C ∫_{B ∩ {g >= h/2}} |grad g|^2
  double flatten = 0.012;  // |residual| <= C eps L^n(B)
  double smoothed = 3.9;   // sup |grad g^{eps t}| <= C eps
};

struct AuditSettings {
  std::uint64_t samples = 1u << 16;
  std::uint64_t residue_samples = 4096;
  std::uint64_t porosity_points = 1000;
  double porosity_tol = 1e-6;
  int analysis_fields = 100;
  /// ||f - p||_{C^1} < delta for surfaces fed to graph extraction; 0 selects 1e-2 r.
  double extract_delta = 0.0;
  AuditConstants constants;
};

struct RunConfig {
  BuildConfig build;
  AuditSettings audit;
  /// The document as loaded, echoed into reports.
  nlohmann::ordered_json document;
};

/// 16 hex digits of FNV-1a over the bytes.
std::string content_hash(const std::string& bytes);

/// Parses and validates a configuration document. Throws InvalidArgument listing every
/// problem found (unknown keys, wrong types, out-of-range values).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// The published schema, as a JSON document.
nlohmann::ordered_json config_schema();

/// A corpus file is a JSON list of {kind, seed, count, params: {...}}.
std::vector<CorpusSpec> parse_corpus(const std::string& text);
std::vector<CorpusSpec> load_corpus(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace porous
