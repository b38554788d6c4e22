#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "porous/config.hpp"
#include "porous/construction.hpp"
#include "porous/report.hpp"
#include "porous/surfaces.hpp"
#include "porous/verification.hpp"

namespace porous {

/// Per-level disjointness, per-stage disjoint-or-nested, radius decay, level coverage,
/// stopping threshold, containment, lift heights and P_k nesting.
std::vector<AuditEntry> construction_audits(const HoleFamily& family);

/// The analytic toolkit on family-independent fixtures in dimension n.
std::vector<AuditEntry> analysis_audits(int n, const AuditSettings& settings, std::uint64_t seed);

/// Plane-coverage deficits for A_{m_k} against P_k, k = 1..K, and the achieved coverage alpha'.
struct CoverSummary {
  std::vector<AuditEntry> entries;
  /// min over k of the lower CI of H^n(A_{m_k} ∩ P_k).
  double alpha_prime = 0.0;
};
CoverSummary cover_audits(const HoleFamily& family, const AuditSettings& settings, std::uint64_t seed);

struct BudgetSummary {
  std::vector<AuditEntry> entries;
  std::vector<BudgetLedger> ledgers;
  double global_c = 0.0;         // max empirical ledger constant
  double global_dbound_c = 0.0;  // max per-hole constant over d-holes
};
BudgetSummary budget_audits(const HoleFamily& family, const std::vector<GraphPatch>& corpus,
                            const AuditSettings& settings, std::uint64_t seed);

std::vector<AuditEntry> porosity_audits(const HoleFamily& family, const AuditSettings& settings, std::uint64_t seed);

/// H^n(G(g) ∩ H) against the hit-hole cap for every field, and against alpha'/4 for plane fields.
std::vector<AuditEntry> holes_mass_audits(const HoleFamily& family, const std::vector<GraphPatch>& corpus,
                                          double alpha_prime, const AuditSettings& settings, std::uint64_t seed);

/// Graph extraction round trips and the extracted C^1 contract on the corpus.
std::vector<AuditEntry> extraction_audits(const std::vector<GraphPatch>& corpus, const FamilyHeader& header,
                                          const AuditSettings& settings, std::uint64_t seed);

/// Strict-to-relaxed constant translation, recorded in report headers.
nlohmann::ordered_json relaxed_mapping(const FamilyHeader& header);

}  // namespace porous
