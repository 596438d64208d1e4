#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "selmer/twist.hpp"

namespace selmer {

// all emitted certificates carry this schema version
inline constexpr int kCertVersion = 1;

// insertion-ordered JSON so that identical jobs serialize byte-identically
using Json = nlohmann::ordered_json;

Json fe_to_json(const FE& x);
FE fe_from_json(const Json& j);
Json prime_ideal_to_json(const PrimeIdeal& P);

// kind "compute": one Selmer group computation with its condition chain
Json selmer_certificate(const SelmerResult& R, const std::vector<Place>& order);

// kind "twist-search": hypothesis stages plus the full descent chain
Json twist_search_certificate(const Int& a, const Int& b, const Int& D0,
                              const Int& prime_budget,
                              const TwistSearchResult& res);

// RFC-4180 rows D,dim,n_steps,runtime_ms with a header line
std::string scan_csv(const std::vector<ScanRow>& rows);
Json scan_json(const Int& a, const Int& b, const Int& X,
               const std::vector<ScanRow>& rows);

struct VerifyReport {
  bool pass = false;
  std::string kind;
  std::vector<std::string> mismatches;
};

// replays a stored certificate: recomputes the job it describes and compares
// the regenerated certificate field by field
VerifyReport verify_certificate(const Json& cert);

}  // namespace selmer
