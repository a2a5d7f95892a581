#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pdcfa/permissions/permissions.h"
#include "pdcfa/taint/findings.h"

namespace pdcfa::report {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "pdcfa 0.1.0";
inline constexpr size_t kDefaultTopN = 50;

class PredicateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Atom {
  enum class Kind : uint8_t {
    ClassIs,
    MethodIs,
    LineIn,
    TaintHas,
    SinkKindIs,
    PermissionIs,
    UnitIs
  };
  Kind kind = Kind::ClassIs;
  std::string text; // glob or name
  int64_t lo = 0;
  int64_t hi = 0;
  taint::Category category = taint::Category::Location;
  taint::SinkKind sink_kind = taint::SinkKind::Network;
};

/*
 * Conjunction of atoms, written `classIs(Kitty*) && taintHas(Location)`.
 * Location atoms (classIs, methodIs, lineIn) hold when the source or the sink
 * site satisfies them; permissionIs holds when the sink call itself uses the
 * permission.
 */
struct Predicate {
  std::vector<Atom> atoms;
  std::string text;

  static Predicate parse(std::string_view s);
};

// Everything the emitters need besides the findings themselves.
struct ReportContext {
  const ir::Program& program;
  const machine::Domain& domain;
  const std::vector<eps::Unit>& units;
  const eps::SaturationTrace& trace;
  std::string app_name;
  Json provenance; // config echo and input digests
};

bool matches(const ReportContext& ctx, const Predicate& pred,
             const taint::TaintFinding& f);

std::vector<taint::TaintFinding> filter(const ReportContext& ctx,
                                        const Predicate* pred,
                                        std::vector<taint::TaintFinding> fs);

std::vector<std::string>
verdict_hints(const ReportContext& ctx,
              const std::vector<taint::TaintFinding>& findings,
              const permissions::PermissionReport& perms);

Json emit_flow_report(const ReportContext& ctx,
                      const std::vector<taint::TaintFinding>& findings,
                      const Predicate* pred,
                      const std::vector<std::string>& hints);
Json emit_permissions_report(const ReportContext& ctx,
                             const permissions::PermissionReport& rep);
Json emit_heatmap(const ReportContext& ctx, size_t top_n = kDefaultTopN);

// DOT rendering of every final-round state graph, one cluster per run.
std::string export_graph(const ReportContext& ctx,
                         const std::vector<taint::TaintFinding>& findings);

// Terminal summary of a flow report and a permissions report.
std::string render_text(const Json& flow, const Json& perms);

std::string sha256_hex(std::string_view data);

// Serialized form used for every report file.
std::string dump(const Json& j);

} // namespace pdcfa::report
