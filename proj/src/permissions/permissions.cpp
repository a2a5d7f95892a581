#include "pdcfa/permissions/permissions.h"

#include <algorithm>
#include <iterator>

#include "pdcfa/taint/findings.h"

namespace pdcfa::permissions {

std::set<Use> collect_permissions(const ir::Program& p,
                                  const reach::AnalysisResult& r) {
  std::set<Use> out;
  for (reach::StateId s = 0; s < r.events.size(); ++s) {
    for (const auto& e : r.events[s]) {
      if (e.kind == machine::EventKind::PermissionUse) {
        out.insert(Use{e.permission,
                       Evidence{r.states[s], e.point, taint::line_of(p, e.point)}});
      }
    }
  }
  return out;
}

std::set<Use> collect_permissions(const ir::Program& p,
                                  const eps::SaturationTrace& t) {
  std::set<Use> out;
  for (const auto& run : t.runs) {
    out.merge(collect_permissions(p, run.result));
  }
  return out;
}

PermissionReport build_permission_report(const std::set<std::string>& requested,
                                         const std::set<Use>& collected) {
  PermissionReport rep;
  rep.requested = requested;
  for (const auto& u : collected) {
    rep.reached.insert(u.permission);
    rep.evidence[u.permission].insert(u.evidence);
  }
  std::set_difference(rep.requested.begin(), rep.requested.end(),
                      rep.reached.begin(), rep.reached.end(),
                      std::inserter(rep.over_privileged, rep.over_privileged.end()));
  std::set_difference(rep.reached.begin(), rep.reached.end(),
                      rep.requested.begin(), rep.requested.end(),
                      std::inserter(rep.missing, rep.missing.end()));
  return rep;
}

} // namespace pdcfa::permissions
