#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pdcfa/eps/eps.h"

namespace pdcfa::permissions {

struct Evidence {
  machine::ControlState state;
  machine::ProgramPoint point;
  int64_t line = 0;

  auto operator<=>(const Evidence& o) const {
    return std::tie(point, line, state) <=> std::tie(o.point, o.line, o.state);
  }
  bool operator==(const Evidence&) const = default;
};

struct Use {
  std::string permission;
  Evidence evidence;

  auto operator<=>(const Use&) const = default;
  bool operator==(const Use&) const = default;
};

struct PermissionReport {
  std::set<std::string> requested;
  std::set<std::string> reached;
  std::set<std::string> over_privileged;
  std::set<std::string> missing;
  std::map<std::string, std::set<Evidence>> evidence;
  bool lower_bound = false; // some run hit a resource limit
};

std::set<Use> collect_permissions(const ir::Program& p,
                                  const reach::AnalysisResult& r);
std::set<Use> collect_permissions(const ir::Program& p,
                                  const eps::SaturationTrace& t);

PermissionReport build_permission_report(const std::set<std::string>& requested,
                                         const std::set<Use>& collected);

} // namespace pdcfa::permissions
