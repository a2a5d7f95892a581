#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdcfa/reach/reach.h"

namespace pdcfa::eps {

enum class UnitKind : uint8_t {
  Activity,
  Service,
  Receiver,
  Provider,
  Background,
  Other
};
enum class EntryCategory : uint8_t { LifecycleCallback, AsyncOperation, UiHandler };
enum class Registration : uint8_t { Manifest, Layout };

const char* to_string(UnitKind k);
const char* to_string(EntryCategory c);
const char* to_string(Registration r);
std::optional<UnitKind> unit_kind_from_string(const std::string& s);
std::optional<EntryCategory> entry_category_from_string(const std::string& s);
std::optional<Registration> registration_from_string(const std::string& s);

struct EntryPoint {
  ir::MethodRef method;
  EntryCategory category = EntryCategory::LifecycleCallback;
  Registration registration = Registration::Manifest;
  machine::MethodId id = 0; // filled in by discovery
};

struct Unit {
  std::string name;
  UnitKind kind = UnitKind::Other;
  std::vector<EntryPoint> entry_points;
};

struct Manifest {
  std::string app_name;
  std::set<std::string> requested_permissions;
  std::vector<Unit> units;
};

class UnknownMethod : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyUnit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Units exactly as declared, with every entry point resolved against p.
std::vector<Unit> discover_entry_points(const ir::Program& p,
                                        const Manifest& m);

struct EntryRun {
  size_t unit = 0;
  size_t entry = 0;
  reach::AnalysisResult result;
};

struct SaturationTrace {
  std::vector<EntryRun> runs; // final round, in declaration order
  std::vector<size_t> unit_passes; // passes per unit, summed over rounds
  size_t rounds = 0;
  reach::Heap heap;
  std::map<machine::ProgramPoint, size_t> visits; // all runs of all rounds
  size_t steps = 0;
  bool incomplete = false;
  std::string limit_reason;
};

// Analyzes each entry point of `u` in order, threading the heap, until a
// full pass adds nothing.
SaturationTrace saturate_unit(const machine::MachineContext& ctx,
                              const std::vector<Unit>& units, size_t u,
                              const reach::Heap& in,
                              const reach::AnalysisConfig& cfg);

// Round-robin over units until a full round adds nothing.
SaturationTrace saturate_app(const machine::MachineContext& ctx,
                             const std::vector<Unit>& units,
                             const reach::AnalysisConfig& cfg,
                             const reach::Heap* init = nullptr);

} // namespace pdcfa::eps
