#include "pdcfa/eps/eps.h"

#include <array>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace pdcfa::eps {

namespace {

constexpr std::array<const char*, 6> kUnitKinds = {
    "activity", "service", "receiver", "provider", "background", "other"};
constexpr std::array<const char*, 3> kCategories = {
    "lifecycle-callback", "async-operation", "ui-handler"};
constexpr std::array<const char*, 2> kRegistrations = {"manifest", "layout"};

template <typename E, size_t N>
std::optional<E> lookup(const std::array<const char*, N>& names,
                        const std::string& s) {
  for (size_t i = 0; i < N; ++i) {
    if (s == names[i]) {
      return static_cast<E>(i);
    }
  }
  return std::nullopt;
}

} // namespace

const char* to_string(UnitKind k) { return kUnitKinds.at(static_cast<size_t>(k)); }
const char* to_string(EntryCategory c) {
  return kCategories.at(static_cast<size_t>(c));
}
const char* to_string(Registration r) {
  return kRegistrations.at(static_cast<size_t>(r));
}
std::optional<UnitKind> unit_kind_from_string(const std::string& s) {
  return lookup<UnitKind>(kUnitKinds, s);
}
std::optional<EntryCategory> entry_category_from_string(const std::string& s) {
  return lookup<EntryCategory>(kCategories, s);
}
std::optional<Registration> registration_from_string(const std::string& s) {
  return lookup<Registration>(kRegistrations, s);
}

std::vector<Unit> discover_entry_points(const ir::Program& p,
                                        const Manifest& m) {
  std::vector<Unit> out = m.units;
  std::set<std::string> names;
  for (auto& u : out) {
    if (!names.insert(u.name).second) {
      throw std::invalid_argument(fmt::format("duplicate unit {}", u.name));
    }
    if (u.entry_points.empty()) {
      throw EmptyUnit(fmt::format("unit {} declares no entry points", u.name));
    }
    for (auto& e : u.entry_points) {
      auto id = p.find_method(e.method);
      if (!id) {
        throw UnknownMethod(fmt::format("unit {}: unknown entry point {}",
                                        u.name, ir::to_string(e.method)));
      }
      if (p.method(*id).is_abstract()) {
        throw UnknownMethod(fmt::format("unit {}: entry point {} has no body",
                                        u.name, ir::to_string(e.method)));
      }
      e.id = *id;
    }
  }
  return out;
}

namespace {

// One pass over a unit; returns whether the heap grew.
bool unit_pass(const machine::MachineContext& ctx, const std::vector<Unit>& units,
               size_t u, const reach::AnalysisConfig& cfg,
               SaturationTrace& t, std::vector<EntryRun>& runs) {
  bool grew = false;
  const auto& unit = units[u];
  for (size_t i = 0; i < unit.entry_points.size(); ++i) {
    const auto& ep = unit.entry_points[i];
    auto r = reach::analyze(ctx, ep.id, t.heap, cfg);
    spdlog::debug("unit {} entry {}: {} states, {} steps", unit.name,
                  ir::to_string(ep.method), r.states.size(), r.steps);
    grew |= t.heap.join(r.heap);
    for (reach::StateId s = 0; s < r.states.size(); ++s) {
      t.visits[r.states[s].point()] += r.visits[s];
    }
    t.steps += r.steps;
    if (r.incomplete) {
      t.incomplete = true;
      t.limit_reason = r.limit_reason;
    }
    runs.push_back(EntryRun{u, i, std::move(r)});
    if (t.incomplete) {
      break;
    }
  }
  return grew;
}

} // namespace

SaturationTrace saturate_unit(const machine::MachineContext& ctx,
                              const std::vector<Unit>& units, size_t u,
                              const reach::Heap& in,
                              const reach::AnalysisConfig& cfg) {
  SaturationTrace t;
  t.heap = in;
  t.unit_passes.assign(units.size(), 0);
  t.rounds = 1;
  while (true) {
    std::vector<EntryRun> runs;
    bool grew = unit_pass(ctx, units, u, cfg, t, runs);
    t.unit_passes[u] += 1;
    t.runs = std::move(runs);
    if (!grew || t.incomplete) {
      break;
    }
  }
  return t;
}

SaturationTrace saturate_app(const machine::MachineContext& ctx,
                             const std::vector<Unit>& units,
                             const reach::AnalysisConfig& cfg,
                             const reach::Heap* init) {
  SaturationTrace t;
  t.heap = init ? *init : reach::Heap(cfg.policy.constant_budget);
  t.unit_passes.assign(units.size(), 0);
  while (true) {
    t.rounds += 1;
    bool grew = false;
    std::vector<EntryRun> round;
    for (size_t u = 0; u < units.size() && !t.incomplete; ++u) {
      auto ut = saturate_unit(ctx, units, u, t.heap, cfg);
      grew |= t.heap.join(ut.heap);
      t.unit_passes[u] += ut.unit_passes[u];
      t.steps += ut.steps;
      for (const auto& [pt, n] : ut.visits) {
        t.visits[pt] += n;
      }
      // A unit whose first pass already grew the heap ran more than once.
      grew |= ut.unit_passes[u] > 1;
      for (auto& r : ut.runs) {
        round.push_back(std::move(r));
      }
      if (ut.incomplete) {
        t.incomplete = true;
        t.limit_reason = ut.limit_reason;
      }
    }
    t.runs = std::move(round);
    spdlog::info("saturation round {}: {} store entries, {} taint entries",
                 t.rounds, t.heap.store.size(), t.heap.taint.size());
    if (!grew || t.incomplete) {
      break;
    }
  }
  return t;
}

} // namespace pdcfa::eps
