#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdcfa/machine/machine.h"

namespace pdcfa::reach {

using machine::ControlState;
using machine::Frame;
using machine::FpId;

enum class Mode : uint8_t { Pushdown, Finite };

const char* to_string(Mode m);

struct AnalysisConfig {
  Mode mode = Mode::Pushdown;
  machine::AnalysisPolicy policy;
  size_t max_states = 500000;
  double max_seconds = 300;
  size_t jobs = 1;
};

// Continuation addresses of the finite engine. 0 is the empty stack.
using KAddr = uint64_t;
inline constexpr KAddr kHalt = 0;

struct KontEntry {
  Frame frame;
  KAddr next = kHalt;
  bool operator==(const KontEntry&) const = default;
  auto operator<=>(const KontEntry&) const = default;
};

class KontStore {
 public:
  const std::vector<KontEntry>& get(KAddr a) const;
  bool join(KAddr a, const KontEntry& e);
  bool join(const KontStore& o);
  size_t size() const { return m_map.size(); }
  bool operator==(const KontStore& o) const { return m_map == o.m_map; }

 private:
  std::unordered_map<KAddr, std::vector<KontEntry>> m_map; // sorted entries
};

// Everything an analysis run threads to the next: value store, taint store
// and (finite mode only) the continuation store.
struct Heap {
  machine::Store store;
  machine::TaintStore taint;
  KontStore kont;

  explicit Heap(size_t budget = machine::kDefaultConstantBudget)
      : store(budget) {}
  bool join(const Heap& o);
  bool operator==(const Heap& o) const {
    return store == o.store && taint == o.taint && kont == o.kont;
  }
};

using StateId = uint32_t;

enum class EdgeKind : uint8_t { NoOp, Push, Pop };

const char* to_string(EdgeKind k);

struct Edge {
  StateId from = 0;
  StateId to = 0;
  EdgeKind kind = EdgeKind::NoOp;
  Frame frame; // Push and Pop

  bool operator==(const Edge&) const = default;
  auto operator<=>(const Edge&) const = default;
};

// A balanced sub-path: the push at `call` enters `entry`, which reaches
// `exit`, whose pop of `frame` lands on `target`.
struct EpsSummary {
  StateId call = 0;
  Frame frame;
  StateId target = 0;
  StateId entry = 0;
  StateId exit = 0;
  size_t order = 0; // discovery index
};

enum class Terminal : uint8_t { Returned, Uncaught };

struct PathStep {
  StateId state = 0;
  EdgeKind via = EdgeKind::NoOp; // edge into this state; NoOp for the first
  Frame frame;
};
using Path = std::vector<PathStep>;

/*
 * Dyck state graph of one run plus the final heap. Nodes are control states;
 * in finite mode they are the projection of (control state, continuation
 * address) pairs.
 */
struct AnalysisResult {
  Mode mode = Mode::Pushdown;
  machine::MethodId entry = 0;
  StateId initial = 0;
  std::vector<ControlState> states;
  std::unordered_map<ControlState, StateId, machine::ControlStateHash> index;
  std::vector<Edge> edges; // deduplicated, in discovery order
  std::vector<EpsSummary> summaries;
  std::vector<size_t> visits;
  std::vector<std::vector<machine::Event>> events;
  std::map<StateId, Terminal> terminals;
  Heap heap;
  bool incomplete = false;
  std::string limit_reason;
  size_t steps = 0;

  std::optional<StateId> find(const ControlState& s) const;
  std::set<ControlState> state_set() const;
  bool has_edge(StateId from, StateId to, EdgeKind kind,
                const Frame& frame) const;
};

AnalysisResult analyze_pushdown(const machine::MachineContext& ctx,
                                machine::MethodId entry, const Heap& init,
                                const AnalysisConfig& cfg);
AnalysisResult analyze_finite(const machine::MachineContext& ctx,
                              machine::MethodId entry, const Heap& init,
                              const AnalysisConfig& cfg);
// Dispatches on cfg.mode.
AnalysisResult analyze(const machine::MachineContext& ctx,
                       machine::MethodId entry, const Heap& init,
                       const AnalysisConfig& cfg);

/*
 * Witness from `from` to `to`. Pushdown results give a path whose stack
 * actions replay legally from an empty stack (summaries are expanded); finite
 * results give a shortest plain graph path.
 */
std::optional<Path> reconstruct_path(const AnalysisResult& r, StateId from,
                                     StateId to);

// Replays the stack actions of a path from an empty stack and checks every
// step against the graph. Returns an explanation on failure.
std::optional<std::string> check_balanced(const AnalysisResult& r,
                                          const Path& p);

} // namespace pdcfa::reach
