#include <algorithm>
#include <chrono>
#include <exception>
#include <set>
#include <thread>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "pdcfa/reach/reach.h"

namespace pdcfa::reach {

using machine::Addr;
using machine::AddrHash;
using machine::Effects;
using machine::EmptyStackOutcome;
using machine::StepResult;
using machine::StoreView;
using machine::Transition;

namespace {

// Items computed against one store snapshot before any of them is applied.
// Fixed so the schedule does not depend on the number of workers.
constexpr size_t kBatch = 32;

struct LimitHit {
  std::string reason;
};

/*
 * Shared bookkeeping: node interning, the heap, dependency tracking and the
 * batched worklist. Subclasses define what a work item is.
 */
class EngineBase {
 public:
  EngineBase(const machine::MachineContext& ctx, machine::MethodId entry,
             const Heap& init, const AnalysisConfig& cfg, Mode mode)
      : m_ctx(ctx), m_cfg(cfg), m_start(std::chrono::steady_clock::now()) {
    m_r.mode = mode;
    m_r.entry = entry;
    m_r.heap = init;
  }

 protected:
  StateId intern(const ControlState& s) {
    auto [it, fresh] =
        m_r.index.emplace(s, static_cast<StateId>(m_r.states.size()));
    if (fresh) {
      m_r.states.push_back(s);
      m_r.visits.push_back(0);
      m_r.events.emplace_back();
    }
    return it->second;
  }

  void add_edge(StateId from, StateId to, EdgeKind kind, const Frame& f) {
    Edge e{from, to, kind, kind == EdgeKind::NoOp ? Frame{} : f};
    if (m_edge_set.insert(e).second) {
      m_r.edges.push_back(e);
    }
  }

  void add_events(StateId s, const std::vector<machine::Event>& evs) {
    auto& dst = m_r.events[s];
    for (const auto& e : evs) {
      if (std::find(dst.begin(), dst.end(), e) == dst.end()) {
        dst.push_back(e);
      }
    }
  }

  void apply_effects(StateId s, const Effects& e) {
    for (const auto& [a, v] : e.joins) {
      if (m_r.heap.store.join(a, v)) {
        grew(a);
      }
    }
    for (const auto& [a, t] : e.taint_joins) {
      if (m_r.heap.taint.join(a, t)) {
        grew(a);
      }
    }
    add_events(s, e.events);
  }

  void grew(const Addr& a) {
    m_last_growth[a] = ++m_seq;
    auto it = m_deps.find(a);
    if (it != m_deps.end()) {
      for (uint32_t item : it->second) {
        requeue(item);
      }
    }
  }

  // Registers the reads of an item; returns false when one of them grew
  // after the item's snapshot, so the item must run again.
  bool register_reads(uint32_t item, const std::vector<Addr>& reads,
                      uint64_t snapshot) {
    bool fresh = true;
    for (const auto& a : reads) {
      m_deps[a].insert(item);
      auto it = m_last_growth.find(a);
      if (it != m_last_growth.end() && it->second > snapshot) {
        fresh = false;
      }
    }
    return fresh;
  }

  void requeue(uint32_t item) {
    if (item >= m_queued.size()) {
      m_queued.resize(item + 1, 0);
    }
    if (!m_queued[item]) {
      m_queued[item] = 1;
      m_pending.push_back(item);
    }
  }

  virtual const ControlState& item_state(uint32_t item) const = 0;

  // Moves freshly queued items onto the stack, smallest state on top.
  void flush_pending() {
    std::stable_sort(m_pending.begin(), m_pending.end(),
                     [&](uint32_t a, uint32_t b) {
                       const auto& sa = item_state(a);
                       const auto& sb = item_state(b);
                       if (sa == sb) {
                         return a > b;
                       }
                       return sb < sa;
                     });
    m_stack.insert(m_stack.end(), m_pending.begin(), m_pending.end());
    m_pending.clear();
  }

  void check_limits() {
    if (m_r.states.size() > m_cfg.max_states) {
      throw LimitHit{fmt::format("state budget of {} exceeded",
                                 m_cfg.max_states)};
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - m_start)
                      .count();
    if (secs > m_cfg.max_seconds) {
      throw LimitHit{
          fmt::format("time budget of {} s exceeded", m_cfg.max_seconds)};
    }
  }

  // Runs compute over a batch, in parallel when configured.
  template <typename Out, typename F>
  std::vector<Out> compute_batch(const std::vector<uint32_t>& batch, F&& f) {
    std::vector<Out> outs(batch.size());
    size_t jobs = std::min(std::max<size_t>(m_cfg.jobs, 1), batch.size());
    if (jobs <= 1) {
      for (size_t i = 0; i < batch.size(); ++i) {
        outs[i] = f(batch[i]);
      }
      return outs;
    }
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> workers;
    for (size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (size_t i = w; i < batch.size(); i += jobs) {
            outs[i] = f(batch[i]);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) {
      t.join();
    }
    for (auto& e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
    return outs;
  }

  template <typename Out, typename Compute, typename Apply>
  void drive(Compute&& compute, Apply&& apply) {
    try {
      flush_pending();
      while (!m_stack.empty()) {
        check_limits();
        std::vector<uint32_t> batch;
        while (!m_stack.empty() && batch.size() < kBatch) {
          uint32_t item = m_stack.back();
          m_stack.pop_back();
          m_queued[item] = 0;
          batch.push_back(item);
        }
        uint64_t snapshot = m_seq;
        auto outs = compute_batch<Out>(batch, compute);
        for (size_t i = 0; i < batch.size(); ++i) {
          apply(batch[i], outs[i], snapshot);
        }
        flush_pending();
      }
    } catch (const LimitHit& l) {
      m_r.incomplete = true;
      m_r.limit_reason = l.reason;
      spdlog::warn("analysis stopped early: {}", l.reason);
    }
  }

  const machine::MachineContext& m_ctx;
  AnalysisConfig m_cfg;
  AnalysisResult m_r;

 private:
  std::chrono::steady_clock::time_point m_start;
  std::set<Edge> m_edge_set;
  std::unordered_map<Addr, std::unordered_set<uint32_t>, AddrHash> m_deps;
  std::unordered_map<Addr, uint64_t, AddrHash> m_last_growth;
  uint64_t m_seq = 0;
  std::vector<char> m_queued;
  std::vector<uint32_t> m_pending;
  std::vector<uint32_t> m_stack;
};

// ---------------------------------------------------------------------------
// Pushdown: summarization over (context entry, state) path edges.

struct Caller {
  StateId entry;
  StateId call;
  Frame frame;
  auto operator<=>(const Caller&) const = default;
};

struct EntryInfo {
  std::vector<Caller> callers;
  std::set<Caller> caller_set;
  std::vector<StateId> exits;
  std::unordered_set<StateId> exit_set;
  bool bottom = false;
};

struct PdOut {
  StepResult step;
  size_t callers_seen = 0;
  std::vector<std::vector<Transition>> pops; // per caller
  std::optional<EmptyStackOutcome> empty;
  std::vector<Addr> reads;
};

class PushdownEngine : public EngineBase {
 public:
  using EngineBase::EngineBase;

  AnalysisResult run() {
    Effects bindings;
    ControlState s0 = machine::inject_entry(m_ctx, m_r.entry, bindings);
    StateId i0 = intern(s0);
    m_r.initial = i0;
    apply_effects(i0, bindings);
    m_entries[i0].bottom = true;
    path(i0, i0);
    drive<PdOut>([this](uint32_t item) { return compute(item); },
                 [this](uint32_t item, PdOut& o, uint64_t snap) {
                   apply(item, o, snap);
                 });
    return std::move(m_r);
  }

 protected:
  const ControlState& item_state(uint32_t item) const override {
    return m_r.states[m_items[item].second];
  }

 private:
  uint32_t path(StateId entry, StateId state) {
    uint64_t key = (static_cast<uint64_t>(entry) << 32) | state;
    auto [it, fresh] =
        m_path_index.emplace(key, static_cast<uint32_t>(m_items.size()));
    if (fresh) {
      m_items.emplace_back(entry, state);
      requeue(it->second);
    }
    return it->second;
  }

  PdOut compute(uint32_t item) const {
    auto [entry, state] = m_items[item];
    const ControlState& s = m_r.states[state];
    PdOut o;
    StoreView view(m_r.heap.store, m_r.heap.taint, &o.reads);
    o.step = machine::successors(m_ctx, s, view);
    if (o.step.needs_pop) {
      const auto& info = m_entries.at(entry);
      o.callers_seen = info.callers.size();
      for (const auto& c : info.callers) {
        o.pops.push_back(machine::pop_with(m_ctx, s, c.frame, view));
      }
      if (info.bottom) {
        o.empty = machine::on_empty_stack(m_ctx, s, view);
      }
    }
    return o;
  }

  void apply(uint32_t item, PdOut& o, uint64_t snapshot) {
    auto [entry, state] = m_items[item];
    m_r.visits[state] += 1;
    m_r.steps += 1;
    if (!register_reads(item, o.reads, snapshot)) {
      requeue(item);
    }
    for (const auto& t : o.step.transitions) {
      StateId to = intern(t.target);
      apply_effects(state, t.effects);
      if (t.kind == Transition::Kind::NoOp) {
        add_edge(state, to, EdgeKind::NoOp, t.frame);
        path(entry, to);
        continue;
      }
      add_edge(state, to, EdgeKind::Push, t.frame);
      auto& callee = m_entries[to];
      Caller c{entry, state, t.frame};
      if (callee.caller_set.insert(c).second) {
        callee.callers.push_back(c);
        for (StateId x : callee.exits) {
          requeue(path(to, x));
        }
      }
      path(to, to);
    }
    if (!o.step.needs_pop) {
      return;
    }
    auto& info = m_entries[entry];
    if (info.exit_set.insert(state).second) {
      info.exits.push_back(state);
    }
    if (info.callers.size() != o.callers_seen) {
      requeue(item);
    }
    for (size_t i = 0; i < o.pops.size(); ++i) {
      Caller c = m_entries[entry].callers[i];
      for (const auto& t : o.pops[i]) {
        StateId to = intern(t.target);
        apply_effects(state, t.effects);
        add_edge(state, to, EdgeKind::Pop, c.frame);
        add_summary(c, to, entry, state);
        path(c.entry, to);
      }
    }
    if (o.empty) {
      apply_effects(state, o.empty->effects);
      if (o.empty->kind == EmptyStackOutcome::Kind::Returned) {
        m_r.terminals[state] = Terminal::Returned;
      } else if (o.empty->kind == EmptyStackOutcome::Kind::Uncaught) {
        m_r.terminals[state] = Terminal::Uncaught;
      }
    }
  }

  void add_summary(const Caller& c, StateId target, StateId entry,
                   StateId exit) {
    auto key = std::make_tuple(c.call, c.frame, target);
    if (m_summary_keys.insert(key).second) {
      m_r.summaries.push_back(
          EpsSummary{c.call, c.frame, target, entry, exit,
                     m_r.summaries.size()});
    }
  }

  std::vector<std::pair<StateId, StateId>> m_items;
  std::unordered_map<uint64_t, uint32_t> m_path_index;
  std::unordered_map<StateId, EntryInfo> m_entries;
  std::set<std::tuple<StateId, Frame, StateId>> m_summary_keys;
};

// ---------------------------------------------------------------------------
// Finite: continuations live in a store at addresses bounded by k.

struct FinOut {
  StepResult step;
  std::vector<KontEntry> konts;
  std::vector<std::vector<Transition>> pops; // per kont entry
  std::optional<EmptyStackOutcome> empty;
  std::vector<Addr> reads;
};

uint64_t hash_context(const machine::Context& c) {
  uint64_t h = machine::mix64(c.size);
  for (size_t i = 0; i < c.size; ++i) {
    h = machine::hash_combine(h, c.sites[i].method);
    h = machine::hash_combine(h, c.sites[i].index);
  }
  return h;
}

class FiniteEngine : public EngineBase {
 public:
  using EngineBase::EngineBase;

  AnalysisResult run() {
    Effects bindings;
    ControlState s0 = machine::inject_entry(m_ctx, m_r.entry, bindings);
    StateId i0 = intern(s0);
    m_r.initial = i0;
    apply_effects(i0, bindings);
    node(i0, kHalt);
    drive<FinOut>([this](uint32_t item) { return compute(item); },
                  [this](uint32_t item, FinOut& o, uint64_t snap) {
                    apply(item, o, snap);
                  });
    return std::move(m_r);
  }

 protected:
  const ControlState& item_state(uint32_t item) const override {
    return m_r.states[m_nodes[item].first];
  }

 private:
  uint32_t node(StateId s, KAddr k) {
    auto [it, fresh] = m_node_index.emplace(
        std::make_pair(s, k), static_cast<uint32_t>(m_nodes.size()));
    if (fresh) {
      m_nodes.emplace_back(s, k);
      requeue(it->second);
    }
    return it->second;
  }

  // Continuation address of a frame pushed at `s`: call frames are keyed by
  // the callee and the caller's context cut to k, handler frames by their
  // label and the current context cut to k.
  KAddr kalloc(const ControlState& s, const Frame& f,
               const ControlState& target) const {
    auto ctx = m_ctx.domain.fp_of(s.fp).ctx.truncate(m_cfg.policy.k);
    uint64_t h;
    if (f.is_fun()) {
      h = machine::hash_combine(1, target.method);
    } else {
      h = machine::hash_combine(machine::hash_combine(2, f.owner), f.target);
    }
    h = machine::hash_combine(h, hash_context(ctx));
    return h == kHalt ? 1 : h;
  }

  FinOut compute(uint32_t item) const {
    auto [state, k] = m_nodes[item];
    const ControlState& s = m_r.states[state];
    FinOut o;
    StoreView view(m_r.heap.store, m_r.heap.taint, &o.reads);
    o.step = machine::successors(m_ctx, s, view);
    if (o.step.needs_pop) {
      if (k == kHalt) {
        o.empty = machine::on_empty_stack(m_ctx, s, view);
      } else {
        o.konts = m_r.heap.kont.get(k);
        for (const auto& e : o.konts) {
          o.pops.push_back(machine::pop_with(m_ctx, s, e.frame, view));
        }
      }
    }
    return o;
  }

  void apply(uint32_t item, FinOut& o, uint64_t snapshot) {
    auto [state, k] = m_nodes[item];
    m_r.visits[state] += 1;
    m_r.steps += 1;
    if (!register_reads(item, o.reads, snapshot)) {
      requeue(item);
    }
    for (const auto& t : o.step.transitions) {
      StateId to = intern(t.target);
      apply_effects(state, t.effects);
      if (t.kind == Transition::Kind::NoOp) {
        add_edge(state, to, EdgeKind::NoOp, t.frame);
        node(to, k);
        continue;
      }
      add_edge(state, to, EdgeKind::Push, t.frame);
      KAddr k2 = kalloc(m_r.states[state], t.frame, t.target);
      if (m_r.heap.kont.join(k2, KontEntry{t.frame, k})) {
        for (uint32_t n : m_kdeps[k2]) {
          requeue(n);
        }
      }
      node(to, k2);
    }
    if (!o.step.needs_pop) {
      return;
    }
    if (k != kHalt) {
      m_kdeps[k].insert(item);
      if (m_r.heap.kont.get(k).size() != o.konts.size()) {
        requeue(item);
      }
    }
    for (size_t i = 0; i < o.pops.size(); ++i) {
      const auto& ke = o.konts[i];
      for (const auto& t : o.pops[i]) {
        StateId to = intern(t.target);
        apply_effects(state, t.effects);
        add_edge(state, to, EdgeKind::Pop, ke.frame);
        node(to, ke.next);
      }
    }
    if (o.empty) {
      apply_effects(state, o.empty->effects);
      if (o.empty->kind == EmptyStackOutcome::Kind::Returned) {
        m_r.terminals[state] = Terminal::Returned;
      } else if (o.empty->kind == EmptyStackOutcome::Kind::Uncaught) {
        m_r.terminals[state] = Terminal::Uncaught;
      }
    }
  }

  std::vector<std::pair<StateId, KAddr>> m_nodes;
  std::map<std::pair<StateId, KAddr>, uint32_t> m_node_index;
  std::unordered_map<KAddr, std::unordered_set<uint32_t>> m_kdeps;
};

} // namespace

AnalysisResult analyze_pushdown(const machine::MachineContext& ctx,
                                machine::MethodId entry, const Heap& init,
                                const AnalysisConfig& cfg) {
  return PushdownEngine(ctx, entry, init, cfg, Mode::Pushdown).run();
}

AnalysisResult analyze_finite(const machine::MachineContext& ctx,
                              machine::MethodId entry, const Heap& init,
                              const AnalysisConfig& cfg) {
  return FiniteEngine(ctx, entry, init, cfg, Mode::Finite).run();
}

} // namespace pdcfa::reach
