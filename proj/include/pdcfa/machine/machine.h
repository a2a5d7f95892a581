#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "pdcfa/ir/program.h"
#include "pdcfa/machine/domain.h"
#include "pdcfa/machine/store.h"
#include "pdcfa/taint/summary.h"

namespace pdcfa::machine {

enum class StateKind : uint8_t {
  Normal,    // about to execute body[index]
  AfterCall, // a call at body[index] returned; move ret into its target
  Unwinding, // exception thrown at body[index] is unwinding the stack
};

/*
 * Control component of a configuration. For Unwinding states, fp is the frame
 * currently being unwound, origin is the thrower's frame (the thrown values
 * are read there) and passed is the set of handler classes already popped.
 */
struct ControlState {
  StateKind kind = StateKind::Normal;
  MethodId method = 0;
  uint32_t index = 0;
  FpId fp = 0;
  FpId origin = 0;
  SetId passed = 0;

  static ControlState normal(MethodId m, uint32_t i, FpId fp) {
    return {StateKind::Normal, m, i, fp, 0, 0};
  }
  ProgramPoint point() const { return {method, index}; }

  bool operator==(const ControlState&) const = default;
  auto operator<=>(const ControlState& o) const {
    return std::tie(method, index, fp, kind, origin, passed) <=>
           std::tie(o.method, o.index, o.fp, o.kind, o.origin, o.passed);
  }
};

struct ControlStateHash {
  size_t operator()(const ControlState& s) const;
};

struct Frame {
  enum class Kind : uint8_t { Fun, Handler };
  Kind kind = Kind::Fun;
  FpId fp = 0;           // Fun: caller frame
  ProgramPoint ret;      // Fun: the call statement
  ClassId handler = 0;   // Handler: caught class
  uint32_t target = 0;   // Handler: label statement index
  MethodId owner = 0;    // Handler: method holding the label

  static Frame fun(FpId fp, ProgramPoint ret) {
    Frame f;
    f.fp = fp;
    f.ret = ret;
    return f;
  }
  static Frame handler_frame(ClassId c, uint32_t target, MethodId owner) {
    Frame f;
    f.kind = Kind::Handler;
    f.handler = c;
    f.target = target;
    f.owner = owner;
    return f;
  }
  bool is_fun() const { return kind == Kind::Fun; }

  bool operator==(const Frame&) const = default;
  auto operator<=>(const Frame&) const = default;
};

struct FrameHash {
  size_t operator()(const Frame& f) const;
};

struct AnalysisPolicy {
  size_t k = 1;
  bool heap_context = false;
  size_t constant_budget = kDefaultConstantBudget;
};

enum class EventKind : uint8_t { SourceApplied, SinkHit, PermissionUse, Unresolved };

// Observations made while stepping, attributed by the engine to the state
// that produced them.
struct Event {
  EventKind kind = EventKind::Unresolved;
  ProgramPoint point;
  TaintLabel label;                                  // SourceApplied, SinkHit
  taint::SinkKind sink_kind = taint::SinkKind::Network; // SinkHit
  std::string permission;                            // PermissionUse

  bool operator==(const Event&) const = default;
};

struct Effects {
  std::vector<std::pair<Addr, Val>> joins;
  std::vector<std::pair<Addr, TaintSet>> taint_joins;
  std::vector<Event> events;

  void join(const Addr& a, Val v) {
    if (!v.empty()) {
      joins.emplace_back(a, std::move(v));
    }
  }
  void taint(const Addr& a, TaintSet t) {
    if (!t.empty()) {
      taint_joins.emplace_back(a, std::move(t));
    }
  }
  void append(const Effects& o);
  bool empty() const {
    return joins.empty() && taint_joins.empty() && events.empty();
  }
};

struct Transition {
  enum class Kind : uint8_t { NoOp, Push };
  Kind kind = Kind::NoOp;
  Frame frame; // Push only
  ControlState target;
  Effects effects;
};

struct StepResult {
  std::vector<Transition> transitions;
  // The state's next move depends on the top stack frame (see pop_with).
  bool needs_pop = false;
};

struct EmptyStackOutcome {
  enum class Kind : uint8_t { Stuck, Returned, Uncaught };
  Kind kind = Kind::Stuck;
  Effects effects;
};

// Reads through the view are recorded so the engine can revisit a state when
// an address it depends on grows.
class StoreView {
 public:
  StoreView(const Store& s, const TaintStore& t,
            std::vector<Addr>* reads = nullptr)
      : m_store(s), m_taint(t), m_reads(reads) {}

  const Val& get(const Addr& a) const {
    if (m_reads) {
      m_reads->push_back(a);
    }
    return m_store.get(a);
  }
  const TaintSet& taint(const Addr& a) const {
    if (m_reads) {
      m_reads->push_back(a);
    }
    return m_taint.get(a);
  }

 private:
  const Store& m_store;
  const TaintStore& m_taint;
  std::vector<Addr>* m_reads;
};

class MalformedState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MachineContext {
  const ir::Program& program;
  const taint::SummaryTable& summaries;
  Domain& domain;
  AnalysisPolicy policy;
};

// Abstract evaluation of atomic expressions.
Val eval_atomic(const MachineContext& ctx, const ir::AExp& e, FpId fp,
                const StoreView& view);
TaintSet eval_taint(const MachineContext& ctx, const ir::AExp& e, FpId fp,
                    const StoreView& view);
Val eval_field(const MachineContext& ctx, const ir::AExp& object, FpId fp,
               const StoreView& view, Symbol field);
// Primitive application over value sets; ill-typed combinations contribute
// nothing.
Val apply_prim(Domain& d, ir::PrimOp op, const std::vector<Val>& args);

FpId alloc_fp(const MachineContext& ctx, FpId caller, ProgramPoint site,
              MethodId callee);
OpId alloc_op(const MachineContext& ctx, FpId fp, ProgramPoint site);
// Default field values of cls and its ancestors for object op.
void init_object(const MachineContext& ctx, OpId op, ClassId cls,
                 Effects& out);
Val type_default(const ir::Type& t);
// Every value a parameter of this type could take at an entry point.
Val type_wide(const MachineContext& ctx, const ir::Type& t);

FpId entry_fp(const MachineContext& ctx, MethodId entry);
// Initial state of an entry point plus bindings for its receiver and
// parameters.
ControlState inject_entry(const MachineContext& ctx, MethodId entry,
                          Effects& bindings);

StepResult successors(const MachineContext& ctx, const ControlState& s,
                      const StoreView& view);
std::vector<Transition> pop_with(const MachineContext& ctx,
                                 const ControlState& s, const Frame& f,
                                 const StoreView& view);
EmptyStackOutcome on_empty_stack(const MachineContext& ctx,
                                 const ControlState& s, const StoreView& view);

/*
 * Explicit configuration with its own stores and an unbounded stack. Used for
 * stepping small programs directly; the reachability engines share one store
 * instead.
 */
struct AbstractConfig {
  ControlState state;
  Store store;
  TaintStore taint;
  std::vector<Frame> kont; // top is back()

  bool operator==(const AbstractConfig&) const = default;
};

AbstractConfig inject(const MachineContext& ctx, const ir::MethodRef& entry,
                      const Store& initial, const TaintStore& initial_taint);
std::vector<AbstractConfig> step(const MachineContext& ctx,
                                 const AbstractConfig& c);
void apply_effects(const Effects& e, Store& s, TaintStore& t);

std::string describe(const Domain& d, const ControlState& s);
std::string describe(const Domain& d, const Frame& f);

} // namespace pdcfa::machine
