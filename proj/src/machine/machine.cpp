#include "pdcfa/machine/machine.h"

#include <algorithm>
#include <limits>
#include <map>

#include <fmt/format.h>

namespace pdcfa::machine {

using ir::AExp;
using ir::PrimOp;

size_t ControlStateHash::operator()(const ControlState& s) const {
  uint64_t h = hash_combine(static_cast<uint64_t>(s.kind), s.method);
  h = hash_combine(h, s.index);
  h = hash_combine(h, s.fp);
  h = hash_combine(h, s.origin);
  return hash_combine(h, s.passed);
}

size_t FrameHash::operator()(const Frame& f) const {
  uint64_t h = hash_combine(static_cast<uint64_t>(f.kind), f.fp);
  h = hash_combine(h, f.ret.method);
  h = hash_combine(h, f.ret.index);
  h = hash_combine(h, f.handler);
  h = hash_combine(h, f.target);
  return hash_combine(h, f.owner);
}

void Effects::append(const Effects& o) {
  joins.insert(joins.end(), o.joins.begin(), o.joins.end());
  taint_joins.insert(taint_joins.end(), o.taint_joins.begin(),
                     o.taint_joins.end());
  events.insert(events.end(), o.events.begin(), o.events.end());
}

// ---------------------------------------------------------------------------
// Primitive operations

namespace {

using V = AbstractValue;

void add_bools(Val& out, bool t, bool f) {
  if (t) {
    out.insert(V::boolean(true));
  }
  if (f) {
    out.insert(V::boolean(false));
  }
}

bool is_int(const V& v) { return v.tag == Tag::Int || v.tag == Tag::AnyInt; }
bool is_str(const V& v) { return v.tag == Tag::Str || v.tag == Tag::AnyStr; }

void arith(Domain& d, PrimOp op, const V& x, const V& y, Val& out) {
  if (op == PrimOp::Add && is_str(x) && is_str(y)) {
    if (x.tag == Tag::Str && y.tag == Tag::Str) {
      out.insert(V::str(d.str(d.str_of(x.a) + d.str_of(y.a))));
    } else {
      out.insert(V::any_str());
    }
    return;
  }
  if (!is_int(x) || !is_int(y)) {
    return;
  }
  if (x.tag == Tag::AnyInt || y.tag == Tag::AnyInt) {
    out.insert(V::any_int());
    return;
  }
  int64_t a = x.n;
  int64_t b = y.n;
  int64_t r = 0;
  bool overflow = false;
  switch (op) {
  case PrimOp::Add:
    overflow = __builtin_add_overflow(a, b, &r);
    break;
  case PrimOp::Sub:
    overflow = __builtin_sub_overflow(a, b, &r);
    break;
  case PrimOp::Mul:
    overflow = __builtin_mul_overflow(a, b, &r);
    break;
  case PrimOp::Div:
  case PrimOp::Rem:
    if (b == 0) {
      return; // the concrete machine faults here
    }
    if (a == std::numeric_limits<int64_t>::min() && b == -1) {
      overflow = op == PrimOp::Div;
      r = 0;
    } else {
      r = op == PrimOp::Div ? a / b : a % b;
    }
    break;
  default:
    return;
  }
  out.insert(overflow ? V::any_int() : V::integer(r));
}

void bitwise(PrimOp op, const V& x, const V& y, Val& out) {
  if (x.tag == Tag::Bool && y.tag == Tag::Bool) {
    bool a = x.n != 0;
    bool b = y.n != 0;
    bool r = op == PrimOp::And ? (a && b) : op == PrimOp::Or ? (a || b) : (a != b);
    out.insert(V::boolean(r));
    return;
  }
  if (!is_int(x) || !is_int(y)) {
    return;
  }
  if (x.tag == Tag::AnyInt || y.tag == Tag::AnyInt) {
    out.insert(V::any_int());
    return;
  }
  int64_t r = op == PrimOp::And ? (x.n & y.n)
              : op == PrimOp::Or ? (x.n | y.n)
                                 : (x.n ^ y.n);
  out.insert(V::integer(r));
}

void compare(PrimOp op, const V& x, const V& y, Val& out) {
  if (!is_int(x) || !is_int(y)) {
    return;
  }
  if (x.tag == Tag::AnyInt || y.tag == Tag::AnyInt) {
    add_bools(out, true, true);
    return;
  }
  bool r = false;
  switch (op) {
  case PrimOp::Lt:
    r = x.n < y.n;
    break;
  case PrimOp::Le:
    r = x.n <= y.n;
    break;
  case PrimOp::Gt:
    r = x.n > y.n;
    break;
  case PrimOp::Ge:
    r = x.n >= y.n;
    break;
  default:
    return;
  }
  out.insert(V::boolean(r));
}

// Possible outcomes of an equality test: {may be equal, may differ}.
std::pair<bool, bool> equality(const V& x, const V& y) {
  if (is_int(x) && is_int(y)) {
    if (x.tag == Tag::AnyInt || y.tag == Tag::AnyInt) {
      return {true, true};
    }
    return {x.n == y.n, x.n != y.n};
  }
  if (is_str(x) && is_str(y)) {
    if (x.tag == Tag::AnyStr || y.tag == Tag::AnyStr) {
      return {true, true};
    }
    return {x.a == y.a, x.a != y.a};
  }
  if (x.tag == Tag::Object && y.tag == Tag::Object) {
    // One abstract object may stand for many concrete ones.
    return {x.a == y.a, true};
  }
  if (x.tag != y.tag) {
    return {false, true};
  }
  // Bool, Null, Void.
  return {x.n == y.n, x.n != y.n};
}

} // namespace

Val apply_prim(Domain& d, PrimOp op, const std::vector<Val>& args) {
  Val out;
  if (ir::prim_op_arity(op) == 1) {
    for (const auto& x : args.at(0)) {
      switch (op) {
      case PrimOp::Neg:
        if (x.tag == Tag::AnyInt ||
            (x.tag == Tag::Int && x.n == std::numeric_limits<int64_t>::min())) {
          out.insert(V::any_int());
        } else if (x.tag == Tag::Int) {
          out.insert(V::integer(-x.n));
        }
        break;
      case PrimOp::Not:
        if (x.tag == Tag::Bool) {
          out.insert(V::boolean(x.n == 0));
        } else if (x.tag == Tag::Int) {
          out.insert(V::integer(~x.n));
        } else if (x.tag == Tag::AnyInt) {
          out.insert(V::any_int());
        }
        break;
      default:
        break;
      }
    }
    return out;
  }
  for (const auto& x : args.at(0)) {
    for (const auto& y : args.at(1)) {
      switch (op) {
      case PrimOp::Add:
      case PrimOp::Sub:
      case PrimOp::Mul:
      case PrimOp::Div:
      case PrimOp::Rem:
        arith(d, op, x, y, out);
        break;
      case PrimOp::And:
      case PrimOp::Or:
      case PrimOp::Xor:
        bitwise(op, x, y, out);
        break;
      case PrimOp::Lt:
      case PrimOp::Le:
      case PrimOp::Gt:
      case PrimOp::Ge:
        compare(op, x, y, out);
        break;
      case PrimOp::Eq:
      case PrimOp::Ne: {
        auto [eq, ne] = equality(x, y);
        if (op == PrimOp::Eq) {
          add_bools(out, eq, ne);
        } else {
          add_bools(out, ne, eq);
        }
        break;
      }
      default:
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

Val eval_atomic(const MachineContext& ctx, const AExp& e, FpId fp,
                const StoreView& view) {
  switch (e.kind) {
  case AExp::Kind::This:
    return view.get(Addr::reg(fp, ctx.program.sym_this()));
  case AExp::Kind::True:
    return Val{V::boolean(true)};
  case AExp::Kind::False:
    return Val{V::boolean(false)};
  case AExp::Kind::Null:
    return Val{V::null()};
  case AExp::Kind::Void:
    return Val{V::void_value()};
  case AExp::Kind::Name:
    return view.get(Addr::reg(fp, e.name));
  case AExp::Kind::Int:
    return Val{V::integer(e.int_value)};
  case AExp::Kind::Str:
    return Val{V::str(ctx.domain.str(e.text))};
  case AExp::Kind::Op: {
    std::vector<Val> args;
    for (const auto& a : e.args) {
      args.push_back(eval_atomic(ctx, a, fp, view));
    }
    return apply_prim(ctx.domain, e.op, args);
  }
  case AExp::Kind::InstanceOf: {
    Val out;
    for (const auto& v : eval_atomic(ctx, e.args.at(0), fp, view)) {
      bool r = v.is_object() && ir::is_subclass(ctx.program, v.class_id(),
                                                e.class_id);
      out.insert(V::boolean(r));
    }
    return out;
  }
  }
  return {};
}

TaintSet eval_taint(const MachineContext& ctx, const AExp& e, FpId fp,
                    const StoreView& view) {
  switch (e.kind) {
  case AExp::Kind::This:
    return view.taint(Addr::reg(fp, ctx.program.sym_this()));
  case AExp::Kind::Name:
    return view.taint(Addr::reg(fp, e.name));
  case AExp::Kind::Op:
  case AExp::Kind::InstanceOf: {
    TaintSet out;
    for (const auto& a : e.args) {
      out.join(eval_taint(ctx, a, fp, view));
    }
    return out;
  }
  default:
    return {};
  }
}

Val eval_field(const MachineContext& ctx, const AExp& object, FpId fp,
               const StoreView& view, Symbol field) {
  Val out;
  for (const auto& v : eval_atomic(ctx, object, fp, view)) {
    if (v.is_object()) {
      out.join(view.get(Addr::field(v.op(), field)), 0);
    }
  }
  return out;
}

namespace {

TaintSet field_taint(const MachineContext& ctx, const AExp& object, FpId fp,
                     const StoreView& view, Symbol field) {
  TaintSet out;
  for (const auto& v : eval_atomic(ctx, object, fp, view)) {
    if (v.is_object()) {
      out.join(view.taint(Addr::field(v.op(), field)));
    }
  }
  return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Allocation

FpId alloc_fp(const MachineContext& ctx, FpId caller, ProgramPoint site,
              MethodId callee) {
  auto f = ctx.domain.fp_of(caller);
  return ctx.domain.fp(callee, f.ctx.extend(site, ctx.policy.k));
}

OpId alloc_op(const MachineContext& ctx, FpId fp, ProgramPoint site) {
  Context c;
  if (ctx.policy.heap_context) {
    c = ctx.domain.fp_of(fp).ctx;
  }
  return ctx.domain.op(site, c);
}

Val type_default(const ir::Type& t) {
  switch (t.kind) {
  case ir::Type::Kind::Class:
    return Val{V::null()};
  case ir::Type::Kind::Boolean:
    return Val{V::boolean(false)};
  default:
    return Val{V::integer(0)};
  }
}

Val type_wide(const MachineContext& ctx, const ir::Type& t) {
  (void)ctx;
  switch (t.kind) {
  case ir::Type::Kind::Class:
    if (t.class_name == ir::kStringClass) {
      return Val{V::any_str(), V::null()};
    }
    return Val{V::null()};
  case ir::Type::Kind::Boolean:
    return Val{V::boolean(true), V::boolean(false)};
  default:
    return Val{V::any_int()};
  }
}

void init_object(const MachineContext& ctx, OpId op, ClassId cls,
                 Effects& out) {
  for (const auto* f : ctx.program.all_fields(cls)) {
    out.join(Addr::field(op, f->name), type_default(f->type));
  }
}

FpId entry_fp(const MachineContext& ctx, MethodId entry) {
  return ctx.domain.fp(entry, Context{});
}

ControlState inject_entry(const MachineContext& ctx, MethodId entry,
                          Effects& bindings) {
  const auto& m = ctx.program.method(entry);
  FpId fp = entry_fp(ctx, entry);
  // The IR does not mark static methods, so every entry gets a receiver.
  OpId receiver = ctx.domain.op(ProgramPoint{kSyntheticMethod, m.owner}, {});
  bindings.join(Addr::reg(fp, ctx.program.sym_this()),
                Val{V::object(receiver, m.owner)});
  init_object(ctx, receiver, m.owner, bindings);
  for (size_t i = 0; i < m.param_types.size(); ++i) {
    bindings.join(Addr::reg(fp, ctx.program.sym_param(i)),
                  type_wide(ctx, m.param_types[i]));
  }
  return ControlState::normal(entry, 0, fp);
}

// ---------------------------------------------------------------------------
// Transitions

namespace {

Transition noop(ControlState target, Effects e = {}) {
  Transition t;
  t.target = target;
  t.effects = std::move(e);
  return t;
}

const ir::Stmt* stmt_at(const MachineContext& ctx, MethodId m, uint32_t i) {
  const auto& body = ctx.program.method(m).body;
  return i < body.size() ? &body[i] : nullptr;
}

ControlState next(const ControlState& s) {
  return ControlState::normal(s.method, s.index + 1, s.fp);
}

void invoke(const MachineContext& ctx, const ControlState& s,
            const ir::AssignInvokeStmt& st, const StoreView& view,
            StepResult& out) {
  const auto& call = st.call;
  const auto& p = ctx.program;
  ProgramPoint site = s.point();
  ControlState after{StateKind::AfterCall, s.method, s.index, s.fp, 0, 0};

  std::vector<Val> args;
  std::vector<TaintSet> taints;
  for (const auto& a : call.args) {
    args.push_back(eval_atomic(ctx, a, s.fp, view));
    taints.push_back(eval_taint(ctx, a, s.fp, view));
  }

  if (const auto* sum = ctx.summaries.match(call.class_name,
                                            p.name(call.method_name),
                                            call.arg_types)) {
    auto outcome = taint::apply_summary(*sum, args, taints, site);
    Effects e;
    Addr ret = Addr::reg(s.fp, p.sym_ret());
    e.join(ret, outcome.ret);
    if (sum->source) {
      for (const auto& l : outcome.ret_taint) {
        if (l.source == site) {
          e.events.push_back(Event{EventKind::SourceApplied, site, l});
        }
      }
    }
    e.taint(ret, outcome.ret_taint);
    for (const auto& h : outcome.sink_hits) {
      e.events.push_back(Event{EventKind::SinkHit, site, h.label, h.kind});
    }
    for (const auto& perm : sum->permissions) {
      Event ev;
      ev.kind = EventKind::PermissionUse;
      ev.point = site;
      ev.permission = perm;
      e.events.push_back(ev);
    }
    out.transitions.push_back(noop(after, std::move(e)));
    return;
  }

  auto unresolved = [&] {
    Effects e;
    Event ev;
    ev.kind = EventKind::Unresolved;
    ev.point = site;
    e.events.push_back(ev);
    out.transitions.push_back(noop(after, std::move(e)));
  };

  auto enter = [&](MethodId callee, const Val* receivers) {
    FpId fp2 = alloc_fp(ctx, s.fp, site, callee);
    Transition t;
    t.kind = Transition::Kind::Push;
    t.frame = Frame::fun(s.fp, site);
    t.target = ControlState::normal(callee, 0, fp2);
    size_t first = 0;
    if (!call.is_static()) {
      Addr self = Addr::reg(fp2, p.sym_this());
      t.effects.join(self, *receivers);
      t.effects.taint(self, taints[0]);
      first = 1;
    }
    for (size_t i = first; i < args.size(); ++i) {
      Addr param = Addr::reg(fp2, p.sym_param(i - first));
      t.effects.join(param, args[i]);
      t.effects.taint(param, taints[i]);
    }
    out.transitions.push_back(std::move(t));
  };

  Symbol name = call.method_name;
  if (call.kind == ir::InvokeKind::Virtual ||
      call.kind == ir::InvokeKind::Interface) {
    std::map<MethodId, Val> groups;
    bool missing = false;
    for (const auto& v : args.at(0)) {
      if (!v.is_object()) {
        continue;
      }
      auto callee = ir::try_resolve_method(p, v.class_id(), name,
                                           call.arg_types, call.kind);
      if (callee) {
        groups[*callee].insert(v);
      } else {
        missing = true;
      }
    }
    for (const auto& [callee, receivers] : groups) {
      enter(callee, &receivers);
    }
    if (missing && groups.empty()) {
      unresolved();
    }
    return;
  }

  auto cls = p.find_class(call.class_name);
  std::optional<MethodId> callee;
  if (cls) {
    callee = ir::try_resolve_method(p, *cls, name, call.arg_types, call.kind);
  }
  if (!callee) {
    unresolved();
    return;
  }
  if (call.is_static()) {
    enter(*callee, nullptr);
    return;
  }
  Val receivers;
  for (const auto& v : args.at(0)) {
    if (v.is_object()) {
      receivers.insert(v);
    }
  }
  if (!receivers.empty()) {
    enter(*callee, &receivers);
  }
}

// Objects thrown at the origin of an unwinding state that no handler passed
// so far has caught.
std::vector<V> pending_exceptions(const MachineContext& ctx,
                                  const ControlState& s,
                                  const StoreView& view) {
  const auto* st = stmt_at(ctx, s.method, s.index)->as<ir::ThrowStmt>();
  auto passed = ctx.domain.class_set_of(s.passed);
  std::vector<V> out;
  for (const auto& v : eval_atomic(ctx, st->value, s.origin, view)) {
    if (!v.is_object()) {
      continue;
    }
    bool caught = std::any_of(passed.begin(), passed.end(), [&](ClassId c) {
      return ir::is_subclass(ctx.program, v.class_id(), c);
    });
    if (!caught) {
      out.push_back(v);
    }
  }
  return out;
}

} // namespace

StepResult successors(const MachineContext& ctx, const ControlState& s,
                      const StoreView& view) {
  StepResult out;
  const auto& p = ctx.program;
  const ir::Stmt* stmt = stmt_at(ctx, s.method, s.index);
  if (!stmt) {
    return out; // fell off the end of the body
  }

  if (s.kind == StateKind::Unwinding) {
    out.needs_pop = true;
    return out;
  }
  if (s.kind == StateKind::AfterCall) {
    const auto* st = stmt->as<ir::AssignInvokeStmt>();
    if (!st) {
      throw MalformedState("after-call state not at an invoke");
    }
    Effects e;
    Addr ret = Addr::reg(s.fp, p.sym_ret());
    Addr dst = Addr::reg(s.fp, st->dst);
    e.join(dst, view.get(ret));
    e.taint(dst, view.taint(ret));
    out.transitions.push_back(noop(next(s), std::move(e)));
    return out;
  }

  std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, ir::LabelStmt> ||
                      std::is_same_v<T, ir::NopStmt> ||
                      std::is_same_v<T, ir::LineStmt>) {
          out.transitions.push_back(noop(next(s)));
        } else if constexpr (std::is_same_v<T, ir::GotoStmt>) {
          out.transitions.push_back(
              noop(ControlState::normal(s.method, st.target + 1, s.fp)));
        } else if constexpr (std::is_same_v<T, ir::IfStmt>) {
          Val c = eval_atomic(ctx, st.cond, s.fp, view);
          bool taken = false;
          bool fall = false;
          for (const auto& v : c) {
            if (v.tag == Tag::Bool) {
              taken = taken || v.n != 0;
              fall = fall || v.n == 0;
            } else {
              taken = fall = true;
            }
          }
          if (taken) {
            out.transitions.push_back(
                noop(ControlState::normal(s.method, st.target + 1, s.fp)));
          }
          if (fall) {
            out.transitions.push_back(noop(next(s)));
          }
        } else if constexpr (std::is_same_v<T, ir::AssignAtomicStmt>) {
          Effects e;
          Addr dst = Addr::reg(s.fp, st.dst);
          e.join(dst, eval_atomic(ctx, st.value, s.fp, view));
          e.taint(dst, eval_taint(ctx, st.value, s.fp, view));
          out.transitions.push_back(noop(next(s), std::move(e)));
        } else if constexpr (std::is_same_v<T, ir::AssignNewStmt>) {
          Effects e;
          OpId op = alloc_op(ctx, s.fp, s.point());
          e.join(Addr::reg(s.fp, st.dst),
                 Val{V::object(op, st.value.class_id)});
          init_object(ctx, op, st.value.class_id, e);
          out.transitions.push_back(noop(next(s), std::move(e)));
        } else if constexpr (std::is_same_v<T, ir::AssignInvokeStmt>) {
          invoke(ctx, s, st, view, out);
        } else if constexpr (std::is_same_v<T, ir::FieldPutStmt>) {
          Effects e;
          Val v = eval_atomic(ctx, st.value, s.fp, view);
          TaintSet t = eval_taint(ctx, st.value, s.fp, view);
          for (const auto& o : eval_atomic(ctx, st.object, s.fp, view)) {
            if (o.is_object()) {
              Addr a = Addr::field(o.op(), st.field);
              e.join(a, v);
              e.taint(a, t);
            }
          }
          out.transitions.push_back(noop(next(s), std::move(e)));
        } else if constexpr (std::is_same_v<T, ir::FieldGetStmt>) {
          Effects e;
          Addr dst = Addr::reg(s.fp, st.dst);
          e.join(dst, eval_field(ctx, st.object, s.fp, view, st.field));
          e.taint(dst, field_taint(ctx, st.object, s.fp, view, st.field));
          out.transitions.push_back(noop(next(s), std::move(e)));
        } else if constexpr (std::is_same_v<T, ir::PushHandlerStmt>) {
          Transition t;
          t.kind = Transition::Kind::Push;
          t.frame = Frame::handler_frame(st.class_id, st.target, s.method);
          t.target = next(s);
          out.transitions.push_back(std::move(t));
        } else if constexpr (std::is_same_v<T, ir::ThrowStmt>) {
          ControlState u{StateKind::Unwinding, s.method, s.index, s.fp, s.fp,
                         Domain::kEmptySet};
          out.transitions.push_back(noop(u));
        } else if constexpr (std::is_same_v<T, ir::PopHandlerStmt> ||
                             std::is_same_v<T, ir::ReturnStmt>) {
          out.needs_pop = true;
        } else {
          throw MalformedState("move-from-ret statement in a method body");
        }
      },
      stmt->node);
  return out;
}

std::vector<Transition> pop_with(const MachineContext& ctx,
                                 const ControlState& s, const Frame& f,
                                 const StoreView& view) {
  std::vector<Transition> out;
  const auto& p = ctx.program;
  const ir::Stmt* stmt = stmt_at(ctx, s.method, s.index);

  if (s.kind == StateKind::Unwinding) {
    auto pending = pending_exceptions(ctx, s, view);
    if (pending.empty()) {
      return out;
    }
    if (f.is_fun()) {
      ControlState u = s;
      u.fp = f.fp;
      out.push_back(noop(u));
      return out;
    }
    Val caught;
    bool uncaught = false;
    for (const auto& v : pending) {
      if (ir::is_subclass(p, v.class_id(), f.handler)) {
        caught.insert(v);
      } else {
        uncaught = true;
      }
    }
    if (!caught.empty()) {
      Effects e;
      Addr exn = Addr::reg(s.fp, p.sym_exn());
      e.join(exn, caught);
      const auto* st = stmt->as<ir::ThrowStmt>();
      e.taint(exn, eval_taint(ctx, st->value, s.origin, view));
      out.push_back(
          noop(ControlState::normal(f.owner, f.target + 1, s.fp), std::move(e)));
    }
    if (uncaught) {
      ControlState u = s;
      auto passed = ctx.domain.class_set_of(s.passed);
      passed.push_back(f.handler);
      u.passed = ctx.domain.class_set(passed);
      out.push_back(noop(u));
    }
    return out;
  }

  if (const auto* ret = stmt->as<ir::ReturnStmt>()) {
    if (!f.is_fun()) {
      out.push_back(noop(s)); // skip the handler and retry the return
      return out;
    }
    Effects e;
    Addr r = Addr::reg(f.fp, p.sym_ret());
    e.join(r, eval_atomic(ctx, ret->value, s.fp, view));
    e.taint(r, eval_taint(ctx, ret->value, s.fp, view));
    ControlState after{StateKind::AfterCall, f.ret.method, f.ret.index, f.fp,
                       0, 0};
    out.push_back(noop(after, std::move(e)));
    return out;
  }

  if (stmt->as<ir::PopHandlerStmt>()) {
    if (f.is_fun()) {
      throw MalformedState(fmt::format(
          "pop-handler over a call frame at {}", describe(ctx.domain, s)));
    }
    out.push_back(noop(next(s)));
    return out;
  }
  throw MalformedState(
      fmt::format("state {} does not pop", describe(ctx.domain, s)));
}

EmptyStackOutcome on_empty_stack(const MachineContext& ctx,
                                 const ControlState& s,
                                 const StoreView& view) {
  EmptyStackOutcome out;
  const ir::Stmt* stmt = stmt_at(ctx, s.method, s.index);
  if (s.kind == StateKind::Unwinding) {
    if (!pending_exceptions(ctx, s, view).empty()) {
      out.kind = EmptyStackOutcome::Kind::Uncaught;
    }
    return out;
  }
  if (const auto* ret = stmt->as<ir::ReturnStmt>()) {
    out.kind = EmptyStackOutcome::Kind::Returned;
    Addr r = Addr::reg(s.fp, ctx.program.sym_ret());
    out.effects.join(r, eval_atomic(ctx, ret->value, s.fp, view));
    out.effects.taint(r, eval_taint(ctx, ret->value, s.fp, view));
    return out;
  }
  if (stmt->as<ir::PopHandlerStmt>()) {
    throw MalformedState(fmt::format("pop-handler with an empty stack at {}",
                                     describe(ctx.domain, s)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Explicit configurations

void apply_effects(const Effects& e, Store& s, TaintStore& t) {
  for (const auto& [a, v] : e.joins) {
    s.join(a, v);
  }
  for (const auto& [a, ts] : e.taint_joins) {
    t.join(a, ts);
  }
}

AbstractConfig inject(const MachineContext& ctx, const ir::MethodRef& entry,
                      const Store& initial, const TaintStore& initial_taint) {
  auto m = ctx.program.find_method(entry);
  if (!m) {
    throw ir::ResolveError(
        fmt::format("cannot inject unknown method {}", ir::to_string(entry)));
  }
  AbstractConfig c;
  c.state = ControlState::normal(*m, 0, entry_fp(ctx, *m));
  c.store = initial;
  c.taint = initial_taint;
  return c;
}

std::vector<AbstractConfig> step(const MachineContext& ctx,
                                 const AbstractConfig& c) {
  std::vector<AbstractConfig> out;
  StoreView view(c.store, c.taint);
  auto emit = [&](const Transition& t, std::vector<Frame> kont) {
    AbstractConfig n{t.target, c.store, c.taint, std::move(kont)};
    if (t.kind == Transition::Kind::Push) {
      n.kont.push_back(t.frame);
    }
    apply_effects(t.effects, n.store, n.taint);
    out.push_back(std::move(n));
  };
  auto r = successors(ctx, c.state, view);
  for (const auto& t : r.transitions) {
    emit(t, c.kont);
  }
  if (r.needs_pop) {
    if (c.kont.empty()) {
      auto e = on_empty_stack(ctx, c.state, view);
      (void)e; // terminal: no successor configuration
    } else {
      std::vector<Frame> rest(c.kont.begin(), c.kont.end() - 1);
      for (const auto& t : pop_with(ctx, c.state, c.kont.back(), view)) {
        emit(t, rest);
      }
    }
  }
  return out;
}

std::string describe(const Domain& d, const ControlState& s) {
  const char* kind = s.kind == StateKind::Normal      ? ""
                     : s.kind == StateKind::AfterCall ? "after "
                                                      : "unwind ";
  std::string out = fmt::format("{}{}#{} @{}", kind,
                                ir::to_string(d.program().ref(s.method)),
                                s.index, d.describe_ctx(d.fp_of(s.fp).ctx));
  if (s.kind == StateKind::Unwinding) {
    out += fmt::format(" from {}", d.describe_ctx(d.fp_of(s.origin).ctx));
    auto passed = d.class_set_of(s.passed);
    if (!passed.empty()) {
      out += " passed";
      for (auto c : passed) {
        out += " " + d.program().class_def(c).name;
      }
    }
  }
  return out;
}

std::string describe(const Domain& d, const Frame& f) {
  if (f.is_fun()) {
    return fmt::format("fun({}, {})", d.describe_fp(f.fp),
                       d.describe_point(f.ret));
  }
  return fmt::format("handle({}, {}#{})",
                     d.program().class_def(f.handler).name,
                     ir::to_string(d.program().ref(f.owner)), f.target);
}

} // namespace pdcfa::machine
