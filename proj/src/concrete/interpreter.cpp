#include "pdcfa/concrete/interpreter.h"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace pdcfa::concrete {

using ir::AExp;
using ir::PrimOp;
using machine::TaintLabel;
using Labels = std::set<TaintLabel>;

std::string to_string(const Value& v) {
  switch (v.kind) {
  case Value::Kind::Int:
    return v.i.str();
  case Value::Kind::Str:
    return fmt::format("\"{}\"", v.s);
  case Value::Kind::Bool:
    return v.b ? "true" : "false";
  case Value::Kind::Null:
    return "null";
  case Value::Kind::Void:
    return "void";
  case Value::Kind::Object:
    return fmt::format("obj#{}", v.obj);
  }
  return "?";
}

const char* to_string(Outcome o) {
  switch (o) {
  case Outcome::Returned:
    return "returned";
  case Outcome::OutOfFuel:
    return "out of fuel";
  case Outcome::UncaughtException:
    return "uncaught exception";
  case Outcome::TypeError:
    return "type error";
  case Outcome::MalformedState:
    return "malformed state";
  }
  return "?";
}

namespace {

struct Fault {
  Outcome outcome;
  std::string message;
};

struct KFrame {
  bool fun = true;
  uint64_t frame = 0;      // Fun
  ProgramPoint ret;        // Fun
  ir::ClassId handler = 0; // Handler
  uint32_t target = 0;
  ir::MethodId owner = 0;
};

class Interpreter {
 public:
  Interpreter(const ir::Program& p, const taint::SummaryTable& s, Trace& t)
      : m_p(p), m_summaries(s), m_t(t) {}

  void run(ir::MethodId entry, const std::vector<Value>& args, size_t fuel) {
    const auto& m = m_p.method(entry);
    if (args.size() != m.param_types.size()) {
      throw Fault{Outcome::TypeError,
                  fmt::format("entry expects {} arguments, got {}",
                              m.param_types.size(), args.size())};
    }
    uint64_t f = new_frame(entry, {});
    uint64_t self = new_object(m.owner, ProgramPoint{machine::kSyntheticMethod,
                                                     m.owner},
                               {});
    write(reg(f, m_p.sym_this()), Value::object(self), {});
    for (size_t i = 0; i < args.size(); ++i) {
      write(reg(f, m_p.sym_param(i)), args[i], {});
    }
    m_state = State{State::Kind::Normal, entry, 0, f, 0};
    while (true) {
      if (fuel-- == 0) {
        throw Fault{Outcome::OutOfFuel, "fuel exhausted"};
      }
      m_state.depth = m_kont.size();
      m_t.states.push_back(m_state);
      if (step()) {
        return;
      }
    }
  }

 private:
  static Addr reg(uint64_t frame, ir::Symbol r) {
    return Addr{Addr::Kind::Reg, frame, r};
  }
  static Addr field(uint64_t obj, ir::Symbol f) {
    return Addr{Addr::Kind::Field, obj, f};
  }

  uint64_t new_frame(ir::MethodId m, std::vector<ProgramPoint> cs) {
    m_t.frames.push_back(FrameInfo{m, std::move(cs)});
    return m_t.frames.size() - 1;
  }

  uint64_t new_object(ir::ClassId cls, ProgramPoint site,
                      std::vector<ProgramPoint> cs) {
    m_t.objects.push_back(ObjectInfo{cls, site, std::move(cs)});
    uint64_t id = m_t.objects.size() - 1;
    for (const auto* f : m_p.all_fields(cls)) {
      Value d;
      switch (f->type.kind) {
      case ir::Type::Kind::Class:
        d = Value::null();
        break;
      case ir::Type::Kind::Boolean:
        d = Value::boolean(false);
        break;
      default:
        d = Value::integer(0);
      }
      write(field(id, f->name), d, {});
    }
    return id;
  }

  void write(const Addr& a, const Value& v, const Labels& taint) {
    m_t.store[a] = v;
    m_taint[a] = taint;
    m_t.writes.push_back(
        Write{a, v, std::vector<TaintLabel>(taint.begin(), taint.end())});
  }

  const Value& read(const Addr& a) {
    auto it = m_t.store.find(a);
    if (it == m_t.store.end()) {
      throw Fault{Outcome::TypeError,
                  fmt::format("read of unbound {} {}",
                              a.kind == Addr::Kind::Reg ? "register" : "field",
                              m_p.name(a.name))};
    }
    return it->second;
  }

  Labels taint_of(const Addr& a) {
    auto it = m_taint.find(a);
    return it == m_taint.end() ? Labels{} : it->second;
  }

  [[noreturn]] void type_error(const std::string& msg) {
    throw Fault{Outcome::TypeError, msg};
  }

  Value eval(const AExp& e) {
    switch (e.kind) {
    case AExp::Kind::This:
      return read(reg(m_state.frame, m_p.sym_this()));
    case AExp::Kind::True:
      return Value::boolean(true);
    case AExp::Kind::False:
      return Value::boolean(false);
    case AExp::Kind::Null:
      return Value::null();
    case AExp::Kind::Void:
      return Value::void_value();
    case AExp::Kind::Name:
      return read(reg(m_state.frame, e.name));
    case AExp::Kind::Int:
      return Value::integer(e.int_value);
    case AExp::Kind::Str:
      return Value::str(e.text);
    case AExp::Kind::InstanceOf: {
      Value v = eval(e.args.at(0));
      bool r = v.kind == Value::Kind::Object &&
               ir::is_subclass(m_p, m_t.objects[v.obj].cls, e.class_id);
      return Value::boolean(r);
    }
    case AExp::Kind::Op: {
      std::vector<Value> args;
      for (const auto& a : e.args) {
        args.push_back(eval(a));
      }
      return prim(e.op, args);
    }
    }
    type_error("bad expression");
  }

  Labels eval_taint(const AExp& e) {
    switch (e.kind) {
    case AExp::Kind::This:
      return taint_of(reg(m_state.frame, m_p.sym_this()));
    case AExp::Kind::Name:
      return taint_of(reg(m_state.frame, e.name));
    case AExp::Kind::Op:
    case AExp::Kind::InstanceOf: {
      Labels out;
      for (const auto& a : e.args) {
        auto t = eval_taint(a);
        out.insert(t.begin(), t.end());
      }
      return out;
    }
    default:
      return {};
    }
  }

  Value prim(PrimOp op, const std::vector<Value>& a) {
    using K = Value::Kind;
    auto ints = [&] {
      if (a[0].kind != K::Int || a[1].kind != K::Int) {
        type_error(fmt::format("{} expects integers", ir::to_string(op)));
      }
    };
    switch (op) {
    case PrimOp::Add:
      if (a[0].kind == K::Str && a[1].kind == K::Str) {
        return Value::str(a[0].s + a[1].s);
      }
      ints();
      return Value::integer(a[0].i + a[1].i);
    case PrimOp::Sub:
      ints();
      return Value::integer(a[0].i - a[1].i);
    case PrimOp::Mul:
      ints();
      return Value::integer(a[0].i * a[1].i);
    case PrimOp::Div:
    case PrimOp::Rem:
      ints();
      if (a[1].i == 0) {
        type_error("division by zero");
      }
      return Value::integer(op == PrimOp::Div ? Int(a[0].i / a[1].i)
                                              : Int(a[0].i % a[1].i));
    case PrimOp::Neg:
      if (a[0].kind != K::Int) {
        type_error("neg expects an integer");
      }
      return Value::integer(-a[0].i);
    case PrimOp::Not:
      if (a[0].kind == K::Bool) {
        return Value::boolean(!a[0].b);
      }
      if (a[0].kind == K::Int) {
        return Value::integer(-a[0].i - 1);
      }
      type_error("not expects a boolean or integer");
    case PrimOp::And:
    case PrimOp::Or:
    case PrimOp::Xor:
      if (a[0].kind == K::Bool && a[1].kind == K::Bool) {
        bool r = op == PrimOp::And  ? (a[0].b && a[1].b)
                 : op == PrimOp::Or ? (a[0].b || a[1].b)
                                    : (a[0].b != a[1].b);
        return Value::boolean(r);
      }
      ints();
      return Value::integer(op == PrimOp::And  ? Int(a[0].i & a[1].i)
                            : op == PrimOp::Or ? Int(a[0].i | a[1].i)
                                               : Int(a[0].i ^ a[1].i));
    case PrimOp::Lt:
      ints();
      return Value::boolean(a[0].i < a[1].i);
    case PrimOp::Le:
      ints();
      return Value::boolean(a[0].i <= a[1].i);
    case PrimOp::Gt:
      ints();
      return Value::boolean(a[0].i > a[1].i);
    case PrimOp::Ge:
      ints();
      return Value::boolean(a[0].i >= a[1].i);
    case PrimOp::Eq:
    case PrimOp::Ne: {
      bool eq = a[0] == a[1];
      return Value::boolean(op == PrimOp::Eq ? eq : !eq);
    }
    }
    type_error("unknown operation");
  }

  const ir::Stmt& current() {
    const auto& body = m_p.method(m_state.method).body;
    if (m_state.index >= body.size()) {
      throw Fault{Outcome::MalformedState, "execution fell off a method body"};
    }
    return body[m_state.index];
  }

  void goto_next() {
    m_state.kind = State::Kind::Normal;
    m_state.index += 1;
  }

  void jump(uint32_t label_index) {
    m_state.kind = State::Kind::Normal;
    m_state.index = label_index + 1;
  }

  Value stub(taint::RetKind k) {
    switch (k) {
    case taint::RetKind::AnyString:
      return Value::str("");
    case taint::RetKind::AnyInt:
      return Value::integer(0);
    case taint::RetKind::Null:
      return Value::null();
    case taint::RetKind::Void:
      return Value::void_value();
    }
    return {};
  }

  void invoke(const ir::AssignInvokeStmt& st) {
    const auto& call = st.call;
    ProgramPoint site{m_state.method, m_state.index};
    std::vector<Value> args;
    std::vector<Labels> taints;
    for (const auto& a : call.args) {
      args.push_back(eval(a));
      taints.push_back(eval_taint(a));
    }
    auto after = [&] { m_state.kind = State::Kind::AfterCall; };

    if (const auto* s = m_summaries.match(call.class_name,
                                          m_p.name(call.method_name),
                                          call.arg_types)) {
      Labels incoming;
      for (const auto& t : taints) {
        incoming.insert(t.begin(), t.end());
      }
      Labels ret;
      if (s->source) {
        m_t.sources.push_back(site);
        for (auto c : s->source_categories) {
          ret.insert(TaintLabel{c, site});
        }
      }
      if (s->propagate) {
        ret.insert(incoming.begin(), incoming.end());
      }
      if (s->sink) {
        for (const auto& l : incoming) {
          bool wanted = s->sink_categories.empty() ||
                        std::find(s->sink_categories.begin(),
                                  s->sink_categories.end(),
                                  l.category) != s->sink_categories.end();
          if (wanted) {
            m_t.sinks.push_back(SinkRecord{l, s->sink_kind, site});
          }
        }
      }
      write(reg(m_state.frame, m_p.sym_ret()), stub(s->ret), ret);
      after();
      return;
    }

    std::optional<ir::MethodId> callee;
    if (call.kind == ir::InvokeKind::Virtual ||
        call.kind == ir::InvokeKind::Interface) {
      if (args.at(0).kind != Value::Kind::Object) {
        type_error("virtual call on a non-object receiver");
      }
      callee = ir::try_resolve_method(m_p, m_t.objects[args[0].obj].cls,
                                      call.method_name, call.arg_types,
                                      call.kind);
    } else if (auto cls = m_p.find_class(call.class_name)) {
      callee = ir::try_resolve_method(m_p, *cls, call.method_name,
                                      call.arg_types, call.kind);
      if (callee && !call.is_static() &&
          args.at(0).kind != Value::Kind::Object) {
        type_error("call on a non-object receiver");
      }
    }
    if (!callee) {
      after(); // unmodeled library call: nothing is bound to ret
      return;
    }
    auto cs = m_t.frames[m_state.frame].call_string;
    cs.push_back(site);
    uint64_t f = new_frame(*callee, std::move(cs));
    size_t first = 0;
    if (!call.is_static()) {
      write(reg(f, m_p.sym_this()), args[0], taints[0]);
      first = 1;
    }
    for (size_t i = first; i < args.size(); ++i) {
      write(reg(f, m_p.sym_param(i - first)), args[i], taints[i]);
    }
    m_kont.push_back(KFrame{true, m_state.frame, site});
    m_state = State{State::Kind::Normal, *callee, 0, f, 0};
  }

  // Returns true when the run is finished.
  bool step() {
    const auto& stmt = current();
    if (m_state.kind == State::Kind::AfterCall) {
      const auto& st = std::get<ir::AssignInvokeStmt>(stmt.node);
      Addr ret = reg(m_state.frame, m_p.sym_ret());
      auto it = m_t.store.find(ret);
      if (it != m_t.store.end()) {
        Value v = it->second;
        write(reg(m_state.frame, st.dst), v, taint_of(ret));
      }
      goto_next();
      return false;
    }
    bool done = false;
    std::visit(
        [&](const auto& st) {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, ir::LabelStmt> ||
                        std::is_same_v<T, ir::NopStmt> ||
                        std::is_same_v<T, ir::LineStmt>) {
            goto_next();
          } else if constexpr (std::is_same_v<T, ir::GotoStmt>) {
            jump(st.target);
          } else if constexpr (std::is_same_v<T, ir::IfStmt>) {
            Value c = eval(st.cond);
            if (c.kind != Value::Kind::Bool) {
              type_error("if condition is not a boolean");
            }
            if (c.b) {
              jump(st.target);
            } else {
              goto_next();
            }
          } else if constexpr (std::is_same_v<T, ir::AssignAtomicStmt>) {
            write(reg(m_state.frame, st.dst), eval(st.value),
                  eval_taint(st.value));
            goto_next();
          } else if constexpr (std::is_same_v<T, ir::AssignNewStmt>) {
            uint64_t o = new_object(st.value.class_id,
                                    ProgramPoint{m_state.method, m_state.index},
                                    m_t.frames[m_state.frame].call_string);
            write(reg(m_state.frame, st.dst), Value::object(o), {});
            goto_next();
          } else if constexpr (std::is_same_v<T, ir::AssignInvokeStmt>) {
            invoke(st);
          } else if constexpr (std::is_same_v<T, ir::FieldPutStmt>) {
            Value o = eval(st.object);
            if (o.kind != Value::Kind::Object) {
              type_error("field-put on a non-object");
            }
            write(field(o.obj, st.field), eval(st.value), eval_taint(st.value));
            goto_next();
          } else if constexpr (std::is_same_v<T, ir::FieldGetStmt>) {
            Value o = eval(st.object);
            if (o.kind != Value::Kind::Object) {
              type_error("field-get on a non-object");
            }
            Addr a = field(o.obj, st.field);
            Value v = read(a);
            write(reg(m_state.frame, st.dst), v, taint_of(a));
            goto_next();
          } else if constexpr (std::is_same_v<T, ir::PushHandlerStmt>) {
            KFrame h;
            h.fun = false;
            h.handler = st.class_id;
            h.target = st.target;
            h.owner = m_state.method;
            m_kont.push_back(h);
            goto_next();
          } else if constexpr (std::is_same_v<T, ir::PopHandlerStmt>) {
            if (m_kont.empty() || m_kont.back().fun) {
              throw Fault{Outcome::MalformedState,
                          "pop-handler without a handler frame on top"};
            }
            m_kont.pop_back();
            goto_next();
          } else if constexpr (std::is_same_v<T, ir::ReturnStmt>) {
            Value v = eval(st.value);
            Labels t = eval_taint(st.value);
            while (!m_kont.empty() && !m_kont.back().fun) {
              m_kont.pop_back();
            }
            if (m_kont.empty()) {
              write(reg(m_state.frame, m_p.sym_ret()), v, t);
              m_t.result = v;
              done = true;
              return;
            }
            KFrame f = m_kont.back();
            m_kont.pop_back();
            write(reg(f.frame, m_p.sym_ret()), v, t);
            m_state = State{State::Kind::AfterCall, f.ret.method, f.ret.index,
                            f.frame, 0};
          } else if constexpr (std::is_same_v<T, ir::ThrowStmt>) {
            Value v = eval(st.value);
            if (v.kind != Value::Kind::Object) {
              type_error("throw of a non-object");
            }
            Labels t = eval_taint(st.value);
            uint64_t frame = m_state.frame;
            while (!m_kont.empty()) {
              KFrame f = m_kont.back();
              m_kont.pop_back();
              if (f.fun) {
                frame = f.frame;
              } else if (ir::is_subclass(m_p, m_t.objects[v.obj].cls,
                                         f.handler)) {
                write(reg(frame, m_p.sym_exn()), v, t);
                m_state = State{State::Kind::Normal, f.owner, f.target + 1,
                                frame, 0};
                return;
              }
            }
            throw Fault{Outcome::UncaughtException,
                        fmt::format("uncaught {}",
                                    m_p.class_def(m_t.objects[v.obj].cls).name)};
          } else {
            throw Fault{Outcome::MalformedState, "move-from-ret in a body"};
          }
        },
        stmt.node);
    return done;
  }

  const ir::Program& m_p;
  const taint::SummaryTable& m_summaries;
  Trace& m_t;
  State m_state;
  std::vector<KFrame> m_kont;
  std::map<Addr, Labels> m_taint;
};

machine::Context to_context(const std::vector<ProgramPoint>& cs, size_t k) {
  machine::Context c;
  size_t start = cs.size() > k ? cs.size() - k : 0;
  for (size_t i = start; i < cs.size(); ++i) {
    c.sites[c.size++] = cs[i];
  }
  return c;
}

} // namespace

Trace run_concrete(const ir::Program& p, const ir::MethodRef& entry,
                   const std::vector<Value>& args,
                   const taint::SummaryTable& summaries,
                   const RunOptions& opts) {
  auto m = p.find_method(entry);
  if (!m) {
    throw ir::ResolveError(
        fmt::format("unknown entry {}", ir::to_string(entry)));
  }
  Trace t;
  Interpreter interp(p, summaries, t);
  try {
    interp.run(*m, args, opts.fuel);
    t.outcome = Outcome::Returned;
  } catch (const Fault& f) {
    t.outcome = f.outcome;
    t.message = f.message;
  }
  return t;
}

machine::FpId abstract_frame(machine::Domain& d, const Trace& t,
                             uint64_t frame, size_t k) {
  const auto& f = t.frames.at(frame);
  return d.fp(f.method, to_context(f.call_string, k));
}

machine::OpId abstract_object(machine::Domain& d, const Trace& t, uint64_t obj,
                              size_t k, bool heap_context) {
  const auto& o = t.objects.at(obj);
  machine::Context c;
  if (heap_context) {
    c = to_context(o.call_string, k);
  }
  return d.op(o.site, c);
}

bool covers(machine::Domain& d, const Trace& t, const machine::Val& v,
            const Value& c, size_t k, bool heap_context) {
  using machine::AbstractValue;
  switch (c.kind) {
  case Value::Kind::Int: {
    if (v.contains(AbstractValue::any_int())) {
      return true;
    }
    if (c.i < std::numeric_limits<int64_t>::min() ||
        c.i > std::numeric_limits<int64_t>::max()) {
      return false;
    }
    return v.contains(AbstractValue::integer(static_cast<int64_t>(c.i)));
  }
  case Value::Kind::Str:
    return v.contains(AbstractValue::any_str()) ||
           v.contains(AbstractValue::str(d.str(c.s)));
  case Value::Kind::Bool:
    return v.contains(AbstractValue::boolean(c.b));
  case Value::Kind::Null:
    return v.contains(AbstractValue::null());
  case Value::Kind::Void:
    return v.contains(AbstractValue::void_value());
  case Value::Kind::Object:
    return v.contains(AbstractValue::object(
        abstract_object(d, t, c.obj, k, heap_context), t.objects[c.obj].cls));
  }
  return false;
}

machine::Addr abstract_addr(machine::Domain& d, const Trace& t, const Addr& a,
                            size_t k, bool heap_context) {
  if (a.kind == Addr::Kind::Reg) {
    return machine::Addr::reg(abstract_frame(d, t, a.base, k), a.name);
  }
  return machine::Addr::field(abstract_object(d, t, a.base, k, heap_context),
                              a.name);
}

} // namespace pdcfa::concrete
