#include <sstream>

#include <fmt/format.h>

#include "pdcfa/ir/parser.h"

namespace pdcfa::ir {

namespace {

std::string attrs(const std::vector<Attribute>& as) {
  std::string out;
  for (auto a : as) {
    out += to_string(a);
    out += ' ';
  }
  return out;
}

std::string types(const std::vector<Type>& ts) {
  std::string out = "(";
  for (size_t i = 0; i < ts.size(); ++i) {
    if (i > 0) {
      out += ' ';
    }
    out += to_string(ts[i]);
  }
  return out + ")";
}

} // namespace

std::string print_aexp(const Program& p, const AExp& e) {
  switch (e.kind) {
  case AExp::Kind::This:
    return "this";
  case AExp::Kind::True:
    return "true";
  case AExp::Kind::False:
    return "false";
  case AExp::Kind::Null:
    return "null";
  case AExp::Kind::Void:
    return "void";
  case AExp::Kind::Name:
    return p.name(e.name);
  case AExp::Kind::Int:
    return std::to_string(e.int_value);
  case AExp::Kind::Str:
    return quote_string(e.text);
  case AExp::Kind::Op: {
    std::string out = fmt::format("({}", to_string(e.op));
    for (const auto& a : e.args) {
      out += ' ';
      out += print_aexp(p, a);
    }
    return out + ")";
  }
  case AExp::Kind::InstanceOf:
    return fmt::format("(instance-of {} {})", print_aexp(p, e.args.at(0)),
                       p.class_def(e.class_id).name);
  }
  return "?";
}

std::string print_stmt(const Program& p, const Stmt& s) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LabelStmt>) {
          return fmt::format("(label {})", p.name(n.label));
        } else if constexpr (std::is_same_v<T, NopStmt>) {
          return "(nop)";
        } else if constexpr (std::is_same_v<T, LineStmt>) {
          return fmt::format("(line {})", n.line);
        } else if constexpr (std::is_same_v<T, GotoStmt>) {
          return fmt::format("(goto {})", p.name(n.label));
        } else if constexpr (std::is_same_v<T, IfStmt>) {
          return fmt::format("(if {} (goto {}))", print_aexp(p, n.cond),
                             p.name(n.label));
        } else if constexpr (std::is_same_v<T, AssignAtomicStmt>) {
          return fmt::format("(assign {} {})", p.name(n.dst),
                             print_aexp(p, n.value));
        } else if constexpr (std::is_same_v<T, AssignNewStmt>) {
          return fmt::format("(assign {} (new {}))", p.name(n.dst),
                             p.class_def(n.value.class_id).name);
        } else if constexpr (std::is_same_v<T, AssignInvokeStmt>) {
          std::string args;
          for (size_t i = 0; i < n.call.args.size(); ++i) {
            if (i > 0) {
              args += ' ';
            }
            args += print_aexp(p, n.call.args[i]);
          }
          return fmt::format("(assign {} ({} ({}) {} {}.{}))", p.name(n.dst),
                             to_string(n.call.kind), args,
                             types(n.call.arg_types), n.call.class_name,
                             p.name(n.call.method_name));
        } else if constexpr (std::is_same_v<T, FieldPutStmt>) {
          return fmt::format("(field-put {} {} {})", print_aexp(p, n.object),
                             p.name(n.field), print_aexp(p, n.value));
        } else if constexpr (std::is_same_v<T, FieldGetStmt>) {
          return fmt::format("(field-get {} {} {})", p.name(n.dst),
                             print_aexp(p, n.object), p.name(n.field));
        } else if constexpr (std::is_same_v<T, PushHandlerStmt>) {
          return fmt::format("(push-handler {} {})",
                             p.class_def(n.class_id).name, p.name(n.label));
        } else if constexpr (std::is_same_v<T, PopHandlerStmt>) {
          return "(pop-handler)";
        } else if constexpr (std::is_same_v<T, ThrowStmt>) {
          return fmt::format("(throw {})", print_aexp(p, n.value));
        } else if constexpr (std::is_same_v<T, ReturnStmt>) {
          return fmt::format("(return {})", print_aexp(p, n.value));
        } else {
          return fmt::format("(move-result {})", p.name(n.dst));
        }
      },
      s.node);
}

std::string print_program(const Program& p) {
  std::ostringstream out;
  for (const auto& cls : p.classes()) {
    if (cls.synthetic_root) {
      continue;
    }
    out << "(" << attrs(cls.attributes) << "class " << cls.name << " extends "
        << cls.super_name << "\n  (";
    for (size_t i = 0; i < cls.fields.size(); ++i) {
      const auto& f = cls.fields[i];
      out << (i > 0 ? "\n   " : "") << "(field " << attrs(f.attributes)
          << p.name(f.name) << " " << to_string(f.type) << ")";
    }
    out << ")\n  (";
    for (size_t i = 0; i < cls.methods.size(); ++i) {
      const auto& m = p.method(cls.methods[i]);
      out << (i > 0 ? "\n   " : "") << "(method " << attrs(m.attributes)
          << p.name(m.name) << " " << types(m.param_types) << " "
          << to_string(m.return_type) << " (throws";
      for (const auto& t : m.throws) {
        out << " " << t;
      }
      out << ") (limit " << m.limit << ")";
      for (const auto& s : m.body) {
        out << "\n     " << print_stmt(p, s);
      }
      out << ")";
    }
    out << "))\n";
  }
  return out.str();
}

} // namespace pdcfa::ir
