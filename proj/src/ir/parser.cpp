#include "pdcfa/ir/parser.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace pdcfa::ir {

namespace {

bool is_keyword(std::string_view s) {
  return s == "this" || s == "true" || s == "false" || s == "null" ||
         s == "void";
}

bool is_int_literal(std::string_view s) {
  size_t i = 0;
  if (!s.empty() && s[0] == '-') {
    i = 1;
  }
  if (i >= s.size()) {
    return false;
  }
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') {
      return false;
    }
  }
  return true;
}

bool is_register_name(std::string_view s) {
  if (s.empty() || is_keyword(s)) {
    return false;
  }
  auto ident_char = [](char c, bool first) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
        c == '$') {
      return true;
    }
    return !first && c >= '0' && c <= '9';
  };
  for (size_t i = 0; i < s.size(); ++i) {
    if (!ident_char(s[i], i == 0)) {
      return false;
    }
  }
  return true;
}

bool is_primitive(std::string_view s) {
  return s == "int" || s == "byte" || s == "char" || s == "boolean";
}

class ProgramParser {
 public:
  explicit ProgramParser(std::string_view text) : m_forms(read_sexprs(text)) {}

  std::shared_ptr<const Program> run() {
    auto prog = std::make_shared<Program>();
    m_prog = prog.get();
    declare_classes();
    link_hierarchy();
    for (size_t i = 0; i < m_forms.size(); ++i) {
      parse_members(m_forms[i], m_class_of_form[i]);
    }
    m_prog->finish_symbols(m_max_params);
    return prog;
  }

 private:
  [[noreturn]] void fail(const SExpr& at, const std::string& msg) const {
    throw ParseError(at.pos, msg);
  }

  const SExpr& atom(const SExpr& e, const char* what) const {
    if (!e.is_atom()) {
      fail(e, fmt::format("expected {}", what));
    }
    return e;
  }

  const SExpr& list(const SExpr& e, const char* what) const {
    if (!e.is_list()) {
      fail(e, fmt::format("expected {}", what));
    }
    return e;
  }

  // Pass 1: class headers, so bodies may reference classes declared later.
  void declare_classes() {
    for (const auto& form : m_forms) {
      list(form, "class definition");
      size_t i = 0;
      ClassDef def;
      def.pos = form.pos;
      while (i < form.items.size() && form.items[i].is_atom() &&
             !form.items[i].is_atom("class")) {
        auto attr = attribute_from_string(form.items[i].text);
        if (!attr) {
          fail(form.items[i],
               fmt::format("unknown attribute '{}'", form.items[i].text));
        }
        def.attributes.push_back(*attr);
        ++i;
      }
      if (i + 6 != form.items.size() || !form.items[i].is_atom("class") ||
          !form.items[i + 2].is_atom("extends")) {
        fail(form,
             "class definition must be (attribute ... class NAME extends NAME "
             "(field ...) (method ...))");
      }
      def.name = atom(form.items[i + 1], "class name").text;
      def.super_name = atom(form.items[i + 3], "superclass name").text;
      if (def.name == kRootClass) {
        fail(form.items[i + 1], "the root class java/lang/Object is implicit");
      }
      if (m_prog->find_class(def.name)) {
        fail(form.items[i + 1], fmt::format("duplicate class {}", def.name));
      }
      m_class_of_form.push_back(m_prog->add_class(std::move(def)));
    }
  }

  void link_hierarchy() {
    for (size_t i = 0; i < m_forms.size(); ++i) {
      auto& cls = m_prog->mutable_class(m_class_of_form[i]);
      auto sup = m_prog->find_class(cls.super_name);
      if (!sup) {
        fail(m_forms[i], fmt::format("class {} extends undeclared class {}",
                                     cls.name, cls.super_name));
      }
      cls.super_id = *sup;
    }
    for (size_t i = 0; i < m_forms.size(); ++i) {
      ClassId start = m_class_of_form[i];
      ClassId c = start;
      size_t steps = 0;
      while (c != kRootClassId) {
        c = m_prog->class_def(c).super_id;
        if (c == start || ++steps > m_prog->classes().size()) {
          fail(m_forms[i], fmt::format("hierarchy cycle through {}",
                                       m_prog->class_def(start).name));
        }
      }
    }
  }

  void parse_members(const SExpr& form, ClassId cls) {
    const auto& fields = list(form.items[form.items.size() - 2], "field list");
    const auto& methods = list(form.items.back(), "method list");
    std::set<std::string> field_names;
    for (const auto& f : fields.items) {
      FieldDef def = parse_field(f);
      if (!field_names.insert(m_prog->name(def.name)).second) {
        fail(f, fmt::format("duplicate field {}", m_prog->name(def.name)));
      }
      m_prog->mutable_class(cls).fields.push_back(std::move(def));
    }
    for (const auto& m : methods.items) {
      MethodDef def = parse_method(m, cls);
      if (m_prog->find_declared(cls, def.name, def.param_types)) {
        fail(m, fmt::format("duplicate method {}", m_prog->name(def.name)));
      }
      m_prog->add_method(std::move(def));
    }
  }

  std::vector<Attribute> parse_attributes(const SExpr& form, size_t& i) {
    std::vector<Attribute> attrs;
    while (i < form.items.size() && form.items[i].is_atom()) {
      auto a = attribute_from_string(form.items[i].text);
      if (!a) {
        break;
      }
      attrs.push_back(*a);
      ++i;
    }
    return attrs;
  }

  void check_class_name(const SExpr& at, const std::string& name) {
    if (!m_prog->find_class(name)) {
      fail(at, fmt::format("unknown class {}", name));
    }
  }

  FieldDef parse_field(const SExpr& f) {
    list(f, "field definition");
    if (f.head() != "field") {
      fail(f, "expected (field attribute ... name type)");
    }
    size_t i = 1;
    FieldDef def;
    def.attributes = parse_attributes(f, i);
    if (i + 2 != f.items.size()) {
      fail(f, "expected (field attribute ... name type)");
    }
    def.name = m_prog->symbols().intern(atom(f.items[i], "field name").text);
    const auto& ty = atom(f.items[i + 1], "field type").text;
    if (!is_primitive(ty) && ty != kStringClass) {
      check_class_name(f.items[i + 1], ty);
    }
    def.type = parse_type(ty);
    return def;
  }

  std::vector<Type> parse_type_list(const SExpr& e) {
    list(e, "type list");
    std::vector<Type> out;
    for (const auto& t : e.items) {
      out.push_back(parse_type(atom(t, "type").text));
    }
    return out;
  }

  MethodDef parse_method(const SExpr& m, ClassId cls) {
    list(m, "method definition");
    if (m.head() != "method") {
      fail(m, "expected (method attribute ... name (type ...) type (throws "
              "...) (limit n) stmt ...)");
    }
    size_t i = 1;
    MethodDef def;
    def.owner = cls;
    def.pos = m.pos;
    def.attributes = parse_attributes(m, i);
    if (i + 5 > m.items.size()) {
      fail(m, "truncated method definition");
    }
    def.name = m_prog->symbols().intern(atom(m.items[i], "method name").text);
    def.param_types = parse_type_list(m.items[i + 1]);
    def.return_type = parse_type(atom(m.items[i + 2], "return type").text);
    const auto& throws = list(m.items[i + 3], "throws clause");
    if (throws.head() != "throws") {
      fail(throws, "expected (throws class-name ...)");
    }
    for (size_t t = 1; t < throws.items.size(); ++t) {
      def.throws.push_back(atom(throws.items[t], "class name").text);
    }
    const auto& limit = list(m.items[i + 4], "limit");
    if (limit.head() != "limit" || limit.items.size() != 2 ||
        !is_int_literal(limit.items[1].text) || limit.items[1].text[0] == '-') {
      fail(limit, "expected (limit n)");
    }
    def.limit = static_cast<uint32_t>(std::stoul(limit.items[1].text));
    if (def.limit < def.param_types.size()) {
      fail(limit, fmt::format("limit {} is below the parameter count {}",
                              def.limit, def.param_types.size()));
    }
    m_max_params = std::max(m_max_params, def.param_types.size());
    for (size_t s = i + 5; s < m.items.size(); ++s) {
      def.body.push_back(parse_stmt(m.items[s]));
    }
    if (def.body.empty() && !def.is_abstract()) {
      fail(m, fmt::format("non-abstract method {} has an empty body",
                          m_prog->name(def.name)));
    }
    resolve_labels(def, m);
    compute_lines(def);
    return def;
  }

  void resolve_labels(MethodDef& def, const SExpr& where) {
    for (uint32_t idx = 0; idx < def.body.size(); ++idx) {
      if (const auto* l = def.body[idx].as<LabelStmt>()) {
        if (!def.labels.emplace(l->label, idx).second) {
          throw ParseError(def.body[idx].pos,
                           fmt::format("duplicate label {}",
                                       m_prog->name(l->label)));
        }
      }
    }
    auto target = [&](Symbol label, SourcePos pos) -> uint32_t {
      auto it = def.labels.find(label);
      if (it == def.labels.end()) {
        throw ParseError(pos, fmt::format("dangling label {}",
                                          m_prog->name(label)));
      }
      return it->second;
    };
    for (auto& s : def.body) {
      if (auto* g = std::get_if<GotoStmt>(&s.node)) {
        g->target = target(g->label, s.pos);
      } else if (auto* f = std::get_if<IfStmt>(&s.node)) {
        f->target = target(f->label, s.pos);
      } else if (auto* h = std::get_if<PushHandlerStmt>(&s.node)) {
        h->target = target(h->label, s.pos);
      }
    }
    (void)where;
  }

  void compute_lines(MethodDef& def) {
    def.line_of.resize(def.body.size());
    int64_t current = 0;
    for (size_t idx = 0; idx < def.body.size(); ++idx) {
      if (const auto* l = def.body[idx].as<LineStmt>()) {
        current = l->line;
      }
      def.line_of[idx] =
          current > 0 ? current : static_cast<int64_t>(def.body[idx].pos.line);
    }
  }

  Symbol reg(const SExpr& e) {
    const auto& a = atom(e, "register name");
    if (!is_register_name(a.text)) {
      fail(e, fmt::format("malformed register name '{}'", a.text));
    }
    return m_prog->symbols().intern(a.text);
  }

  Symbol label(const SExpr& e) {
    return m_prog->symbols().intern(atom(e, "label").text);
  }

  void arity(const SExpr& e, size_t n, const char* shape) {
    if (e.items.size() != n) {
      fail(e, fmt::format("arity mismatch, expected {}", shape));
    }
  }

  AExp parse_aexp(const SExpr& e) {
    if (e.kind == SExpr::Kind::String) {
      AExp out = AExp::make(AExp::Kind::Str);
      out.text = e.text;
      return out;
    }
    if (e.is_atom()) {
      const auto& t = e.text;
      if (t == "this") return AExp::make(AExp::Kind::This);
      if (t == "true") return AExp::make(AExp::Kind::True);
      if (t == "false") return AExp::make(AExp::Kind::False);
      if (t == "null") return AExp::make(AExp::Kind::Null);
      if (t == "void") return AExp::make(AExp::Kind::Void);
      if (is_int_literal(t)) {
        int64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || ptr != t.data() + t.size()) {
          fail(e, fmt::format("integer literal {} out of range", t));
        }
        return AExp::integer(v);
      }
      return AExp::reg(reg(e));
    }
    auto head = e.head();
    if (head == "instance-of") {
      arity(e, 3, "(instance-of aexp class-name)");
      AExp out = AExp::make(AExp::Kind::InstanceOf);
      out.args.push_back(parse_aexp(e.items[1]));
      const auto& cls = atom(e.items[2], "class name").text;
      check_class_name(e.items[2], cls);
      out.class_id = m_prog->class_id(cls);
      return out;
    }
    auto op = prim_op_from_string(head);
    if (!op) {
      fail(e, fmt::format("unknown atomic operation '{}'", head));
    }
    AExp out = AExp::make(AExp::Kind::Op);
    out.op = *op;
    if (e.items.size() - 1 != prim_op_arity(*op)) {
      fail(e, fmt::format("arity mismatch: {} takes {} operand(s)", head,
                          prim_op_arity(*op)));
    }
    for (size_t i = 1; i < e.items.size(); ++i) {
      out.args.push_back(parse_aexp(e.items[i]));
    }
    return out;
  }

  std::optional<InvokeKind> invoke_kind(std::string_view s) {
    if (s == "invoke-static") return InvokeKind::Static;
    if (s == "invoke-direct") return InvokeKind::Direct;
    if (s == "invoke-virtual") return InvokeKind::Virtual;
    if (s == "invoke-interface") return InvokeKind::Interface;
    if (s == "invoke-super") return InvokeKind::Super;
    return std::nullopt;
  }

  InvokeExp parse_invoke(const SExpr& e, InvokeKind kind) {
    arity(e, 4, "(invoke-kind (aexp ...) (type ...) Class.method)");
    InvokeExp call;
    call.kind = kind;
    for (const auto& a : list(e.items[1], "argument list").items) {
      call.args.push_back(parse_aexp(a));
    }
    call.arg_types = parse_type_list(e.items[2]);
    const auto& target = atom(e.items[3], "Class.method target").text;
    auto dot = target.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == target.size()) {
      fail(e.items[3], fmt::format("malformed call target '{}'", target));
    }
    call.class_name = target.substr(0, dot);
    call.method_name = m_prog->symbols().intern(target.substr(dot + 1));
    size_t expected = call.args.size();
    if (kind != InvokeKind::Static) {
      if (call.args.empty()) {
        fail(e, "non-static invoke needs a receiver argument");
      }
      expected -= 1;
    }
    if (call.arg_types.size() != expected) {
      fail(e, fmt::format("argument/type count mismatch: {} types for {} "
                          "non-receiver arguments",
                          call.arg_types.size(), expected));
    }
    m_max_params = std::max(m_max_params, call.arg_types.size());
    return call;
  }

  Stmt parse_stmt(const SExpr& e) {
    list(e, "statement");
    Stmt s;
    s.pos = e.pos;
    auto head = e.head();
    if (head == "label") {
      arity(e, 2, "(label name)");
      s.node = LabelStmt{label(e.items[1])};
    } else if (head == "nop") {
      arity(e, 1, "(nop)");
      s.node = NopStmt{};
    } else if (head == "line") {
      arity(e, 2, "(line n)");
      const auto& n = atom(e.items[1], "line number").text;
      if (!is_int_literal(n) || std::stoll(n) <= 0) {
        fail(e, "line numbers must be positive integers");
      }
      s.node = LineStmt{std::stoll(n)};
    } else if (head == "goto") {
      arity(e, 2, "(goto label)");
      s.node = GotoStmt{label(e.items[1])};
    } else if (head == "if") {
      arity(e, 3, "(if aexp (goto label))");
      const auto& g = list(e.items[2], "(goto label)");
      if (g.head() != "goto" || g.items.size() != 2) {
        fail(g, "expected (goto label)");
      }
      s.node = IfStmt{parse_aexp(e.items[1]), label(g.items[1])};
    } else if (head == "assign") {
      arity(e, 3, "(assign name exp)");
      Symbol dst = reg(e.items[1]);
      const auto& rhs = e.items[2];
      auto rhs_head = rhs.head();
      if (rhs.is_list() && rhs_head == "new") {
        arity(rhs, 2, "(new class-name)");
        const auto& cls = atom(rhs.items[1], "class name").text;
        check_class_name(rhs.items[1], cls);
        s.node = AssignNewStmt{dst, NewExp{m_prog->class_id(cls)}};
      } else if (auto kind = rhs.is_list() ? invoke_kind(rhs_head)
                                           : std::nullopt) {
        s.node = AssignInvokeStmt{dst, parse_invoke(rhs, *kind)};
      } else {
        s.node = AssignAtomicStmt{dst, parse_aexp(rhs)};
      }
    } else if (head == "field-put") {
      arity(e, 4, "(field-put aexp field aexp)");
      s.node = FieldPutStmt{
          parse_aexp(e.items[1]),
          m_prog->symbols().intern(atom(e.items[2], "field name").text),
          parse_aexp(e.items[3])};
    } else if (head == "field-get") {
      arity(e, 4, "(field-get name aexp field)");
      s.node = FieldGetStmt{
          reg(e.items[1]), parse_aexp(e.items[2]),
          m_prog->symbols().intern(atom(e.items[3], "field name").text)};
    } else if (head == "push-handler") {
      arity(e, 3, "(push-handler class-name label)");
      const auto& cls = atom(e.items[1], "class name").text;
      check_class_name(e.items[1], cls);
      s.node = PushHandlerStmt{m_prog->class_id(cls), label(e.items[2])};
    } else if (head == "pop-handler") {
      arity(e, 1, "(pop-handler)");
      s.node = PopHandlerStmt{};
    } else if (head == "throw") {
      arity(e, 2, "(throw aexp)");
      s.node = ThrowStmt{parse_aexp(e.items[1])};
    } else if (head == "return") {
      arity(e, 2, "(return aexp)");
      s.node = ReturnStmt{parse_aexp(e.items[1])};
    } else {
      fail(e, fmt::format("unknown statement '{}'", head));
    }
    return s;
  }

  std::vector<SExpr> m_forms;
  std::vector<ClassId> m_class_of_form;
  Program* m_prog = nullptr;
  size_t m_max_params = 0;
};

} // namespace

std::shared_ptr<const Program> parse_program(std::string_view text) {
  return ProgramParser(text).run();
}

std::shared_ptr<const Program> parse_program_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError({}, fmt::format("cannot open {}", path));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_program(buf.str());
}

} // namespace pdcfa::ir
