#include "pdcfa/ir/program.h"

#include <algorithm>

#include <fmt/format.h>

namespace pdcfa::ir {

Symbol SymbolTable::intern(const std::string& name) {
  auto it = m_index.find(name);
  if (it != m_index.end()) {
    return it->second;
  }
  auto id = static_cast<Symbol>(m_names.size());
  m_names.push_back(name);
  m_index.emplace(name, id);
  return id;
}

std::optional<Symbol> SymbolTable::find(const std::string& name) const {
  auto it = m_index.find(name);
  if (it == m_index.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::optional<Attribute> attribute_from_string(std::string_view s) {
  if (s == "public") return Attribute::Public;
  if (s == "private") return Attribute::Private;
  if (s == "protected") return Attribute::Protected;
  if (s == "final") return Attribute::Final;
  if (s == "abstract") return Attribute::Abstract;
  return std::nullopt;
}

const char* to_string(Attribute a) {
  switch (a) {
  case Attribute::Public:
    return "public";
  case Attribute::Private:
    return "private";
  case Attribute::Protected:
    return "protected";
  case Attribute::Final:
    return "final";
  case Attribute::Abstract:
    return "abstract";
  }
  return "?";
}

Type parse_type(const std::string& s) {
  Type t;
  if (s == "int") {
    t.kind = Type::Kind::Int;
  } else if (s == "byte") {
    t.kind = Type::Kind::Byte;
  } else if (s == "char") {
    t.kind = Type::Kind::Char;
  } else if (s == "boolean") {
    t.kind = Type::Kind::Boolean;
  } else {
    t.kind = Type::Kind::Class;
    t.class_name = s;
  }
  return t;
}

std::string to_string(const Type& t) {
  switch (t.kind) {
  case Type::Kind::Int:
    return "int";
  case Type::Kind::Byte:
    return "byte";
  case Type::Kind::Char:
    return "char";
  case Type::Kind::Boolean:
    return "boolean";
  case Type::Kind::Class:
    return t.class_name;
  }
  return "?";
}

namespace {

struct OpName {
  PrimOp op;
  const char* name;
  size_t arity;
};

constexpr OpName kOps[] = {
    {PrimOp::Add, "add", 2}, {PrimOp::Sub, "sub", 2}, {PrimOp::Mul, "mul", 2},
    {PrimOp::Div, "div", 2}, {PrimOp::Rem, "rem", 2}, {PrimOp::Neg, "neg", 1},
    {PrimOp::Not, "not", 1}, {PrimOp::And, "and", 2}, {PrimOp::Or, "or", 2},
    {PrimOp::Xor, "xor", 2}, {PrimOp::Lt, "lt", 2},   {PrimOp::Le, "le", 2},
    {PrimOp::Gt, "gt", 2},   {PrimOp::Ge, "ge", 2},   {PrimOp::Eq, "eq", 2},
    {PrimOp::Ne, "ne", 2},
};

} // namespace

std::optional<PrimOp> prim_op_from_string(std::string_view s) {
  for (const auto& o : kOps) {
    if (s == o.name) {
      return o.op;
    }
  }
  return std::nullopt;
}

const char* to_string(PrimOp op) {
  for (const auto& o : kOps) {
    if (o.op == op) {
      return o.name;
    }
  }
  return "?";
}

size_t prim_op_arity(PrimOp op) {
  for (const auto& o : kOps) {
    if (o.op == op) {
      return o.arity;
    }
  }
  return 0;
}

const char* to_string(InvokeKind k) {
  switch (k) {
  case InvokeKind::Static:
    return "invoke-static";
  case InvokeKind::Direct:
    return "invoke-direct";
  case InvokeKind::Virtual:
    return "invoke-virtual";
  case InvokeKind::Interface:
    return "invoke-interface";
  case InvokeKind::Super:
    return "invoke-super";
  }
  return "?";
}

bool MethodDef::is_abstract() const {
  return std::find(attributes.begin(), attributes.end(), Attribute::Abstract) !=
         attributes.end();
}

bool MethodDef::operator==(const MethodDef& o) const {
  return id == o.id && owner == o.owner && attributes == o.attributes &&
         name == o.name && param_types == o.param_types &&
         return_type == o.return_type && throws == o.throws &&
         limit == o.limit && body == o.body && labels == o.labels;
}

bool ClassDef::operator==(const ClassDef& o) const {
  return id == o.id && attributes == o.attributes && name == o.name &&
         super_name == o.super_name && super_id == o.super_id &&
         fields == o.fields && methods == o.methods &&
         synthetic_root == o.synthetic_root;
}

std::string to_string(const MethodRef& m) {
  std::string params;
  for (size_t i = 0; i < m.param_types.size(); ++i) {
    if (i > 0) {
      params += ",";
    }
    params += to_string(m.param_types[i]);
  }
  return fmt::format("{}.{}({})", m.class_name, m.method_name, params);
}

Program::Program() {
  ClassDef root;
  root.name = kRootClass;
  root.super_name = kRootClass;
  root.synthetic_root = true;
  root.attributes = {Attribute::Public};
  add_class(std::move(root));
  m_this = m_symbols.intern("this");
  m_ret = m_symbols.intern("ret");
  m_exn = m_symbols.intern("exn");
}

ClassId Program::add_class(ClassDef def) {
  auto id = static_cast<ClassId>(m_classes.size());
  def.id = id;
  m_class_index.emplace(def.name, id);
  m_classes.push_back(std::move(def));
  return id;
}

MethodId Program::add_method(MethodDef def) {
  auto id = static_cast<MethodId>(m_methods.size());
  def.id = id;
  m_classes.at(def.owner).methods.push_back(id);
  m_methods.push_back(std::move(def));
  return id;
}

void Program::finish_symbols(size_t max_params) {
  m_params.clear();
  for (size_t i = 0; i < max_params; ++i) {
    m_params.push_back(m_symbols.intern(fmt::format("param{}", i)));
  }
}

std::optional<ClassId> Program::find_class(const std::string& name) const {
  auto it = m_class_index.find(name);
  if (it == m_class_index.end()) {
    return std::nullopt;
  }
  return it->second;
}

ClassId Program::class_id(const std::string& name) const {
  auto id = find_class(name);
  if (!id) {
    throw UnknownClass(fmt::format("unknown class {}", name));
  }
  return *id;
}

MethodRef Program::ref(MethodId id) const {
  const auto& m = method(id);
  return MethodRef{class_def(m.owner).name, name(m.name), m.param_types};
}

std::optional<MethodId> Program::find_declared(
    ClassId cls, Symbol name, const std::vector<Type>& params) const {
  for (MethodId mid : class_def(cls).methods) {
    const auto& m = method(mid);
    if (m.name == name && m.param_types == params) {
      return mid;
    }
  }
  return std::nullopt;
}

std::optional<MethodId> Program::find_method(const MethodRef& r) const {
  auto cls = find_class(r.class_name);
  auto sym = m_symbols.find(r.method_name);
  if (!cls || !sym) {
    return std::nullopt;
  }
  return find_declared(*cls, *sym, r.param_types);
}

std::vector<const FieldDef*> Program::all_fields(ClassId cls) const {
  std::vector<ClassId> chain;
  ClassId c = cls;
  while (true) {
    chain.push_back(c);
    if (c == kRootClassId) {
      break;
    }
    c = class_def(c).super_id;
  }
  std::vector<const FieldDef*> out;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    for (const auto& f : class_def(*it).fields) {
      out.push_back(&f);
    }
  }
  return out;
}

bool Program::operator==(const Program& o) const {
  return m_classes == o.m_classes && m_methods == o.m_methods &&
         m_symbols == o.m_symbols;
}

uint32_t statement_index_at(const Program& p, MethodId m, Symbol label) {
  const auto& def = p.method(m);
  auto it = def.labels.find(label);
  if (it == def.labels.end()) {
    throw UnknownLabel(fmt::format("unknown label {} in {}", p.name(label),
                                   to_string(p.ref(m))));
  }
  return it->second + 1;
}

std::vector<Stmt> statements_at(const Program& p,
                                const MethodRef& m,
                                const std::string& label) {
  auto mid = p.find_method(m);
  if (!mid) {
    throw ResolveError(fmt::format("unknown method {}", to_string(m)));
  }
  auto sym = p.symbols().find(label);
  if (!sym) {
    throw UnknownLabel(fmt::format("unknown label {} in {}", label,
                                   to_string(m)));
  }
  uint32_t start = statement_index_at(p, *mid, *sym);
  const auto& body = p.method(*mid).body;
  return std::vector<Stmt>(body.begin() + start, body.end());
}

std::optional<MethodId> try_resolve_method(const Program& p,
                                           ClassId start,
                                           Symbol name,
                                           const std::vector<Type>& params,
                                           InvokeKind kind) {
  ClassId c = start;
  if (kind == InvokeKind::Super) {
    if (c == kRootClassId) {
      return std::nullopt;
    }
    c = p.class_def(c).super_id;
  }
  while (true) {
    if (auto m = p.find_declared(c, name, params)) {
      if (!p.method(*m).is_abstract()) {
        return m;
      }
    }
    if (c == kRootClassId) {
      return std::nullopt;
    }
    c = p.class_def(c).super_id;
  }
}

const MethodDef& resolve_method(const Program& p,
                                const std::string& static_class,
                                const std::string& name,
                                const std::vector<Type>& param_types,
                                InvokeKind kind) {
  auto cls = p.class_id(static_class);
  auto sym = p.symbols().find(name);
  std::optional<MethodId> m;
  if (sym) {
    m = try_resolve_method(p, cls, *sym, param_types, kind);
  }
  if (!m) {
    throw ResolveError(fmt::format(
        "no definition of {} for {} via {}",
        to_string(MethodRef{static_class, name, param_types}), static_class,
        to_string(kind)));
  }
  return p.method(*m);
}

bool is_subclass(const Program& p, ClassId c1, ClassId c2) {
  ClassId c = c1;
  while (true) {
    if (c == c2) {
      return true;
    }
    if (c == kRootClassId) {
      return false;
    }
    c = p.class_def(c).super_id;
  }
}

bool is_subclass(const Program& p,
                 const std::string& c1,
                 const std::string& c2) {
  return is_subclass(p, p.class_id(c1), p.class_id(c2));
}

} // namespace pdcfa::ir
