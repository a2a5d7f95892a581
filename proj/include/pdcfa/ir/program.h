#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "pdcfa/ir/sexpr.h"

namespace pdcfa::ir {

using Symbol = uint32_t;
using ClassId = uint32_t;
using MethodId = uint32_t;

inline constexpr const char* kRootClass = "java/lang/Object";
inline constexpr const char* kStringClass = "java/lang/String";
inline constexpr ClassId kRootClassId = 0;

class SymbolTable {
 public:
  Symbol intern(const std::string& name);
  std::optional<Symbol> find(const std::string& name) const;
  const std::string& name(Symbol s) const { return m_names.at(s); }
  size_t size() const { return m_names.size(); }

  bool operator==(const SymbolTable& o) const { return m_names == o.m_names; }

 private:
  std::vector<std::string> m_names;
  std::unordered_map<std::string, Symbol> m_index;
};

enum class Attribute : uint8_t { Public, Private, Protected, Final, Abstract };

std::optional<Attribute> attribute_from_string(std::string_view s);
const char* to_string(Attribute a);

struct Type {
  enum class Kind : uint8_t { Int, Byte, Char, Boolean, Class };
  Kind kind = Kind::Int;
  std::string class_name;

  bool is_reference() const { return kind == Kind::Class; }
  bool operator==(const Type&) const = default;
  auto operator<=>(const Type&) const = default;
};

Type parse_type(const std::string& s);
std::string to_string(const Type& t);

enum class PrimOp : uint8_t {
  Add,
  Sub,
  Mul,
  Div,
  Rem,
  Neg,
  Not,
  And,
  Or,
  Xor,
  Lt,
  Le,
  Gt,
  Ge,
  Eq,
  Ne,
};

std::optional<PrimOp> prim_op_from_string(std::string_view s);
const char* to_string(PrimOp op);
size_t prim_op_arity(PrimOp op);

struct AExp {
  enum class Kind : uint8_t {
    This,
    True,
    False,
    Null,
    Void,
    Name,
    Int,
    Str,
    Op,
    InstanceOf,
  };

  Kind kind = Kind::Void;
  Symbol name = 0; // Name
  int64_t int_value = 0; // Int
  std::string text; // Str
  PrimOp op = PrimOp::Add; // Op
  ClassId class_id = 0; // InstanceOf
  std::vector<AExp> args; // Op operands, InstanceOf operand

  static AExp make(Kind k) {
    AExp e;
    e.kind = k;
    return e;
  }
  static AExp reg(Symbol s) {
    AExp e = make(Kind::Name);
    e.name = s;
    return e;
  }
  static AExp integer(int64_t v) {
    AExp e = make(Kind::Int);
    e.int_value = v;
    return e;
  }

  bool operator==(const AExp&) const = default;
};

enum class InvokeKind : uint8_t { Static, Direct, Virtual, Interface, Super };

const char* to_string(InvokeKind k);

struct NewExp {
  ClassId class_id = 0;
  bool operator==(const NewExp&) const = default;
};

struct InvokeExp {
  InvokeKind kind = InvokeKind::Static;
  std::vector<AExp> args;
  std::vector<Type> arg_types;
  // Static class of the call target; may name a library class that the
  // program does not declare (resolved through API summaries).
  std::string class_name;
  Symbol method_name = 0;

  bool is_static() const { return kind == InvokeKind::Static; }
  bool operator==(const InvokeExp&) const = default;
};

struct LabelStmt {
  Symbol label;
  bool operator==(const LabelStmt&) const = default;
};
struct NopStmt {
  bool operator==(const NopStmt&) const = default;
};
struct LineStmt {
  int64_t line;
  bool operator==(const LineStmt&) const = default;
};
struct GotoStmt {
  Symbol label;
  uint32_t target = 0; // index of the label statement
  bool operator==(const GotoStmt&) const = default;
};
struct IfStmt {
  AExp cond;
  Symbol label;
  uint32_t target = 0;
  bool operator==(const IfStmt&) const = default;
};
struct AssignAtomicStmt {
  Symbol dst;
  AExp value;
  bool operator==(const AssignAtomicStmt&) const = default;
};
struct AssignNewStmt {
  Symbol dst;
  NewExp value;
  bool operator==(const AssignNewStmt&) const = default;
};
struct AssignInvokeStmt {
  Symbol dst;
  InvokeExp call;
  bool operator==(const AssignInvokeStmt&) const = default;
};
struct FieldPutStmt {
  AExp object;
  Symbol field;
  AExp value;
  bool operator==(const FieldPutStmt&) const = default;
};
struct FieldGetStmt {
  Symbol dst;
  AExp object;
  Symbol field;
  bool operator==(const FieldGetStmt&) const = default;
};
struct PushHandlerStmt {
  ClassId class_id;
  Symbol label;
  uint32_t target = 0;
  bool operator==(const PushHandlerStmt&) const = default;
};
struct PopHandlerStmt {
  bool operator==(const PopHandlerStmt&) const = default;
};
struct ThrowStmt {
  AExp value;
  bool operator==(const ThrowStmt&) const = default;
};
struct ReturnStmt {
  AExp value;
  bool operator==(const ReturnStmt&) const = default;
};
// Synthesized return-value move at a call's continuation; never parsed.
struct MoveFromRetStmt {
  Symbol dst;
  bool operator==(const MoveFromRetStmt&) const = default;
};

using StmtNode = std::variant<LabelStmt,
                              NopStmt,
                              LineStmt,
                              GotoStmt,
                              IfStmt,
                              AssignAtomicStmt,
                              AssignNewStmt,
                              AssignInvokeStmt,
                              FieldPutStmt,
                              FieldGetStmt,
                              PushHandlerStmt,
                              PopHandlerStmt,
                              ThrowStmt,
                              ReturnStmt,
                              MoveFromRetStmt>;

struct Stmt {
  StmtNode node;
  SourcePos pos;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  // Positions are diagnostics only; structural equality ignores them.
  bool operator==(const Stmt& o) const { return node == o.node; }
};

struct FieldDef {
  std::vector<Attribute> attributes;
  Symbol name;
  Type type;
  bool operator==(const FieldDef&) const = default;
};

struct MethodDef {
  MethodId id = 0;
  ClassId owner = 0;
  std::vector<Attribute> attributes;
  Symbol name;
  std::vector<Type> param_types;
  Type return_type;
  std::vector<std::string> throws;
  uint32_t limit = 0;
  std::vector<Stmt> body;
  std::map<Symbol, uint32_t> labels; // label -> index of its Label statement
  // For each statement, the most recent preceding (line n) in body order.
  std::vector<int64_t> line_of;
  SourcePos pos;

  bool is_abstract() const;
  bool operator==(const MethodDef& o) const;
};

struct ClassDef {
  ClassId id = 0;
  std::vector<Attribute> attributes;
  std::string name;
  std::string super_name;
  ClassId super_id = 0;
  std::vector<FieldDef> fields;
  std::vector<MethodId> methods;
  bool synthetic_root = false;
  SourcePos pos;

  bool operator==(const ClassDef& o) const;
};

// Identity of a method independent of interning.
struct MethodRef {
  std::string class_name;
  std::string method_name;
  std::vector<Type> param_types;

  bool operator==(const MethodRef&) const = default;
  auto operator<=>(const MethodRef&) const = default;
};

std::string to_string(const MethodRef& m);

class ResolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownLabel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownClass : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*
 * A validated program. Immutable once built by the parser; class 0 is always
 * the root class java/lang/Object.
 */
class Program {
 public:
  const std::vector<ClassDef>& classes() const { return m_classes; }
  const std::vector<MethodDef>& methods() const { return m_methods; }
  const ClassDef& class_def(ClassId id) const { return m_classes.at(id); }
  const MethodDef& method(MethodId id) const { return m_methods.at(id); }
  std::optional<ClassId> find_class(const std::string& name) const;
  ClassId class_id(const std::string& name) const; // throws UnknownClass

  SymbolTable& symbols() { return m_symbols; }
  const SymbolTable& symbols() const { return m_symbols; }
  const std::string& name(Symbol s) const { return m_symbols.name(s); }
  Symbol sym_this() const { return m_this; }
  Symbol sym_ret() const { return m_ret; }
  Symbol sym_exn() const { return m_exn; }
  // param<i>, interned lazily at construction for every arity in use.
  Symbol sym_param(size_t i) const { return m_params.at(i); }

  MethodRef ref(MethodId id) const;
  std::optional<MethodId> find_method(const MethodRef& ref) const;
  // Declared in the class itself (no inheritance walk).
  std::optional<MethodId> find_declared(ClassId cls,
                                        Symbol name,
                                        const std::vector<Type>& params) const;

  // Fields of a class and all of its ancestors, ancestors first.
  std::vector<const FieldDef*> all_fields(ClassId cls) const;

  bool operator==(const Program& o) const;

  // Construction API used by the parser.
  Program();
  ClassId add_class(ClassDef def);
  MethodId add_method(MethodDef def);
  ClassDef& mutable_class(ClassId id) { return m_classes.at(id); }
  void finish_symbols(size_t max_params);

 private:
  std::vector<ClassDef> m_classes;
  std::vector<MethodDef> m_methods;
  std::unordered_map<std::string, ClassId> m_class_index;
  SymbolTable m_symbols;
  Symbol m_this = 0;
  Symbol m_ret = 0;
  Symbol m_exn = 0;
  std::vector<Symbol> m_params;
};

// The statement suffix following Label(l) in the method body.
std::vector<Stmt> statements_at(const Program& p,
                                const MethodRef& m,
                                const std::string& label);
// Index of the first statement after Label(l).
uint32_t statement_index_at(const Program& p, MethodId m, Symbol label);

const MethodDef& resolve_method(const Program& p,
                                const std::string& static_class,
                                const std::string& name,
                                const std::vector<Type>& param_types,
                                InvokeKind kind);
std::optional<MethodId> try_resolve_method(const Program& p,
                                           ClassId start,
                                           Symbol name,
                                           const std::vector<Type>& params,
                                           InvokeKind kind);

bool is_subclass(const Program& p, const std::string& c1, const std::string& c2);
bool is_subclass(const Program& p, ClassId c1, ClassId c2);

} // namespace pdcfa::ir
