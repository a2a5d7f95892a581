#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdcfa/machine/domain.h"

namespace pdcfa::machine {

enum class Tag : uint8_t { Object, Int, AnyInt, Str, AnyStr, Bool, Null, Void };

// Object: a = object pointer, n = class. Str: a = string id. Int/Bool: n.
struct AbstractValue {
  Tag tag = Tag::Void;
  uint64_t a = 0;
  int64_t n = 0;

  static AbstractValue object(OpId op, ClassId cls) {
    return {Tag::Object, op, static_cast<int64_t>(cls)};
  }
  static AbstractValue integer(int64_t v) { return {Tag::Int, 0, v}; }
  static AbstractValue any_int() { return {Tag::AnyInt, 0, 0}; }
  static AbstractValue str(StrId s) { return {Tag::Str, s, 0}; }
  static AbstractValue any_str() { return {Tag::AnyStr, 0, 0}; }
  static AbstractValue boolean(bool b) { return {Tag::Bool, 0, b ? 1 : 0}; }
  static AbstractValue null() { return {Tag::Null, 0, 0}; }
  static AbstractValue void_value() { return {Tag::Void, 0, 0}; }

  bool is_object() const { return tag == Tag::Object; }
  OpId op() const { return a; }
  ClassId class_id() const { return static_cast<ClassId>(n); }

  bool operator==(const AbstractValue&) const = default;
  auto operator<=>(const AbstractValue&) const = default;
};

inline constexpr size_t kDefaultConstantBudget = 8;

/*
 * A finite set of abstract values, kept sorted. Exact ints (and strings)
 * beyond the constant budget collapse into AnyInt (AnyStr), and the Any
 * element absorbs every exact constant of its kind.
 */
class Val {
 public:
  Val() = default;
  Val(std::initializer_list<AbstractValue> vs);

  const std::vector<AbstractValue>& values() const { return m_values; }
  auto begin() const { return m_values.begin(); }
  auto end() const { return m_values.end(); }
  bool empty() const { return m_values.empty(); }
  size_t size() const { return m_values.size(); }

  void insert(const AbstractValue& v);
  // Returns true when this grew. Budget 0 disables widening.
  bool join(const Val& o, size_t budget = kDefaultConstantBudget);
  void normalize(size_t budget);

  bool contains(const AbstractValue& v) const;
  // Lattice order: every element of this is covered by o.
  bool leq(const Val& o) const;
  bool has_objects() const;

  bool operator==(const Val&) const = default;

 private:
  std::vector<AbstractValue> m_values;
};

// Address of a register in a frame or a field of an object.
struct Addr {
  enum class Kind : uint8_t { Reg, Field };
  Kind kind = Kind::Reg;
  uint64_t base = 0; // FpId or OpId
  Symbol name = 0;

  static Addr reg(FpId fp, Symbol r) { return {Kind::Reg, fp, r}; }
  static Addr field(OpId op, Symbol f) { return {Kind::Field, op, f}; }

  bool operator==(const Addr&) const = default;
  auto operator<=>(const Addr&) const = default;
};

struct AddrHash {
  size_t operator()(const Addr& a) const {
    return hash_combine(hash_combine(static_cast<uint64_t>(a.kind), a.base),
                        a.name);
  }
};

std::string describe(const Domain& d, const AbstractValue& v);
std::string describe(const Domain& d, const Addr& a);

} // namespace pdcfa::machine
