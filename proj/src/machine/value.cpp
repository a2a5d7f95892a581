#include "pdcfa/machine/value.h"

#include <algorithm>

#include <fmt/format.h>

#include "pdcfa/ir/sexpr.h"

namespace pdcfa::machine {

Val::Val(std::initializer_list<AbstractValue> vs) {
  for (const auto& v : vs) {
    insert(v);
  }
}

void Val::insert(const AbstractValue& v) {
  auto it = std::lower_bound(m_values.begin(), m_values.end(), v);
  if (it == m_values.end() || *it != v) {
    m_values.insert(it, v);
  }
}

namespace {

// Collapses exact members of one kind when the Any member is present or the
// budget is exceeded.
bool widen_kind(std::vector<AbstractValue>& vs, Tag exact, Tag any,
                size_t budget) {
  size_t exact_count = 0;
  bool has_any = false;
  for (const auto& v : vs) {
    exact_count += v.tag == exact;
    has_any = has_any || v.tag == any;
  }
  if (exact_count == 0 || (!has_any && (budget == 0 || exact_count <= budget))) {
    return false;
  }
  std::erase_if(vs, [&](const AbstractValue& v) { return v.tag == exact; });
  if (!has_any) {
    AbstractValue a{any, 0, 0};
    vs.insert(std::lower_bound(vs.begin(), vs.end(), a), a);
  }
  return true;
}

} // namespace

void Val::normalize(size_t budget) {
  widen_kind(m_values, Tag::Int, Tag::AnyInt, budget);
  widen_kind(m_values, Tag::Str, Tag::AnyStr, budget);
}

bool Val::join(const Val& o, size_t budget) {
  if (o.m_values.empty()) {
    return false;
  }
  std::vector<AbstractValue> merged;
  merged.reserve(m_values.size() + o.m_values.size());
  std::set_union(m_values.begin(), m_values.end(), o.m_values.begin(),
                 o.m_values.end(), std::back_inserter(merged));
  widen_kind(merged, Tag::Int, Tag::AnyInt, budget);
  widen_kind(merged, Tag::Str, Tag::AnyStr, budget);
  if (merged == m_values) {
    return false;
  }
  m_values = std::move(merged);
  return true;
}

bool Val::contains(const AbstractValue& v) const {
  return std::binary_search(m_values.begin(), m_values.end(), v);
}

bool Val::leq(const Val& o) const {
  bool any_int = o.contains(AbstractValue::any_int());
  bool any_str = o.contains(AbstractValue::any_str());
  for (const auto& v : m_values) {
    if (o.contains(v) || (v.tag == Tag::Int && any_int) ||
        (v.tag == Tag::Str && any_str)) {
      continue;
    }
    return false;
  }
  return true;
}

bool Val::has_objects() const {
  return std::any_of(m_values.begin(), m_values.end(),
                     [](const AbstractValue& v) { return v.is_object(); });
}

std::string describe(const Domain& d, const AbstractValue& v) {
  switch (v.tag) {
  case Tag::Object:
    return fmt::format("obj {} {}", d.describe_op(v.op()),
                       d.program().class_def(v.class_id()).name);
  case Tag::Int:
    return fmt::format("int {}", v.n);
  case Tag::AnyInt:
    return "int *";
  case Tag::Str:
    return fmt::format("str {}", ir::quote_string(d.str_of(v.a)));
  case Tag::AnyStr:
    return "str *";
  case Tag::Bool:
    return v.n ? "true" : "false";
  case Tag::Null:
    return "null";
  case Tag::Void:
    return "void";
  }
  return "?";
}

std::string describe(const Domain& d, const Addr& a) {
  if (a.kind == Addr::Kind::Reg) {
    return fmt::format("reg {} {}", d.describe_fp(a.base),
                       d.program().name(a.name));
  }
  return fmt::format("field {} {}", d.describe_op(a.base),
                     d.program().name(a.name));
}

} // namespace pdcfa::machine
