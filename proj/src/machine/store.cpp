#include "pdcfa/machine/store.h"

#include <algorithm>

#include <fmt/format.h>

namespace pdcfa::machine {

TaintSet::TaintSet(std::initializer_list<TaintLabel> ls) {
  for (const auto& l : ls) {
    insert(l);
  }
}

void TaintSet::insert(const TaintLabel& l) {
  auto it = std::lower_bound(m_labels.begin(), m_labels.end(), l);
  if (it == m_labels.end() || *it != l) {
    m_labels.insert(it, l);
  }
}

bool TaintSet::join(const TaintSet& o) {
  if (o.m_labels.empty() || std::includes(m_labels.begin(), m_labels.end(),
                                          o.m_labels.begin(),
                                          o.m_labels.end())) {
    return false;
  }
  std::vector<TaintLabel> merged;
  merged.reserve(m_labels.size() + o.m_labels.size());
  std::set_union(m_labels.begin(), m_labels.end(), o.m_labels.begin(),
                 o.m_labels.end(), std::back_inserter(merged));
  m_labels = std::move(merged);
  return true;
}

bool TaintSet::contains(const TaintLabel& l) const {
  return std::binary_search(m_labels.begin(), m_labels.end(), l);
}

bool TaintSet::has_category(taint::Category c) const {
  return std::any_of(m_labels.begin(), m_labels.end(),
                     [&](const TaintLabel& l) { return l.category == c; });
}

bool TaintSet::leq(const TaintSet& o) const {
  return std::includes(o.m_labels.begin(), o.m_labels.end(), m_labels.begin(),
                       m_labels.end());
}

const Val& Store::get(const Addr& a) const {
  static const Val kEmpty;
  auto it = m_map.find(a);
  return it == m_map.end() ? kEmpty : it->second;
}

bool Store::join(const Addr& a, const Val& v) {
  if (v.empty()) {
    return false;
  }
  return m_map[a].join(v, m_budget);
}

bool Store::join(const Store& o) {
  bool grew = false;
  for (const auto& [a, v] : o.m_map) {
    grew = join(a, v) || grew;
  }
  return grew;
}

bool Store::leq(const Store& o) const {
  for (const auto& [a, v] : m_map) {
    if (!v.leq(o.get(a))) {
      return false;
    }
  }
  return true;
}

const TaintSet& TaintStore::get(const Addr& a) const {
  static const TaintSet kEmpty;
  auto it = m_map.find(a);
  return it == m_map.end() ? kEmpty : it->second;
}

bool TaintStore::join(const Addr& a, const TaintSet& t) {
  if (t.empty()) {
    return false;
  }
  return m_map[a].join(t);
}

bool TaintStore::join(const TaintStore& o) {
  bool grew = false;
  for (const auto& [a, t] : o.m_map) {
    grew = join(a, t) || grew;
  }
  return grew;
}

bool TaintStore::leq(const TaintStore& o) const {
  for (const auto& [a, t] : m_map) {
    if (!t.leq(o.get(a))) {
      return false;
    }
  }
  return true;
}

std::string describe(const Domain& d, const TaintLabel& l) {
  return fmt::format("{}@{}", taint::to_string(l.category),
                     d.describe_point(l.source));
}

std::string canonical_text(const Domain& d, const Store& s,
                           const TaintStore& t) {
  std::vector<std::string> lines;
  for (const auto& [a, v] : s.entries()) {
    if (v.empty()) {
      continue;
    }
    std::vector<std::string> vals;
    for (const auto& x : v) {
      vals.push_back(describe(d, x));
    }
    std::sort(vals.begin(), vals.end());
    lines.push_back(fmt::format("V {} = {{{}}}", describe(d, a),
                                fmt::join(vals, ", ")));
  }
  for (const auto& [a, ts] : t.entries()) {
    if (ts.empty()) {
      continue;
    }
    std::vector<std::string> labels;
    for (const auto& l : ts) {
      labels.push_back(describe(d, l));
    }
    std::sort(labels.begin(), labels.end());
    lines.push_back(fmt::format("T {} = {{{}}}", describe(d, a),
                                fmt::join(labels, ", ")));
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

} // namespace pdcfa::machine
