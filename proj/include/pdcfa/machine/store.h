#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "pdcfa/machine/value.h"
#include "pdcfa/taint/category.h"

namespace pdcfa::machine {

// A taint category together with the source call that introduced it.
struct TaintLabel {
  taint::Category category = taint::Category::Location;
  ProgramPoint source;

  bool operator==(const TaintLabel&) const = default;
  auto operator<=>(const TaintLabel&) const = default;
};

class TaintSet {
 public:
  TaintSet() = default;
  TaintSet(std::initializer_list<TaintLabel> ls);

  const std::vector<TaintLabel>& labels() const { return m_labels; }
  auto begin() const { return m_labels.begin(); }
  auto end() const { return m_labels.end(); }
  bool empty() const { return m_labels.empty(); }
  size_t size() const { return m_labels.size(); }

  void insert(const TaintLabel& l);
  bool join(const TaintSet& o);
  bool contains(const TaintLabel& l) const;
  bool has_category(taint::Category c) const;
  bool leq(const TaintSet& o) const;

  bool operator==(const TaintSet&) const = default;

 private:
  std::vector<TaintLabel> m_labels;
};

// Value store: absent addresses read as the empty set.
class Store {
 public:
  explicit Store(size_t budget = kDefaultConstantBudget) : m_budget(budget) {}

  const Val& get(const Addr& a) const;
  bool join(const Addr& a, const Val& v);
  // Pointwise join; returns true when anything grew.
  bool join(const Store& o);
  bool leq(const Store& o) const;
  size_t size() const { return m_map.size(); }
  size_t budget() const { return m_budget; }
  const std::unordered_map<Addr, Val, AddrHash>& entries() const {
    return m_map;
  }

  bool operator==(const Store& o) const { return m_map == o.m_map; }

 private:
  size_t m_budget;
  std::unordered_map<Addr, Val, AddrHash> m_map;
};

class TaintStore {
 public:
  const TaintSet& get(const Addr& a) const;
  bool join(const Addr& a, const TaintSet& t);
  bool join(const TaintStore& o);
  bool leq(const TaintStore& o) const;
  size_t size() const { return m_map.size(); }
  const std::unordered_map<Addr, TaintSet, AddrHash>& entries() const {
    return m_map;
  }

  bool operator==(const TaintStore& o) const { return m_map == o.m_map; }

 private:
  std::unordered_map<Addr, TaintSet, AddrHash> m_map;
};

std::string describe(const Domain& d, const TaintLabel& l);

// Order-independent text form of a store pair: one sorted line per address,
// with symbolic names in place of ids.
std::string canonical_text(const Domain& d, const Store& s,
                           const TaintStore& t);

} // namespace pdcfa::machine
