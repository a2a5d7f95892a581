#include "pdcfa/machine/domain.h"

#include <algorithm>

#include <fmt/format.h>

namespace pdcfa::machine {

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool Context::operator==(const Context& o) const {
  if (size != o.size) {
    return false;
  }
  for (size_t i = 0; i < size; ++i) {
    if (sites[i] != o.sites[i]) {
      return false;
    }
  }
  return true;
}

Context Context::extend(ProgramPoint site, size_t k) const {
  Context out;
  if (k == 0) {
    return out;
  }
  std::vector<ProgramPoint> all(sites.begin(), sites.begin() + size);
  all.push_back(site);
  size_t start = all.size() > k ? all.size() - k : 0;
  for (size_t i = start; i < all.size(); ++i) {
    out.sites[out.size++] = all[i];
  }
  return out;
}

Context Context::truncate(size_t k) const {
  Context out;
  size_t start = size > k ? size - k : 0;
  for (size_t i = start; i < size; ++i) {
    out.sites[out.size++] = sites[i];
  }
  return out;
}

namespace {

uint64_t hash_ctx(uint64_t seed, const Context& c) {
  seed = hash_combine(seed, c.size);
  for (size_t i = 0; i < c.size; ++i) {
    seed = hash_combine(seed, c.sites[i].method);
    seed = hash_combine(seed, c.sites[i].index);
  }
  return seed;
}

template <typename Map, typename Key>
uint64_t intern_into(std::shared_mutex& mutex, Map& map, uint64_t id,
                     const Key& key, const char* what) {
  {
    std::shared_lock lock(mutex);
    auto it = map.find(id);
    if (it != map.end()) {
      if (!(it->second == key)) {
        throw InternCollision(fmt::format("hash collision interning {}", what));
      }
      return id;
    }
  }
  std::unique_lock lock(mutex);
  auto [it, inserted] = map.emplace(id, key);
  if (!inserted && !(it->second == key)) {
    throw InternCollision(fmt::format("hash collision interning {}", what));
  }
  return id;
}

} // namespace

FpId Domain::fp(MethodId m, const Context& ctx) {
  uint64_t id = hash_ctx(hash_combine(0x1, m), ctx);
  return intern_into(m_mutex, m_fps, id, FramePointer{m, ctx}, "frame pointer");
}

OpId Domain::op(ProgramPoint site, const Context& ctx) {
  uint64_t id =
      hash_ctx(hash_combine(hash_combine(0x2, site.method), site.index), ctx);
  return intern_into(m_mutex, m_ops, id, ObjectPointer{site, ctx},
                     "object pointer");
}

StrId Domain::str(const std::string& s) {
  uint64_t id = 0x3;
  for (unsigned char c : s) {
    id = hash_combine(id, c);
  }
  id = hash_combine(id, s.size());
  return intern_into(m_mutex, m_strs, id, s, "string");
}

SetId Domain::class_set(std::vector<ClassId> classes) {
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.empty()) {
    return kEmptySet;
  }
  uint64_t id = 0x4;
  for (auto c : classes) {
    id = hash_combine(id, c);
  }
  if (id == kEmptySet) {
    id = 1;
  }
  return intern_into(m_mutex, m_sets, id, classes, "class set");
}

FramePointer Domain::fp_of(FpId id) const {
  std::shared_lock lock(m_mutex);
  return m_fps.at(id);
}

ObjectPointer Domain::op_of(OpId id) const {
  std::shared_lock lock(m_mutex);
  return m_ops.at(id);
}

std::string Domain::str_of(StrId id) const {
  std::shared_lock lock(m_mutex);
  return m_strs.at(id);
}

std::vector<ClassId> Domain::class_set_of(SetId id) const {
  if (id == kEmptySet) {
    return {};
  }
  std::shared_lock lock(m_mutex);
  return m_sets.at(id);
}

std::string Domain::describe_point(ProgramPoint p) const {
  if (p.method == kSyntheticMethod) {
    return fmt::format("<receiver {}>", m_program.class_def(p.index).name);
  }
  return fmt::format("{}#{}", ir::to_string(m_program.ref(p.method)), p.index);
}

std::string Domain::describe_ctx(const Context& c) const {
  std::string out = "[";
  for (size_t i = 0; i < c.size; ++i) {
    if (i > 0) {
      out += ' ';
    }
    out += describe_point(c.sites[i]);
  }
  return out + "]";
}

std::string Domain::describe_fp(FpId id) const {
  auto f = fp_of(id);
  return fmt::format("{}{}", ir::to_string(m_program.ref(f.method)),
                     describe_ctx(f.ctx));
}

std::string Domain::describe_op(OpId id) const {
  auto o = op_of(id);
  return fmt::format("{}{}", describe_point(o.site), describe_ctx(o.ctx));
}

} // namespace pdcfa::machine
