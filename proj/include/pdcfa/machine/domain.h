#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdcfa/ir/program.h"

namespace pdcfa::machine {

using ir::ClassId;
using ir::MethodId;
using ir::Symbol;

// Method + statement index. Also serves as call-site and allocation-site id.
struct ProgramPoint {
  MethodId method = 0;
  uint32_t index = 0;

  bool operator==(const ProgramPoint&) const = default;
  auto operator<=>(const ProgramPoint&) const = default;
};

// Receivers injected for non-static entry points live at a synthetic site
// whose index is the receiver class.
inline constexpr MethodId kSyntheticMethod = 0xffffffffu;

inline constexpr size_t kMaxK = 4;

// Bounded call string, most recent call site last.
struct Context {
  std::array<ProgramPoint, kMaxK> sites{};
  uint8_t size = 0;

  bool operator==(const Context& o) const;
  // Appends a site and keeps the last k entries.
  Context extend(ProgramPoint site, size_t k) const;
  Context truncate(size_t k) const;
};

// Ids are content hashes, so they do not depend on discovery order. That keeps
// every ordering derived from them stable across schedules.
using FpId = uint64_t;
using OpId = uint64_t;
using StrId = uint64_t;
using SetId = uint64_t;

struct FramePointer {
  MethodId method = 0;
  Context ctx;
  bool operator==(const FramePointer&) const = default;
};

struct ObjectPointer {
  ProgramPoint site;
  Context ctx;
  bool operator==(const ObjectPointer&) const = default;
};

uint64_t mix64(uint64_t x);
inline uint64_t hash_combine(uint64_t seed, uint64_t v) {
  return mix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

class InternCollision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*
 * Interns frame pointers, object pointers, string constants and small class
 * sets. Shared by every analysis run over one program so stores can be
 * threaded between runs. Thread-safe.
 */
class Domain {
 public:
  explicit Domain(const ir::Program& p) : m_program(p) {}

  const ir::Program& program() const { return m_program; }

  FpId fp(MethodId m, const Context& ctx);
  OpId op(ProgramPoint site, const Context& ctx);
  StrId str(const std::string& s);
  SetId class_set(std::vector<ClassId> classes); // sorted, deduplicated

  FramePointer fp_of(FpId id) const;
  ObjectPointer op_of(OpId id) const;
  std::string str_of(StrId id) const;
  std::vector<ClassId> class_set_of(SetId id) const;

  static constexpr SetId kEmptySet = 0;

  // Symbolic renderings, stable across runs and orderings.
  std::string describe_point(ProgramPoint p) const;
  std::string describe_ctx(const Context& c) const;
  std::string describe_fp(FpId id) const;
  std::string describe_op(OpId id) const;

 private:
  const ir::Program& m_program;
  mutable std::shared_mutex m_mutex;
  std::unordered_map<uint64_t, FramePointer> m_fps;
  std::unordered_map<uint64_t, ObjectPointer> m_ops;
  std::unordered_map<uint64_t, std::string> m_strs;
  std::unordered_map<uint64_t, std::vector<ClassId>> m_sets;
};

} // namespace pdcfa::machine
