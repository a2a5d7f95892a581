#pragma once

#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "pdcfa/ir/program.h"
#include "pdcfa/machine/domain.h"
#include "pdcfa/machine/store.h"
#include "pdcfa/taint/summary.h"

namespace pdcfa::concrete {

using Int = boost::multiprecision::cpp_int;
using machine::ProgramPoint;

struct Value {
  enum class Kind : uint8_t { Int, Str, Bool, Null, Void, Object };
  Kind kind = Kind::Void;
  Int i;
  std::string s;
  bool b = false;
  uint64_t obj = 0; // index into Trace::objects

  static Value integer(Int v) {
    Value x;
    x.kind = Kind::Int;
    x.i = std::move(v);
    return x;
  }
  static Value str(std::string v) {
    Value x;
    x.kind = Kind::Str;
    x.s = std::move(v);
    return x;
  }
  static Value boolean(bool v) {
    Value x;
    x.kind = Kind::Bool;
    x.b = v;
    return x;
  }
  static Value null() {
    Value x;
    x.kind = Kind::Null;
    return x;
  }
  static Value void_value() { return Value{}; }
  static Value object(uint64_t id) {
    Value x;
    x.kind = Kind::Object;
    x.obj = id;
    return x;
  }

  bool operator==(const Value&) const = default;
};

std::string to_string(const Value& v);

struct Addr {
  enum class Kind : uint8_t { Reg, Field };
  Kind kind = Kind::Reg;
  uint64_t base = 0; // frame id or object id
  ir::Symbol name = 0;
  auto operator<=>(const Addr&) const = default;
};

struct FrameInfo {
  ir::MethodId method = 0;
  std::vector<ProgramPoint> call_string; // full, most recent last
};

struct ObjectInfo {
  ir::ClassId cls = 0;
  ProgramPoint site;
  std::vector<ProgramPoint> call_string; // of the allocating frame
};

struct State {
  enum class Kind : uint8_t { Normal, AfterCall };
  Kind kind = Kind::Normal;
  ir::MethodId method = 0;
  uint32_t index = 0;
  uint64_t frame = 0;
  size_t depth = 0; // stack height
};

struct Write {
  Addr addr;
  Value value;
  std::vector<machine::TaintLabel> taint;
};

struct SinkRecord {
  machine::TaintLabel label;
  taint::SinkKind kind;
  ProgramPoint sink;
  auto operator<=>(const SinkRecord&) const = default;
};

enum class Outcome : uint8_t {
  Returned,
  OutOfFuel,
  UncaughtException,
  TypeError,
  MalformedState,
};

const char* to_string(Outcome o);

/*
 * A concrete run. States are recorded in execution order; every store write
 * is logged, so the bindings of every visited state are covered by `writes`.
 */
struct Trace {
  Outcome outcome = Outcome::Returned;
  std::string message;
  std::vector<State> states;
  std::vector<Write> writes;
  std::vector<FrameInfo> frames;
  std::vector<ObjectInfo> objects;
  std::map<Addr, Value> store;
  std::vector<SinkRecord> sinks;
  std::vector<ProgramPoint> sources;
  Value result; // returned value when outcome == Returned
};

struct RunOptions {
  size_t fuel = 100000;
};

// Runs `entry` with the given parameter values. Non-static entries receive a
// receiver allocated at the synthetic receiver site of the declaring class.
Trace run_concrete(const ir::Program& p, const ir::MethodRef& entry,
                   const std::vector<Value>& args,
                   const taint::SummaryTable& summaries,
                   const RunOptions& opts = {});

// Abstraction of concrete identities under an allocation policy.
machine::FpId abstract_frame(machine::Domain& d, const Trace& t, uint64_t frame,
                             size_t k);
machine::OpId abstract_object(machine::Domain& d, const Trace& t, uint64_t obj,
                              size_t k, bool heap_context);
// True when the abstract set covers the concrete value.
bool covers(machine::Domain& d, const Trace& t, const machine::Val& v,
            const Value& c, size_t k, bool heap_context);
machine::Addr abstract_addr(machine::Domain& d, const Trace& t, const Addr& a,
                            size_t k, bool heap_context);

} // namespace pdcfa::concrete
