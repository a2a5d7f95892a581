#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pdcfa/ir/program.h"
#include "pdcfa/machine/store.h"
#include "pdcfa/taint/category.h"

namespace pdcfa::taint {

enum class SinkKind : uint8_t { Network, File, Intent, Sms, Log };

const char* to_string(SinkKind k);
std::optional<SinkKind> sink_kind_from_string(std::string_view s);

enum class RetKind : uint8_t { AnyString, AnyInt, Null, Void };

/*
 * Model of one library API. Roles combine: a record may be both a propagator
 * and a sink, for example.
 */
struct ApiSummary {
  std::string class_glob;
  std::string method;
  std::optional<std::vector<ir::Type>> params; // nullopt matches any

  bool source = false;
  std::vector<Category> source_categories;
  bool sink = false;
  SinkKind sink_kind = SinkKind::Network;
  std::vector<Category> sink_categories; // empty: every category
  bool propagate = false;
  bool neutral = false;

  RetKind ret = RetKind::Void;
  std::vector<std::string> permissions;
  size_t line = 0;
};

class SummaryParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SummaryTable {
 public:
  static SummaryTable parse(std::string_view text);
  static SummaryTable load(const std::string& path);
  static SummaryTable builtin();

  // First record matching the invoke's static class and method name.
  const ApiSummary* match(const std::string& class_name,
                          const std::string& method,
                          const std::vector<ir::Type>& params) const;

  const std::vector<ApiSummary>& records() const { return m_records; }

 private:
  std::vector<ApiSummary> m_records;
};

// `*` matches any run of characters; everything else is literal.
bool glob_match(std::string_view pattern, std::string_view text);

struct SinkHit {
  machine::TaintLabel label;
  SinkKind kind;
  bool operator==(const SinkHit&) const = default;
};

struct SummaryOutcome {
  machine::Val ret;
  machine::TaintSet ret_taint;
  std::vector<SinkHit> sink_hits;
};

// Source labels are attributed to `call_site`.
SummaryOutcome apply_summary(const ApiSummary& s,
                             const std::vector<machine::Val>& arg_vals,
                             const std::vector<machine::TaintSet>& arg_taints,
                             machine::ProgramPoint call_site);

machine::Val return_abstraction(RetKind k);

// Text of the shipped default table (compiled in from data/).
std::string_view default_summary_text();

} // namespace pdcfa::taint
