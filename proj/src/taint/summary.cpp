#include "pdcfa/taint/summary.h"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace pdcfa::taint {

using machine::AbstractValue;
using machine::TaintLabel;
using machine::TaintSet;
using machine::Val;

namespace {

constexpr std::pair<SinkKind, const char*> kSinkNames[] = {
    {SinkKind::Network, "network"}, {SinkKind::File, "file"},
    {SinkKind::Intent, "intent"},   {SinkKind::Sms, "sms"},
    {SinkKind::Log, "log"},
};

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) {
    return out;
  }
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

std::vector<Category> parse_categories(const std::string& s, size_t line) {
  std::vector<Category> out;
  for (const auto& name : split(s, ',')) {
    auto c = category_from_string(name);
    if (!c) {
      throw SummaryParseError(
          fmt::format("line {}: unknown taint category '{}'", line, name));
    }
    out.push_back(*c);
  }
  return out;
}

void parse_role(ApiSummary& s, const std::string& role, size_t line) {
  for (const auto& part : split(role, '+')) {
    auto fields = split(part, ':');
    if (fields.empty()) {
      throw SummaryParseError(fmt::format("line {}: empty role", line));
    }
    const auto& head = fields[0];
    if (head == "source" && fields.size() == 2) {
      s.source = true;
      s.source_categories = parse_categories(fields[1], line);
      if (s.source_categories.empty()) {
        throw SummaryParseError(
            fmt::format("line {}: source role needs a category", line));
      }
    } else if (head == "sink" && (fields.size() == 2 || fields.size() == 3)) {
      s.sink = true;
      auto kind = sink_kind_from_string(fields[1]);
      if (!kind) {
        throw SummaryParseError(
            fmt::format("line {}: unknown sink kind '{}'", line, fields[1]));
      }
      s.sink_kind = *kind;
      if (fields.size() == 3) {
        s.sink_categories = parse_categories(fields[2], line);
      }
    } else if (head == "propagate" && fields.size() == 1) {
      s.propagate = true;
    } else if (head == "neutral" && fields.size() == 1) {
      s.neutral = true;
    } else {
      throw SummaryParseError(
          fmt::format("line {}: malformed role '{}'", line, part));
    }
  }
}

ApiSummary parse_record(const std::string& text, size_t line) {
  std::istringstream in(text);
  std::string word;
  std::vector<std::string> words;
  while (in >> word) {
    words.push_back(word);
  }
  if (words.size() < 3 || words[0] != "summary") {
    throw SummaryParseError(fmt::format(
        "line {}: expected 'summary <class> <method> key=value ...'", line));
  }
  ApiSummary s;
  s.line = line;
  s.class_glob = words[1];
  const auto& method = words[2];
  auto paren = method.find('(');
  if (paren == std::string::npos) {
    s.method = method;
  } else {
    if (method.back() != ')') {
      throw SummaryParseError(
          fmt::format("line {}: malformed method pattern '{}'", line, method));
    }
    s.method = method.substr(0, paren);
    std::vector<ir::Type> params;
    for (const auto& t :
         split(std::string_view(method).substr(paren + 1,
                                               method.size() - paren - 2),
               ',')) {
      params.push_back(ir::parse_type(t));
    }
    s.params = params;
  }
  bool has_role = false;
  for (size_t i = 3; i < words.size(); ++i) {
    auto eq = words[i].find('=');
    if (eq == std::string::npos) {
      throw SummaryParseError(
          fmt::format("line {}: expected key=value, got '{}'", line, words[i]));
    }
    auto key = words[i].substr(0, eq);
    auto value = words[i].substr(eq + 1);
    if (key == "role") {
      parse_role(s, value, line);
      has_role = true;
    } else if (key == "ret") {
      if (value == "any-string") {
        s.ret = RetKind::AnyString;
      } else if (value == "any-int") {
        s.ret = RetKind::AnyInt;
      } else if (value == "null") {
        s.ret = RetKind::Null;
      } else if (value == "void") {
        s.ret = RetKind::Void;
      } else {
        throw SummaryParseError(
            fmt::format("line {}: unknown return abstraction '{}'", line,
                        value));
      }
    } else if (key == "perms") {
      s.permissions = split(value, ',');
    } else {
      throw SummaryParseError(
          fmt::format("line {}: unknown key '{}'", line, key));
    }
  }
  if (!has_role) {
    throw SummaryParseError(fmt::format("line {}: missing role", line));
  }
  return s;
}

} // namespace

const char* to_string(SinkKind k) {
  for (const auto& [kind, name] : kSinkNames) {
    if (kind == k) {
      return name;
    }
  }
  return "?";
}

std::optional<SinkKind> sink_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kSinkNames) {
    if (s == name) {
      return kind;
    }
  }
  return std::nullopt;
}

bool glob_match(std::string_view pattern, std::string_view text) {
  size_t p = 0;
  size_t t = 0;
  size_t star = std::string_view::npos;
  size_t mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (p < pattern.size() && pattern[p] == text[t]) {
      ++p;
      ++t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') {
    ++p;
  }
  return p == pattern.size();
}

SummaryTable SummaryTable::parse(std::string_view text) {
  SummaryTable table;
  size_t line = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line;
    auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw[first] == '#') {
      continue;
    }
    table.m_records.push_back(parse_record(raw, line));
  }
  return table;
}

SummaryTable SummaryTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw SummaryParseError(fmt::format("cannot open {}", path));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

SummaryTable SummaryTable::builtin() { return parse(default_summary_text()); }

const ApiSummary* SummaryTable::match(
    const std::string& class_name,
    const std::string& method,
    const std::vector<ir::Type>& params) const {
  for (const auto& s : m_records) {
    if (s.method == method && glob_match(s.class_glob, class_name) &&
        (!s.params || *s.params == params)) {
      return &s;
    }
  }
  return nullptr;
}

Val return_abstraction(RetKind k) {
  switch (k) {
  case RetKind::AnyString:
    return Val{AbstractValue::any_str()};
  case RetKind::AnyInt:
    return Val{AbstractValue::any_int()};
  case RetKind::Null:
    return Val{AbstractValue::null()};
  case RetKind::Void:
    return Val{AbstractValue::void_value()};
  }
  return {};
}

SummaryOutcome apply_summary(const ApiSummary& s,
                             const std::vector<Val>& arg_vals,
                             const std::vector<TaintSet>& arg_taints,
                             machine::ProgramPoint call_site) {
  (void)arg_vals;
  SummaryOutcome out;
  out.ret = return_abstraction(s.ret);
  TaintSet incoming;
  for (const auto& t : arg_taints) {
    incoming.join(t);
  }
  if (s.source) {
    for (auto c : s.source_categories) {
      out.ret_taint.insert(TaintLabel{c, call_site});
    }
  }
  if (s.propagate) {
    out.ret_taint.join(incoming);
  }
  if (s.sink) {
    for (const auto& l : incoming) {
      bool wanted = s.sink_categories.empty() ||
                    std::find(s.sink_categories.begin(),
                              s.sink_categories.end(),
                              l.category) != s.sink_categories.end();
      if (wanted) {
        out.sink_hits.push_back(SinkHit{l, s.sink_kind});
      }
    }
  }
  return out;
}

} // namespace pdcfa::taint
