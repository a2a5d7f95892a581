#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "pdcfa/report/report.h"

namespace pdcfa::report {

namespace {

class Lexer {
 public:
  explicit Lexer(std::string_view s) : m_s(s) {}

  void skip_ws() {
    while (m_pos < m_s.size() && std::isspace(static_cast<unsigned char>(m_s[m_pos]))) {
      ++m_pos;
    }
  }
  bool done() {
    skip_ws();
    return m_pos >= m_s.size();
  }
  bool eat(std::string_view tok) {
    skip_ws();
    if (m_s.substr(m_pos, tok.size()) == tok) {
      m_pos += tok.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view tok) {
    if (!eat(tok)) {
      fail(fmt::format("expected '{}'", tok));
    }
  }
  std::string ident() {
    skip_ws();
    size_t start = m_pos;
    while (m_pos < m_s.size() &&
           (std::isalnum(static_cast<unsigned char>(m_s[m_pos])) || m_s[m_pos] == '_')) {
      ++m_pos;
    }
    if (start == m_pos) {
      fail("expected a predicate name");
    }
    return std::string(m_s.substr(start, m_pos - start));
  }
  // Bare or double-quoted argument, up to ',' or ')'.
  std::string arg() {
    skip_ws();
    if (m_pos < m_s.size() && m_s[m_pos] == '"') {
      size_t end = m_s.find('"', m_pos + 1);
      if (end == std::string_view::npos) {
        fail("unterminated string");
      }
      std::string out(m_s.substr(m_pos + 1, end - m_pos - 1));
      m_pos = end + 1;
      return out;
    }
    size_t start = m_pos;
    while (m_pos < m_s.size() && m_s[m_pos] != ',' && m_s[m_pos] != ')') {
      ++m_pos;
    }
    std::string out(m_s.substr(start, m_pos - start));
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) {
      out.pop_back();
    }
    if (out.empty()) {
      fail("empty argument");
    }
    return out;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw PredicateError(fmt::format("predicate column {}: {}", m_pos + 1, msg));
  }

 private:
  std::string_view m_s;
  size_t m_pos = 0;
};

int64_t to_int(const Lexer& lx, const std::string& s) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    lx.fail(fmt::format("'{}' is not an integer", s));
  }
  return v;
}

Atom parse_atom(Lexer& lx) {
  std::string name = lx.ident();
  lx.expect("(");
  Atom a;
  if (name == "lineIn") {
    a.kind = Atom::Kind::LineIn;
    a.lo = to_int(lx, lx.arg());
    lx.expect(",");
    a.hi = to_int(lx, lx.arg());
    if (a.lo > a.hi) {
      lx.fail("lineIn requires lo <= hi");
    }
  } else {
    a.text = lx.arg();
    if (name == "classIs") {
      a.kind = Atom::Kind::ClassIs;
    } else if (name == "methodIs") {
      a.kind = Atom::Kind::MethodIs;
    } else if (name == "taintHas") {
      a.kind = Atom::Kind::TaintHas;
      auto c = taint::category_from_string(a.text);
      if (!c) {
        lx.fail(fmt::format("unknown taint category {}", a.text));
      }
      a.category = *c;
    } else if (name == "sinkKindIs") {
      a.kind = Atom::Kind::SinkKindIs;
      auto k = taint::sink_kind_from_string(a.text);
      if (!k) {
        lx.fail(fmt::format("unknown sink kind {}", a.text));
      }
      a.sink_kind = *k;
    } else if (name == "permissionIs") {
      a.kind = Atom::Kind::PermissionIs;
    } else if (name == "unitIs") {
      a.kind = Atom::Kind::UnitIs;
    } else {
      lx.fail(fmt::format("unknown predicate {}", name));
    }
  }
  lx.expect(")");
  return a;
}

} // namespace

Predicate Predicate::parse(std::string_view s) {
  Predicate p;
  p.text = std::string(s);
  Lexer lx(s);
  if (lx.done()) {
    throw PredicateError("empty predicate");
  }
  p.atoms.push_back(parse_atom(lx));
  while (!lx.done()) {
    if (!lx.eat("&&") && !lx.eat(",") && !lx.eat("and")) {
      lx.fail("expected '&&'");
    }
    p.atoms.push_back(parse_atom(lx));
  }
  return p;
}

namespace {

bool atom_holds(const ReportContext& ctx, const Atom& a,
                const taint::TaintFinding& f) {
  const auto& p = ctx.program;
  auto class_of = [&](machine::ProgramPoint pt) -> const std::string& {
    return p.class_def(p.method(pt.method).owner).name;
  };
  auto method_of = [&](machine::ProgramPoint pt) -> const std::string& {
    return p.name(p.method(pt.method).name);
  };
  switch (a.kind) {
  case Atom::Kind::ClassIs:
    return taint::glob_match(a.text, class_of(f.source_point)) ||
           taint::glob_match(a.text, class_of(f.sink_point));
  case Atom::Kind::MethodIs:
    return taint::glob_match(a.text, method_of(f.source_point)) ||
           taint::glob_match(a.text, method_of(f.sink_point));
  case Atom::Kind::LineIn:
    return (a.lo <= f.source.line && f.source.line <= a.hi) ||
           (a.lo <= f.sink.line && f.sink.line <= a.hi);
  case Atom::Kind::TaintHas:
    return f.category == a.category;
  case Atom::Kind::SinkKindIs:
    return f.sink_kind == a.sink_kind;
  case Atom::Kind::PermissionIs: {
    const auto& r = ctx.trace.runs.at(f.sink_run).result;
    auto id = r.find(f.sink.state);
    if (!id) {
      return false;
    }
    for (const auto& e : r.events[*id]) {
      if (e.kind == machine::EventKind::PermissionUse &&
          e.point == f.sink_point && taint::glob_match(a.text, e.permission)) {
        return true;
      }
    }
    return false;
  }
  case Atom::Kind::UnitIs:
    return taint::glob_match(a.text, ctx.units.at(f.unit).name);
  }
  return false;
}

} // namespace

bool matches(const ReportContext& ctx, const Predicate& pred,
             const taint::TaintFinding& f) {
  for (const auto& a : pred.atoms) {
    if (!atom_holds(ctx, a, f)) {
      return false;
    }
  }
  return true;
}

std::vector<taint::TaintFinding> filter(const ReportContext& ctx,
                                        const Predicate* pred,
                                        std::vector<taint::TaintFinding> fs) {
  if (!pred) {
    return fs;
  }
  std::vector<taint::TaintFinding> out;
  for (auto& f : fs) {
    if (matches(ctx, *pred, f)) {
      out.push_back(std::move(f));
    }
  }
  return out;
}

} // namespace pdcfa::report
