#include "pdcfa/ir/sexpr.h"

#include <fmt/format.h>

namespace pdcfa::ir {

ParseError::ParseError(SourcePos pos, const std::string& what)
    : std::runtime_error(fmt::format("{}:{}: {}", pos.line, pos.col, what)),
      m_pos(pos) {}

std::string_view SExpr::head() const {
  if (!is_list() || items.empty() || !items.front().is_atom()) {
    return {};
  }
  return items.front().text;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : m_text(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip_space();
    while (!at_end()) {
      if (peek() == ')') {
        throw ParseError(here(), "unbalanced ')'");
      }
      out.push_back(read());
      skip_space();
    }
    return out;
  }

 private:
  bool at_end() const { return m_offset >= m_text.size(); }
  char peek() const { return m_text[m_offset]; }
  SourcePos here() const { return {m_line, m_col}; }

  void advance() {
    if (m_text[m_offset] == '\n') {
      ++m_line;
      m_col = 1;
    } else {
      ++m_col;
    }
    ++m_offset;
  }

  void skip_space() {
    while (!at_end()) {
      char c = peek();
      if (c == ';') {
        while (!at_end() && peek() != '\n') {
          advance();
        }
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else {
        return;
      }
    }
  }

  SExpr read() {
    SExpr node;
    node.pos = here();
    char c = peek();
    if (c == '(') {
      advance();
      node.kind = SExpr::Kind::List;
      skip_space();
      while (true) {
        if (at_end()) {
          throw ParseError(node.pos, "unterminated list");
        }
        if (peek() == ')') {
          advance();
          break;
        }
        node.items.push_back(read());
        skip_space();
      }
      return node;
    }
    if (c == '"') {
      advance();
      node.kind = SExpr::Kind::String;
      while (true) {
        if (at_end()) {
          throw ParseError(node.pos, "unterminated string literal");
        }
        char d = peek();
        advance();
        if (d == '"') {
          break;
        }
        if (d == '\\') {
          if (at_end()) {
            throw ParseError(node.pos, "unterminated string literal");
          }
          char e = peek();
          advance();
          switch (e) {
          case 'n':
            node.text.push_back('\n');
            break;
          case 't':
            node.text.push_back('\t');
            break;
          case '"':
          case '\\':
            node.text.push_back(e);
            break;
          default:
            throw ParseError(here(), fmt::format("bad escape '\\{}'", e));
          }
          continue;
        }
        node.text.push_back(d);
      }
      return node;
    }
    node.kind = SExpr::Kind::Atom;
    while (!at_end()) {
      char d = peek();
      if (d == '(' || d == ')' || d == '"' || d == ';' || d == ' ' ||
          d == '\t' || d == '\n' || d == '\r') {
        break;
      }
      node.text.push_back(d);
      advance();
    }
    return node;
  }

  std::string_view m_text;
  size_t m_offset = 0;
  uint32_t m_line = 1;
  uint32_t m_col = 1;
};

} // namespace

std::vector<SExpr> read_sexprs(std::string_view text) {
  return Reader(text).read_all();
}

std::string quote_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
    case '"':
      out += "\\\"";
      break;
    case '\\':
      out += "\\\\";
      break;
    case '\n':
      out += "\\n";
      break;
    case '\t':
      out += "\\t";
      break;
    default:
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

} // namespace pdcfa::ir
