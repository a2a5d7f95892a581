#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pdcfa::ir {

struct SourcePos {
  uint32_t line = 0;
  uint32_t col = 0;

  bool operator==(const SourcePos&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(SourcePos pos, const std::string& what);

  SourcePos pos() const { return m_pos; }

 private:
  SourcePos m_pos;
};

/*
 * A parsed S-expression. Atoms keep their raw spelling; string literals are
 * unescaped. Comments run from ';' to end of line.
 */
struct SExpr {
  enum class Kind : uint8_t { Atom, String, List };

  Kind kind = Kind::List;
  std::string text;
  std::vector<SExpr> items;
  SourcePos pos;

  bool is_atom() const { return kind == Kind::Atom; }
  bool is_list() const { return kind == Kind::List; }
  bool is_atom(std::string_view s) const { return is_atom() && text == s; }
  // Head atom of a list, or "" when the list is empty or headed by a non-atom.
  std::string_view head() const;
};

std::vector<SExpr> read_sexprs(std::string_view text);

// Quotes a string for output, escaping '"', '\\' and newlines.
std::string quote_string(std::string_view s);

} // namespace pdcfa::ir
