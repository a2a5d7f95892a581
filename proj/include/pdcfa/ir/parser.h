#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "pdcfa/ir/program.h"

namespace pdcfa::ir {

// Parses and validates a whole program. Throws ParseError with the location
// of the offending form.
std::shared_ptr<const Program> parse_program(std::string_view text);

std::shared_ptr<const Program> parse_program_file(const std::string& path);

// Canonical S-expression text for a program; parse_program(print_program(p))
// is structurally equal to p.
std::string print_program(const Program& p);
std::string print_aexp(const Program& p, const AExp& e);
std::string print_stmt(const Program& p, const Stmt& s);

} // namespace pdcfa::ir
