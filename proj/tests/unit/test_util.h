#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pdcfa/concrete/interpreter.h"
#include "pdcfa/ir/parser.h"
#include "pdcfa/reach/reach.h"

namespace pdcfa::test {

std::string read_file(const std::string& path);
std::string test_data(const std::string& rel);

// Wraps statements into `(class Main extends java/lang/Object () ((method
// main () void (throws) (limit 8) ...)))`.
std::shared_ptr<const ir::Program> single_method(const std::string& body);

// One program of tests/corpus with the arguments of its concrete run.
struct CorpusProgram {
  std::string file;
  std::shared_ptr<const ir::Program> program;
  ir::MethodRef entry;
  std::vector<concrete::Value> args;
  bool return_flow = false;
};

std::vector<CorpusProgram> load_corpus();

// A single abstract run of the corpus entry point.
struct CorpusRun {
  std::unique_ptr<machine::Domain> domain;
  reach::AnalysisResult result;
};

CorpusRun analyze_corpus(const CorpusProgram& c,
                         const taint::SummaryTable& summaries,
                         reach::Mode mode, size_t k);

struct OracleReport {
  size_t states = 0;
  size_t writes = 0;
  std::vector<std::string> failures;
};

// Runs the concrete interpreter and checks every visited state and every
// store write against the pushdown result.
OracleReport check_oracle(const CorpusProgram& c,
                          const taint::SummaryTable& summaries, size_t k);

} // namespace pdcfa::test
