#include "test_util.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace pdcfa::test {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string test_data(const std::string& rel) {
  return std::string(PDCFA_TEST_DATA) + "/" + rel;
}

std::shared_ptr<const ir::Program> single_method(const std::string& body) {
  return ir::parse_program(
      "(public class Main extends java/lang/Object ()\n"
      "  ((method public main () void (throws) (limit 8)\n" +
      body + ")))\n");
}

std::vector<CorpusProgram> load_corpus() {
  auto index = nlohmann::json::parse(read_file(test_data("corpus/index.json")));
  std::vector<CorpusProgram> out;
  for (const auto& j : index.at("programs")) {
    CorpusProgram c;
    c.file = j.at("file").get<std::string>();
    c.program = ir::parse_program(read_file(test_data("corpus/" + c.file)));
    c.entry.class_name = j.value("class", std::string("Main"));
    c.entry.method_name = j.value("method", std::string("main"));
    for (const auto& t : j.value("params", std::vector<std::string>{})) {
      c.entry.param_types.push_back(ir::parse_type(t));
    }
    for (const auto& a : j.value("args", nlohmann::json::array())) {
      c.args.push_back(a.is_string() ? concrete::Value::str(a.get<std::string>())
                                     : concrete::Value::integer(a.get<int64_t>()));
    }
    c.return_flow = j.value("returnFlow", false);
    out.push_back(std::move(c));
  }
  return out;
}

CorpusRun analyze_corpus(const CorpusProgram& c,
                         const taint::SummaryTable& summaries,
                         reach::Mode mode, size_t k) {
  CorpusRun run;
  run.domain = std::make_unique<machine::Domain>(*c.program);
  reach::AnalysisConfig cfg;
  cfg.mode = mode;
  cfg.policy.k = k;
  cfg.max_seconds = 30;
  machine::MachineContext ctx{*c.program, summaries, *run.domain, cfg.policy};
  auto entry = c.program->find_method(c.entry);
  if (!entry) {
    throw std::runtime_error("no entry in " + c.file);
  }
  run.result = reach::analyze(ctx, *entry, reach::Heap(), cfg);
  return run;
}

OracleReport check_oracle(const CorpusProgram& c,
                          const taint::SummaryTable& summaries, size_t k) {
  OracleReport rep;
  auto trace = concrete::run_concrete(*c.program, c.entry, c.args, summaries,
                                      concrete::RunOptions{20000});
  auto run = analyze_corpus(c, summaries, reach::Mode::Pushdown, k);
  auto& d = *run.domain;
  const auto& r = run.result;
  if (r.incomplete) {
    rep.failures.push_back("abstract run incomplete: " + r.limit_reason);
  }
  for (const auto& s : trace.states) {
    ++rep.states;
    machine::ControlState cs;
    cs.kind = s.kind == concrete::State::Kind::Normal ? machine::StateKind::Normal
                                                      : machine::StateKind::AfterCall;
    cs.method = s.method;
    cs.index = s.index;
    cs.fp = concrete::abstract_frame(d, trace, s.frame, k);
    if (!r.find(cs)) {
      rep.failures.push_back(fmt::format("{}: no abstract state for {}", c.file,
                                         machine::describe(d, cs)));
    }
  }
  for (const auto& w : trace.writes) {
    ++rep.writes;
    auto a = concrete::abstract_addr(d, trace, w.addr, k, false);
    if (!concrete::covers(d, trace, r.heap.store.get(a), w.value, k, false)) {
      rep.failures.push_back(fmt::format("{}: store misses {} at {}", c.file,
                                         concrete::to_string(w.value),
                                         machine::describe(d, a)));
    }
    for (const auto& l : w.taint) {
      if (!r.heap.taint.get(a).contains(l)) {
        rep.failures.push_back(fmt::format("{}: taint store misses {}", c.file,
                                           machine::describe(d, l)));
      }
    }
  }
  return rep;
}

} // namespace pdcfa::test
