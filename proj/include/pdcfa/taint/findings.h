#pragma once

#include <optional>
#include <vector>

#include "pdcfa/eps/eps.h"

namespace pdcfa::taint {

struct Site {
  machine::ControlState state;
  int64_t line = 0;
};

/*
 * One source-to-sink flow. The witness has two segments because the source
 * and the sink may be reached from different entry points: each segment runs
 * from its entry point's initial state and replays as a balanced path.
 */
struct TaintFinding {
  Category category = Category::Location;
  machine::ProgramPoint source_point;
  machine::ProgramPoint sink_point;
  SinkKind sink_kind = SinkKind::Network;
  Site source;
  Site sink;

  size_t source_run = 0; // index into SaturationTrace::runs
  size_t sink_run = 0;
  reach::Path source_witness;
  reach::Path sink_witness;

  // Entry point whose run reaches the sink.
  size_t unit = 0;
  size_t entry = 0;
};

int64_t line_of(const ir::Program& p, machine::ProgramPoint pt);

// Deduplicated by (category, source point, sink point), sorted by unit,
// source line, sink line.
std::vector<TaintFinding> extract_findings(const ir::Program& p,
                                           const eps::SaturationTrace& t);

} // namespace pdcfa::taint
