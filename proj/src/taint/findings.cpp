#include "pdcfa/taint/findings.h"

#include <algorithm>
#include <map>
#include <tuple>

#include <spdlog/spdlog.h>

namespace pdcfa::taint {

int64_t line_of(const ir::Program& p, machine::ProgramPoint pt) {
  const auto& lines = p.method(pt.method).line_of;
  return pt.index < lines.size() ? lines[pt.index] : 0;
}

namespace {

using Key = std::tuple<Category, machine::ProgramPoint, machine::ProgramPoint>;

struct SourceSite {
  size_t run;
  reach::StateId state;
};

// First state, in run order then state order, that applied the source.
std::optional<SourceSite> find_source(const eps::SaturationTrace& t,
                                      size_t prefer,
                                      const machine::TaintLabel& label) {
  auto scan = [&](size_t run) -> std::optional<SourceSite> {
    const auto& r = t.runs[run].result;
    for (reach::StateId s = 0; s < r.events.size(); ++s) {
      for (const auto& e : r.events[s]) {
        if (e.kind == machine::EventKind::SourceApplied && e.label == label) {
          return SourceSite{run, s};
        }
      }
    }
    return std::nullopt;
  };
  if (auto s = scan(prefer)) {
    return s;
  }
  for (size_t i = 0; i < t.runs.size(); ++i) {
    if (i != prefer) {
      if (auto s = scan(i)) {
        return s;
      }
    }
  }
  return std::nullopt;
}

} // namespace

std::vector<TaintFinding> extract_findings(const ir::Program& p,
                                           const eps::SaturationTrace& t) {
  std::map<Key, TaintFinding> found;
  for (size_t run = 0; run < t.runs.size(); ++run) {
    const auto& er = t.runs[run];
    const auto& r = er.result;
    for (reach::StateId s = 0; s < r.events.size(); ++s) {
      for (const auto& e : r.events[s]) {
        if (e.kind != machine::EventKind::SinkHit) {
          continue;
        }
        Key key{e.label.category, e.label.source, e.point};
        if (found.count(key)) {
          continue;
        }
        TaintFinding f;
        f.category = e.label.category;
        f.source_point = e.label.source;
        f.sink_point = e.point;
        f.sink_kind = e.sink_kind;
        f.sink = Site{r.states[s], line_of(p, e.point)};
        f.sink_run = run;
        f.unit = er.unit;
        f.entry = er.entry;
        if (auto w = reach::reconstruct_path(r, r.initial, s)) {
          f.sink_witness = std::move(*w);
        }
        if (auto src = find_source(t, run, e.label)) {
          const auto& sr = t.runs[src->run].result;
          f.source_run = src->run;
          f.source = Site{sr.states[src->state], line_of(p, e.label.source)};
          if (auto w = reach::reconstruct_path(sr, sr.initial, src->state)) {
            f.source_witness = std::move(*w);
          }
        } else {
          spdlog::warn("no state applies the source of a {} flow",
                       to_string(f.category));
          f.source_run = run;
          f.source.line = line_of(p, e.label.source);
        }
        found.emplace(key, std::move(f));
      }
    }
  }
  std::vector<TaintFinding> out;
  out.reserve(found.size());
  for (auto& [k, f] : found) {
    out.push_back(std::move(f));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.unit, a.source.line, a.sink.line) <
           std::tie(b.unit, b.source.line, b.sink.line);
  });
  return out;
}

} // namespace pdcfa::taint
