#include <algorithm>
#include <deque>

#include <fmt/format.h>

#include "pdcfa/reach/reach.h"

namespace pdcfa::reach {

const char* to_string(Mode m) {
  return m == Mode::Pushdown ? "pushdown" : "finite";
}

const char* to_string(EdgeKind k) {
  switch (k) {
  case EdgeKind::NoOp:
    return "eps";
  case EdgeKind::Push:
    return "push";
  case EdgeKind::Pop:
    return "pop";
  }
  return "?";
}

const std::vector<KontEntry>& KontStore::get(KAddr a) const {
  static const std::vector<KontEntry> empty;
  auto it = m_map.find(a);
  return it == m_map.end() ? empty : it->second;
}

bool KontStore::join(KAddr a, const KontEntry& e) {
  auto& v = m_map[a];
  auto it = std::lower_bound(v.begin(), v.end(), e);
  if (it != v.end() && *it == e) {
    return false;
  }
  v.insert(it, e);
  return true;
}

bool KontStore::join(const KontStore& o) {
  bool grew = false;
  for (const auto& [a, es] : o.m_map) {
    for (const auto& e : es) {
      grew |= join(a, e);
    }
  }
  return grew;
}

bool Heap::join(const Heap& o) {
  bool grew = store.join(o.store);
  grew |= taint.join(o.taint);
  grew |= kont.join(o.kont);
  return grew;
}

std::optional<StateId> AnalysisResult::find(const ControlState& s) const {
  auto it = index.find(s);
  if (it == index.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::set<ControlState> AnalysisResult::state_set() const {
  return std::set<ControlState>(states.begin(), states.end());
}

bool AnalysisResult::has_edge(StateId from, StateId to, EdgeKind kind,
                              const Frame& frame) const {
  Edge e{from, to, kind, kind == EdgeKind::NoOp ? Frame{} : frame};
  return std::find(edges.begin(), edges.end(), e) != edges.end();
}

namespace {

struct Hop {
  StateId to;
  EdgeKind kind;
  Frame frame;
  int summary = -1; // index into summaries when this hop is a summary
};

class PathBuilder {
 public:
  explicit PathBuilder(const AnalysisResult& r) : m_r(r) {
    m_out.resize(r.states.size());
    for (const auto& e : r.edges) {
      if (r.mode == Mode::Finite || e.kind != EdgeKind::Pop) {
        m_out[e.from].push_back(Hop{e.to, e.kind, e.frame});
      }
    }
    if (r.mode == Mode::Pushdown) {
      for (size_t i = 0; i < r.summaries.size(); ++i) {
        const auto& s = r.summaries[i];
        m_out[s.call].push_back(
            Hop{s.target, EdgeKind::NoOp, Frame{}, static_cast<int>(i)});
      }
    }
  }

  // `limit`: only summaries discovered before it are usable; pushes are
  // allowed only at the top level.
  std::optional<std::vector<Hop>> bfs(StateId from, StateId to, size_t limit,
                                      bool allow_push) const {
    if (from == to) {
      return std::vector<Hop>{};
    }
    std::vector<StateId> prev_state(m_r.states.size(), 0);
    std::vector<const Hop*> via(m_r.states.size(), nullptr);
    std::vector<char> seen(m_r.states.size(), 0);
    std::deque<StateId> q{from};
    seen[from] = 1;
    while (!q.empty()) {
      StateId cur = q.front();
      q.pop_front();
      for (const auto& h : m_out[cur]) {
        if (h.summary >= 0 &&
            m_r.summaries[static_cast<size_t>(h.summary)].order >= limit) {
          continue;
        }
        if (h.kind == EdgeKind::Push && !allow_push) {
          continue;
        }
        if (seen[h.to]) {
          continue;
        }
        seen[h.to] = 1;
        prev_state[h.to] = cur;
        via[h.to] = &h;
        if (h.to == to) {
          std::vector<Hop> hops;
          for (StateId s = to; s != from; s = prev_state[s]) {
            hops.push_back(*via[s]);
          }
          std::reverse(hops.begin(), hops.end());
          return hops;
        }
        q.push_back(h.to);
      }
    }
    return std::nullopt;
  }

  bool expand(const std::vector<Hop>& hops, Path& out, int depth) {
    if (depth > 10000) {
      return false;
    }
    for (const auto& h : hops) {
      if (h.summary < 0) {
        out.push_back(PathStep{h.to, h.kind, h.frame});
        continue;
      }
      const auto& s = m_r.summaries[static_cast<size_t>(h.summary)];
      out.push_back(PathStep{s.entry, EdgeKind::Push, s.frame});
      auto inner = bfs(s.entry, s.exit, s.order, false);
      if (!inner || !expand(*inner, out, depth + 1)) {
        return false;
      }
      out.push_back(PathStep{s.target, EdgeKind::Pop, s.frame});
    }
    return true;
  }

 private:
  const AnalysisResult& m_r;
  std::vector<std::vector<Hop>> m_out;
};

} // namespace

std::optional<Path> reconstruct_path(const AnalysisResult& r, StateId from,
                                     StateId to) {
  PathBuilder b(r);
  auto hops = b.bfs(from, to, static_cast<size_t>(-1), true);
  if (!hops) {
    return std::nullopt;
  }
  Path out{PathStep{from, EdgeKind::NoOp, Frame{}}};
  if (!b.expand(*hops, out, 0)) {
    return std::nullopt;
  }
  return out;
}

std::optional<std::string> check_balanced(const AnalysisResult& r,
                                          const Path& p) {
  std::set<Edge> edges(r.edges.begin(), r.edges.end());
  std::vector<Frame> stack;
  for (size_t i = 1; i < p.size(); ++i) {
    const auto& st = p[i];
    Frame f = st.via == EdgeKind::NoOp ? Frame{} : st.frame;
    if (!edges.count(Edge{p[i - 1].state, st.state, st.via, f})) {
      return fmt::format("step {} is not a graph edge", i);
    }
    if (st.via == EdgeKind::Push) {
      stack.push_back(st.frame);
    } else if (st.via == EdgeKind::Pop) {
      if (stack.empty()) {
        return fmt::format("step {} pops an empty stack", i);
      }
      if (!(stack.back() == st.frame)) {
        return fmt::format("step {} pops a frame that was not pushed", i);
      }
      stack.pop_back();
    }
  }
  return std::nullopt;
}

AnalysisResult analyze(const machine::MachineContext& ctx,
                       machine::MethodId entry, const Heap& init,
                       const AnalysisConfig& cfg) {
  if (cfg.mode == Mode::Finite) {
    return analyze_finite(ctx, entry, init, cfg);
  }
  return analyze_pushdown(ctx, entry, init, cfg);
}

} // namespace pdcfa::reach
