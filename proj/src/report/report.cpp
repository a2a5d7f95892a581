#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "pdcfa/report/report.h"

namespace pdcfa::report {

namespace {

Json method_json(const ir::Program& p, machine::MethodId m) {
  auto ref = p.ref(m);
  Json params = Json::array();
  for (const auto& t : ref.param_types) {
    params.push_back(ir::to_string(t));
  }
  return Json{{"class", ref.class_name},
              {"method", ref.method_name},
              {"params", params}};
}

Json site_json(const ReportContext& ctx, const machine::ControlState& s,
               int64_t line) {
  Json j = method_json(ctx.program, s.method);
  j["index"] = s.index;
  j["line"] = line;
  j["context"] = ctx.domain.describe_fp(s.fp);
  return j;
}

Json path_json(const ReportContext& ctx, const reach::AnalysisResult& r,
               const reach::Path& path) {
  Json out = Json::array();
  for (const auto& st : path) {
    const auto& s = r.states[st.state];
    auto ref = ctx.program.ref(s.method);
    out.push_back(Json{{"class", ref.class_name},
                       {"method", ref.method_name},
                       {"line", taint::line_of(ctx.program, s.point())},
                       {"index", s.index},
                       {"edge", reach::to_string(st.via)}});
  }
  return out;
}

bool balanced(const reach::AnalysisResult& r, const reach::Path& p) {
  return !p.empty() && !reach::check_balanced(r, p);
}

std::string where(const ReportContext& ctx, machine::ProgramPoint pt) {
  auto ref = ctx.program.ref(pt.method);
  return fmt::format("{}.{} line {}", ref.class_name, ref.method_name,
                     taint::line_of(ctx.program, pt));
}

Json trigger_json(const ReportContext& ctx, size_t unit, size_t entry) {
  const auto& u = ctx.units.at(unit);
  const auto& ep = u.entry_points.at(entry);
  Json e = method_json(ctx.program, ep.id);
  e["category"] = eps::to_string(ep.category);
  e["registration"] = eps::to_string(ep.registration);
  return Json{{"unit", u.name}, {"entryPoint", e}};
}

Json finding_json(const ReportContext& ctx, const taint::TaintFinding& f) {
  const auto& sink_run = ctx.trace.runs.at(f.sink_run).result;
  const auto& source_run = ctx.trace.runs.at(f.source_run).result;
  Json source = site_json(ctx, f.source.state, f.source.line);
  source["category"] = taint::to_string(f.category);
  Json sink = site_json(ctx, f.sink.state, f.sink.line);
  sink["kind"] = taint::to_string(f.sink_kind);
  Json source_trigger = trigger_json(ctx, ctx.trace.runs.at(f.source_run).unit,
                                     ctx.trace.runs.at(f.source_run).entry);
  return Json{
      {"category", taint::to_string(f.category)},
      {"trigger", trigger_json(ctx, f.unit, f.entry)},
      {"source", source},
      {"sink", sink},
      {"witness",
       Json{{"sourceTrigger", source_trigger},
            {"source", path_json(ctx, source_run, f.source_witness)},
            {"sink", path_json(ctx, sink_run, f.sink_witness)},
            {"balanced", balanced(source_run, f.source_witness) &&
                             balanced(sink_run, f.sink_witness)}}}};
}

Json header(const ReportContext& ctx) {
  return Json{{"toolVersion", kToolVersion},
              {"app", ctx.app_name},
              {"provenance", ctx.provenance},
              {"complete", !ctx.trace.incomplete}};
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
    }
    out += c;
  }
  return out;
}

std::string frame_label(const ReportContext& ctx, const machine::Frame& f) {
  if (f.is_fun()) {
    return fmt::format("ret {}", ctx.domain.describe_point(f.ret));
  }
  return fmt::format("handler {} -> {}#{}",
                     ctx.program.class_def(f.handler).name,
                     ir::to_string(ctx.program.ref(f.owner)), f.target);
}

const char* kind_suffix(machine::StateKind k) {
  switch (k) {
  case machine::StateKind::Normal:
    return "";
  case machine::StateKind::AfterCall:
    return " (after call)";
  case machine::StateKind::Unwinding:
    return " (unwinding)";
  }
  return "";
}

} // namespace

std::vector<std::string>
verdict_hints(const ReportContext& ctx,
              const std::vector<taint::TaintFinding>& findings,
              const permissions::PermissionReport& perms) {
  std::vector<std::string> out;
  for (const auto& f : findings) {
    const auto& ep = ctx.units.at(f.unit).entry_points.at(f.entry);
    out.push_back(fmt::format(
        "{} data read at {} reaches a sink of kind {} at {} (trigger: {} {})",
        taint::to_string(f.category), where(ctx, f.source_point),
        taint::to_string(f.sink_kind), where(ctx, f.sink_point),
        ctx.units.at(f.unit).name, ep.method.method_name));
  }
  for (const auto& p : perms.over_privileged) {
    out.push_back(
        fmt::format("permission {} is requested but no reachable call uses it", p));
  }
  for (const auto& p : perms.missing) {
    out.push_back(fmt::format(
        "permission {} is used at {} reachable site(s) but not requested", p,
        perms.evidence.at(p).size()));
  }
  if (ctx.trace.incomplete) {
    out.push_back(fmt::format(
        "analysis stopped early ({}); findings and permissions are a lower bound",
        ctx.trace.limit_reason));
  }
  return out;
}

Json emit_flow_report(const ReportContext& ctx,
                      const std::vector<taint::TaintFinding>& findings,
                      const Predicate* pred,
                      const std::vector<std::string>& hints) {
  Json j = header(ctx);
  j["predicate"] = pred ? Json(pred->text) : Json(nullptr);
  j["findingCount"] = findings.size();
  Json units = Json::array();
  for (size_t u = 0; u < ctx.units.size(); ++u) {
    Json fs = Json::array();
    for (const auto& f : findings) {
      if (f.unit == u) {
        fs.push_back(finding_json(ctx, f));
      }
    }
    units.push_back(Json{{"name", ctx.units[u].name},
                         {"kind", eps::to_string(ctx.units[u].kind)},
                         {"findings", fs}});
  }
  j["units"] = units;
  j["verdictHints"] = hints;
  return j;
}

Json emit_permissions_report(const ReportContext& ctx,
                             const permissions::PermissionReport& rep) {
  Json j = header(ctx);
  j["requested"] = rep.requested;
  j["reached"] = rep.reached;
  j["overPrivileged"] = rep.over_privileged;
  j["missing"] = rep.missing;
  Json ev = Json::object();
  for (const auto& [perm, sites] : rep.evidence) {
    Json arr = Json::array();
    for (const auto& e : sites) {
      arr.push_back(site_json(ctx, e.state, e.line));
    }
    ev[perm] = arr;
  }
  j["evidence"] = ev;
  j["lowerBound"] = rep.lower_bound;
  return j;
}

Json emit_heatmap(const ReportContext& ctx, size_t top_n) {
  struct Row {
    machine::ProgramPoint point;
    size_t visits;
  };
  std::vector<Row> stmts;
  std::map<machine::MethodId, size_t> per_method;
  for (const auto& [pt, n] : ctx.trace.visits) {
    stmts.push_back(Row{pt, n});
    per_method[pt.method] += n;
  }
  auto by_refs = [&](machine::MethodId a, machine::MethodId b) {
    return ctx.program.ref(a) < ctx.program.ref(b);
  };
  std::sort(stmts.begin(), stmts.end(), [&](const Row& a, const Row& b) {
    if (a.visits != b.visits) {
      return a.visits > b.visits;
    }
    if (a.point.method != b.point.method) {
      return by_refs(a.point.method, b.point.method);
    }
    return a.point.index < b.point.index;
  });
  std::vector<std::pair<machine::MethodId, size_t>> methods(per_method.begin(),
                                                            per_method.end());
  std::sort(methods.begin(), methods.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) {
      return a.second > b.second;
    }
    return by_refs(a.first, b.first);
  });

  Json j = header(ctx);
  j["topN"] = top_n;
  j["totalVisits"] = ctx.trace.steps;
  Json ms = Json::array();
  for (size_t i = 0; i < methods.size() && i < top_n; ++i) {
    Json m = method_json(ctx.program, methods[i].first);
    m["visits"] = methods[i].second;
    ms.push_back(m);
  }
  Json ss = Json::array();
  for (size_t i = 0; i < stmts.size() && i < top_n; ++i) {
    Json s = method_json(ctx.program, stmts[i].point.method);
    s["index"] = stmts[i].point.index;
    s["line"] = taint::line_of(ctx.program, stmts[i].point);
    s["visits"] = stmts[i].visits;
    ss.push_back(s);
  }
  j["methods"] = ms;
  j["statements"] = ss;
  return j;
}

std::string export_graph(const ReportContext& ctx,
                         const std::vector<taint::TaintFinding>& findings) {
  // Witness edges and endpoints per run.
  std::map<size_t, std::set<reach::Edge>> hot;
  std::map<size_t, std::set<reach::StateId>> sources;
  std::map<size_t, std::set<reach::StateId>> sinks;
  auto mark = [&](size_t run, const reach::Path& p) {
    for (size_t i = 1; i < p.size(); ++i) {
      const auto& st = p[i];
      hot[run].insert(reach::Edge{
          p[i - 1].state, st.state, st.via,
          st.via == reach::EdgeKind::NoOp ? machine::Frame{} : st.frame});
    }
  };
  for (const auto& f : findings) {
    mark(f.source_run, f.source_witness);
    mark(f.sink_run, f.sink_witness);
    if (!f.source_witness.empty()) {
      sources[f.source_run].insert(f.source_witness.back().state);
    }
    if (!f.sink_witness.empty()) {
      sinks[f.sink_run].insert(f.sink_witness.back().state);
    }
  }

  std::string out = "digraph dsg {\n  node [shape=box, fontname=\"monospace\"];\n";
  for (size_t run = 0; run < ctx.trace.runs.size(); ++run) {
    const auto& er = ctx.trace.runs[run];
    const auto& r = er.result;
    const auto& unit = ctx.units.at(er.unit);
    out += fmt::format("  subgraph cluster_{} {{\n    label=\"{}: {}\";\n", run,
                       escape(unit.name),
                       escape(ir::to_string(unit.entry_points.at(er.entry).method)));
    for (reach::StateId s = 0; s < r.states.size(); ++s) {
      const auto& st = r.states[s];
      auto ref = ctx.program.ref(st.method);
      std::string label = fmt::format(
          "{}.{}:{} #{}{}\\n{}", ref.class_name, ref.method_name,
          taint::line_of(ctx.program, st.point()), st.index, kind_suffix(st.kind),
          ctx.domain.describe_ctx(ctx.domain.fp_of(st.fp).ctx));
      std::string style;
      if (sinks[run].count(s)) {
        style = ", class=\"sink\", style=filled, fillcolor=\"#f4a6a6\"";
      } else if (sources[run].count(s)) {
        style = ", class=\"source\", style=filled, fillcolor=\"#a6c8f4\"";
      } else if (s == r.initial) {
        style = ", class=\"entry\", style=bold";
      }
      out += fmt::format("    r{}s{} [label=\"{}\"{}];\n", run, s, escape(label),
                         style);
    }
    for (const auto& e : r.edges) {
      std::string label = reach::to_string(e.kind);
      if (e.kind != reach::EdgeKind::NoOp) {
        label += " " + frame_label(ctx, e.frame);
      }
      std::string style;
      if (hot[run].count(e)) {
        style = ", class=\"witness\", color=\"red\", penwidth=2";
      }
      out += fmt::format("    r{}s{} -> r{}s{} [label=\"{}\"{}];\n", run, e.from,
                         run, e.to, escape(label), style);
    }
    out += "  }\n";
  }
  out += "}\n";
  return out;
}

std::string render_text(const Json& flow, const Json& perms) {
  std::string out = fmt::format("{} ({})\n", flow.value("app", ""),
                                flow.value("complete", false) ? "complete"
                                                              : "incomplete");
  out += fmt::format("findings: {}\n", flow.value("findingCount", 0));
  for (const auto& u : flow["units"]) {
    for (const auto& f : u["findings"]) {
      out += fmt::format("  [{}] {} {}.{}:{} -> {} {}.{}:{}\n",
                         u["name"].get<std::string>(),
                         f["category"].get<std::string>(),
                         f["source"]["class"].get<std::string>(),
                         f["source"]["method"].get<std::string>(),
                         f["source"]["line"].get<int64_t>(),
                         f["sink"]["kind"].get<std::string>(),
                         f["sink"]["class"].get<std::string>(),
                         f["sink"]["method"].get<std::string>(),
                         f["sink"]["line"].get<int64_t>());
    }
  }
  auto list = [](const Json& a) {
    std::vector<std::string> v = a.get<std::vector<std::string>>();
    return v.empty() ? std::string("-") : fmt::format("{}", fmt::join(v, ", "));
  };
  out += fmt::format("permissions requested: {}\n", list(perms["requested"]));
  out += fmt::format("permissions reached:   {}\n", list(perms["reached"]));
  out += fmt::format("over-privileged:       {}\n", list(perms["overPrivileged"]));
  out += fmt::format("missing:               {}\n", list(perms["missing"]));
  for (const auto& h : flow["verdictHints"]) {
    out += fmt::format("note: {}\n", h.get<std::string>());
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += fmt::format("{:02x}", md[i]);
  }
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

} // namespace pdcfa::report
