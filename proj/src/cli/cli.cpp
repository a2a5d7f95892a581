#include "pdcfa/cli/cli.h"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "pdcfa/ir/parser.h"

namespace pdcfa::cli {

namespace fs = std::filesystem;
using report::Json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    throw BundleError(fmt::format("cannot read {}", p.string()));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
T field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) {
    throw BundleError(fmt::format("{}: missing \"{}\"", where, key));
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw BundleError(fmt::format("{}: \"{}\" has the wrong type", where, key));
  }
}

eps::EntryPoint parse_entry(const nlohmann::json& j, const std::string& where) {
  eps::EntryPoint e;
  e.method.class_name = field<std::string>(j, "class", where);
  e.method.method_name = field<std::string>(j, "method", where);
  for (const auto& t : j.value("paramTypes", std::vector<std::string>{})) {
    try {
      e.method.param_types.push_back(ir::parse_type(t));
    } catch (const std::exception& ex) {
      throw BundleError(fmt::format("{}: {}", where, ex.what()));
    }
  }
  auto cat = j.value("category", std::string("lifecycle-callback"));
  auto c = eps::entry_category_from_string(cat);
  if (!c) {
    throw BundleError(fmt::format("{}: unknown category {}", where, cat));
  }
  e.category = *c;
  auto reg = j.value("registrationSource", std::string("manifest"));
  auto r = eps::registration_from_string(reg);
  if (!r) {
    throw BundleError(fmt::format("{}: unknown registration source {}", where, reg));
  }
  e.registration = *r;
  return e;
}

void check_config(const reach::AnalysisConfig& c) {
  if (c.policy.k > machine::kMaxK) {
    throw CLI::ValidationError("--k", fmt::format("must be at most {}", machine::kMaxK));
  }
  if (c.max_states == 0 || c.max_seconds <= 0 || c.jobs == 0 ||
      c.policy.constant_budget == 0) {
    throw CLI::ValidationError("budgets", "must be positive");
  }
}

Json config_json(const reach::AnalysisConfig& c) {
  return Json{{"mode", reach::to_string(c.mode)},
              {"k", c.policy.k},
              {"heapContext", c.policy.heap_context},
              {"intConstantBudget", c.policy.constant_budget},
              {"maxStates", c.max_states},
              {"maxSeconds", c.max_seconds}};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) {
    throw BundleError(fmt::format("cannot write {}", p.string()));
  }
}

void setup_logging() {
  auto logger = spdlog::get("pdcfa");
  if (!logger) {
    logger = spdlog::stderr_color_mt("pdcfa");
  }
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("PDCFA_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

} // namespace

eps::Manifest parse_manifest(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw BundleError(fmt::format("manifest.json: {}", e.what()));
  }
  eps::Manifest m;
  m.app_name = field<std::string>(j, "appName", "manifest");
  for (const auto& p :
       j.value("requestedPermissions", std::vector<std::string>{})) {
    m.requested_permissions.insert(p);
  }
  for (const auto& ju : field<nlohmann::json>(j, "units", "manifest")) {
    eps::Unit u;
    u.name = field<std::string>(ju, "name", "unit");
    auto kind = ju.value("kind", std::string("other"));
    auto k = eps::unit_kind_from_string(kind);
    if (!k) {
      throw BundleError(fmt::format("unit {}: unknown kind {}", u.name, kind));
    }
    u.kind = *k;
    for (const auto& je : ju.value("entryPoints", nlohmann::json::array())) {
      u.entry_points.push_back(parse_entry(je, "unit " + u.name));
    }
    m.units.push_back(std::move(u));
  }
  if (m.units.empty()) {
    throw BundleError("manifest declares no units");
  }
  return m;
}

AppBundle load_bundle(const fs::path& dir) {
  AppBundle b;
  b.dir = dir;
  b.manifest_text = slurp(dir / "manifest.json");
  b.manifest = parse_manifest(b.manifest_text);
  auto j = nlohmann::json::parse(b.manifest_text);
  b.program_file = j.value("program", std::string("app.sdex"));
  b.program_text = slurp(dir / b.program_file);
  b.summaries_file = j.value("summaries", std::string());
  b.summaries_text = b.summaries_file.empty()
                         ? std::string(taint::default_summary_text())
                         : slurp(dir / b.summaries_file);
  b.predicates = j.value("predicates", std::vector<std::string>{});
  return b;
}

report::ReportContext Analysis::context() const {
  return report::ReportContext{*program, *domain, units, trace, app_name,
                               provenance};
}

std::unique_ptr<Analysis> analyze_bundle(const AppBundle& b, const Options& o) {
  auto start = std::chrono::steady_clock::now();
  auto a = std::make_unique<Analysis>();
  a->program = ir::parse_program(b.program_text);
  a->summaries = std::make_unique<taint::SummaryTable>(
      taint::SummaryTable::parse(b.summaries_text));
  a->domain = std::make_unique<machine::Domain>(*a->program);
  a->units = eps::discover_entry_points(*a->program, b.manifest);
  a->app_name = b.manifest.app_name;

  std::vector<std::string> preds = b.predicates;
  if (o.where) {
    preds.push_back(*o.where);
  }
  if (!preds.empty()) {
    a->predicate = report::Predicate::parse(fmt::format("{}", fmt::join(preds, " && ")));
  }

  machine::MachineContext mctx{*a->program, *a->summaries, *a->domain,
                               o.config.policy};
  a->trace = eps::saturate_app(mctx, a->units, o.config);
  a->all_findings = taint::extract_findings(*a->program, a->trace);

  a->provenance = Json{
      {"config", config_json(o.config)},
      {"inputs",
       Json{{"program", Json{{"file", b.program_file},
                             {"sha256", report::sha256_hex(b.program_text)}}},
            {"manifest", Json{{"file", "manifest.json"},
                              {"sha256", report::sha256_hex(b.manifest_text)}}},
            {"summaries",
             Json{{"file", b.summaries_file.empty() ? "<builtin>" : b.summaries_file},
                  {"sha256", report::sha256_hex(b.summaries_text)}}}}}};

  auto ctx = a->context();
  a->findings = report::filter(ctx, a->predicate ? &*a->predicate : nullptr,
                               a->all_findings);
  a->permissions = permissions::build_permission_report(
      b.manifest.requested_permissions,
      permissions::collect_permissions(*a->program, a->trace));
  a->permissions.lower_bound = a->trace.incomplete;

  auto hints = report::verdict_hints(ctx, a->findings, a->permissions);
  a->flow_report = report::emit_flow_report(
      ctx, a->findings, a->predicate ? &*a->predicate : nullptr, hints);
  a->permissions_report = report::emit_permissions_report(ctx, a->permissions);
  a->heatmap = report::emit_heatmap(ctx);
  a->graph = report::export_graph(ctx, a->findings);

  a->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                   .count();
  Json runs = Json::array();
  for (const auto& r : a->trace.runs) {
    runs.push_back(Json{{"unit", a->units[r.unit].name},
                        {"entryPoint", ir::to_string(
                                           a->units[r.unit].entry_points[r.entry].method)},
                        {"states", r.result.states.size()},
                        {"edges", r.result.edges.size()},
                        {"summaries", r.result.summaries.size()},
                        {"steps", r.result.steps}});
  }
  Json passes = Json::object();
  for (size_t u = 0; u < a->units.size(); ++u) {
    passes[a->units[u].name] = a->trace.unit_passes[u];
  }
  a->run_meta = Json{{"toolVersion", report::kToolVersion},
                     {"app", a->app_name},
                     {"provenance", a->provenance},
                     {"jobs", o.config.jobs},
                     {"complete", !a->trace.incomplete},
                     {"limitReason", a->trace.limit_reason},
                     {"rounds", a->trace.rounds},
                     {"unitPasses", passes},
                     {"finalRound", runs},
                     {"findings", a->findings.size()},
                     {"findingsBeforeFilter", a->all_findings.size()},
                     {"seconds", a->seconds}};
  return a;
}

void write_reports(const Analysis& a, const fs::path& out) {
  fs::create_directories(out);
  write_file(out / "flow_report.json", report::dump(a.flow_report));
  write_file(out / "permissions_report.json", report::dump(a.permissions_report));
  write_file(out / "heatmap.json", report::dump(a.heatmap));
  write_file(out / "state_graph.dot", a.graph);
  write_file(out / "run_meta.json", report::dump(a.run_meta));
}

int main(int argc, char** argv) {
  CLI::App app{"Pushdown control-flow, taint and permission analysis"};
  app.require_subcommand(1);
  auto* analyze = app.add_subcommand("analyze", "Analyze an application bundle");

  std::string bundle;
  std::string out;
  std::string mode = "pushdown";
  Options o;
  bool quiet = false;
  analyze->add_option("--bundle", bundle, "Bundle directory")->required();
  analyze->add_option("--out", out, "Output directory")->required();
  analyze->add_option("--mode", mode, "pushdown or finite")
      ->check(CLI::IsMember({"pushdown", "finite"}));
  analyze->add_option("--k", o.config.policy.k, "Context depth");
  analyze->add_flag("--heap-context", o.config.policy.heap_context,
                    "Allocate objects per calling context");
  analyze->add_option("--jobs", o.config.jobs, "Worker threads");
  analyze->add_option("--max-states", o.config.max_states, "State budget per run");
  analyze->add_option("--max-seconds", o.config.max_seconds, "Time budget per run");
  analyze->add_option("--where", o.where, "Finding filter");
  analyze->add_flag("--quiet", quiet, "No summary on stdout");

  try {
    app.parse(argc, argv);
    o.config.mode = mode == "finite" ? reach::Mode::Finite : reach::Mode::Pushdown;
    check_config(o.config);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  setup_logging();
  try {
    auto b = load_bundle(bundle);
    auto a = analyze_bundle(b, o);
    write_reports(*a, out);
    if (!quiet) {
      std::cout << report::render_text(a->flow_report, a->permissions_report);
    }
    if (a->trace.incomplete) {
      spdlog::error("resource limit: {}", a->trace.limit_reason);
      return 3;
    }
    return a->findings.empty() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "pdcfa: " << e.what() << "\n";
    return 2;
  }
}

} // namespace pdcfa::cli
