#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdcfa/report/report.h"

namespace pdcfa::cli {

class BundleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*
 * An application on disk: `manifest.json` in the bundle directory names the
 * program file, an optional summary table (the built-in table otherwise),
 * the requested permissions and the units.
 */
struct AppBundle {
  std::filesystem::path dir;
  std::string program_file;
  std::string program_text;
  std::string manifest_text;
  std::string summaries_file; // empty: built-in table
  std::string summaries_text;
  eps::Manifest manifest;
  std::vector<std::string> predicates;
};

AppBundle load_bundle(const std::filesystem::path& dir);
// Manifest part only; `text` is the JSON document.
eps::Manifest parse_manifest(const std::string& text);

struct Options {
  reach::AnalysisConfig config;
  std::optional<std::string> where;
};

// All products of one analysis. Owns the program and the domain that the
// findings refer to.
struct Analysis {
  std::shared_ptr<const ir::Program> program;
  std::unique_ptr<taint::SummaryTable> summaries;
  std::unique_ptr<machine::Domain> domain;
  std::vector<eps::Unit> units;
  eps::SaturationTrace trace;
  std::vector<taint::TaintFinding> all_findings;
  std::vector<taint::TaintFinding> findings; // after the predicate
  permissions::PermissionReport permissions;
  std::optional<report::Predicate> predicate;
  std::string app_name;
  report::Json provenance;

  report::Json flow_report;
  report::Json permissions_report;
  report::Json heatmap;
  std::string graph;
  report::Json run_meta;
  double seconds = 0;

  report::ReportContext context() const;
};

std::unique_ptr<Analysis> analyze_bundle(const AppBundle& b, const Options& o);

// Writes the report files into `out`, creating it if needed.
void write_reports(const Analysis& a, const std::filesystem::path& out);

// Entry point of the pdcfa executable.
int main(int argc, char** argv);

} // namespace pdcfa::cli
