#include <gtest/gtest.h>

#include "pdcfa/cli/cli.h"
#include "pdcfa/taint/findings.h"
#include "test_util.h"

using namespace pdcfa;
using namespace pdcfa::taint;
using machine::ProgramPoint;
using machine::TaintLabel;
using machine::TaintSet;
using machine::Val;
using V = machine::AbstractValue;

namespace {

const ProgramPoint kSite{3, 7};

SummaryTable table(const std::string& text) { return SummaryTable::parse(text); }

const ApiSummary& only(const SummaryTable& t) { return t.records().at(0); }

} // namespace

TEST(Summary, ParsesRolesAndPermissions) {
  auto t = table("summary a/B get role=source:Location,Sms ret=any-string perms=P1,P2\n"
                 "summary a/* put(int) role=propagate+sink:file ret=void perms=\n");
  ASSERT_EQ(t.records().size(), 2u);
  const auto& s = t.records()[0];
  EXPECT_TRUE(s.source);
  EXPECT_EQ(s.source_categories, (std::vector<Category>{Category::Location, Category::Sms}));
  EXPECT_EQ(s.permissions, (std::vector<std::string>{"P1", "P2"}));
  const auto& p = t.records()[1];
  EXPECT_TRUE(p.propagate);
  EXPECT_TRUE(p.sink);
  EXPECT_EQ(p.sink_kind, SinkKind::File);
  EXPECT_TRUE(p.params.has_value());
  EXPECT_NE(t.match("a/Zed", "put", {ir::parse_type("int")}), nullptr);
  EXPECT_EQ(t.match("a/Zed", "put", {}), nullptr);
}

TEST(Summary, RejectsMalformedRecords) {
  EXPECT_THROW(table("summary a/B get role=source:Nowhere ret=void perms="),
               SummaryParseError);
  EXPECT_THROW(table("summary a/B get role=sink:pigeon ret=void perms="),
               SummaryParseError);
  EXPECT_THROW(table("summary a/B get ret=void perms="), SummaryParseError);
  EXPECT_THROW(table("summary a/B get role=neutral ret=maybe perms="),
               SummaryParseError);
}

TEST(Summary, BuiltinTableLoads) {
  auto t = SummaryTable::builtin();
  EXPECT_GE(t.records().size(), 20u);
  EXPECT_NE(t.match("android/media/ExifInterface", "getAttribute", {}), nullptr);
}

TEST(ApplySummary, SourceIntroducesCategory) {
  auto t = table("summary a/Exif get role=source:Location ret=any-string perms=");
  auto out = apply_summary(only(t), {Val{V::str(1)}}, {TaintSet{}}, kSite);
  EXPECT_EQ(out.ret_taint, (TaintSet{TaintLabel{Category::Location, kSite}}));
  EXPECT_EQ(out.ret, Val{V::any_str()});
  EXPECT_TRUE(out.sink_hits.empty());
}

TEST(ApplySummary, SinkReportsArgumentTaint) {
  auto t = table("summary a/Http send role=sink:network ret=void perms=INTERNET");
  TaintLabel loc{Category::Location, ProgramPoint{1, 2}};
  auto out = apply_summary(only(t), {Val{V::any_str()}}, {TaintSet{loc}}, kSite);
  ASSERT_EQ(out.sink_hits.size(), 1u);
  EXPECT_EQ(out.sink_hits[0], (SinkHit{loc, SinkKind::Network}));
  EXPECT_TRUE(out.ret_taint.empty());
}

TEST(ApplySummary, SinkRestrictedToCategories) {
  auto t = table("summary a/Sms send role=sink:sms:Contact ret=void perms=");
  TaintLabel loc{Category::Location, ProgramPoint{1, 2}};
  auto out = apply_summary(only(t), {Val{}}, {TaintSet{loc}}, kSite);
  EXPECT_TRUE(out.sink_hits.empty());
}

TEST(ApplySummary, PropagateUnionsArguments) {
  auto t = table("summary a/S concat role=propagate ret=any-string perms=");
  TaintLabel sms{Category::Sms, ProgramPoint{1, 2}};
  auto out = apply_summary(only(t), {Val{}, Val{}}, {TaintSet{sms}, TaintSet{}},
                           kSite);
  EXPECT_EQ(out.ret_taint, TaintSet{sms});
}

TEST(ApplySummary, NeutralDropsTaint) {
  auto t = table("summary a/M random role=neutral ret=any-int perms=");
  TaintLabel sms{Category::Sms, ProgramPoint{1, 2}};
  auto out = apply_summary(only(t), {Val{}}, {TaintSet{sms}}, kSite);
  EXPECT_TRUE(out.ret_taint.empty());
  EXPECT_EQ(out.ret, Val{V::any_int()});
}

namespace {

std::unique_ptr<cli::Analysis> run_bundle(const std::string& name,
                                          reach::Mode mode, size_t k) {
  cli::Options o;
  o.config.mode = mode;
  o.config.policy.k = k;
  return cli::analyze_bundle(cli::load_bundle(test::test_data("bundles/" + name)), o);
}

} // namespace

TEST(Findings, NoSourcesNoFindings) {
  auto a = run_bundle("benign", reach::Mode::Pushdown, 1);
  EXPECT_TRUE(a->all_findings.empty());
}

TEST(Findings, KittyPushdownSingleFlow) {
  auto a = run_bundle("kitty", reach::Mode::Pushdown, 1);
  ASSERT_EQ(a->all_findings.size(), 1u);
  const auto& f = a->all_findings[0];
  EXPECT_EQ(f.category, Category::Location);
  EXPECT_EQ(f.sink_kind, SinkKind::Intent);
  EXPECT_EQ(a->program->ref(f.sink_point.method).method_name, "kittyQuoteButton");
  EXPECT_EQ(a->units[f.unit].entry_points[f.entry].method.method_name,
            "kittyQuoteButton");
  const auto& sink_run = a->trace.runs[f.sink_run].result;
  const auto& source_run = a->trace.runs[f.source_run].result;
  ASSERT_FALSE(f.sink_witness.empty());
  ASSERT_FALSE(f.source_witness.empty());
  EXPECT_FALSE(reach::check_balanced(sink_run, f.sink_witness));
  EXPECT_FALSE(reach::check_balanced(source_run, f.source_witness));
  EXPECT_EQ(f.sink_witness.back().state, *sink_run.find(f.sink.state));
  EXPECT_EQ(f.sink_witness.front().state, sink_run.initial);
}

TEST(Findings, KittyFiniteAddsDeviceIdFlow) {
  auto a = run_bundle("kitty", reach::Mode::Finite, 0);
  std::set<Category> cats;
  for (const auto& f : a->all_findings) {
    cats.insert(f.category);
  }
  EXPECT_EQ(cats, (std::set<Category>{Category::Location, Category::DeviceID}));
}

TEST(Findings, DeterministicOrder) {
  auto a = run_bundle("kitty", reach::Mode::Finite, 0);
  auto b = run_bundle("kitty", reach::Mode::Finite, 0);
  ASSERT_EQ(a->all_findings.size(), b->all_findings.size());
  for (size_t i = 0; i < a->all_findings.size(); ++i) {
    EXPECT_EQ(a->all_findings[i].source_point, b->all_findings[i].source_point);
    EXPECT_EQ(a->all_findings[i].sink_point, b->all_findings[i].sink_point);
  }
  for (size_t i = 1; i < a->all_findings.size(); ++i) {
    const auto& x = a->all_findings[i - 1];
    const auto& y = a->all_findings[i];
    EXPECT_LE(std::tie(x.unit, x.source.line, x.sink.line),
              std::tie(y.unit, y.source.line, y.sink.line));
  }
}
