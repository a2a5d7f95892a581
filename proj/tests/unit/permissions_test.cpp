#include <gtest/gtest.h>

#include "pdcfa/cli/cli.h"
#include "pdcfa/permissions/permissions.h"
#include "test_util.h"

using namespace pdcfa;
using namespace pdcfa::permissions;

namespace {

Use use(const std::string& perm, uint32_t index) {
  Use u;
  u.permission = perm;
  u.evidence.point = machine::ProgramPoint{0, index};
  u.evidence.line = index;
  return u;
}

std::unique_ptr<cli::Analysis> run(const cli::AppBundle& b) {
  return cli::analyze_bundle(b, cli::Options{});
}

std::unique_ptr<cli::Analysis> run(const std::string& name) {
  return run(cli::load_bundle(test::test_data("bundles/" + name)));
}

} // namespace

TEST(PermissionReport, OverPrivileged) {
  auto rep = build_permission_report({"INTERNET", "SEND_SMS"}, {use("INTERNET", 1)});
  EXPECT_EQ(rep.reached, (std::set<std::string>{"INTERNET"}));
  EXPECT_EQ(rep.over_privileged, (std::set<std::string>{"SEND_SMS"}));
  EXPECT_TRUE(rep.missing.empty());
  EXPECT_EQ(rep.evidence.at("INTERNET").size(), 1u);
}

TEST(PermissionReport, Missing) {
  auto rep = build_permission_report({}, {use("INTERNET", 1), use("INTERNET", 2)});
  EXPECT_EQ(rep.missing, (std::set<std::string>{"INTERNET"}));
  EXPECT_TRUE(rep.over_privileged.empty());
  EXPECT_EQ(rep.evidence.at("INTERNET").size(), 2u);
}

TEST(PermissionReport, ExactMatch) {
  auto rep = build_permission_report({"A", "B"}, {use("A", 1), use("B", 2)});
  EXPECT_TRUE(rep.over_privileged.empty());
  EXPECT_TRUE(rep.missing.empty());
}

TEST(PermissionReport, DifferencesDisjoint) {
  auto rep = build_permission_report({"A", "B", "C"}, {use("C", 1), use("D", 2)});
  EXPECT_EQ(rep.over_privileged, (std::set<std::string>{"A", "B"}));
  EXPECT_EQ(rep.missing, (std::set<std::string>{"D"}));
  for (const auto& p : rep.over_privileged) {
    EXPECT_FALSE(rep.missing.count(p));
  }
}

TEST(PermissionBundles, UnreachedHelperIsNotCollected) {
  auto a = run("perms_overpriv");
  EXPECT_EQ(a->permissions.reached, (std::set<std::string>{"INTERNET"}));
  EXPECT_EQ(a->permissions.over_privileged, (std::set<std::string>{"SEND_SMS"}));
  EXPECT_TRUE(a->permissions.missing.empty());
  EXPECT_FALSE(a->permissions.lower_bound);
}

TEST(PermissionBundles, HelperBecomesReachableAsEntry) {
  auto b = cli::load_bundle(test::test_data("bundles/perms_overpriv"));
  eps::EntryPoint e;
  e.method = ir::MethodRef{"app/Weather", "shareForecast", {}};
  b.manifest.units[0].entry_points.push_back(e);
  auto a = run(b);
  EXPECT_EQ(a->permissions.reached, (std::set<std::string>{"INTERNET", "SEND_SMS"}));
  EXPECT_TRUE(a->permissions.over_privileged.empty());
}

TEST(PermissionBundles, NothingRequested) {
  auto a = run("perms_zero");
  EXPECT_TRUE(a->permissions.requested.empty());
  EXPECT_EQ(a->permissions.missing, (std::set<std::string>{"INTERNET"}));
  for (const auto& ev : a->permissions.evidence.at("INTERNET")) {
    EXPECT_GT(ev.line, 0);
  }
}

TEST(PermissionBundles, ResourceLimitMarksLowerBound) {
  auto b = cli::load_bundle(test::test_data("bundles/perms_overpriv"));
  cli::Options o;
  o.config.max_states = 2;
  auto a = cli::analyze_bundle(b, o);
  EXPECT_TRUE(a->permissions.lower_bound);
}
