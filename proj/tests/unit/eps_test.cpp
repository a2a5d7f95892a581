#include <gtest/gtest.h>

#include "pdcfa/eps/eps.h"
#include "pdcfa/ir/parser.h"
#include "pdcfa/taint/findings.h"
#include "test_util.h"

using namespace pdcfa;
using namespace pdcfa::eps;
using V = machine::AbstractValue;

namespace {

const char* kApp = R"(
(class App extends java/lang/Object ((field f int) (field s java/lang/String))
  ((method one () void (throws) (limit 1) (field-put this f 1) (return void))
   (method two () void (throws) (limit 1) (field-put this f 2) (return void))
   (method leak () void (throws) (limit 2)
     (field-get d this s)
     (assign r (invoke-virtual (this d) (java/lang/String) java/net/HttpURLConnection.send))
     (return void))
   (method taint () void (throws) (limit 2)
     (assign l (invoke-virtual (this "k") (java/lang/String) android/media/ExifInterface.getAttribute))
     (field-put this s l)
     (return void))))
(class Other extends java/lang/Object ((field g int))
  ((method go () void (throws) (limit 1) (field-put this g 9) (return void))))
)";

struct Fixture {
  std::shared_ptr<const ir::Program> p = ir::parse_program(kApp);
  taint::SummaryTable summaries = taint::SummaryTable::builtin();
  machine::Domain domain{*p};
  machine::MachineContext ctx{*p, summaries, domain, {}};
  reach::AnalysisConfig cfg;

  static EntryPoint ep(const std::string& cls, const std::string& m) {
    EntryPoint e;
    e.method = ir::MethodRef{cls, m, {}};
    return e;
  }
  std::vector<Unit> units(std::vector<Unit> us) {
    Manifest m;
    m.units = std::move(us);
    return discover_entry_points(*p, m);
  }
  machine::Val field(const reach::Heap& h, const std::string& cls,
                     const std::string& f) {
    auto op = domain.op(machine::ProgramPoint{machine::kSyntheticMethod,
                                              p->class_id(cls)},
                        {});
    return h.store.get(machine::Addr::field(op, *p->symbols().find(f)));
  }
  size_t sink_hits(const SaturationTrace& t) const {
    size_t n = 0;
    for (const auto& r : t.runs) {
      for (const auto& evs : r.result.events) {
        for (const auto& e : evs) {
          n += e.kind == machine::EventKind::SinkHit;
        }
      }
    }
    return n;
  }
};

} // namespace

TEST(Discover, PassesThroughDeclaredUnits) {
  Fixture fx;
  auto us = fx.units({Unit{"U", UnitKind::Activity,
                           {Fixture::ep("App", "one"), Fixture::ep("App", "two")}}});
  ASSERT_EQ(us.size(), 1u);
  EXPECT_EQ(us[0].entry_points.size(), 2u);
  EXPECT_EQ(fx.p->ref(us[0].entry_points[1].id).method_name, "two");
}

TEST(Discover, Errors) {
  Fixture fx;
  EXPECT_THROW(fx.units({Unit{"U", UnitKind::Activity, {Fixture::ep("App", "nope")}}}),
               UnknownMethod);
  EXPECT_THROW(fx.units({Unit{"U", UnitKind::Activity, {}}}), EmptyUnit);
}

TEST(SaturateUnit, SinglePassFixpoint) {
  Fixture fx;
  auto us = fx.units({Unit{"U", UnitKind::Other, {Fixture::ep("App", "one")}}});
  auto t = saturate_unit(fx.ctx, us, 0, reach::Heap(), fx.cfg);
  EXPECT_TRUE(fx.field(t.heap, "App", "f").contains(V::integer(1)));
  // The first pass grows the store, the second confirms.
  EXPECT_EQ(t.unit_passes[0], 2u);
}

TEST(SaturateUnit, LaterWriterReachesEarlierReader) {
  Fixture fx;
  auto us = fx.units({Unit{"U", UnitKind::Other,
                           {Fixture::ep("App", "leak"), Fixture::ep("App", "taint")}}});
  auto t = saturate_unit(fx.ctx, us, 0, reach::Heap(), fx.cfg);
  EXPECT_EQ(fx.sink_hits(t), 1u);
  auto findings = taint::extract_findings(*fx.p, t);
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].category, taint::Category::Location);
}

TEST(SaturateUnit, JoinsWrites) {
  Fixture fx;
  auto us = fx.units({Unit{"U", UnitKind::Other,
                           {Fixture::ep("App", "one"), Fixture::ep("App", "two")}}});
  auto t = saturate_unit(fx.ctx, us, 0, reach::Heap(), fx.cfg);
  // 0 is the default the receiver starts with.
  EXPECT_EQ(fx.field(t.heap, "App", "f"),
            (machine::Val{V::integer(0), V::integer(1), V::integer(2)}));
}

TEST(SaturateApp, OneUnitMatchesUnit) {
  Fixture fx;
  auto us = fx.units({Unit{"U", UnitKind::Other,
                           {Fixture::ep("App", "leak"), Fixture::ep("App", "taint")}}});
  auto a = saturate_app(fx.ctx, us, fx.cfg);
  auto u = saturate_unit(fx.ctx, us, 0, reach::Heap(), fx.cfg);
  EXPECT_EQ(a.heap, u.heap);
}

TEST(SaturateApp, EitherUnitOrder) {
  for (bool flip : {false, true}) {
    Fixture fx;
    Unit w{"W", UnitKind::Service, {Fixture::ep("App", "taint")}};
    Unit r{"R", UnitKind::Service, {Fixture::ep("App", "leak")}};
    auto us = flip ? fx.units({r, w}) : fx.units({w, r});
    auto t = saturate_app(fx.ctx, us, fx.cfg);
    EXPECT_EQ(taint::extract_findings(*fx.p, t).size(), 1u) << flip;
  }
}

TEST(SaturateApp, DisjointUnitsJoin) {
  Fixture fx;
  Unit a{"A", UnitKind::Other, {Fixture::ep("App", "one")}};
  Unit b{"B", UnitKind::Other, {Fixture::ep("Other", "go")}};
  auto both = saturate_app(fx.ctx, fx.units({a, b}), fx.cfg);
  auto only_a = saturate_app(fx.ctx, fx.units({a}), fx.cfg);
  auto only_b = saturate_app(fx.ctx, fx.units({b}), fx.cfg);
  auto joined = only_a.heap;
  joined.join(only_b.heap);
  EXPECT_EQ(both.heap, joined);
}

TEST(SaturateApp, ReseededIsFixpoint) {
  Fixture fx;
  auto us = fx.units({Unit{"U", UnitKind::Other,
                           {Fixture::ep("App", "leak"), Fixture::ep("App", "taint")}},
                      Unit{"V", UnitKind::Other, {Fixture::ep("Other", "go")}}});
  auto t = saturate_app(fx.ctx, us, fx.cfg);
  auto again = saturate_app(fx.ctx, us, fx.cfg, &t.heap);
  EXPECT_EQ(again.rounds, 1u);
  EXPECT_EQ(again.heap, t.heap);
  for (size_t n : again.unit_passes) {
    EXPECT_EQ(n, 1u);
  }
}

TEST(SaturateApp, ResourceLimitStops) {
  Fixture fx;
  fx.cfg.max_states = 2;
  auto us = fx.units({Unit{"U", UnitKind::Other,
                           {Fixture::ep("App", "leak"), Fixture::ep("App", "taint")}}});
  auto t = saturate_app(fx.ctx, us, fx.cfg);
  EXPECT_TRUE(t.incomplete);
  EXPECT_FALSE(t.limit_reason.empty());
}
