#include <gtest/gtest.h>

#include "pdcfa/concrete/interpreter.h"
#include "pdcfa/ir/parser.h"
#include "test_util.h"

using namespace pdcfa;
using namespace pdcfa::concrete;
using pdcfa::test::single_method;

namespace {

const taint::SummaryTable& table() {
  static auto t = taint::SummaryTable::builtin();
  return t;
}

Trace run(const ir::Program& p, const std::string& cls,
          const std::string& method, std::vector<Value> args = {},
          std::vector<ir::Type> params = {}) {
  return run_concrete(p, ir::MethodRef{cls, method, std::move(params)}, args,
                      table());
}

} // namespace

TEST(Concrete, ReturnSeven) {
  auto p = single_method("(return 7)");
  auto t = run(*p, "Main", "main");
  EXPECT_EQ(t.outcome, Outcome::Returned);
  EXPECT_EQ(t.states.size(), 1u);
  EXPECT_EQ(t.result, Value::integer(7));
}

TEST(Concrete, Uncaught) {
  auto p = single_method("(assign e (new Main)) (throw e)");
  EXPECT_EQ(run(*p, "Main", "main").outcome, Outcome::UncaughtException);
}

TEST(Concrete, ExactArithmetic) {
  auto p = single_method("(assign x (add 2 3)) (return x)");
  auto t = run(*p, "Main", "main");
  EXPECT_EQ(t.result, Value::integer(5));
  auto big = single_method(
      "(assign x (mul 9223372036854775807 4)) (return x)");
  auto u = run(*big, "Main", "main");
  EXPECT_EQ(u.result.i, Int("36893488147419103228"));
}

TEST(Concrete, OutOfFuel) {
  auto p = single_method("(label l) (goto l)");
  auto t = run_concrete(*p, ir::MethodRef{"Main", "main", {}}, {}, table(),
                        RunOptions{50});
  EXPECT_EQ(t.outcome, Outcome::OutOfFuel);
}

TEST(Concrete, TypeErrors) {
  EXPECT_EQ(run(*single_method("(assign x (div 1 0)) (return x)"), "Main",
                "main")
                .outcome,
            Outcome::TypeError);
  EXPECT_EQ(run(*single_method("(if 3 (goto l)) (label l) (return void)"),
                "Main", "main")
                .outcome,
            Outcome::TypeError);
}

TEST(Concrete, CallsAndHandlers) {
  auto p = ir::parse_program(R"(
(class E extends java/lang/Object () ())
(class Main extends java/lang/Object ()
  ((method main () int (throws) (limit 3)
     (push-handler E h)
     (assign r (invoke-static (1) (int) Main.boom))
     (pop-handler)
     (return r)
     (label h)
     (assign r exn)
     (return 42))
   (method boom (int) int (throws) (limit 2)
     (if (eq param0 1) (goto t))
     (return param0)
     (label t)
     (assign e (new E))
     (throw e))))
)");
  auto t = run(*p, "Main", "main");
  EXPECT_EQ(t.outcome, Outcome::Returned);
  EXPECT_EQ(t.result, Value::integer(42));
  EXPECT_EQ(t.frames.size(), 2u);
}

TEST(Concrete, VirtualDispatch) {
  auto p = ir::parse_program(R"(
(class A extends java/lang/Object () ((method v () int (throws) (limit 1) (return 1))))
(class B extends A () ((method v () int (throws) (limit 1) (return 2))))
(class Main extends java/lang/Object ()
  ((method main () int (throws) (limit 3)
     (assign b (new B))
     (assign r (invoke-virtual (b) () A.v))
     (return r))))
)");
  EXPECT_EQ(run(*p, "Main", "main").result, Value::integer(2));
}

TEST(Concrete, SourceToSink) {
  auto p = ir::parse_program(R"(
(class Main extends java/lang/Object ()
  ((method main () void (throws) (limit 3)
     (assign loc (invoke-virtual (this "GPS") (java/lang/String) android/media/ExifInterface.getAttribute))
     (assign r (invoke-virtual (this loc) (java/lang/String) java/net/HttpURLConnection.send))
     (return void))))
)");
  auto t = run(*p, "Main", "main");
  ASSERT_EQ(t.outcome, Outcome::Returned);
  ASSERT_EQ(t.sinks.size(), 1u);
  EXPECT_EQ(t.sinks[0].label.category, taint::Category::Location);
  EXPECT_EQ(t.sinks[0].kind, taint::SinkKind::Network);
}

TEST(Concrete, Deterministic) {
  auto p = single_method("(assign x (new Main)) (assign y 3) (return y)");
  auto a = run(*p, "Main", "main");
  auto b = run(*p, "Main", "main");
  ASSERT_EQ(a.writes.size(), b.writes.size());
  for (size_t i = 0; i < a.writes.size(); ++i) {
    EXPECT_EQ(a.writes[i].addr, b.writes[i].addr);
    EXPECT_EQ(a.writes[i].value, b.writes[i].value);
  }
}
