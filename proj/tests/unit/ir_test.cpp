#include <gtest/gtest.h>

#include "pdcfa/ir/parser.h"
#include "test_util.h"

using namespace pdcfa::ir;
using pdcfa::test::single_method;

namespace {

const char* kAB = R"(
(public class A extends java/lang/Object ()
  ((method public m () int (throws) (limit 1) (return 1))
   (method public n () int (throws) (limit 1) (return 2))))
(public class B extends A ()
  ((method public m () int (throws) (limit 1) (return 3))))
)";

} // namespace

TEST(Parse, NopStatement) {
  auto p = single_method("(nop) (return void)");
  const auto& body = p->method(0).body;
  ASSERT_EQ(body.size(), 2u);
  EXPECT_NE(body[0].as<NopStmt>(), nullptr);
}

TEST(Parse, MinimalClass) {
  auto p = parse_program("(public class A extends java/lang/Object () ())");
  ASSERT_EQ(p->classes().size(), 2u); // root + A
  const auto& a = p->class_def(p->class_id("A"));
  EXPECT_TRUE(a.fields.empty());
  EXPECT_TRUE(a.methods.empty());
  EXPECT_EQ(a.super_id, kRootClassId);
}

TEST(Parse, SelfExtendingClassIsACycle) {
  try {
    parse_program("(public class A extends A () ())");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("hierarchy cycle"), std::string::npos);
  }
}

TEST(Parse, LongerCycle) {
  EXPECT_THROW(parse_program("(class A extends B () ()) (class B extends A () ())"),
               ParseError);
}

TEST(Parse, Errors) {
  EXPECT_THROW(single_method("(frobnicate)"), ParseError);
  EXPECT_THROW(single_method("(goto nowhere)"), ParseError);
  EXPECT_THROW(single_method("(label a) (label a) (return void)"), ParseError);
  EXPECT_THROW(single_method("(nop 1)"), ParseError);
  EXPECT_THROW(single_method("(assign x (add 1))"), ParseError);
  EXPECT_THROW(single_method("(assign x (pow 1 2))"), ParseError);
  EXPECT_THROW(single_method("(line 0)"), ParseError);
  EXPECT_THROW(single_method("(assign x (invoke-virtual () () A.m))"),
               ParseError);
  EXPECT_THROW(single_method("(assign x (new Missing))"), ParseError);
  EXPECT_THROW(parse_program("(class A extends Missing () ())"), ParseError);
  EXPECT_THROW(parse_program("(class A extends java/lang/Object () ()"),
               ParseError);
  EXPECT_THROW(parse_program("(class A extends java/lang/Object "
                             "((field x int) (field x int)) ())"),
               ParseError);
  EXPECT_THROW(parse_program(
                   "(class A extends java/lang/Object () "
                   "((method m (int int) void (throws) (limit 1) (return void))))"),
               ParseError);
  EXPECT_THROW(parse_program("(class A extends java/lang/Object () "
                             "((method m () void (throws) (limit 0))))"),
               ParseError);
}

TEST(Parse, ErrorCarriesPosition) {
  try {
    parse_program("(class A extends java/lang/Object ()\n  ((method m () void "
                  "(throws) (limit 0)\n    (bogus))))");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.pos().line, 3u);
  }
}

TEST(Parse, LinesAndPositions) {
  auto p = single_method("(line 10) (nop) (line 12) (return void)");
  const auto& m = p->method(0);
  EXPECT_EQ(m.line_of[1], 10);
  EXPECT_EQ(m.line_of[3], 12);
  EXPECT_GT(m.body[1].pos.line, 0u);
}

TEST(StatementsAt, DirectSuffix) {
  auto p = single_method("(label x) (nop) (return void)");
  auto s = statements_at(*p, p->ref(0), "x");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NE(s[0].as<NopStmt>(), nullptr);
  EXPECT_NE(s[1].as<ReturnStmt>(), nullptr);
}

TEST(StatementsAt, UnknownLabel) {
  auto p = single_method("(label x) (nop) (return void)");
  EXPECT_THROW(statements_at(*p, p->ref(0), "nope"), UnknownLabel);
}

TEST(StatementsAt, SelfLoop) {
  auto p = single_method("(nop) (label y) (goto y)");
  auto s = statements_at(*p, p->ref(0), "y");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NE(s[0].as<GotoStmt>(), nullptr);
}

TEST(Resolve, OverrideWins) {
  auto p = parse_program(kAB);
  const auto& m = resolve_method(*p, "B", "m", {}, InvokeKind::Virtual);
  EXPECT_EQ(p->class_def(m.owner).name, "B");
}

TEST(Resolve, Inherited) {
  auto p = parse_program(kAB);
  const auto& m = resolve_method(*p, "B", "n", {}, InvokeKind::Virtual);
  EXPECT_EQ(p->class_def(m.owner).name, "A");
}

TEST(Resolve, SuperSkipsSelf) {
  auto p = parse_program(kAB);
  const auto& m = resolve_method(*p, "B", "m", {}, InvokeKind::Super);
  EXPECT_EQ(p->class_def(m.owner).name, "A");
}

TEST(Resolve, Missing) {
  auto p = parse_program(kAB);
  EXPECT_THROW(resolve_method(*p, "A", "zzz", {}, InvokeKind::Virtual),
               ResolveError);
  EXPECT_THROW(resolve_method(*p, "B", "m", {parse_type("int")},
                              InvokeKind::Virtual),
               ResolveError);
}

TEST(Subclass, Basics) {
  auto p = parse_program(kAB);
  EXPECT_TRUE(is_subclass(*p, "A", "A"));
  EXPECT_TRUE(is_subclass(*p, "B", "A"));
  EXPECT_FALSE(is_subclass(*p, "A", "B"));
  EXPECT_TRUE(is_subclass(*p, "A", "java/lang/Object"));
  EXPECT_THROW(is_subclass(*p, "A", "Nope"), UnknownClass);
}

TEST(RoundTrip, PrintThenParse) {
  const char* text = R"(
(public class E extends java/lang/Object ((field public code int)) ())
(public final class C extends java/lang/Object
  ((field private name java/lang/String) (field next C) (field ok boolean))
  ((method public run (int boolean) int (throws E) (limit 6)
     (line 3)
     (assign x (add param0 (neg 2)))
     (if (and param1 (lt x 10)) (goto big))
     (assign s "a \"quoted\"\nline")
     (assign c (new C))
     (field-put c next c)
     (field-get y c next)
     (assign b (instance-of y C))
     (push-handler E caught)
     (assign r (invoke-virtual (this x) (int) C.helper))
     (assign z (invoke-static (x true) (int boolean) C.run))
     (pop-handler)
     (goto done)
     (label caught)
     (assign e exn)
     (throw e)
     (label big)
     (label done)
     (return x))
   (method helper (int) int (throws) (limit 2) (return param0))
   (method abstract todo () void (throws) (limit 0))))
)";
  auto p = parse_program(text);
  auto printed = print_program(*p);
  auto q = parse_program(printed);
  EXPECT_TRUE(*p == *q) << printed;
  EXPECT_EQ(print_program(*q), printed);
}
