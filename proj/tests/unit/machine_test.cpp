#include <gtest/gtest.h>

#include "pdcfa/ir/parser.h"
#include "pdcfa/machine/machine.h"
#include "test_util.h"

using namespace pdcfa;
using namespace pdcfa::machine;
using pdcfa::test::single_method;
using V = AbstractValue;

namespace {

struct Fixture {
  std::shared_ptr<const ir::Program> p;
  taint::SummaryTable summaries = taint::SummaryTable::builtin();
  Domain domain;
  MachineContext ctx;

  explicit Fixture(std::shared_ptr<const ir::Program> prog,
                   AnalysisPolicy policy = {})
      : p(std::move(prog)), domain(*p), ctx{*p, summaries, domain, policy} {}

  MethodId method(const std::string& cls, const std::string& name) const {
    for (const auto& m : p->methods()) {
      if (p->class_def(m.owner).name == cls && p->name(m.name) == name) {
        return m.id;
      }
    }
    throw std::runtime_error("no method " + name);
  }

  AbstractConfig start(const std::string& cls, const std::string& name) {
    auto c = inject(ctx, p->ref(method(cls, name)), Store(), TaintStore());
    Effects e;
    inject_entry(ctx, c.state.method, e);
    apply_effects(e, c.store, c.taint);
    return c;
  }

  ir::AExp parse_aexp(const std::string& text) {
    auto q = single_method("(assign x " + text + ") (return void)");
    const auto& st = q->method(0).body[0].as<ir::AssignAtomicStmt>();
    return st->value;
  }
};

// Runs a single configuration until every path stops; returns every visited
// configuration.
std::vector<AbstractConfig> run_all(const MachineContext& ctx,
                                    AbstractConfig c, size_t limit = 200) {
  std::vector<AbstractConfig> seen{c};
  std::vector<AbstractConfig> work{std::move(c)};
  while (!work.empty() && seen.size() < limit) {
    auto cur = std::move(work.back());
    work.pop_back();
    for (auto& n : step(ctx, cur)) {
      seen.push_back(n);
      work.push_back(std::move(n));
    }
  }
  return seen;
}

const char* kTwoClasses = R"(
(public class A extends java/lang/Object ((field f int)) ())
(public class B extends A () ())
(public class Main extends java/lang/Object () ())
)";

} // namespace

TEST(Inject, EmptyStoreAndStack) {
  Fixture f(single_method("(return void)"));
  auto c = inject(f.ctx, f.p->ref(0), Store(), TaintStore());
  EXPECT_EQ(c.store.size(), 0u);
  EXPECT_TRUE(c.kont.empty());
  EXPECT_EQ(c.state.index, 0u);
  EXPECT_EQ(f.domain.fp_of(c.state.fp).ctx.size, 0);
}

TEST(Inject, KeepsInitialStore) {
  Fixture f(single_method("(return void)"));
  Store s;
  s.join(Addr::reg(42, 1), Val{V::integer(3)});
  auto c = inject(f.ctx, f.p->ref(0), s, TaintStore());
  EXPECT_EQ(c.store, s);
}

TEST(Inject, UnknownMethod) {
  Fixture f(single_method("(return void)"));
  ir::MethodRef bad{"Main", "nope", {}};
  EXPECT_THROW(inject(f.ctx, bad, Store(), TaintStore()), ir::ResolveError);
}

TEST(EvalAtomic, Literals) {
  Fixture f(single_method("(return void)"));
  Store s;
  TaintStore t;
  StoreView view(s, t);
  EXPECT_EQ(eval_atomic(f.ctx, ir::AExp::integer(42), 0, view),
            Val{V::integer(42)});
  EXPECT_EQ(eval_atomic(f.ctx, f.parse_aexp("(add 2 3)"), 0, view),
            Val{V::integer(5)});
  EXPECT_TRUE(eval_atomic(f.ctx, f.parse_aexp("missing"), 0, view).empty());
}

TEST(EvalAtomic, WidensWithAnyInt) {
  Fixture f(single_method("(assign y (add x 1)) (assign z (lt x 1)) "
                          "(return void)"));
  const auto& body = f.p->method(0).body;
  Store s;
  TaintStore t;
  Symbol x = *f.p->symbols().find("x");
  s.join(Addr::reg(0, x), Val{V::any_int()});
  StoreView view(s, t);
  EXPECT_EQ(eval_atomic(f.ctx, body[0].as<ir::AssignAtomicStmt>()->value, 0,
                        view),
            Val{V::any_int()});
  EXPECT_EQ(eval_atomic(f.ctx, body[1].as<ir::AssignAtomicStmt>()->value, 0,
                        view),
            (Val{V::boolean(true), V::boolean(false)}));
}

TEST(EvalAtomic, InstanceOfSubclass) {
  auto p = ir::parse_program(std::string(kTwoClasses) + R"(
(class T extends java/lang/Object () ((method m () void (throws) (limit 2)
  (assign y (instance-of x A)) (return void))))
)");
  Fixture f(p);
  ClassId a = p->class_id("A");
  ClassId b = p->class_id("B");
  Symbol x = *p->symbols().find("x");
  const auto& e =
      p->method(0).body[0].as<ir::AssignAtomicStmt>()->value;
  Store s;
  TaintStore t;
  s.join(Addr::reg(0, x), Val{V::object(1, b)});
  EXPECT_EQ(eval_atomic(f.ctx, e, 0, StoreView(s, t)), Val{V::boolean(true)});
  Store mixed;
  mixed.join(Addr::reg(0, x), Val{V::object(1, b), V::null()});
  EXPECT_EQ(eval_atomic(f.ctx, e, 0, StoreView(mixed, t)),
            (Val{V::boolean(true), V::boolean(false)}));
  (void)a;
}

TEST(EvalField, JoinsOverObjects) {
  auto p = ir::parse_program(kTwoClasses);
  Fixture f(p);
  ClassId a = p->class_id("A");
  Symbol fld = p->class_def(a).fields[0].name;
  Symbol x = p->symbols().find("this").value();
  Store s;
  TaintStore t;
  s.join(Addr::reg(0, x), Val{V::object(1, a)});
  s.join(Addr::field(1, fld), Val{V::integer(1)});
  auto e = ir::AExp::make(ir::AExp::Kind::This);
  EXPECT_EQ(eval_field(f.ctx, e, 0, StoreView(s, t), fld), Val{V::integer(1)});
  s.join(Addr::reg(0, x), Val{V::object(2, a)});
  s.join(Addr::field(2, fld), Val{V::integer(2)});
  EXPECT_EQ(eval_field(f.ctx, e, 0, StoreView(s, t), fld),
            (Val{V::integer(1), V::integer(2)}));
  Store nul;
  nul.join(Addr::reg(0, x), Val{V::null()});
  EXPECT_TRUE(eval_field(f.ctx, e, 0, StoreView(nul, t), fld).empty());
}

TEST(Step, ReturnSkipsHandler) {
  auto p = ir::parse_program(R"(
(class E extends java/lang/Object () ())
(class Main extends java/lang/Object () ((method main () void (throws) (limit 2)
  (push-handler E h) (return 1) (label h) (return 2))))
)");
  Fixture f(p);
  auto c = f.start("Main", "main");
  auto s1 = step(f.ctx, c);
  ASSERT_EQ(s1.size(), 1u);
  ASSERT_EQ(s1[0].kont.size(), 1u);
  auto s2 = step(f.ctx, s1[0]);
  ASSERT_EQ(s2.size(), 1u);
  EXPECT_EQ(s2[0].state, s1[0].state); // same return statement
  EXPECT_TRUE(s2[0].kont.empty());
}

TEST(Step, ThrowToMatchingHandler) {
  auto p = ir::parse_program(R"(
(class A extends java/lang/Object () ())
(class B extends A () ())
(class Main extends java/lang/Object () ((method main () int (throws) (limit 2)
  (push-handler A h) (assign e (new B)) (throw e) (label h) (return 9))))
)");
  Fixture f(p);
  auto all = run_all(f.ctx, f.start("Main", "main"));
  bool entered = false;
  for (const auto& c : all) {
    if (c.state.kind == StateKind::Normal && c.state.index == 4) {
      entered = true;
      auto exn = c.store.get(Addr::reg(c.state.fp, p->sym_exn()));
      ASSERT_EQ(exn.size(), 1u);
      EXPECT_EQ(exn.values()[0].class_id(), p->class_id("B"));
      EXPECT_TRUE(c.kont.empty());
    }
  }
  EXPECT_TRUE(entered);
}

TEST(Step, TwoStepUnwind) {
  auto p = ir::parse_program(R"(
(class E extends java/lang/Object () ())
(class Main extends java/lang/Object ()
  ((method main () int (throws) (limit 2)
     (push-handler E h)
     (assign r (invoke-static () () Main.boom))
     (return 0)
     (label h)
     (return 1))
   (method boom () int (throws) (limit 2)
     (assign e (new E)) (throw e))))
)");
  Fixture f(p);
  auto all = run_all(f.ctx, f.start("Main", "main"));
  // Unwinding states: one under the call frame, one after popping it.
  std::vector<size_t> depths;
  bool handled = false;
  for (const auto& c : all) {
    if (c.state.kind == StateKind::Unwinding) {
      depths.push_back(c.kont.size());
    }
    if (c.state.kind == StateKind::Normal && c.state.index == 4 &&
        c.state.method == f.method("Main", "main")) {
      handled = true;
      EXPECT_EQ(c.state.fp, entry_fp(f.ctx, c.state.method));
    }
  }
  EXPECT_EQ(depths, (std::vector<size_t>{2, 1}));
  EXPECT_TRUE(handled);
}

TEST(Step, PopHandlerOverCallFrameIsMalformed) {
  auto p = ir::parse_program(R"(
(class Main extends java/lang/Object ()
  ((method main () int (throws) (limit 2)
     (assign r (invoke-static () () Main.bad)) (return 0))
   (method bad () int (throws) (limit 1) (pop-handler) (return 0))))
)");
  Fixture f(p);
  auto c = f.start("Main", "main");
  auto s1 = step(f.ctx, c);
  ASSERT_EQ(s1.size(), 1u);
  EXPECT_THROW(step(f.ctx, s1[0]), MalformedState);
  Fixture g(single_method("(pop-handler) (return void)"));
  EXPECT_THROW(step(g.ctx, g.start("Main", "main")), MalformedState);
}

TEST(Step, IfBothBranchesWhenUnknown) {
  auto p = ir::parse_program(R"(
(class Main extends java/lang/Object ()
  ((method main (int) int (throws) (limit 2)
     (if (lt param0 3) (goto l)) (return 0) (label l) (return 1))))
)");
  Fixture f(p);
  auto s1 = step(f.ctx, f.start("Main", "main"));
  EXPECT_EQ(s1.size(), 2u);
}

TEST(Alloc, FramePointers) {
  auto p = ir::parse_program(R"(
(class Main extends java/lang/Object ()
  ((method main () int (throws) (limit 2)
     (assign a (invoke-static () () Main.m))
     (assign b (invoke-static () () Main.m))
     (return 0))
   (method m () int (throws) (limit 1) (return 1))))
)");
  for (size_t k : {0u, 1u}) {
    AnalysisPolicy pol;
    pol.k = k;
    Fixture f(p, pol);
    MethodId main = f.method("Main", "main");
    MethodId m = f.method("Main", "m");
    FpId root = entry_fp(f.ctx, main);
    FpId a = alloc_fp(f.ctx, root, {main, 0}, m);
    FpId b = alloc_fp(f.ctx, root, {main, 1}, m);
    if (k == 0) {
      EXPECT_EQ(a, b);
    } else {
      EXPECT_NE(a, b);
    }
  }
}

TEST(Alloc, ObjectPointersBySite) {
  Fixture f(single_method("(assign a (new Main)) (assign b (new Main)) "
                          "(return void)"));
  FpId fp = entry_fp(f.ctx, 0);
  EXPECT_NE(alloc_op(f.ctx, fp, {0, 0}), alloc_op(f.ctx, fp, {0, 1}));
  EXPECT_EQ(alloc_op(f.ctx, fp, {0, 0}), alloc_op(f.ctx, fp, {0, 0}));
}

TEST(Step, NewInitializesFieldsWithDefaults) {
  auto p = ir::parse_program(R"(
(class A extends java/lang/Object ((field n int) (field ok boolean)) ())
(class B extends A ((field next A)) ())
(class Main extends java/lang/Object () ((method main () void (throws) (limit 2)
  (assign x (new B)) (return void))))
)");
  Fixture f(p);
  auto s1 = step(f.ctx, f.start("Main", "main"));
  ASSERT_EQ(s1.size(), 1u);
  const auto& st = s1[0].store;
  auto x = st.get(Addr::reg(s1[0].state.fp, *p->symbols().find("x")));
  ASSERT_EQ(x.size(), 1u);
  OpId op = x.values()[0].op();
  EXPECT_EQ(st.get(Addr::field(op, *p->symbols().find("n"))),
            Val{V::integer(0)});
  EXPECT_EQ(st.get(Addr::field(op, *p->symbols().find("ok"))),
            Val{V::boolean(false)});
  EXPECT_EQ(st.get(Addr::field(op, *p->symbols().find("next"))),
            Val{V::null()});
}

TEST(Step, StoreIsMonotone) {
  Fixture f(single_method("(assign x 1) (assign x 2) (return x)"));
  auto all = run_all(f.ctx, f.start("Main", "main"));
  const auto& last = all.back();
  Symbol x = *f.p->symbols().find("x");
  EXPECT_EQ(last.store.get(Addr::reg(last.state.fp, x)),
            (Val{V::integer(1), V::integer(2)}));
}

TEST(ValLattice, BudgetWidening) {
  Val v;
  for (int i = 0; i < 9; ++i) {
    v.join(Val{V::integer(i)}, 8);
  }
  EXPECT_EQ(v, Val{V::any_int()});
  Val w{V::integer(1)};
  EXPECT_TRUE(w.leq(Val{V::any_int()}));
}
