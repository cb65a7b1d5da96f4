#include <gtest/gtest.h>

#include "repoctx/imports.hpp"
#include "test_support.hpp"

using namespace repoctx;
using repoctx::testing::source;

namespace {

std::vector<ImportBinding> imports_of(std::string_view code) { return extract_imports(parse(source(code))); }

}  // namespace

TEST(Imports, PlainAndAliased) {
  auto b = imports_of("import os\nimport a.b.c\nimport a.b as ab\n");
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0], (ImportBinding{"os", 0, "os", "", 1, false, false}));
  EXPECT_EQ(b[1], (ImportBinding{"a", 0, "a.b.c", "", 2, false, false}));
  EXPECT_EQ(b[2], (ImportBinding{"ab", 0, "a.b", "", 3, false, true}));
}

TEST(Imports, FromRelativeAndStar) {
  auto b = imports_of("from ..pkg.mod import f as g, h\nfrom . import sib\nfrom m import *\n");
  ASSERT_EQ(b.size(), 4u);
  EXPECT_EQ(b[0], (ImportBinding{"g", 2, "pkg.mod", "f", 1, true, true}));
  EXPECT_EQ(b[1], (ImportBinding{"h", 2, "pkg.mod", "h", 1, true, false}));
  EXPECT_EQ(b[2], (ImportBinding{"sib", 1, "", "sib", 2, true, false}));
  EXPECT_TRUE(b[3].star());
  EXPECT_EQ(b[3].module, "m");
}

TEST(Imports, ParenthesizedAndNested) {
  auto b = imports_of("from m import (a,\n    b)\ndef f():\n    import inner\n");
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[1].alias, "b");
  EXPECT_EQ(b[2].alias, "inner");
  EXPECT_EQ(b[2].line, 4u);
}

TEST(Imports, SalvagedFromUnfinishedStatement) {
  auto b = imports_of("from pkg.mod import Thing\nx = Thing.");
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].alias, "Thing");
  auto c = imports_of("import os\nfrom pkg.mod import (A,\n");
  ASSERT_GE(c.size(), 2u);
  EXPECT_EQ(c[1].module, "pkg.mod");
  EXPECT_EQ(c[1].name, "A");
}

TEST(ImportTarget, MapsUsagesOntoTargets) {
  ImportBinding from{"R", 0, "pkg.rs", "RecordSignal", 1, true, true};
  EXPECT_EQ(import_target(from, "R.get"), (ImportTarget{0, "pkg.rs", "RecordSignal.get"}));
  EXPECT_EQ(import_target(from, "R"), (ImportTarget{0, "pkg.rs", "RecordSignal"}));
  EXPECT_FALSE(import_target(from, "Rx").has_value());

  ImportBinding plain{"a", 0, "a.b", "", 1, false, false};
  // `import a.b` binds `a`; a.b.f is member f of module a.b.
  EXPECT_EQ(import_target(plain, "a.b.f"), (ImportTarget{0, "a.b", "f"}));

  ImportBinding alias{"ab", 0, "a.b", "", 1, false, true};
  EXPECT_EQ(import_target(alias, "ab.f.g"), (ImportTarget{0, "a.b", "f.g"}));
  EXPECT_EQ(import_target(alias, "ab"), (ImportTarget{0, "a.b", ""}));
}
