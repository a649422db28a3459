#include <gtest/gtest.h>

#include <unistd.h>

#include "hyperplan/library.hpp"
#include "hyperplan/planner.hpp"
#include "test_support.hpp"

namespace {

using namespace hyperplan;
using namespace hyperplan::testing;
namespace fs = std::filesystem;

class Library : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hyperplan_lib_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

AbstractHypergraph strategy_for(const std::string& name) {
  auto p = fixture(name);
  return extract_strategy(plan(p).graph, p);
}

TEST(Signature, Fig1) {
  auto s = signature_of(strategy_for("fig1"));
  EXPECT_EQ(s.num_abstract_objects, 3u);
  EXPECT_EQ(s.goal_stack_heights, std::vector<std::size_t>{3});
  EXPECT_FALSE(s.uses_buffer);
}

TEST(Signature, EmptyStrategy) {
  auto s = signature_of(AbstractHypergraph{});
  EXPECT_EQ(s, (StrategySignature{0, {}, false}));
}

TEST(Signature, BufferRoleSetsFlag) {
  AbstractGraph::Builder b;
  b.add_node(AbstractNode{{AbstractObject(0)}, RegionRole::buffer(), {}, true, true});
  AbstractHypergraph ah{std::move(b).seal(), {}, 1};
  EXPECT_TRUE(signature_of(ah).uses_buffer);
}

TEST_F(Library, StoreLoadRoundTrip) {
  auto rec = make_record(strategy_for("fig3"), "fig3", "fig3", "2026-01-02T03:04:05Z");
  EXPECT_EQ(store(rec, dir_), "fig3");
  EXPECT_TRUE(fs::exists(dir_ / "fig3.strategy.json"));
  auto loaded = load(dir_);
  ASSERT_EQ(loaded.size(), 1u);
  EXPECT_EQ(loaded[0].id, rec.id);
  EXPECT_EQ(loaded[0].signature, rec.signature);
  EXPECT_EQ(loaded[0].provenance, rec.provenance);
  EXPECT_EQ(canonical_form(loaded[0].ah), canonical_form(rec.ah));
  EXPECT_EQ(strategy_to_json(loaded[0]), strategy_to_json(rec));
}

TEST_F(Library, EmptyDirectory) { EXPECT_TRUE(load(dir_).empty()); }

TEST_F(Library, MissingDirectory) { EXPECT_THROW(load(dir_ / "absent"), IoFailure); }

TEST_F(Library, TamperedSignatureIsCorrupt) {
  auto rec = make_record(strategy_for("fig1"), "fig1", "fig1", "t");
  auto doc = Json::parse(strategy_to_json(rec));
  doc["signature"]["goal_heights"] = {2, 1};
  write_file_atomic(dir_ / "fig1.strategy.json", doc.dump(2));
  try {
    load(dir_);
    FAIL() << "expected CorruptRecord";
  } catch (const CorruptRecord& e) {
    EXPECT_NE(e.file().find("fig1.strategy.json"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("signature"), std::string::npos);
  }
}

TEST_F(Library, BrokenStructureIsCorrupt) {
  auto rec = make_record(strategy_for("fig1"), "fig1", "fig1", "t");
  auto doc = Json::parse(strategy_to_json(rec));
  doc["arcs"][0]["heads"] = {1};  // drops the residual, breaking conservation
  write_file_atomic(dir_ / "a.strategy.json", doc.dump(2));
  EXPECT_THROW(load(dir_), CorruptRecord);
  write_file_atomic(dir_ / "a.strategy.json", "{ not json");
  EXPECT_THROW(load(dir_), CorruptRecord);
  doc = Json::parse(strategy_to_json(rec));
  doc["extra"] = 1;
  write_file_atomic(dir_ / "a.strategy.json", doc.dump(2));
  EXPECT_THROW(load(dir_), CorruptRecord);
}

TEST_F(Library, IgnoresOtherFiles) {
  write_file_atomic(dir_ / "notes.txt", "hello");
  store(make_record(strategy_for("fig1"), "only", "fig1", "t"), dir_);
  EXPECT_EQ(load(dir_).size(), 1u);
}

TEST(Retrieve, MatchesGoalShape) {
  std::vector<StrategyRecord> lib{make_record(strategy_for("fig1"), "fig1", "fig1", "t")};
  auto hit = retrieve(fixture("fig2"), lib);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->id, "fig1");

  auto four = make_problem({stack("a"), stack("b")}, {robot_spec("r", {0, 1})}, 4, {{0, 1, 2, 3}, {}},
                           {{1, {3, 2, 1, 0}}});
  EXPECT_FALSE(retrieve(four, lib).has_value());
  EXPECT_FALSE(retrieve(fixture("fig1"), {}).has_value());
}

TEST(Retrieve, SmallestIdWins) {
  auto ah = strategy_for("fig1");
  std::vector<StrategyRecord> lib{make_record(ah, "zeta", "fig1", "t"), make_record(ah, "alpha", "fig1", "t"),
                                  make_record(ah, "mid", "fig1", "t")};
  EXPECT_EQ(retrieve(fixture("fig3"), lib)->id, "alpha");
}

TEST(Retrieve, RejectsBadIds) {
  EXPECT_THROW(make_record(AbstractHypergraph{}, "../escape", "x"), ValidationError);
  EXPECT_THROW(make_record(AbstractHypergraph{}, "", "x"), ValidationError);
}

}  // namespace
