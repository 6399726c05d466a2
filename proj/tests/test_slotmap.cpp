#include <algorithm>
#include <set>

#include "brute_force.hpp"
#include "doctest.h"
#include "morphnoise/rng.hpp"
#include "morphnoise/slotmap.hpp"

using namespace morphnoise;

namespace {

SlotMsdGraph make_graph(const std::vector<std::tuple<std::int64_t, const char*, std::int64_t>>& edges) {
  std::vector<InflectionPair> pairs;
  std::map<std::string, std::vector<Msd>> gold;
  // Build through the public constructor path instead: synthesize directly.
  SlotMsdGraph g;
  std::set<std::int64_t> slots;
  std::set<Msd> msds;
  for (const auto& [s, m, w] : edges) {
    (void)w;
    slots.insert(s);
    msds.insert(Msd::parse(m));
  }
  g.slots.assign(slots.begin(), slots.end());
  g.msds.assign(msds.begin(), msds.end());
  auto si = [&](std::int64_t s) {
    return static_cast<std::size_t>(std::lower_bound(g.slots.begin(), g.slots.end(), s) - g.slots.begin());
  };
  auto mi = [&](const Msd& m) {
    return static_cast<std::size_t>(std::lower_bound(g.msds.begin(), g.msds.end(), m) - g.msds.begin());
  };
  for (const auto& [s, m, w] : edges) g.weights[{si(s), mi(Msd::parse(m))}] = w;
  return g;
}

}  // namespace

TEST_CASE("build_graph counts target types once per slot-msd") {
  std::vector<InflectionPair> pairs;
  auto add = [&](const char* src, const char* tgt, std::int64_t slot) {
    InflectionPair p;
    p.source = WordForm::make(src);
    p.target = WordForm::make(tgt);
    p.slot = slot;
    pairs.push_back(p);
  };
  add("a", "tragt", 2);
  add("b", "tragt", 2);  // same type again: no extra weight
  std::map<std::string, std::vector<Msd>> gold;
  gold["tragt"] = {Msd::parse("V;IMP;2;PL"), Msd::parse("V;IND;PRS;2;PL")};

  SlotMsdGraph g = build_graph(pairs, gold);
  REQUIRE(g.slots.size() == 1);
  REQUIRE(g.msds.size() == 2);
  CHECK(g.weight_at(0, 0) == 1);
  CHECK(g.weight_at(0, 1) == 1);

  // an erroneous extra type adds its own edge
  add("c", "fehler", 2);
  gold["fehler"] = {Msd::parse("N;ACC;PL")};
  g = build_graph(pairs, gold);
  REQUIRE(g.msds.size() == 3);
  bool found = false;
  for (std::size_t j = 0; j < g.msds.size(); ++j) {
    if (g.msds[j].canonical() == "N;ACC;PL") {
      found = g.weight_at(0, j) == 1;
    }
  }
  CHECK(found);

  CHECK(build_graph({}, {}).slots.empty());
  // types with no gold MSDs contribute no edges
  add("d", "unknown", 3);
  g = build_graph(pairs, gold);
  CHECK(g.slots.size() == 1);
}

TEST_CASE("max_matching picks the optimal assignment") {
  // spec example: (s2,A)=3,(s2,B)=5,(s7,B)=2,(s7,C)=4 -> {s2->B, s7->C}, 9
  SlotMsdGraph g = make_graph({{2, "A", 3}, {2, "B", 5}, {7, "B", 2}, {7, "C", 4}});
  SlotMapping m = max_matching(g);
  CHECK(m.total_weight == 9);
  REQUIRE(m.assignment.count(2));
  REQUIRE(m.assignment.count(7));
  CHECK(m.assignment.at(2).msd.canonical() == "B");
  CHECK(m.assignment.at(7).msd.canonical() == "C");
}

TEST_CASE("diagonal graph matches identically") {
  SlotMsdGraph g = make_graph({{0, "M0", 1}, {1, "M1", 1}, {2, "M2", 1}});
  SlotMapping m = max_matching(g);
  CHECK(m.total_weight == 3);
  CHECK(m.assignment.at(0).msd.canonical() == "M0");
  CHECK(m.assignment.at(1).msd.canonical() == "M1");
  CHECK(m.assignment.at(2).msd.canonical() == "M2");
}

TEST_CASE("competition leaves the lighter slot unmatched") {
  SlotMsdGraph g = make_graph({{1, "X", 5}, {2, "X", 2}});
  SlotMapping m = max_matching(g);
  CHECK(m.total_weight == 5);
  CHECK(m.assignment.count(1) == 1);
  CHECK(m.assignment.count(2) == 0);
}

TEST_CASE("ties break lexicographically by slot then MSD") {
  // both assignments weigh 2; slot 1 must get the smaller MSD text "A"
  SlotMsdGraph g = make_graph({{1, "A", 1}, {1, "B", 1}, {2, "A", 1}, {2, "B", 1}});
  SlotMapping m = max_matching(g);
  CHECK(m.total_weight == 2);
  CHECK(m.assignment.at(1).msd.canonical() == "A");
  CHECK(m.assignment.at(2).msd.canonical() == "B");
}

TEST_CASE("matching equals brute force on random graphs") {
  Rng rng(123);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t ns = 1 + rng.index(7), nm = 1 + rng.index(7);
    std::vector<std::tuple<std::int64_t, std::string, std::int64_t>> edges;
    SlotMsdGraph g;
    for (std::size_t i = 0; i < ns; ++i) g.slots.push_back(static_cast<std::int64_t>(i));
    for (std::size_t j = 0; j < nm; ++j) g.msds.push_back(Msd::parse("M" + std::to_string(j)));
    for (std::size_t i = 0; i < ns; ++i) {
      for (std::size_t j = 0; j < nm; ++j) {
        if (rng.bernoulli(0.5)) g.weights[{i, j}] = 1 + static_cast<std::int64_t>(rng.index(9));
      }
    }
    const SlotMapping m = max_matching(g);
    CHECK(m.total_weight == testing::brute_force_max_weight(g));
    // injectivity
    std::set<std::string> used;
    std::int64_t sum = 0;
    for (const auto& [slot, e] : m.assignment) {
      (void)slot;
      CHECK(used.insert(e.msd.canonical()).second);
      sum += e.weight;
    }
    CHECK(sum == m.total_weight);
  }
}

TEST_CASE("matching is deterministic") {
  Rng rng(9);
  SlotMsdGraph g;
  for (std::size_t i = 0; i < 6; ++i) g.slots.push_back(static_cast<std::int64_t>(i * 3));
  for (std::size_t j = 0; j < 6; ++j) g.msds.push_back(Msd::parse("M" + std::to_string(j)));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      if (rng.bernoulli(0.6)) g.weights[{i, j}] = 1 + static_cast<std::int64_t>(rng.index(4));
  const std::string once = serialize_slot_mapping(max_matching(g));
  const std::string twice = serialize_slot_mapping(max_matching(g));
  CHECK(once == twice);
}

TEST_CASE("apply_mapping fills predictions and filters unmatched slots") {
  std::vector<InflectionPair> pairs(3);
  pairs[0].source = WordForm::make("a");
  pairs[0].target = WordForm::make("b");
  pairs[0].slot = 2;
  pairs[1].source = WordForm::make("c");
  pairs[1].target = WordForm::make("d");
  pairs[1].slot = 9;
  pairs[2].source = WordForm::make("e");
  pairs[2].target = WordForm::make("f");
  pairs[2].slot = 2;

  SlotMapping m;
  m.assignment[2] = {Msd::parse("V;IND;PRS;2;PL"), 5};
  m.total_weight = 5;
  apply_mapping(pairs, m);
  CHECK(pairs[0].predicted_msd->canonical() == "V;IND;PRS;2;PL");
  CHECK(pairs[2].predicted_msd->canonical() == "V;IND;PRS;2;PL");
  CHECK_FALSE(pairs[1].predicted_msd.has_value());
  REQUIRE(pairs[1].annotation.has_value());
  CHECK(pairs[1].annotation->is_filtered());
  CHECK(*pairs[1].annotation->reason == FilterReason::UnmatchedSlot);

  // empty mapping filters everything
  SlotMapping empty;
  apply_mapping(pairs, empty);
  for (const auto& p : pairs) {
    CHECK(p.annotation->is_filtered());
  }
}

TEST_CASE("slot mapping serialization round trips") {
  SlotMapping m;
  m.assignment[2] = {Msd::parse("V;IMP;2;PL"), 7};
  m.assignment[5] = {Msd::parse("N;ACC;PL"), 3};
  m.total_weight = 10;
  const std::string text = serialize_slot_mapping(m);
  SlotMapping back = parse_slot_mapping_text(text);
  CHECK(back.assignment.size() == 2);
  CHECK(back.total_weight == 10);
  CHECK(back.assignment.at(2).msd == m.assignment.at(2).msd);
  CHECK(serialize_slot_mapping(back) == text);

  CHECK_THROWS_AS(parse_slot_mapping_text("1\tA\t2\n2\tA\t3\n"), Error);  // not injective
}
