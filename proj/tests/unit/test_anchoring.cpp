#include <doctest.h>

#include "gridground/anchoring.hpp"
#include "gridground/errors.hpp"
#include "helpers.hpp"

using namespace gridground;

namespace {

const GridSpec kGrid{6, 6, 2, 0.1, {}};

Percept percept(const std::string& label, const Cell& c, std::vector<std::string> attrs = {}) {
  return Percept{{{label, 1.0}}, std::move(attrs), cell_center(c, kGrid), ""};
}

}  // namespace

TEST_CASE("acquire mints per-label ids that are never reused") {
  AnchorSpace s;
  CHECK(s.acquire(percept("mug", {0, 0, 0})).id == "mug-1");
  CHECK(s.acquire(percept("mug", {1, 0, 0})).id == "mug-2");
  CHECK(s.acquire(percept("pot", {2, 0, 0})).id == "pot-1");
  s.erase("mug-2");
  CHECK(s.acquire(percept("mug", {3, 0, 0})).id == "mug-3");
  CHECK_NOTHROW(s.validate());
  CHECK(s.find("mug-2") == nullptr);
  CHECK_THROWS_AS(s.get("mug-2"), Error);
}

TEST_CASE("re_acquire replaces the percept fields") {
  AnchorSpace s;
  s.acquire(percept("mug", {1, 1, 0}, {"red"}));
  s.set_time(4);
  const Anchor before = s.anchors()[0];
  s.re_acquire(percept("mug", {1, 1, 0}, {"red"}), "mug-1");
  const Anchor& after = s.anchors()[0];
  CHECK(after.id == before.id);
  CHECK(after.belief == before.belief);
  CHECK(after.position == before.position);
  CHECK(after.last_seen == 4);
  CHECK_THROWS_AS(s.re_acquire(percept("mug", {0, 0, 0}), "cup-1"), Error);
}

TEST_CASE("two-frame scripted feed") {
  const MatchSettings m{1.5, 0.5};
  AnchorSpace s;
  process_frame(s, {percept("mug", {1, 1, 0}, {"black"}), percept("apple", {4, 4, 0}, {"red"})}, m, kGrid, 0);
  REQUIRE(s.anchors().size() == 2);
  // mug moves one cell (0.1 m, inside 0.15 m); apple jumps three cells
  process_frame(s, {percept("mug", {2, 1, 0}, {"black"}), percept("apple", {1, 4, 0}, {"red"})}, m, kGrid, 1);
  REQUIRE(s.anchors().size() == 3);
  CHECK(s.get("mug-1").position == cell_center({2, 1, 0}, kGrid));
  CHECK(s.get("mug-1").last_seen == 1);
  CHECK(s.get("apple-1").position == cell_center({4, 4, 0}, kGrid));
  CHECK(s.get("apple-1").last_seen == 0);
  CHECK(s.get("apple-2").position == cell_center({1, 4, 0}, kGrid));
  CHECK(s.time() == 1);
}

TEST_CASE("match rules") {
  const MatchSettings m{1.5, 0.5};
  AnchorSpace s;
  CHECK_FALSE(match(s, percept("mug", {0, 0, 0}), m, kGrid).has_value());
  s.acquire(percept("pot", {2, 2, 0}, {"black"}));
  s.acquire(percept("mug", {4, 2, 0}, {"black"}));
  // equidistant: lexicographic id decides
  CHECK(*match(s, percept("mug", {3, 2, 0}, {"black"}), m, kGrid) == "mug-1");
  CHECK(*match(s, percept("mug", {3, 2, 0}, {"black"}), m, kGrid, {"mug-1"}) == "pot-1");
  // nearer wins regardless of id
  AnchorSpace t;
  t.acquire(percept("a", {2, 2, 0}));
  t.acquire(percept("b", {2, 3, 0}));
  Percept near_b = percept("x", {2, 3, 0});
  near_b.position.y -= 0.02;
  CHECK(*match(t, near_b, m, kGrid) == "b-1");
  // attribute overlap below threshold blocks a match
  CHECK_FALSE(match(s, percept("pot", {2, 2, 0}, {"red", "green"}), m, kGrid).has_value());
  CHECK(*match(s, percept("pot", {2, 2, 0}, {"black", "red"}), m, kGrid) == "pot-1");
}

TEST_CASE("perception") {
  const Config& c = testing::desk();
  SceneState truth;
  truth.grid = c.grid;
  truth.objects.push_back(make_object("o1", "apple", {"red"}, {1, 1, 0}, c.grid));
  truth.objects.push_back(make_object("o2", "mug", {"black"}, {3, 1, 0}, c.grid));
  truth.objects.push_back(make_object("o3", "pot", {}, {2, 4, 0}, c.grid));

  SUBCASE("identity confusion, no jitter") {
    NoiseModel clean;
    const auto ps = simulate_perception(truth, clean, 0);
    REQUIRE(ps.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(ps[i].belief == LabelBelief{{truth.objects[i].noun, 1.0}});
      CHECK(ps[i].position == truth.objects[i].position);
      CHECK(ps[i].attributes == truth.objects[i].attributes);
    }
  }
  SUBCASE("confusable classes stay inside the band") {
    NoiseModel n;
    n.confusion["apple"] = {{"apple", 0.7}, {"pear", 0.3}};
    n.seed = 9;
    int apple_top = 0;
    for (int t = 0; t < 200; ++t) {
      const auto p = simulate_perception(truth, n, t)[0];
      REQUIRE(p.belief.size() == 2);
      CHECK(p.belief[0].p >= 0.55);
      CHECK(p.belief[0].p <= 0.9);
      CHECK(p.belief[0].p + p.belief[1].p == doctest::Approx(1.0).epsilon(1e-12));
      apple_top += p.belief[0].label == "apple";
      CHECK((p.belief[0].label == "apple" ? p.belief[1].label == "pear" : p.belief[1].label == "apple"));
    }
    CHECK(apple_top > 100);
    CHECK(apple_top < 180);
  }
  SUBCASE("inverted row perceives a mug as a pot") {
    NoiseModel n;
    n.confusion["mug"] = {{"pot", 1.0}};
    n.band_low = n.band_high = 0.6;
    const auto p = simulate_perception(truth, n, 0)[1];
    CHECK(p.belief == LabelBelief{{"pot", 0.6}, {"mug", 1.0 - 0.6}});
  }
  SUBCASE("jitter is seeded") {
    NoiseModel n;
    n.position_jitter = 0.02;
    n.seed = 3;
    const auto a = simulate_perception(truth, n, 5);
    const auto b = simulate_perception(truth, n, 5);
    const auto d = simulate_perception(truth, n, 6);
    CHECK(a[0].position == b[0].position);
    CHECK_FALSE(a[0].position == d[0].position);
  }
  SUBCASE("perceive, anchor and rebuild is lossless without noise") {
    AnchorSpace s;
    const MatchSettings m{1.5, 0.5};
    process_frame(s, simulate_perception(truth, NoiseModel{}, 0), m, c.grid, 0);
    process_frame(s, simulate_perception(truth, NoiseModel{}, 1), m, c.grid, 1);
    CHECK(s.anchors().size() == 3);
    const SceneState back = anchors_to_scene(s, {}, c.grid);
    REQUIRE(back.objects.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back.objects[i].noun == truth.objects[i].noun);
      CHECK(back.objects[i].cell == truth.objects[i].cell);
      CHECK(back.objects[i].attributes == truth.objects[i].attributes);
    }
    CHECK(encode_scene(back, c.vocab) == encode_scene(truth, c.vocab));
  }
}

TEST_CASE("anchors_to_scene") {
  AnchorSpace s;
  Percept p = percept("pot", {2, 2, 0}, {"black"});
  p.belief = {{"pot", 0.6}, {"mug", 0.4}};
  s.acquire(p);
  s.acquire(percept("ball", {1, 1, 0}));
  const SceneState top = anchors_to_scene(s, {}, kGrid);
  CHECK(top.find("pot-1")->noun == "pot");
  const SceneState sel = anchors_to_scene(s, {{"pot-1", "mug"}}, kGrid);
  CHECK(sel.find("pot-1")->noun == "mug");
  CHECK(sel.find("ball-1")->noun == "ball");
  const SceneState held = anchors_to_scene(s, {}, kGrid, std::string("ball-1"));
  CHECK(held.placed().size() == 1);
  CHECK_THROWS_AS(anchors_to_scene(s, {}, kGrid, std::string("cup-9")), Error);
  s.acquire(percept("cup", {2, 2, 0}));
  try {
    anchors_to_scene(s, {}, kGrid);
    FAIL("expected CellCollision");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CellCollision);
  }
}
