#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "driftwatch/errors.hpp"
#include "driftwatch/geotime.hpp"
#include "driftwatch/rng.hpp"
#include "oracles.hpp"

using namespace driftwatch;

TEST_CASE("cell_of corner and interior cases") {
  CHECK(cell_of(90.0, -180.0) == GridCell{0, 0});
  CHECK(cell_of(0.0, 0.0) == GridCell{2160, 4320});
  // floor((90 - 27.7172) * 24) = floor(1494.78...), floor((85.324 + 180) * 24) = floor(6367.77...)
  CHECK(cell_of(27.7172, 85.3240) == GridCell{1494, 6367});
  CHECK(cell_of(-90.0, 179.9999) == GridCell{4319, 8639});
}

TEST_CASE("cell_of rejects points outside the domain") {
  CHECK_THROWS_AS(cell_of(90.5, 0.0), DomainError);
  CHECK_THROWS_AS(cell_of(-90.01, 0.0), DomainError);
  CHECK_THROWS_AS(cell_of(0.0, 180.0), DomainError);
  CHECK_THROWS_AS(cell_of(0.0, -180.5), DomainError);
  CHECK_THROWS_AS(cell_of(std::nan(""), 0.0), DomainError);
}

TEST_CASE("cell_center corners") {
  const auto a = cell_center({0, 0});
  CHECK(a.lat == doctest::Approx(90.0 - 1.0 / 48).epsilon(1e-12));
  CHECK(a.lon == doctest::Approx(-180.0 + 1.0 / 48).epsilon(1e-12));
  const auto b = cell_center({4319, 8639});
  CHECK(b.lat == doctest::Approx(-90.0 + 1.0 / 48).epsilon(1e-12));
  CHECK(b.lon == doctest::Approx(180.0 - 1.0 / 48).epsilon(1e-12));
}

TEST_CASE("cell_of(cell_center(c)) == c on random cells") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const GridCell c{static_cast<int>(rng.below(kGridRows)),
                     static_cast<int>(rng.below(kGridCols))};
    const auto ll = cell_center(c);
    REQUIRE(cell_of(ll.lat, ll.lon) == c);
  }
}

TEST_CASE("cell_of agrees with plain arithmetic on random points") {
  Rng rng(12);
  for (int i = 0; i < 5000; ++i) {
    const double lat = -90.0 + 180.0 * rng.uniform();
    const double lon = -180.0 + 360.0 * rng.uniform();
    REQUIRE(cell_of(lat, lon) == oracle::grid_cell(lat, lon));
  }
}

TEST_CASE("cell names round-trip and never nest") {
  const GridCell c{1494, 6367};
  CHECK(cell_name(c) == "cell6367_1494");
  CHECK(parse_cell_name("cell6367_1494") == c);
  CHECK_FALSE(parse_cell_name("cell6367_149").has_value());
  CHECK_FALSE(parse_cell_name("cell9999_1494").has_value());
  CHECK_FALSE(parse_cell_name("sikkim").has_value());
  CHECK(cell_name({1, 2}).find(cell_name({1, 20})) == std::string::npos);
}

TEST_CASE("chebyshev distance") {
  CHECK(chebyshev_distance({5, 5}, {5, 5}) == 0);
  CHECK(chebyshev_distance({5, 5}, {6, 6}) == 1);
  CHECK(chebyshev_distance({5, 5}, {2, 7}) == 3);
}

TEST_CASE("location memory: ttl and refresh") {
  LocationMemory mem;
  CHECK(mem.remember("Sikkim", 0));
  CHECK(mem.contains("sikkim", 6 * kDay));
  CHECK(mem.contains("SIKKIM", 7 * kDay));
  CHECK_FALSE(mem.contains("sikkim", 7 * kDay + 1));
  CHECK(mem.remember("Sikkim", 6 * kDay));
  CHECK(mem.contains("sikkim", 12 * kDay));
  CHECK_FALSE(mem.remember("Ooy", 0));
  CHECK(mem.size() == 1);
}

TEST_CASE("match_locations examples") {
  LocationMemory mem;
  mem.remember("sikkim", 0);
  CHECK(mem.match_locations("Mudslide near SIKKIM border", 2 * kDay) ==
        std::vector<std::string>{"sikkim"});
  CHECK(mem.match_locations("Mudslide near SIKKIM border", 10 * kDay).empty());
  LocationMemory empty;
  CHECK(empty.match_locations("Mudslide near SIKKIM border", 0).empty());
}

TEST_CASE("match_locations is plain substring, lexicographic") {
  LocationMemory mem;
  mem.remember("Kathmandu", 0);
  mem.remember("mandu", 0);
  mem.pin("Aaaa");
  CHECK(mem.match_locations("#KATHMANDU! aaaa", 0) ==
        std::vector<std::string>{"aaaa", "kathmandu", "mandu"});
}

TEST_CASE("pinned names never expire; prune drops the rest") {
  LocationMemory mem;
  mem.pin("gazetteer");
  mem.remember("transient", 0);
  mem.prune(100 * kDay);
  CHECK(mem.size() == 1);
  CHECK(mem.contains("gazetteer", 1000 * kDay));
}

TEST_CASE("memory only shrinks with time") {
  Rng rng(3);
  LocationMemory mem;
  std::string text;
  for (int i = 0; i < 60; ++i) {
    std::string name = "loc" + std::to_string(1000 + i);
    mem.remember(name, rng.between(0, 10 * kDay));
    text += name + " ";
  }
  auto prev = mem.match_locations(text, 0);
  for (Timestamp t = kDay; t < 20 * kDay; t += kDay / 2) {
    auto cur = mem.match_locations(text, t);
    for (const auto& n : cur) {
      CHECK(std::find(prev.begin(), prev.end(), n) != prev.end());
    }
    prev = std::move(cur);
  }
}

TEST_CASE("spatiotemporal_match examples") {
  GroundTruthEvent e;
  e.lat = 27.7172;
  e.lon = 85.3240;
  e.timestamp = 10 * kDay;
  const GridCell c = cell_of(e.lat, e.lon);
  CHECK(spatiotemporal_match(c, e.timestamp + 2 * kDay, e));
  CHECK(spatiotemporal_match(c, e.timestamp + 3 * kDay, e));
  CHECK(spatiotemporal_match(c, e.timestamp - 3 * kDay, e));
  CHECK_FALSE(spatiotemporal_match(c, e.timestamp + 3 * kDay + 1, e));
  const GridCell adj{c.row, c.col + 1};
  CHECK_FALSE(spatiotemporal_match(adj, e.timestamp, e, {3 * kDay, 0}));
  CHECK(spatiotemporal_match(adj, e.timestamp, e, {3 * kDay, 1}));
}

TEST_CASE("spatiotemporal_match depends only on |dt|") {
  Rng rng(8);
  GroundTruthEvent e;
  e.timestamp = 50 * kDay;
  const GridCell c = cell_of(e.lat, e.lon);
  for (int i = 0; i < 2000; ++i) {
    const Timestamp d = rng.between(0, 5 * kDay);
    CHECK(spatiotemporal_match(c, e.timestamp + d, e) ==
          spatiotemporal_match(c, e.timestamp - d, e));
  }
}

TEST_CASE("read_gazetteer skips blank lines") {
  const auto path = std::filesystem::temp_directory_path() / "dw_gazetteer_test.txt";
  {
    std::ofstream f(path);
    f << "Sikkim\n\nGangtok\n";
  }
  CHECK(read_gazetteer(path.string()) == std::vector<std::string>{"Sikkim", "Gangtok"});
  std::filesystem::remove(path);
}
