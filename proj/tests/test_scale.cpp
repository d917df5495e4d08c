#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <shrutisense/scale.hpp>

using namespace shruti;

TEST_CASE("default 22-shruti table") {
  const ShrutiScale& s = default_scale();
  CHECK(s.size() == 22);
  const std::vector<double> expect = {0,   90,  112, 182, 204, 294, 316, 386,
                                      408, 498, 520, 590, 612, 702, 792, 814,
                                      884, 906, 996, 1018, 1088, 1110};
  for (int i = 0; i < 22; ++i) CHECK(s.cent(i) == expect[(size_t)i]);
  CHECK(min_interval(s) == doctest::Approx(22.0));
  CHECK(s.tonic_hz() == doctest::Approx(261.63));
}

TEST_CASE("scale construction validation") {
  CHECK_THROWS_AS(ShrutiScale({}, 261.63), ConfigError);
  CHECK_THROWS_AS(ShrutiScale({10.0, 20.0}, 261.63), ConfigError);   // first != 0
  CHECK_THROWS_AS(ShrutiScale({0.0, 50.0, 50.0}, 261.63), ConfigError);  // not increasing
  CHECK_THROWS_AS(ShrutiScale({0.0, 1200.0}, 261.63), ConfigError);  // out of octave
  CHECK_THROWS_AS(ShrutiScale({0.0, 100.0}, 0.0), ConfigError);      // bad tonic
  CHECK_NOTHROW(ShrutiScale({0.0, 100.0, 700.0}, 440.0));
}

TEST_CASE("fold_to_octave") {
  CHECK(fold_to_octave(0.0) == 0.0);
  CHECK(fold_to_octave(1234.5) == doctest::Approx(34.5));
  CHECK(fold_to_octave(-100.0) == doctest::Approx(1100.0));
  CHECK(fold_to_octave(1200.0) == 0.0);
  CHECK(fold_to_octave(-2400.0) == 0.0);
  CHECK_THROWS_AS(fold_to_octave(std::nan("")), std::invalid_argument);
}

TEST_CASE("circular distance and delta") {
  CHECK(circular_delta(10.0, 1190.0) == doctest::Approx(20.0));
  CHECK(circular_delta(1190.0, 10.0) == doctest::Approx(-20.0));
  CHECK(circular_distance(1190.0, 10.0) == doctest::Approx(20.0));
  CHECK(circular_distance(0.0, 600.0) == doctest::Approx(600.0));
  CHECK(circular_distance(5.0, 5.0) == 0.0);
  // symmetry over a grid
  for (double a : {0.0, 151.0, 599.0, 600.0, 601.0, 1199.0})
    for (double b : {3.0, 450.0, 1100.0})
      CHECK(circular_distance(a, b) == doctest::Approx(circular_distance(b, a)));
}

TEST_CASE("nearest_shruti") {
  const ShrutiScale& s = default_scale();
  SUBCASE("exact hits") {
    for (int i = 0; i < s.size(); ++i) {
      auto [id, dev] = nearest_shruti(s, s.cent(i));
      CHECK(id.index == i);
      CHECK(dev == doctest::Approx(0.0));
    }
  }
  SUBCASE("octave wrap") {
    auto [id, dev] = nearest_shruti(s, 1199.0);  // 1 cent below the tonic
    CHECK(id.index == 0);
    CHECK(dev == doctest::Approx(-1.0));
  }
  SUBCASE("tie resolves to lower index") {
    // 101 is equidistant between 90 (id 1) and 112 (id 2)
    auto [id, dev] = nearest_shruti(s, 101.0);
    CHECK(id.index == 1);
    CHECK(dev == doctest::Approx(11.0));
  }
  SUBCASE("octave offsets fold") {
    auto [id, dev] = nearest_shruti(s, 204.0 + 2 * 1200.0);
    CHECK(id.index == 4);
  }
}

TEST_CASE("cents_to_hz") {
  CHECK(cents_to_hz(440.0, 0.0) == doctest::Approx(440.0));
  CHECK(cents_to_hz(440.0, 1200.0) == doctest::Approx(880.0));
  CHECK(cents_to_hz(440.0, -1200.0) == doctest::Approx(220.0));
  CHECK(cents_to_hz(261.63, 702.0) == doctest::Approx(261.63 * std::exp2(702.0 / 1200.0)));
  const ShrutiScale& s = default_scale();
  CHECK(cents_to_hz(s, 0.0) == doctest::Approx(261.63));
}

TEST_CASE("pitch sequence helpers") {
  PitchSequence seq;
  seq.items = {204.0, std::nullopt, 386.0};
  CHECK(seq.size() == 3);
  CHECK(seq.has_missing());
  CHECK(seq.observed_count() == 2);
  PitchSequence full;
  full.items = {0.0, 90.0};
  CHECK_FALSE(full.has_missing());
}
