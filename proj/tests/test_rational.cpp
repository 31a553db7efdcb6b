#include "doctest.h"
#include "exist/rational.hpp"
#include "exist/rng.hpp"

using namespace exist;

TEST_CASE("decimal literals parse exactly") {
  CHECK(rat_from_decimal("0.95") == Rat(19, 20));
  CHECK(rat_from_decimal("3") == Rat(3));
  CHECK(rat_from_decimal("-2.5") == Rat(-5, 2));
  CHECK(rat_from_decimal(".5") == Rat(1, 2));
  CHECK(rat_from_decimal("7/4") == Rat(7, 4));
  CHECK(rat_from_decimal("2.625") == Rat(21, 8));
}

TEST_CASE("double conversion is exact and round-trips") {
  CHECK(rat_from_double(0.5) == Rat(1, 2));
  CHECK(rat_from_double(-3.0) == Rat(-3));
  double x = 0.1;
  CHECK(rat_to_double(rat_from_double(x)) == x);
}

TEST_CASE("floor, ceil, rounding") {
  CHECK(rat_floor(Rat(7, 2)) == 3);
  CHECK(rat_floor(Rat(-7, 2)) == -4);
  CHECK(rat_ceil(Rat(7, 2)) == 4);
  CHECK(rat_round_digits(Rat(19, 20), 0) == Rat(1));
  CHECK(rat_round_digits(Rat(19, 20), 1) == Rat(1));  // 9.5 tenths, half away from zero
  CHECK(rat_round_digits(Rat(19, 20), 2) == Rat(19, 20));
  CHECK(rat_round_digits(rat_from_double(1.04), 1) == Rat(1));
  CHECK(rat_round_digits(rat_from_double(-0.27), 1) == Rat(-3, 10));
  CHECK(rat_round_digits(Rat(1, 2), 0) == Rat(1));  // half away from zero
  CHECK(rat_round_digits(Rat(-1, 2), 0) == Rat(-1));
}

TEST_CASE("pretty strings") {
  CHECK(rat_to_pretty_string(Rat(19, 20)) == "0.95");
  CHECK(rat_to_pretty_string(Rat(1, 3)) == "1/3");
  CHECK(rat_to_pretty_string(Rat(-3)) == "-3");
  CHECK(rat_to_pretty_string(Rat(0)) == "0");
  CHECK(rat_to_pretty_string(Rat(21, 8)) == "2.625");
}

TEST_CASE("random streams are deterministic and split independently") {
  RandomStream a(42);
  RandomStream b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RandomStream root(7);
  RandomStream c1 = root.split(0);
  RandomStream c2 = root.split(1);
  CHECK(c1.next_u64() != c2.next_u64());

  // split does not advance the parent
  RandomStream p(9);
  uint64_t before = RandomStream(9).next_u64();
  (void)p.split(3);
  CHECK(p.next_u64() == before);
}

TEST_CASE("uniform helpers stay in range") {
  RandomStream r(1);
  for (int i = 0; i < 1000; ++i) {
    double u = r.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    int64_t k = r.uniform_int(-3, 5);
    CHECK(k >= -3);
    CHECK(k <= 5);
  }
}
