#include "doctest.h"

#include "common.hpp"

using namespace atlas;

TEST_CASE("parse and print itineraries") {
  const Itinerary a = parse_itinerary("1,2|0");
  CHECK(a.preperiod == std::vector<int>{1, 2});
  CHECK(a.period == std::vector<int>{0});
  CHECK(a.is_preperiodic());
  CHECK(a.to_string() == "1,2|0");

  const Itinerary b = parse_itinerary("-3,4");
  CHECK(b.is_finite_word());
  CHECK(b.preperiod == std::vector<int>{-3, 4});

  const Itinerary c = parse_itinerary("|0,-1");
  CHECK(c.is_periodic());
  CHECK(c.period == std::vector<int>{0, -1});
  CHECK(c.to_string() == "|0,-1");

  CHECK(parse_itinerary("\xE2\x88\x9E").is_infinity_terminal);
  CHECK(parse_itinerary(Itinerary::infinity().to_string()) == Itinerary::infinity());
  for (const char* w : {"0", "|1", "2|0", "0,1,-1|2,3", "-7"}) CHECK(parse_itinerary(w).to_string() == w);
}

TEST_CASE("malformed itineraries") {
  for (const char* w : {"0,|", "", "|", "1,,2", "a", "1|", "1|2|3", "--1", "1, 2"}) {
    try {
      (void)parse_itinerary(w);
      FAIL("accepted " << w);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ParseError);
    }
  }
}

TEST_CASE("shift") {
  CHECK(parse_itinerary("3").shift() == Itinerary::infinity());
  CHECK(parse_itinerary("1,2").shift() == parse_itinerary("2"));
  CHECK(parse_itinerary("1|0").shift() == parse_itinerary("|0"));
  CHECK(parse_itinerary("|1,2,3").shift() == parse_itinerary("|2,3,1"));
  CHECK(Itinerary::infinity().shift() == Itinerary::infinity());
  const Itinerary p = parse_itinerary("4|5,6");
  for (std::size_t k = 0; k < 8; ++k) CHECK(p.shift().symbol(k) == p.symbol(k + 1));
}
