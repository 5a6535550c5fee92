#include <doctest.h>

#include "preflib_gen.hpp"

using namespace chooserank;

TEST_CASE("10k random well-formed files parse and round-trip") {
  std::mt19937_64 rng(20240917);
  int failures = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto g = preflib_gen::generate(rng);
    try {
      const auto parsed = parse_preflib(g.text);
      const auto why = preflib_gen::mismatch(g, parsed);
      const bool round_trip = preflib_gen::same_dataset(parse_preflib(write_preflib(parsed)), parsed);
      if (!why.empty() || !round_trip) {
        if (++failures <= 3) MESSAGE("file " << i << ": " << (why.empty() ? "round trip" : why) << "\n" << g.text);
      }
    } catch (const std::exception& e) {
      if (++failures <= 3) MESSAGE("file " << i << " threw " << e.what() << "\n" << g.text);
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("mutated files fail only with library errors") {
  std::mt19937_64 rng(77);
  const std::string junk = "#:,{} \n0123456789-x\r\t";
  int foreign = 0;
  for (int i = 0; i < 5000; ++i) {
    std::string text = preflib_gen::generate(rng).text;
    const int edits = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int e = 0; e < edits && !text.empty(); ++e) {
      const auto at = std::uniform_int_distribution<std::size_t>(0, text.size() - 1)(rng);
      switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0: text[at] = junk[std::uniform_int_distribution<std::size_t>(0, junk.size() - 1)(rng)]; break;
        case 1: text.erase(at, 1); break;
        default: text.insert(at, 1, junk[std::uniform_int_distribution<std::size_t>(0, junk.size() - 1)(rng)]);
      }
    }
    try {
      (void)parse_preflib(text);
    } catch (const Error&) {
    } catch (const std::exception& e) {
      if (++foreign <= 3) MESSAGE("non-library exception " << e.what() << "\n" << text);
    }
  }
  CHECK(foreign == 0);
}
