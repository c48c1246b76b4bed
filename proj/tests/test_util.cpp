#include <doctest.h>

#include <set>
#include <vector>

#include "rdg/util/errors.hpp"
#include "rdg/util/rng.hpp"
#include "rdg/util/sha256.hpp"
#include "rdg/util/text.hpp"

using namespace rdg;

TEST_CASE("sha256 matches the FIPS 180-2 test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("splitmix64 reproduces the reference sequence from state 0") {
  std::uint64_t s = 0;
  CHECK(splitmix64(s) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(s) == 0x6E789E6AA1B965F4ULL);
  CHECK(splitmix64(s) == 0x06C45D188009454FULL);
}

TEST_CASE("uniform_below stays in range and reaches every value") {
  std::mt19937_64 gen(7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    auto v = uniform_below(gen, 13);
    REQUIRE(v < 13);
    seen.insert(v);
  }
  CHECK(seen.size() == 13);
  CHECK(uniform_below(gen, 0) == 0);
  CHECK(uniform_below(gen, 1) == 0);
}

TEST_CASE("word tokens split on punctuation and fold case") {
  CHECK(word_tokens("South-Eastern Asia") == std::vector<std::string>{"south", "eastern", "asia"});
  CHECK(word_tokens("  Côte d'Ivoire ") == std::vector<std::string>{"côte", "d", "ivoire"});
  CHECK(normalize_phrase("The  UNITED states!") == "the united states");
  CHECK(casefold("AbC") == "abc");
}

// Independent recursive definition; exponential, so only for short strings.
static std::size_t lev_oracle(std::string_view a, std::string_view b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::size_t sub = lev_oracle(a.substr(1), b.substr(1)) + (a[0] == b[0] ? 0 : 1);
  return std::min({sub, lev_oracle(a.substr(1), b) + 1, lev_oracle(a, b.substr(1)) + 1});
}

TEST_CASE("edit distance agrees with the recursive definition") {
  const char* words[] = {"", "a", "canada", "cnada", "kanada", "chad", "chile", "child", "mali", "malta"};
  for (auto a : words)
    for (auto b : words) CHECK_MESSAGE(edit_distance(a, b) == lev_oracle(a, b), a << " / " << b);
}

TEST_CASE("errors carry their wire code") {
  CHECK(NotFoundError("x").code() == "not_found");
  CHECK(GuessLimitError("x").code() == "guess_limit");
  CHECK(SeqError("x").code() == "seq");
  CHECK_THROWS_AS(throw RoleError("nope"), Error);
}
