// tests/test_emission.cc
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "doctest.h"
#include "dysflux/emission.h"
#include "dysflux/inventory.h"
#include "test_util.h"

using namespace dysflux;
namespace fs = std::filesystem;

namespace {

fs::path TempPath(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / "dysflux_test_emission";
  fs::create_directories(dir);
  return dir / name;
}

bool HasViolation(const ValidationReport &r, const std::string &needle) {
  for (const auto &v : r.violations)
    if (v.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("validation flags malformed input") {
  const auto &inv = PhonemeInventory::Default();
  std::mt19937_64 rng(1);
  EmissionInput e = dysflux::testing::RandomEmission(rng, 4, inv.size());
  CHECK(ValidateEmission(e, inv).ok());

  e.log_posteriors(2, 3) = -std::numeric_limits<double>::infinity();
  CHECK_FALSE(ValidateEmission(e, inv).ok());

  EmissionInput bad = dysflux::testing::RandomEmission(rng, 3, inv.size());
  bad.log_posteriors(1, 0) = std::nan("");
  CHECK(HasViolation(ValidateEmission(bad, inv), "non-finite value at (1, 0)"));

  bad = dysflux::testing::RandomEmission(rng, 3, inv.size());
  bad.log_posteriors(0, 0) = std::log(std::exp(bad.log_posteriors(0, 0)) + 0.2);
  CHECK(HasViolation(ValidateEmission(bad, inv), "row 0 sum"));

  bad = dysflux::testing::RandomEmission(rng, 3, inv.size());
  bad.boundary_probs[2] = 1.5;
  CHECK_FALSE(ValidateEmission(bad, inv).ok());

  bad = dysflux::testing::RandomEmission(rng, 3, 5);
  CHECK_FALSE(ValidateEmission(bad, inv).ok());
}

TEST_CASE("-inf entries are valid when the row still sums to one") {
  const auto &inv = PhonemeInventory::Default();
  EmissionInput e;
  e.log_posteriors =
      Matrix<double>(2, inv.size(), -std::numeric_limits<double>::infinity());
  e.log_posteriors(0, 1) = 0.0;
  e.log_posteriors(1, 2) = std::log(0.5);
  e.log_posteriors(1, 3) = std::log(0.5);
  e.boundary_probs = {0.0, 1.0};
  CHECK(ValidateEmission(e, inv).ok());
}

TEST_CASE("binary round trip is float32 exact") {
  const auto &inv = PhonemeInventory::Default();
  std::mt19937_64 rng(2);
  EmissionInput e = dysflux::testing::RandomEmission(rng, 7, inv.size());
  e.frame_duration = 0.01;
  e.log_posteriors(3, 5) = -std::numeric_limits<double>::infinity();
  const auto path = TempPath("a.bin").string();
  WriteEmission(path, e, inv);
  const EmissionInput back = ReadEmission(path, &inv);
  REQUIRE(back.num_frames() == 7);
  REQUIRE(back.num_phonemes() == inv.size());
  CHECK(back.frame_duration == doctest::Approx(0.01));
  for (std::size_t t = 0; t != 7; ++t) {
    for (std::size_t k = 0; k != inv.size(); ++k) {
      CHECK(back.log_posteriors(t, k) ==
            static_cast<double>(static_cast<float>(e.log_posteriors(t, k))));
    }
    CHECK(back.boundary_probs[t] ==
          static_cast<double>(static_cast<float>(e.boundary_probs[t])));
  }
}

TEST_CASE("CSV round trip") {
  const auto &inv = PhonemeInventory::Default();
  std::mt19937_64 rng(3);
  EmissionInput e = dysflux::testing::RandomEmission(rng, 5, inv.size());
  e.log_posteriors(0, 0) = -std::numeric_limits<double>::infinity();
  const EmissionInput back = ParseEmissionCsv(FormatEmissionCsv(e, inv), &inv);
  CHECK(back.log_posteriors == e.log_posteriors);
  CHECK(back.boundary_probs == e.boundary_probs);
  CHECK(back.frame_duration == e.frame_duration);

  const auto path = TempPath("a.csv").string();
  std::ofstream(path) << FormatEmissionCsv(e, inv);
  CHECK(ReadEmission(path, &inv).log_posteriors == e.log_posteriors);
}

TEST_CASE("read errors") {
  const auto &inv = PhonemeInventory::Default();
  const auto path = TempPath("junk.bin").string();
  std::ofstream(path) << "garbage that is not an emission";
  CHECK_THROWS_WITH_AS(ReadEmission(path, &inv), doctest::Contains("bad emission magic"),
                       DataError);
  CHECK_THROWS_AS(ReadEmission(TempPath("missing.bin").string(), &inv), DataError);
  CHECK_THROWS_AS(ParseEmissionCsv("boundary,AA\n0.5,0\n", &inv), DataError);
}

TEST_CASE("slice") {
  std::mt19937_64 rng(4);
  const EmissionInput e = dysflux::testing::RandomEmission(rng, 10, 3);
  const EmissionInput s = e.Slice(2, 6);
  CHECK(s.num_frames() == 4);
  CHECK(s.log_posteriors(0, 1) == e.log_posteriors(2, 1));
  CHECK(s.boundary_probs[3] == e.boundary_probs[5]);
  CHECK_THROWS_AS(e.Slice(6, 2), DataError);
}
