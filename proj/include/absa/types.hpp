#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace absa {

/// Sentiment polarity with a fixed index encoding that is stable across
/// save/load: Positive=0, Neutral=1, Negative=2.
enum class Polarity : int { Positive = 0, Neutral = 1, Negative = 2 };

inline constexpr int kNumPolarities = 3;

const char* to_string(Polarity p);

/// Parses the on-disk polarity tags "POS" / "NEU" / "NEG".
Polarity parse_polarity(const std::string& s);

/// Half-open token-index interval [start, end), context-relative.
struct TokenSpan {
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool overlaps(const TokenSpan& other) const {
    return start < other.end && other.start < end;
  }
  auto operator<=>(const TokenSpan&) const = default;
};

std::string to_string(const TokenSpan& s);

}  // namespace absa
