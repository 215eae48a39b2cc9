#pragma once

#include <array>
#include <optional>
#include <string>

#include "finsent/errors.hpp"

namespace finsent {

// Three-way market sentiment. The enumerator order Negative < Neutral <
// Positive is the canonical order used for serialization and for scanning
// recognizer phrases.
enum class Sentiment : int { Negative = 0, Neutral = 1, Positive = 2 };

inline constexpr std::array<Sentiment, 3> kAllSentiments = {
    Sentiment::Negative, Sentiment::Neutral, Sentiment::Positive};

inline constexpr int sentiment_index(Sentiment s) {
  return static_cast<int>(s);
}

// Polarity map used by the soft score: Negative -> -1, Neutral -> 0,
// Positive -> +1.
inline constexpr int polarity(Sentiment s) {
  return static_cast<int>(s) - 1;
}

inline const std::string& to_string(Sentiment s) {
  static const std::array<std::string, 3> names = {"negative", "neutral",
                                                   "positive"};
  return names[static_cast<std::size_t>(s)];
}

inline std::optional<Sentiment> sentiment_from_string(const std::string& name) {
  for (Sentiment s : kAllSentiments) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

inline Sentiment require_sentiment(const std::string& name,
                                   const std::string& context) {
  auto s = sentiment_from_string(name);
  if (!s) {
    throw DataError(context + ": unknown sentiment label \"" + name +
                    "\" (expected negative|neutral|positive)");
  }
  return *s;
}

}  // namespace finsent
