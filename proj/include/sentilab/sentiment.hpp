#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace sentilab {

// Enum order doubles as the tie-break order everywhere a decision ties.
enum class Sentiment { Positive = 0, Negative = 1, Neutral = 2 };

inline constexpr std::array<Sentiment, 3> kAllSentiments{Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral};

constexpr std::size_t index_of(Sentiment s) noexcept { return static_cast<std::size_t>(s); }

constexpr std::string_view to_string(Sentiment s) noexcept {
  switch (s) {
    case Sentiment::Positive: return "Positive";
    case Sentiment::Negative: return "Negative";
    case Sentiment::Neutral: return "Neutral";
  }
  return "?";
}

inline std::optional<Sentiment> parse_sentiment(std::string_view s) noexcept {
  if (s == "Positive" || s == "positive") return Sentiment::Positive;
  if (s == "Negative" || s == "negative") return Sentiment::Negative;
  if (s == "Neutral" || s == "neutral") return Sentiment::Neutral;
  return std::nullopt;
}

}  // namespace sentilab
