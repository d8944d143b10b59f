#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trajnav/env/environment.hpp"

namespace trajnav::env {

using TokenId = std::int32_t;

// Landmark label l is spelled landmark_names()[l].
const std::vector<std::string>& landmark_names();

class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kMask = 1;
  static constexpr TokenId kCls = 2;
  static constexpr TokenId kSep = 3;

  explicit Vocab(const std::vector<std::string>& words);

  // Reserved tokens, motion words, then every landmark name.
  static const Vocab& standard();

  std::size_t size() const { return tokens_.size(); }
  TokenId id(std::string_view word) const;
  const std::string& token(TokenId id) const;
  bool contains(TokenId id) const { return id >= 0 && static_cast<std::size_t>(id) < size(); }

  std::vector<TokenId> encode(const std::vector<std::string>& words) const;
  std::string decode(const std::vector<TokenId>& ids) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Elevation change (radians) beyond which a clause says "up" / "down".
inline constexpr double kClimbThreshold = 0.2;

// Motion words for a hop whose bearing differs from the current heading by
// `turn` radians.
std::vector<std::string> motion_words(double turn);

// Template instruction for walking `path` starting with the given heading:
// "<motion> [up|down] to <landmark> ." per hop, then "stop at <landmark>".
std::vector<std::string> speak_words(const EnvGraph& env, const std::vector<NodeId>& path,
                                     double start_heading = 0.0);
std::vector<TokenId> speak(const EnvGraph& env, const std::vector<NodeId>& path,
                           double start_heading = 0.0, const Vocab& vocab = Vocab::standard());

}  // namespace trajnav::env
