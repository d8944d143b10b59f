#include "trajnav/env/language.hpp"

#include <cmath>

#include "trajnav/core/error.hpp"

namespace trajnav::env {

const std::vector<std::string>& landmark_names() {
  static const std::vector<std::string> names = {
      "sofa",   "lamp",  "table", "chair",  "door",     "window", "stairs", "plant",
      "bed",    "sink",  "oven",  "fridge", "mirror",   "shelf",  "desk",   "rug",
      "piano",  "clock", "vase",  "bench",  "painting", "tv",     "bathtub", "fireplace"};
  return names;
}

Vocab::Vocab(const std::vector<std::string>& words) {
  for (const char* reserved : {"[PAD]", "[MASK]", "[CLS]", "[SEP]"}) tokens_.emplace_back(reserved);
  for (const auto& w : words) tokens_.push_back(w);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second)
      throw VocabError("duplicate token '" + tokens_[i] + "'");
  }
}

const Vocab& Vocab::standard() {
  static const Vocab vocab = [] {
    std::vector<std::string> words = {"go", "forward", "turn", "left", "right", "around",
                                      "up", "down",    "to",   "stop", "at",    "."};
    for (const auto& name : landmark_names()) words.push_back(name);
    return Vocab(words);
  }();
  return vocab;
}

TokenId Vocab::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) throw VocabError("unknown word '" + std::string(word) + "'");
  return it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (!contains(id)) throw VocabError("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

std::vector<TokenId> Vocab::encode(const std::vector<std::string>& words) const {
  std::vector<TokenId> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(id(w));
  return out;
}

std::string Vocab::decode(const std::vector<TokenId>& ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

std::vector<std::string> motion_words(double turn) {
  const double t = wrap_angle(turn);
  if (std::abs(t) < kPi / 4) return {"go", "forward"};
  if (t >= kPi / 4 && t < 3 * kPi / 4) return {"turn", "left"};
  if (t <= -kPi / 4 && t > -3 * kPi / 4) return {"turn", "right"};
  return {"turn", "around"};
}

std::vector<std::string> speak_words(const EnvGraph& env, const std::vector<NodeId>& path,
                                     double start_heading) {
  if (path.size() < 2) {
    throw SpeakerError("cannot describe a path of " + std::to_string(path.size()) + " node(s)");
  }
  const auto& names = landmark_names();
  auto name_of = [&](NodeId n) -> const std::string& {
    const int l = env.landmark(n);
    if (static_cast<std::size_t>(l) >= names.size())
      throw SpeakerError("landmark label " + std::to_string(l) + " has no name");
    return names[l];
  };

  std::vector<std::string> words;
  double heading = start_heading;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!env.adjacent(path[i], path[i + 1])) {
      throw SpeakerError("path nodes " + std::to_string(path[i]) + " and " +
                         std::to_string(path[i + 1]) + " are not adjacent");
    }
    const Vec3& a = env.coord(path[i]);
    const Vec3& b = env.coord(path[i + 1]);
    const double hop = bearing(a, b);
    for (auto& w : motion_words(hop - heading)) words.push_back(std::move(w));
    const double climb = elevation(a, b);
    if (climb > kClimbThreshold) words.emplace_back("up");
    if (climb < -kClimbThreshold) words.emplace_back("down");
    words.emplace_back("to");
    words.push_back(name_of(path[i + 1]));
    words.emplace_back(".");
    heading = hop;
  }
  words.emplace_back("stop");
  words.emplace_back("at");
  words.push_back(name_of(path.back()));
  return words;
}

std::vector<TokenId> speak(const EnvGraph& env, const std::vector<NodeId>& path, double start_heading,
                           const Vocab& vocab) {
  return vocab.encode(speak_words(env, path, start_heading));
}

}  // namespace trajnav::env
