#pragma once

#include <string>
#include <vector>

namespace sqa {

// Byte-level tokenizer: ids 0..255 are raw bytes, plus BOS and EOS specials.
// Lossless and asset-free; every UTF-8 string round-trips.
namespace tokenizer {

inline constexpr int kByteVocab = 256;
inline constexpr int kBos = 256;
inline constexpr int kEos = 257;
inline constexpr int kVocabSize = 258;

// Byte ids only, no specials.
std::vector<int> encode(const std::string& text);

// Drops specials, maps byte ids back to bytes.
std::string decode(const std::vector<int>& ids);

}  // namespace tokenizer

}  // namespace sqa
