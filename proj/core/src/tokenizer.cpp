#include "sqa/tokenizer.hpp"

namespace sqa::tokenizer {

std::vector<int> encode(const std::string& text) {
    std::vector<int> ids;
    ids.reserve(text.size());
    for (unsigned char c : text) ids.push_back(static_cast<int>(c));
    return ids;
}

std::string decode(const std::vector<int>& ids) {
    std::string out;
    out.reserve(ids.size());
    for (int id : ids) {
        if (id >= 0 && id < kByteVocab) out.push_back(static_cast<char>(id));
    }
    return out;
}

}  // namespace sqa::tokenizer
