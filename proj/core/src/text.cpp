#include "sqa/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <unordered_set>

namespace sqa {

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string normalize_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = true;  // leading whitespace dropped
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(static_cast<char>(c));
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::string strip_punctuation(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        if (!std::ispunct(c)) out.push_back(static_cast<char>(c));
    }
    return out;
}

std::string normalize_for_match(const std::string& s) {
    return normalize_whitespace(strip_punctuation(lowercase(s)));
}

std::vector<std::string> word_tokens(const std::string& s) {
    std::vector<std::string> tokens;
    const std::string n = normalize_for_match(s);
    std::size_t start = 0;
    while (start < n.size()) {
        std::size_t end = n.find(' ', start);
        if (end == std::string::npos) end = n.size();
        if (end > start) tokens.push_back(n.substr(start, end - start));
        start = end + 1;
    }
    return tokens;
}

const std::vector<std::string>& stopword_list() {
    static const std::vector<std::string> words = {
        "a",    "an",    "the",  "is",   "are",   "was",   "were", "be",   "been",  "being",
        "to",   "of",    "in",   "on",   "at",    "by",    "for",  "with", "from",  "as",
        "and",  "or",    "but",  "not",  "no",    "it",    "its",  "this", "that",  "these",
        "those", "he",   "she",  "they", "we",    "you",   "i",    "his",  "her",   "their",
        "our",  "your",  "what", "which", "who",  "does",  "do",   "did",  "has",   "have"};
    return words;
}

bool is_stopword(const std::string& word) {
    static const std::unordered_set<std::string> set(stopword_list().begin(), stopword_list().end());
    return set.count(word) > 0;
}

std::vector<std::string> content_words(const std::string& s) {
    std::vector<std::string> out;
    for (auto& w : word_tokens(s)) {
        if (!is_stopword(w)) out.push_back(w);
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace sqa
