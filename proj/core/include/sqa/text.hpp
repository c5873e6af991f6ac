#pragma once

#include <string>
#include <vector>

namespace sqa {

// Lowercase ASCII letters in place of uppercase; other bytes untouched.
std::string lowercase(const std::string& s);

// Collapse whitespace runs to single spaces and trim the ends.
std::string normalize_whitespace(const std::string& s);

// Drop ASCII punctuation characters entirely (keeps letters, digits, whitespace).
std::string strip_punctuation(const std::string& s);

// Metric-style normalization: lowercase + strip punctuation + collapse whitespace.
std::string normalize_for_match(const std::string& s);

// Whitespace-delimited tokens of the normalized string.
std::vector<std::string> word_tokens(const std::string& s);

// The bundled 50-entry stopword list (lowercase).
const std::vector<std::string>& stopword_list();
bool is_stopword(const std::string& word);

// Normalized tokens with stopwords removed.
std::vector<std::string> content_words(const std::string& s);

// Shortest decimal string that round-trips the value (std::to_chars).
std::string format_double(double v);

}  // namespace sqa
