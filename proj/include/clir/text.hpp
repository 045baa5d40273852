#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace clir {

using TokenSeq = std::vector<std::string>;

struct TokenizerRules {
  bool lowercase = true;
  bool strip_edge_punct = true;
};

// Splits UTF-8 text on Unicode whitespace, lowercases (ASCII, Latin-1,
// Latin Extended-A, Greek and Cyrillic letter ranges), and strips leading and
// trailing punctuation from each token. Empty tokens are dropped; order is
// preserved. Throws ParseError on malformed UTF-8.
TokenSeq tokenize(std::string_view raw, const TokenizerRules& rules = {});

// Joins tokens with single spaces (inverse direction of the wire formats).
std::string join_tokens(const TokenSeq& tokens);

namespace detail {
// Decodes one UTF-8 code point starting at `pos`; advances `pos`.
char32_t decode_utf8(std::string_view s, std::size_t& pos);
void encode_utf8(char32_t cp, std::string& out);
bool is_unicode_space(char32_t cp);
bool is_edge_punct(char32_t cp);
char32_t to_lower(char32_t cp);
}  // namespace detail

}  // namespace clir
