#include "clir/text.hpp"

#include <array>

#include "clir/error.hpp"

namespace clir {
namespace detail {

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) -> unsigned char {
    return static_cast<unsigned char>(s[i]);
  };
  const unsigned char b0 = byte(pos);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xe0) == 0xc0) {
    len = 2;
    cp = b0 & 0x1f;
  } else if ((b0 & 0xf0) == 0xe0) {
    len = 3;
    cp = b0 & 0x0f;
  } else if ((b0 & 0xf8) == 0xf0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    throw ParseError("invalid UTF-8 byte at offset " + std::to_string(pos));
  }
  if (pos + len > s.size())
    throw ParseError("truncated UTF-8 sequence at offset " + std::to_string(pos));
  for (int i = 1; i < len; ++i) {
    const unsigned char b = byte(pos + i);
    if ((b & 0xc0) != 0x80)
      throw ParseError("invalid UTF-8 continuation at offset " + std::to_string(pos + i));
    cp = (cp << 6) | (b & 0x3f);
  }
  // Reject overlong encodings and surrogate code points.
  static constexpr std::array<char32_t, 5> min_cp = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < min_cp[len] || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff))
    throw ParseError("invalid UTF-8 sequence at offset " + std::to_string(pos));
  pos += len;
  return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09:
    case 0x0a:
    case 0x0b:
    case 0x0c:
    case 0x0d:
    case 0x20:
    case 0x85:
    case 0xa0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202f:
    case 0x205f:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200a;
  }
}

bool is_edge_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2f) || (cp >= 0x3a && cp <= 0x40) ||
           (cp >= 0x5b && cp <= 0x60) || (cp >= 0x7b && cp <= 0x7e);
  }
  switch (cp) {
    case 0xa1:    // inverted exclamation
    case 0xab:    // left guillemet
    case 0xbb:    // right guillemet
    case 0xbf:    // inverted question mark
    case 0x37e:   // greek question mark
    case 0x589:   // armenian full stop
    case 0x60c:   // arabic comma
    case 0x61f:   // arabic question mark
    case 0x964:   // devanagari danda
    case 0x965:
      return true;
    default:
      break;
  }
  // General punctuation, CJK symbols and fullwidth forms.
  return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205e) ||
         (cp >= 0x3001 && cp <= 0x303f) || (cp >= 0xfe50 && cp <= 0xfe6b) ||
         (cp >= 0xff01 && cp <= 0xff0f) || (cp >= 0xff1a && cp <= 0xff20) ||
         (cp >= 0xff3b && cp <= 0xff40) || (cp >= 0xff5b && cp <= 0xff65);
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0x80) return cp;
  // Latin-1 supplement uppercase letters (sans the multiplication sign).
  if (cp >= 0xc0 && cp <= 0xde && cp != 0xd7) return cp + 0x20;
  // Latin Extended-A pairs alternate between even/odd and odd/even layouts.
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14a && cp <= 0x177)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17e)) {
    return (cp % 2 == 1) ? cp + 1 : cp;
  }
  if (cp == 0x178) return 0xff;   // Y with diaeresis
  if (cp == 0x130) return 0x69;   // dotted capital I -> i
  // Greek, including the irregularly mapped accented capitals.
  if (cp >= 0x391 && cp <= 0x3ab && cp != 0x3a2) return cp + 0x20;
  if (cp == 0x386) return 0x3ac;
  if (cp >= 0x388 && cp <= 0x38a) return cp + 0x25;
  if (cp == 0x38c) return 0x3cc;
  if (cp == 0x38e || cp == 0x38f) return cp + 0x3f;
  // Cyrillic.
  if (cp >= 0x410 && cp <= 0x42f) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40f) return cp + 0x50;
  return cp;
}

}  // namespace detail

TokenSeq tokenize(std::string_view raw, const TokenizerRules& rules) {
  using namespace detail;
  TokenSeq out;
  std::vector<char32_t> word;
  const auto flush = [&] {
    if (word.empty()) return;
    std::size_t begin = 0;
    std::size_t end = word.size();
    if (rules.strip_edge_punct) {
      while (begin < end && is_edge_punct(word[begin])) ++begin;
      while (end > begin && is_edge_punct(word[end - 1])) --end;
    }
    if (begin < end) {
      std::string token;
      for (std::size_t i = begin; i < end; ++i) encode_utf8(word[i], token);
      out.push_back(std::move(token));
    }
    word.clear();
  };

  std::size_t pos = 0;
  while (pos < raw.size()) {
    char32_t cp = decode_utf8(raw, pos);
    if (is_unicode_space(cp)) {
      flush();
      continue;
    }
    if (rules.lowercase) cp = to_lower(cp);
    word.push_back(cp);
  }
  flush();
  return out;
}

std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace clir
