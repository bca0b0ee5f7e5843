#pragma once

#include <string>
#include <string_view>

// ASCII-only helpers. Bytes >= 0x80 are never letters or digits here, so
// results do not depend on the C locale.
namespace duprompt::text {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_alnum(char c) { return is_digit(c) || is_alpha(c); }
inline bool is_word(char c) { return is_alnum(c) || c == '_'; }
inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }
inline char to_upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = to_lower(c);
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Last line of `s` that is non-empty after trimming; empty view if none.
inline std::string_view last_nonempty_line(std::string_view s) {
  while (!s.empty()) {
    const auto nl = s.rfind('\n');
    const auto line = nl == std::string_view::npos ? s : s.substr(nl + 1);
    if (!trim(line).empty()) return trim(line);
    if (nl == std::string_view::npos) break;
    s = s.substr(0, nl);
  }
  return {};
}

}  // namespace duprompt::text
