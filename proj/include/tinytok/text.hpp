#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tinytok::text {

// Decodes UTF-8 into Unicode scalar values.  Invalid sequences (overlong
// forms, surrogates, truncated tails) decode to U+FFFD, one replacement
// per rejected byte, so decoding never fails.
std::vector<char32_t> decode_utf8(std::string_view s);

std::string encode_utf8(const std::vector<char32_t>& cps);
void append_utf8(std::string& out, char32_t cp);

// Number of Unicode scalar values in s.
std::size_t scalar_length(std::string_view s);

// True for the Unicode whitespace set (White_Space property): ASCII space,
// tab, LF/VT/FF/CR, NEL, NBSP, ogham space mark, U+2000..U+200A, line and
// paragraph separators, narrow NBSP, medium mathematical space, ideographic
// space.
bool is_unicode_space(char32_t cp);

// Canonical composition (NFC).
std::string nfc(std::string_view s);

// Splits on runs of Unicode whitespace; empty pieces are dropped.
std::vector<std::string> split_whitespace(std::string_view s);

// NFC, then collapse every whitespace run to a single ASCII space, then trim.
// This is the canonical form used for duplicate detection.
std::string canonical_form(std::string_view s);

// Lossy lowercasing limited to ASCII letters; used for case-insensitive
// flag/file-keyword comparisons only, never for corpus text.
std::string ascii_lower(std::string_view s);

}  // namespace tinytok::text
