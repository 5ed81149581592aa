#pragma once

#include <cstdint>
#include <string_view>

namespace evgeo {

// Coarse script buckets used for token boundaries. Anything not letter-like
// (punctuation, symbols) is a separator, like whitespace.
enum class ScriptClass { separator, latin, han, kana, hangul, other_letter };

// Decodes one UTF-8 code point starting at byte offset `pos`. Returns the code
// point and writes the byte length to `len`. Malformed sequences decode as
// U+FFFD with length 1 so scanning always advances.
char32_t utf8_decode(std::string_view text, std::size_t pos, std::size_t* len);

bool is_space(char32_t cp);
ScriptClass script_class(char32_t cp);

}  // namespace evgeo
