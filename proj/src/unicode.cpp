#include "evgeo/unicode.hpp"

namespace evgeo {

char32_t utf8_decode(std::string_view text, std::size_t pos, std::size_t* len) {
    const auto b0 = static_cast<unsigned char>(text[pos]);
    const std::size_t remaining = text.size() - pos;
    auto cont = [&](std::size_t i) {
        return i < remaining && (static_cast<unsigned char>(text[pos + i]) & 0xC0u) == 0x80u;
    };
    auto bits = [&](std::size_t i) {
        return static_cast<char32_t>(static_cast<unsigned char>(text[pos + i]) & 0x3Fu);
    };

    if (b0 < 0x80u) {
        *len = 1;
        return b0;
    }
    if ((b0 & 0xE0u) == 0xC0u && cont(1)) {
        *len = 2;
        char32_t cp = (static_cast<char32_t>(b0 & 0x1Fu) << 6) | bits(1);
        if (cp >= 0x80) return cp;
    } else if ((b0 & 0xF0u) == 0xE0u && cont(1) && cont(2)) {
        *len = 3;
        char32_t cp = (static_cast<char32_t>(b0 & 0x0Fu) << 12) | (bits(1) << 6) | bits(2);
        if (cp >= 0x800 && !(cp >= 0xD800 && cp <= 0xDFFF)) return cp;
    } else if ((b0 & 0xF8u) == 0xF0u && cont(1) && cont(2) && cont(3)) {
        *len = 4;
        char32_t cp =
            (static_cast<char32_t>(b0 & 0x07u) << 18) | (bits(1) << 12) | (bits(2) << 6) | bits(3);
        if (cp >= 0x10000 && cp <= 0x10FFFF) return cp;
    }
    *len = 1;
    return 0xFFFD;
}

bool is_space(char32_t cp) {
    switch (cp) {
        case U' ':
        case U'\t':
        case U'\n':
        case U'\r':
        case U'\f':
        case U'\v':
        case 0x00A0:  // no-break space
        case 0x1680:
        case 0x202F:
        case 0x205F:
        case 0x3000:  // ideographic space
        case 0xFEFF:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

ScriptClass script_class(char32_t cp) {
    if (is_space(cp)) return ScriptClass::separator;
    // ASCII letters/digits plus Latin-1 and extended Latin letters.
    if ((cp >= U'0' && cp <= U'9') || (cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z'))
        return ScriptClass::latin;
    if (cp < 0x80) return ScriptClass::separator;  // remaining ASCII is punctuation
    if ((cp >= 0x00C0 && cp <= 0x024F && cp != 0x00D7 && cp != 0x00F7) ||
        (cp >= 0x1E00 && cp <= 0x1EFF))
        return ScriptClass::latin;
    if ((cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
        (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0x20000 && cp <= 0x2A6DF))
        return ScriptClass::han;
    if (cp >= 0x3040 && cp <= 0x30FF) return ScriptClass::kana;
    if ((cp >= 0xAC00 && cp <= 0xD7AF) || (cp >= 0x1100 && cp <= 0x11FF))
        return ScriptClass::hangul;
    // CJK punctuation, fullwidth forms, general punctuation: separators.
    if ((cp >= 0x3000 && cp <= 0x303F) || (cp >= 0xFF00 && cp <= 0xFF0F) ||
        (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
        (cp >= 0xFF5B && cp <= 0xFF65) || (cp >= 0x2000 && cp <= 0x206F))
        return ScriptClass::separator;
    if (cp >= 0xFF10 && cp <= 0xFF19) return ScriptClass::latin;   // fullwidth digits
    if (cp >= 0xFF21 && cp <= 0xFF3A) return ScriptClass::latin;   // fullwidth A-Z
    if (cp >= 0xFF41 && cp <= 0xFF5A) return ScriptClass::latin;   // fullwidth a-z
    return ScriptClass::other_letter;
}

}  // namespace evgeo
