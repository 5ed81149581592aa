#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace evgeo {

// FNV-1a, seedable. The only string hash in the project; embedding buckets,
// sign hashes, and config hashes all go through it so outputs are
// reproducible across platforms.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0) {
    std::uint64_t h = 14695981039346656037ull ^ (seed * 0x9E3779B97F4A7C15ull);
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Uniform double in [0, 1) from a 64-bit generator, independent of
// distribution implementations in the standard library.
template <typename Rng>
double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Writes content to path via a temporary file in the same directory plus an
// atomic rename.
void atomic_write_file(const std::string& path, const std::string& content);

// Calls fn(line_number, line) for each line; skips blank lines.
void for_each_line(const std::string& path,
                   const std::function<void(long, const std::string&)>& fn);

std::string read_file(const std::string& path);

}  // namespace evgeo
