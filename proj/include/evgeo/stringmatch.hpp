#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

namespace evgeo {

// Byte-level trie for longest-match lookup of a fixed name set inside running
// text. Values are caller-supplied indices (>= 0); -1 marks a non-terminal node.
class ByteTrie {
   public:
    void insert(std::string_view key, std::int32_t value);

    struct Match {
        std::size_t length = 0;     // bytes consumed; 0 = no match
        std::int32_t value = -1;
    };

    // Longest key that starts at text[pos]. Ties cannot occur (keys are unique).
    Match longest_match(std::string_view text, std::size_t pos) const;

    bool empty() const { return nodes_.empty(); }

   private:
    struct Node {
        std::map<unsigned char, std::int32_t> children;
        std::int32_t value = -1;
    };
    std::vector<Node> nodes_;
};

}  // namespace evgeo
