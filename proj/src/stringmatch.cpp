#include "evgeo/stringmatch.hpp"

namespace evgeo {

void ByteTrie::insert(std::string_view key, std::int32_t value) {
    if (key.empty()) return;
    if (nodes_.empty()) nodes_.emplace_back();
    std::int32_t node = 0;
    for (char ch : key) {
        const auto byte = static_cast<unsigned char>(ch);
        auto it = nodes_[node].children.find(byte);
        if (it == nodes_[node].children.end()) {
            const auto next = static_cast<std::int32_t>(nodes_.size());
            nodes_[node].children.emplace(byte, next);
            nodes_.emplace_back();
            node = next;
        } else {
            node = it->second;
        }
    }
    // First insertion wins; duplicates keep the original value.
    if (nodes_[node].value < 0) nodes_[node].value = value;
}

ByteTrie::Match ByteTrie::longest_match(std::string_view text, std::size_t pos) const {
    Match best;
    if (nodes_.empty()) return best;
    std::int32_t node = 0;
    for (std::size_t i = pos; i < text.size(); ++i) {
        const auto byte = static_cast<unsigned char>(text[i]);
        auto it = nodes_[node].children.find(byte);
        if (it == nodes_[node].children.end()) break;
        node = it->second;
        if (nodes_[node].value >= 0) {
            best.length = i - pos + 1;
            best.value = nodes_[node].value;
        }
    }
    return best;
}

}  // namespace evgeo
