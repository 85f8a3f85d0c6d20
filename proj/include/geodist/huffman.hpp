#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "geodist/corpus.hpp"

namespace geodist {

/// Prefix-free binary codes for the hierarchical softmax. codes[w][t] is
/// the branch bit taken at depth t on the root-to-leaf walk for word w,
/// and paths[w][t] is the internal node (0-based, |V|-1 of them) making
/// that decision.
///
/// Construction repeatedly merges the two lowest-count nodes. Ties break
/// on smallest creation index (leaves first, in vocabulary order, then
/// internal nodes in creation order); of the two merged nodes the one
/// with the smaller creation index becomes the left child and codes bit 0.
struct HuffmanTree {
  std::vector<std::vector<std::uint8_t>> codes;
  std::vector<std::vector<std::uint32_t>> paths;
  std::size_t internal_nodes = 0;

  std::size_t size() const { return codes.size(); }
  bool operator==(const HuffmanTree&) const = default;
};

HuffmanTree build_huffman_tree(std::span<const std::uint64_t> counts);
HuffmanTree build_huffman_tree(const Vocabulary& vocab);

}  // namespace geodist
