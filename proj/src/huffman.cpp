#include "geodist/huffman.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace geodist {

HuffmanTree build_huffman_tree(std::span<const std::uint64_t> counts) {
  const std::size_t n = counts.size();
  if (n < 2)
    throw std::invalid_argument("huffman tree needs at least 2 words");

  struct Node {
    std::uint64_t count;
    std::uint32_t id;  // creation index: leaves 0..n-1, then internals
  };
  auto greater = [](const Node& a, const Node& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.id > b.id;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(greater)> heap(greater);
  for (std::uint32_t i = 0; i < n; ++i)
    heap.push({counts[i], i});

  // parent/bit links for every node except the final root
  const std::size_t total = 2 * n - 1;
  std::vector<std::uint32_t> parent(total, 0);
  std::vector<std::uint8_t> bit(total, 0);
  std::uint32_t next_id = static_cast<std::uint32_t>(n);
  while (heap.size() > 1) {
    Node a = heap.top();
    heap.pop();
    Node b = heap.top();
    heap.pop();
    if (a.id > b.id) std::swap(a, b);  // left child = smaller creation index
    parent[a.id] = next_id;
    bit[a.id] = 0;
    parent[b.id] = next_id;
    bit[b.id] = 1;
    heap.push({a.count + b.count, next_id});
    ++next_id;
  }
  const std::uint32_t root = next_id - 1;

  HuffmanTree tree;
  tree.internal_nodes = n - 1;
  tree.codes.resize(n);
  tree.paths.resize(n);
  for (std::uint32_t w = 0; w < n; ++w) {
    std::vector<std::uint8_t> code;
    std::vector<std::uint32_t> path;
    for (std::uint32_t node = w; node != root; node = parent[node]) {
      code.push_back(bit[node]);
      // internal nodes are numbered from 0 in the parameter matrix
      path.push_back(parent[node] - static_cast<std::uint32_t>(n));
    }
    std::reverse(code.begin(), code.end());
    std::reverse(path.begin(), path.end());
    tree.codes[w] = std::move(code);
    tree.paths[w] = std::move(path);
  }
  return tree;
}

HuffmanTree build_huffman_tree(const Vocabulary& vocab) {
  std::vector<std::uint64_t> counts;
  counts.reserve(vocab.size());
  for (WordId w = 0; w < vocab.size(); ++w) counts.push_back(vocab.count(w));
  return build_huffman_tree(counts);
}

}  // namespace geodist
