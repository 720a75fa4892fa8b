#pragma once

#include <cstdint>
#include <initializer_list>

namespace ebdiff {

// Seed derivation. Every random stream in the library is an std::mt19937_64
// seeded with derive_seed(parent, {tag, index...}), where derive_seed folds
// each word into the parent with the SplitMix64 finalizer. The scheme is:
//
//   ground truth          derive_seed(master, {kGroundTruth})
//   node profiles         derive_seed(master, {kProfiles})
//   replica r             derive_seed(master, {kReplica, r})
//   node k of replica r   derive_seed(replica_seed(r), {kNodeStream, k})
//
// so distinct (replica, node) pairs never share a stream, and instant i is the
// i-th draw block within the (replica, node) stream.
enum class StreamTag : std::uint64_t {
  kGroundTruth = 0x67726f756e64ULL,
  kProfiles = 0x70726f66696cULL,
  kReplica = 0x7265706c6963ULL,
  kNodeStream = 0x6e6f64657374ULL,
  kTopology = 0x746f706f6c6fULL,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = splitmix64(parent);
  for (auto w : words) h = splitmix64(h ^ splitmix64(w));
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, StreamTag tag) noexcept {
  return derive_seed(parent, {static_cast<std::uint64_t>(tag)});
}

constexpr std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) noexcept {
  return derive_seed(master, {static_cast<std::uint64_t>(StreamTag::kReplica), replica});
}

constexpr std::uint64_t node_stream_seed(std::uint64_t replica_seed_value,
                                         std::uint64_t node) noexcept {
  return derive_seed(replica_seed_value,
                     {static_cast<std::uint64_t>(StreamTag::kNodeStream), node});
}

}  // namespace ebdiff
