#include "fedfwd/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fedfwd {

ClientPartition partition_iid(std::size_t n_samples, std::size_t m_clients, RngStream& rng) {
  if (m_clients == 0) throw std::invalid_argument("partition_iid: zero clients");
  if (m_clients > n_samples) {
    throw std::invalid_argument("partition_iid: more clients (" +
                                std::to_string(m_clients) + ") than samples (" +
                                std::to_string(n_samples) + ")");
  }
  std::vector<std::size_t> perm(n_samples);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(perm);

  ClientPartition part;
  part.assignments.resize(m_clients);
  const std::size_t base = n_samples / m_clients;
  const std::size_t extra = n_samples % m_clients;
  std::size_t pos = 0;
  for (std::size_t c = 0; c < m_clients; ++c) {
    const std::size_t take = base + (c < extra ? 1 : 0);
    part.assignments[c].assign(perm.begin() + pos, perm.begin() + pos + take);
    pos += take;
  }
  return part;
}

ClientPartition partition_noniid(std::span<const LabeledSample> samples,
                                 std::size_t m_clients, std::size_t shards_per_client,
                                 RngStream& rng) {
  const std::size_t n = samples.size();
  if (m_clients == 0 || shards_per_client == 0) {
    throw std::invalid_argument("partition_noniid: zero clients or shards");
  }
  const std::size_t num_shards = m_clients * shards_per_client;
  if (num_shards > n) {
    throw std::invalid_argument("partition_noniid: " + std::to_string(num_shards) +
                                " shards requested but only " + std::to_string(n) +
                                " samples");
  }

  // Label-sorted order; stable so equal labels keep index order and the
  // partition is a pure function of (samples, rng).
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].label < samples[b].label;
  });

  // Near-equal shard boundaries, then deal shards at random.
  std::vector<std::size_t> shard_ids(num_shards);
  std::iota(shard_ids.begin(), shard_ids.end(), std::size_t{0});
  rng.shuffle(shard_ids);

  const std::size_t base = n / num_shards;
  const std::size_t extra = n % num_shards;
  std::vector<std::size_t> shard_begin(num_shards + 1, 0);
  for (std::size_t s = 0; s < num_shards; ++s) {
    shard_begin[s + 1] = shard_begin[s] + base + (s < extra ? 1 : 0);
  }

  ClientPartition part;
  part.assignments.resize(m_clients);
  for (std::size_t c = 0; c < m_clients; ++c) {
    auto& assigned = part.assignments[c];
    for (std::size_t k = 0; k < shards_per_client; ++k) {
      const std::size_t s = shard_ids[c * shards_per_client + k];
      assigned.insert(assigned.end(), order.begin() + shard_begin[s],
                      order.begin() + shard_begin[s + 1]);
    }
  }
  return part;
}

}  // namespace fedfwd
