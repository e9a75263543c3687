#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedfwd/dataset.hpp"
#include "fedfwd/rng.hpp"

namespace fedfwd {

/// Disjoint assignment of training-set row indices to clients. Lists are
/// pairwise disjoint, cover every index, and no client is empty.
struct ClientPartition {
  std::vector<std::vector<std::size_t>> assignments;

  std::size_t num_clients() const { return assignments.size(); }
  const std::vector<std::size_t>& client(std::size_t c) const { return assignments[c]; }
};

/// Random permutation split into m near-equal chunks (sizes differ by <= 1).
/// Requires 1 <= m_clients <= n_samples.
ClientPartition partition_iid(std::size_t n_samples, std::size_t m_clients, RngStream& rng);

/// Pathological label-skewed split: sort indices by label, slice into
/// m * shards_per_client near-equal shards, deal shards_per_client random
/// shards to each client. Requires m * shards_per_client <= sample count;
/// when the count does not divide evenly the first (n mod shards) shards
/// take one extra index.
ClientPartition partition_noniid(std::span<const LabeledSample> samples,
                                 std::size_t m_clients, std::size_t shards_per_client,
                                 RngStream& rng);

}  // namespace fedfwd
