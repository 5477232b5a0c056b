#ifndef QNOMA_NOMA_HPP
#define QNOMA_NOMA_HPP

#include <cstdint>
#include <vector>

namespace qnoma::noma {

struct NomaConfig {
  double total_power_w = 0.1;  // 20 dBm
  int max_cluster_size = 2;    // 1..3
  double power_grid_step = 0.05;
  bool stale_csi = false;
  void validate() const;
};

// Users multiplexed on one subcarrier. Members are kept in decode order:
// descending channel gain, ties broken by ascending user id. The receiver at
// position i cancels every layer at positions > i before decoding its own.
struct Cluster {
  std::vector<int> members;
};

// Power fractions aligned with Cluster::members; sums to 1. For clusters of
// two or more, weaker members hold strictly larger fractions.
struct PowerAllocation {
  std::vector<double> fractions;
};

// Disjoint, exhaustive clustering of the user set with the equal per-cluster
// bandwidth/power split applied.
struct ClusterPlan {
  std::vector<Cluster> clusters;
  std::vector<PowerAllocation> allocations;
  double bandwidth_per_cluster_hz = 0.0;
  double power_per_cluster_w = 0.0;
};

// A set partition: blocks sorted ascending internally and ordered by smallest
// element.
using Partition = std::vector<std::vector<int>>;

// All set partitions of user_ids with block size <= max_cluster_size, in a
// fixed canonical order (lexicographic over the block-sorted representation).
// The schedulers' tie-break depends on this order. Guarded to <= 6 users.
std::vector<Partition> enumerate_partitions(const std::vector<int>& user_ids,
                                            int max_cluster_size);

// Orders a partition block into SIC decode order for the given gains.
Cluster order_cluster(const std::vector<int>& block,
                      const std::vector<double>& gain_by_user);

// Candidate power splits for a cluster of the given size, canonical order.
// Size 1: {1}. Size 2: weak fraction 0.5+step .. 0.95 in steps. Size 3: grid
// over the simplex with strictly increasing fractions toward weaker members.
std::vector<PowerAllocation> power_grid(std::size_t cluster_size, double step);

// Shannon rates under SIC, bits/s, aligned with cluster members. Member i is
// interfered only by the layers it cannot cancel: those of stronger members
// (positions before i).
std::vector<double> sic_rates(const Cluster& cluster, const PowerAllocation& alloc,
                              double bandwidth_hz, double power_w, double noise_w,
                              const std::vector<double>& gain_by_user);

// Single-user full-power capacity of the best member; upper-bounds the SIC
// sum rate for every allocation.
double sum_rate_bound(const Cluster& cluster, double bandwidth_hz, double power_w,
                      double noise_w, const std::vector<double>& gain_by_user);

// Rate at which receiver i can decode layer l (l >= i in decode order), for
// the given realized gains. Entry [i][l]; positions l < i are left at 0.
std::vector<std::vector<double>> sic_layer_rates(
    const Cluster& cluster, const PowerAllocation& alloc, double bandwidth_hz,
    double power_w, double noise_w, const std::vector<double>& realized_gain_by_user);

// Cascade rule: receiver i succeeds iff every layer it must cancel (all
// weaker members' layers, processed weakest first) and then its own layer are
// decodable at the realized rates. A failed layer fails everything after it
// at that receiver. Layers with assigned bitrate 0 carry no data and decode
// trivially.
std::vector<bool> sic_decode_outcome(const Cluster& cluster,
                                     const std::vector<double>& assigned_bitrate_bps,
                                     const std::vector<std::vector<double>>& layer_rate_bps);

}  // namespace qnoma::noma

#endif  // QNOMA_NOMA_HPP
