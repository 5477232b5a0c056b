#include "qnoma/noma.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "qnoma/errors.hpp"

namespace qnoma::noma {

void NomaConfig::validate() const {
  if (!(total_power_w > 0.0)) throw ConfigError("noma total power must be positive");
  if (max_cluster_size < 1 || max_cluster_size > 3) {
    throw ConfigError("noma.max_cluster_size must be 1, 2, or 3");
  }
  if (!(power_grid_step > 0.0 && power_grid_step < 0.5)) {
    throw ConfigError("noma.power_grid_step must be in (0, 0.5)");
  }
}

std::vector<Partition> enumerate_partitions(const std::vector<int>& user_ids,
                                            int max_cluster_size) {
  const std::size_t n = user_ids.size();
  if (n < 1 || n > 6) {
    throw SimError("decision space too large: partition enumeration supports 1..6 users, got " +
                   std::to_string(n));
  }
  if (max_cluster_size < 1) throw ConfigError("max_cluster_size must be >= 1");

  std::vector<int> ids = user_ids;
  std::sort(ids.begin(), ids.end());

  std::vector<Partition> out;
  Partition acc;

  // Recursion: the block holding the smallest remaining id is chosen first,
  // extended with larger ids in lexicographic subset order. This yields the
  // canonical (lexicographic) partition order the schedulers tie-break on.
  std::function<void(const std::vector<int>&)> extend = [&](const std::vector<int>& rest) {
    if (rest.empty()) {
      out.push_back(acc);
      return;
    }
    int head = rest.front();
    std::vector<int> others(rest.begin() + 1, rest.end());
    std::vector<int> chosen;

    std::function<void(std::size_t)> pick = [&](std::size_t start) {
      std::vector<int> block;
      block.reserve(chosen.size() + 1);
      block.push_back(head);
      block.insert(block.end(), chosen.begin(), chosen.end());

      std::vector<int> remaining;
      remaining.reserve(others.size() - chosen.size());
      std::size_t ci = 0;
      for (int v : others) {
        if (ci < chosen.size() && chosen[ci] == v) {
          ++ci;
        } else {
          remaining.push_back(v);
        }
      }

      acc.push_back(block);
      extend(remaining);
      acc.pop_back();

      if (block.size() < static_cast<std::size_t>(max_cluster_size)) {
        for (std::size_t i = start; i < others.size(); ++i) {
          chosen.push_back(others[i]);
          pick(i + 1);
          chosen.pop_back();
        }
      }
    };
    pick(0);
  };

  extend(ids);
  return out;
}

Cluster order_cluster(const std::vector<int>& block,
                      const std::vector<double>& gain_by_user) {
  Cluster c;
  c.members = block;
  std::stable_sort(c.members.begin(), c.members.end(), [&](int a, int b) {
    double ga = gain_by_user[static_cast<std::size_t>(a)];
    double gb = gain_by_user[static_cast<std::size_t>(b)];
    if (ga != gb) return ga > gb;
    return a < b;
  });
  return c;
}

std::vector<PowerAllocation> power_grid(std::size_t cluster_size, double step) {
  std::vector<PowerAllocation> out;
  if (cluster_size == 1) {
    out.push_back({{1.0}});
    return out;
  }
  constexpr double kEps = 1e-9;
  if (cluster_size == 2) {
    for (int k = 1;; ++k) {
      double weak = 0.5 + k * step;
      if (weak > 0.95 + kEps) break;
      out.push_back({{1.0 - weak, weak}});
    }
    return out;
  }
  if (cluster_size == 3) {
    // Fractions ascend strictly from strongest to weakest member.
    for (int k1 = 1;; ++k1) {
      double a1 = k1 * step;
      if (a1 * 3.0 >= 1.0 - kEps) break;
      for (int k2 = k1 + 1;; ++k2) {
        double a2 = k2 * step;
        double a3 = 1.0 - a1 - a2;
        if (a3 <= a2 + kEps) break;
        out.push_back({{a1, a2, a3}});
      }
    }
    return out;
  }
  throw ConfigError("power grid supports cluster sizes 1..3");
}

std::vector<double> sic_rates(const Cluster& cluster, const PowerAllocation& alloc,
                              double bandwidth_hz, double power_w, double noise_w,
                              const std::vector<double>& gain_by_user) {
  const std::size_t m = cluster.members.size();
  std::vector<double> rates(m, 0.0);
  double stronger_frac = 0.0;  // fractions of members decoded after this one
  for (std::size_t i = 0; i < m; ++i) {
    double g = gain_by_user[static_cast<std::size_t>(cluster.members[i])];
    double signal = alloc.fractions[i] * power_w * g;
    double interference = power_w * g * stronger_frac;
    rates[i] = bandwidth_hz * std::log2(1.0 + signal / (interference + noise_w));
    stronger_frac += alloc.fractions[i];
  }
  return rates;
}

double sum_rate_bound(const Cluster& cluster, double bandwidth_hz, double power_w,
                      double noise_w, const std::vector<double>& gain_by_user) {
  double g_max = 0.0;
  for (int u : cluster.members) {
    g_max = std::max(g_max, gain_by_user[static_cast<std::size_t>(u)]);
  }
  return bandwidth_hz * std::log2(1.0 + power_w * g_max / noise_w);
}

std::vector<std::vector<double>> sic_layer_rates(
    const Cluster& cluster, const PowerAllocation& alloc, double bandwidth_hz,
    double power_w, double noise_w, const std::vector<double>& realized_gain_by_user) {
  const std::size_t m = cluster.members.size();
  std::vector<std::vector<double>> rates(m, std::vector<double>(m, 0.0));
  std::vector<double> prefix(m, 0.0);  // fractions of layers before l
  double acc = 0.0;
  for (std::size_t l = 0; l < m; ++l) {
    prefix[l] = acc;
    acc += alloc.fractions[l];
  }
  for (std::size_t i = 0; i < m; ++i) {
    double g = realized_gain_by_user[static_cast<std::size_t>(cluster.members[i])];
    for (std::size_t l = i; l < m; ++l) {
      double signal = alloc.fractions[l] * power_w * g;
      double interference = power_w * g * prefix[l];
      rates[i][l] = bandwidth_hz * std::log2(1.0 + signal / (interference + noise_w));
    }
  }
  return rates;
}

std::vector<bool> sic_decode_outcome(const Cluster& cluster,
                                     const std::vector<double>& assigned_bitrate_bps,
                                     const std::vector<std::vector<double>>& layer_rate_bps) {
  const std::size_t m = cluster.members.size();
  std::vector<bool> ok(m, true);
  constexpr double kRelEps = 1e-12;
  for (std::size_t i = 0; i < m; ++i) {
    // Weakest layer first; a failure kills everything after it.
    for (std::size_t l = m; l-- > i;) {
      double assigned = assigned_bitrate_bps[l];
      if (assigned <= 0.0) continue;
      if (layer_rate_bps[i][l] < assigned * (1.0 - kRelEps)) {
        ok[i] = false;
        break;
      }
    }
  }
  return ok;
}

}  // namespace qnoma::noma
