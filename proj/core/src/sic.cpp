#include "sicra/sic.hpp"

#include <algorithm>
#include <numeric>

namespace sicra {

static std::vector<std::size_t> sorted_indices(const SlotReception& reception,
                                               CsiMode mode) {
  const auto& entries = reception.entries;
  std::vector<std::size_t> idx(entries.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    double ka = mode == CsiMode::Perfect ? entries[a].true_power
                                         : entries[a].estimated_power;
    double kb = mode == CsiMode::Perfect ? entries[b].true_power
                                         : entries[b].estimated_power;
    if (ka != kb) return ka > kb;
    return entries[a].node_id < entries[b].node_id;
  });
  return idx;
}

std::vector<int> order_slot(const SlotReception& reception, CsiMode mode) {
  auto idx = sorted_indices(reception, mode);
  std::vector<int> order;
  order.reserve(idx.size());
  for (std::size_t i : idx) order.push_back(reception.entries[i].node_id);
  return order;
}

DecodeResult decode_slot(const SlotReception& reception,
                         const ChannelParams& params, CsiMode mode) {
  const auto& entries = reception.entries;
  const std::size_t m = entries.size();
  auto idx = sorted_indices(reception, mode);

  DecodeResult result;
  result.order.reserve(m);
  for (std::size_t i : idx) result.order.push_back(entries[i].node_id);
  result.per_node.assign(m, false);

  // interference from not-yet-decoded signals, exact suffix sums
  std::vector<double> suffix(m + 1, 0.0);
  for (std::size_t r = m; r-- > 0;)
    suffix[r] = suffix[r + 1] + entries[idx[r]].true_power;

  const double gamma = params.gamma();
  double residual_acc = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const RxEntry& e = entries[idx[r]];
    if (mode == CsiMode::Imperfect) residual_acc += e.residual_power;
    double interference = params.noise_power + suffix[r + 1] + residual_acc;
    if (e.true_power < gamma * interference) break;
    result.per_node[idx[r]] = true;
    result.decoded_count = static_cast<int>(r) + 1;
  }
  return result;
}

}  // namespace sicra
