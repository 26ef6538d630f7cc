#pragma once

#include <vector>

#include "sicra/channel.hpp"

namespace sicra {

enum class CsiMode { Perfect, Imperfect };

// ---- one slot's superposed uplink ------------------------------------------

struct RxEntry {
  int node_id = 0;
  double true_power = 0.0;
  double estimated_power = 0.0;
  double residual_power = 0.0;  // left behind if this signal is cancelled
};

struct SlotReception {
  std::vector<RxEntry> entries;  // may be empty (idle slot)
};

struct DecodeResult {
  std::vector<int> order;       // node ids, strongest first
  int decoded_count = 0;        // length of the successfully decoded prefix
  std::vector<bool> per_node;   // aligned with the reception's entries
};

// ---- AP-side successive cancellation ----------------------------------------

// Descending sort by true power (perfect CSI) or estimated power (imperfect);
// deterministic tie-break by ascending node id.
std::vector<int> order_slot(const SlotReception& reception, CsiMode mode);

// Walks the power ordering strongest-first. The signal at rank i is decoded
// iff every earlier rank was decoded and
//   true_i / (noise + sum of later true powers + sum of residuals up to i)
// reaches the SINR threshold. Imperfect CSI affects the ordering and the
// accumulated cancellation residuals, never the true powers in the ratio.
DecodeResult decode_slot(const SlotReception& reception,
                         const ChannelParams& params, CsiMode mode);

}  // namespace sicra
