#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "sicra/channel.hpp"
#include "sicra/sic.hpp"

namespace sicra {

enum class Policy { SicRa, Standard, Adra };

struct ScenarioConfig {
  int n_nodes = 10;
  double tx_prob = 0.1;        // per-slot transmission probability p
  double arrival_prob = 0.4;   // per-slot update generation probability
  int deadline_slots = 5;
  Policy policy = Policy::SicRa;
  double adra_threshold = 100.0;  // age gate, Adra only
  double sigma_eps_sq = 0.0;      // channel-estimation error variance; 0 = perfect CSI

  // equal-SNR mode pins every node's mean SNR; geometric mode places nodes
  // uniformly in a square and derives per-node statistics from path loss
  bool equal_snr = true;
  double snr_db = 20.0;
  ChannelParams channel;
  double area_m = 200.0;
  double min_distance_m = 1.0;

  long n_slots = 100000;
  int n_runs = 10;
  std::uint64_t seed = 1;
  bool drop_on_deadline = false;
};

// throws std::invalid_argument naming the offending field
void validate(const ScenarioConfig& config);

// The per-node link statistics a scenario will simulate with. Geometric
// placement is a pure function of the scenario seed, so all runs of one
// scenario share a single geometry.
std::vector<NodeProfile> scenario_profiles(const ScenarioConfig& config);

struct NodeState {
  std::deque<long> queue;       // generation slots, oldest first
  long instantaneous_aoi = 0;   // sawtooth state, advanced at slot end
  NodeProfile profile;
  bool backlogged() const { return !queue.empty(); }
};

struct SlotOutcome {
  std::vector<int> transmitters;
  std::vector<int> order;   // decoding order (SIC) or transmitter list
  int decoded_count = 0;
};

// histogram sizes; the last bin aggregates everything past the range
inline constexpr int kDelayHistBins = 4096;
inline constexpr int kQueueHistBins = 1024;

struct RunMetrics {
  double avg_aoi = 0.0;             // time-and-node average
  double throughput = 0.0;          // delivered packets per slot
  double deadline_violation = 0.0;  // delivered with delay > deadline
  double drop_rate = 0.0;           // dropped per generated
  double q_s_empirical = 0.0;       // deliveries per backlogged node-slot

  // whole-run conservation counters
  long generated = 0, delivered = 0, dropped = 0, queued_end = 0;

  // post-warmup tallies
  long hol_opportunities = 0;
  std::vector<long> delay_hist;    // delay t counted at index t
  std::vector<long> queue_hist;    // queue length at the decision epoch
  std::vector<long> decoded_hist;  // per-slot decoded count
};

struct MetricsReport {
  double avg_aoi = 0.0, throughput = 0.0, deadline_violation = 0.0;
  double drop_rate = 0.0, q_s_empirical = 0.0;
  // 95% confidence half-widths over runs (normal approximation)
  double avg_aoi_ci = 0.0, throughput_ci = 0.0, deadline_violation_ci = 0.0;
  double drop_rate_ci = 0.0, q_s_empirical_ci = 0.0;
  int n_runs = 0;
  std::vector<RunMetrics> per_seed;
};

// One Bernoulli(p) attempt on the head-of-line update; Adra additionally
// requires the node's current age to exceed its threshold. Consumes exactly
// one draw regardless of the gate, so channel draws stay aligned across
// policies and CSI settings.
bool policy_decision(const ScenarioConfig& config, const NodeState& node,
                     Rng& rng);

using TraceSink =
    std::function<void(long slot, const SlotOutcome&, const std::vector<NodeState>&)>;

// one seeded run; run_index selects the run's RNG stream under config.seed
RunMetrics run_single(const ScenarioConfig& config, int run_index,
                      const TraceSink& trace = {});

// combine already-computed runs (kept separate so callers may farm runs out
// to worker threads and still aggregate deterministically, in run order)
MetricsReport aggregate(const ScenarioConfig& config,
                        std::vector<RunMetrics> per_run);

// run_single for every run index, then aggregate
MetricsReport run(const ScenarioConfig& config);

}  // namespace sicra
