#include "sicra/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sicra {

namespace {
constexpr std::uint64_t kRunTag = 0x52554E5354524D31ull;
constexpr std::uint64_t kPlacementTag = 0x504C4143454D4531ull;
}  // namespace

void validate(const ScenarioConfig& config) {
  auto fail = [](const std::string& message) {
    throw std::invalid_argument(message);
  };
  if (config.n_nodes < 1) fail("n_nodes must be >= 1");
  if (!(config.tx_prob >= 0.0 && config.tx_prob <= 1.0))
    fail("tx_prob must be in [0,1]");
  if (!(config.arrival_prob >= 0.0 && config.arrival_prob <= 1.0))
    fail("arrival_prob must be in [0,1]");
  if (config.deadline_slots < 1) fail("deadline_slots must be >= 1");
  if (config.policy == Policy::Adra && !(config.adra_threshold >= 0.0))
    fail("adra_threshold must be >= 0");
  if (config.sigma_eps_sq < 0.0) fail("sigma_eps_sq must be >= 0");
  if (config.n_slots < 1) fail("n_slots must be >= 1");
  if (config.n_runs < 1) fail("n_runs must be >= 1");
  if (config.equal_snr) {
    if (!(config.channel.rate_threshold > 0.0))
      fail("channel.rate_threshold must be > 0");
  } else {
    if (!(config.area_m > 0.0)) fail("area_m must be > 0");
    if (!(config.min_distance_m > 0.0)) fail("min_distance_m must be > 0");
    try {
      sicra::validate(config.channel);
    } catch (const std::domain_error& e) {
      fail(std::string("channel: ") + e.what());
    }
  }
}

bool policy_decision(const ScenarioConfig& config, const NodeState& node,
                     Rng& rng) {
  double draw = rng.next_double();
  if (config.policy == Policy::Adra) {
    long current_age = node.instantaneous_aoi + 1;
    if (!(current_age > config.adra_threshold)) return false;
  }
  return draw < config.tx_prob;
}

std::vector<NodeProfile> scenario_profiles(const ScenarioConfig& config) {
  ChannelParams params = config.channel;
  if (config.equal_snr) params.noise_power = 1.0;
  std::vector<NodeProfile> profiles(config.n_nodes);
  if (config.equal_snr) {
    double snr_linear = std::pow(10.0, config.snr_db / 10.0);
    double lambda = 1.0 / snr_linear;  // noise power normalized to 1
    for (int i = 0; i < config.n_nodes; ++i) {
      profiles[i].node_id = i;
      profiles[i].distance_m = 1.0;
      profiles[i].lambda = lambda;
      profiles[i].mean_rx_power = snr_linear;
    }
  } else {
    // placement depends on the scenario seed only, so every run of a
    // scenario shares one geometry and analytic references are well defined
    Rng placement(stream_key(config.seed, kPlacementTag));
    double half = config.area_m / 2.0;  // access point at the square's center
    for (int i = 0; i < config.n_nodes; ++i) {
      double x = config.area_m * placement.next_double() - half;
      double y = config.area_m * placement.next_double() - half;
      double distance = std::max(std::hypot(x, y), config.min_distance_m);
      profiles[i] = make_profile(i, distance, params);
    }
  }
  return profiles;
}

static std::vector<NodeState> build_nodes(const ScenarioConfig& config) {
  std::vector<NodeProfile> profiles = scenario_profiles(config);
  std::vector<NodeState> nodes(config.n_nodes);
  for (int i = 0; i < config.n_nodes; ++i) nodes[i].profile = profiles[i];
  return nodes;
}

RunMetrics run_single(const ScenarioConfig& config, int run_index,
                      const TraceSink& trace) {
  validate(config);

  ChannelParams params = config.channel;
  if (config.equal_snr) {
    params.noise_power = 1.0;  // budget normalization
  }
  const double gamma = params.gamma();
  const double noise = params.noise_power;
  const CsiMode mode =
      config.sigma_eps_sq > 0.0 ? CsiMode::Imperfect : CsiMode::Perfect;

  const std::uint64_t run_seed =
      stream_key(config.seed, kRunTag, static_cast<std::uint64_t>(run_index));
  std::vector<NodeState> nodes = build_nodes(config);

  const int n = config.n_nodes;
  const long n_slots = config.n_slots;
  const long warm = n_slots / 10;

  RunMetrics metrics;
  metrics.delay_hist.assign(kDelayHistBins + 1, 0);
  metrics.queue_hist.assign(kQueueHistBins + 1, 0);
  metrics.decoded_hist.assign(n + 1, 0);

  long generated = 0, delivered = 0, dropped = 0, queued = 0;
  long generated_pw = 0, delivered_pw = 0, dropped_pw = 0, violations_pw = 0;
  long hol_opportunities = 0;
  double aoi_sum = 0.0;

  SlotReception reception;
  SlotOutcome outcome;
  std::vector<long> reset_slot(n, -1), reset_value(n, 0);

  for (long t = 0; t < n_slots; ++t) {
    reception.entries.clear();
    outcome.transmitters.clear();
    outcome.order.clear();
    outcome.decoded_count = 0;

    for (int i = 0; i < n; ++i) {
      NodeState& node = nodes[i];
      Rng sub(stream_key(run_seed, static_cast<std::uint64_t>(t),
                         static_cast<std::uint64_t>(i)));
      // fixed draw order per node-slot: arrival, policy, channel
      if (sub.bernoulli(config.arrival_prob)) {
        node.queue.push_back(t);
        ++generated;
        ++queued;
        if (t >= warm) ++generated_pw;
      }
      bool wants = policy_decision(config, node, sub);
      if (t >= warm) {
        std::size_t len = std::min<std::size_t>(node.queue.size(), kQueueHistBins);
        ++metrics.queue_hist[len];
        if (node.backlogged()) ++hol_opportunities;
      }
      if (wants && node.backlogged()) {
        CsiDraw draw = sample_csi_pair(node.profile.lambda, config.sigma_eps_sq,
                                       node.profile.mean_rx_power, sub);
        reception.entries.push_back(
            RxEntry{i, draw.true_power, draw.estimated_power, draw.residual_power});
        outcome.transmitters.push_back(i);
      }
    }

    // reception: SIC prefix decoding, or the baselines' collision channel
    int decoded_ids[1];
    const int* decoded_begin = nullptr;
    int decoded_count = 0;
    DecodeResult decode;
    if (config.policy == Policy::SicRa) {
      decode = decode_slot(reception, params, mode);
      outcome.order = decode.order;
      decoded_count = decode.decoded_count;
      decoded_begin = decode.order.data();
    } else {
      outcome.order = outcome.transmitters;
      if (reception.entries.size() == 1 &&
          reception.entries[0].true_power >= gamma * noise) {
        decoded_ids[0] = reception.entries[0].node_id;
        decoded_begin = decoded_ids;
        decoded_count = 1;
      }
    }
    outcome.decoded_count = decoded_count;
    if (t >= warm) ++metrics.decoded_hist[decoded_count];

    for (int d = 0; d < decoded_count; ++d) {
      int id = decoded_begin[d];
      NodeState& node = nodes[id];
      long gen = node.queue.front();
      node.queue.pop_front();
      --queued;
      ++delivered;
      long delay = t - gen + 1;
      reset_slot[id] = t;
      reset_value[id] = delay;
      if (t >= warm) {
        ++delivered_pw;
        if (delay > config.deadline_slots) ++violations_pw;
        ++metrics.delay_hist[std::min<long>(delay, kDelayHistBins)];
      }
    }

    if (config.drop_on_deadline) {
      for (int i = 0; i < n; ++i) {
        NodeState& node = nodes[i];
        while (!node.queue.empty() &&
               t - node.queue.front() + 1 >= config.deadline_slots) {
          node.queue.pop_front();
          --queued;
          ++dropped;
          if (t >= warm) ++dropped_pw;
        }
      }
    }

    // age metric samples before the slot's delivery lands
    if (t >= warm) {
      for (int i = 0; i < n; ++i) aoi_sum += nodes[i].instantaneous_aoi + 1;
    }
    for (int i = 0; i < n; ++i) {
      NodeState& node = nodes[i];
      if (reset_slot[i] == t)
        node.instantaneous_aoi = reset_value[i];
      else
        node.instantaneous_aoi += 1;
    }

    if (generated != delivered + dropped + queued)
      throw std::logic_error("update conservation violated");

    if (trace) trace(t, outcome, nodes);
  }

  metrics.generated = generated;
  metrics.delivered = delivered;
  metrics.dropped = dropped;
  metrics.queued_end = queued;
  metrics.hol_opportunities = hol_opportunities;

  const double measured_slots = static_cast<double>(n_slots - warm);
  metrics.avg_aoi = aoi_sum / (measured_slots * n);
  metrics.throughput = delivered_pw / measured_slots;
  metrics.deadline_violation =
      delivered_pw > 0 ? static_cast<double>(violations_pw) / delivered_pw : 0.0;
  metrics.drop_rate =
      generated_pw > 0 ? static_cast<double>(dropped_pw) / generated_pw : 0.0;
  metrics.q_s_empirical =
      hol_opportunities > 0
          ? static_cast<double>(delivered_pw) / hol_opportunities
          : 0.0;
  return metrics;
}

static void mean_ci(const std::vector<double>& values, double& mean, double& ci) {
  const std::size_t n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  mean = n ? sum / n : 0.0;
  if (n < 2) {
    ci = 0.0;
    return;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (n - 1));
  ci = 1.96 * sd / std::sqrt(static_cast<double>(n));
}

MetricsReport aggregate(const ScenarioConfig& config,
                        std::vector<RunMetrics> per_run) {
  MetricsReport report;
  report.n_runs = static_cast<int>(per_run.size());
  std::vector<double> values(per_run.size());
  auto fill = [&](auto member, double& mean, double& ci) {
    for (std::size_t r = 0; r < per_run.size(); ++r)
      values[r] = per_run[r].*member;
    mean_ci(values, mean, ci);
  };
  fill(&RunMetrics::avg_aoi, report.avg_aoi, report.avg_aoi_ci);
  fill(&RunMetrics::throughput, report.throughput, report.throughput_ci);
  fill(&RunMetrics::deadline_violation, report.deadline_violation,
       report.deadline_violation_ci);
  fill(&RunMetrics::drop_rate, report.drop_rate, report.drop_rate_ci);
  fill(&RunMetrics::q_s_empirical, report.q_s_empirical,
       report.q_s_empirical_ci);
  (void)config;
  report.per_seed = std::move(per_run);
  return report;
}

MetricsReport run(const ScenarioConfig& config) {
  validate(config);
  std::vector<RunMetrics> per_run;
  per_run.reserve(config.n_runs);
  for (int r = 0; r < config.n_runs; ++r)
    per_run.push_back(run_single(config, r));
  return aggregate(config, std::move(per_run));
}

}  // namespace sicra
