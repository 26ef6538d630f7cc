#include "sicra/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "sicra/sic.hpp"

namespace sicra {

// ---- budget ------------------------------------------------------------------

LinkBudget LinkBudget::equal_snr(double snr_db, double gamma, int n_nodes,
                                 double tx_prob, double arrival_prob,
                                 int deadline_slots, double sigma_eps_sq) {
  LinkBudget budget;
  double snr_linear = std::pow(10.0, snr_db / 10.0);
  budget.lambda_gamma_sigma2 = gamma / snr_linear;
  budget.gamma = gamma;
  budget.n_nodes = n_nodes;
  budget.tx_prob = tx_prob;
  budget.arrival_prob = arrival_prob;
  budget.deadline_slots = deadline_slots;
  if (sigma_eps_sq > 0.0) {
    // residual rate v = lambda / sigma_eps^2 in noise-normalized units
    double lambda = budget.lambda_gamma_sigma2 / gamma;
    budget.csi_v = lambda / sigma_eps_sq;
  }
  return budget;
}

void validate(const LinkBudget& budget) {
  if (budget.n_nodes < 1) throw std::domain_error("n_nodes must be >= 1");
  if (!(budget.tx_prob >= 0.0 && budget.tx_prob <= 1.0))
    throw std::domain_error("tx_prob must be in [0,1]");
  if (!(budget.arrival_prob >= 0.0 && budget.arrival_prob <= 1.0))
    throw std::domain_error("arrival_prob must be in [0,1]");
  if (budget.deadline_slots < 1)
    throw std::domain_error("deadline_slots must be >= 1");
  if (!(budget.lambda_gamma_sigma2 >= 0.0))
    throw std::domain_error("lambda_gamma_sigma2 must be >= 0");
  if (!(budget.gamma > 0.0)) throw std::domain_error("gamma must be > 0");
  if (!(budget.csi_v > 0.0)) throw std::domain_error("csi_v must be > 0");
}

static double binom_coeff(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// ---- decoding-order statistics -------------------------------------------------

double order_probability(const std::vector<double>& ordered_lambdas) {
  for (double rate : ordered_lambdas)
    if (!(rate > 0.0)) throw std::domain_error("rates must be > 0");
  double prob = 1.0;
  double cumulative = ordered_lambdas.empty() ? 0.0 : ordered_lambdas[0];
  for (std::size_t i = 1; i < ordered_lambdas.size(); ++i) {
    cumulative += ordered_lambdas[i];
    prob *= ordered_lambdas[i] / cumulative;
  }
  return prob;
}

// X(i): success term of the rank-i signal among m, with an optional
// per-cancellation residual penalty in the exponent
static double rank_term(int i, int m, double lgs, double gamma, double extra) {
  return binom_coeff(m, i) * std::exp(-i * (lgs + i * extra)) /
         std::pow(gamma * i + 1.0, m - i);
}

double rank_success_equal(int i, int m, const LinkBudget& budget) {
  if (i < 1 || i > m) throw std::domain_error("rank must satisfy 1 <= i <= m");
  return rank_term(i, m, budget.lambda_gamma_sigma2, budget.gamma, 0.0);
}

static double residual_extra(const LinkBudget& budget) {
  // lambda*gamma / v; zero when csi_v is infinite (perfect CSI)
  if (std::isinf(budget.csi_v)) return 0.0;
  return budget.lambda_gamma_sigma2 / budget.csi_v;
}

static double outage_equal_impl(int m, const LinkBudget& budget, double extra) {
  if (m < 1) throw std::domain_error("m must be >= 1");
  double sum = 0.0;
  double prefix = 1.0;
  for (int i = 1; i <= m; ++i) {
    prefix *= rank_term(i, m, budget.lambda_gamma_sigma2, budget.gamma, extra);
    sum += prefix;
  }
  return 1.0 - sum / m;
}

double outage_equal(int m, const LinkBudget& budget) {
  return outage_equal_impl(m, budget, 0.0);
}

double outage_equal_imperfect(int m, const LinkBudget& budget) {
  return outage_equal_impl(m, budget, residual_extra(budget));
}

double success_update_prob(const LinkBudget& budget, bool imperfect) {
  const int n = budget.n_nodes;
  const double p = budget.tx_prob;
  const double extra = imperfect ? residual_extra(budget) : 0.0;
  double total = 0.0;
  for (int m = 1; m <= n; ++m) {
    double weight =
        binom_coeff(n - 1, m - 1) * std::pow(p, m) * std::pow(1.0 - p, n - m);
    total += weight * (1.0 - outage_equal_impl(m, budget, extra));
  }
  return total;
}

// ---- order-averaged heterogeneous outage ---------------------------------------

// lexicographic rank of a permutation of 0..m-1
static std::size_t perm_rank(const std::vector<int>& perm) {
  const std::size_t m = perm.size();
  std::size_t rank = 0;
  std::size_t factorial = 1;
  for (std::size_t i = 2; i <= m; ++i) factorial *= i;  // m!
  for (std::size_t i = 0; i < m; ++i) {
    factorial /= (m - i);
    int smaller = 0;
    for (std::size_t j = i + 1; j < m; ++j)
      if (perm[j] < perm[i]) ++smaller;
    rank += smaller * factorial;
  }
  return rank;
}

MonteCarloEstimate avg_outage_general(int tagged_index,
                                      const std::vector<double>& active_lambdas,
                                      const ChannelParams& params,
                                      long n_samples, Rng& rng) {
  const int m = static_cast<int>(active_lambdas.size());
  if (m < 1) throw std::invalid_argument("active set must be non-empty");
  if (tagged_index < 0 || tagged_index >= m)
    throw std::invalid_argument("tagged_index out of range");
  if (m > 8)
    throw std::invalid_argument(
        "order enumeration supports m <= 8; use the simulator for larger sets");
  for (double rate : active_lambdas)
    if (!(rate > 0.0)) throw std::domain_error("rates must be > 0");

  if (m == 1) return {single_outage(active_lambdas[0], params), 0.0};

  // Eq-weights for every decoding order, indexed by lexicographic rank
  std::size_t n_orders = 1;
  for (int i = 2; i <= m; ++i) n_orders *= i;
  std::vector<double> weight(n_orders, 0.0);
  {
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    std::vector<double> ordered(m);
    do {
      for (int i = 0; i < m; ++i) ordered[i] = active_lambdas[perm[i]];
      weight[perm_rank(perm)] = order_probability(ordered);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  // classify samples by the realized order, success = decode chain reaches
  // the tagged node
  std::vector<long> seen(n_orders, 0), succ(n_orders, 0);
  SlotReception reception;
  reception.entries.resize(m);
  std::vector<int> realized(m);
  long total_succ = 0;
  for (long s = 0; s < n_samples; ++s) {
    for (int k = 0; k < m; ++k) {
      double draw = -std::log(rng.next_open()) / active_lambdas[k];
      reception.entries[k] = RxEntry{k, draw, draw, 0.0};
    }
    DecodeResult result = decode_slot(reception, params, CsiMode::Perfect);
    for (int r = 0; r < m; ++r) realized[r] = result.order[r];
    std::size_t order_id = perm_rank(realized);
    ++seen[order_id];
    if (result.per_node[tagged_index]) {
      ++succ[order_id];
      ++total_succ;
    }
  }

  const double global_rate =
      n_samples > 0 ? static_cast<double>(total_succ) / n_samples : 0.0;
  double success_mean = 0.0;
  double variance = 0.0;
  for (std::size_t o = 0; o < n_orders; ++o) {
    double rate = seen[o] ? static_cast<double>(succ[o]) / seen[o] : global_rate;
    long n_eff = std::max<long>(seen[o], 1);
    success_mean += weight[o] * rate;
    variance += weight[o] * weight[o] * rate * (1.0 - rate) / n_eff;
  }
  return {1.0 - success_mean, std::sqrt(variance)};
}

// ---- queue, age and throughput ---------------------------------------------------

double avg_aoi(const LinkBudget& budget, double q_s) {
  const double pa = budget.arrival_prob;
  if (!(pa > 0.0 && pa < 1.0))
    throw std::domain_error("arrival_prob must be inside (0,1)");
  if (!(q_s > pa))
    throw UnstableQueueError("q_s <= arrival_prob: queue unstable, age diverges");
  return 1.0 / pa + (1.0 - pa) / (q_s - pa) + pa / q_s - pa / (q_s * q_s);
}

// probability of decoding at least i signals, index 1..N (index 0 unused)
static std::vector<double> atleast_probs(const LinkBudget& budget, double extra) {
  const int n = budget.n_nodes;
  const double p = budget.tx_prob;
  std::vector<double> atleast(n + 2, 0.0);
  for (int i = 1; i <= n; ++i) {
    double acc = 0.0;
    for (int m = i; m <= n; ++m) {
      double pmf =
          binom_coeff(n, m) * std::pow(p, m) * std::pow(1.0 - p, n - m);
      double prefix = 1.0;
      for (int j = 1; j <= i; ++j)
        prefix *= rank_term(j, m, budget.lambda_gamma_sigma2, budget.gamma, extra);
      acc += pmf * prefix;
    }
    atleast[i] = acc;
  }
  return atleast;
}

double throughput(const LinkBudget& budget, bool imperfect) {
  const double extra = imperfect ? residual_extra(budget) : 0.0;
  auto atleast = atleast_probs(budget, extra);
  double expected = 0.0;
  for (int i = 1; i <= budget.n_nodes; ++i) expected += atleast[i];
  return expected;
}

std::vector<double> decoded_count_pmf(const LinkBudget& budget, bool imperfect) {
  const double extra = imperfect ? residual_extra(budget) : 0.0;
  auto atleast = atleast_probs(budget, extra);
  std::vector<double> pmf(budget.n_nodes + 1, 0.0);
  pmf[0] = 1.0 - atleast[1];
  for (int i = 1; i <= budget.n_nodes; ++i) pmf[i] = atleast[i] - atleast[i + 1];
  return pmf;
}

static double queue_load(const LinkBudget& budget, double q_s) {
  const double pa = budget.arrival_prob;
  double up = pa * (1.0 - q_s);
  double down = q_s * (1.0 - pa);
  if (!(down > 0.0)) return std::numeric_limits<double>::infinity();
  return up / down;
}

std::vector<double> queue_distribution(const LinkBudget& budget, double q_s) {
  const double pa = budget.arrival_prob;
  if (!(pa > 0.0 && pa < 1.0))
    throw std::domain_error("arrival_prob must be inside (0,1)");
  const double rho = queue_load(budget, q_s);
  if (!(rho < 1.0))
    throw UnstableQueueError("queue load >= 1: stationary distribution undefined");
  const double q1 = pa * (1.0 - rho) / q_s;
  std::vector<double> dist;
  dist.push_back((1.0 - pa) * (1.0 - rho));  // empty queue
  double term = q1;
  for (int j = 1;; ++j) {
    dist.push_back(term);
    double tail = rho > 0.0 ? term * rho / (1.0 - rho) : 0.0;
    if (tail < 1e-12) break;
    term *= rho;
  }
  return dist;
}

double delay_pdf(const LinkBudget& budget, double q_s, int t) {
  if (t < 1) throw std::domain_error("delay support starts at t = 1");
  const double rho = queue_load(budget, q_s);
  if (!(rho < 1.0))
    throw UnstableQueueError("queue load >= 1: delay distribution undefined");
  const double mu = q_s * (1.0 - rho);
  return mu * std::pow(1.0 - mu, t - 1);
}

double deadline_violation(const LinkBudget& budget, double q_s) {
  const double rho = queue_load(budget, q_s);
  if (!(rho < 1.0))
    throw UnstableQueueError("queue load >= 1: every deadline is missed");
  const double mu = q_s * (1.0 - rho);
  return std::pow(1.0 - mu, budget.deadline_slots);
}

AnalyticReport analytic_report(const LinkBudget& budget, bool imperfect) {
  validate(budget);
  AnalyticReport report;
  report.q_s = success_update_prob(budget, imperfect);
  report.throughput = throughput(budget, imperfect);
  report.rho = queue_load(budget, report.q_s);
  const double pa = budget.arrival_prob;
  bool stable = pa > 0.0 && pa < 1.0 && report.rho < 1.0 && report.q_s > pa;
  if (stable) {
    report.avg_aoi = avg_aoi(budget, report.q_s);
    report.deadline_violation = deadline_violation(budget, report.q_s);
  } else {
    report.unstable = true;
    report.avg_aoi = std::numeric_limits<double>::quiet_NaN();
    report.deadline_violation = 1.0;  // delay diverges: violation is certain
  }
  return report;
}

// ---- Monte-Carlo oracle over the SIC decoder -------------------------------------

EqualSnrSicStats mc_equal_snr_stats(int m, const LinkBudget& budget,
                                    long n_slots, std::uint64_t seed) {
  if (m < 1) throw std::domain_error("m must be >= 1");
  if (n_slots < 1) throw std::domain_error("n_slots must be >= 1");

  const double gamma = budget.gamma;
  const double lambda = budget.lambda_gamma_sigma2 / gamma;  // sigma^2 = 1
  ChannelParams params;
  params.noise_power = 1.0;
  params.rate_threshold = std::log2(1.0 + gamma);

  Rng rng(stream_key(seed, 0x51C57A75ull));
  SlotReception reception;
  reception.entries.resize(m);

  std::vector<long> marginal_hits(m, 0), prefix_hits(m, 0);
  long decoded_sum = 0;
  long decoded_sq_sum = 0;
  std::vector<double> sorted_power(m);
  std::vector<double> suffix(m + 1);

  for (long s = 0; s < n_slots; ++s) {
    for (int k = 0; k < m; ++k) {
      double draw = sample_power(lambda, rng);
      reception.entries[k] = RxEntry{k, draw, draw, 0.0};
    }
    DecodeResult result = decode_slot(reception, params, CsiMode::Perfect);
    for (int r = 0; r < m; ++r)
      sorted_power[r] = reception.entries[result.order[r]].true_power;
    suffix[m] = 0.0;
    for (int r = m; r-- > 0;) suffix[r] = suffix[r + 1] + sorted_power[r];
    for (int r = 0; r < m; ++r) {
      if (sorted_power[r] >= gamma * (1.0 + suffix[r + 1])) ++marginal_hits[r];
      if (result.decoded_count > r) ++prefix_hits[r];
    }
    decoded_sum += result.decoded_count;
    decoded_sq_sum += static_cast<long>(result.decoded_count) * result.decoded_count;
  }

  EqualSnrSicStats stats;
  stats.n_slots = n_slots;
  stats.marginal.resize(m);
  stats.marginal_se.resize(m);
  stats.prefix.resize(m);
  stats.prefix_se.resize(m);
  const double n = static_cast<double>(n_slots);
  for (int r = 0; r < m; ++r) {
    double pm = marginal_hits[r] / n;
    double pp = prefix_hits[r] / n;
    stats.marginal[r] = pm;
    stats.marginal_se[r] = std::sqrt(pm * (1.0 - pm) / n);
    stats.prefix[r] = pp;
    stats.prefix_se[r] = std::sqrt(pp * (1.0 - pp) / n);
  }
  stats.mean_decoded = decoded_sum / n;
  double variance = decoded_sq_sum / n - stats.mean_decoded * stats.mean_decoded;
  stats.mean_decoded_se = std::sqrt(std::max(variance, 0.0) / n);
  return stats;
}

}  // namespace sicra
