#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sicra/channel.hpp"
#include "sicra/rng.hpp"

namespace sicra {

// q_s has fallen to (or below) the arrival rate; queue metrics diverge
struct UnstableQueueError : std::domain_error {
  using std::domain_error::domain_error;
};

// ---- scenario aggregate for the equal-mean-SNR closed forms ----------------
//
// Noise power is normalized to 1: lambda_gamma_sigma2 carries the whole link
// budget and csi_v is expressed in the same normalized power units.

struct LinkBudget {
  double lambda_gamma_sigma2 = 0.1;  // lambda * gamma * sigma^2
  double gamma = 1.0;                // SINR threshold
  int n_nodes = 1;                   // N
  double tx_prob = 1.0;              // p
  double arrival_prob = 0.5;         // p_a
  int deadline_slots = 5;            // D
  // rate of the cancellation-residual exponential; infinity = perfect CSI
  double csi_v = std::numeric_limits<double>::infinity();

  // mean-SNR parameterization: lambda*gamma*sigma^2 = gamma / snr_linear
  static LinkBudget equal_snr(double snr_db, double gamma, int n_nodes,
                              double tx_prob, double arrival_prob,
                              int deadline_slots, double sigma_eps_sq = 0.0);
};

// throws std::domain_error naming the offending field
void validate(const LinkBudget& budget);

struct AnalyticReport {
  double q_s = 0.0;
  double avg_aoi = 0.0;       // NaN when unstable
  double throughput = 0.0;
  double deadline_violation = 0.0;  // 1 by convention when unstable
  double rho = 0.0;           // queue load r/s
  bool unstable = false;
};

// ---- decoding-order statistics ----------------------------------------------

// probability that independent exponentials with these rates sort into
// exactly this order (strongest first); empty list -> 1
double order_probability(const std::vector<double>& ordered_lambdas);

// probability that the rank-i signal of m equal-mean contenders passes the
// SINR test: C(m,i) e^(-i lgs) / (gamma i + 1)^(m-i)
double rank_success_equal(int i, int m, const LinkBudget& budget);

// rank-averaged outage of a contender among m, perfect CSI
double outage_equal(int m, const LinkBudget& budget);

// same with the per-rank residual-interference penalty of imperfect CSI
double outage_equal_imperfect(int m, const LinkBudget& budget);

// per-slot probability that a backlogged node transmits and is decoded
double success_update_prob(const LinkBudget& budget, bool imperfect = false);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Order-averaged outage of one tagged node among heterogeneous contenders:
// enumerates every decoding order, weights it by order_probability, and
// estimates the per-order decode-chain success by classifying Monte-Carlo
// draws by their realized order. m <= 8; larger sets belong in the simulator.
MonteCarloEstimate avg_outage_general(int tagged_index,
                                      const std::vector<double>& active_lambdas,
                                      const ChannelParams& params,
                                      long n_samples, Rng& rng);

// ---- queue, age and throughput ----------------------------------------------

// average age of information of a stable arrival/service pair
double avg_aoi(const LinkBudget& budget, double q_s);

// expected decoded signals per slot across the network
double throughput(const LinkBudget& budget, bool imperfect = false);

// distribution of the per-slot decoded count, index 0..N
std::vector<double> decoded_count_pmf(const LinkBudget& budget,
                                      bool imperfect = false);

// steady-state queue-length probabilities, truncated below 1e-12 tail mass
std::vector<double> queue_distribution(const LinkBudget& budget, double q_s);

// geometric system-delay pmf at integer t >= 1
double delay_pdf(const LinkBudget& budget, double q_s, int t);

// probability a delivered update misses its deadline
double deadline_violation(const LinkBudget& budget, double q_s);

// all closed-form metrics for one scenario point
AnalyticReport analytic_report(const LinkBudget& budget, bool imperfect = false);

// ---- Monte-Carlo oracle over the SIC decoder --------------------------------

struct EqualSnrSicStats {
  // all rank-indexed frequencies are 1-based ranks stored at index rank-1
  std::vector<double> marginal;     // rank-i SINR test passes, chain ignored
  std::vector<double> marginal_se;
  std::vector<double> prefix;       // decode chain reaches rank i
  std::vector<double> prefix_se;
  double mean_decoded = 0.0;
  double mean_decoded_se = 0.0;
  long n_slots = 0;
};

// brute-force statistics of decode_slot over n_slots collision slots with
// exactly m equal-mean contenders
EqualSnrSicStats mc_equal_snr_stats(int m, const LinkBudget& budget,
                                    long n_slots, std::uint64_t seed);

}  // namespace sicra
