#pragma once

#include <cmath>

#include "sicra/rng.hpp"

namespace sicra {

// ---- link parameters -------------------------------------------------------

struct ChannelParams {
  double tx_power_dbm = 20.0;    // per-node transmit power
  double noise_power = 1.0;      // sigma^2, linear
  double rate_threshold = 1.0;   // target rate, b/s/Hz
  double pathloss_ref_db = 0.0;  // loss at 1 m
  double pathloss_exponent = 2.0;

  // SINR threshold; always derived from the rate, never stored separately
  double gamma() const { return std::exp2(rate_threshold) - 1.0; }
  double tx_power_linear() const {
    return 1e-3 * std::pow(10.0, tx_power_dbm / 10.0);
  }
};

// throws std::domain_error on non-positive noise, power or rate
void validate(const ChannelParams& params);

struct NodeProfile {
  int node_id = 0;
  double distance_m = 1.0;
  double lambda = 1.0;         // rate of the received-power exponential
  double mean_rx_power = 1.0;  // 1 / lambda
};

NodeProfile make_profile(int node_id, double distance_m,
                         const ChannelParams& params);

// ---- large-scale model -----------------------------------------------------

// linear loss factor, ref_db at 1 m times distance^exponent
double path_loss(double distance_m, const ChannelParams& params);

// received-power exponential rate: path loss over linear transmit power
double lambda_for(double distance_m, const ChannelParams& params);

// ---- small-scale draws -----------------------------------------------------

// instantaneous received power, exponential with the given rate
double sample_power(double lambda, Rng& rng);

struct CsiDraw {
  double true_power = 0.0;
  double estimated_power = 0.0;
  double residual_power = 0.0;  // power of the estimation error
};

// Draws the fading coefficient and an independent estimation error of
// variance sigma_eps_sq; the estimate is channel minus error, the residual
// is the error's power. sigma_eps_sq = 0 degenerates to sample_power
// bit-for-bit on the true power.
CsiDraw sample_csi_pair(double lambda, double sigma_eps_sq,
                        double mean_rx_power, Rng& rng);

// probability that a lone transmission's SNR falls below gamma
double single_outage(double lambda, const ChannelParams& params);

}  // namespace sicra
