#include "sicra/channel.hpp"

#include <stdexcept>

namespace sicra {

void validate(const ChannelParams& params) {
  if (!(params.noise_power > 0.0))
    throw std::domain_error("noise_power must be > 0");
  if (!(params.tx_power_linear() > 0.0))
    throw std::domain_error("tx power must be > 0");
  if (!(params.rate_threshold > 0.0))
    throw std::domain_error("rate_threshold must be > 0");
}

double path_loss(double distance_m, const ChannelParams& params) {
  if (!(distance_m > 0.0)) throw std::domain_error("distance must be > 0");
  return std::pow(10.0, params.pathloss_ref_db / 10.0) *
         std::pow(distance_m, params.pathloss_exponent);
}

double lambda_for(double distance_m, const ChannelParams& params) {
  return path_loss(distance_m, params) / params.tx_power_linear();
}

NodeProfile make_profile(int node_id, double distance_m,
                         const ChannelParams& params) {
  NodeProfile prof;
  prof.node_id = node_id;
  prof.distance_m = distance_m;
  prof.lambda = lambda_for(distance_m, params);
  prof.mean_rx_power = 1.0 / prof.lambda;
  return prof;
}

double sample_power(double lambda, Rng& rng) {
  if (!(lambda > 0.0)) throw std::domain_error("lambda must be > 0");
  auto [x, y] = rng.next_normal_pair();
  return 0.5 / lambda * (x * x + y * y);  // |CN(0, 1/lambda)|^2
}

CsiDraw sample_csi_pair(double lambda, double sigma_eps_sq,
                        double mean_rx_power, Rng& rng) {
  if (!(lambda > 0.0)) throw std::domain_error("lambda must be > 0");
  if (sigma_eps_sq < 0.0)
    throw std::domain_error("sigma_eps_sq must be >= 0");

  auto [cx, cy] = rng.next_normal_pair();
  CsiDraw draw;
  draw.true_power = 0.5 / lambda * (cx * cx + cy * cy);
  if (sigma_eps_sq == 0.0) {
    draw.estimated_power = draw.true_power;
    draw.residual_power = 0.0;
    return draw;
  }

  auto [ex, ey] = rng.next_normal_pair();
  double cscale = std::sqrt(0.5 / lambda);
  double escale = std::sqrt(0.5 * sigma_eps_sq * mean_rx_power);
  double hx = cscale * cx - escale * ex;  // estimate = channel - error
  double hy = cscale * cy - escale * ey;
  draw.estimated_power = hx * hx + hy * hy;
  draw.residual_power = escale * escale * (ex * ex + ey * ey);
  return draw;
}

double single_outage(double lambda, const ChannelParams& params) {
  double exponent = lambda * params.gamma() * params.noise_power;
  return -std::expm1(-exponent);
}

}  // namespace sicra
