#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cuestat/rng.hpp"

namespace cuestat {

// Eigenangle samplers for the circular beta ensembles with joint density
//
//   p_N(theta) = (1/Z_N(beta)) prod_{j<k} |e^{i theta_j} - e^{i theta_k}|^beta
//
// on [0, 2pi)^N.  beta = 2 has an exact sampler through the determinantal
// structure; general beta > 0 runs a Metropolis chain; beta = 0 is the
// i.i.d.-uniform degenerate case and doubles as an MCMC oracle.

struct EigenvalueSample {
  std::vector<double> angles;  // sorted ascending, in [0, 2pi)
};

struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact beta = 2 sampler.  Point i is drawn from the conditional density
//
//   (K(x,x) - sum_{m<i} |phi_m(x)|^2) / (N - i + 1),
//
// where K is the projection kernel onto span{e^{ik theta}, 0 <= k <= N-1}
// and phi_m orthonormalize the evaluation functionals of the points chosen
// so far (modified Gram-Schmidt with one re-orthogonalization pass).  Each
// point is rejection-sampled against the flat envelope N/(2pi (N-i+1));
// a point exceeding the attempt cap or a conditional density more negative
// than rounding noise raises SamplingError.
EigenvalueSample sample_cue(std::int64_t n, RandomStream& stream);

struct McmcParams {
  double proposal_width = 0.0;     // 0 => 2pi/N
  std::int64_t burn_in_sweeps = 0; // 0 => 100 N
  std::int64_t thinning_sweeps = 0;// 0 => resolve via pilot chain
};

// One retained configuration of a single-site Metropolis chain targeting
// the beta ensemble: wrapped-uniform proposals of the given width, burn-in,
// then `thinning` further sweeps.  Requires an explicit (resolved) thinning;
// see resolve_thinning.
EigenvalueSample sample_cbe_mcmc(std::int64_t n, double beta, const McmcParams& params,
                                 RandomStream& stream);

// Pilot-chain thinning choice: smallest interval larger than twice the
// integrated autocorrelation time of Re t_1 along the chain.
std::int64_t resolve_thinning(std::int64_t n, double beta, const McmcParams& params,
                              std::uint64_t seed);

// Z_N(2) = (2pi)^N N!; throws for N > 20 where the product leaves the
// comfortable double range.  The log variant works for all N >= 1.
double partition_function_cue(std::int64_t n);
double log_partition_function_cue(std::int64_t n);

}  // namespace cuestat
