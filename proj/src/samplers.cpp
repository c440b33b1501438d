#include "cuestat/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cuestat/common.hpp"
#include "cuestat/estimators.hpp"

namespace cuestat {

namespace {

constexpr std::int64_t kRejectionCap = 1000000;

// ---- exact beta = 2 sampler ------------------------------------------------
//
// Work in the coefficient space of the orthonormal basis
// psi_k(x) = e^{ikx}/sqrt(2pi), k = 0..N-1, where the evaluation vector
// e(x) = (psi_0(x), ..., psi_{N-1}(x)) satisfies K(x,y) = <e(y), e(x)>.
// The orthonormalized functions phi_m are kept as coefficient vectors u_m,
// and the running density deficit
//
//   T(x) = sum_m |phi_m(x)|^2
//        = (1/2pi) [ (i-1) + 2 Re sum_{d>=1} tau_d e^{-idx} ],
//   tau_d = sum_m sum_k u_m[k] conj(u_m[k-d]),
//
// is maintained through the autocorrelations tau, so a rejection proposal
// costs O(N) regardless of how many points are already placed.
class DppState {
 public:
  explicit DppState(std::int64_t n)
      : n_(static_cast<std::size_t>(n)),
        tau_re_(n_, 0.0),
        tau_im_(n_, 0.0),
        basis_re_(n_ * n_),
        basis_im_(n_ * n_) {}

  // 2pi (K(x,x) - T(x)) for i-1 placed points; the accept test against the
  // flat envelope is v * N <= g(x).
  double g(double x) const {
    double acc = 0.0;
    if (points_ > 0) {
      const double cr = std::cos(x), ci = -std::sin(x);
      double zr = cr, zi = ci;  // e^{-idx}, d = 1
      for (std::size_t d = 1; d < n_; ++d) {
        acc += tau_re_[d] * zr - tau_im_[d] * zi;
        const double r = zr * cr - zi * ci;
        zi = zr * ci + zi * cr;
        zr = r;
        if (d % 256 == 0) {
          const double m = std::sqrt(zr * zr + zi * zi);
          zr /= m;
          zi /= m;
        }
      }
    }
    return static_cast<double>(n_) - static_cast<double>(points_) - 2.0 * acc;
  }

  // Gram-Schmidt the accepted point's evaluation vector into the basis and
  // fold its autocorrelation into tau.  Returns false on numerical
  // degeneracy (residual below rounding scale).
  bool add_point(double x) {
    const double scale = 1.0 / std::sqrt(kTwoPi);
    std::vector<double> wr(n_), wi(n_);
    const double cr = std::cos(x), ci = std::sin(x);
    double zr = 1.0, zi = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      wr[k] = scale * zr;
      wi[k] = scale * zi;
      const double r = zr * cr - zi * ci;
      zi = zr * ci + zi * cr;
      zr = r;
      if (k % 256 == 255) {
        const double m = std::sqrt(zr * zr + zi * zi);
        zr /= m;
        zi /= m;
      }
    }

    for (int pass = 0; pass < 2; ++pass) {  // MGS with one re-orthogonalization
      for (std::size_t m = 0; m < points_; ++m) {
        const double* ur = &basis_re_[m * n_];
        const double* ui = &basis_im_[m * n_];
        double dr = 0.0, di = 0.0;  // <u_m, w>
        for (std::size_t k = 0; k < n_; ++k) {
          dr += ur[k] * wr[k] + ui[k] * wi[k];
          di += ur[k] * wi[k] - ui[k] * wr[k];
        }
        for (std::size_t k = 0; k < n_; ++k) {
          wr[k] -= dr * ur[k] - di * ui[k];
          wi[k] -= dr * ui[k] + di * ur[k];
        }
      }
    }

    double nrm2 = 0.0;
    for (std::size_t k = 0; k < n_; ++k) nrm2 += wr[k] * wr[k] + wi[k] * wi[k];
    if (!(nrm2 > 1e-14)) return false;
    const double inv = 1.0 / std::sqrt(nrm2);
    double* ur = &basis_re_[points_ * n_];
    double* ui = &basis_im_[points_ * n_];
    for (std::size_t k = 0; k < n_; ++k) {
      ur[k] = inv * wr[k];
      ui[k] = inv * wi[k];
    }
    for (std::size_t d = 1; d < n_; ++d) {
      double ar = 0.0, ai = 0.0;  // sum_k u[k] conj(u[k-d])
      for (std::size_t k = d; k < n_; ++k) {
        ar += ur[k] * ur[k - d] + ui[k] * ui[k - d];
        ai += ui[k] * ur[k - d] - ur[k] * ui[k - d];
      }
      tau_re_[d] += ar;
      tau_im_[d] += ai;
    }
    ++points_;
    return true;
  }

  std::size_t points() const { return points_; }

 private:
  std::size_t n_;
  std::size_t points_ = 0;
  std::vector<double> tau_re_, tau_im_;
  std::vector<double> basis_re_, basis_im_;
};

double wrap_angle(double x) {
  x = std::fmod(x, kTwoPi);
  return x < 0.0 ? x + kTwoPi : x;
}

// log |e^{ia} - e^{ib}| = log(2 |sin((a-b)/2)|); -inf marks a collision.
double log_chord(double a, double b) {
  const double s = std::abs(std::sin(0.5 * (a - b)));
  return s > 0.0 ? std::log(2.0 * s) : -std::numeric_limits<double>::infinity();
}

class MetropolisChain {
 public:
  MetropolisChain(std::int64_t n, double beta, double width, RandomStream& stream)
      : n_(static_cast<std::size_t>(n)), beta_(beta), width_(width), stream_(stream) {
    // Deterministic low-energy start: the equally spaced configuration.
    theta_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j)
      theta_[j] = kTwoPi * (static_cast<double>(j) + 0.5) / static_cast<double>(n_);
  }

  void sweep() {
    for (std::size_t j = 0; j < n_; ++j) {
      const double prop = wrap_angle(theta_[j] + width_ * (stream_.uniform() - 0.5));
      double delta = 0.0;
      if (beta_ > 0.0) {
        for (std::size_t k = 0; k < n_; ++k) {
          if (k == j) continue;
          delta += log_chord(prop, theta_[k]) - log_chord(theta_[j], theta_[k]);
        }
        delta *= beta_;
      }
      if (delta >= 0.0 || std::log(1.0 - stream_.uniform()) < delta) theta_[j] = prop;
    }
  }

  // Re t_1, the thinning pilot's tracked observable.
  double re_trace1() const {
    double s = 0.0;
    for (const double t : theta_) s += std::cos(t);
    return s;
  }

  const std::vector<double>& state() const { return theta_; }

 private:
  std::size_t n_;
  double beta_;
  double width_;
  RandomStream& stream_;
  std::vector<double> theta_;
};

void resolve_mcmc_defaults(std::int64_t n, McmcParams& p) {
  if (p.proposal_width <= 0.0) p.proposal_width = kTwoPi / static_cast<double>(n);
  if (p.burn_in_sweeps <= 0) p.burn_in_sweeps = 100 * n;
}

}  // namespace

EigenvalueSample sample_cue(std::int64_t n, RandomStream& stream) {
  if (n < 1) throw std::invalid_argument("sample_cue: N must be >= 1");
  DppState state(n);
  EigenvalueSample out;
  out.angles.reserve(static_cast<std::size_t>(n));
  const double nd = static_cast<double>(n);
  // Tiny negative conditional densities are rounding debris; anything
  // beyond this scale-aware tolerance means the basis degenerated.
  const double neg_tol = 1e-12 * nd;

  for (std::int64_t i = 1; i <= n; ++i) {
    bool accepted = false;
    for (std::int64_t attempt = 0; attempt < kRejectionCap; ++attempt) {
      const double x = stream.uniform(kTwoPi);
      const double v = stream.uniform();
      double gx = state.g(x);
      if (gx < 0.0) {
        if (gx < -neg_tol)
          throw SamplingError("sample_cue: conditional density " + std::to_string(gx / kTwoPi) +
                              " below rounding tolerance at point " + std::to_string(i));
        gx = 0.0;
      }
      if (v * nd <= gx) {
        if (!state.add_point(x))
          throw SamplingError("sample_cue: degenerate basis at point " + std::to_string(i));
        out.angles.push_back(x);
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw SamplingError("sample_cue: rejection cap exceeded at point " + std::to_string(i));
  }
  std::sort(out.angles.begin(), out.angles.end());
  return out;
}

EigenvalueSample sample_cbe_mcmc(std::int64_t n, double beta, const McmcParams& params,
                                 RandomStream& stream) {
  if (n < 1) throw std::invalid_argument("sample_cbe_mcmc: N must be >= 1");
  if (beta < 0.0 || !std::isfinite(beta))
    throw std::invalid_argument("sample_cbe_mcmc: beta must be finite and >= 0");
  McmcParams p = params;
  resolve_mcmc_defaults(n, p);
  if (p.thinning_sweeps < 1)
    throw std::invalid_argument("sample_cbe_mcmc: thinning not resolved (see resolve_thinning)");

  MetropolisChain chain(n, beta, p.proposal_width, stream);
  for (std::int64_t s = 0; s < p.burn_in_sweeps + p.thinning_sweeps; ++s) chain.sweep();

  EigenvalueSample out;
  out.angles = chain.state();
  std::sort(out.angles.begin(), out.angles.end());
  return out;
}

std::int64_t resolve_thinning(std::int64_t n, double beta, const McmcParams& params,
                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("resolve_thinning: N must be >= 1");
  McmcParams p = params;
  resolve_mcmc_defaults(n, p);
  if (p.thinning_sweeps >= 1) return p.thinning_sweeps;

  constexpr std::int64_t kPilotSweeps = 4096;
  RandomStream stream(seed, kReservedStreamBase + 1);
  MetropolisChain chain(n, beta, p.proposal_width, stream);
  for (std::int64_t s = 0; s < p.burn_in_sweeps; ++s) chain.sweep();
  std::vector<double> series(kPilotSweeps);
  for (auto& v : series) {
    chain.sweep();
    v = chain.re_trace1();
  }
  const double tau = integrated_autocorrelation_time(series);
  // Interval strictly above twice the autocorrelation time.
  return static_cast<std::int64_t>(std::floor(2.0 * tau)) + 1;
}

double log_partition_function_cue(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("partition_function_cue: N must be >= 1");
  return static_cast<double>(n) * std::log(kTwoPi) + std::lgamma(static_cast<double>(n) + 1.0);
}

double partition_function_cue(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("partition_function_cue: N must be >= 1");
  if (n > 20)
    throw std::domain_error(
        "partition_function_cue: use log_partition_function_cue for N > 20");
  return std::exp(log_partition_function_cue(n));
}

}  // namespace cuestat
