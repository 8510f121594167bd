#include "cglab/gibbs_sampler.hpp"

#include <cmath>

#include "cglab/errors.hpp"
#include "cglab/quadrature.hpp"
#include "cglab/rng.hpp"

namespace cglab {

double batch_means_se(const std::vector<double>& series, int batches) {
  const std::size_t n = series.size();
  if (batches < 2 || n < static_cast<std::size_t>(batches)) {
    throw PreconditionError("batch means need at least two non-empty batches");
  }
  const std::size_t per = n / static_cast<std::size_t>(batches);
  std::vector<double> means(static_cast<std::size_t>(batches), 0.0);
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < per; ++k) s += series[static_cast<std::size_t>(b) * per + k];
    means[static_cast<std::size_t>(b)] = s / static_cast<double>(per);
  }
  double mu = 0.0;
  for (double m : means) mu += m;
  mu /= batches;
  double var = 0.0;
  for (double m : means) var += (m - mu) * (m - mu);
  var /= batches - 1;
  return std::sqrt(var / batches);
}

namespace {

struct Series {
  std::vector<std::vector<double>> grad, A, a, closure;
};

Series sample(const TiltedGibbsSampler& s, bool decomposition) {
  const SamplerConfig& c = s.config;
  const int d = static_cast<int>(s.tilt.size());
  if (d < 1 || d > 3) throw PreconditionError("tilt dimension must be between 1 and 3");
  if (c.L < 8) throw PreconditionError("sampler torus side must be at least 8");
  if (c.burn_in < 1000) throw PreconditionError("sampler burn-in must be at least 1000 sweeps");
  if (!(c.step > 0.0) || c.stride < 1 || c.samples < c.batches) {
    throw PreconditionError("invalid sampler step, stride or sample count");
  }
  s.potential.validate();

  int n = 1;
  for (int i = 0; i < d; ++i) n *= c.L;
  std::vector<int> fwd(static_cast<std::size_t>(n) * d);
  std::vector<int> bwd(static_cast<std::size_t>(n) * d);
  for (int x = 0; x < n; ++x) {
    int stride = 1;
    for (int i = 0; i < d; ++i) {
      const int coord = (x / stride) % c.L;
      const int up = coord + 1 == c.L ? x - (c.L - 1) * stride : x + stride;
      const int down = coord == 0 ? x + (c.L - 1) * stride : x - stride;
      fwd[static_cast<std::size_t>(x) * d + i] = up;
      bwd[static_cast<std::size_t>(x) * d + i] = down;
      stride *= c.L;
    }
  }

  const Potential& V = s.potential;
  Rng rng = make_stream(s.seed, s.stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  std::vector<double> dv(static_cast<std::size_t>(n) * d, 0.0);
  const double noise = std::sqrt(2.0 * c.step);

  auto bond_forces = [&] {
    for (int x = 0; x < n; ++x) {
      for (int i = 0; i < d; ++i) {
        const std::size_t b = static_cast<std::size_t>(x) * d + i;
        dv[b] = V.dV(phi[static_cast<std::size_t>(fwd[b])] - phi[static_cast<std::size_t>(x)] +
                     s.tilt[static_cast<std::size_t>(i)]);
      }
    }
  };
  auto sweep = [&] {
    bond_forces();
    for (int x = 0; x < n; ++x) {
      double grad_h = 0.0;
      for (int i = 0; i < d; ++i) {
        const std::size_t b = static_cast<std::size_t>(x) * d + i;
        grad_h += dv[static_cast<std::size_t>(bwd[b]) * d + i] - dv[b];
      }
      phi[static_cast<std::size_t>(x)] += -c.step * grad_h + noise * normal(rng);
    }
  };

  const QuadratureRule lambda = gauss_legendre(16, 0.0, 1.0);
  Series out;
  out.grad.assign(static_cast<std::size_t>(d), std::vector<double>{});
  if (decomposition) {
    out.A = out.a = out.closure = out.grad;
  }
  for (int i = 0; i < d; ++i) {
    out.grad[static_cast<std::size_t>(i)].reserve(static_cast<std::size_t>(c.samples));
  }

  auto check = [&](long long step) {
    double m = 0.0;
    for (double v : phi) {
      if (!std::isfinite(v)) throw InstabilityError("sampler produced a non-finite height", step);
      m += v;
    }
    m /= n;
    for (double& v : phi) v -= m;  // the zero mode does not enter eta
    for (double v : phi) {
      if (std::abs(v) > c.divergence_bound) throw InstabilityError("sampler diverged", step);
    }
  };

  for (long long t = 0; t < c.burn_in; ++t) {
    sweep();
    if ((t + 1) % 1000 == 0) check(t);
  }
  const int sites = c.spatial_average ? n : 1;
  for (long long k = 0; k < c.samples; ++k) {
    for (int t = 0; t < c.stride; ++t) sweep();
    check(c.burn_in + (k + 1) * c.stride);
    for (int i = 0; i < d; ++i) {
      const double u = s.tilt[static_cast<std::size_t>(i)];
      double g = 0.0;
      double A = 0.0;
      double a = 0.0;
      for (int x = 0; x < sites; ++x) {
        const std::size_t b = static_cast<std::size_t>(x) * d + i;
        const double eta =
            phi[static_cast<std::size_t>(fwd[b])] - phi[static_cast<std::size_t>(x)] + u;
        g += V.dV(eta);
        if (decomposition) {
          double integral = 0.0;
          for (std::size_t q = 0; q < lambda.nodes.size(); ++q) {
            integral += lambda.weights[q] * V.d2V(eta - lambda.nodes[q] * u);
          }
          A += integral;
          a += V.dV(eta - u);
        }
      }
      const auto ui = static_cast<std::size_t>(i);
      out.grad[ui].push_back(g / sites);
      if (decomposition) {
        out.A[ui].push_back(A / sites);
        out.a[ui].push_back(a / sites);
        out.closure[ui].push_back((A * u + a - g) / sites);
      }
    }
  }
  return out;
}

GradSigmaEstimate summarize(const std::vector<std::vector<double>>& series, int batches) {
  GradSigmaEstimate e;
  for (const auto& s : series) {
    double m = 0.0;
    for (double v : s) m += v;
    e.mean.push_back(m / static_cast<double>(s.size()));
    e.se.push_back(batch_means_se(s, batches));
  }
  return e;
}

}  // namespace

GradSigmaEstimate estimate_grad_sigma_mcmc(const TiltedGibbsSampler& s) {
  const Series series = sample(s, false);
  return summarize(series.grad, s.config.batches);
}

DecompositionEstimate estimate_A_a(const TiltedGibbsSampler& s) {
  const Series series = sample(s, true);
  DecompositionEstimate e;
  e.grad = summarize(series.grad, s.config.batches);
  e.A_diag = summarize(series.A, s.config.batches);
  e.a = summarize(series.a, s.config.batches);
  e.closure_se = summarize(series.closure, s.config.batches).se;
  return e;
}

}  // namespace cglab
