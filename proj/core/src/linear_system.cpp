#include <cmath>

#include "fspde/fastslow.hpp"

namespace fspde {

LinearTestSystem linear_test_system(std::size_t modes) {
  LinearTestSystem sys;
  const auto M = static_cast<double>(modes);

  sys.config.op = dirichlet_laplacian(modes);
  sys.config.noise.hurst = 0.7;
  sys.config.noise.decay = 3.0;
  sys.config.noise.modes = modes;
  sys.config.exponents = FracExponents::defaults(0.7);
  sys.config.x0.resize(modes);
  for (std::size_t k = 0; k < modes; ++k) sys.config.x0[k] = 1.0 / static_cast<double>(k + 1);
  sys.config.y0.assign(modes, 0.0);

  auto d = [](std::span<const double> x, std::span<double> out) {
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = 0.5 + 0.25 * std::sin(x[k]);
  };

  sys.coeffs.b = [](std::span<const double>, std::span<const double> y, std::span<double> out) {
    for (std::size_t k = 0; k < y.size(); ++k) out[k] = y[k];
  };
  sys.coeffs.g = [](std::span<const double> x, std::span<double> out) {
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = 0.5 + 0.2 * std::sin(x[k]);
  };
  sys.coeffs.F = [d](std::span<const double> x, std::span<const double> y, std::span<double> out) {
    d(x, out);
    for (std::size_t k = 0; k < y.size(); ++k) out[k] -= y[k];
  };
  sys.coeffs.G = [](std::span<const double>, std::span<const double> y, std::span<double> out) {
    for (std::size_t k = 0; k < y.size(); ++k) out[k] = 0.5;
  };

  // |d|^2 <= 0.5625 M and |G|^2 = 0.25 M fix the growth and dissipativity constants.
  const double d_sq = 0.5625 * M;
  sys.params.c1 = 1.0;
  sys.params.c2 = 2.0;
  sys.params.c3 = std::max(2.0, 2.0 * d_sq + 0.25 * M);
  sys.params.c4 = 1.0;
  sys.params.beta1 = 0.5;
  sys.params.beta2 = 0.5 * d_sq;
  sys.params.beta3 = -1.0;
  sys.params.lg = 0.2;

  sys.fast.c = 1.0;
  sys.fast.d = d;
  sys.fast.g_diag.assign(modes, 0.5);
  sys.drift.b_diag.assign(modes, 1.0);

  const SpectralOperator op = sys.config.op;
  const LinearFastSpec fast = sys.fast;
  const LinearDriftSpec drift = sys.drift;
  sys.bbar = [op, fast, drift](std::span<const double> x, std::span<double> out) {
    const auto v = analytic_bbar_linear(x, op, fast, drift);
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k];
  };
  return sys;
}

}  // namespace fspde
