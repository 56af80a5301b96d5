#include "fspde/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fspde/error.hpp"

namespace fspde {

SpectralOperator::SpectralOperator(std::vector<double> eigenvalues, std::string label)
    : eig_(std::move(eigenvalues)), label_(std::move(label)) {
  if (eig_.empty()) fail(ErrorKind::Domain, "operator needs at least one mode");
  for (std::size_t k = 0; k < eig_.size(); ++k) {
    if (!std::isfinite(eig_[k]) || !(eig_[k] > 0.0)) {
      fail(ErrorKind::Domain, "eigenvalues must be finite and positive");
    }
    if (k > 0 && !(eig_[k] > eig_[k - 1])) {
      fail(ErrorKind::Domain, "eigenvalues must be strictly increasing");
    }
  }
}

SpectralOperator dirichlet_laplacian(std::size_t modes, double length) {
  if (modes == 0) fail(ErrorKind::Domain, "mode count must be positive");
  if (!(length > 0.0)) fail(ErrorKind::Domain, "domain length must be positive");
  std::vector<double> eig(modes);
  for (std::size_t k = 0; k < modes; ++k) {
    const double w = static_cast<double>(k + 1) * std::numbers::pi / length;
    eig[k] = w * w;
  }
  return SpectralOperator(std::move(eig), "dirichlet-laplacian-[0," + std::to_string(length) + "]");
}

namespace {
void check_size(const SpectralOperator& op, std::span<const double> coeffs) {
  if (coeffs.size() != op.modes()) {
    fail(ErrorKind::GridMismatch, "coefficient vector length does not match operator modes");
  }
}
}  // namespace

std::vector<double> semigroup_apply(const SpectralOperator& op, double t,
                                    std::span<const double> coeffs) {
  if (t < 0.0) fail(ErrorKind::Domain, "semigroup time must be non-negative");
  check_size(op, coeffs);
  std::vector<double> out(coeffs.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::exp(-op.eigenvalue(k) * t) * coeffs[k];
  return out;
}

std::vector<double> frac_power_apply(const SpectralOperator& op, double beta,
                                     std::span<const double> coeffs) {
  if (beta < 0.0) fail(ErrorKind::Domain, "fractional power must be non-negative");
  check_size(op, coeffs);
  std::vector<double> out(coeffs.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::pow(op.eigenvalue(k), beta) * coeffs[k];
  return out;
}

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double graph_norm(const SpectralOperator& op, double beta, std::span<const double> coeffs) {
  return euclidean_norm(frac_power_apply(op, beta, coeffs));
}

void SemigroupExponents::validate() const {
  auto bad = [](const char* msg) { fail(ErrorKind::Domain, msg); };
  if (!(gamma >= 0.0 && gamma <= varsigma && varsigma <= 1.0)) bad("need 0 <= gamma <= varsigma <= 1");
  if (!(upsilon >= 0.0 && upsilon < 1.0)) bad("upsilon must lie in [0, 1)");
  if (!(mu > 0.0 && mu < 1.0 - upsilon)) bad("mu must lie in (0, 1 - upsilon)");
  if (!(varrho > 0.0 && varrho <= 1.0)) bad("varrho must lie in (0, 1]");
  if (!(nu > 0.0 && nu <= 1.0)) bad("nu must lie in (0, 1]");
  if (!(nu < gamma + varrho)) bad("need nu < gamma + varrho");
}

SemigroupBoundReport semigroup_bound_report(const SpectralOperator& op,
                                            const SemigroupExponents& ex, std::size_t levels,
                                            double horizon) {
  ex.validate();
  if (levels == 0) fail(ErrorKind::Domain, "need at least one sampling level");
  std::vector<double> gaps(levels);
  for (std::size_t i = 0; i < levels; ++i) gaps[i] = horizon * std::ldexp(1.0, -static_cast<int>(i + 1));

  const auto eig = op.eigenvalues();
  const double l1 = op.lowest();
  // Per-mode multipliers; operator norms of diagonal maps are max |multiplier|.
  auto sup_modes = [&](auto&& multiplier) {
    double m = 0.0;
    for (double l : eig) m = std::max(m, std::abs(multiplier(l)));
    return m;
  };

  SemigroupBoundReport r;
  for (double t : gaps) {
    const double lhs1 = sup_modes([&](double l) { return std::pow(l, ex.varsigma - ex.gamma) * std::exp(-l * t); });
    r.e1 = std::max(r.e1, lhs1 / (std::pow(t, ex.gamma - ex.varsigma) * std::exp(-l1 * t)));
    const double lhs2 = sup_modes([&](double l) { return std::pow(l, -ex.mu) * std::expm1(-l * t); });
    r.e2 = std::max(r.e2, lhs2 / std::pow(t, ex.mu));
    r.samples += 2;
  }
  for (double rq : gaps) {
    for (double tr : gaps) {
      if (rq + tr > horizon) continue;
      const double lhs3 = sup_modes([&](double l) {
        return std::pow(l, ex.gamma - ex.nu) * std::exp(-l * tr) * (-std::expm1(-l * rq));
      });
      r.e3 = std::max(r.e3, lhs3 / (std::pow(rq, ex.varrho) * std::pow(tr, ex.nu - ex.varrho - ex.gamma)));
      ++r.samples;
    }
  }
  for (double rq : gaps) {
    for (double sr : gaps) {
      for (double ts : gaps) {
        if (rq + sr + ts > horizon) continue;
        // e^{-l(t-r)} - e^{-l(s-r)} - e^{-l(t-q)} + e^{-l(s-q)}
        //   = e^{-l(s-r)} (e^{-l(t-s)} - 1)(1 - e^{-l(r-q)})
        const double lhs4 = sup_modes([&](double l) {
          return std::exp(-l * sr) * std::expm1(-l * ts) * (-std::expm1(-l * rq));
        });
        const double rhs = std::pow(ts, ex.varrho) * std::pow(rq, ex.nu) *
                           std::pow(sr, -(ex.varrho + ex.nu));
        r.e4 = std::max(r.e4, lhs4 / rhs);
        ++r.samples;
      }
    }
  }
  return r;
}

}  // namespace fspde
