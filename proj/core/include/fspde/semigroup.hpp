#pragma once

#include <span>
#include <string>
#include <vector>

namespace fspde {

/// Diagonal representation of -A: eigenvalues 0 < l_1 < l_2 < ... < l_M.
class SpectralOperator {
 public:
  SpectralOperator(std::vector<double> eigenvalues, std::string label);

  std::size_t modes() const { return eig_.size(); }
  double eigenvalue(std::size_t k) const { return eig_[k]; }
  std::span<const double> eigenvalues() const { return eig_; }
  double lowest() const { return eig_.front(); }
  const std::string& label() const { return label_; }

 private:
  std::vector<double> eig_;
  std::string label_;
};

/// Dirichlet Laplacian on [0, L]: l_k = (k pi / L)^2, k = 1..M.
SpectralOperator dirichlet_laplacian(std::size_t modes, double length = 1.0);

/// S_t x: mode k multiplied by exp(-l_k t). Throws Domain for t < 0.
std::vector<double> semigroup_apply(const SpectralOperator& op, double t,
                                    std::span<const double> coeffs);
/// (-A)^beta x: mode k multiplied by l_k^beta. Throws Domain for beta < 0.
std::vector<double> frac_power_apply(const SpectralOperator& op, double beta,
                                     std::span<const double> coeffs);
/// |x|_beta = |(-A)^beta x|.
double graph_norm(const SpectralOperator& op, double beta, std::span<const double> coeffs);

double euclidean_norm(std::span<const double> v);

/// Exponents of the four semigroup estimates.
struct SemigroupExponents {
  double gamma = 0.25;    // source space V_gamma
  double varsigma = 0.5;  // target space V_varsigma, gamma <= varsigma <= 1
  double upsilon = 0.0;   // in [0, 1)
  double mu = 0.5;        // in (0, 1 - upsilon)
  double varrho = 0.25;   // in (0, 1]
  double nu = 0.25;       // in (0, 1], nu < gamma + varrho

  void validate() const;
};

/// Sampled sup of LHS / (RHS without constant) for each estimate. Operator
/// norms are exact for the diagonal operator (maximum over modes).
///   e1: |S_t|_{V_gamma -> V_varsigma} / (t^{gamma - varsigma} e^{-l_1 t})
///   e2: |S_t - id|_{V_{upsilon+mu} -> V_upsilon} / t^mu
///   e3: |S_{t-r} - S_{t-q}|_{V_nu -> V_gamma} / ((r-q)^varrho (t-r)^{nu-varrho-gamma})
///   e4: |S_{t-r} - S_{s-r} - S_{t-q} + S_{s-q}| / ((t-s)^varrho (r-q)^nu (s-r)^{-(varrho+nu)})
/// Gaps are drawn from {2^-1, ..., 2^-levels}; e3 and e4 use every
/// combination of gaps whose sum stays within the horizon.
struct SemigroupBoundReport {
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
  double e4 = 0.0;
  std::size_t samples = 0;
};

SemigroupBoundReport semigroup_bound_report(const SpectralOperator& op,
                                            const SemigroupExponents& ex, std::size_t levels,
                                            double horizon = 1.0);

}  // namespace fspde
