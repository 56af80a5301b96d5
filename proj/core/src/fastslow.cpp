#include "fspde/fastslow.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "fspde/error.hpp"
#include "fspde/rng.hpp"

namespace fspde {

double c3_threshold(double lambda1) { return 2.0 * lambda1 * lambda1 / (2.0 + lambda1); }

bool ConditionReport::pass() const {
  return std::all_of(lines.begin(), lines.end(), [](const ConditionLine& l) { return l.pass; });
}

std::string ConditionReport::text() const {
  std::ostringstream os;
  for (const auto& l : lines) {
    os << (l.pass ? "PASS " : "FAIL ") << l.condition << ": " << l.detail << '\n';
  }
  return os.str();
}

void ConditionReport::require() const {
  std::string failed;
  for (const auto& l : lines) {
    if (!l.pass) failed += (failed.empty() ? "" : "; ") + l.condition + ": " + l.detail;
  }
  if (!failed.empty()) fail(ErrorKind::Condition, "conditions rejected: " + failed);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double sq_norm(std::span<const double> a) { return dot(a, a); }

std::vector<double> sub(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

std::vector<double> eval_pair(const PairFn& fn, std::span<const double> x, std::span<const double> y) {
  std::vector<double> out(y.size(), 0.0);
  if (fn) fn(x, y, out);
  return out;
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Largest |b| over random points of the box [-radius, radius]^2M.
double box_sup(const PairFn& fn, std::size_t modes, double radius, std::size_t samples,
               NormalStream& rng) {
  std::vector<double> x(modes), y(modes), out(modes);
  double best = 0.0;
  for (std::size_t p = 0; p < samples; ++p) {
    for (auto& v : x) v = rng.uniform(-radius, radius);
    for (auto& v : y) v = rng.uniform(-radius, radius);
    std::fill(out.begin(), out.end(), 0.0);
    if (fn) fn(x, y, out);
    best = std::max(best, std::sqrt(sq_norm(out)));
  }
  return best;
}

}  // namespace

ConditionReport validate_conditions(const FastSlowCoefficients& c, const DissipativityParams& p,
                                    const SpectralOperator& op, const ValidationBudget& budget) {
  const std::size_t M = op.modes();
  NormalStream rng(derive_seed(budget.seed, StreamTag::Validation));
  auto point = [&] {
    std::vector<double> v(M);
    for (auto& x : v) x = rng.uniform(-budget.radius, budget.radius);
    return v;
  };

  double r_c1 = 0, r_c2 = 0, r_c3 = 0, r_c4 = 0, r_lg = 0;
  double worst_a4a = -INFINITY, worst_a4b = -INFINITY;
  for (std::size_t s = 0; s < budget.pairs; ++s) {
    const auto x1 = point(), y1 = point(), x2 = point(), y2 = point();
    const double gap = sq_norm(sub(x1, x2)) + sq_norm(sub(y1, y2));
    const auto b1 = eval_pair(c.b, x1, y1), b2 = eval_pair(c.b, x2, y2);
    const auto f1 = eval_pair(c.F, x1, y1), f2 = eval_pair(c.F, x2, y2);
    const auto g1 = eval_pair(c.G, x1, y1), g2 = eval_pair(c.G, x2, y2);
    if (gap > 0.0) {
      r_c1 = std::max(r_c1, sq_norm(sub(b1, b2)) / gap);
      r_c2 = std::max(r_c2, (sq_norm(sub(f1, f2)) + sq_norm(sub(g1, g2))) / gap);
    }
    const double size = 1.0 + sq_norm(x1) + sq_norm(y1);
    r_c3 = std::max(r_c3, (sq_norm(f1) + sq_norm(g1)) / size);
    r_c4 = std::max(r_c4, sq_norm(b1) / size);
    if (c.g) {
      std::vector<double> ga(M, 0.0), gb(M, 0.0);
      c.g(x1, ga);
      c.g(x2, gb);
      const double dx = std::sqrt(sq_norm(sub(x1, x2)));
      double sup = 0.0;
      for (std::size_t i = 0; i < M; ++i) sup = std::max(sup, std::abs(ga[i] - gb[i]));
      if (dx > 0.0) r_lg = std::max(r_lg, sup / dx);
    }
    // (A4): excess of each inequality, relative to the size of its terms.
    const double y_sq = sq_norm(y1);
    const double a = dot(y1, f1) + p.beta1 * y_sq - p.beta2;
    worst_a4a = std::max(worst_a4a, a / (1.0 + std::abs(p.beta1) * y_sq + std::abs(p.beta2)));
    const auto f12 = eval_pair(c.F, x1, y2);
    const auto dy = sub(y1, y2);
    const double dy_sq = sq_norm(dy);
    if (dy_sq > 0.0) {
      const double m = dot(dy, sub(f1, f12)) - p.beta3 * dy_sq;
      worst_a4b = std::max(worst_a4b, m / ((1.0 + std::abs(p.beta3)) * dy_sq));
    }
  }

  ConditionReport rep;
  const double slack = budget.slack;
  auto bound_line = [&](const std::string& cond, const char* name, double declared, double measured) {
    const bool ok = measured <= slack * declared;
    rep.lines.push_back({cond, ok,
                         std::string(name) + " declared " + fmt_num(declared) + ", sampled sup " +
                             fmt_num(measured) + (ok ? "" : " exceeds the declared constant")});
  };
  bound_line("(A1) b Lipschitz", "C_1", p.c1, r_c1);
  bound_line("(A1) F,G Lipschitz", "C_2", p.c2, r_c2);
  bound_line("(A2) F,G growth", "C_3", p.c3, r_c3);
  bound_line("(A2) b growth", "C_4", p.c4, r_c4);
  if (c.g && !std::isnan(p.lg)) bound_line("(A3) g Lipschitz", "L_g", p.lg, r_lg);

  rep.lines.push_back({"(A4) beta_1 > 0", p.beta1 > 0.0,
                       "beta_1 = " + fmt_num(p.beta1) + (p.beta1 > 0.0 ? "" : " must be > 0")});
  const double tol = slack - 1.0;
  rep.lines.push_back({"(A4) <y, F(x,y)> <= -beta_1 |y|^2 + beta_2", worst_a4a <= tol,
                       "largest relative excess " + fmt_num(worst_a4a)});
  rep.lines.push_back({"(A4) monotonicity beta_3", worst_a4b <= tol,
                       "largest relative excess " + fmt_num(worst_a4b)});

  const double l1 = op.lowest();
  const double eta = p.eta(l1);
  const double kappa = p.kappa(l1);
  rep.lines.push_back({"(A5) eta", eta > 0.0,
                       "eta = 2*lambda_1 - 2*beta_3 - C_2 = " + fmt_num(eta) +
                           (eta > 0.0 ? " > 0" : " <= 0, must be > 0")});
  rep.lines.push_back({"(A5) kappa", kappa > 0.0,
                       "kappa = 2*lambda_1 + 2*beta_1 - C_3 = " + fmt_num(kappa) +
                           (kappa > 0.0 ? " > 0" : " <= 0, must be > 0")});

  const double limit = c3_threshold(l1);
  NormalStream probe_rng(derive_seed(budget.seed, StreamTag::Validation, {1}));
  bool bounded_ok = false;
  if (c.bounded_fast) {
    // Probe the declared boundedness of F and G on growing boxes.
    const PairFn fg = [&](std::span<const double> x, std::span<const double> y, std::span<double> out) {
      const auto f = eval_pair(c.F, x, y);
      const auto g = eval_pair(c.G, x, y);
      out[0] = std::sqrt(sq_norm(f)) + std::sqrt(sq_norm(g));
      for (std::size_t i = 1; i < out.size(); ++i) out[i] = 0.0;
    };
    const double s1 = box_sup(fg, M, budget.radius, budget.pairs / 4 + 1, probe_rng);
    const double s4 = box_sup(fg, M, 4.0 * budget.radius, budget.pairs / 4 + 1, probe_rng);
    bounded_ok = std::isfinite(s4) && s4 <= 1.5 * s1 + 1e-12;
  }
  if (bounded_ok) {
    rep.lines.push_back({"(Thm) C_3 threshold", true,
                         "skipped: F and G declared bounded and the box probe agrees"});
  } else {
    const bool ok = p.c3 < limit;
    rep.lines.push_back({"(Thm) C_3 threshold", ok,
                         "C_3 = " + fmt_num(p.c3) + (ok ? " < " : " >= ") +
                             "2*lambda_1^2/(2+lambda_1) = " + fmt_num(limit)});
  }

  const double sup_r = box_sup(c.b, M, budget.radius, budget.pairs / 4 + 1, probe_rng);
  const double sup_2r = box_sup(c.b, M, 2.0 * budget.radius, budget.pairs / 4 + 1, probe_rng);
  if (!std::isnan(c.b_bound)) {
    const bool ok = std::max(sup_r, sup_2r) <= slack * c.b_bound;
    rep.lines.push_back({"(B1) sup |b| < inf", ok,
                         "declared bound " + fmt_num(c.b_bound) + ", box sups " + fmt_num(sup_r) +
                             " / " + fmt_num(sup_2r)});
  } else {
    const bool ok = std::isfinite(sup_r) && std::isfinite(sup_2r);
    rep.lines.push_back({"(B1) sup |b| < inf", ok,
                         "box probe only: sup over radius " + fmt_num(budget.radius) + " is " +
                             fmt_num(sup_r) + ", over radius " + fmt_num(2.0 * budget.radius) +
                             " is " + fmt_num(sup_2r)});
  }
  return rep;
}

double FastSlowConfig::effective_delta() const {
  if (delta > 0.0) return delta;
  return eps * std::sqrt(-std::log(eps));
}

std::size_t FastSlowConfig::steps() const {
  MildSolveConfig m;
  m.dt = dt;
  m.horizon = horizon;
  return m.steps();
}

std::size_t FastSlowConfig::substeps() const {
  const double want = 1.0 / (eps * c_sub);
  const auto n = static_cast<std::size_t>(std::ceil(want - 1e-9));
  const double h = dt / static_cast<double>(n);
  if (h < min_fast_step) {
    fail(ErrorKind::Resolution, "fast step " + fmt_num(h) + " is below the floor " +
                                    fmt_num(min_fast_step) + " (eps too small for dt)");
  }
  return std::max<std::size_t>(n, 1);
}

std::vector<double> FastSlowConfig::grid() const { return uniform_grid(horizon, steps() + 1); }

std::vector<double> FastSlowConfig::initial_x() const {
  return x0.empty() ? std::vector<double>(op.modes(), 0.0) : x0;
}
std::vector<double> FastSlowConfig::initial_y() const {
  return y0.empty() ? std::vector<double>(op.modes(), 0.0) : y0;
}

void FastSlowConfig::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::Config, "eps must lie in (0, 1)");
  const double d = effective_delta();
  if (!(d > eps && d < 1.0)) fail(ErrorKind::Config, "delta must satisfy eps < delta < 1");
  noise.validate();
  exponents.validate(noise.hurst);
  if (noise.modes != op.modes()) fail(ErrorKind::Config, "noise modes must equal operator modes");
  if ((!x0.empty() && x0.size() != op.modes()) || (!y0.empty() && y0.size() != op.modes())) {
    fail(ErrorKind::Config, "initial values must have one entry per mode");
  }
  if (!(c_sub > 0.0 && c_sub <= 1.0)) fail(ErrorKind::Config, "c_sub must lie in (0, 1]");
  if (replicates == 0) fail(ErrorKind::Config, "need at least one replicate");
  (void)steps();
  (void)substeps();
}

std::uint64_t ReplicateNoise::digest() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  mix(fbm.data().data(), fbm.data().size() * sizeof(double));
  mix(fbm.times().data(), fbm.times().size() * sizeof(double));
  mix(&wiener_seed, sizeof wiener_seed);
  return h;
}

ReplicateNoise replicate_noise(const FastSlowConfig& config, std::uint64_t replicate_seed) {
  return {sample_qfbm(config.noise, config.grid(), replicate_seed), replicate_seed};
}

namespace {

// Sub-stepper of the fast equation at rate 1/eps; one Wiener stream per mode.
class FastStepper {
 public:
  FastStepper(const SpectralOperator& op, double h, double rate, std::uint64_t seed, StreamTag tag)
      : w_(StepWeights::make(op.eigenvalues(), h, rate)), sqrt_h_(std::sqrt(h)) {
    for (std::size_t i = 0; i < op.modes(); ++i) streams_.emplace_back(derive_seed(seed, tag, {i}));
    f_.resize(op.modes());
    g_.resize(op.modes());
  }

  void step(const FastSlowCoefficients& c, std::span<const double> x, std::vector<double>& y) {
    std::fill(f_.begin(), f_.end(), 0.0);
    std::fill(g_.begin(), g_.end(), 0.0);
    if (c.F) c.F(x, y, f_);
    if (c.G) c.G(x, y, g_);
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double dw = sqrt_h_ * streams_[k]();
      y[k] = w_.decay[k] * y[k] + w_.drift[k] * f_[k] + w_.wiener[k] * g_[k] * dw;
      if (!std::isfinite(y[k])) fail(ErrorKind::BlowUp, "fast component blew up");
    }
  }

 private:
  StepWeights w_;
  double sqrt_h_;
  std::vector<NormalStream> streams_;
  std::vector<double> f_, g_;
};

// Weights of b(X_j, Y_m) in the slow update: e^{-l (dt - (m+1) h)} (1 - e^{-l h}) / l.
std::vector<double> substep_weights(const SpectralOperator& op, double dt, std::size_t n) {
  const std::size_t M = op.modes();
  const double h = dt / static_cast<double>(n);
  std::vector<double> w(n * M);
  for (std::size_t k = 0; k < M; ++k) {
    const double l = op.eigenvalue(k);
    const double phi = -std::expm1(-l * h) / l;
    for (std::size_t m = 0; m < n; ++m) {
      w[m * M + k] = std::exp(-l * (dt - static_cast<double>(m + 1) * h)) * phi;
    }
  }
  return w;
}

void check_state(std::span<const double> v, std::size_t step, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x) || std::abs(x) > 1e100) {
      fail(ErrorKind::BlowUp, std::string(what) + " blew up at slow step " + std::to_string(step));
    }
  }
}

// One slow step shared by the coupled and the auxiliary systems: y is advanced
// over the sub-steps with x_fast frozen, the slow drift uses b(x_drift, y_m)
// and the fBm term uses g(x_noise).
void slow_step(const SpectralOperator& op, const FastSlowCoefficients& c, const StepWeights& slow,
               std::span<const double> sub_w, std::size_t n, FastStepper& fast,
               std::span<const double> x_fast, std::span<const double> x_drift,
               std::span<const double> x_noise, std::span<const double> dB, std::vector<double>& x,
               std::vector<double>& y) {
  const std::size_t M = op.modes();
  std::vector<double> acc(M, 0.0), b(M), g(M, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    std::fill(b.begin(), b.end(), 0.0);
    if (c.b) c.b(x_drift, y, b);
    for (std::size_t k = 0; k < M; ++k) acc[k] += sub_w[m * M + k] * b[k];
    fast.step(c, x_fast, y);
  }
  if (c.g) c.g(x_noise, g);
  for (std::size_t k = 0; k < M; ++k) {
    double next = slow.decay[k] * x[k] + acc[k];
    next += slow.path[k] * g[k] * dB[k];
    x[k] = next;
  }
}

}  // namespace

FastSlowPath solve_fastslow(const FastSlowConfig& config, const FastSlowCoefficients& coeffs,
                            const ReplicateNoise& noise) {
  config.validate();
  const auto grid = config.grid();
  const std::size_t M = config.op.modes();
  const std::size_t K = grid.size();
  if (noise.fbm.size() != K || noise.fbm.dim() != M) {
    fail(ErrorKind::GridMismatch, "fBm path is not on the slow grid");
  }
  const std::size_t n = config.substeps();
  const double dt = grid[1] - grid[0];
  const StepWeights slow = StepWeights::make(config.op.eigenvalues(), dt);
  const auto sub_w = substep_weights(config.op, dt, n);
  FastStepper fast(config.op, dt / static_cast<double>(n), 1.0 / config.eps, noise.wiener_seed,
                   StreamTag::Wiener);

  std::vector<double> x = config.initial_x(), y = config.initial_y();
  std::vector<double> xs(K * M), ys(K * M), dB(M);
  std::copy(x.begin(), x.end(), xs.begin());
  std::copy(y.begin(), y.end(), ys.begin());
  for (std::size_t j = 0; j + 1 < K; ++j) {
    for (std::size_t k = 0; k < M; ++k) dB[k] = noise.fbm.value(j + 1, k) - noise.fbm.value(j, k);
    const std::vector<double> xj = x;
    slow_step(config.op, coeffs, slow, sub_w, n, fast, xj, xj, xj, dB, x, y);
    check_state(x, j + 1, "slow component");
    std::copy(x.begin(), x.end(), xs.begin() + static_cast<std::ptrdiff_t>((j + 1) * M));
    std::copy(y.begin(), y.end(), ys.begin() + static_cast<std::ptrdiff_t>((j + 1) * M));
  }
  return {Path::hilbert(grid, M, std::move(xs)), Path::hilbert(grid, M, std::move(ys)),
          noise.digest()};
}

Path solve_frozen(const SpectralOperator& op, const FastSlowCoefficients& coeffs,
                  std::span<const double> x, std::span<const double> y0, double horizon,
                  double dt, std::uint64_t seed) {
  if (x.size() != op.modes() || y0.size() != op.modes()) {
    fail(ErrorKind::GridMismatch, "frozen state and initial value need one entry per mode");
  }
  MildSolveConfig shape;
  shape.dt = dt;
  shape.horizon = horizon;
  const auto grid = shape.grid();
  FastStepper fast(op, dt, 1.0, seed, StreamTag::Frozen);
  const std::size_t M = op.modes();
  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> out(grid.size() * M);
  std::copy(y.begin(), y.end(), out.begin());
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    fast.step(coeffs, x, y);
    std::copy(y.begin(), y.end(), out.begin() + static_cast<std::ptrdiff_t>((j + 1) * M));
  }
  return Path::hilbert(grid, M, std::move(out));
}

InvariantMeasureEstimate estimate_invariant_drift(std::span<const double> x,
                                                  const SpectralOperator& op,
                                                  const FastSlowCoefficients& coeffs,
                                                  const DissipativityParams& params,
                                                  const InvariantBudget& budget) {
  const std::size_t M = op.modes();
  if (x.size() != M) fail(ErrorKind::GridMismatch, "frozen state needs one entry per mode");
  const double eta = params.eta(op.lowest());
  if (!(eta > 0.0)) fail(ErrorKind::Condition, "(A5) eta must be positive to estimate bbar");
  const double burn = budget.burn_in > 0.0 ? budget.burn_in : 5.0 / eta;
  if (burn < 5.0 / eta * (1.0 - 1e-12)) {
    fail(ErrorKind::Domain, "burn-in " + fmt_num(burn) + " is below 5/eta = " + fmt_num(5.0 / eta));
  }
  if (!(budget.dt > 0.0)) fail(ErrorKind::Domain, "time step must be positive");

  InvariantMeasureEstimate est;
  est.x.assign(x.begin(), x.end());
  est.burn_in = burn;
  est.bbar.assign(M, 0.0);
  est.se.assign(M, 0.0);
  std::vector<double> b(M);
  const auto burn_steps = static_cast<std::size_t>(std::ceil(burn / budget.dt));

  if (budget.method == InvariantBudget::Method::TimeAverage) {
    est.method = "time-average";
    const std::size_t batches = std::max<std::size_t>(budget.batches, 2);
    const auto per_batch =
        static_cast<std::size_t>(std::ceil(budget.horizon / budget.dt / static_cast<double>(batches)));
    est.horizon = static_cast<double>(per_batch * batches) * budget.dt;
    FastStepper fast(op, budget.dt, 1.0, budget.seed, StreamTag::Frozen);
    std::vector<double> y(M, 0.0);
    for (std::size_t s = 0; s < burn_steps; ++s) fast.step(coeffs, x, y);
    std::vector<std::vector<double>> means(M, std::vector<double>(batches));
    std::vector<double> acc(per_batch);
    std::vector<std::vector<double>> samples(M, std::vector<double>(per_batch));
    for (std::size_t bi = 0; bi < batches; ++bi) {
      for (std::size_t s = 0; s < per_batch; ++s) {
        std::fill(b.begin(), b.end(), 0.0);
        if (coeffs.b) coeffs.b(x, y, b);
        for (std::size_t k = 0; k < M; ++k) samples[k][s] = b[k];
        fast.step(coeffs, x, y);
      }
      for (std::size_t k = 0; k < M; ++k) {
        means[k][bi] = pairwise_sum(samples[k]) / static_cast<double>(per_batch);
      }
    }
    for (std::size_t k = 0; k < M; ++k) {
      const MeanSe ms = mean_and_se(means[k]);
      est.bbar[k] = ms.mean;
      est.se[k] = ms.se;
    }
  } else {
    est.method = "ensemble";
    est.horizon = static_cast<double>(burn_steps) * budget.dt;
    const std::size_t N = std::max<std::size_t>(budget.ensemble, 2);
    std::vector<std::vector<double>> finals(M, std::vector<double>(N));
    for (std::size_t r = 0; r < N; ++r) {
      FastStepper fast(op, budget.dt, 1.0, derive_seed(budget.seed, {r}), StreamTag::Frozen);
      std::vector<double> y(M, 0.0);
      for (std::size_t s = 0; s < burn_steps; ++s) fast.step(coeffs, x, y);
      std::fill(b.begin(), b.end(), 0.0);
      if (coeffs.b) coeffs.b(x, y, b);
      for (std::size_t k = 0; k < M; ++k) finals[k][r] = b[k];
    }
    for (std::size_t k = 0; k < M; ++k) {
      const MeanSe ms = mean_and_se(finals[k]);
      est.bbar[k] = ms.mean;
      est.se[k] = ms.se;
    }
  }

  double worst = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    if (est.bbar[k] != 0.0) worst = std::max(worst, est.se[k] / std::abs(est.bbar[k]));
  }
  if (worst > budget.rel_tolerance) {
    fail(ErrorKind::Budget, "bbar estimate missed the tolerance: relative SE " + fmt_num(worst) +
                                " > " + fmt_num(budget.rel_tolerance));
  }
  return est;
}

std::vector<double> analytic_bbar_linear(std::span<const double> x, const SpectralOperator& op,
                                         const LinearFastSpec& fast, const LinearDriftSpec& drift) {
  const std::size_t M = op.modes();
  if (x.size() != M) fail(ErrorKind::GridMismatch, "state needs one entry per mode");
  if (!fast.d) fail(ErrorKind::Domain, "linear fast spec needs the forcing d(x)");
  if (!fast.g_diag.empty() && fast.g_diag.size() != M) {
    fail(ErrorKind::Domain, "fast noise must be constant diagonal with one entry per mode");
  }
  if (drift.b_diag.size() != M) fail(ErrorKind::Domain, "b must be affine in y with diagonal B");
  std::vector<double> d(M, 0.0), out(M, 0.0);
  fast.d(x, d);
  if (drift.b1) drift.b1(x, out);
  for (std::size_t k = 0; k < M; ++k) {
    const double rate = op.eigenvalue(k) + fast.c;
    if (!(rate > 0.0)) fail(ErrorKind::Domain, "fast decay l_k + c must be positive");
    out[k] += drift.b_diag[k] * d[k] / rate;
  }
  return out;
}

TabulatedBbar::TabulatedBbar(std::vector<double> nodes, std::vector<std::vector<double>> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  if (nodes_.size() < 2) fail(ErrorKind::Domain, "table needs at least two nodes");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) fail(ErrorKind::Domain, "table nodes must increase");
  }
  for (const auto& v : values_) {
    if (v.size() != nodes_.size()) fail(ErrorKind::Domain, "table column length mismatch");
  }
}

void TabulatedBbar::operator()(std::span<const double> x, std::span<double> out) const {
  if (x.size() != values_.size()) fail(ErrorKind::GridMismatch, "table mode count mismatch");
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] < nodes_.front() || x[k] > nodes_.back()) {
      fail(ErrorKind::Domain, "bbar table domain exceeded: x_" + std::to_string(k) + " = " +
                                  fmt_num(x[k]));
    }
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x[k]);
    std::size_t m = static_cast<std::size_t>(it - nodes_.begin());
    m = std::clamp<std::size_t>(m, 1, nodes_.size() - 1) - 1;
    const double w = (x[k] - nodes_[m]) / (nodes_[m + 1] - nodes_[m]);
    out[k] = (1.0 - w) * values_[k][m] + w * values_[k][m + 1];
  }
}

BbarProvider TabulatedBbar::provider() const {
  return [self = *this](std::span<const double> x, std::span<double> out) { self(x, out); };
}

Path solve_averaged(const FastSlowConfig& config, const FieldFn& g, const BbarProvider& bbar,
                    const Path& fbm) {
  MildSolveConfig mild;
  mild.op = config.op;
  mild.noise = config.noise;
  mild.exponents = config.exponents;
  mild.dt = config.dt;
  mild.horizon = config.horizon;
  mild.u0 = config.initial_x();
  CoefficientSet c;
  c.f = bbar;
  c.g = g;
  return solve_mild(mild, c, NoiseSample{Path(), fbm});
}

KhasminskiiPath khasminskii_auxiliary(const FastSlowConfig& config,
                                      const FastSlowCoefficients& coeffs,
                                      const ReplicateNoise& noise, const FastSlowPath& paired,
                                      double delta) {
  config.validate();
  const auto grid = config.grid();
  const std::size_t M = config.op.modes();
  const std::size_t K = grid.size();
  const double dt = grid[1] - grid[0];
  const double ratio = delta / dt;
  const double blocks = std::round(ratio);
  if (!(delta > 0.0) || blocks < 1.0 || std::abs(ratio - blocks) > 1e-9 * ratio) {
    fail(ErrorKind::Resolution, "delta must be a positive integer multiple of the slow step");
  }
  if (paired.x.size() != K || paired.y.size() != K || paired.noise_digest != noise.digest()) {
    fail(ErrorKind::GridMismatch, "auxiliary run must share grid and noise with the paired run");
  }
  const auto block = static_cast<std::size_t>(blocks);
  const std::size_t n = config.substeps();
  const StepWeights slow = StepWeights::make(config.op.eigenvalues(), dt);
  const auto sub_w = substep_weights(config.op, dt, n);
  FastStepper fast(config.op, dt / static_cast<double>(n), 1.0 / config.eps, noise.wiener_seed,
                   StreamTag::Wiener);

  KhasminskiiPath out;
  std::vector<double> x = config.initial_x(), y = config.initial_y();
  std::vector<double> xs(K * M), ys(K * M), dB(M), frozen(M);
  std::copy(x.begin(), x.end(), xs.begin());
  for (std::size_t j = 0; j + 1 < K; ++j) {
    if (j % block == 0) {
      const auto yr = paired.y.row(j);
      y.assign(yr.begin(), yr.end());
      const auto xr = paired.x.row(j);
      frozen.assign(xr.begin(), xr.end());
      out.breakpoints.push_back(j);
    }
    if (j == 0) std::copy(y.begin(), y.end(), ys.begin());
    for (std::size_t k = 0; k < M; ++k) dB[k] = noise.fbm.value(j + 1, k) - noise.fbm.value(j, k);
    const auto xj = paired.x.row(j);
    slow_step(config.op, coeffs, slow, sub_w, n, fast, frozen, frozen, xj, dB, x, y);
    check_state(x, j + 1, "auxiliary slow component");
    std::copy(x.begin(), x.end(), xs.begin() + static_cast<std::ptrdiff_t>((j + 1) * M));
    // The value stored at a breakpoint is the reset one, Y^eps_{k delta}.
    if ((j + 1) % block == 0 && j + 1 < K) {
      const auto yr = paired.y.row(j + 1);
      std::copy(yr.begin(), yr.end(), ys.begin() + static_cast<std::ptrdiff_t>((j + 1) * M));
    } else {
      std::copy(y.begin(), y.end(), ys.begin() + static_cast<std::ptrdiff_t>((j + 1) * M));
    }
  }
  if ((K - 1) % block == 0) out.breakpoints.push_back(K - 1);
  out.x_hat = Path::hilbert(grid, M, std::move(xs));
  out.y_hat = Path::hilbert(grid, M, std::move(ys));
  return out;
}

AveragingError averaging_error(const FastSlowConfig& config, const FastSlowCoefficients& coeffs,
                               const BbarProvider& bbar, std::size_t threads) {
  try {
    config.validate();
  } catch (const Error& e) {
    fail(e.kind(), "eps = " + fmt_num(config.eps) + ": " + e.what());
  }
  const std::size_t R = config.replicates;
  std::vector<double> errors(R, 0.0);
  std::vector<char> coupled(R, 0);
  parallel_for(R, threads, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(config.seed, {r});
    try {
      const ReplicateNoise noise = replicate_noise(config, seed);
      const FastSlowPath fs = solve_fastslow(config, coeffs, noise);
      const ReplicateNoise averaged_noise{noise.fbm, noise.wiener_seed};
      const Path xbar = solve_averaged(config, coeffs.g, bbar, averaged_noise.fbm);
      coupled[r] = fs.noise_digest == averaged_noise.digest() ? 1 : 0;
      const double norm = balpha2_norm(difference(fs.x, xbar), config.exponents.alpha);
      errors[r] = norm * norm;
    } catch (const Error& e) {
      fail(e.kind(), "eps = " + fmt_num(config.eps) + ", replicate " + std::to_string(r) +
                         " (seed " + std::to_string(seed) + "): " + e.what());
    }
  });
  AveragingError out;
  out.eps = config.eps;
  out.delta = config.effective_delta();
  out.error = mean_and_se(errors);
  out.replicates = R;
  out.seed = config.seed;
  out.coupling_ok = std::all_of(coupled.begin(), coupled.end(), [](char c) { return c != 0; });
  out.samples = std::move(errors);
  return out;
}

std::vector<AveragingError> averaging_study(const FastSlowConfig& base,
                                            const FastSlowCoefficients& coeffs,
                                            const BbarProvider& bbar,
                                            std::span<const double> eps_list, std::size_t threads) {
  if (eps_list.size() < 3) fail(ErrorKind::Domain, "averaging study needs at least three eps values");
  for (std::size_t i = 1; i < eps_list.size(); ++i) {
    if (!(eps_list[i] < eps_list[i - 1])) fail(ErrorKind::Domain, "eps list must be decreasing");
  }
  std::vector<AveragingError> rows;
  for (double eps : eps_list) {
    FastSlowConfig c = base;
    c.eps = eps;
    c.delta = eps * std::sqrt(-std::log(eps));
    rows.push_back(averaging_error(c, coeffs, bbar, threads));
  }
  return rows;
}

}  // namespace fspde
