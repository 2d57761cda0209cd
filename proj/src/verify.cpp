#include "bwretrieve/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "bwretrieve/error.hpp"
#include "bwretrieve/linalg.hpp"
#include "bwretrieve/smoothing.hpp"

namespace bwretrieve::verify {

Vector fd_gradient(const ObjectiveContext& ctx, const Vector& u, double h) {
  Vector g(u.size());
  Vector probe = u;
  for (Index k = 0; k < u.size(); ++k) {
    probe(k) = u(k) + h;
    const double plus = smoothed_loss(ctx, probe);
    probe(k) = u(k) - h;
    const double minus = smoothed_loss(ctx, probe);
    probe(k) = u(k);
    g(k) = (plus - minus) / (2.0 * h);
  }
  return g;
}

double fd_gradient_check(const ObjectiveContext& ctx, const Vector& u, double h,
                         double perturbation) {
  Vector analytic = smoothed_grad(ctx, u).gradient;
  analytic.array() += perturbation;
  const Vector numeric = fd_gradient(ctx, u, h);
  const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-300);
  return (numeric - analytic).cwiseAbs().maxCoeff() / scale;
}

Matrix fd_hessian(const ObjectiveContext& ctx, const Vector& u, double h) {
  const Index d = u.size();
  Matrix H(d, d);
  Vector probe = u;
  for (Index k = 0; k < d; ++k) {
    probe(k) = u(k) + h;
    const Vector plus = smoothed_grad(ctx, probe).gradient;
    probe(k) = u(k) - h;
    const Vector minus = smoothed_grad(ctx, probe).gradient;
    probe(k) = u(k);
    H.col(k) = (plus - minus) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

double fd_hessian_check(const ObjectiveContext& ctx, const Vector& u, double h) {
  return (fd_hessian(ctx, u, h) - smoothed_hessian(ctx, u)).cwiseAbs().maxCoeff();
}

double brute_force_quantile(std::span<const double> values, double gamma) {
  if (values.empty()) throw Error(ErrorKind::InvalidInput, "quantile of an empty list");
  const double n = static_cast<double>(values.size());
  bool found = false;
  double best = 0.0;
  for (double c : values) {
    const auto count = std::count_if(values.begin(), values.end(), [c](double b) { return b <= c; });
    if (static_cast<double>(count) / n <= gamma && (!found || c > best)) {
      best = c;
      found = true;
    }
  }
  if (!found) best = *std::min_element(values.begin(), values.end());
  return best;
}

SymmetricWhitening symmetric_whitening(const SensingEnsemble& ensemble) {
  const Matrix cov = empirical_covariance(ensemble);
  SymmetricWhitening out;
  out.root = linalg::symmetric_sqrt(cov);
  out.whitened = linalg::symmetric_inverse_sqrt(cov) * ensemble.raw();
  return out;
}

std::vector<SpectrumReport> hessian_spectrum_check(const SensingEnsemble& ensemble,
                                                   const Measurements& y, const Vector& u_star,
                                                   double delta, std::optional<double> epsilon,
                                                   int samples, std::uint64_t seed, double tol) {
  if (std::abs(u_star.norm() - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidInput, "hessian_spectrum_check expects a unit-norm signal");
  }
  const double eps = epsilon.value_or(2.0 * std::sqrt(delta));
  const ObjectiveContext ctx = ObjectiveContext::whitened(ensemble, y, eps);
  const Vector center = to_whitened(ensemble.cholesky_factor(), u_star);
  Engine engine = make_engine(seed);
  std::normal_distribution<double> normal;

  std::vector<SpectrumReport> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    Vector dir(center.size());
    for (Index k = 0; k < dir.size(); ++k) dir(k) = normal(engine);
    const Vector u = center + (delta / dir.norm()) * dir;
    const auto ev = linalg::extreme_eigenvalues(smoothed_hessian(ctx, u));
    SpectrumReport r{eps,
                     (u - center).norm(),
                     ev.min,
                     ev.max,
                     1.0 + eps,
                     1.0 / 32.0 - 2.0 * eps,
                     1.0 - 2.0 * eps,
                     tol,
                     false};
    r.pass = r.lambda_max <= r.bound_smooth * (1.0 + tol) && r.lambda_min >= r.bound_convex_far - tol;
    out.push_back(r);
  }
  return out;
}

ContractionReport contraction_check(const ConvergenceTrace& trace, double signal_norm,
                                    double local_radius, double monotone_radius) {
  ContractionReport rep;
  const auto& rec = trace.records;
  bool monotone_phase = false;
  for (std::size_t t = 0; t + 1 < rec.size(); ++t) {
    const double e = rec[t].error;
    const double next = rec[t + 1].error;
    if (e < monotone_radius * signal_norm) monotone_phase = true;
    if (monotone_phase && next > e) ++rep.monotonicity_violations;
    if (e < local_radius * signal_norm) {
      ++rep.local_iterations;
      if (next * next > 2.0 * std::pow(e, 2.5)) {
        ++rep.violations;
        rep.violating_iters.push_back(rec[t].iter);
      }
    }
  }
  rep.violation_fraction =
      rep.local_iterations == 0 ? 0.0
                                : static_cast<double>(rep.violations) / rep.local_iterations;
  return rep;
}

GoodSubsetReport good_subset_check(const SensingEnsemble& ensemble, const Vector& u, double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "good_subset_check requires 0 <= tau < 1");
  }
  const Matrix& a = ensemble.whitened();
  const Index n = a.cols();
  const Vector norms = a.colwise().norm().transpose();
  Vector align = (a.transpose() * u).cwiseAbs().cwiseQuotient(norms);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return align(i) < align(j); });
  const auto removed = static_cast<Index>(std::floor(tau * static_cast<double>(n)));

  Matrix cov = Matrix::Zero(a.rows(), a.rows());
  Matrix kept(a.rows(), n - removed);
  for (Index j = removed; j < n; ++j) kept.col(j - removed) = a.col(order[static_cast<std::size_t>(j)]);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(kept, 1.0 / static_cast<double>(n));
  cov = cov.selfadjointView<Eigen::Lower>();

  GoodSubsetReport rep;
  rep.removed = removed;
  rep.min_retained_normalized = removed < n ? align(order[static_cast<std::size_t>(removed)]) : 0.0;
  rep.lambda_min = linalg::extreme_eigenvalues(cov).min;
  rep.pass = rep.lambda_min >= 1.0 / 32.0;
  return rep;
}

Instance random_instance(Index d, Index n, std::uint64_t seed) {
  Instance inst;
  inst.ensemble = whiten(generate_ensemble(d, n, derive_seed(seed, {static_cast<std::uint64_t>(Stream::Ensemble)})));
  Engine engine = make_engine(derive_seed(seed, {static_cast<std::uint64_t>(Stream::Verify)}));
  std::normal_distribution<double> normal;
  inst.u_star = Vector(d);
  for (Index k = 0; k < d; ++k) inst.u_star(k) = normal(engine);
  inst.u_star.normalize();
  inst.y = synthesize_measurements(inst.ensemble, inst.u_star);
  return inst;
}

Vector random_nondegenerate_point(const Matrix& vectors, double min_normalized, Engine& engine) {
  std::normal_distribution<double> normal;
  const Vector norms = vectors.colwise().norm().transpose();
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Vector u(vectors.rows());
    for (Index k = 0; k < u.size(); ++k) u(k) = normal(engine);
    const Vector align = (vectors.transpose() * u).cwiseAbs().cwiseQuotient(norms) / u.norm();
    if (align.minCoeff() > min_normalized) return u;
  }
  throw Error(ErrorKind::InvalidInput, "could not sample a nondegenerate point");
}

// ---------------------------------------------------------------------------

namespace {

std::string params(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : kv) {
    if (!first) os << ' ';
    os << k << '=' << v;
    first = false;
  }
  return os.str();
}

std::uint64_t sub_seed(const SuiteOptions& o, std::uint64_t suite, std::uint64_t k) {
  return derive_seed(o.seed, {suite, k});
}

}  // namespace

std::vector<CheckResult> suite_newton(const SuiteOptions& o) {
  const int instances = o.desk ? 20 : 100;
  const Index d = 20, n = 400;
  double worst_newton = 0.0;
  double worst_form = 0.0;
  for (int k = 0; k < instances; ++k) {
    const Instance inst = random_instance(d, n, sub_seed(o, 1, static_cast<std::uint64_t>(k)));
    Engine engine = make_engine(sub_seed(o, 101, static_cast<std::uint64_t>(k)));
    const Vector u = random_nondegenerate_point(inst.ensemble.whitened(), 1e-3, engine);
    const ObjectiveContext ctx = ObjectiveContext::whitened(inst.ensemble, inst.y, 0.0);
    const Vector bwgd = bwgd_ds_step(SolverState::start(u, 0.0), ctx).u;
    const Vector newton = newton_step_amplitude(ctx, u).u;
    worst_newton = std::max(worst_newton, (bwgd - newton).norm() / u.norm());
    for (double eps : {0.0, 0.1, 1.0}) {
      const ObjectiveContext c = ctx.with_epsilon(eps);
      const Vector a = bwgd_ds_step(SolverState::start(u, eps), c).u;
      const Vector b = damped_gradient_step(c, u);
      worst_form = std::max(worst_form, (a - b).norm() / a.norm());
    }
  }
  return {
      {"newton", "bwgd-step-equals-newton-step",
       params({{"instances", instances}, {"d", d}, {"n", n}}), worst_newton, 1e-10,
       worst_newton <= 1e-10},
      {"newton", "convex-combination-equals-gradient-form",
       params({{"instances", instances}, {"d", d}, {"n", n}}), worst_form, 1e-12,
       worst_form <= 1e-12},
  };
}

std::vector<CheckResult> suite_identity_hessian(const SuiteOptions& o) {
  const int points = o.desk ? 15 : 50;
  const Index dims[] = {10, 25, 50};
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const Index d = dims[k % 3];
    const Instance inst = random_instance(d, 20 * d, sub_seed(o, 2, static_cast<std::uint64_t>(k)));
    Engine engine = make_engine(sub_seed(o, 102, static_cast<std::uint64_t>(k)));
    const Vector u = random_nondegenerate_point(inst.ensemble.whitened(), 1e-6, engine);
    const ObjectiveContext ctx = ObjectiveContext::whitened(inst.ensemble, inst.y, 0.0);
    const Matrix H = smoothed_hessian(ctx, u);
    worst = std::max(worst, (H - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
  }
  return {{"identity-hessian", "max-entry-of-H-minus-I", params({{"points", points}, {"d_max", 50}}),
           worst, 1e-9, worst <= 1e-9}};
}

std::vector<CheckResult> suite_fd(const SuiteOptions& o) {
  const int instances = o.desk ? 15 : 50;
  std::vector<CheckResult> out;
  for (double eps : {1e-3, 0.1, 1.0}) {
    double worst_grad = 0.0;
    double worst_hess = 0.0;
    for (int k = 0; k < instances; ++k) {
      const Index d = 10, n = 50;
      const Instance inst = random_instance(d, n, sub_seed(o, 3, static_cast<std::uint64_t>(k)));
      Engine engine = make_engine(sub_seed(o, 103, static_cast<std::uint64_t>(k)));
      std::normal_distribution<double> normal;
      Vector u(d);
      for (Index j = 0; j < d; ++j) u(j) = normal(engine);
      u /= std::sqrt(static_cast<double>(d));
      const ObjectiveContext ctx = ObjectiveContext::whitened(inst.ensemble, inst.y, eps);
      worst_grad = std::max(worst_grad, fd_gradient_check(ctx, u, 1e-6, o.gradient_fault));
      worst_hess = std::max(worst_hess, fd_hessian_check(ctx, u, 1e-5));
    }
    out.push_back({"fd", "gradient-relative-error",
                   params({{"epsilon", eps}, {"instances", instances}, {"h", 1e-6}}), worst_grad,
                   1e-6, worst_grad <= 1e-6});
    out.push_back({"fd", "hessian-entrywise-error",
                   params({{"epsilon", eps}, {"instances", instances}, {"h", 1e-5}}), worst_hess,
                   1e-4, worst_hess <= 1e-4});
  }
  return out;
}

std::vector<CheckResult> suite_stationarity(const SuiteOptions& o) {
  const int instances = o.desk ? 5 : 20;
  double worst_chol = 0.0;
  double worst_sym = 0.0;
  for (int k = 0; k < instances; ++k) {
    const Instance inst = random_instance(20, 200, sub_seed(o, 4, static_cast<std::uint64_t>(k)));
    const Vector u_w = to_whitened(inst.ensemble.cholesky_factor(), inst.u_star);
    const SymmetricWhitening sym = symmetric_whitening(inst.ensemble);
    const Vector u_s = sym.root * inst.u_star;
    for (double eps : {0.0, 1e-3, 1.0}) {
      const ObjectiveContext chol = ObjectiveContext::whitened(inst.ensemble, inst.y, eps);
      worst_chol = std::max(worst_chol, smoothed_grad(chol, u_w).gradient.norm());
      const ObjectiveContext symctx(sym.whitened, inst.y.values, eps);
      worst_sym = std::max(worst_sym, smoothed_grad(symctx, u_s).gradient.norm());
    }
  }
  return {
      {"stationarity", "gradient-norm-at-cholesky-image",
       params({{"instances", instances}, {"d", 20}, {"n", 200}}), worst_chol, 1e-9,
       worst_chol <= 1e-9},
      {"stationarity", "gradient-norm-at-symmetric-image",
       params({{"instances", instances}, {"d", 20}, {"n", 200}}), worst_sym, 1e-9,
       worst_sym <= 1e-9},
  };
}

std::vector<CheckResult> suite_quantile(const SuiteOptions& o) {
  const int lists = 1000;
  Engine engine = make_engine(sub_seed(o, 5, 0));
  std::uniform_int_distribution<int> size(1, 50);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> value(1.0);
  int mismatches = 0;
  int sandwich_failures = 0;
  for (int k = 0; k < lists; ++k) {
    std::vector<double> values(static_cast<std::size_t>(size(engine)));
    for (double& v : values) v = value(engine);
    double gamma = unit(engine);
    while (gamma <= 0.0) gamma = unit(engine);
    const double q = quantile(values, gamma);
    if (q != brute_force_quantile(values, gamma)) ++mismatches;
    const auto count = std::count_if(values.begin(), values.end(), [q](double b) { return b <= q; });
    const auto need = std::max<long>(1, static_cast<long>(std::floor(gamma * static_cast<double>(values.size()))));
    if (std::find(values.begin(), values.end(), q) == values.end() || count < need) ++sandwich_failures;
  }
  return {
      {"quantile", "mismatches-vs-brute-force", params({{"lists", lists}, {"max_n", 50}}),
       static_cast<double>(mismatches), 0.0, mismatches == 0},
      {"quantile", "sandwich-failures", params({{"lists", lists}}),
       static_cast<double>(sandwich_failures), 0.0, sandwich_failures == 0},
  };
}

std::vector<CheckResult> suite_spectrum(const SuiteOptions& o) {
  std::vector<CheckResult> out;
  const Index d = o.desk ? 20 : 50;
  const Index n = o.desk ? 2000 : 5000;
  const int samples = o.desk ? 30 : 100;
  const double delta = 1e-4;
  const Instance inst = random_instance(d, n, sub_seed(o, 6, 0));
  const auto reports =
      hessian_spectrum_check(inst.ensemble, inst.y, inst.u_star, delta, std::nullopt, samples,
                             sub_seed(o, 106, 0));
  const auto passed = std::count_if(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
  const double rate = static_cast<double>(passed) / static_cast<double>(reports.size());
  out.push_back({"spectrum", "pass-rate",
                 params({{"d", d}, {"n", n}, {"delta", delta}, {"epsilon", 2 * std::sqrt(delta)},
                         {"samples", samples}, {"tol", 0.05}}),
                 rate, 0.95, rate >= 0.95});

  // ε → 0 at the solution: the Hessian tends to the identity.
  const Instance small = random_instance(10, 1000, sub_seed(o, 6, 1));
  const auto at_solution =
      hessian_spectrum_check(small.ensemble, small.y, small.u_star, 0.0, 1e-6, 1, sub_seed(o, 106, 1));
  const double dev = std::max(std::abs(at_solution[0].lambda_min - 1.0),
                              std::abs(at_solution[0].lambda_max - 1.0));
  out.push_back({"spectrum", "identity-limit-at-solution",
                 params({{"d", 10}, {"n", 1000}, {"epsilon", 1e-6}}), dev, 0.01, dev <= 0.01});

  const auto unsmoothed =
      hessian_spectrum_check(small.ensemble, small.y, small.u_star, 0.0, 0.0, 1, sub_seed(o, 106, 3));
  const double dev0 = std::max(std::abs(unsmoothed[0].lambda_min - 1.0),
                               std::abs(unsmoothed[0].lambda_max - 1.0));
  out.push_back({"spectrum", "unsmoothed-spectrum-at-solution",
                 params({{"d", 10}, {"n", 1000}, {"epsilon", 0.0}}), dev0, 1e-9, dev0 <= 1e-9});

  // Heavy smoothing: both Hessian terms are bounded by one.
  const auto heavy = hessian_spectrum_check(small.ensemble, small.y, small.u_star, 0.5, 1.0, 20,
                                            sub_seed(o, 106, 2));
  double lmax = 0.0;
  for (const auto& r : heavy) lmax = std::max(lmax, r.lambda_max);
  out.push_back({"spectrum", "lambda-max-under-heavy-smoothing",
                 params({{"d", 10}, {"n", 1000}, {"epsilon", 1.0}, {"samples", 20}}), lmax, 2.05,
                 lmax <= 2.05});
  return out;
}

std::vector<CheckResult> suite_good_subset(const SuiteOptions& o) {
  const Index d = o.desk ? 40 : 100;
  const double log_d = std::log(static_cast<double>(d));
  const Index n = static_cast<Index>(std::lround(static_cast<double>(d) * log_d * log_d));
  const double tau = 1.0 / (128.0 * log_d);
  const Instance inst = random_instance(d, n, sub_seed(o, 7, 0));
  Engine engine = make_engine(sub_seed(o, 107, 0));
  std::normal_distribution<double> normal;
  auto random_unit = [&] {
    Vector u(d);
    for (Index k = 0; k < d; ++k) u(k) = normal(engine);
    return Vector(u.normalized());
  };

  std::vector<CheckResult> out;
  const auto zero = good_subset_check(inst.ensemble, random_unit(), 0.0);
  out.push_back({"good-subset", "tau-zero-lambda-min", params({{"d", d}, {"n", n}}),
                 std::abs(zero.lambda_min - 1.0), 1e-10, std::abs(zero.lambda_min - 1.0) <= 1e-10});

  const int draws = 20;
  int passed = 0;
  for (int k = 0; k < draws; ++k) passed += good_subset_check(inst.ensemble, random_unit(), tau).pass;
  const double rate = static_cast<double>(passed) / draws;
  out.push_back({"good-subset", "pass-rate", params({{"d", d}, {"n", n}, {"tau", tau}, {"draws", draws}}),
                 rate, 0.95, rate >= 0.95});

  // Worst direction over a random grid, by the smallest retained alignment.
  const int grid = o.desk ? 200 : 1000;
  Vector worst_u;
  double worst_align = std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid; ++k) {
    Vector u = random_unit();
    const Vector align = (inst.ensemble.whitened().transpose() * u).cwiseAbs();
    std::vector<double> sorted(align.data(), align.data() + align.size());
    const auto keep = static_cast<std::size_t>(std::floor(tau * static_cast<double>(n)));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(keep), sorted.end());
    if (sorted[keep] < worst_align) {
      worst_align = sorted[keep];
      worst_u = u;
    }
  }
  const auto adversarial = good_subset_check(inst.ensemble, worst_u, tau);
  out.push_back({"good-subset", "adversarial-lambda-min",
                 params({{"d", d}, {"n", n}, {"tau", tau}, {"grid", grid}}), adversarial.lambda_min,
                 1.0 / 32.0, adversarial.pass});
  return out;
}

std::vector<CheckResult> suite_contraction(const SuiteOptions& o) {
  const int seeds = o.desk ? 10 : 50;
  const Index d = 50, n = 2500;
  int local = 0;
  int violations = 0;
  int monotone = 0;
  for (int k = 0; k < seeds; ++k) {
    const std::uint64_t s = sub_seed(o, 8, static_cast<std::uint64_t>(k));
    const SensingEnsemble ens =
        whiten(generate_ensemble(d, n, derive_seed(s, {static_cast<std::uint64_t>(Stream::Ensemble)})));
    const Measurements y = synthesize_measurements(ens, constant_unit_signal(d));
    const Vector init = spectral_init(ens, y);
    SmoothingSchedule schedule{OracleSmoothing{}, 1.0, 0.0};
    const ConvergenceTrace trace = run(ens, y, init, schedule, StoppingRule{});
    const auto rep = contraction_check(trace);
    local += rep.local_iterations;
    violations += rep.violations;
    monotone += rep.monotonicity_violations;
  }
  const double satisfied = local == 0 ? 0.0 : 1.0 - static_cast<double>(violations) / local;
  return {
      {"contraction", "fraction-satisfying-5/2-recursion",
       params({{"seeds", seeds}, {"d", d}, {"n", n}, {"local_radius", 1e-2}}), satisfied, 0.8,
       satisfied >= 0.8},
      {"contraction", "monotonicity-violations", params({{"seeds", seeds}, {"radius", 0.1}}),
       static_cast<double>(monotone), 0.0, monotone == 0},
  };
}

const std::vector<Suite>& suites() {
  static const std::vector<Suite> all = {
      {"newton", "BWGD step at ε=0 equals the Newton step", suite_newton},
      {"identity-hessian", "Hessian of the whitened amplitude loss is I", suite_identity_hessian},
      {"fd", "gradient and Hessian against finite differences", suite_fd},
      {"stationarity", "whitened image of the signal is stationary", suite_stationarity},
      {"quantile", "order-statistic quantile against a brute-force scan", suite_quantile},
      {"spectrum", "local Hessian spectrum bounds", suite_spectrum},
      {"good-subset", "retained covariance after dropping poorly aligned vectors", suite_good_subset},
      {"contraction", "superlinear recursion under the oracle schedule", suite_contraction},
  };
  return all;
}

}  // namespace bwretrieve::verify
