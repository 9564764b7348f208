// Copyright 2026 The nslangevin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nsl/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "nsl/benchmarks.hpp"
#include "nsl/metrics.hpp"
#include "nsl/rng.hpp"

namespace nsl {

namespace {

CheckResult make(std::string suite, std::string name, double measured, double tol, bool passed,
                 std::string detail = {}) {
  return CheckResult{std::move(suite), std::move(name), measured, tol, passed, std::move(detail)};
}

// Pixels of a square image lying within `margin` of an hdr clip boundary, or
// DFT bins with small modulus.
bool near_nonsmooth(const ForwardOperator& op, const DataVector& x0) {
  if (const auto* h = std::get_if<ForwardOperator::HdrClip>(&op.params())) {
    for (Index i = 0; i < x0.size(); ++i) {
      if (std::abs(std::abs(h->scale * x0[i]) - 1.0) < 1e-3 * h->scale) return true;
    }
  }
  if (op.kind() == OperatorKind::dft_magnitude) {
    const Vector y = op.apply(x0);
    if (y.minCoeff() < 1e-6) return true;
  }
  return false;
}

double loss_at(const LikelihoodModel& lik, const GenerativeMap& map, const NoiseVector& z) {
  return lik.neg_log_likelihood(map.apply(z));
}

double normal_pdf(double x, double mean, double sd) {
  const double r = (x - mean) / sd;
  return std::exp(-0.5 * r * r) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

// ---------------------------------------------------------------- suites

std::vector<CheckResult> suite_pullback() {
  std::vector<CheckResult> out;
  const auto maps = bench::gradient_maps();
  for (const auto& m : maps) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const NormalStream s(400 + static_cast<std::uint64_t>(i), 0, StreamPurpose::generic);
      worst = std::max(worst, check_pullback_fd(m.map, s.normal(0, m.map.dim()), s.normal(1, m.map.dim())));
    }
    out.push_back(make("pullback", "map_vjp/" + m.name, worst, 1e-6, worst < 1e-6, "100 points"));
  }
  for (const auto& m : maps) {
    for (const auto& o : bench::gradient_operators()) {
      const NormalStream s(77, 0, StreamPurpose::ground_truth);
      const auto meas = synthesize_measurement(o.op, m.map.apply(s.normal(0, m.map.dim())), o.sigma, 3);
      const LikelihoodModel lik(o.op, meas);
      const auto g = measure_noise_gradient(m.map, lik, 100, 11);
      out.push_back(make("pullback", "grad/" + m.name + "+" + o.name, g.max_rel_error, 1e-4,
                         g.max_rel_error < 1e-4,
                         std::to_string(g.points) + " points, " + std::to_string(g.resampled) + " redrawn"));
    }
  }
  return out;
}

std::vector<CheckResult> suite_adjoint() {
  std::vector<CheckResult> out;
  for (const auto& o : bench::gradient_operators()) {
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const NormalStream s(900 + static_cast<std::uint64_t>(i), 0, StreamPurpose::generic);
      Vector x = s.normal(0, o.op.in_dim()) * 0.3;
      if (near_nonsmooth(o.op, x)) continue;
      const Vector v = s.normal(1, o.op.out_dim());
      if (o.op.is_linear()) {
        // <A x, v> = <x, A^T v>
        const double lhs = o.op.apply(x).dot(v);
        const double rhs = x.dot(o.op.pullback(x, v));
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
      } else {
        // Pullback against central differences of <A(x), v>.
        const Vector pb = o.op.pullback(x, v);
        Vector fd(x.size());
        const double h = 1e-6;
        for (Index k = 0; k < x.size(); ++k) {
          Vector xp = x;
          Vector xm = x;
          xp[k] += h;
          xm[k] -= h;
          fd[k] = (o.op.apply(xp).dot(v) - o.op.apply(xm).dot(v)) / (2.0 * h);
        }
        worst = std::max(worst, (pb - fd).norm() / std::max(fd.norm(), 1e-6));
      }
    }
    const double tol = o.op.is_linear() ? 1e-12 : 1e-6;
    out.push_back(make("adjoint", o.name, worst, tol, worst < tol,
                       o.op.is_linear() ? "dot-product test" : "finite differences"));
  }
  return out;
}

std::vector<CheckResult> suite_drift() {
  const auto inst = bench::drift_score_instance();
  const auto r = measure_drift_score(inst.map, inst.lik, 100);
  return {make("drift", "drift_equals_score", r.rel_error, 1e-3, r.rel_error < 1e-3,
               "max pointwise " + fmt("%.3g", r.max_point_error) + " over " + std::to_string(r.points) +
                   " nodes")};
}

std::vector<CheckResult> suite_equilibrium() {
  std::vector<CheckResult> out;
  const auto em = measure_equilibrium(Scheme::em, 1e-3, 200000, 50000, bench::kEquilibriumChains, 101);
  const auto ei = measure_equilibrium(Scheme::ei, 1e-3, 200000, 50000, bench::kEquilibriumChains, 202);
  for (Index i = 0; i < em.mean.size(); ++i) {
    out.push_back(make("equilibrium", "em_mean_" + std::to_string(i), em.mean_error_in_std[i], 0.05,
                       !em.diverged && em.mean_error_in_std[i] < 0.05, "in posterior std"));
  }
  out.push_back(make("equilibrium", "em_covariance", em.cov_rel_frobenius, 0.10,
                     !em.diverged && em.cov_rel_frobenius < 0.10, "relative Frobenius"));
  for (Index i = 0; i < em.mean.size(); ++i) {
    const double diff = std::abs(em.mean[i] - ei.mean[i]) / std::sqrt(em.reference.covariance(i, i));
    out.push_back(make("equilibrium", "em_vs_ei_mean_" + std::to_string(i), diff, 0.05,
                       !em.diverged && !ei.diverged && diff < 0.05, "in posterior std"));
  }
  return out;
}

std::vector<CheckResult> suite_theorem() {
  const auto instances = bench::theorem_instances(50, 7);
  double worst_slack = std::numeric_limits<double>::infinity();
  double min_kappa = std::numeric_limits<double>::infinity();
  int failures = 0;
  for (const auto& inst : instances) {
    try {
      const auto r = check_theorem_bound([&](std::span<const double> x) { return inst.p_data.pdf(x[0]); },
                                         [&](std::span<const double> x) { return inst.model_prior.pdf(x[0]); },
                                         [&](std::span<const double> x) { return inst.likelihood(x[0]); },
                                         bench::theorem_grid());
      worst_slack = std::min(worst_slack, r.slack);
      min_kappa = std::min(min_kappa, r.kappa_y);
      if (r.kappa_y < 1.0) ++failures;
    } catch (const std::exception&) {
      ++failures;
      worst_slack = std::min(worst_slack, -1.0);
    }
  }
  return {make("theorem", "tv_bound_50_instances", worst_slack, 0.0, failures == 0 && worst_slack >= 0.0,
               "min slack; " + std::to_string(failures) + " failures"),
          make("theorem", "kappa_at_least_one", min_kappa, 1.0, min_kappa >= 1.0, "min kappa")};
}

std::vector<CheckResult> suite_dpi() {
  std::vector<CheckResult> out;
  const GridSpec axis{GridAxis{-15.0, 15.0, 6001}};
  for (const auto& t : bench::dpi_triples()) {
    const auto p = DensityGrid::tabulate(axis, [&](std::span<const double> x) { return t.p.pdf(x[0]); });
    const auto q = DensityGrid::tabulate(axis, [&](std::span<const double> x) { return t.q.pdf(x[0]); });
    const auto r = check_dpi(p, q, t.phi, 200, 100000, 5);
    out.push_back(make("dpi", t.name, r.tv_after - r.tv_before, r.tolerance, r.holds,
                       "tv_before " + fmt("%.4f", r.tv_before) + ", tv_after " + fmt("%.4f", r.tv_after)));
  }
  for (const auto& c : measure_composite_bounds()) {
    const double rhs = c.bound + c.eps_sampler;
    const double tol = 0.01 + c.quadrature_error;
    out.push_back(make("dpi", "composite/" + c.name, c.tv_total - rhs, tol, c.tv_total <= rhs + tol,
                       "tv " + fmt("%.4f", c.tv_total) + ", 2 kappa eps " + fmt("%.4f", c.bound) +
                           ", eps_S " + fmt("%.4f", c.eps_sampler)));
  }
  return out;
}

std::vector<CheckResult> suite_nfe() {
  std::vector<CheckResult> out;
  const std::array<std::int64_t, 3> ns{1, 10, 100};
  const auto curve = nfe_curve(1, 800, ns);
  const bool exact = curve[0] == 801.0 && curve[1] == 81.0 && curve[2] == 9.0;
  out.push_back(make("nfe", "curve_1_800", exact ? 0.0 : 1.0, 0.0, exact,
                     fmt("%.17g", curve[0]) + ", " + fmt("%.17g", curve[1]) + ", " + fmt("%.17g", curve[2])));

  std::vector<std::int64_t> grid;
  for (std::int64_t n = 1; n <= 1000000; n *= 2) grid.push_back(n);
  for (int eta : {1, 2}) {
    const auto c = nfe_curve(eta, 500, grid);
    bool decreasing = true;
    for (std::size_t i = 1; i < c.size(); ++i) decreasing = decreasing && c[i] < c[i - 1];
    const double gap = c.back() - eta;
    out.push_back(make("nfe", "per_sample_decreasing_eta" + std::to_string(eta), gap, 1e-3 * eta,
                       decreasing && gap > 0.0 && gap < 1e-3 * eta, "gap to eta at N = 2^" +
                           std::to_string(grid.size() - 1)));
  }

  // Reported totals on short runs of each map kind.
  const auto maps = bench::gradient_maps();
  const auto op = ForwardOperator::random_inpaint(16, 0.7, 5);
  for (const auto& m : maps) {
    const NormalStream s(5, 0, StreamPurpose::ground_truth);
    const LikelihoodModel lik(op, synthesize_measurement(op, m.map.apply(s.normal(0, 16)), 0.1, 1));
    SamplerConfig cfg;
    cfg.warm_steps = 40;
    cfg.n_steps = 60;
    cfg.burn_in = 10;
    cfg.thinning = 5;
    const auto reports = run_chains(m.map, lik, cfg, 3, 1);
    std::int64_t total = 0;
    bool each = true;
    for (const auto& r : reports) {
      total += r.nfe_total;
      each = each && r.nfe_total == m.map.nfe_per_eval() * (cfg.warm_steps + cfg.n_steps);
    }
    const std::int64_t expect = 3LL * m.map.nfe_per_eval() * (cfg.warm_steps + cfg.n_steps);
    out.push_back(make("nfe", "run_totals/" + m.name, static_cast<double>(total), static_cast<double>(expect),
                       each && total == expect, "eta " + std::to_string(m.map.nfe_per_eval())));
  }
  return out;
}

}  // namespace

std::string format_check(const CheckResult& r) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "measured=%.6g tol=%.6g", r.measured, r.tolerance);
  std::string s = (r.passed ? "PASS " : "FAIL ") + r.suite + "/" + r.name + " " + buf;
  if (!r.detail.empty()) s += " (" + r.detail + ")";
  return s;
}

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {"pullback", "adjoint", "drift", "equilibrium",
                                                 "theorem", "dpi", "nfe"};
  return names;
}

std::vector<CheckResult> run_verify_suite(const std::string& name) {
  if (name == "all") {
    std::vector<CheckResult> all;
    for (const auto& n : verify_suite_names()) {
      auto r = run_verify_suite(n);
      all.insert(all.end(), r.begin(), r.end());
    }
    return all;
  }
  if (name == "pullback") return suite_pullback();
  if (name == "adjoint") return suite_adjoint();
  if (name == "drift") return suite_drift();
  if (name == "equilibrium") return suite_equilibrium();
  if (name == "theorem") return suite_theorem();
  if (name == "dpi") return suite_dpi();
  if (name == "nfe") return suite_nfe();
  throw ContractViolation("unknown verify suite \"" + name + "\"");
}

GradientCheck measure_noise_gradient(const GenerativeMap& map, const LikelihoodModel& lik, int points,
                                     std::uint64_t seed) {
  require(points >= 1, "measure_noise_gradient: points must be >= 1");
  GradientCheck out;
  const NormalStream stream(seed, 0, StreamPurpose::generic);
  std::uint64_t draw = 0;
  const double h = 1e-5;
  while (out.points < points) {
    const NoiseVector z = stream.normal(draw++, map.dim());
    if (near_nonsmooth(lik.op(), map.apply(z))) {
      ++out.resampled;
      require(out.resampled < 100 * points, "measure_noise_gradient: too many rejected draws");
      continue;
    }
    const NoiseVector g = grad_noise_loss(lik, map, z);
    NoiseVector fd(z.size());
    for (Index k = 0; k < z.size(); ++k) {
      NoiseVector zp = z;
      NoiseVector zm = z;
      zp[k] += h;
      zm[k] -= h;
      fd[k] = (loss_at(lik, map, zp) - loss_at(lik, map, zm)) / (2.0 * h);
    }
    out.max_rel_error = std::max(out.max_rel_error, (g - fd).norm() / std::max(fd.norm(), 1e-6));
    ++out.points;
  }
  return out;
}

DriftScoreCheck measure_drift_score(const GenerativeMap& map, const LikelihoodModel& lik, int points) {
  require(map.dim() == 1, "measure_drift_score: 1-D maps only");
  require(points >= 1, "measure_drift_score: points must be >= 1");
  const auto grid = grid_posterior(lik, map, {GridAxis{-6.0, 6.0, 24001}});
  const auto& axis = grid.axes()[0];
  const auto& vals = grid.values();
  const double h = axis.step();

  // Interior nodes carrying non-negligible mass, spread evenly.
  const double peak = *std::max_element(vals.begin(), vals.end());
  Index lo = 1;
  Index hi = axis.n - 2;
  while (lo < hi && vals[static_cast<std::size_t>(lo - 1)] < 1e-8 * peak) ++lo;
  while (hi > lo && vals[static_cast<std::size_t>(hi + 1)] < 1e-8 * peak) --hi;
  require(hi - lo >= points, "measure_drift_score: support too narrow for the grid");

  Vector drift(points);
  Vector score(points);
  for (int p = 0; p < points; ++p) {
    const Index i = lo + (hi - lo) * p / std::max(1, points - 1);
    const double zi = axis.node(i);
    score[p] = (std::log(vals[static_cast<std::size_t>(i + 1)]) - std::log(vals[static_cast<std::size_t>(i - 1)])) /
               (2.0 * h);
    // Drift of one noiseless EM step per unit time.
    const NoiseVector z = NoiseVector::Constant(1, zi);
    const NoiseVector g = grad_noise_loss(lik, map, z);
    const double tau = 1e-3;
    drift[p] = (em_update(z, g, tau, NoiseVector::Zero(1))[0] - zi) / tau;
  }
  DriftScoreCheck out;
  out.points = points;
  out.rel_error = (drift - score).norm() / score.norm();
  for (int p = 0; p < points; ++p) {
    out.max_point_error = std::max(out.max_point_error, std::abs(drift[p] - score[p]) / std::max(std::abs(score[p]), 1.0));
  }
  return out;
}

EquilibriumMeasure measure_equilibrium(Scheme scheme, double tau, std::int64_t n_steps, std::int64_t burn_in,
                                       int chains, std::uint64_t seed, std::int64_t thinning) {
  const auto b = bench::affine_benchmark();
  SamplerConfig cfg;
  cfg.scheme = scheme;
  cfg.tau = tau;
  cfg.n_steps = n_steps;
  cfg.burn_in = burn_in;
  cfg.thinning = thinning;
  cfg.seed = seed;
  const auto reports = run_chains(b.map, b.lik, cfg, chains, 0, true);

  EquilibriumMeasure out;
  out.reference = b.posterior();
  std::vector<Vector> pooled;
  for (const auto& r : reports) {
    out.diverged = out.diverged || r.diverged;
    if (r.noise_trace) pooled.insert(pooled.end(), r.noise_trace->begin(), r.noise_trace->end());
  }
  require(pooled.size() >= 2, "measure_equilibrium: too few retained samples");
  out.samples = static_cast<std::int64_t>(pooled.size());
  const Index d = pooled.front().size();
  out.mean = Vector::Zero(d);
  for (const auto& z : pooled) out.mean += z;
  out.mean /= static_cast<double>(pooled.size());
  out.covariance = Matrix::Zero(d, d);
  for (const auto& z : pooled) out.covariance += (z - out.mean) * (z - out.mean).transpose();
  out.covariance /= static_cast<double>(pooled.size() - 1);
  out.mean_error_in_std = ((out.mean - out.reference.mean).cwiseAbs().array() /
                           out.reference.covariance.diagonal().cwiseSqrt().array())
                              .matrix();
  out.cov_rel_frobenius = (out.covariance - out.reference.covariance).norm() / out.reference.covariance.norm();
  return out;
}

std::vector<CompositeBoundCheck> measure_composite_bounds(int ensemble) {
  struct Setup {
    double a, b, y, sigma, tau;
    std::int64_t steps;
  };
  // Short chains from the prior: eps_S stays well above zero.
  const std::array<Setup, 10> setups{{{1.0, 0.0, 0.8, 0.5, 0.02, 1},
                                      {1.0, 0.0, 0.8, 0.5, 0.02, 5},
                                      {1.0, 0.0, 0.8, 0.5, 0.02, 20},
                                      {0.7, 0.3, -0.5, 0.4, 0.03, 3},
                                      {0.7, 0.3, -0.5, 0.4, 0.03, 15},
                                      {1.3, -0.2, 1.5, 0.8, 0.01, 10},
                                      {1.3, -0.2, 1.5, 0.8, 0.05, 10},
                                      {0.5, 0.5, 0.2, 0.3, 0.04, 8},
                                      {2.0, 0.0, -1.0, 1.0, 0.01, 30},
                                      {1.0, 1.0, 2.5, 0.6, 0.05, 40}}};
  std::vector<CompositeBoundCheck> out;
  int idx = 0;
  for (const auto& s : setups) {
    CompositeBoundCheck c;
    c.name = "chain_" + std::to_string(idx);
    Matrix m(1, 1);
    m(0, 0) = s.a;
    const auto map = GenerativeMap::affine(m, Vector::Constant(1, s.b));
    const LikelihoodModel lik(ForwardOperator::inpaint({1}), Measurement{Vector::Constant(1, s.y), s.sigma});

    // True data prior: the model prior N(b, a^2) with a displaced bump.
    auto p_data = [&](double x) {
      return 0.95 * normal_pdf(x, s.b, s.a) + 0.05 * normal_pdf(x, s.b + 1.5 * s.a, 0.5 * s.a);
    };
    auto model = [&](double x) { return normal_pdf(x, s.b, s.a); };
    auto like = [&](double x) { return normal_pdf(s.y, x, s.sigma); };

    const GridSpec data_spec{GridAxis{s.b - 12.0 * s.a, s.b + 12.0 * s.a, 4001}};
    const auto bound = check_theorem_bound([&](std::span<const double> x) { return p_data(x[0]); },
                                           [&](std::span<const double> x) { return model(x[0]); },
                                           [&](std::span<const double> x) { return like(x[0]); }, data_spec);
    c.bound = bound.bound_value;
    c.kappa = bound.kappa_y;
    c.eps = bound.eps_prior;
    c.quadrature_error = bound.quadrature_error;

    SamplerConfig cfg;
    cfg.warm_steps = 0;
    cfg.n_steps = s.steps;
    cfg.burn_in = s.steps - 1;
    cfg.thinning = 1;
    cfg.tau = s.tau;
    cfg.seed = 3000 + static_cast<std::uint64_t>(idx) * 100000;
    const auto reports = run_chains(map, lik, cfg, ensemble, 0, true);
    std::vector<double> zs;
    std::vector<double> xs;
    for (const auto& r : reports) {
      require(!r.diverged && r.noise_trace && r.noise_trace->size() == 1, "composite bound: unexpected chain output");
      zs.push_back(r.noise_trace->front()[0]);
      xs.push_back(r.samples.front()[0]);
    }

    const auto noise_post = grid_posterior(lik, map, {GridAxis{-12.0, 12.0, 4001}});
    const auto kz = kde_grid_1d(zs, noise_post.axes()[0]);
    c.eps_sampler = tv_distance_grid(noise_post, kz);

    const auto data_post = DensityGrid::tabulate(data_spec, [&](std::span<const double> x) {
      return p_data(x[0]) * like(x[0]);
    });
    const auto kx = kde_grid_1d(xs, data_spec[0]);
    c.tv_total = tv_distance_grid(data_post, kx);
    out.push_back(c);
    ++idx;
  }
  return out;
}

WelchResult welch_one_sided(std::span<const double> a, std::span<const double> b) {
  require(a.size() >= 2 && b.size() >= 2, "welch: need at least 2 values per group");
  auto moments = [](std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss / (n - 1.0)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  WelchResult r;
  r.mean_a = ma;
  r.mean_b = mb;
  const double se2 = va / na + vb / nb;
  if (se2 == 0.0) {
    r.t = ma > mb ? std::numeric_limits<double>::infinity() : 0.0;
    r.df = na + nb - 2.0;
    r.p_value = ma > mb ? 0.0 : 1.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
  const boost::math::students_t dist(r.df);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.t));
  return r;
}

DiversityTrend measure_diversity_trend(double tau_large, double tau_small, int seeds) {
  const auto b = bench::affine_benchmark();
  DiversityTrend out;
  for (int s = 0; s < seeds; ++s) {
    for (const double tau : {tau_large, tau_small}) {
      SamplerConfig cfg;
      cfg.tau = tau;
      cfg.seed = 500 + static_cast<std::uint64_t>(s);
      const auto r = run_chain(b.map, b.lik, cfg);
      const SampleSet set{r.samples, std::nullopt};
      const double ds = diversity_score(set, default_cluster_count(r.samples.size()), cfg.seed);
      (tau == tau_large ? out.large_tau : out.small_tau).push_back(ds);
      Vector mean = Vector::Zero(r.samples.front().size());
      for (const auto& x : r.samples) mean += x;
      mean /= static_cast<double>(r.samples.size());
      double ss = 0.0;
      for (const auto& x : r.samples) ss += (x - mean).squaredNorm();
      const double rms = std::sqrt(ss / static_cast<double>(r.samples.size()));
      (tau == tau_large ? out.large_tau_spread : out.small_tau_spread) += rms / seeds;
    }
  }
  const auto post = b.posterior();
  out.posterior_spread = std::sqrt((b.m * post.covariance * b.m.transpose()).trace());
  out.test = welch_one_sided(out.large_tau, out.small_tau);
  return out;
}

}  // namespace nsl
