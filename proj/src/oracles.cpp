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

#include "nsl/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nsl/rng.hpp"

namespace nsl {

namespace {

std::size_t total_size(const GridSpec& axes) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(a.n);
  return n;
}

void validate_axes(const GridSpec& axes) {
  require(!axes.empty() && axes.size() <= 3, "density grid: dim must be 1, 2, or 3");
  for (const auto& a : axes) {
    require(a.n >= 2, "density grid: every axis needs at least 2 nodes");
    require(std::isfinite(a.lo) && std::isfinite(a.hi) && a.lo < a.hi,
            "density grid: axis bounds must satisfy lo < hi");
  }
}

// Multi-index of a flat row-major position.
std::vector<Index> unflatten(const GridSpec& axes, std::size_t flat) {
  std::vector<Index> idx(axes.size());
  for (std::size_t k = axes.size(); k-- > 0;) {
    const auto n = static_cast<std::size_t>(axes[k].n);
    idx[k] = static_cast<Index>(flat % n);
    flat /= n;
  }
  return idx;
}

GridSpec refine(const GridSpec& spec) {
  GridSpec out = spec;
  for (auto& a : out) a.n = 2 * a.n - 1;
  return out;
}

// Per-axis (low face, high face) maxima divided by the peak.
std::vector<std::pair<double, double>> face_ratios(const DensityGrid& g) {
  const auto& v = g.values();
  const double peak = *std::max_element(v.begin(), v.end());
  std::vector<std::pair<double, double>> faces(g.axes().size(), {0.0, 0.0});
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto idx = unflatten(g.axes(), i);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] == 0) faces[k].first = std::max(faces[k].first, v[i] / peak);
      if (idx[k] == g.axes()[k].n - 1) faces[k].second = std::max(faces[k].second, v[i] / peak);
    }
  }
  return faces;
}

ConditionReport theorem_quantities(const DensityGrid& p_data,
                                   const DensityGrid& model_prior,
                                   const PointFunction& likelihood) {
  require(p_data.same_layout(model_prior), "check_theorem_bound: grids differ");
  ConditionReport report = condition_number(likelihood, p_data);
  report.eps_prior = tv_distance_grid(p_data, model_prior);
  std::vector<double> post_true(p_data.size());
  std::vector<double> post_model(p_data.size());
  for (std::size_t i = 0; i < p_data.size(); ++i) {
    const auto x = p_data.node(i);
    const double l = likelihood(x);
    post_true[i] = l * p_data.values()[i];
    post_model[i] = l * model_prior.values()[i];
  }
  const DensityGrid pt(p_data.axes(), std::move(post_true));
  const DensityGrid pm(p_data.axes(), std::move(post_model));
  report.tv_posteriors = tv_distance_grid(pt, pm);
  report.bound_value = 2.0 * report.kappa_y * report.eps_prior;
  return report;
}

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

}  // namespace

// ---------------------------------------------------------------- DensityGrid

DensityGrid::DensityGrid(GridSpec axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
  validate_axes(axes_);
  require(values_.size() == total_size(axes_),
          "density grid: value count does not match the axes");
  bool positive = false;
  for (const double v : values_) {
    require(std::isfinite(v) && v >= 0.0, "density grid: values must be finite and >= 0");
    positive = positive || v > 0.0;
  }
  require(positive, "density grid: at least one value must be positive");
}

DensityGrid DensityGrid::tabulate(GridSpec axes, const PointFunction& f) {
  validate_axes(axes);
  std::vector<double> values(total_size(axes));
  std::vector<double> x(axes.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto idx = unflatten(axes, i);
    for (std::size_t k = 0; k < axes.size(); ++k) x[k] = axes[k].node(idx[k]);
    values[i] = f(x);
  }
  return DensityGrid(std::move(axes), std::move(values));
}

DensityGrid DensityGrid::tabulate_log(GridSpec axes, const PointFunction& log_f) {
  validate_axes(axes);
  std::vector<double> logs(total_size(axes));
  std::vector<double> x(axes.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto idx = unflatten(axes, i);
    for (std::size_t k = 0; k < axes.size(); ++k) x[k] = axes[k].node(idx[k]);
    logs[i] = log_f(x);
    require(!std::isnan(logs[i]), "density grid: log density is NaN");
    peak = std::max(peak, logs[i]);
  }
  require(std::isfinite(peak), "density grid: log density has no finite maximum");
  for (auto& l : logs) l = std::exp(l - peak);
  return DensityGrid(std::move(axes), std::move(logs));
}

DensityGrid DensityGrid::tabulate_log_with_support(GridSpec axes,
                                                   const PointFunction& log_f,
                                                   double rel_tol, int max_extensions) {
  for (int ext = 0;; ++ext) {
    DensityGrid g = tabulate_log(axes, log_f);
    const auto faces = face_ratios(g);
    bool ok = true;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const double width = axes[k].hi - axes[k].lo;
      if (faces[k].first >= rel_tol) {
        axes[k].lo -= 0.5 * width;
        ok = false;
      }
      if (faces[k].second >= rel_tol) {
        axes[k].hi += 0.5 * width;
        ok = false;
      }
    }
    if (ok) return g;
    if (ext >= max_extensions) {
      throw SupportError("density grid: boundary density still >= " +
                         std::to_string(rel_tol) + " of the peak after " +
                         std::to_string(max_extensions) + " extensions");
    }
  }
}

std::vector<double> DensityGrid::node(std::size_t flat) const {
  const auto idx = unflatten(axes_, flat);
  std::vector<double> x(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) x[k] = axes_[k].node(idx[k]);
  return x;
}

double DensityGrid::weight(std::size_t flat) const {
  const auto idx = unflatten(axes_, flat);
  double w = 1.0;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const bool edge = idx[k] == 0 || idx[k] == axes_[k].n - 1;
    w *= axes_[k].step() * (edge ? 0.5 : 1.0);
  }
  return w;
}

double DensityGrid::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += weight(i) * values_[i];
  return s;
}

std::vector<double> DensityGrid::normalized() const {
  const double z = integral();
  std::vector<double> out(values_);
  for (auto& v : out) v /= z;
  return out;
}

double DensityGrid::boundary_ratio() const {
  double worst = 0.0;
  for (const auto& [lo, hi] : face_ratios(*this)) worst = std::max({worst, lo, hi});
  return worst;
}

Vector DensityGrid::mean() const {
  const auto p = normalized();
  Vector m = Vector::Zero(dim());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto x = node(i);
    const double w = weight(i) * p[i];
    for (int k = 0; k < dim(); ++k) m[k] += w * x[static_cast<std::size_t>(k)];
  }
  return m;
}

Matrix DensityGrid::covariance() const {
  const auto p = normalized();
  const Vector m = mean();
  Matrix c = Matrix::Zero(dim(), dim());
  Vector dx(dim());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto x = node(i);
    for (int k = 0; k < dim(); ++k) dx[k] = x[static_cast<std::size_t>(k)] - m[k];
    c += weight(i) * p[i] * dx * dx.transpose();
  }
  return c;
}

// ------------------------------------------------------------------ posteriors

GaussianPosterior gaussian_posterior_closed_form(const Matrix& m, const Vector& b,
                                                 const Matrix& a, const Vector& y,
                                                 double sigma) {
  require(sigma > 0.0, "gaussian posterior: sigma must be positive");
  require(m.rows() == m.cols() && m.rows() >= 1, "gaussian posterior: M must be square");
  require(b.size() == m.rows(), "gaussian posterior: b length must match M");
  require(a.cols() == m.rows(), "gaussian posterior: A columns must match M");
  require(y.size() == a.rows(), "gaussian posterior: y length must match A rows");
  const Matrix am = a * m;
  const double s2 = sigma * sigma;
  const Matrix precision =
      Matrix::Identity(m.rows(), m.rows()) + am.transpose() * am / s2;
  const Eigen::LLT<Matrix> llt(precision);
  GaussianPosterior out;
  out.covariance = llt.solve(Matrix::Identity(m.rows(), m.rows()));
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  out.mean = out.covariance * (am.transpose() * (y - a * b)) / s2;
  return out;
}

DensityGrid grid_posterior(const LikelihoodModel& lik, const GenerativeMap& map,
                           const GridSpec& spec) {
  require(static_cast<Index>(spec.size()) == map.dim(),
          "grid_posterior: grid dimension must equal the map dimension");
  return DensityGrid::tabulate_log_with_support(
      spec, [&](std::span<const double> x) {
        const Vector z = Eigen::Map<const Vector>(x.data(), static_cast<Index>(x.size()));
        return -0.5 * z.squaredNorm() - lik.neg_log_likelihood(map.apply(z));
      });
}

DensityGrid pushforward_density_1d(const GenerativeMap& map,
                                   const std::function<double(double)>& noise_log_density,
                                   const GridAxis& data_axis,
                                   std::pair<double, double> noise_bracket) {
  require(map.dim() == 1, "pushforward_density_1d: map must be 1-D");
  auto phi = [&](double z) { return map.apply(Vector::Constant(1, z))[0]; };
  const double zl = noise_bracket.first;
  const double zh = noise_bracket.second;
  require(zl < zh, "pushforward_density_1d: bracket must satisfy lo < hi");
  const double fl = phi(zl);
  const double fh = phi(zh);
  const bool increasing = fh > fl;
  const double xmin = std::min(fl, fh);
  const double xmax = std::max(fl, fh);
  return DensityGrid::tabulate_log({data_axis}, [&](std::span<const double> xs) {
    const double x = xs[0];
    if (x <= xmin || x >= xmax) return -std::numeric_limits<double>::infinity();
    double a = zl;
    double b = zh;
    for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
      const double mid = 0.5 * (a + b);
      if ((phi(mid) < x) == increasing) a = mid; else b = mid;
    }
    const double z = 0.5 * (a + b);
    const double slope = std::abs(map.pullback(Vector::Constant(1, z), Vector::Ones(1))[0]);
    if (!(slope > 0.0)) return -std::numeric_limits<double>::infinity();
    return noise_log_density(z) - std::log(slope);
  });
}

DensityGrid grid_posterior_data_1d(const LikelihoodModel& lik, const GenerativeMap& map,
                                   const GridAxis& data_axis,
                                   std::pair<double, double> noise_bracket) {
  return pushforward_density_1d(
      map,
      [&](double z) {
        return -0.5 * z * z - lik.neg_log_likelihood(map.apply(Vector::Constant(1, z)));
      },
      data_axis, noise_bracket);
}

// -------------------------------------------------------------------- TV, kappa

double tv_distance_grid(const DensityGrid& p, const DensityGrid& q) {
  require(p.same_layout(q), "tv_distance_grid: grids differ");
  const auto pn = p.normalized();
  const auto qn = q.normalized();
  double s = 0.0;
  for (std::size_t i = 0; i < pn.size(); ++i) s += p.weight(i) * std::abs(pn[i] - qn[i]);
  return 0.5 * s;
}

ConditionReport condition_number(const PointFunction& likelihood,
                                 const DensityGrid& p_data) {
  require(p_data.dim() <= 2, "condition_number: grid must be 1-D or 2-D");
  const auto p = p_data.normalized();
  ConditionReport report;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double l = likelihood(p_data.node(i));
    require(std::isfinite(l) && l >= 0.0, "condition_number: likelihood must be finite and >= 0");
    report.sup_likelihood = std::max(report.sup_likelihood, l);
    report.evidence += p_data.weight(i) * l * p[i];
  }
  if (!(report.evidence > 0.0)) {
    throw IllPosedError("condition_number: evidence is zero on the grid");
  }
  report.kappa_y = report.sup_likelihood / report.evidence;
  return report;
}

ConditionReport check_theorem_bound(const DensityGrid& p_data,
                                    const DensityGrid& model_prior,
                                    const PointFunction& likelihood, double quad_tol) {
  ConditionReport r = theorem_quantities(p_data, model_prior, likelihood);
  r.quadrature_error = quad_tol;
  r.slack = r.bound_value + 10.0 * quad_tol - r.tv_posteriors;
  if (r.slack < 0.0) {
    throw TheoremViolation("TV bound violated: tv_posteriors = " +
                           std::to_string(r.tv_posteriors) + " > 2 kappa eps = " +
                           std::to_string(r.bound_value));
  }
  return r;
}

ConditionReport check_theorem_bound(const PointFunction& p_data,
                                    const PointFunction& model_prior,
                                    const PointFunction& likelihood,
                                    const GridSpec& spec) {
  const auto coarse = theorem_quantities(DensityGrid::tabulate(spec, p_data),
                                         DensityGrid::tabulate(spec, model_prior),
                                         likelihood);
  const GridSpec fine_spec = refine(spec);
  const DensityGrid fine_data = DensityGrid::tabulate(fine_spec, p_data);
  const DensityGrid fine_model = DensityGrid::tabulate(fine_spec, model_prior);
  if (fine_data.boundary_ratio() >= 1e-10 || fine_model.boundary_ratio() >= 1e-10) {
    throw SupportError("check_theorem_bound: priors are not contained in the grid");
  }
  const auto fine = theorem_quantities(fine_data, fine_model, likelihood);
  const double err = std::abs(fine.tv_posteriors - coarse.tv_posteriors) +
                     std::abs(fine.bound_value - coarse.bound_value);
  return check_theorem_bound(fine_data, fine_model, likelihood, err);
}

// ------------------------------------------------------------------------- DPI

std::vector<double> sample_grid_1d(const DensityGrid& p, std::span<const double> uniforms) {
  require(p.dim() == 1, "sample_grid_1d: grid must be 1-D");
  const auto& axis = p.axes()[0];
  const auto dens = p.normalized();
  const double h = axis.step();
  std::vector<double> cdf(dens.size(), 0.0);
  for (std::size_t i = 1; i < dens.size(); ++i) {
    cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i - 1] + dens[i]);
  }
  const double total = cdf.back();
  std::vector<double> out;
  out.reserve(uniforms.size());
  for (const double u : uniforms) {
    const double target = u * total;
    auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.begin()) ++it;
    if (it == cdf.end()) --it;
    const auto i = static_cast<std::size_t>(it - cdf.begin());
    const double c0 = cdf[i - 1];
    const double c1 = cdf[i];
    const double frac = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
    out.push_back(axis.node(static_cast<Index>(i - 1)) + frac * h);
  }
  return out;
}

DpiResult check_dpi(const DensityGrid& p, const DensityGrid& q,
                    const std::function<double(double)>& phi, int n_bins,
                    std::int64_t n_samples, std::uint64_t seed) {
  require(p.dim() == 1 && q.dim() == 1, "check_dpi: densities must be 1-D");
  require(n_bins >= 1, "check_dpi: n_bins must be >= 1");
  require(n_samples >= 1, "check_dpi: n_samples must be >= 1");
  DpiResult out;
  out.tv_before = tv_distance_grid(p, q);
  const Vector u = NormalStream(seed, 0, StreamPurpose::resampling).uniform(0, n_samples);
  const std::span<const double> us(u.data(), static_cast<std::size_t>(n_samples));
  auto xp = sample_grid_1d(p, us);
  auto xq = sample_grid_1d(q, us);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (auto* xs : {&xp, &xq}) {
    for (auto& x : *xs) {
      x = phi(x);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  std::vector<double> hp(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<double> hq(static_cast<std::size_t>(n_bins), 0.0);
  const double width = hi > lo ? (hi - lo) / n_bins : 1.0;
  auto bin_of = [&](double x) {
    const auto b = static_cast<int>((x - lo) / width);
    return static_cast<std::size_t>(std::clamp(b, 0, n_bins - 1));
  };
  for (std::size_t i = 0; i < xp.size(); ++i) {
    hp[bin_of(xp[i])] += 1.0;
    hq[bin_of(xq[i])] += 1.0;
  }
  double s = 0.0;
  for (int b = 0; b < n_bins; ++b) s += std::abs(hp[static_cast<std::size_t>(b)] - hq[static_cast<std::size_t>(b)]);
  out.tv_after = 0.5 * s / static_cast<double>(n_samples);
  out.tolerance = 5.0 / std::sqrt(static_cast<double>(n_samples));
  out.holds = out.tv_after <= out.tv_before + out.tolerance;
  return out;
}

// ------------------------------------------------------------------------- KDE

double silverman_bandwidth(std::span<const double> samples) {
  require(samples.size() >= 2, "silverman_bandwidth: need at least 2 samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  double mean = 0.0;
  for (const double x : s) mean += x;
  mean /= static_cast<double>(s.size());
  double var = 0.0;
  for (const double x : s) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(s.size() - 1));
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  require(spread > 0.0, "silverman_bandwidth: samples have zero spread");
  return 0.9 * spread * std::pow(static_cast<double>(s.size()), -0.2);
}

DensityGrid kde_grid_1d(std::span<const double> samples, const GridAxis& axis,
                        double bandwidth) {
  const double h = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(samples);
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double norm = 1.0 / (static_cast<double>(s.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> values(static_cast<std::size_t>(axis.n), 0.0);
  for (Index i = 0; i < axis.n; ++i) {
    const double x = axis.node(i);
    auto first = std::lower_bound(s.begin(), s.end(), x - 10.0 * h);
    auto last = std::upper_bound(first, s.end(), x + 10.0 * h);
    double acc = 0.0;
    for (auto it = first; it != last; ++it) {
      const double r = (x - *it) / h;
      acc += std::exp(-0.5 * r * r);
    }
    values[static_cast<std::size_t>(i)] = acc * norm;
  }
  return DensityGrid({axis}, std::move(values));
}

// --------------------------------------------------------------------- moments

double integrated_autocorrelation_time(std::span<const double> x) {
  const std::size_t n = x.size();
  require(n >= 2, "integrated_autocorrelation_time: need at least 2 values");
  double mean = 0.0;
  for (const double v : x) mean += v;
  mean /= static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - mean) * (x[t + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double g0 = autocov(0);
  if (!(g0 > 0.0)) return 1.0;
  // Geyer: sum adjacent-pair sums Gamma_m = g(2m) + g(2m+1) while positive.
  double sum = 0.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (m == 0 ? g0 : autocov(2 * m)) + autocov(2 * m + 1);
    if (!(pair > 0.0)) break;
    sum += pair;
  }
  return std::max(1.0, (2.0 * sum - g0) / g0);
}

MomentEstimate moment_estimate(std::span<const Vector> samples) {
  require(samples.size() >= 2, "moment_estimate: need at least 2 samples");
  const Index d = samples.front().size();
  for (const auto& s : samples) require(s.size() == d, "moment_estimate: ragged samples");
  const auto n = static_cast<double>(samples.size());
  MomentEstimate out;
  out.mean = Vector::Zero(d);
  for (const auto& s : samples) out.mean += s;
  out.mean /= n;
  out.covariance = Matrix::Zero(d, d);
  for (const auto& s : samples) {
    const Vector dx = s - out.mean;
    out.covariance += dx * dx.transpose();
  }
  out.covariance /= (n - 1.0);
  out.std_errors.resize(d);
  out.effective_sample_size.resize(d);
  std::vector<double> series(samples.size());
  for (Index k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < samples.size(); ++i) series[i] = samples[i][k];
    const double tau = integrated_autocorrelation_time(series);
    out.effective_sample_size[k] = n / tau;
    out.std_errors[k] = std::sqrt(out.covariance(k, k) * tau / n);
  }
  return out;
}

}  // namespace nsl
