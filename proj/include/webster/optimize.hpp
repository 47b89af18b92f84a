#pragma once

// Derivative-free minimizers: Nelder-Mead with adaptive coefficients and
// restarts, and CMA-ES with a rank-mu/rank-one covariance update. Both stop
// exactly at the evaluation budget and record the best value after every
// evaluation.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <random>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "webster/errors.hpp"

namespace webster {

struct NelderMeadOptions {
  std::size_t max_evals = 2000;
  double initial_step = 0.5;
  double restart_shrink = 0.5;   // step scale applied at each restart
  double min_step = 1e-3;
  double f_tol = 1e-7;           // simplex value spread that ends a run
  double x_tol = 1e-6;           // simplex diameter that ends a run
};

struct OptimizeResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evals = 0;
  std::size_t restarts = 0;
  std::vector<double> trace;  // best value after each evaluation
};

template <class Objective>
OptimizeResult nelder_mead(Objective&& f, std::vector<double> x0, const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  if (n == 0) throw DomainError("nelder_mead: empty parameter vector");
  if (opt.max_evals == 0) throw DomainError("nelder_mead: budget must be positive");

  OptimizeResult res;
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    ++res.evals;
    if (v < res.value) {
      res.value = v;
      res.x = x;
    }
    res.trace.push_back(res.value);
    return v;
  };
  auto budget_left = [&] { return res.evals < opt.max_evals; };

  const double nd = static_cast<double>(n);
  const double reflect = 1.0, expand = 1.0 + 2.0 / nd;
  const double contract = 0.75 - 0.5 / nd, shrink = 1.0 - 1.0 / nd;

  eval(x0);
  double step = opt.initial_step;
  while (budget_left()) {
    std::vector<std::vector<double>> simplex{res.x};
    std::vector<double> values{res.value};
    for (std::size_t i = 0; i < n && budget_left(); ++i) {
      auto v = res.x;
      v[i] += step;
      values.push_back(eval(v));
      simplex.push_back(std::move(v));
    }
    if (simplex.size() < n + 1) break;

    std::vector<std::size_t> order(n + 1);
    while (budget_left()) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

      double diameter = 0.0;
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = 0; j < n; ++j) diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
      if (values[worst] - values[best] <= opt.f_tol * (std::abs(values[best]) + 1e-12) || diameter <= opt.x_tol) break;

      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i <= n; ++i)
        if (i != worst)
          for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / nd;
      auto along = [&](double t) {
        std::vector<double> p(n);
        for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
        return p;
      };

      auto xr = along(-reflect);
      const double fr = eval(xr);
      if (fr < values[best]) {
        if (!budget_left()) break;
        auto xe = along(-expand);
        const double fe = eval(xe);
        if (fe < fr) {
          simplex[worst] = std::move(xe);
          values[worst] = fe;
        } else {
          simplex[worst] = std::move(xr);
          values[worst] = fr;
        }
        continue;
      }
      if (fr < values[second]) {
        simplex[worst] = std::move(xr);
        values[worst] = fr;
        continue;
      }
      if (!budget_left()) break;
      const bool outside = fr < values[worst];
      auto xc = along(outside ? -contract : contract);
      const double fc = eval(xc);
      if (fc < std::min(fr, values[worst])) {
        simplex[worst] = std::move(xc);
        values[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= n && budget_left(); ++i) {
        if (i == best) continue;
        for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[best][j] + shrink * (simplex[i][j] - simplex[best][j]);
        values[i] = eval(simplex[i]);
      }
    }
    step = std::max(step * opt.restart_shrink, opt.min_step);
    ++res.restarts;
  }
  return res;
}

struct CmaesOptions {
  std::size_t max_evals = 2000;
  double initial_sigma = 0.8;
  std::size_t population = 0;  // 0 selects 4 + floor(3 ln n)
  double sigma_floor = 1e-8;   // restart below this step size
  std::uint64_t seed = 1;
};

template <class Objective>
OptimizeResult cmaes(Objective&& f, const std::vector<double>& x0, const CmaesOptions& opt = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const auto n = static_cast<Eigen::Index>(x0.size());
  if (n == 0) throw DomainError("cmaes: empty parameter vector");
  if (opt.max_evals == 0) throw DomainError("cmaes: budget must be positive");

  OptimizeResult res;
  auto eval = [&](const VectorXd& v) {
    std::vector<double> x(v.data(), v.data() + v.size());
    const double value = f(x);
    ++res.evals;
    if (value < res.value) {
      res.value = value;
      res.x = std::move(x);
    }
    res.trace.push_back(res.value);
    return value;
  };

  const double nd = static_cast<double>(n);
  const std::size_t lambda =
      opt.population > 0 ? opt.population : 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(nd)));
  const std::size_t mu = lambda / 2;
  VectorXd weights(static_cast<Eigen::Index>(mu));
  for (std::size_t i = 0; i < mu; ++i)
    weights[static_cast<Eigen::Index>(i)] = std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i + 1));
  weights /= weights.sum();
  const double mueff = 1.0 / weights.squaredNorm();

  const double cs = (mueff + 2.0) / (nd + mueff + 5.0);
  const double ds = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff - 1.0) / (nd + 1.0)) - 1.0) + cs;
  const double cc = (4.0 + mueff / nd) / (nd + 4.0 + 2.0 * mueff / nd);
  const double c1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + mueff);
  const double cmu = std::min(1.0 - c1, 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((nd + 2.0) * (nd + 2.0) + mueff));
  const double chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));

  std::mt19937_64 gen(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  VectorXd mean = Eigen::Map<const VectorXd>(x0.data(), n);
  eval(mean);
  while (res.evals < opt.max_evals) {
    double sigma = opt.initial_sigma;
    MatrixXd cov = MatrixXd::Identity(n, n), basis = MatrixXd::Identity(n, n);
    VectorXd scale = VectorXd::Ones(n), path_s = VectorXd::Zero(n), path_c = VectorXd::Zero(n);
    std::size_t generation = 0;

    while (res.evals < opt.max_evals) {
      std::vector<VectorXd> steps(lambda), points(lambda);
      std::vector<double> values(lambda, std::numeric_limits<double>::infinity());
      std::size_t sampled = 0;
      for (; sampled < lambda && res.evals < opt.max_evals; ++sampled) {
        VectorXd z(n);
        for (Eigen::Index j = 0; j < n; ++j) z[j] = normal(gen);
        steps[sampled] = basis * scale.cwiseProduct(z);
        points[sampled] = mean + sigma * steps[sampled];
        values[sampled] = eval(points[sampled]);
      }
      if (sampled < lambda) break;

      std::vector<std::size_t> order(lambda);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

      VectorXd step_w = VectorXd::Zero(n);
      for (std::size_t i = 0; i < mu; ++i) step_w += weights[static_cast<Eigen::Index>(i)] * steps[order[i]];
      mean += sigma * step_w;

      const VectorXd whitened = basis * scale.cwiseInverse().asDiagonal() * basis.transpose() * step_w;
      path_s = (1.0 - cs) * path_s + std::sqrt(cs * (2.0 - cs) * mueff) * whitened;
      ++generation;
      const double ps_norm = path_s.norm();
      const bool hsig = ps_norm / std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * static_cast<double>(generation))) / chi_n <
                        1.4 + 2.0 / (nd + 1.0);
      path_c = (1.0 - cc) * path_c + (hsig ? std::sqrt(cc * (2.0 - cc) * mueff) : 0.0) * step_w;

      MatrixXd rank_mu = MatrixXd::Zero(n, n);
      for (std::size_t i = 0; i < mu; ++i)
        rank_mu += weights[static_cast<Eigen::Index>(i)] * steps[order[i]] * steps[order[i]].transpose();
      cov = (1.0 - c1 - cmu) * cov + c1 * (path_c * path_c.transpose() + (hsig ? 0.0 : cc * (2.0 - cc)) * cov) +
            cmu * rank_mu;
      sigma *= std::exp((cs / ds) * (ps_norm / chi_n - 1.0));

      cov = 0.5 * (cov + cov.transpose());
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
      basis = eig.eigenvectors();
      scale = eig.eigenvalues().cwiseMax(1e-20).cwiseSqrt();

      if (sigma * scale.maxCoeff() < opt.sigma_floor || !std::isfinite(sigma)) break;
    }
    // restart from the incumbent
    mean = Eigen::Map<const VectorXd>(res.x.data(), n);
    ++res.restarts;
  }
  return res;
}

}  // namespace webster
