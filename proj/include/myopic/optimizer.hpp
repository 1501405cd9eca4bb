#ifndef MYOPIC_OPTIMIZER_HPP
#define MYOPIC_OPTIMIZER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "myopic/analysis.hpp"
#include "myopic/config.hpp"
#include "myopic/error.hpp"
#include "myopic/parallel.hpp"
#include "myopic/rng.hpp"

namespace myopic {

/// a_{i,j} = 1 / min(k, N - i + 1).
inline SplitTable equal_splits(const NetworkConfig& cfg) {
  return equal_split_table(cfg.n_relays(), cfg.k_hops());
}

enum class SplitParameterization {
  kSoftmax,    // a = lb + (1 - L lb) softmax(z, 0)
  kProjected,  // a = Euclidean projection of (y, 1 - sum y) onto {a >= lb, sum a = 1}
};

struct OptimizerOptions {
  double lower_bound = 1e-4;
  int starts = 5;  // equal split plus starts - 1 perturbed points
  std::uint64_t seed = 1;
  int max_iterations = 3000;
  double size_tolerance = 1e-7;
  SplitParameterization param = SplitParameterization::kSoftmax;
  AnalysisOptions analysis{};
  unsigned workers = default_workers();
};

struct SplitSolution {
  SplitTable splits;
  double outage = 1.0;
  double equal_outage = 1.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  int best_start = 0;
};

namespace detail {

/// Projection of v onto {a : a_i >= lb, sum a = 1}.
inline std::vector<double> project_to_simplex(std::vector<double> v, double lb) {
  const std::size_t n = v.size();
  const double mass = 1.0 - static_cast<double>(n) * lb;
  for (double& x : v) x -= lb;
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cumulative += u[i];
    const double t = (cumulative - mass) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(x - theta, 0.0) + lb;
  return v;
}

class SplitMap {
public:
  SplitMap(const NetworkConfig& cfg, SplitParameterization param, double lb)
      : n_(cfg.n_relays()), k_(cfg.k_hops()), param_(param), lb_(lb) {
    for (int i = 0; i <= n_; ++i) {
      const int len = cfg.buffer_length(i);
      if (lb * len >= 1.0) throw ConfigError("split lower bound is too large");
      lengths_.push_back(len);
      dims_ += len - 1;
    }
  }

  std::size_t dims() const { return static_cast<std::size_t>(dims_); }

  SplitTable to_table(const double* x) const {
    SplitTable t;
    std::size_t pos = 0;
    for (int len : lengths_) {
      std::vector<double> row(static_cast<std::size_t>(len));
      if (len == 1) {
        row[0] = 1.0;
      } else if (param_ == SplitParameterization::kSoftmax) {
        double peak = 0.0;
        for (int c = 0; c + 1 < len; ++c) peak = std::max(peak, x[pos + static_cast<std::size_t>(c)]);
        double sum = 0.0;
        for (int c = 0; c < len; ++c) {
          const double z = c + 1 < len ? x[pos + static_cast<std::size_t>(c)] : 0.0;
          row[static_cast<std::size_t>(c)] = std::exp(z - peak);
          sum += row[static_cast<std::size_t>(c)];
        }
        const double scale = 1.0 - len * lb_;
        for (double& a : row) a = lb_ + scale * a / sum;
      } else {
        double rest = 1.0;
        for (int c = 0; c + 1 < len; ++c) {
          row[static_cast<std::size_t>(c)] = x[pos + static_cast<std::size_t>(c)];
          rest -= row[static_cast<std::size_t>(c)];
        }
        row.back() = rest;
        row = project_to_simplex(std::move(row), lb_);
      }
      pos += static_cast<std::size_t>(len - 1);
      t.rows.push_back(std::move(row));
    }
    return t;
  }

  std::vector<double> from_table(const SplitTable& t) const {
    std::vector<double> x;
    for (std::size_t i = 0; i < lengths_.size(); ++i) {
      const auto& row = t.rows[i];
      const int len = lengths_[i];
      for (int c = 0; c + 1 < len; ++c) {
        const double a = row[static_cast<std::size_t>(c)];
        x.push_back(param_ == SplitParameterization::kSoftmax
                        ? std::log((a - lb_) / (row.back() - lb_))
                        : a);
      }
    }
    return x;
  }

  double initial_step() const { return param_ == SplitParameterization::kSoftmax ? 0.5 : 0.1; }

private:
  int n_, k_;
  SplitParameterization param_;
  double lb_;
  std::vector<int> lengths_;
  int dims_ = 0;
};

// Start s = 0 is the equal split; the others scale each weight by
// exp(u), u ~ U[-1, 1] from a stream fixed by (seed, s), and renormalize.
inline SplitTable start_table(const NetworkConfig& cfg, int start, std::uint64_t seed, double lb) {
  SplitTable t = equal_splits(cfg);
  if (start == 0) return t;
  RandomStream rng(seed, static_cast<std::uint64_t>(start));
  for (auto& row : t.rows) {
    if (row.size() == 1) continue;
    double sum = 0.0;
    for (double& a : row) {
      a *= std::exp(2.0 * rng.uniform() - 1.0);
      sum += a;
    }
    for (double& a : row) a = std::max(a / sum, 2.0 * lb);
    const double renorm = std::accumulate(row.begin(), row.end(), 0.0);
    for (double& a : row) a /= renorm;
  }
  return t;
}

struct Objective {
  const NetworkConfig* cfg;
  const SplitMap* map;
  double power;
  const AnalysisOptions* analysis;
  int evaluations = 0;
  std::exception_ptr failure;

  double operator()(const double* x) {
    ++evaluations;
    try {
      return system_outage(cfg->with_splits(map->to_table(x)), power, *analysis);
    } catch (...) {
      if (!failure) failure = std::current_exception();
      return 10.0;  // outside [0,1]; the simplex moves away from it
    }
  }

  static double call(const gsl_vector* v, void* self) {
    return (*static_cast<Objective*>(self))(v->data);
  }
};

struct StartResult {
  std::vector<double> x;
  double value = 1.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::exception_ptr failure;
};

inline StartResult nelder_mead(Objective obj, std::vector<double> x0, double step,
                               const OptimizerOptions& opt) {
  const std::size_t n = x0.size();
  StartResult res;
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> steps(gsl_vector_alloc(n), gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, x0[i]);
  gsl_vector_set_all(steps.get(), step);
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n),
      gsl_multimin_fminimizer_free);
  gsl_multimin_function fn{&Objective::call, n, &obj};
  gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), steps.get());
  int status = GSL_CONTINUE;
  int it = 0;
  while (status == GSL_CONTINUE && it < opt.max_iterations) {
    ++it;
    if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver.get()), opt.size_tolerance);
  }
  res.converged = status == GSL_SUCCESS;
  res.iterations = it;
  res.value = solver->fval;
  res.x.assign(solver->x->data, solver->x->data + n);
  res.evaluations = obj.evaluations;
  res.failure = obj.failure;
  return res;
}

}  // namespace detail

/// Minimizes system outage over the splits with q = 0, using Nelder-Mead
/// from several deterministic starts. The equal split is always among the
/// candidates, so the result is never worse than it.
inline SplitSolution optimize_splits(const NetworkConfig& input, double power,
                                     const OptimizerOptions& opt = {}) {
  gsl_set_error_handler_off();
  const NetworkConfig cfg = input.with_q(0.0).with_splits(equal_splits(input));
  SplitSolution sol;
  sol.equal_outage = system_outage(cfg, power, opt.analysis);
  sol.splits = cfg.splits();
  sol.outage = sol.equal_outage;

  const detail::SplitMap map(cfg, opt.param, opt.lower_bound);
  if (map.dims() == 0) {
    sol.converged = true;
    return sol;
  }

  const int starts = std::max(1, opt.starts);
  std::vector<detail::StartResult> results(static_cast<std::size_t>(starts));
  AnalysisOptions inner = opt.analysis;
  inner.build.workers = 1;
  parallel_for(results.size(), opt.workers, [&](std::size_t s) {
    const SplitTable t0 = detail::start_table(cfg, static_cast<int>(s), opt.seed, opt.lower_bound);
    detail::Objective obj{&cfg, &map, power, &inner, 0, nullptr};
    results[s] = detail::nelder_mead(obj, map.from_table(t0), map.initial_step(), opt);
  });

  int best = -1;
  for (int s = 0; s < starts; ++s) {
    const auto& r = results[static_cast<std::size_t>(s)];
    sol.iterations += r.iterations;
    sol.evaluations += r.evaluations;
    if (r.failure && r.value > 1.0) continue;
    if (best < 0 || r.value < results[static_cast<std::size_t>(best)].value) best = s;
  }
  if (best < 0) std::rethrow_exception(results.front().failure);
  const auto& r = results[static_cast<std::size_t>(best)];
  sol.converged = r.converged;
  sol.best_start = best;
  if (r.value < sol.equal_outage) {
    sol.splits = map.to_table(r.x.data());
    sol.outage = r.value;
  }
  return sol;
}

}  // namespace myopic

#endif  // MYOPIC_OPTIMIZER_HPP
