#ifndef MYOPIC_SWEEP_HPP
#define MYOPIC_SWEEP_HPP

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "myopic/analysis.hpp"
#include "myopic/config_file.hpp"
#include "myopic/link_outage.hpp"
#include "myopic/optimizer.hpp"
#include "myopic/parallel.hpp"
#include "myopic/simulator.hpp"
#include "myopic/units.hpp"

namespace myopic {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string format_probability(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

struct SweepOptions {
  unsigned workers = default_workers();
  AnalysisOptions analysis{};
  OptimizerOptions optimizer{};
};

/// Curve over the experiment's power grid: analytic outage with the chosen
/// method, the SAA variant, the conventional benchmark (equispaced layouts
/// only) and, if requested, the simulated outage with its 99% interval.
inline OutageCurve run_sweep(const ExperimentConfig& exp, const SweepOptions& opt = {}) {
  if (exp.power_grid_db.empty()) throw ConfigError("power_grid_db is empty");
  const NetworkConfig base(exp.network);
  OutageCurve curve(exp.power_grid_db.size());
  AnalysisOptions analysis = opt.analysis;
  analysis.method = exp.method;
  AnalysisOptions saa = analysis;
  saa.method = OutageMethod::kSaa;
  parallel_for(curve.size(), opt.workers, [&](std::size_t i) {
    const double p_db = exp.power_grid_db[i];
    const double power = power_from_db(p_db, base.sigma2());
    try {
      NetworkConfig cfg = base;
      if (exp.splits_mode == SplitsMode::kOptimized) {
        OptimizerOptions o = opt.optimizer;
        o.analysis = analysis;
        o.workers = 1;
        cfg = cfg.with_q(0.0).with_splits(optimize_splits(cfg, power, o).splits);
      }
      OutageRecord r;
      r.p_db = p_db;
      r.splits_mode = to_string(exp.splits_mode);
      r.analytic = system_outage(cfg, power, analysis);
      r.saa = system_outage(cfg, power, saa);
      if (cfg.equispaced()) r.benchmark = conventional_benchmark(cfg, power);
      if (exp.simulate) {
        SimOptions so;
        so.slots = exp.slots;
        so.seed = exp.seed;
        so.workers = 1;
        const SimResult s = simulate(cfg, power, so);
        r.sim = s.outage;
        r.ci_low = s.ci_low;
        r.ci_high = s.ci_high;
      }
      curve[i] = r;
    } catch (const Error& e) {
      throw Error("at P = " + format_number(p_db) + " dB: " + e.what());
    }
  });
  return curve;
}

inline void write_curve_csv(std::ostream& os, const OutageCurve& curve) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_probability(*v) : std::string();
  };
  os << "P_dB,outage_analytic,outage_saa,outage_benchmark,outage_sim,ci_low,ci_high,splits_mode\n";
  for (const auto& r : curve) {
    os << format_number(r.p_db) << ',' << format_probability(r.analytic) << ',' << opt(r.saa) << ','
       << opt(r.benchmark) << ',' << opt(r.sim) << ',' << opt(r.ci_low) << ',' << opt(r.ci_high) << ','
       << r.splits_mode << '\n';
  }
}

}  // namespace myopic

#endif  // MYOPIC_SWEEP_HPP
