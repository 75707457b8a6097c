#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "permcert/instances.hpp"
#include "permcert/permanent.hpp"
#include "permcert/rounding.hpp"

namespace permcert {

struct ExperimentRow {
  int n = 0;
  std::uint64_t seed = 0;
  int rank_solver = 0;
  int rank_reduced = 0;
  double sqrt_bound = 0.0;  // sqrt(n + 1)
  double log_rel = 0.0;
  double log_lower = 0.0;
  std::optional<double> log_per_exact;
};

struct RankGrowthConfig {
  std::vector<int> n_list{5, 10, 15, 20, 25, 30, 35, 40};
  int instances_per_n = 50;
  std::uint64_t seed = 0;
  int exact_max_n = 0;  // exact permanents for n up to this (capped at 20)
  int workers = 1;
  std::int64_t k_rounds = 0;
};

/// Seed of instance i at size n.
inline std::uint64_t instance_seed(std::uint64_t base, int n, int i) {
  return base + 1000ULL * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(i);
}

inline ExperimentRow run_instance(int n, std::uint64_t seed, const RankGrowthConfig& cfg) {
  const HermitianMatrix a = random_instance({InstanceKind::random_gaussian, n, seed, {}});
  CertifyOptions opts;
  opts.seed = seed;
  opts.k_rounds = cfg.k_rounds;
  const CertifiedBounds b = certify_sandwich(a, opts);
  ExperimentRow row;
  row.n = n;
  row.seed = seed;
  row.rank_solver = b.rank_solver;
  row.rank_reduced = b.rank_r;
  row.sqrt_bound = std::sqrt(static_cast<double>(n + 1));
  row.log_rel = b.relaxation.value_log;
  row.log_lower = b.log_lower;
  if (n <= std::min(cfg.exact_max_n, kExactPermanentCap)) {
    const double per = permanent_exact(a).value;
    row.log_per_exact = per > 0.0 ? std::log(per) : -std::numeric_limits<double>::infinity();
  }
  return row;
}

/// Rows come back ordered by (n, seed) whatever the worker count.
inline std::vector<ExperimentRow> run_rank_growth(const RankGrowthConfig& cfg) {
  std::vector<std::pair<int, std::uint64_t>> jobs;
  for (int n : cfg.n_list) {
    if (n < 1) throw DimensionError("rank-growth: n must be >= 1");
    for (int i = 0; i < cfg.instances_per_n; ++i) jobs.emplace_back(n, instance_seed(cfg.seed, n, i));
  }
  std::vector<ExperimentRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      rows[j] = run_instance(jobs[j].first, jobs[j].second, cfg);
    }
  };
  const int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& l, const auto& r) {
    return l.n != r.n ? l.n < r.n : l.seed < r.seed;
  });
  return rows;
}

struct RankGrowthSummary {
  int n = 0;
  int count = 0;
  double mean_rank_solver = 0.0;
  double sd_rank_solver = 0.0;
  double mean_rank_reduced = 0.0;
  double sd_rank_reduced = 0.0;
  double sqrt_bound = 0.0;
};

inline std::vector<RankGrowthSummary> summarize(const std::vector<ExperimentRow>& rows) {
  std::map<int, std::vector<const ExperimentRow*>> by_n;
  for (const auto& r : rows) by_n[r.n].push_back(&r);
  std::vector<RankGrowthSummary> out;
  for (const auto& [n, group] : by_n) {
    RankGrowthSummary s;
    s.n = n;
    s.count = static_cast<int>(group.size());
    s.sqrt_bound = std::sqrt(static_cast<double>(n + 1));
    for (const auto* r : group) {
      s.mean_rank_solver += r->rank_solver;
      s.mean_rank_reduced += r->rank_reduced;
    }
    s.mean_rank_solver /= s.count;
    s.mean_rank_reduced /= s.count;
    if (s.count > 1) {
      for (const auto* r : group) {
        s.sd_rank_solver += std::pow(r->rank_solver - s.mean_rank_solver, 2);
        s.sd_rank_reduced += std::pow(r->rank_reduced - s.mean_rank_reduced, 2);
      }
      s.sd_rank_solver = std::sqrt(s.sd_rank_solver / (s.count - 1));
      s.sd_rank_reduced = std::sqrt(s.sd_rank_reduced / (s.count - 1));
    }
    out.push_back(s);
  }
  return out;
}

/// Shortest round-trip decimal form; empty for absent or non-finite values.
inline std::string format_number(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "" : (x > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kExperimentHeader =
    "n,seed,rank_solver,rank_reduced,sqrt_bound,log_rel,log_lower,log_per_exact";

inline std::string rows_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out << kExperimentHeader << '\n';
  for (const auto& r : rows) {
    out << r.n << ',' << r.seed << ',' << r.rank_solver << ',' << r.rank_reduced << ','
        << format_number(r.sqrt_bound) << ',' << format_number(r.log_rel) << ','
        << format_number(r.log_lower) << ','
        << (r.log_per_exact ? format_number(*r.log_per_exact) : std::string()) << '\n';
  }
  return out.str();
}

inline std::string summary_csv(const std::vector<RankGrowthSummary>& summary) {
  std::ostringstream out;
  out << "n,count,mean_rank_solver,sd_rank_solver,mean_rank_reduced,sd_rank_reduced,sqrt_bound\n";
  for (const auto& s : summary) {
    out << s.n << ',' << s.count << ',' << format_number(s.mean_rank_solver) << ','
        << format_number(s.sd_rank_solver) << ',' << format_number(s.mean_rank_reduced) << ','
        << format_number(s.sd_rank_reduced) << ',' << format_number(s.sqrt_bound) << '\n';
  }
  return out.str();
}

/// gnuplot script plotting mean ranks against sqrt(n + 1) from a summary CSV.
inline std::string gnuplot_script(const std::string& summary_path) {
  std::ostringstream out;
  out << "set datafile separator ','\n"
      << "set key top left\n"
      << "set xlabel 'n'\n"
      << "set ylabel 'rank'\n"
      << "plot '" << summary_path << "' skip 1 using 1:3:4 with yerrorlines title 'solver rank', \\\n"
      << "     '' skip 1 using 1:5:6 with yerrorlines title 'reduced rank', \\\n"
      << "     '' skip 1 using 1:7 with lines title 'sqrt(n+1)'\n";
  return out.str();
}

}  // namespace permcert
