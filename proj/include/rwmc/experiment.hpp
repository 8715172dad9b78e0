#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rwmc/stopping.hpp"

// Replicated experiments: independent certified runs over one shared graph,
// per-replication CSV rows and per-walk summaries (mean and standard error
// across replications).
namespace rwmc {

struct ReplicationResult {
  std::size_t replication = 0;
  WalkKind kind = WalkKind::SRW;
  std::uint64_t seed = 0;
  std::optional<TerminationReport> report;
  std::string error;
};

struct ExperimentPlan {
  std::vector<WalkKind> kinds{WalkKind::SRW, WalkKind::MH};
  StoppingConfig stopping;
  std::size_t replications = 1;
  std::uint64_t base_seed = 1;
  std::size_t threads = 1;
  std::optional<std::vector<double>> truth;
};

/// Runs every (kind, replication) pair; replication r uses seed
/// base_seed + r. Results come back ordered by kind, then replication,
/// whatever the thread count.
inline std::vector<ReplicationResult> run_experiment(const Sampler& sampler, const ExperimentPlan& plan) {
  if (plan.replications == 0) throw InvalidArgument("replication count must be at least 1");
  if (plan.kinds.empty()) throw InvalidArgument("no walk kinds requested");
  plan.stopping.validate();
  std::vector<ReplicationResult> results(plan.kinds.size() * plan.replications);
  for (std::size_t k = 0; k < plan.kinds.size(); ++k) {
    for (std::size_t r = 0; r < plan.replications; ++r) {
      auto& slot = results[k * plan.replications + r];
      slot.replication = r;
      slot.kind = plan.kinds[k];
      slot.seed = plan.base_seed + r;
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < results.size(); i = next++) {
      auto& slot = results[i];
      try {
        slot.report = sampler.run(slot.kind, plan.stopping, slot.seed, plan.truth);
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
    }
  };
  const std::size_t width = std::clamp<std::size_t>(plan.threads, 1, results.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < width; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

namespace detail {

inline std::string fmt_num(double x) {
  if (!std::isfinite(x)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& x) { return x ? fmt_num(*x) : "NA"; }

}  // namespace detail

/// Header for report rows with p estimates.
inline std::string report_csv_header(std::size_t p) {
  std::string h =
      "replication,kind,seed,termination_step,budget_flag,ess,ratio_stat,unique_nodes,acceptance_rate,covered";
  for (std::size_t j = 1; j <= p; ++j) h += ",est_" + std::to_string(j);
  for (std::size_t j = 1; j <= p; ++j) h += ",se_" + std::to_string(j);
  h += ",wallclock_s";
  return h;
}

/// One CSV row. budget_flag is 1 when the step budget ran out before the
/// rule fired and "error" for a failed replication.
inline std::string report_csv_row(std::size_t replication, WalkKind kind, std::uint64_t seed,
                                  const std::optional<TerminationReport>& rep, std::size_t p, bool timing = true) {
  std::ostringstream out;
  out << replication << ',' << to_string(kind) << ',' << seed << ',';
  if (!rep) {
    out << "NA,error,NA,NA,NA,NA,NA";
    for (std::size_t j = 0; j < 2 * p + 1; ++j) out << ",NA";
    return out.str();
  }
  out << rep->termination_step << ',' << (rep->budget_terminated ? 1 : 0) << ',' << detail::fmt_opt(rep->ess) << ','
      << detail::fmt_opt(rep->ratio_stat) << ',' << rep->unique_nodes << ',' << detail::fmt_opt(rep->acceptance_rate)
      << ',' << (rep->covered ? (*rep->covered ? "1" : "0") : "NA");
  for (std::size_t j = 0; j < p; ++j) out << ',' << detail::fmt_num(j < rep->estimates.size() ? rep->estimates[j] : NAN);
  for (std::size_t j = 0; j < p; ++j)
    out << ',' << detail::fmt_num(j < rep->std_errors.size() ? rep->std_errors[j] : NAN);
  out << ',' << (timing ? detail::fmt_num(rep->wallclock_seconds) : "0");
  return out.str();
}

inline void write_replications_csv(std::ostream& out, const std::vector<ReplicationResult>& results, std::size_t p,
                                   bool timing = true) {
  out << report_csv_header(p) << '\n';
  for (const auto& r : results) out << report_csv_row(r.replication, r.kind, r.seed, r.report, p, timing) << '\n';
}

/// Mean and standard error (sample sd / sqrt(n)) of a set of values.
struct MeanSe {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;

  static MeanSe of(const std::vector<double>& xs) {
    MeanSe out;
    out.n = xs.size();
    if (xs.empty()) return out;
    CompensatedSum s;
    for (double x : xs) s.add(x);
    out.mean = s.value() / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    CompensatedSum ss;
    for (double x : xs) ss.add((x - out.mean) * (x - out.mean));
    out.se = std::sqrt(ss.value() / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
    return out;
  }
};

struct WalkSummary {
  WalkKind kind = WalkKind::SRW;
  std::size_t replications = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::size_t budget_terminated = 0;
  std::vector<MeanSe> estimates;
  MeanSe termination_step;
  MeanSe ess;
  MeanSe unique_nodes;
  MeanSe coverage;
  MeanSe acceptance_rate;
  MeanSe ratio_stat;
};

inline std::vector<WalkSummary> summarize(const std::vector<ReplicationResult>& results, std::size_t p) {
  std::vector<WalkSummary> out;
  for (WalkKind kind : {WalkKind::SRW, WalkKind::MH}) {
    WalkSummary s;
    s.kind = kind;
    std::vector<std::vector<double>> est(p);
    std::vector<double> steps, ess, uniq, cov, acc, ratio;
    for (const auto& r : results) {
      if (r.kind != kind) continue;
      ++s.replications;
      if (!r.report) {
        ++s.failed;
        continue;
      }
      ++s.succeeded;
      const auto& rep = *r.report;
      if (rep.budget_terminated) ++s.budget_terminated;
      for (std::size_t j = 0; j < p && j < rep.estimates.size(); ++j) est[j].push_back(rep.estimates[j]);
      steps.push_back(static_cast<double>(rep.termination_step));
      if (rep.ess) ess.push_back(*rep.ess);
      uniq.push_back(static_cast<double>(rep.unique_nodes));
      if (rep.covered) cov.push_back(*rep.covered ? 1.0 : 0.0);
      if (rep.acceptance_rate) acc.push_back(*rep.acceptance_rate);
      if (rep.ratio_stat) ratio.push_back(*rep.ratio_stat);
    }
    if (s.replications == 0) continue;
    for (auto& e : est) s.estimates.push_back(MeanSe::of(e));
    s.termination_step = MeanSe::of(steps);
    s.ess = MeanSe::of(ess);
    s.unique_nodes = MeanSe::of(uniq);
    s.coverage = MeanSe::of(cov);
    s.acceptance_rate = MeanSe::of(acc);
    s.ratio_stat = MeanSe::of(ratio);
    out.push_back(std::move(s));
  }
  return out;
}

/// Long-format summary: kind,metric,mean,se,n.
inline void write_summary_csv(std::ostream& out, const std::vector<WalkSummary>& summaries,
                              const std::vector<std::string>& names) {
  out << "kind,metric,mean,se,n\n";
  auto row = [&](WalkKind k, const std::string& metric, const MeanSe& v) {
    out << to_string(k) << ',' << metric << ',' << detail::fmt_num(v.mean) << ',' << detail::fmt_num(v.se) << ','
        << v.n << '\n';
  };
  for (const auto& s : summaries) {
    for (std::size_t j = 0; j < s.estimates.size(); ++j)
      row(s.kind, "est:" + (j < names.size() ? names[j] : std::to_string(j + 1)), s.estimates[j]);
    row(s.kind, "termination_step", s.termination_step);
    row(s.kind, "ess", s.ess);
    row(s.kind, "unique_nodes", s.unique_nodes);
    row(s.kind, "coverage", s.coverage);
    row(s.kind, "acceptance_rate", s.acceptance_rate);
    row(s.kind, "ratio_stat", s.ratio_stat);
    out << to_string(s.kind) << ",budget_terminated," << s.budget_terminated << ",NA," << s.succeeded << '\n';
    out << to_string(s.kind) << ",failed," << s.failed << ",NA," << s.replications << '\n';
  }
}

namespace detail {

inline std::string mean_se(const MeanSe& v, int digits) {
  if (v.n == 0) return "NA";
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v.mean;
  if (std::isfinite(v.se)) o << " (" << std::setprecision(digits) << v.se << ")";
  return o.str();
}

}  // namespace detail

/// Human-readable tables: estimates with standard errors, then run
/// diagnostics, one row per walk kind.
inline void write_summary_text(std::ostream& out, const std::vector<WalkSummary>& summaries,
                               const std::vector<std::string>& names,
                               const std::optional<std::vector<double>>& truth) {
  std::size_t reps = summaries.empty() ? 0 : summaries.front().replications;
  out << "Mean estimates at termination. Replications = " << reps << ", standard errors in parentheses.\n";
  const int w = 22;
  out << std::left << std::setw(6) << "Type";
  for (const auto& n : names) out << std::setw(w) << n;
  out << '\n';
  if (truth) {
    out << std::setw(6) << "Truth";
    for (double t : *truth) {
      std::ostringstream o;
      o << std::fixed << std::setprecision(4) << t;
      out << std::setw(w) << o.str();
    }
    out << '\n';
  }
  for (const auto& s : summaries) {
    std::string kind = to_string(s.kind);
    for (auto& c : kind) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    out << std::setw(6) << kind;
    for (const auto& e : s.estimates) out << std::setw(w) << detail::mean_se(e, 4);
    out << '\n';
  }
  out << '\n'
      << std::setw(6) << "" << std::setw(w) << "Termination step" << std::setw(w) << "ESS" << std::setw(w)
      << "Coverage" << std::setw(w) << "Unique nodes" << std::setw(w) << "Acceptance" << std::setw(w) << "T(eps)"
      << '\n';
  for (const auto& s : summaries) {
    std::string kind = to_string(s.kind);
    for (auto& c : kind) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    out << std::setw(6) << kind << std::setw(w) << detail::mean_se(s.termination_step, 1) << std::setw(w)
        << detail::mean_se(s.ess, 2) << std::setw(w) << detail::mean_se(s.coverage, 3) << std::setw(w)
        << detail::mean_se(s.unique_nodes, 1) << std::setw(w) << detail::mean_se(s.acceptance_rate, 4)
        << std::setw(w) << detail::mean_se(s.ratio_stat, 4) << '\n';
    if (s.budget_terminated > 0 || s.failed > 0)
      out << "  " << s.budget_terminated << " budget-terminated, " << s.failed << " failed\n";
  }
  out << std::right;
}

/// Bin counts of each estimate across successful replications:
/// kind,feature,bin,lower,upper,count.
inline void write_histogram_csv(std::ostream& out, const std::vector<ReplicationResult>& results,
                                const std::vector<std::string>& names, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
  out << "kind,feature,bin,lower,upper,count\n";
  for (WalkKind kind : {WalkKind::SRW, WalkKind::MH}) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      std::vector<double> xs;
      for (const auto& r : results)
        if (r.kind == kind && r.report && j < r.report->estimates.size()) xs.push_back(r.report->estimates[j]);
      if (xs.empty()) continue;
      auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
      double lo = *lo_it;
      double hi = *hi_it;
      if (hi <= lo) hi = lo + 1e-12 * std::max(1.0, std::abs(lo));
      const double width = (hi - lo) / static_cast<double>(bins);
      std::vector<std::size_t> counts(bins, 0);
      for (double x : xs) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        counts[std::min(b, bins - 1)]++;
      }
      for (std::size_t b = 0; b < bins; ++b)
        out << to_string(kind) << ',' << names[j] << ',' << b << ',' << detail::fmt_num(lo + width * b) << ','
            << detail::fmt_num(lo + width * (b + 1)) << ',' << counts[b] << '\n';
    }
  }
}

}  // namespace rwmc
