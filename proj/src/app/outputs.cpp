#include "ehsched/app/outputs.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace ehsched::app {

std::string fmt6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string schedule_csv(const Schedule& sched) {
  std::ostringstream os;
  os << "p";
  for (Eigen::Index t = 0; t < sched.powers().size(); ++t) os << ',' << fmt6(sched.powers()[t]);
  os << '\n';
  const auto& tau = sched.time_alloc();
  for (Eigen::Index n = 0; n < tau.rows(); ++n) {
    os << "tau_" << n + 1;
    for (Eigen::Index t = 0; t < tau.cols(); ++t) os << ',' << fmt6(tau(n, t));
    os << '\n';
  }
  return os.str();
}

std::string trace_csv(const std::vector<double>& utility_trace) {
  std::ostringstream os;
  os << "iter,utility\n";
  for (std::size_t i = 0; i < utility_trace.size(); ++i) {
    os << i << ',' << fmt6(utility_trace[i]) << '\n';
  }
  return os.str();
}

std::string metrics_csv(const MetricsReport& m, const Schedule& candidate,
                        const Schedule& baseline, const BcdReport& report) {
  std::ostringstream os;
  os << "key,value\n";
  os << "utility," << fmt6(m.candidate_utility) << '\n';
  os << "baseline_utility," << fmt6(m.baseline_utility) << '\n';
  os << "utility_improvement_pct," << fmt6(m.utility_improvement_pct) << '\n';
  os << "jain_index," << fmt6(m.jain_index) << '\n';
  os << "baseline_jain_index," << fmt6(m.baseline_jain_index) << '\n';
  os << "mean_path_loss_db," << fmt6(m.mean_path_loss_db) << '\n';
  os << "iterations," << report.iterations << '\n';
  os << "converged," << (report.converged ? 1 : 0) << '\n';
  os << "power_gap," << fmt6(report.certificate.power_gap) << '\n';
  os << "time_gap," << fmt6(report.certificate.time_gap) << '\n';
  os << "partial_optimum_holds," << (report.certificate.partial_optimum_holds ? 1 : 0) << '\n';
  for (Eigen::Index n = 0; n < candidate.user_bits().size(); ++n) {
    os << "bits_" << n + 1 << ',' << fmt6(candidate.user_bits()[n]) << '\n';
  }
  for (Eigen::Index n = 0; n < baseline.user_bits().size(); ++n) {
    os << "baseline_bits_" << n + 1 << ',' << fmt6(baseline.user_bits()[n]) << '\n';
  }
  for (std::size_t n = 0; n < m.per_user_throughput_improvement_pct.size(); ++n) {
    const auto& v = m.per_user_throughput_improvement_pct[n];
    os << "throughput_improvement_pct_" << n + 1 << ',' << (v ? fmt6(*v) : "undefined") << '\n';
  }
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ehsched::app
