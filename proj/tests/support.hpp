#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace test_support {

// Adjusted Rand index between two labelings. Reference implementation from
// the contingency-table formula; labels can be arbitrary integers.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("adjusted_rand_index: label vectors must match");
  std::map<std::pair<int, int>, long long> joint;
  std::map<int, long long> count_a;
  std::map<int, long long> count_b;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++count_a[a[i]];
    ++count_b[b[i]];
  }
  const auto choose2 = [](long long n) { return 0.5 * static_cast<double>(n) * (n - 1); };
  double sum_joint = 0.0;
  for (const auto& [k, n] : joint) sum_joint += choose2(n);
  double sum_a = 0.0;
  for (const auto& [k, n] : count_a) sum_a += choose2(n);
  double sum_b = 0.0;
  for (const auto& [k, n] : count_b) sum_b += choose2(n);
  const double total = choose2(static_cast<long long>(a.size()));
  const double expected = sum_a * sum_b / total;
  const double maximum = 0.5 * (sum_a + sum_b);
  if (maximum == expected) return 1.0;  // both labelings are single classes
  return (sum_joint - expected) / (maximum - expected);
}

// Standard normal CDF.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Adaptive Simpson quadrature.
inline double simpson_recurse(const std::function<double(double)>& f, double lo, double hi,
                              double flo, double fmid, double fhi, double whole, double tol,
                              int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lmid = 0.5 * (lo + mid);
  const double rmid = 0.5 * (mid + hi);
  const double flmid = f(lmid);
  const double frmid = f(rmid);
  const double left = (mid - lo) / 6.0 * (flo + 4.0 * flmid + fmid);
  const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frmid + fhi);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_recurse(f, lo, mid, flo, flmid, fmid, left, tol / 2.0, depth - 1) +
         simpson_recurse(f, mid, hi, fmid, frmid, fhi, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        double tol = 1e-13) {
  const double mid = 0.5 * (lo + hi);
  const double flo = f(lo);
  const double fmid = f(mid);
  const double fhi = f(hi);
  const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  return simpson_recurse(f, lo, hi, flo, fmid, fhi, whole, tol, 48);
}

// Upper tail of the F distribution by direct integration of the incomplete
// beta integral: P(F > f) = I_x(df2/2, df1/2) with x = df2 / (df2 + df1 f).
inline double f_upper_tail_reference(double f, int df1, int df2) {
  const double a = 0.5 * df2;
  const double b = 0.5 * df1;
  const double x = df2 / (df2 + df1 * f);
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const auto integrand = [&](double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::exp((a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t) - log_beta);
  };
  return integrate(integrand, 0.0, x);
}

// Fresh scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("imfuse_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace test_support
