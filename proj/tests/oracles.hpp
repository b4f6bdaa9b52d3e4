#pragma once

// Reference computations used by the tests. None of these call into the
// library; they recompute the quantity from its definition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using quad = __float128;

/// J1 by its power series in quad precision: sum_k (-1)^k (x/2)^(2k+1) / (k! (k+1)!).
inline double bessel_j1_series(double xd) {
  const quad x = xd;
  const quad h = x / 2;
  quad term = h;  // k = 0
  quad sum = term;
  for (int k = 1; k < 400; ++k) {
    term *= -(h * h) / (static_cast<quad>(k) * static_cast<quad>(k + 1));
    sum += term;
    const quad a = term < 0 ? -term : term;
    if (a < static_cast<quad>(1e-40) && k > static_cast<int>(std::abs(xd))) break;
  }
  return static_cast<double>(sum);
}

/// R = z tan(asin(s)) with s = lambda/(2p), written as z s / sqrt(1 - s^2), in quad.
inline double aliasing_radius(double z, double lambda, double pitch) {
  const quad s = static_cast<quad>(lambda) / (2 * static_cast<quad>(pitch));
  quad q = 1 - s * s;
  // Newton square root in quad.
  quad r = std::sqrt(static_cast<double>(q));
  for (int i = 0; i < 4; ++i) r = (r + q / r) / 2;
  return static_cast<double>(static_cast<quad>(z) * s / r);
}

struct Point {
  long px, py;
};

/// Exhaustive gated assignment: maximise the number of pairs within the gate,
/// then minimise total Euclidean distance. Returns {pairs, cost}.
inline std::pair<std::size_t, double> best_assignment(const std::vector<Point>& t,
                                                      const std::vector<Point>& e, double gate) {
  std::size_t best_n = 0;
  double best_cost = 0.0;
  std::vector<char> used(e.size(), 0);
  auto rec = [&](auto&& self, std::size_t i, std::size_t n, double cost) -> void {
    if (i == t.size()) {
      if (n > best_n || (n == best_n && cost < best_cost)) {
        best_n = n;
        best_cost = cost;
      }
      return;
    }
    self(self, i + 1, n, cost);  // leave truth i unmatched
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (used[j]) continue;
      const double d = std::hypot(static_cast<double>(t[i].px - e[j].px),
                                  static_cast<double>(t[i].py - e[j].py));
      if (d > gate) continue;
      used[j] = 1;
      self(self, i + 1, n + 1, cost + d);
      used[j] = 0;
    }
  };
  rec(rec, 0, 0, 0.0);
  return {best_n, best_cost};
}

inline std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// True if every regular file under `a` exists under `b` with identical bytes, and vice versa.
inline bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b) {
  namespace fs = std::filesystem;
  auto list = [](const fs::path& root) {
    std::vector<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).string());
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto la = list(a);
  if (la != list(b)) return false;
  for (const auto& rel : la) {
    if (read_bytes(a / rel) != read_bytes(b / rel)) return false;
  }
  return true;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / ("holofield_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace oracle
