#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "locsf/domain.hpp"

namespace locsf {

using Tensor2 = std::array<std::array<double, 2>, 2>;

struct NormalFluidSite {
  Point x{};
  double rho = 0.0;  // mass density m <psi^dag psi(x)>
  Tensor2 rho_n{};
  Tensor2 stderr_n{};
  bool masked = false;  // no estimate (v_j = 0, singular region, open edge)
  bool seam = false;    // centred stencil crosses the periodic coordinate seam
};

/// Per-site normal-fluid tensor plus the mass density it is measured against.
///
/// Only the components listed in `components()` carry data. The superfluid part
/// is rho - rho_n by the local two-fluid bookkeeping; no sign is imposed on it.
class NormalFluidField {
 public:
  NormalFluidField() = default;
  NormalFluidField(int dim, std::vector<NormalFluidSite> sites, std::string method)
      : dim_(dim), sites_(std::move(sites)), method_(std::move(method)) {}

  int dim() const noexcept { return dim_; }
  const std::string& method() const noexcept { return method_; }
  const std::vector<NormalFluidSite>& sites() const noexcept { return sites_; }
  std::vector<NormalFluidSite>& sites() noexcept { return sites_; }
  std::size_t size() const noexcept { return sites_.size(); }
  const NormalFluidSite& operator[](std::size_t s) const { return sites_[s]; }
  NormalFluidSite& operator[](std::size_t s) { return sites_[s]; }

  const std::vector<std::pair<int, int>>& components() const noexcept { return components_; }
  void add_component(int i, int j) {
    if (std::find(components_.begin(), components_.end(), std::pair{i, j}) == components_.end())
      components_.emplace_back(i, j);
  }

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void warn(std::string w) {
    if (std::find(warnings_.begin(), warnings_.end(), w) == warnings_.end())
      warnings_.push_back(std::move(w));
  }

  double superfluid(std::size_t s, int i, int j) const { return sites_[s].rho - sites_[s].rho_n[i][j]; }

  /// Sites (unmasked) where the superfluid component comes out negative.
  std::size_t negative_superfluid_count(int i, int j, double tol = 1e-6) const {
    std::size_t n = 0;
    for (std::size_t s = 0; s < sites_.size(); ++s)
      if (!sites_[s].masked && superfluid(s, i, j) < -tol * std::max(1.0, std::abs(sites_[s].rho))) ++n;
    return n;
  }

  /// Records a positivity warning for every component with rho_s < 0 somewhere.
  void flag_positivity() {
    for (auto [i, j] : components_) {
      const auto n = negative_superfluid_count(i, j);
      if (n > 0)
        warn("negative superfluid density rho_s(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
             ") at " + std::to_string(n) + " sites");
    }
  }

  /// Grid CSV: x1[,x2],i,j,rho,rho_n,stderr with 1-based axis labels.
  void write_csv(std::ostream& os) const {
    os << (dim_ == 1 ? "x1" : "x1,x2") << ",i,j,rho,rho_n,stderr\n";
    char buf[64];
    auto num = [&](double v) -> const char* {
      if (!std::isfinite(v)) return "nan";
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return buf;
    };
    for (const auto& site : sites_) {
      for (auto [i, j] : components_) {
        os << num(site.x[0]);
        if (dim_ > 1) os << ',' << num(site.x[1]);
        os << ',' << i + 1 << ',' << j + 1 << ',' << num(site.rho) << ',';
        os << (site.masked ? "nan" : num(site.rho_n[i][j])) << ',';
        os << (site.masked ? "nan" : num(site.stderr_n[i][j])) << '\n';
      }
    }
  }

 private:
  int dim_ = 1;
  std::vector<NormalFluidSite> sites_;
  std::string method_;
  std::vector<std::pair<int, int>> components_;
  std::vector<std::string> warnings_;
};

}  // namespace locsf
