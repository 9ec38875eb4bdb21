#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "locsf/error.hpp"

namespace locsf {

/// Spatial point. Components beyond the domain dimension are zero.
using Point = std::array<double, 2>;

enum class Boundary { periodic, open };

inline std::string to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "open";
}

inline Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "open") return Boundary::open;
  fail(ErrorKind::config, "unknown boundary '" + s + "'");
}

/// Uniform rectangular grid on a box of dimension 1 or 2.
///
/// Site coordinates are origin_i + n_i * a_i with n_i = 0..M_i-1. The spacing
/// is L_i/M_i on periodic axes and L_i/(M_i-1) on open axes, so the open grid
/// includes both end points of the box. By default the box is centred on the
/// origin, [-L/2, L/2].
class Domain {
 public:
  Domain() = default;

  Domain(int dim, std::array<double, 2> lengths, std::array<std::size_t, 2> sites,
         Boundary boundary)
      : Domain(dim, lengths, sites, boundary,
               Point{-0.5 * lengths[0], dim > 1 ? -0.5 * lengths[1] : 0.0}) {}

  Domain(int dim, std::array<double, 2> lengths, std::array<std::size_t, 2> sites,
         Boundary boundary, Point origin)
      : dim_(dim), lengths_(lengths), sites_(sites), boundary_(boundary), origin_(origin) {
    require(dim == 1 || dim == 2, ErrorKind::invalid_argument, "domain dimension must be 1 or 2");
    if (dim == 1) {
      lengths_[1] = 1.0;
      sites_[1] = 1;
      origin_[1] = 0.0;
    }
    for (int i = 0; i < dim_; ++i) {
      require(lengths_[i] > 0.0 && std::isfinite(lengths_[i]), ErrorKind::invalid_argument,
              "domain lengths must be positive");
      require(sites_[i] >= 2, ErrorKind::invalid_argument, "domain needs at least 2 sites per axis");
    }
  }

  /// Periodic ring [-L/2, L/2) with M sites.
  static Domain ring(double length, std::size_t sites) {
    return Domain(1, {length, 1.0}, {sites, 1}, Boundary::periodic);
  }

  static Domain interval(double length, std::size_t sites) {
    return Domain(1, {length, 1.0}, {sites, 1}, Boundary::open);
  }

  int dim() const noexcept { return dim_; }
  Boundary boundary() const noexcept { return boundary_; }
  bool periodic() const noexcept { return boundary_ == Boundary::periodic; }
  double length(int axis) const { return lengths_[axis]; }
  std::size_t sites(int axis) const { return sites_[axis]; }
  const std::array<double, 2>& lengths() const noexcept { return lengths_; }
  const std::array<std::size_t, 2>& sites() const noexcept { return sites_; }
  const Point& origin() const noexcept { return origin_; }

  std::size_t site_count() const noexcept { return sites_[0] * sites_[1]; }

  double spacing(int axis) const {
    const auto m = static_cast<double>(sites_[axis]);
    return periodic() ? lengths_[axis] / m : lengths_[axis] / (m - 1.0);
  }

  double volume() const noexcept { return dim_ == 1 ? lengths_[0] : lengths_[0] * lengths_[1]; }

  /// Volume element attached to one grid site.
  double cell_volume() const { return dim_ == 1 ? spacing(0) : spacing(0) * spacing(1); }

  std::array<std::size_t, 2> multi_index(std::size_t site) const {
    return {site % sites_[0], site / sites_[0]};
  }

  std::size_t site_index(std::array<std::size_t, 2> n) const { return n[0] + sites_[0] * n[1]; }

  Point coord(std::size_t site) const {
    const auto n = multi_index(site);
    Point x{origin_[0] + static_cast<double>(n[0]) * spacing(0), 0.0};
    if (dim_ > 1) x[1] = origin_[1] + static_cast<double>(n[1]) * spacing(1);
    return x;
  }

  /// Neighbouring site along `axis` in direction `step` (+1 or -1); empty past an open edge.
  std::optional<std::size_t> neighbor(std::size_t site, int axis, int step) const {
    auto n = multi_index(site);
    const auto m = static_cast<long>(sites_[axis]);
    long k = static_cast<long>(n[axis]) + step;
    if (k < 0 || k >= m) {
      if (!periodic()) return std::nullopt;
      k = (k % m + m) % m;
    }
    n[axis] = static_cast<std::size_t>(k);
    return site_index(n);
  }

  /// True when the centred stencil at `site` along `axis` wraps across the periodic seam.
  /// Coordinates jump by L there, so non-periodic phase functions are discontinuous.
  bool on_seam(std::size_t site, int axis) const {
    if (!periodic()) return false;
    const auto n = multi_index(site)[axis];
    return n == 0 || n + 1 == sites_[axis];
  }

  bool on_open_edge(std::size_t site, int axis) const {
    if (periodic()) return false;
    const auto n = multi_index(site)[axis];
    return n == 0 || n + 1 == sites_[axis];
  }

  /// Maps a point into the fundamental box (periodic axes only).
  Point wrap(Point x) const {
    for (int i = 0; i < dim_; ++i) {
      const double rel = x[i] - origin_[i];
      x[i] = origin_[i] + rel - lengths_[i] * std::floor(rel / lengths_[i]);
    }
    return x;
  }

 private:
  int dim_ = 1;
  std::array<double, 2> lengths_{1.0, 1.0};
  std::array<std::size_t, 2> sites_{2, 1};
  Boundary boundary_ = Boundary::periodic;
  Point origin_{-0.5, 0.0};
};

}  // namespace locsf
