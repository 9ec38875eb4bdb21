#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "locsf/domain.hpp"
#include "locsf/error.hpp"

namespace locsf {

enum class FieldFamily { constant, rotation, linear, inverse_power, tabulated };

inline std::string to_string(FieldFamily f) {
  switch (f) {
    case FieldFamily::constant: return "constant";
    case FieldFamily::rotation: return "rotation";
    case FieldFamily::linear: return "linear";
    case FieldFamily::inverse_power: return "inverse_power";
    case FieldFamily::tabulated: return "tabulated";
  }
  return "?";
}

inline FieldFamily field_family_from_string(const std::string& s) {
  if (s == "constant") return FieldFamily::constant;
  if (s == "rotation") return FieldFamily::rotation;
  if (s == "linear") return FieldFamily::linear;
  if (s == "inverse_power") return FieldFamily::inverse_power;
  if (s == "tabulated") return FieldFamily::tabulated;
  fail(ErrorKind::config, "unknown velocity field family '" + s + "'");
}

/// jac[i][j] = d_i v_j
using Jacobian = std::array<std::array<double, 2>, 2>;

/// Smooth velocity field v(x) with analytic Jacobian for the built-in families.
///
/// Parameters per family:
///   constant       {v_1[, v_2]}
///   rotation       {omega}          v = omega (-x_2, x_1), 2-d only
///   linear         {c_1[, c_2]}     v_i = c_i x_i (a single value broadcasts)
///   inverse_power  {c[, p]}         v_i = c / x_i^p, p a positive integer (default 1)
///   tabulated      per-site samples on an attached grid
///
/// `direction` is the axis used by single-direction transformations.
class VelocityField {
 public:
  VelocityField() = default;

  static VelocityField constant(int dim, Point v, int direction = 0) {
    std::vector<double> p{v[0], v[1]};
    if (dim == 1) p.resize(1);
    return VelocityField(FieldFamily::constant, dim, std::move(p), direction);
  }
  static VelocityField constant(double v) { return constant(1, Point{v, 0.0}); }

  static VelocityField rotation(double omega, int direction = 0) {
    return VelocityField(FieldFamily::rotation, 2, {omega}, direction);
  }

  static VelocityField linear(int dim, std::vector<double> c, int direction = 0) {
    return VelocityField(FieldFamily::linear, dim, std::move(c), direction);
  }
  static VelocityField linear(double c) { return linear(1, {c}); }

  static VelocityField inverse_power(int dim, double c, int power = 1, double exclusion_radius = 0.0,
                                     int direction = 0) {
    VelocityField f(FieldFamily::inverse_power, dim, {c, static_cast<double>(power)}, direction);
    f.set_exclusion_radius(exclusion_radius);
    return f;
  }

  /// `samples[site][component]` on the grid of `domain`.
  static VelocityField tabulated(const Domain& domain, std::vector<Point> samples, int direction = 0) {
    require(samples.size() == domain.site_count(), ErrorKind::invalid_argument,
            "tabulated field needs one sample per grid site");
    VelocityField f;
    f.family_ = FieldFamily::tabulated;
    f.dim_ = domain.dim();
    f.direction_ = direction;
    f.table_ = std::make_shared<Table>(Table{domain, std::move(samples), {}});
    f.table_->build_jacobians();
    f.validate();
    return f;
  }

  /// Generic construction used by configuration parsing.
  static VelocityField from_params(FieldFamily family, int dim, std::vector<double> params,
                                   int direction, double exclusion_radius) {
    require(family != FieldFamily::tabulated, ErrorKind::config,
            "tabulated fields are built from samples, not params");
    VelocityField f(family, dim, std::move(params), direction);
    f.set_exclusion_radius(exclusion_radius);
    return f;
  }

  FieldFamily family() const noexcept { return family_; }
  int dim() const noexcept { return dim_; }
  int direction() const noexcept { return direction_; }
  const std::vector<double>& params() const noexcept { return params_; }
  double exclusion_radius() const noexcept { return exclusion_radius_; }

  VelocityField with_direction(int j) const {
    VelocityField f = *this;
    require(j >= 0 && j < dim_, ErrorKind::invalid_argument, "boost direction out of range");
    f.direction_ = j;
    return f;
  }

  /// Field multiplied by a scalar (used for the v -> 0 limit).
  VelocityField scaled(double s) const {
    VelocityField f = *this;
    f.scale_ *= s;
    return f;
  }

  double scale() const noexcept { return scale_; }

  /// True when x lies in the declared singular neighbourhood.
  bool singular(const Point& x) const {
    if (family_ != FieldFamily::inverse_power) return false;
    for (int i = 0; i < dim_; ++i) {
      const double r = std::abs(x[i]);
      if (r == 0.0 || r < exclusion_radius_) return true;
    }
    return false;
  }

  Point eval(const Point& x) const {
    check_regular(x);
    Point v{0.0, 0.0};
    switch (family_) {
      case FieldFamily::constant:
        for (int i = 0; i < dim_; ++i) v[i] = params_[i];
        break;
      case FieldFamily::rotation:
        v = {-params_[0] * x[1], params_[0] * x[0]};
        break;
      case FieldFamily::linear:
        for (int i = 0; i < dim_; ++i) v[i] = linear_coeff(i) * x[i];
        break;
      case FieldFamily::inverse_power:
        for (int i = 0; i < dim_; ++i) v[i] = params_[0] * std::pow(x[i], -power());
        break;
      case FieldFamily::tabulated:
        v = table_->interpolate(x, false, 0);
        break;
    }
    return {scale_ * v[0], scale_ * v[1]};
  }

  Jacobian jacobian(const Point& x) const {
    check_regular(x);
    Jacobian J{};
    switch (family_) {
      case FieldFamily::constant:
        break;
      case FieldFamily::rotation:
        // v_1 = -w x_2, v_2 = w x_1
        J[1][0] = -params_[0];
        J[0][1] = params_[0];
        break;
      case FieldFamily::linear:
        for (int i = 0; i < dim_; ++i) J[i][i] = linear_coeff(i);
        break;
      case FieldFamily::inverse_power:
        for (int i = 0; i < dim_; ++i)
          J[i][i] = -power() * params_[0] * std::pow(x[i], -power() - 1);
        break;
      case FieldFamily::tabulated:
        for (int i = 0; i < dim_; ++i) {
          const Point row = table_->interpolate(x, true, i);
          J[i][0] = row[0];
          J[i][1] = row[1];
        }
        break;
    }
    for (auto& row : J)
      for (auto& e : row) e *= scale_;
    return J;
  }

 private:
  struct Table {
    Domain domain;
    std::vector<Point> values;
    std::vector<std::array<Point, 2>> jac;  // jac[site][axis i] = d_i v

    // 4th-order centred differences; open edges fall back to 2nd-order one-sided.
    void build_jacobians() {
      const std::size_t n = domain.site_count();
      jac.assign(n, {});
      for (std::size_t s = 0; s < n; ++s) {
        for (int ax = 0; ax < domain.dim(); ++ax) {
          const double a = domain.spacing(ax);
          const auto m = domain.sites(ax);
          const auto k = domain.multi_index(s)[ax];
          auto at = [&](long off) -> const Point& {
            auto idx = domain.multi_index(s);
            long kk = static_cast<long>(k) + off;
            const long mm = static_cast<long>(m);
            kk = (kk % mm + mm) % mm;
            idx[ax] = static_cast<std::size_t>(kk);
            return values[domain.site_index(idx)];
          };
          Point d{};
          const bool interior4 = domain.periodic() ? m >= 5 : (k >= 2 && k + 2 < m);
          for (int c = 0; c < 2; ++c) {
            if (interior4) {
              d[c] = (-at(2)[c] + 8.0 * at(1)[c] - 8.0 * at(-1)[c] + at(-2)[c]) / (12.0 * a);
            } else if (domain.periodic() || (k >= 1 && k + 1 < m)) {
              d[c] = (at(1)[c] - at(-1)[c]) / (2.0 * a);
            } else if (k == 0) {
              d[c] = (-3.0 * at(0)[c] + 4.0 * at(1)[c] - at(2)[c]) / (2.0 * a);
            } else {
              d[c] = (3.0 * at(0)[c] - 4.0 * at(-1)[c] + at(-2)[c]) / (2.0 * a);
            }
          }
          jac[s][ax] = d;
        }
      }
    }

    // Multilinear interpolation of values (or of d_axis v when `derivative`).
    Point interpolate(const Point& x, bool derivative, int axis) const {
      std::array<std::size_t, 2> lo{0, 0}, hi{0, 0};
      std::array<double, 2> t{0.0, 0.0};
      for (int ax = 0; ax < domain.dim(); ++ax) {
        const double a = domain.spacing(ax);
        const auto m = domain.sites(ax);
        double u = (x[ax] - domain.origin()[ax]) / a;
        if (domain.periodic()) {
          u -= static_cast<double>(m) * std::floor(u / static_cast<double>(m));
          lo[ax] = static_cast<std::size_t>(std::floor(u)) % m;
          hi[ax] = (lo[ax] + 1) % m;
        } else {
          u = std::clamp(u, 0.0, static_cast<double>(m - 1));
          lo[ax] = std::min(static_cast<std::size_t>(std::floor(u)), m - 2);
          hi[ax] = lo[ax] + 1;
        }
        t[ax] = u - std::floor(u);
        if (!domain.periodic() && u >= static_cast<double>(m - 1)) t[ax] = 1.0;
      }
      auto sample = [&](std::size_t i0, std::size_t i1) -> Point {
        const auto s = domain.site_index({i0, i1});
        return derivative ? jac[s][axis] : values[s];
      };
      Point out{};
      for (int c = 0; c < 2; ++c) {
        if (domain.dim() == 1) {
          out[c] = (1 - t[0]) * sample(lo[0], 0)[c] + t[0] * sample(hi[0], 0)[c];
        } else {
          out[c] = (1 - t[0]) * (1 - t[1]) * sample(lo[0], lo[1])[c] +
                   t[0] * (1 - t[1]) * sample(hi[0], lo[1])[c] +
                   (1 - t[0]) * t[1] * sample(lo[0], hi[1])[c] + t[0] * t[1] * sample(hi[0], hi[1])[c];
        }
      }
      return out;
    }
  };

  VelocityField(FieldFamily family, int dim, std::vector<double> params, int direction)
      : family_(family), dim_(dim), direction_(direction), params_(std::move(params)) {
    validate();
  }

  void validate() const {
    require(dim_ == 1 || dim_ == 2, ErrorKind::invalid_argument, "field dimension must be 1 or 2");
    require(direction_ >= 0 && direction_ < dim_, ErrorKind::invalid_argument,
            "boost direction out of range");
    for (double p : params_)
      require(std::isfinite(p), ErrorKind::invalid_argument, "field parameters must be finite");
    switch (family_) {
      case FieldFamily::constant:
        require(params_.size() == static_cast<std::size_t>(dim_), ErrorKind::invalid_argument,
                "constant field needs one component per axis");
        break;
      case FieldFamily::rotation:
        require(dim_ == 2 && params_.size() == 1, ErrorKind::invalid_argument,
                "rotation field is 2-d with a single angular frequency");
        break;
      case FieldFamily::linear:
        require(params_.size() == 1 || params_.size() == static_cast<std::size_t>(dim_),
                ErrorKind::invalid_argument, "linear field needs 1 or dim coefficients");
        break;
      case FieldFamily::inverse_power: {
        require(params_.size() == 1 || params_.size() == 2, ErrorKind::invalid_argument,
                "inverse_power field takes {c[, p]}");
        const double p = params_.size() == 2 ? params_[1] : 1.0;
        require(p >= 1.0 && p == std::floor(p), ErrorKind::invalid_argument,
                "inverse_power exponent must be a positive integer");
        break;
      }
      case FieldFamily::tabulated:
        break;
    }
  }

  void set_exclusion_radius(double r) {
    require(r >= 0.0 && std::isfinite(r), ErrorKind::invalid_argument,
            "exclusion radius must be non-negative");
    exclusion_radius_ = r;
  }

  void check_regular(const Point& x) const {
    if (singular(x)) fail(ErrorKind::singular_point, "velocity field evaluated in its singular region");
  }

  double linear_coeff(int i) const { return params_.size() == 1 ? params_[0] : params_[i]; }
  double power() const { return params_.size() == 2 ? params_[1] : 1.0; }

  FieldFamily family_ = FieldFamily::constant;
  int dim_ = 1;
  int direction_ = 0;
  std::vector<double> params_{0.0};
  double exclusion_radius_ = 0.0;
  double scale_ = 1.0;
  std::shared_ptr<Table> table_;
};

/// m v(x)^T x, the phase of the full local Galilei transformation.
inline double eval_boost_phase(const VelocityField& vf, double mass, const Point& x) {
  const Point v = vf.eval(x);
  double s = 0.0;
  for (int i = 0; i < vf.dim(); ++i) s += v[i] * x[i];
  return mass * s;
}

/// m v(x)_j x_j, the phase of the transformation along axis j only.
inline double eval_directional_phase(const VelocityField& vf, double mass, const Point& x, int j) {
  return mass * vf.eval(x)[j] * x[j];
}

/// d_i (v(x)_j x_j) = x_j d_i v(x)_j + delta_ij v(x)_j
inline double eval_gradient_term(const VelocityField& vf, int i, int j, const Point& x) {
  const Point v = vf.eval(x);
  const Jacobian J = vf.jacobian(x);
  return x[j] * J[i][j] + (i == j ? v[j] : 0.0);
}

/// d_i (v(x)^T x) summed over components.
inline double eval_full_gradient(const VelocityField& vf, int i, const Point& x) {
  double s = 0.0;
  for (int j = 0; j < vf.dim(); ++j) s += eval_gradient_term(vf, i, j, x);
  return s;
}

}  // namespace locsf
