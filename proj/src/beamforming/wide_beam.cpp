#include "heirs/beamforming/wide_beam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "heirs/channel/arrays.hpp"
#include "heirs/numerics/manifolds.hpp"

namespace heirs {

namespace {

struct Range {
  double lo;
  double hi;
};

// Range of f over [a, b]; extrema of sin and cos sit on multiples of pi/2.
template <class F>
Range trig_range(F f, double a, double b) {
  Range r{std::min(f(a), f(b)), std::max(f(a), f(b))};
  const double quarter = kPi / 2.0;
  for (double x = std::ceil(a / quarter) * quarter; x < b; x += quarter) {
    r.lo = std::min(r.lo, f(x));
    r.hi = std::max(r.hi, f(x));
  }
  return r;
}

Range product_range(Range a, Range b) {
  const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

double sin_fn(double x) { return std::sin(x); }
double cos_fn(double x) { return std::cos(x); }

}  // namespace

WideBeamSpec WideBeamSpec::make(double arrival_azimuth, double arrival_elevation,
                                const AngularArea& area, Index n_y, Index n_z) {
  if (area.azimuth_min > area.azimuth_max || area.elevation_min > area.elevation_max)
    throw std::invalid_argument("WideBeamSpec: empty angular area");
  if (n_y < 1 || n_z < 1) throw DimensionError("WideBeamSpec: panel dimensions must be >= 1");
  WideBeamSpec s;
  s.arrival_azimuth = arrival_azimuth;
  s.arrival_elevation = arrival_elevation;
  s.area = area;
  s.n_y = n_y;
  s.n_z = n_z;
  const Range az = trig_range(sin_fn, area.azimuth_min, area.azimuth_max);
  const Range el_sin = trig_range(sin_fn, area.elevation_min, area.elevation_max);
  const Range el_cos = trig_range(cos_fn, area.elevation_min, area.elevation_max);
  const Range y = product_range(az, el_sin);
  const double ry = std::sin(arrival_azimuth) * std::sin(arrival_elevation);
  const double rz = std::cos(arrival_elevation);
  s.rho_y_min = y.lo - ry;
  s.rho_y_max = y.hi - ry;
  s.rho_z_min = el_cos.lo - rz;
  s.rho_z_max = el_cos.hi - rz;
  return s;
}

WideBeamSpec WideBeamSpec::from_config(const SystemConfig& cfg) {
  return make(cfg.surface_los_azimuth, cfg.surface_los_elevation, cfg.ue_area,
              std::max<Index>(cfg.n_ste_y(), 1), cfg.n_z);
}

CVector beam_vector(double rho, Index m) {
  return ula_response(rho, m) * std::sqrt(static_cast<double>(m));
}

double directivity_gain(const WideBeamSpec& spec, const CVector& omega, double departure_azimuth,
                        double departure_elevation) {
  if (omega.size() != spec.size()) throw DimensionError("directivity_gain: omega size mismatch");
  const double scale = std::sqrt(static_cast<double>(spec.size()));
  const CVector a_t = scale * upa_response(departure_azimuth, departure_elevation, spec.n_y, spec.n_z);
  const CVector a_r =
      scale * upa_response(spec.arrival_azimuth, spec.arrival_elevation, spec.n_y, spec.n_z);
  return std::norm(a_t.dot(omega.cwiseProduct(a_r)));
}

CMatrix xi_matrix(Index m, double rho_min, double rho_max) {
  if (m < 1) throw DimensionError("xi_matrix: size must be >= 1");
  if (rho_min > rho_max) throw std::invalid_argument("xi_matrix: rho_min > rho_max");
  CMatrix xi(m, m);
  const Complex j(0.0, 1.0);
  for (Index q = 0; q < m; ++q) {
    for (Index p = 0; p < m; ++p) {
      const double d = static_cast<double>(p - q);
      if (p == q) {
        xi(p, q) = rho_max - rho_min;
      } else {
        xi(p, q) = (std::exp(j * kPi * d * rho_max) - std::exp(j * kPi * d * rho_min)) / (j * kPi * d);
      }
    }
  }
  return xi;
}

CMatrix xi_matrix(Axis axis, const WideBeamSpec& spec) {
  return axis == Axis::kY ? xi_matrix(spec.n_y, spec.rho_y_min, spec.rho_y_max)
                          : xi_matrix(spec.n_z, spec.rho_z_min, spec.rho_z_max);
}

AxisBeam maximize_on_circle(const CMatrix& xi, const WbsOptions& options, std::uint64_t seed) {
  const Index m = xi.rows();
  if (xi.cols() != m) throw DimensionError("maximize_on_circle: xi must be square");
  if (options.restarts < 1) throw std::invalid_argument("maximize_on_circle: restarts must be >= 1");
  const CircleManifold manifold(m);
  RiemannianProblem<CircleManifold> problem;
  problem.cost = [&xi](const CirclePoint& x) {
    const CVector& w = x.phases();
    return -w.dot(xi * w).real();
  };
  problem.euclidean_gradient = [&xi](const CirclePoint& w) -> CVector {
    return -2.0 * (xi * w.phases());
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  AxisBeam best;
  best.value = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    RVector start(m);
    for (Index i = 0; i < m; ++i) start(i) = angle(rng);
    auto res = riemannian_cg(manifold, problem, CirclePoint::from_angles(start), options.cg);
    const double value = -res.cost;
    if (value > best.value) {
      best.value = value;
      best.omega = res.point.phases();
      best.trace.clear();
      for (double c : res.trace.cost) best.trace.push_back(-c);
    }
  }
  return best;
}

WbsResult wbs_mo(const WideBeamSpec& spec, const WbsOptions& options) {
  WbsResult out;
  out.y = maximize_on_circle(xi_matrix(Axis::kY, spec), options, options.seed);
  out.z = maximize_on_circle(xi_matrix(Axis::kZ, spec), options, options.seed + 1);
  out.omega = kron(out.y.omega, out.z.omega);
  return out;
}

}  // namespace heirs
