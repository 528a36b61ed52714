#include "rigidfield/energy_model.hpp"

#include "rigidfield/errors.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace rigidfield {

ScalarFn make_potential(const std::string& name) {
  if (name == "at2") return [](double s) { return (1.0 - s) * (1.0 - s); };
  if (name == "at1") return [](double s) { return 1.0 - s; };
  if (name == "double_well") return [](double s) { return (1.0 - s * s) * (1.0 - s * s); };
  throw InvalidInput("unknown potential '" + name + "'");
}

ScalarFn make_degradation(const std::string& name) {
  if (name == "quadratic") return [](double v) { return v * v; };
  if (name == "linear") return [](double v) { return v; };
  throw InvalidInput("unknown degradation '" + name + "'");
}

std::optional<FinslerFn> make_finsler(const std::string& name, const std::vector<double>& params) {
  if (name == "none") return std::nullopt;
  if (name == "euclid") return FinslerFn([](const Point&, const Point& z) { return z.norm(); });
  if (name == "l1")
    return FinslerFn([](const Point&, const Point& z) { return std::abs(z.x()) + std::abs(z.y()); });
  if (name == "ellipse") {
    if (params.size() != 2 || !(params[0] > 0.0) || !(params[1] > 0.0))
      throw InvalidInput("finsler 'ellipse' needs two positive weights");
    const double a = params[0], b = params[1];
    return FinslerFn([a, b](const Point&, const Point& z) {
      return std::sqrt(a * a * z.x() * z.x() + b * b * z.y() * z.y());
    });
  }
  throw InvalidInput("unknown finsler norm '" + name + "'");
}

EnergyModel EnergyModel::from_descriptor(const WellSpec& well, const ModelDescriptor& d) {
  well.validate();
  EnergyModel m;
  m.well = well;
  m.descriptor = d;
  m.degradation = make_degradation(d.degradation);
  m.potential = make_potential(d.potential);
  m.finsler = make_finsler(d.finsler, d.finsler_params);
  m.quadratic_in_v = d.degradation == "quadratic" && d.potential == "at2";
  const WellSpec w = well;
  m.bulk = [w](const Point&, const MatN& a) { return w.alpha * dist2_to_well(a, w); };
  m.default_bulk = true;
  return m;
}

double well_density(const WellSpec& well, const double* f, int n) {
  if (n == 1) {
    switch (well.kind) {
      case WellKind::RotationGroup:
        return well.alpha * (f[0] - 1.0) * (f[0] - 1.0);
      case WellKind::SkewLinearised:
        return well.alpha * f[0] * f[0];
      case WellKind::FiniteSet: {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& m : well.members) best = std::min(best, (f[0] - m(0, 0)) * (f[0] - m(0, 0)));
        return well.alpha * best;
      }
    }
  }
  if (n == 2) {
    switch (well.kind) {
      case WellKind::RotationGroup:
        return well.alpha * detail::dist2_so2(f[0], f[1], f[2], f[3]);
      case WellKind::SkewLinearised: {
        const double s = 0.5 * (f[1] + f[2]);
        return well.alpha * (f[0] * f[0] + f[3] * f[3] + 2.0 * s * s);
      }
      case WellKind::FiniteSet: {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& m : well.members) {
          const double a = f[0] - m(0, 0), b = f[1] - m(0, 1), c = f[2] - m(1, 0), d = f[3] - m(1, 1);
          best = std::min(best, a * a + b * b + c * c + d * d);
        }
        return well.alpha * best;
      }
    }
  }
  MatN a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = f[r * n + c];
  return well.alpha * dist2_to_well(a, well);
}

EnergyModel EnergyModel::at2(const WellSpec& well) { return from_descriptor(well, ModelDescriptor{}); }

void Schedule::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput("schedule: eps must be > 0");
  if (!(kappa > 0.0)) throw InvalidInput("schedule: kappa must be > 0");
  if (!(rho > 1.0)) throw InvalidInput("schedule: rho must be > 1");
}

double Schedule::k_eps() const { return std::pow(eps, -kappa); }
double Schedule::xi_eps() const { return std::pow(eps, rho); }

std::pair<double, double> schedule_params(const Schedule& s) {
  s.validate();
  return {s.k_eps(), s.xi_eps()};
}

double surface_constant(const ScalarFn& potential) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  const auto integrand = [&](double s) { return std::sqrt(std::max(0.0, potential(s))); };
  const double value = integrator.integrate(integrand, 0.0, 1.0, 1e-12, &error, &l1);
  if (!std::isfinite(value) || error > 1e-8)
    throw NumericalFailure("surface_constant: quadrature did not reach 1e-8");
  return 2.0 * value;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

ValidationReport validate_model(const EnergyModel& m, int samples) {
  if (samples < 100) throw InvalidInput("validate_model: need at least 100 samples");
  ValidationReport r;
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    r.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  const auto& phi = m.degradation;
  const auto& pot = m.potential;

  add("Phi(0) = 0", phi(0.0) == 0.0);
  add("Phi(1) = 1", phi(1.0) == 1.0);
  bool monotone = true, positive = true, in_range = true;
  double prev = phi(0.0);
  for (int i = 1; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    const double p = phi(t);
    monotone = monotone && p >= prev;
    positive = positive && p > 0.0;
    in_range = in_range && p >= 0.0 && p <= 1.0;
    prev = p;
  }
  add("Phi nondecreasing", monotone);
  add("Phi(t) > 0 for t > 0", positive);
  add("Phi maps into [0,1]", in_range);

  add("V(1) = 0", pot(1.0) == 0.0);
  bool v_positive = true;
  std::string v_detail;
  for (int i = 0; i < samples; ++i) {
    const double s = static_cast<double>(i) / samples;
    const double val = pot(s);
    if (!(val > 0.0) || !std::isfinite(val)) {
      if (v_positive) {
        std::ostringstream os;
        os << "V(" << s << ") = " << val;
        v_detail = os.str();
      }
      v_positive = false;
    }
  }
  add("V(s) > 0 for s != 1", v_positive, v_detail);

  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  const int n = m.well.n;
  bool coercive = true;
  for (int i = 0; i < samples; ++i) {
    MatN a(n, n);
    for (int r0 = 0; r0 < n; ++r0)
      for (int c0 = 0; c0 < n; ++c0) a(r0, c0) = entry(rng);
    const Point x(entry(rng), entry(rng));
    const double w = m.bulk(x, a);
    coercive = coercive && w >= m.alpha() * dist2_to_well(a, m.well) * (1.0 - 1e-12) - 1e-14;
  }
  add("W >= alpha dist^2(., well)", coercive);

  if (m.finsler) {
    const auto& f = *m.finsler;
    bool homogeneous = true;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < samples; ++i) {
      const Point x(entry(rng), entry(rng));
      Point z(entry(rng), entry(rng));
      if (z.norm() < 1e-3) continue;
      const double t = entry(rng);
      const double fz = f(x, z);
      homogeneous = homogeneous && std::abs(f(x, t * z) - std::abs(t) * fz) <= 1e-10 * (1.0 + std::abs(t) * fz);
      lo = std::min(lo, fz / z.norm());
      hi = std::max(hi, fz / z.norm());
    }
    add("phi(x, t z) = |t| phi(x, z)", homogeneous);
    std::ostringstream os;
    os << "m = " << lo << ", M = " << hi;
    add("m|z| <= phi(x, z) <= M|z| with m > 0", lo > 0.0 && std::isfinite(hi), os.str());
  }
  return r;
}

}  // namespace rigidfield
