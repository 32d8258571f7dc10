#include <cmath>
#include <numbers>
#include <string>

#include "driftscope/diffusion.hpp"
#include "driftscope/error.hpp"

namespace driftscope {

namespace {

void check_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("kernel time must be positive, got " + std::to_string(t));
}

void check_theta(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("OU rate theta must be positive");
}

// Per-axis variance (1 - e^{-2 theta t}) / (2 theta).
double ou_variance(double t, double theta) { return -std::expm1(-2.0 * theta * t) / (2.0 * theta); }

template <class... Fs>
struct Overload : Fs... {
  using Fs::operator()...;
};

}  // namespace

double gaussian_kernel(Vec2 x, double t, Vec2 y) {
  check_time(t);
  return std::exp(-norm2(y - x) / (2.0 * t)) / (2.0 * std::numbers::pi * t);
}

double log_gaussian_kernel(Vec2 x, double t, Vec2 y) {
  check_time(t);
  return -norm2(y - x) / (2.0 * t) - std::log(2.0 * std::numbers::pi * t);
}

double ou_kernel(Vec2 x, double t, Vec2 y, double theta) { return std::exp(log_ou_kernel(x, t, y, theta)); }

double log_ou_kernel(Vec2 x, double t, Vec2 y, double theta) {
  check_time(t);
  check_theta(theta);
  const double s2 = ou_variance(t, theta);
  const Vec2 mean = std::exp(-theta * t) * x;
  return -norm2(y - mean) / (2.0 * s2) - std::log(2.0 * std::numbers::pi * s2);
}

double log_gaussian_kernel_1d(double x, double t, double y) {
  check_time(t);
  return -(y - x) * (y - x) / (2.0 * t) - 0.5 * std::log(2.0 * std::numbers::pi * t);
}

double log_ou_kernel_1d(double x, double t, double y, double theta) {
  check_time(t);
  check_theta(theta);
  const double s2 = ou_variance(t, theta);
  const double d = y - std::exp(-theta * t) * x;
  return -d * d / (2.0 * s2) - 0.5 * std::log(2.0 * std::numbers::pi * s2);
}

double log_density_1d(const Kernel1D& k, double x, double t, double y) {
  return std::visit(Overload{
                        [&](const Brownian1D&) { return log_gaussian_kernel_1d(x, t, y); },
                        [&](const Ou1D& o) { return log_ou_kernel_1d(x, t, y, o.theta); },
                        [&](const Custom1D& c) {
                          if (!c.log_density) throw ConfigError("custom 1-d kernel has no density");
                          return c.log_density(x, t, y);
                        },
                    },
                    k);
}

std::string describe(const Kernel1D& k) {
  return std::visit(Overload{
                        [](const Brownian1D&) { return std::string("brownian"); },
                        [](const Ou1D& o) { return "ou(theta=" + std::to_string(o.theta) + ")"; },
                        [](const Custom1D& c) { return c.label.empty() ? std::string("custom") : c.label; },
                    },
                    k);
}

double field_mass(const ScalarField& f) {
  const Grid& g = f.grid();
  double total = 0.0;
  for (std::size_t j = 0; j < g.ny(); ++j) {
    const double wy = (j == 0 || j + 1 == g.ny()) ? 0.5 : 1.0;
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const double wx = (i == 0 || i + 1 == g.nx()) ? 0.5 : 1.0;
      total += wx * wy * f.at(i, j);
    }
  }
  return total * g.cell_area();
}

KernelSpec::KernelSpec(Kind kind) : kind_(std::move(kind)) {
  if (const auto* ou = std::get_if<OuKernel>(&kind_)) check_theta(ou->theta);
  if (const auto* tab = std::get_if<TabulatedKernel>(&kind_)) {
    if (tab->sources.empty()) throw DataError("tabulated kernel has no sources");
    for (const auto& src : tab->sources) {
      if (src.times.size() != src.slices.size() || src.times.empty())
        throw DataError("tabulated kernel: times and slices must be nonempty and of equal length");
      for (std::size_t k = 0; k < src.slices.size(); ++k) {
        check_time(src.times[k]);
        for (double v : src.slices[k].values())
          if (v < 0.0) throw DataError("tabulated kernel slice has a negative value");
        const double mass = field_mass(src.slices[k]);
        if (mass > 1.0 + 1e-6)
          throw DataError("tabulated kernel slice at t=" + std::to_string(src.times[k]) + " has mass " +
                          std::to_string(mass) + " > 1");
      }
    }
  }
  if (const auto* prod = std::get_if<ProductKernel>(&kind_)) {
    for (const Kernel1D* k : {&prod->first, &prod->second}) {
      if (const auto* o = std::get_if<Ou1D>(k)) check_theta(o->theta);
      if (const auto* c = std::get_if<Custom1D>(k); c && !c->log_density)
        throw ConfigError("custom 1-d kernel has no density");
    }
  }
}

std::string KernelSpec::describe() const {
  return std::visit(Overload{
                        [](const BrownianKernel&) { return std::string("brownian"); },
                        [](const OuKernel& o) { return "ou(theta=" + std::to_string(o.theta) + ")"; },
                        [](const TabulatedKernel& t) {
                          return "tabulated(" + std::to_string(t.sources.size()) + " sources)";
                        },
                        [](const ProductKernel& p) {
                          return "product(" + driftscope::describe(p.first) + ", " + driftscope::describe(p.second) +
                                 ")";
                        },
                    },
                    kind_);
}

namespace {

double tabulated_value(const TabulatedKernel& tab, Vec2 x, double t, Vec2 y) {
  check_time(t);
  const TabulatedSource* best = nullptr;
  double best_dist = 0.0;
  for (const auto& src : tab.sources) {
    const double d = norm(src.source - x);
    if (!best || d < best_dist) {
      best = &src;
      best_dist = d;
    }
  }
  if (best_dist > tab.source_tolerance)
    throw DataError("tabulated kernel has no source at (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ")");
  for (std::size_t k = 0; k < best->times.size(); ++k) {
    if (std::abs(best->times[k] - t) <= 1e-9 * t) {
      try {
        return interp(best->slices[k], y);
      } catch (const OutOfBoundsError& e) {
        throw DataError(std::string("tabulated kernel evaluation failed: ") + e.what());
      }
    }
  }
  throw DataError("tabulated kernel has no slice at t=" + std::to_string(t));
}

}  // namespace

std::optional<Density> KernelSpec::density(Vec2 x, double t, Vec2 y) const {
  return std::visit(Overload{
                        [&](const BrownianKernel&) -> std::optional<Density> {
                          return Density::from_log(log_gaussian_kernel(x, t, y));
                        },
                        [&](const OuKernel& o) -> std::optional<Density> {
                          return Density::from_log(log_ou_kernel(x, t, y, o.theta));
                        },
                        [&](const TabulatedKernel& tab) -> std::optional<Density> {
                          const double v = tabulated_value(tab, x, t, y);
                          if (!(v > 0.0)) return std::nullopt;
                          return Density::from_linear(v);
                        },
                        [&](const ProductKernel& p) -> std::optional<Density> {
                          return Density::from_log(log_density_1d(p.first, x.x, t, y.x) +
                                                   log_density_1d(p.second, x.y, t, y.y));
                        },
                    },
                    kind_);
}

double KernelSpec::value(Vec2 x, double t, Vec2 y) const {
  return std::visit(Overload{
                        [&](const BrownianKernel&) { return gaussian_kernel(x, t, y); },
                        [&](const OuKernel& o) { return ou_kernel(x, t, y, o.theta); },
                        [&](const TabulatedKernel& tab) { return tabulated_value(tab, x, t, y); },
                        [&](const ProductKernel& p) {
                          return std::exp(log_density_1d(p.first, x.x, t, y.x) +
                                          log_density_1d(p.second, x.y, t, y.y));
                        },
                    },
                    kind_);
}

}  // namespace driftscope
