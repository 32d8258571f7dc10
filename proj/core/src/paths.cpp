#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <random>
#include <string>

#include "driftscope/diffusion.hpp"
#include "driftscope/error.hpp"
#include "driftscope/parallel.hpp"
#include "format.hpp"

namespace driftscope {

namespace {

Vec2 clamp_to(const Grid& g, Vec2 p) {
  return {std::clamp(p.x, g.x0(), g.x_max()), std::clamp(p.y, g.y0(), g.y_max())};
}

// Sample mean and standard error. The variance is accumulated on samples shifted by the
// first one, so a constant sample has exactly zero spread.
McEstimate summarize(std::span<const double> samples, std::uint64_t seed) {
  McEstimate out;
  out.n_paths = samples.size();
  out.seed = seed;
  if (samples.empty()) return out;
  const double n = static_cast<double>(samples.size());
  out.estimate = pairwise_sum(samples) / n;
  if (samples.size() > 1) {
    const double shift = samples[0];
    std::vector<double> d(samples.size()), d2(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      d[i] = samples[i] - shift;
      d2[i] = d[i] * d[i];
    }
    const double s1 = pairwise_sum(d);
    const double s2 = pairwise_sum(d2);
    const double var = std::max(0.0, (s2 - s1 * s1 / n) / (n - 1.0));
    out.std_error = std::sqrt(var / n);
  }
  return out;
}

double checked_weight(double integral) {
  if (-integral > 700.0)
    throw SimulationError("exp(-int V) overflows; use a smaller t or a potential bounded below");
  return std::exp(-integral);
}

class BridgeStepper {
 public:
  BridgeStepper(Vec2 x, Vec2 y, double t, std::size_t n_steps) : y_(y), t_(t), n_(n_steps), h_(t / n_steps), w_(x) {}

  // Advances one step and returns the new state; the final step lands exactly on y.
  Vec2 step(SplitMix64& rng, std::normal_distribution<double>& normal) {
    ++k_;
    if (k_ == n_) {
      w_ = y_;
      return w_;
    }
    const double remaining = t_ - static_cast<double>(k_ - 1) * h_;
    const double frac = h_ / remaining;
    const double sd = std::sqrt(h_ * (remaining - h_) / remaining);
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    w_ = w_ + frac * (y_ - w_) + Vec2{sd * z1, sd * z2};
    return w_;
  }

  double h() const { return h_; }

 private:
  Vec2 y_;
  double t_;
  std::size_t n_;
  double h_;
  Vec2 w_;
  std::size_t k_ = 0;
};

void check_bridge_args(double t, const McConfig& cfg) {
  cfg.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("bridge time must be positive");
}

}  // namespace

DriftFn drift_of(const VectorField& c) {
  auto cx = std::make_shared<ScalarField>(c.component(0));
  auto cy = std::make_shared<ScalarField>(c.component(1));
  return [cx, cy](Vec2 p) {
    const Vec2 q = clamp_to(cx->grid(), p);
    return Vec2{interp(*cx, q), interp(*cy, q)};
  };
}

DiffusionFn diffusion_of(const DiffusionField& a) {
  if (a.is_constant()) {
    const SymMat2 m = a[0];
    return [m](Vec2) { return m; };
  }
  std::vector<double> v11, v12, v22;
  for (const SymMat2& m : a.values()) {
    v11.push_back(m.a11);
    v12.push_back(m.a12);
    v22.push_back(m.a22);
  }
  auto f11 = std::make_shared<ScalarField>(a.grid(), std::move(v11));
  auto f12 = std::make_shared<ScalarField>(a.grid(), std::move(v12));
  auto f22 = std::make_shared<ScalarField>(a.grid(), std::move(v22));
  return [f11, f12, f22](Vec2 p) {
    const Vec2 q = clamp_to(f11->grid(), p);
    return SymMat2{interp(*f11, q), interp(*f12, q), interp(*f22, q)};
  };
}

ScalarFn potential_of(const ScalarField& v) {
  auto f = std::make_shared<ScalarField>(v);
  return [f](Vec2 p) { return f->grid().contains(p) ? interp(*f, p) : 0.0; };
}

ScalarFn scalar_of(const ScalarField& s) {
  auto f = std::make_shared<ScalarField>(s);
  return [f](Vec2 p) { return interp(*f, p); };
}

void McConfig::validate() const {
  if (n_paths == 0) throw ConfigError("n_paths must be positive");
  if (n_steps == 0) throw ConfigError("n_steps must be positive");
}

Path euler_maruyama_path(const DriftFn& c, const DiffusionFn& a, Vec2 x0, double t, std::size_t n_steps,
                         SplitMix64& rng) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("path time must be positive");
  if (n_steps == 0) throw ConfigError("n_steps must be positive");
  const double h = t / static_cast<double>(n_steps);
  const double sh = std::sqrt(h);
  std::normal_distribution<double> normal;
  Path path;
  path.times.reserve(n_steps + 1);
  path.states.reserve(n_steps + 1);
  path.times.push_back(0.0);
  path.states.push_back(x0);
  Vec2 x = x0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    x = x + h * c(x) + sh * a(x).sqrt().apply({z1, z2});
    if (!std::isfinite(x.x) || !std::isfinite(x.y)) throw SimulationError("Euler-Maruyama state became non-finite at step " + std::to_string(k + 1));
    path.times.push_back(k + 1 == n_steps ? t : static_cast<double>(k + 1) * h);
    path.states.push_back(x);
  }
  return path;
}

std::vector<Path> euler_maruyama(const DriftFn& c, const DiffusionFn& a, Vec2 x0, double t, const McConfig& cfg) {
  cfg.validate();
  std::vector<Path> paths(cfg.n_paths);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    SplitMix64 rng = substream(cfg.seed, p);
    paths[p] = euler_maruyama_path(c, a, x0, t, cfg.n_steps, rng);
  });
  return paths;
}

Path brownian_bridge(Vec2 x, Vec2 y, double t, std::size_t n_steps, SplitMix64& rng) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("bridge time must be positive");
  if (n_steps == 0) throw ConfigError("n_steps must be positive");
  BridgeStepper stepper(x, y, t, n_steps);
  std::normal_distribution<double> normal;
  Path path;
  path.times.push_back(0.0);
  path.states.push_back(x);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    path.times.push_back(k == n_steps ? t : static_cast<double>(k) * stepper.h());
    path.states.push_back(stepper.step(rng, normal));
  }
  return path;
}

Path brownian_bridge(Vec2 x, Vec2 y, double t, std::size_t n_steps, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return brownian_bridge(x, y, t, n_steps, rng);
}

namespace {

double grad_norm(const ScalarFn& f, Vec2 p) {
  const double e = 1e-5 * (1.0 + norm(p));
  const Vec2 g{(f(p + Vec2{e, 0}) - f(p - Vec2{e, 0})) / (2 * e), (f(p + Vec2{0, e}) - f(p - Vec2{0, e})) / (2 * e)};
  return norm(g);
}

// When psi is given, also tracks max |grad psi| over every visited bridge node.
McEstimate bridge_estimate(const ScalarFn& v, Vec2 x, Vec2 y, double t, const McConfig& cfg, const ScalarFn* psi) {
  check_bridge_args(t, cfg);
  std::vector<double> weights(cfg.n_paths);
  std::vector<double> grad_max(psi ? cfg.n_paths : 0, 0.0);
  const double v_start = v(x);
  const double v_end = v(y);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    SplitMix64 rng = substream(cfg.seed, p);
    std::normal_distribution<double> normal;
    BridgeStepper stepper(x, y, t, cfg.n_steps);
    double inner = 0.0;
    for (std::size_t k = 1; k < cfg.n_steps; ++k) {
      const Vec2 w = stepper.step(rng, normal);
      inner += v(w);
      if (psi) grad_max[p] = std::max(grad_max[p], grad_norm(*psi, w));
    }
    weights[p] = checked_weight(stepper.h() * (0.5 * v_start + inner + 0.5 * v_end));
  });
  McEstimate e = summarize(weights, cfg.seed);
  if (psi) {
    e.max_grad_psi = std::max(grad_norm(*psi, x), grad_norm(*psi, y));
    for (double g : grad_max) e.max_grad_psi = std::max(e.max_grad_psi, g);
  }
  return e;
}

}  // namespace

McEstimate bridge_functional(const ScalarFn& v, Vec2 x, Vec2 y, double t, const McConfig& cfg) {
  return bridge_estimate(v, x, y, t, cfg, nullptr);
}

McEstimate density_via_representation(const KernelSpec& pb, const ScalarFn& psi, const ScalarFn& v, Vec2 x,
                                      Vec2 y, double t, const McConfig& cfg) {
  const double base = pb.value(x, t, y);
  const double tilt = std::exp(psi(y) - psi(x));
  McEstimate e = bridge_estimate(v, x, y, t, cfg, &psi);
  e.estimate = base * tilt * e.estimate;
  e.std_error = base * tilt * e.std_error;
  return e;
}

McEstimate density_via_representation(const KernelSpec& pb, const ScalarField& psi, const ScalarField& v, Vec2 x,
                                      Vec2 y, double t, const McConfig& cfg) {
  return density_via_representation(pb, scalar_of(psi), potential_of(v), x, y, t, cfg);
}

McEstimate feynman_kac_exit(const ScalarFn& v, const ScalarFn& f, const Shape& domain, Vec2 x, const McConfig& cfg,
                            double h) {
  cfg.validate();
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("step size h must be positive");
  if (!domain.contains(x)) throw DomainError("Feynman-Kac start point is not inside the domain");

  std::function<bool(Vec2)> inside;
  if (const Disc* d = domain.disc()) {
    const Vec2 c = d->center;
    const double r2 = d->radius * d->radius;
    inside = [c, r2](Vec2 p) { return norm2(p - c) < r2; };
  } else {
    const Rectangle r = *domain.rectangle();
    inside = [r](Vec2 p) { return p.x > r.lower.x && p.x < r.upper.x && p.y > r.lower.y && p.y < r.upper.y; };
  }

  const double sh = std::sqrt(h);
  std::vector<double> values(cfg.n_paths);
  std::vector<char> capped(cfg.n_paths, 0);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    SplitMix64 rng = substream(cfg.seed, p);
    std::normal_distribution<double> normal;
    Vec2 w = x;
    double vw = v(w);
    double integral = 0.0;
    for (std::size_t k = 0; k < cfg.n_steps; ++k) {
      const double z1 = normal(rng);
      const double z2 = normal(rng);
      const Vec2 next = w + Vec2{sh * z1, sh * z2};
      if (inside(next)) {
        const double vn = v(next);
        integral += 0.5 * h * (vw + vn);
        w = next;
        vw = vn;
        continue;
      }
      double lambda = 1.0;
      if (auto hit = domain.intersect_line(w, next - w)) lambda = std::clamp(hit->exit, 0.0, 1.0);
      const Vec2 z = w + lambda * (next - w);
      integral += 0.5 * lambda * h * (vw + v(z));
      values[p] = checked_weight(integral) * f(z);
      return;
    }
    capped[p] = 1;
  });

  std::vector<double> kept;
  kept.reserve(cfg.n_paths);
  std::size_t n_capped = 0;
  for (std::size_t p = 0; p < cfg.n_paths; ++p) {
    if (capped[p])
      ++n_capped;
    else
      kept.push_back(values[p]);
  }
  if (static_cast<double>(n_capped) > 0.01 * static_cast<double>(cfg.n_paths))
    throw SimulationError(std::to_string(n_capped) + " of " + std::to_string(cfg.n_paths) +
                          " paths did not exit within " + std::to_string(cfg.n_steps) + " steps");
  McEstimate e = summarize(kept, cfg.seed);
  e.capped = n_capped;
  return e;
}

McEstimate feynman_kac_exit(const ScalarField& v, const ScalarFn& f, const DomainSpec& domain, Vec2 x,
                            const McConfig& cfg, double h) {
  return feynman_kac_exit(potential_of(v), f, domain.shape(), x, cfg, h);
}

void write_mc_csv(std::ostream& out, const std::vector<McRow>& rows) {
  using detail::format_double;
  out << "x1,x2,y1,y2,t,estimate,stderr,n_paths,seed\n";
  for (const McRow& r : rows) {
    out << format_double(r.x.x) << ',' << format_double(r.x.y) << ',' << format_double(r.y.x) << ','
        << format_double(r.y.y) << ',' << format_double(r.t) << ',' << format_double(r.result.estimate) << ','
        << format_double(r.result.std_error) << ',' << r.result.n_paths << ',' << r.result.seed << '\n';
  }
}

}  // namespace driftscope
