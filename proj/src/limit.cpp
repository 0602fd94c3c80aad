#include "singloc/limit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include "singloc/errors.hpp"
#include "singloc/parallel.hpp"
#include "singloc/quadrature.hpp"

namespace singloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// int_0^x |y|^p dy = sign(x) |x|^{p+1} / (p+1)
double power_primitive(double x, double p) {
  if (x == 0.0) return 0.0;
  const double v = std::pow(std::fabs(x), p + 1.0) / (p + 1.0);
  return x > 0.0 ? v : -v;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct ZetaXi {
  double zeta = 0.0;
  double xi = 0.0;
  bool xi_tie = false;
};

// Trapezoid of u Z(u) and Z(u) over the supplied strictly-increasing nodes,
// in the max-shifted domain; argmax refinement for p > 0.
ZetaXi zeta_xi_from_path(const LimitPath& path, const PowerSingularity& sing,
                         const LimitConfig& cfg) {
  const double V = cfg.u_window;
  const double step = cfg.u_step;
  const std::size_t half = static_cast<std::size_t>(std::llround(V / step));
  std::vector<double> us;
  us.reserve(2 * half + 1);
  for (std::size_t i = 0; i <= 2 * half; ++i) {
    us.push_back((static_cast<double>(i) - static_cast<double>(half)) * step);
  }
  if (sing.p < 0.0) {
    // Graded nodes into each event so the integrable Z spikes are resolved.
    for (double z : path.y_events) {
      if (std::fabs(z) >= V) continue;
      double off = 0.5 * step;
      for (int level = 0; level < 26; ++level, off *= 0.5) {
        if (z + off < V) us.push_back(z + off);
        if (z - off > -V) us.push_back(z - off);
      }
    }
    std::sort(us.begin(), us.end());
    us.erase(std::unique(us.begin(), us.end()), us.end());
  }
  // Exact event collisions make ln Z infinite; drop those nodes.
  us.erase(std::remove_if(us.begin(), us.end(),
                          [&](double u) {
                            return std::binary_search(path.y_events.begin(), path.y_events.end(),
                                                      u);
                          }),
           us.end());

  std::vector<double> lz(us.size());
  for (std::size_t i = 0; i < us.size(); ++i) lz[i] = log_Z(us[i], path, sing, cfg.z_window);

  double shift = -kInf;
  for (double v : lz) {
    if (std::isfinite(v) && v > shift) shift = v;
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < us.size(); ++i) {
    if (!std::isfinite(lz[i])) continue;
    const double w = 0.5 * ((i + 1 < us.size() ? us[i + 1] : us[i]) -
                            (i > 0 ? us[i - 1] : us[i]));
    const double q = std::exp(lz[i] - shift);
    num += w * us[i] * q;
    den += w * q;
  }

  ZetaXi out;
  out.zeta = num / den;
  if (sing.p > 0.0) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < us.size(); ++i) {
      if (lz[i] > lz[best]) best = i;
    }
    for (std::size_t i = best + 1; i < us.size(); ++i) {
      if (lz[i] == lz[best] && i != best) {
        out.xi_tie = true;  // keep the smallest u
        break;
      }
    }
    const double lo = best == 0 ? us.front() : us[best - 1];
    const double hi = best + 1 == us.size() ? us.back() : us[best + 1];
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    auto g = [&](double u) { return log_Z(u, path, sing, cfg.z_window); };
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 90; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = g(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = g(x1);
      }
    }
    out.xi = f1 > f2 ? x1 : x2;
  }
  return out;
}

}  // namespace

void validate(const LimitConfig& cfg) {
  if (!(cfg.z_window > 0.0 && cfg.u_window > 0.0 && cfg.u_step > 0.0 && cfg.quad_tol > 0.0)) {
    raise(errc::bad_config, "limit windows and tolerances must be positive");
  }
  if (cfg.z_window < 4.0 * cfg.u_window) {
    raise(errc::bad_config, "event window U must be at least 4x the u window V");
  }
  if (cfg.u_step > cfg.u_window / 200.0) {
    raise(errc::bad_config, "u_step must be at most V/200");
  }
  if (cfg.quad_tol > 1e-2) {
    raise(errc::bad_config, "quad_tol must be at most 1e-2");
  }
}

LimitConfig limit_config_from_key_value(const KeyValue& kv, const std::string& prefix) {
  LimitConfig cfg;
  cfg.z_window = get_double_or(kv, prefix + "z_window", cfg.z_window);
  cfg.u_window = get_double_or(kv, prefix + "u_window", cfg.u_window);
  cfg.u_step = get_double_or(kv, prefix + "u_step", cfg.u_window / 800.0);
  cfg.quad_tol = get_double_or(kv, prefix + "quad_tol", cfg.quad_tol);
  validate(cfg);
  return cfg;
}

KeyValue limit_config_to_key_value(const LimitConfig& cfg, const std::string& prefix) {
  KeyValue kv;
  kv[prefix + "z_window"] = format_double(cfg.z_window);
  kv[prefix + "u_window"] = format_double(cfg.u_window);
  kv[prefix + "u_step"] = format_double(cfg.u_step);
  kv[prefix + "quad_tol"] = format_double(cfg.quad_tol);
  return kv;
}

LimitPath sample_limit_path(const PowerSingularity& sing, double U, Rng& rng) {
  const double mean = (sing.a + sing.b) * std::pow(U, sing.p + 1.0) / (sing.p + 1.0);
  const std::int64_t count = rng.poisson(mean);
  const double left_prob = sing.a / (sing.a + sing.b);
  LimitPath path;
  path.y_events.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const bool left = rng.uniform01() < left_prob;
    double mag = 0.0;
    while (mag == 0.0) {
      mag = U * std::pow(rng.uniform01(), 1.0 / (sing.p + 1.0));
    }
    path.y_events.push_back(left ? -mag : mag);
  }
  std::sort(path.y_events.begin(), path.y_events.end());
  return path;
}

double det_integral(double u, double U, const PowerSingularity& sing) {
  if (std::fabs(u) > 0.5 * U) {
    raise(errc::bad_config, "det_integral requires |u| <= U/2");
  }
  const double p = sing.p;
  const double a = sing.a, b = sing.b;
  return a * (power_primitive(-u, p) - power_primitive(-U - u, p)) +
         b * (power_primitive(U - u, p) - power_primitive(-u, p)) -
         (a + b) * power_primitive(U, p);
}

double log_Z(double u, const LimitPath& path, const PowerSingularity& sing, double U) {
  if (u == 0.0) return 0.0;
  const double p = sing.p;
  double event_sum = 0.0;
  std::size_t between = 0;
  for (double z : path.y_events) {
    if (z == u) return p > 0.0 ? -kInf : kInf;
    event_sum += std::log(std::fabs(1.0 - u / z));
    if (u > 0.0 ? (z > 0.0 && z < u) : (z < 0.0 && z > u)) ++between;
  }
  const double counting_term =
      std::log(sing.a / sing.b) * sign(u) * static_cast<double>(between);
  const double drift = det_integral(u, U, sing);
  const double skew =
      (sing.a - sing.b) / (p + 1.0) * std::pow(std::fabs(u), p + 1.0) * sign(u);
  return p * event_sum + counting_term - drift - skew;
}

ZGrid evaluate_log_z(const LimitPath& path, const PowerSingularity& sing, double U,
                     std::span<const double> us) {
  ZGrid grid;
  grid.us.assign(us.begin(), us.end());
  grid.log_z.resize(us.size());
  for (std::size_t i = 0; i < us.size(); ++i) {
    grid.log_z[i] = log_Z(us[i], path, sing, U);
  }
  return grid;
}

LimitDraws draw_zeta_xi(const PowerSingularity& sing, const LimitConfig& cfg, std::size_t M,
                        std::uint64_t seed, int threads) {
  validate(cfg);
  LimitDraws draws;
  draws.sing = sing;
  draws.config = cfg;
  draws.seed = seed;
  draws.zetas.resize(M);
  const bool with_xi = sing.p > 0.0;
  if (with_xi) draws.xis.resize(M);
  std::vector<unsigned char> ties(M, 0);
  parallel_for(M, threads, [&](std::size_t m) {
    Rng rng(seed, m);
    const LimitPath path = sample_limit_path(sing, cfg.z_window, rng);
    const ZetaXi zx = zeta_xi_from_path(path, sing, cfg);
    draws.zetas[m] = zx.zeta;
    if (with_xi) {
      draws.xis[m] = zx.xi;
      ties[m] = zx.xi_tie ? 1 : 0;
    }
  });
  for (unsigned char t : ties) draws.xi_tie_count += t;
  return draws;
}

std::complex<double> limit_cf(double lambda, double u, const PowerSingularity& sing,
                              double quad_tol) {
  if (lambda == 0.0 || u == 0.0) return {0.0, 0.0};
  const double p = sing.p;
  const double log_ratio = std::log(sing.a / sing.b);
  const std::complex<double> ilambda(0.0, lambda);
  const double cut = std::max(1e3, 1e3 * std::fabs(u));

  const auto kernel = [&](double q_val) -> std::complex<double> {
    // q > 690 only happens within e^{-690/|p|} of z = u (p < 0); the mass
    // there is far below any tolerance and exp would overflow.
    if (q_val > 690.0) return {0.0, 0.0};
    return quad::expm1m(ilambda * q_val) - ilambda * quad::expm1m(q_val);
  };

  quad::Options opt;
  opt.rel_tol = quad_tol;

  // Core: pieces between {-cut, min(0,u), max(0,u), cut}; q is singular at
  // z = 0 and z = u only, both piece endpoints.
  std::vector<double> bounds{-cut};
  for (double s : {std::min(0.0, u), std::max(0.0, u)}) {
    if (s > bounds.back() && s < cut) bounds.push_back(s);
  }
  bounds.push_back(cut);

  std::complex<double> total;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double lo = bounds[i], hi = bounds[i + 1];
    const bool between = lo >= std::min(0.0, u) && hi <= std::max(0.0, u);
    const double indicator = between ? sign(u) * log_ratio : 0.0;
    total += quad::integrate_split_complex(
        [&](double z, double dlo, double dhi) -> std::complex<double> {
          if (dlo == 0.0 || dhi == 0.0) return {0.0, 0.0};
          const double z0 = (lo == 0.0) ? dlo : ((hi == 0.0) ? -dhi : z);
          const double zu = (lo == u) ? dlo : ((hi == u) ? -dhi : z - u);
          const double q_val = p * (std::log(std::fabs(zu)) - std::log(std::fabs(z0))) + indicator;
          const double density = (z0 < 0.0 ? sing.a : sing.b) * std::pow(std::fabs(z0), p);
          return kernel(q_val) * density;
        },
        lo, hi, {}, opt);
  }

  // Tails via z = +-cut/t: integrand ~ t^{-p} at t -> 0. Written in ratio
  // form kernel(q)/q^2 * (q/t)^2 so nothing underflows against the t^{-2}
  // Jacobian; q/t tends to -p u/(dir cut) and kernel(q)/q^2 to the
  // quadratic coefficient -lambda^2/2 - i lambda/2.
  const std::complex<double> h0(-0.5 * lambda * lambda, -0.5 * lambda);
  for (int dir = -1; dir <= 1; dir += 2) {
    const double amp = dir < 0 ? sing.a : sing.b;
    total += quad::integrate_split_complex(
        [&](double /*t*/, double dlo, double /*dhi*/) -> std::complex<double> {
          if (dlo == 0.0) return {0.0, 0.0};
          const double t_acc = dlo;
          const double w = u * t_acc / (dir * cut);
          const double q_val = p * std::log1p(-w);
          const std::complex<double> h =
              std::fabs(q_val) < 1e-150 ? h0 : kernel(q_val) / (q_val * q_val);
          const double ratio = (std::fabs(w) < 1e-280) ? -p * u / (dir * cut) : q_val / t_acc;
          return h * (ratio * ratio) * std::pow(t_acc, -p) * std::pow(cut, p + 1.0) * amp;
        },
        0.0, 1.0, {}, opt);
  }
  return total;
}

void save_draws_csv(const LimitDraws& draws, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) raise(errc::io_error, "cannot write draws file " + file.string());
  out << "# a=" << format_double(draws.sing.a) << " b=" << format_double(draws.sing.b)
      << " p=" << format_double(draws.sing.p) << " U=" << format_double(draws.config.z_window)
      << " V=" << format_double(draws.config.u_window)
      << " u_step=" << format_double(draws.config.u_step) << " seed=" << draws.seed << "\n";
  out << "replicate,zeta,xi\n";
  for (std::size_t m = 0; m < draws.zetas.size(); ++m) {
    out << m << "," << format_double(draws.zetas[m]) << ",";
    if (!draws.xis.empty()) out << format_double(draws.xis[m]);
    out << "\n";
  }
  if (!out) raise(errc::io_error, "write failure on " + file.string());
}

}  // namespace singloc
