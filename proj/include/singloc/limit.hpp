#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "singloc/config.hpp"
#include "singloc/model.hpp"
#include "singloc/rng.hpp"

namespace singloc {

/// Numerical windows for the limit experiment. The driving Poisson process
/// is truncated to [-U, U] and the u-functional to [-V, V]; both tails decay
/// fast enough (power-law U^{p-1} and exp{-c V^{p+1}} respectively) that the
/// defaults put truncation error well below Monte Carlo error, and doubling
/// stability is part of the acceptance checks.
struct LimitConfig {
  double z_window = 64.0;        // U: event window for the driving process
  double u_window = 16.0;        // V: integration / argmax range
  double u_step = 16.0 / 800.0;  // base grid spacing on [-V, V]
  double quad_tol = 1e-9;
};

/// Throws bad_config unless U >= 4V, u_step <= V/200 and all entries are
/// positive.
void validate(const LimitConfig& cfg);

LimitConfig limit_config_from_key_value(const KeyValue& kv, const std::string& prefix = "");
KeyValue limit_config_to_key_value(const LimitConfig& cfg, const std::string& prefix = "");

/// One realization of the driving Poisson process restricted to [-U, U]:
/// sorted event positions, none exactly at the origin.
struct LimitPath {
  std::vector<double> y_events;
};

/// u grid with ln Z values for one realization; log_z at u = 0 is exactly 0.
struct ZGrid {
  std::vector<double> us;
  std::vector<double> log_z;
};

/// Monte Carlo draws of the limit functionals: zeta for every admissible p,
/// xi only for p > 0 (the process attains its maximum; for p < 0 it is
/// unbounded at every event).
struct LimitDraws {
  std::vector<double> zetas;
  std::vector<double> xis;  // empty iff p < 0
  PowerSingularity sing;
  LimitConfig config;
  std::uint64_t seed = 0;
  std::size_t xi_tie_count = 0;  // near-equal argmax brackets, smallest-u kept
};

/// Event count is Poisson((a+b) U^{p+1} / (p+1)); each event falls left with
/// probability a/(a+b), and |z| = U W^{1/(p+1)} inverts the normalized CDF.
LimitPath sample_limit_path(const PowerSingularity& sing, double U, Rng& rng);

/// D_U(u) = int_{-U}^{U} d(z) (|z-u|^p - |z|^p) dz in closed form. This is
/// the deterministic drift of the windowed process: it equals the window's
/// share of the quadratic-compensator integral plus the compensator of the
/// event-sum term, combined because neither piece converges separately as
/// the window grows. Requires |u| <= U/2.
double det_integral(double u, double U, const PowerSingularity& sing);

/// ln Z(u) for one windowed realization:
///   p sum_j ln|1 - u/z_j|
///   + ln(a/b) sign(u) #{events strictly between 0 and u}
///   - D_U(u) - (a-b)/(p+1) |u|^{p+1} sign(u).
/// Returns -infinity (p > 0) or +infinity (p < 0) when u hits an event
/// exactly. E Z(u) = 1 for every window, exactly as for the full process.
double log_Z(double u, const LimitPath& path, const PowerSingularity& sing, double U);

ZGrid evaluate_log_z(const LimitPath& path, const PowerSingularity& sing, double U,
                     std::span<const double> us);

/// M independent replicates of (zeta, xi). zeta integrates u Z(u) over
/// [-V, V] by trapezoid with log-sum-exp stabilization; for p < 0 the node
/// set is graded geometrically into each event so the integrable spikes of
/// Z carry their correct mass. xi (p > 0) is the grid argmax refined by
/// golden section inside its bracketing cell.
LimitDraws draw_zeta_xi(const PowerSingularity& sing, const LimitConfig& cfg, std::size_t M,
                        std::uint64_t seed, int threads = 1);

/// Limiting log-characteristic function L(lambda) of ln Z(u):
///   integral over z of [e^{i lambda q} - 1 - i lambda (e^q - 1)] d(z)|z|^p,
/// with q(z) = p ln|1-u/z| + sign(u) 1_{(0,u)}(z) ln(a/b). Evaluated by
/// singularity-split quadrature on [-Zc, Zc], Zc = max(1e3, 1e3 |u|), plus
/// exact inverted-coordinate quadrature of both tails (integrand decays like
/// |z|^{p-2} there, so the substitution z -> Zc/t leaves a t^{-p} endpoint).
std::complex<double> limit_cf(double lambda, double u, const PowerSingularity& sing,
                              double quad_tol = 1e-9);

/// CSV persistence: a `# a=... b=... p=... U=... V=... u_step=... seed=...`
/// comment line, then `replicate,zeta,xi` rows (xi blank when p < 0).
void save_draws_csv(const LimitDraws& draws, const std::filesystem::path& file);

}  // namespace singloc
