#include "granusol/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace granusol::analysis {

namespace {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y,
                   int begin, int end) {
  const int n = end - begin;
  double sx = 0.0, sy = 0.0;
  for (int i = begin; i < end; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  double xlo = x[begin], xhi = x[begin];
  for (int i = begin; i < end; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
    xlo = std::min(xlo, x[i]);
    xhi = std::max(xhi, x[i]);
  }
  // Relative spread test: a constant abscissa can still leave sxx at
  // rounding-noise level.
  if (sxx <= 0.0 || xhi - xlo <= 1e-12 * std::max(std::abs(xlo), std::abs(xhi)))
    throw SimError("analysis: degenerate abscissa in line fit");
  Line out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (int i = begin; i < end; ++i) {
      const double r = y[i] - (out.slope * x[i] + out.intercept);
      ss_res += r * r;
    }
    out.r_squared = 1.0 - ss_res / syy;
  }
  return out;
}

}  // namespace

double analytic_point_source(const Vec3& x, double t, double M, double D,
                             const Vec3& x0, const Vec3& u) {
  if (t <= 0.0) throw SimError("analysis: point source needs t > 0");
  if (D <= 0.0) throw SimError("analysis: point source needs D > 0");
  const double denom = 4.0 * M_PI * D * t;
  const Vec3 r = x - x0 - u * t;
  return M / (denom * std::sqrt(denom)) *
         std::exp(-r.squaredNorm() / (4.0 * D * t));
}

ProfileFit fit_profile(const std::vector<double>& profile, double bin_width,
                       double origin, FitMethod method) {
  if (profile.empty()) throw SimError("analysis: empty profile");
  if (bin_width <= 0.0) throw SimError("analysis: bin width must be positive");

  double total = 0.0;
  for (const double v : profile) {
    if (v < 0.0) throw SimError("analysis: negative profile bin");
    total += v;
  }
  if (total <= 0.0) throw SimError("analysis: profile has no mass");

  auto center = [&](std::size_t i) {
    return origin + (static_cast<double>(i) + 0.5) * bin_width;
  };

  if (method == FitMethod::kLogParabola) {
    // Weighted parabola through log C; exact on sampled Gaussians. Weights
    // C^2 are the standard linearization of the Gaussian least-squares
    // problem.
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
      const double c = profile[i];
      if (c <= 0.0) continue;
      const double w = c * c, x = center(i), l = std::log(c);
      s0 += w;
      s1 += w * x;
      s2 += w * x * x;
      s3 += w * x * x * x;
      s4 += w * x * x * x * x;
      t0 += w * l;
      t1 += w * x * l;
      t2 += w * x * x * l;
    }
    Eigen::Matrix3d A;
    A << s4, s3, s2, s3, s2, s1, s2, s1, s0;
    const auto lu = A.fullPivLu();
    if (lu.isInvertible()) {
      const Vec3 coef = lu.solve(Vec3(t2, t1, t0));  // log C = a x^2 + b x + c
      if (coef[0] < 0.0) {
        ProfileFit fit;
        fit.variance = -0.5 / coef[0];
        fit.mean = -0.5 * coef[1] / coef[0];
        return fit;
      }
    }
    // Non-Gaussian or degenerate data: fall through to moments.
  }

  ProfileFit fit;
  for (std::size_t i = 0; i < profile.size(); ++i)
    fit.mean += profile[i] * center(i);
  fit.mean /= total;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double d = center(i) - fit.mean;
    fit.variance += profile[i] * d * d;
  }
  fit.variance /= total;
  return fit;
}

double ProfileSeries::mass(std::size_t i) const {
  double m = 0.0;
  for (const double v : profiles[i]) m += v;
  return m * slab_volume;
}

void fit_series(ProfileSeries& series, FitMethod method) {
  series.means.resize(series.profiles.size());
  series.variances.resize(series.profiles.size());
  for (std::size_t i = 0; i < series.profiles.size(); ++i) {
    const ProfileFit fit =
        fit_profile(series.profiles[i], series.bin_width, series.origin,
                    method);
    series.means[i] = fit.mean;
    series.variances[i] = fit.variance;
  }
}

ProfileSeries average_series(const std::vector<ProfileSeries>& runs) {
  if (runs.empty()) throw SimError("analysis: nothing to average");
  const std::size_t n = runs.front().times.size();
  for (const ProfileSeries& r : runs) {
    if (r.times.size() != n || r.variances.size() != n ||
        r.means.size() != n)
      throw SimError("analysis: series shapes differ across runs");
    for (std::size_t i = 0; i < n; ++i)
      if (r.times[i] != runs.front().times[i])
        throw SimError("analysis: time grids differ across runs");
  }

  ProfileSeries out;
  out.times = runs.front().times;
  out.bin_width = runs.front().bin_width;
  out.origin = runs.front().origin;
  out.slab_volume = runs.front().slab_volume;
  out.means.assign(n, 0.0);
  out.variances.assign(n, 0.0);
  for (const ProfileSeries& r : runs)
    for (std::size_t i = 0; i < n; ++i) {
      out.means[i] += r.means[i];
      out.variances[i] += r.variances[i];
    }
  const double inv = 1.0 / static_cast<double>(runs.size());
  for (std::size_t i = 0; i < n; ++i) {
    out.means[i] *= inv;
    out.variances[i] *= inv;
  }
  return out;
}

FitWindow auto_window(const std::vector<double>& times,
                      const std::vector<double>& variances) {
  const int n = static_cast<int>(times.size());
  if (variances.size() != times.size())
    throw SimError("analysis: window needs aligned series");
  if (n < 10) throw SimError("analysis: need at least 10 samples");

  for (int s = 0; s + 10 <= n; ++s) {
    const Line global = least_squares(times, variances, s, n);
    if (global.slope == 0.0) continue;
    const int local_len = std::max(4, (n - s) / 5);
    bool ok = true;
    for (int b = s; ok && b + local_len <= n; ++b) {
      const Line local = least_squares(times, variances, b, b + local_len);
      if (std::abs(local.slope - global.slope) >
          0.1 * std::abs(global.slope))
        ok = false;
    }
    if (ok) return {s, n};
  }
  return {n - 10, n};  // nothing settles; use the tail
}

DispersionReport dispersion_coefficient(const ProfileSeries& series, double R,
                                        double U_slip, double phi_solid,
                                        FitWindow window) {
  if (U_slip <= 0.0) throw SimError("analysis: slip velocity must be positive");
  if (phi_solid < 0.0 || phi_solid >= 1.0)
    throw SimError("analysis: solid fraction out of [0, 1)");
  if (series.variances.size() != series.times.size())
    throw SimError("analysis: fit the series before the dispersion fit");

  const int n = static_cast<int>(series.times.size());
  if (window.begin == window.end)
    window = auto_window(series.times, series.variances);
  if (window.begin < 0 || window.end > n || window.end - window.begin < 10)
    throw SimError("analysis: fit window needs at least 10 samples");

  // Normalized coordinates: y = sigma^2/(2R)^2 against x = (U_slip/2R) t.
  const double d2r = 2.0 * R;
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = U_slip / d2r * series.times[i];
    ys[i] = series.variances[i] / (d2r * d2r);
  }
  const Line line = least_squares(xs, ys, window.begin, window.end);

  DispersionReport report;
  report.K = line.slope;
  report.offset = line.intercept;
  report.U_slip = U_slip;
  report.phi_solid = phi_solid;
  report.D_alpha = line.slope / (1.0 - phi_solid);
  report.window = window;
  report.r_squared = line.r_squared;
  return report;
}

double slip_velocity(const std::vector<double>& fluid_mean,
                     const std::vector<double>& particle_mean) {
  if (fluid_mean.empty() || fluid_mean.size() != particle_mean.size())
    throw SimError("analysis: slip velocity needs aligned non-empty series");
  double best = 0.0;
  for (std::size_t i = 0; i < fluid_mean.size(); ++i)
    best = std::max(best, std::abs(fluid_mean[i] - particle_mean[i]));
  return best;
}

std::pair<double, double> reynolds_peclet(double rho_f, double U_p, double L,
                                          double mu, double D) {
  return {rho_f * U_p * L / mu, U_p * L / D};
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n)
    throw SimError("analysis: rank correlation needs two series, n >= 2");

  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
      for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
      i = j + 1;
    }
    return rank;
  };

  const auto rx = ranks(xs), ry = ranks(ys);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = rx[i] - ry[i];
    s += d * d;
  }
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * s / (nn * (nn * nn - 1.0));
}

}  // namespace granusol::analysis
