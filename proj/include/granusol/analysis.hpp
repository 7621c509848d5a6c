#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "granusol/types.hpp"

namespace granusol::analysis {

/// Point-source solution of the advection-diffusion equation in free space,
///   C = M / (4 pi D t)^{3/2} * exp(-|x - x0 - u t|^2 / (4 D t)).
double analytic_point_source(const Vec3& x, double t, double M, double D,
                             const Vec3& x0, const Vec3& u = Vec3::Zero());

struct ProfileFit {
  double mean = 0.0;
  double variance = 0.0;
};

enum class FitMethod {
  kMoments,      // discrete first/second moments (Gaussian MLE on bins)
  kLogParabola,  // weighted parabola through log of the positive bins
};

/// Location and spread of a non-negative binned profile. Bin i is centered
/// at origin + (i + 1/2) * bin_width.
ProfileFit fit_profile(const std::vector<double>& profile, double bin_width,
                       double origin = 0.0,
                       FitMethod method = FitMethod::kMoments);

/// Time series of 1-D concentration profiles along one axis.
struct ProfileSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> profiles;
  double bin_width = 1.0;
  double origin = 0.0;       // lower edge of bin 0
  double slab_volume = 1.0;  // volume one bin represents

  std::vector<double> means;      // filled by fit_series
  std::vector<double> variances;  // filled by fit_series

  double mass(std::size_t i) const;  // bin integral at sample i
};

void fit_series(ProfileSeries& series,
                FitMethod method = FitMethod::kMoments);

/// Seed-averaged series: same time grid required, variances and means are
/// averaged sample-wise. Profiles are kept only when every run agrees on
/// the binning.
ProfileSeries average_series(const std::vector<ProfileSeries>& runs);

struct FitWindow {
  int begin = 0;
  int end = 0;  // exclusive; begin == end means "select automatically"
};

/// Longest suffix of the series on which sliding local slopes stay within
/// 10% of the suffix-wide slope (discards the initial transient). Falls back
/// to the last ten samples when nothing qualifies.
FitWindow auto_window(const std::vector<double>& times,
                      const std::vector<double>& variances);

struct DispersionReport {
  double K = 0.0;       // dimensionless slope
  double offset = 0.0;
  double U_slip = 0.0;
  double phi_solid = 0.0;
  double D_alpha = 0.0;  // K / (1 - phi_solid)
  FitWindow window;
  double r_squared = 0.0;
};

/// Straight-line fit of sigma^2/(2R)^2 against (U_slip/(2R)) t over the
/// window; K is the slope and D_alpha = K / (1 - phi_solid).
DispersionReport dispersion_coefficient(const ProfileSeries& series, double R,
                                        double U_slip, double phi_solid,
                                        FitWindow window = {});

/// max_t |<u>(t) - <u_p>(t)| over aligned volume-averaged velocity series.
double slip_velocity(const std::vector<double>& fluid_mean,
                     const std::vector<double>& particle_mean);

/// (Re, Pe) = (rho_f U L / mu, U L / D).
std::pair<double, double> reynolds_peclet(double rho_f, double U_p, double L,
                                          double mu, double D);

/// Rank correlation r = 1 - 6 S / (n (n^2 - 1)), average ranks on ties.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace granusol::analysis
