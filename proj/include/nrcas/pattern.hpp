#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "nrcas/excitation.hpp"
#include "nrcas/geometry.hpp"

namespace nrcas {

struct AngularSample {
    double theta = 0.0; // rad; signed for one-dimensional grids
    double phi = 0.0;   // rad
    double weight = 0.0;
};

// Angular sampling with quadrature weights. One-dimensional grids sample
// u = sin(theta) in [-1, 1] at a fixed phi and are meant for linear arrays.
class AngularGrid {
  public:
    AngularGrid(std::vector<AngularSample> samples, bool one_dimensional);

    // u uniform on [-1, 1] (endpoints included), trapezoid weights for the
    // measure pi du over the visible half space.
    static AngularGrid linear_u(std::size_t m, double phi);

    // theta_k = k (pi/2) / n_theta for k = 1..n_theta, phi_l = 2 pi l / n_phi.
    // Weights sin(theta) dtheta dphi, halved on the horizon ring.
    static AngularGrid hemisphere(std::size_t n_theta, std::size_t n_phi);

    // Midpoint rule over theta in (0, pi), phi in [0, 2 pi).
    static AngularGrid full_sphere(std::size_t n_theta, std::size_t n_phi);

    // Full-sphere quadrature for a linear array: the pattern depends only on
    // the direction cosine c along the axis, so the integral is 2 pi int P dc.
    static AngularGrid full_sphere_linear(std::size_t m, double phi);

    std::size_t size() const { return samples_.size(); }
    bool one_dimensional() const { return one_dimensional_; }
    const AngularSample &operator[](std::size_t m) const { return samples_[m]; }
    const std::vector<AngularSample> &samples() const { return samples_; }

    double total_weight() const;

    bool operator==(const AngularGrid &) const = default;

  private:
    std::vector<AngularSample> samples_;
    bool one_dimensional_;
};

// Default synthesis grid: 1-D u grid with M = oversampling * N for arrays on
// the x or y axis, hemisphere product grid with M ~ oversampling * N otherwise.
AngularGrid default_synthesis_grid(const ArrayGeometry &geom, std::size_t oversampling = 8);

// Default full-sphere grid for the Q-factor integral.
AngularGrid default_q_grid(const ArrayGeometry &geom);

// Fixed-phi cut, theta from -90 to 90 degrees in the given step.
AngularGrid cut_grid(double phi_deg, double step_deg = 0.5);

struct PatternSamples {
    Eigen::VectorXcd values;
    Eigen::VectorXd power;

    static PatternSamples from_field(Eigen::VectorXcd values);
    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

// Linear power bounds per grid sample.
struct PatternMask {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    PatternMask(Eigen::VectorXd lower, Eigen::VectorXd upper);
    std::size_t size() const { return static_cast<std::size_t>(lower.size()); }
};

PatternSamples array_factor(const ArrayGeometry &geom, const ExcitationVector &w, const AngularGrid &grid);

// Weighted mask violation of the peak-normalized pattern, with the 1/(2 pi) prefactor.
double mask_matching(const PatternSamples &p, const PatternMask &mask, const AngularGrid &grid);

double pattern_tolerance(const PatternSamples &p, const PatternSamples &p_ref, const AngularGrid &grid);

// Excitation power over radiated power; grid must cover the full sphere.
double q_factor(const ExcitationVector &w, const PatternSamples &p, const AngularGrid &grid);

enum class MaskKind { cosecant_squared, flat_top };

// Angles in degrees. One-dimensional grids use the signed elevation theta:
// the main lobe spans [lobe_start, lobe_start + fnbw] and the shaped region is
// that interval shrunk by `transition` on both sides. Planar grids (flat-top
// only) use an ellipse in direction cosines with semi-axes sin(fnbw_x/2) and
// sin(fnbw_y/2), shaped region shrunk by `transition` in angle.
struct MaskDescriptor {
    MaskKind kind = MaskKind::flat_top;
    double sll_db = -20.0;
    double rpe_db = 1.0;
    double fnbw_deg = 60.0;   // 1-D lobe width, also the default for both planar axes
    std::optional<double> fnbw_x_deg;
    std::optional<double> fnbw_y_deg;
    double transition_deg = 10.0;
    std::optional<double> lobe_start_deg; // 1-D only, default -fnbw/2
    double csc_start_deg = 10.0;          // cosecant-squared only
    std::optional<double> sll_alt_db;     // sidelobe level where u < 0

    bool operator==(const MaskDescriptor &) const = default;
};

void validate(const MaskDescriptor &desc);

PatternMask build_mask(const MaskDescriptor &desc, const AngularGrid &grid);

inline constexpr double kReportFloorDb = -120.0;

// theta_deg,phi_deg,power_db,power_linear (power normalized to its peak).
void write_pattern_csv(const std::filesystem::path &path, const PatternSamples &p, const AngularGrid &grid);

// theta_deg,phi_deg,lm_linear,um_linear
void write_mask_csv(const std::filesystem::path &path, const PatternMask &mask, const AngularGrid &grid);
PatternMask load_mask_csv(const std::filesystem::path &path, const AngularGrid &grid);

} // namespace nrcas
