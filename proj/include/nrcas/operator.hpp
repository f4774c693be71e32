#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "nrcas/excitation.hpp"
#include "nrcas/geometry.hpp"
#include "nrcas/pattern.hpp"

namespace nrcas {

inline constexpr double kOrthonormalityTolerance = 1e-10;
inline constexpr double kReconstructionTolerance = 1e-10;
inline constexpr double kCrossCheckTolerance = 1e-12;

// Sampled radiation operator G (M x N) with its validated thin SVD. Each right
// singular vector is rotated so that its largest-magnitude entry is real and
// positive; the matching left vector gets the same rotation.
class RadiationOperator {
  public:
    static RadiationOperator build(const ArrayGeometry &geom, const AngularGrid &grid);

    std::size_t rows() const { return static_cast<std::size_t>(matrix_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(matrix_.cols()); }

    const Eigen::MatrixXcd &matrix() const { return matrix_; }
    const Eigen::MatrixXcd &left() const { return u_; }   // M x N
    const Eigen::VectorXd &sigma() const { return sigma_; }
    const Eigen::MatrixXcd &right() const { return v_; }  // N x N
    Eigen::VectorXd normalized_spectrum() const;

    Eigen::VectorXcd apply(const Eigen::VectorXcd &w) const { return matrix_ * w; }

  private:
    RadiationOperator() = default;

    Eigen::MatrixXcd matrix_;
    Eigen::MatrixXcd u_;
    Eigen::VectorXd sigma_;
    Eigen::MatrixXcd v_;
};

// Operators keyed by geometry and grid, built once and shared.
class OperatorCache {
  public:
    std::shared_ptr<const RadiationOperator> get(const ArrayGeometry &geom, const AngularGrid &grid);
    std::size_t size() const;

  private:
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const RadiationOperator>> entries_;
};

struct TruncationReport {
    double chi = 0.0;
    std::size_t s = 0;
    std::vector<double> spectrum;
    double leakage_bound = 0.0; // sigma_{S+1}, 0 when S = N

    std::size_t null_dimension() const { return spectrum.size() - s; }
};

TruncationReport select_rank(const RadiationOperator &op, double chi);

// Truncated pseudoinverse applied to a sampled reference field.
ExcitationVector minimum_norm_excitations(const RadiationOperator &op, const TruncationReport &rank,
                                          const PatternSamples &af_ref);

struct NrCoefficients {
    Eigen::VectorXcd gamma;

    // Interleaved (re, im) per coefficient.
    static NrCoefficients from_real(const double *x, std::size_t dim);
    void to_real(double *x) const;
    std::size_t size() const { return static_cast<std::size_t>(gamma.size()); }
};

ExcitationVector nr_excitations(const RadiationOperator &op, const TruncationReport &rank,
                                const NrCoefficients &gamma);

// Amplitude and phase of w_ra + w_nr from the polar closed forms.
struct PolarSum {
    Eigen::VectorXd amplitude;
    Eigen::VectorXd phase;
};
PolarSum polar_sum(const ExcitationVector &w_ra, const ExcitationVector &w_nr);

// Complex sum, cross-checked against polar_sum; throws NumericalError on mismatch.
ExcitationVector assemble(const ExcitationVector &w_ra, const ExcitationVector &w_nr);

void write_truncation_json(const std::filesystem::path &path, const TruncationReport &report);

// n,sigma,sigma_normalized
void write_spectrum_csv(const std::filesystem::path &path, const RadiationOperator &op);

} // namespace nrcas
