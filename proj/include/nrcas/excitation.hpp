#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>

namespace nrcas {

// Complex element weights w_n = alpha_n exp(j beta_n).
class ExcitationVector {
  public:
    ExcitationVector() = default;
    explicit ExcitationVector(Eigen::VectorXcd weights) : weights_(std::move(weights)) {}

    static ExcitationVector from_polar(const Eigen::VectorXd &amplitude, const Eigen::VectorXd &phase);

    std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
    const Eigen::VectorXcd &weights() const { return weights_; }
    std::complex<double> operator[](std::size_t n) const { return weights_[static_cast<Eigen::Index>(n)]; }

    double amplitude(std::size_t n) const;
    double phase(std::size_t n) const; // (-pi, pi]
    Eigen::VectorXd amplitudes() const;
    Eigen::VectorXd phases() const;

  private:
    Eigen::VectorXcd weights_;
};

// Phase in (-pi, pi]; std::arg returns -pi for negative reals with a -0 imaginary part.
double principal_phase(std::complex<double> z);

enum class ExcitationFormat { polar, cartesian };

// index,amplitude,phase_deg or index,re,im. The reader detects the header.
void write_excitation_csv(const std::filesystem::path &path, const ExcitationVector &w,
                          ExcitationFormat format = ExcitationFormat::polar);
ExcitationVector load_excitation_csv(const std::filesystem::path &path);

} // namespace nrcas
