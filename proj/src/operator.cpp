#include "nrcas/operator.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "io_util.hpp"
#include "nrcas/errors.hpp"

namespace nrcas {

namespace {

void append_bytes(std::string &key, double v) {
    char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof v);
    key.append(buf, sizeof buf);
}

} // namespace

RadiationOperator RadiationOperator::build(const ArrayGeometry &geom, const AngularGrid &grid) {
    const auto m = static_cast<Eigen::Index>(grid.size());
    const auto n = static_cast<Eigen::Index>(geom.size());
    if (m < n)
        throw InvalidArgument("operator needs at least as many samples as elements (M=" + std::to_string(m) +
                              ", N=" + std::to_string(n) + ")");

    RadiationOperator op;
    op.matrix_.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto &s = grid[static_cast<std::size_t>(i)];
        const double u = std::sin(s.theta) * std::cos(s.phi);
        const double v = std::sin(s.theta) * std::sin(s.phi);
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto &p = geom[static_cast<std::size_t>(k)];
            op.matrix_(i, k) = std::polar(1.0, 2.0 * std::numbers::pi * (p.x * u + p.y * v));
        }
    }

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(op.matrix_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("SVD did not converge");
    op.u_ = svd.matrixU();
    op.v_ = svd.matrixV();
    op.sigma_ = svd.singularValues();

    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index imax = 0;
        op.v_.col(k).cwiseAbs().maxCoeff(&imax);
        const std::complex<double> z = op.v_(imax, k);
        if (std::abs(z) == 0) continue;
        const std::complex<double> rot = std::conj(z) / std::abs(z);
        op.v_.col(k) *= rot;
        op.u_.col(k) *= rot;
        op.v_(imax, k) = std::abs(op.v_(imax, k));
    }

    for (Eigen::Index k = 1; k < n; ++k)
        if (op.sigma_[k] > op.sigma_[k - 1]) throw NumericalError("singular values are not in descending order");

    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
    const double u_err = (op.u_.adjoint() * op.u_ - eye).cwiseAbs().maxCoeff();
    const double v_err = (op.v_.adjoint() * op.v_ - eye).cwiseAbs().maxCoeff();
    const double rec_err =
        (op.matrix_ - op.u_ * op.sigma_.asDiagonal() * op.v_.adjoint()).norm() / op.matrix_.norm();
    if (u_err > kOrthonormalityTolerance || v_err > kOrthonormalityTolerance || rec_err > kReconstructionTolerance) {
        std::ostringstream msg;
        msg << "SVD validation failed: |U*U-I|=" << u_err << " |V*V-I|=" << v_err << " reconstruction=" << rec_err
            << " (M=" << m << ", N=" << n << ")";
        throw NumericalError(msg.str());
    }
    return op;
}

Eigen::VectorXd RadiationOperator::normalized_spectrum() const { return sigma_ / sigma_[0]; }

std::shared_ptr<const RadiationOperator> OperatorCache::get(const ArrayGeometry &geom, const AngularGrid &grid) {
    std::string key;
    key.reserve(16 * (geom.size() + 2 * grid.size()));
    for (const auto &p : geom.positions()) {
        append_bytes(key, p.x);
        append_bytes(key, p.y);
    }
    key.push_back('|');
    for (const auto &s : grid.samples()) {
        append_bytes(key, s.theta);
        append_bytes(key, s.phi);
    }
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
    auto op = std::make_shared<const RadiationOperator>(RadiationOperator::build(geom, grid));
    entries_.emplace(std::move(key), op);
    return op;
}

std::size_t OperatorCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

TruncationReport select_rank(const RadiationOperator &op, double chi) {
    if (!(chi > 0 && chi < 1)) throw InvalidArgument("chi must lie in (0, 1)");
    const Eigen::VectorXd hat = op.normalized_spectrum();
    TruncationReport r;
    r.chi = chi;
    r.spectrum.assign(hat.data(), hat.data() + hat.size());
    while (r.s < r.spectrum.size() && r.spectrum[r.s] > chi) ++r.s;
    if (r.s == 0) throw InvalidArgument("chi leaves an empty radiating subspace");
    r.leakage_bound = r.s < op.cols() ? op.sigma()[static_cast<Eigen::Index>(r.s)] : 0.0;
    return r;
}

static void check_rank(const RadiationOperator &op, const TruncationReport &rank) {
    if (rank.spectrum.size() != op.cols() || rank.s < 1 || rank.s > op.cols())
        throw InvalidArgument("truncation report does not belong to this operator");
}

ExcitationVector minimum_norm_excitations(const RadiationOperator &op, const TruncationReport &rank,
                                          const PatternSamples &af_ref) {
    check_rank(op, rank);
    if (af_ref.size() != op.rows()) throw InvalidArgument("reference field is not sampled on the operator grid");
    const auto s = static_cast<Eigen::Index>(rank.s);
    Eigen::VectorXcd c = op.left().leftCols(s).adjoint() * af_ref.values;
    for (Eigen::Index k = 0; k < s; ++k) {
        if (op.sigma()[k] == 0) throw NumericalError("zero singular value inside the radiating subspace");
        c[k] /= op.sigma()[k];
    }
    return ExcitationVector(op.right().leftCols(s) * c);
}

NrCoefficients NrCoefficients::from_real(const double *x, std::size_t dim) {
    if (dim % 2) throw InvalidArgument("real parameter vector must have even length");
    NrCoefficients g;
    g.gamma.resize(static_cast<Eigen::Index>(dim / 2));
    for (Eigen::Index q = 0; q < g.gamma.size(); ++q) g.gamma[q] = {x[2 * q], x[2 * q + 1]};
    return g;
}

void NrCoefficients::to_real(double *x) const {
    for (Eigen::Index q = 0; q < gamma.size(); ++q) {
        x[2 * q] = gamma[q].real();
        x[2 * q + 1] = gamma[q].imag();
    }
}

ExcitationVector nr_excitations(const RadiationOperator &op, const TruncationReport &rank,
                                const NrCoefficients &gamma) {
    check_rank(op, rank);
    if (gamma.size() != rank.null_dimension())
        throw InvalidArgument("expected " + std::to_string(rank.null_dimension()) + " NR coefficients, got " +
                              std::to_string(gamma.size()));
    for (Eigen::Index q = 0; q < gamma.gamma.size(); ++q)
        if (!std::isfinite(gamma.gamma[q].real()) || !std::isfinite(gamma.gamma[q].imag()))
            throw InvalidArgument("NR coefficients must be finite");
    if (gamma.size() == 0) return ExcitationVector(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(op.cols())));
    return ExcitationVector(op.right().rightCols(gamma.gamma.size()) * gamma.gamma);
}

PolarSum polar_sum(const ExcitationVector &w_ra, const ExcitationVector &w_nr) {
    if (w_ra.size() != w_nr.size()) throw InvalidArgument("excitation lengths differ");
    const auto n = static_cast<Eigen::Index>(w_ra.size());
    PolarSum out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        const double a = std::abs(w_ra.weights()[k]), b = std::abs(w_nr.weights()[k]);
        const double pa = std::arg(w_ra.weights()[k]), pb = std::arg(w_nr.weights()[k]);
        // a^2 + 2ab cos(pa - pb) + b^2, written without cancellation.
        const double c = std::cos(0.5 * (pa - pb));
        out.amplitude[k] = std::sqrt((a - b) * (a - b) + 4.0 * a * b * c * c);
        const double y = a * std::sin(pa) + b * std::sin(pb);
        const double x = a * std::cos(pa) + b * std::cos(pb);
        out.phase[k] = principal_phase({x, y});
    }
    return out;
}

ExcitationVector assemble(const ExcitationVector &w_ra, const ExcitationVector &w_nr) {
    if (w_ra.size() != w_nr.size()) throw InvalidArgument("excitation lengths differ");
    ExcitationVector w(w_ra.weights() + w_nr.weights());
    const PolarSum ps = polar_sum(w_ra, w_nr);
    for (Eigen::Index k = 0; k < ps.amplitude.size(); ++k) {
        const double scale = std::max(1.0, std::abs(w_ra.weights()[k]) + std::abs(w_nr.weights()[k]));
        const double err = std::abs(std::polar(ps.amplitude[k], ps.phase[k]) - w.weights()[k]);
        if (err > kCrossCheckTolerance * scale)
            throw NumericalError("amplitude/phase closed form disagrees with complex sum at element " +
                                 std::to_string(k + 1));
    }
    return w;
}

void write_truncation_json(const std::filesystem::path &path, const TruncationReport &report) {
    nlohmann::json j;
    j["chi"] = detail::round12(report.chi);
    j["s"] = report.s;
    j["n"] = report.spectrum.size();
    j["leakage_bound"] = detail::round12(report.leakage_bound);
    std::vector<double> spectrum;
    for (double v : report.spectrum) spectrum.push_back(detail::round12(v));
    j["spectrum"] = spectrum;
    auto out = detail::open_output(path);
    out << j.dump(2) << '\n';
}

void write_spectrum_csv(const std::filesystem::path &path, const RadiationOperator &op) {
    auto out = detail::open_output(path);
    out << "n,sigma,sigma_normalized\n";
    const Eigen::VectorXd hat = op.normalized_spectrum();
    for (Eigen::Index k = 0; k < hat.size(); ++k)
        out << k + 1 << ',' << detail::fmt(op.sigma()[k]) << ',' << detail::fmt(hat[k]) << '\n';
}

} // namespace nrcas
