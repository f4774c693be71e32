#include "nrcas/excitation.hpp"

#include <cmath>
#include <numbers>

#include "io_util.hpp"
#include "nrcas/errors.hpp"

namespace nrcas {

double principal_phase(std::complex<double> z) {
    double b = std::arg(z);
    return b <= -std::numbers::pi ? std::numbers::pi : b;
}

ExcitationVector ExcitationVector::from_polar(const Eigen::VectorXd &amplitude, const Eigen::VectorXd &phase) {
    if (amplitude.size() != phase.size()) throw InvalidArgument("amplitude and phase lengths differ");
    Eigen::VectorXcd w(amplitude.size());
    for (Eigen::Index n = 0; n < w.size(); ++n) w[n] = std::polar(amplitude[n], phase[n]);
    return ExcitationVector(std::move(w));
}

double ExcitationVector::amplitude(std::size_t n) const { return std::abs((*this)[n]); }

double ExcitationVector::phase(std::size_t n) const { return principal_phase((*this)[n]); }

Eigen::VectorXd ExcitationVector::amplitudes() const { return weights_.cwiseAbs(); }

Eigen::VectorXd ExcitationVector::phases() const {
    Eigen::VectorXd b(weights_.size());
    for (Eigen::Index n = 0; n < b.size(); ++n) b[n] = principal_phase(weights_[n]);
    return b;
}

void write_excitation_csv(const std::filesystem::path &path, const ExcitationVector &w, ExcitationFormat format) {
    auto out = detail::open_output(path);
    if (format == ExcitationFormat::polar) {
        out << "index,amplitude,phase_deg\n";
        for (std::size_t n = 0; n < w.size(); ++n)
            out << n + 1 << ',' << detail::fmt(w.amplitude(n)) << ','
                << detail::fmt(w.phase(n) * 180.0 / std::numbers::pi) << '\n';
    } else {
        out << "index,re,im\n";
        for (std::size_t n = 0; n < w.size(); ++n)
            out << n + 1 << ',' << detail::fmt(w[n].real()) << ',' << detail::fmt(w[n].imag()) << '\n';
    }
}

ExcitationVector load_excitation_csv(const std::filesystem::path &path) {
    auto table = detail::read_csv(path);
    int ci = table.column("index");
    int ca = table.column("amplitude"), cp = table.column("phase_deg");
    int cr = table.column("re"), cm = table.column("im");
    bool polar = ca >= 0 && cp >= 0;
    if (ci < 0 || (!polar && (cr < 0 || cm < 0)))
        throw InputError(path.string() + ": expected header index,amplitude,phase_deg or index,re,im");
    const auto n = table.rows.size();
    Eigen::VectorXcd w(static_cast<Eigen::Index>(n));
    std::vector<bool> filled(n, false);
    for (const auto &row : table.rows) {
        double idx = row[static_cast<std::size_t>(ci)];
        if (idx != std::floor(idx) || idx < 1 || idx > static_cast<double>(n))
            throw InputError(path.string() + ": index out of range");
        auto k = static_cast<std::size_t>(idx) - 1;
        if (filled[k]) throw InputError(path.string() + ": repeated index " + std::to_string(k + 1));
        filled[k] = true;
        if (polar) {
            double a = row[static_cast<std::size_t>(ca)];
            if (a < 0) throw InputError(path.string() + ": negative amplitude");
            w[static_cast<Eigen::Index>(k)] =
                std::polar(a, row[static_cast<std::size_t>(cp)] * std::numbers::pi / 180.0);
        } else {
            w[static_cast<Eigen::Index>(k)] = {row[static_cast<std::size_t>(cr)], row[static_cast<std::size_t>(cm)]};
        }
    }
    return ExcitationVector(std::move(w));
}

} // namespace nrcas
