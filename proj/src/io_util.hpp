#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace nrcas::detail {

// 12 significant digits for every floating-point value written to disk.
std::string fmt(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    // Column position by name, -1 if absent.
    int column(const std::string &name) const;
};

// Numeric CSV with a single header line; throws InputError on malformed content.
CsvTable read_csv(const std::filesystem::path &path);

std::ofstream open_output(const std::filesystem::path &path);

// Uniform double in [0, 1) from the top 53 bits, independent of the standard library.
inline double uniform01(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace nrcas::detail

namespace nrcas::detail {

// Value rounded to 12 significant digits, for JSON output.
double round12(double v);

// Standard normal draw (Box-Muller) on top of uniform01.
double normal01(std::mt19937_64 &rng);

} // namespace nrcas::detail
