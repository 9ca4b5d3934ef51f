#ifndef DFSTOMO_IO_HPP
#define DFSTOMO_IO_HPP

#include <filesystem>
#include <span>
#include <vector>

#include "dfstomo/sim.hpp"
#include "dfstomo/tomography.hpp"

namespace dfstomo {

// Acquisition records as JSON-Lines: a header object carrying the format
// version and record count, then one {"m": <int>, "x_raw": <float>} per line.
void write_records_jsonl(const std::filesystem::path& path,
                         std::span<const SampleRecord> records, std::string_view kind);
std::vector<SampleRecord> read_records_jsonl(const std::filesystem::path& path);

void write_truth_sidecar(const std::filesystem::path& path, const TruthSidecar& truth);
TruthSidecar read_truth_sidecar(const std::filesystem::path& path);

// Plain-text grid/profile/diagonal files share the '#'-header style; values
// use scientific notation with 6 significant digits.
void write_wigner_grid(const std::filesystem::path& path, const WignerGrid& grid);
WignerGrid read_wigner_grid(const std::filesystem::path& path);

void write_radial_profile(const std::filesystem::path& path, const RadialProfile& profile);
RadialProfile read_radial_profile(const std::filesystem::path& path);

void write_diagonals(const std::filesystem::path& path,
                     std::span<const DiagonalEstimate> diagonals);
std::vector<DiagonalEstimate> read_diagonals(const std::filesystem::path& path);

} // namespace dfstomo

#endif
