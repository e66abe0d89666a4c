#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "igpk/numerics.hpp"

namespace igpk {

/// Serializes a real with 17 significant digits so reads round-trip exactly.
std::string format_real(double v);

/// RFC-4180-style CSV with a mandatory header row.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Writes a matrix as CSV with columns c0..c{n-1}.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& A);

Matrix read_matrix_csv(const std::filesystem::path& path);

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::vector<std::string>* header = nullptr);

}  // namespace igpk
