#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lowdim/meshing.hpp"
#include "lowdim/solvers.hpp"

namespace lowdim {

using NamedField = std::pair<std::string, DiscreteField>;

/// VTK legacy ASCII 3.0 UNSTRUCTURED_GRID: global DOFs as points, VTK_LINE and
/// VTK_TRIANGLE cells, one SCALARS block per field (%.17g).
std::string vtk_string(const Mesh& mesh, const std::vector<NamedField>& fields);
void emit_vtk(const Mesh& mesh, const std::vector<NamedField>& fields, const std::filesystem::path& path);

/// time,l2_norm,energy,dist_l2,dist_h1,class_mean_0..d-1
std::string trajectory_csv(const Trajectory& trajectory);

/// Writes text to a file, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

/// printf("%.17g") of one value; "nan" for NaN.
std::string format_double(double value);

}  // namespace lowdim
