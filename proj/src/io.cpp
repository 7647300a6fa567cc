#include "lowdim/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "lowdim/error.hpp"

namespace lowdim {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string vtk_string(const Mesh& mesh, const std::vector<NamedField>& fields) {
    for (const auto& [name, field] : fields) {
        if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
            throw Error(ErrorKind::IoError, "cli", "VTK field name '" + name + "' is empty or has whitespace");
        }
        if (static_cast<int>(field.size()) != mesh.n_dofs) {
            throw Error(ErrorKind::IoError, "cli", "field '" + name + "' does not match the mesh");
        }
    }
    std::string out = "# vtk DataFile Version 3.0\nlowdim\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out += "POINTS " + std::to_string(mesh.n_dofs) + " double\n";
    for (const Vec3& p : mesh.dof_points) {
        out += format_double(p.x) + ' ' + format_double(p.y) + ' ' + format_double(p.z) + '\n';
    }
    std::size_t cells = 0, entries = 0;
    for (const auto& part : mesh.parts) {
        cells += part.edges.size() + part.triangles.size();
        entries += 3 * part.edges.size() + 4 * part.triangles.size();
    }
    out += "CELLS " + std::to_string(cells) + ' ' + std::to_string(entries) + '\n';
    for (const auto& part : mesh.parts) {
        for (const auto& e : part.edges) {
            out += "2 " + std::to_string(part.dofs[e[0]]) + ' ' + std::to_string(part.dofs[e[1]]) + '\n';
        }
        for (const auto& t : part.triangles) {
            out += "3 " + std::to_string(part.dofs[t[0]]) + ' ' + std::to_string(part.dofs[t[1]]) + ' ' +
                   std::to_string(part.dofs[t[2]]) + '\n';
        }
    }
    out += "CELL_TYPES " + std::to_string(cells) + '\n';
    for (const auto& part : mesh.parts) {
        for (std::size_t i = 0; i < part.edges.size(); ++i) out += "3\n";
        for (std::size_t i = 0; i < part.triangles.size(); ++i) out += "5\n";
    }
    if (fields.empty()) return out;
    out += "POINT_DATA " + std::to_string(mesh.n_dofs) + '\n';
    for (const auto& [name, field] : fields) {
        out += "SCALARS " + name + " double 1\nLOOKUP_TABLE default\n";
        for (double v : field.values) out += format_double(v) + '\n';
    }
    return out;
}

void emit_vtk(const Mesh& mesh, const std::vector<NamedField>& fields, const std::filesystem::path& path) {
    write_text(path, vtk_string(mesh, fields));
}

std::string trajectory_csv(const Trajectory& trajectory) {
    const std::size_t d = trajectory.class_means.empty() ? 0 : trajectory.class_means.front().size();
    std::string out = "time,l2_norm,energy,dist_l2,dist_h1";
    for (std::size_t k = 0; k < d; ++k) out += ",class_mean_" + std::to_string(k);
    out += '\n';
    for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
        out += format_double(trajectory.times[i]) + ',' + format_double(trajectory.l2_norm[i]) + ',' +
               format_double(trajectory.energy[i]) + ',' + format_double(trajectory.dist_l2[i]) + ',' +
               format_double(trajectory.dist_h1[i]);
        for (double m : trajectory.class_means[i]) out += ',' + format_double(m);
        out += '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cli", "cannot open " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::IoError, "cli", "failed writing " + path.string());
}

}  // namespace lowdim
