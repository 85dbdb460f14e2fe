#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pals/calib/rotation.hpp"
#include "pals/core/field.hpp"
#include "pals/forward/dip.hpp"
#include "pals/forward/point_cloud.hpp"
#include "pals/forward/silhouette.hpp"

namespace pals {

namespace fs = std::filesystem;

struct OptimizationTrace;

/// Writes to a sibling temporary file and renames it into place.
void atomic_write(const fs::path& path, std::string_view bytes);
std::string read_file(const fs::path& path);

enum class VoxelDtype { f32, u8 };

/// `<base>.json` header plus `<base>.raw` little-endian payload, x-fastest.
/// u8 stores round(255 u).
void write_voxel_grid(const fs::path& base, const ScalarField& field, VoxelDtype dtype = VoxelDtype::f32);
/// Accepts the base path, the .json header or the .raw payload.
ScalarField read_voxel_grid(const fs::path& path);

/// CSV with header theta_deg,phi_deg,bx,by,bz,v_1..v_n.
void write_dip_csv(const fs::path& path, const std::vector<DipExperiment>& dips);
std::vector<DipExperiment> read_dip_csv(const fs::path& path);

/// One P5 PGM per experiment next to a JSON manifest holding poses and eta.
void write_silhouettes(const fs::path& manifest, const std::vector<SilhouetteExperiment>& experiments, int n1, int n2);
std::vector<SilhouetteExperiment> read_silhouettes(const fs::path& manifest, int* n1 = nullptr, int* n2 = nullptr);

struct PointCloudFile {
  PointCloudData cloud;
  AcquisitionParams pose;
};
/// Lines "x y z nx ny nz"; "# pose", "# eps_offset" and "# level" comments carry the rest.
void write_point_cloud(const fs::path& path, const PointCloudData& cloud, const AcquisitionParams& pose);
PointCloudFile read_point_cloud(const fs::path& path);

/// JSON {kind, eps_norm, params: [...], acquisition: [{theta, phi, b}]},
/// optionally with "field": {delta, eps, offset, wendland_order}.
std::string params_to_json(const ExtendedParameters& m, const FieldOptions* field = nullptr);
ExtendedParameters params_from_json(std::string_view text);
std::optional<FieldOptions> field_options_from_json(std::string_view text);
void write_params(const fs::path& path, const ExtendedParameters& m, const FieldOptions* field = nullptr);
ExtendedParameters read_params(const fs::path& path);

/// iter,misfit,reg,n_rbf,step
std::string trace_to_csv(const OptimizationTrace& trace);
/// Misfit-vs-iteration line chart (log scale).
std::string trace_to_svg(const OptimizationTrace& trace);

}  // namespace pals
