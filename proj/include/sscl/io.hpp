#pragma once

#include <string>
#include <vector>

#include "sscl/mlp.hpp"
#include "sscl/stream.hpp"

namespace sscl {

/// Plain binary container: magic "SSCL", u16 version, u32 array count, then
/// per array u32 rows, u32 cols and row-major little-endian f64 data.
void write_container(const std::string& path, const std::vector<Matrix>& arrays);
std::vector<Matrix> read_container(const std::string& path);

/// Dataset container plus a JSON sidecar (<path>.json) with the config.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Model checkpoint in the same container (weights and biases interleaved),
/// JSON sidecar carries dims/activation.
void save_model(const MlpModel& m, const std::string& path);
MlpModel load_model(const std::string& path);

/// Optional loader for real digit data in IDX format (big-endian), pixel
/// values scaled to [0,1].
Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path);

}  // namespace sscl
