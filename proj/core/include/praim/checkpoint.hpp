#pragma once

#include <string>
#include <vector>

#include "praim/model.hpp"

namespace praim {

/// A trained model plus the bookkeeping needed to run it later: the station
/// row order of the embedding table and the configuration it was trained
/// under (JSON text, `{}` when unknown).
struct Checkpoint {
  ModelParameters params;
  std::vector<std::string> station_ids;
  std::string config_echo = "{}";
};

// Single-file container: a JSON header (dimensions, station order, config
// echo, tensor names/shapes/byte offsets) terminated by a NUL byte, followed
// by the trainable tensors as little-endian float32 in enumeration order.
// The positional table is a pure function of the dimensions and is rebuilt
// on load. save -> load -> save is byte-identical.
void save_checkpoint(const std::string& path, const ModelParameters& params,
                     const std::vector<std::string>& station_ids,
                     const std::string& config_echo_json = "{}");

Checkpoint load_checkpoint(const std::string& path);

}  // namespace praim
