#include "praim/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "json.hpp"
#include "praim/common.hpp"

namespace praim {
namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;

void put_f32(std::string& out, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  out.push_back(static_cast<char>(bits & 0xff));
  out.push_back(static_cast<char>((bits >> 8) & 0xff));
  out.push_back(static_cast<char>((bits >> 16) & 0xff));
  out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

float get_f32(const std::string& bytes, std::size_t offset) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) {
    bits = (bits << 8) |
           static_cast<std::uint8_t>(bytes[offset + static_cast<std::size_t>(i)]);
  }
  return std::bit_cast<float>(bits);
}

json dims_to_json(const ModelDims& d) {
  json j;
  j["d_emb"] = d.d_emb;
  j["d_lat"] = d.d_lat;
  j["d_stat"] = d.d_stat;
  j["d_cal"] = d.d_cal;
  j["d_film"] = d.d_film;
  j["layers"] = d.layers;
  j["heads"] = d.heads;
  j["window"] = d.window;
  j["n_stations"] = d.n_stations;
  return j;
}

ModelDims dims_from_json(const json& j) {
  ModelDims d;
  d.d_emb = j.at("d_emb").get<int>();
  d.d_lat = j.at("d_lat").get<int>();
  d.d_stat = j.at("d_stat").get<int>();
  d.d_cal = j.at("d_cal").get<int>();
  d.d_film = j.at("d_film").get<int>();
  d.layers = j.at("layers").get<int>();
  d.heads = j.at("heads").get<int>();
  d.window = j.at("window").get<int>();
  d.n_stations = j.at("n_stations").get<int>();
  return d;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParameters& params,
                     const std::vector<std::string>& station_ids,
                     const std::string& config_echo_json) {
  if (static_cast<int>(station_ids.size()) != params.dims.n_stations) {
    throw ValidationError("checkpoint station list has " +
                          std::to_string(station_ids.size()) +
                          " entries for " +
                          std::to_string(params.dims.n_stations) +
                          " station rows");
  }
  json config_echo;
  try {
    config_echo = json::parse(config_echo_json);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint config echo is not JSON: ") +
                          e.what());
  }

  auto refs = tensor_refs(const_cast<ModelParameters&>(params));
  json tensors = json::array();
  std::string payload;
  for (const TensorRef& ref : refs) {
    json t;
    t["name"] = ref.name;
    t["rows"] = ref.rows;
    t["cols"] = ref.cols;
    t["offset"] = payload.size();
    tensors.push_back(std::move(t));
    for (Eigen::Index i = 0; i < ref.size(); ++i) {
      put_f32(payload, static_cast<float>(ref.data[i]));
    }
  }

  json header;
  header["version"] = kCheckpointVersion;
  header["dims"] = dims_to_json(params.dims);
  header["layout"] = "col_major";
  header["stations"] = station_ids;
  header["config"] = config_echo;
  header["tensors"] = std::move(tensors);

  std::string blob = header.dump();
  blob.push_back('\0');
  blob += payload;
  write_text_file(path, blob);
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string blob = read_text_file(path);
  const std::size_t nul = blob.find('\0');
  if (nul == std::string::npos) {
    throw IoError("corrupted checkpoint " + path + ": no header terminator");
  }
  json header;
  try {
    header = json::parse(blob.substr(0, nul));
  } catch (const json::exception& e) {
    throw IoError("corrupted checkpoint " + path + ": " + e.what());
  }
  if (header.at("version").get<int>() != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version in " + path);
  }

  Checkpoint ckpt;
  const ModelDims dims = dims_from_json(header.at("dims"));
  ckpt.params = ModelParameters::zeros(dims);
  ckpt.station_ids =
      header.at("stations").get<std::vector<std::string>>();
  if (static_cast<int>(ckpt.station_ids.size()) != dims.n_stations) {
    throw IoError("corrupted checkpoint " + path +
                  ": station list does not match dimensions");
  }
  ckpt.config_echo = header.at("config").dump();

  auto refs = tensor_refs(ckpt.params);
  const json& tensors = header.at("tensors");
  if (tensors.size() != refs.size()) {
    throw IoError("corrupted checkpoint " + path + ": expected " +
                  std::to_string(refs.size()) + " tensors, found " +
                  std::to_string(tensors.size()));
  }
  const std::size_t payload_base = nul + 1;
  for (std::size_t ti = 0; ti < refs.size(); ++ti) {
    const json& t = tensors[ti];
    TensorRef& ref = refs[ti];
    if (t.at("name").get<std::string>() != ref.name ||
        t.at("rows").get<Eigen::Index>() != ref.rows ||
        t.at("cols").get<Eigen::Index>() != ref.cols) {
      throw IoError("corrupted checkpoint " + path + ": tensor " +
                    std::to_string(ti) + " does not match " + ref.name);
    }
    const auto offset = t.at("offset").get<std::size_t>();
    const auto bytes = static_cast<std::size_t>(ref.size()) * 4;
    if (payload_base + offset + bytes > blob.size()) {
      throw IoError("corrupted checkpoint " + path + ": tensor " + ref.name +
                    " extends past end of file");
    }
    for (Eigen::Index i = 0; i < ref.size(); ++i) {
      ref.data[i] = static_cast<double>(
          get_f32(blob, payload_base + offset + static_cast<std::size_t>(i) * 4));
    }
  }
  return ckpt;
}

}  // namespace praim
