#include "cpr/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cpr/error.hpp"

namespace cpr {

namespace {

using ordered_json = nlohmann::ordered_json;

struct NamedArray {
  std::string name;
  Tensor* tensor;
};

std::vector<NamedArray> named_arrays(Trainer& trainer) {
  std::vector<NamedArray> arrays;
  auto& layers = trainer.extractor().layers();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    arrays.push_back({"extractor.layer" + std::to_string(li) + ".weight",
                      &layers[li].weight.value});
    arrays.push_back({"extractor.layer" + std::to_string(li) + ".bias", &layers[li].bias.value});
  }
  arrays.push_back({"model.prototypes", &trainer.model().prototypes().value});
  arrays.push_back({"model.reciprocals", &trainer.model().reciprocals().value});
  arrays.push_back({"model.margin", &trainer.model().margin().value});
  auto& vel = trainer.optimizer().velocities();
  for (std::size_t i = 0; i < vel.size(); ++i) {
    arrays.push_back({"optim.velocity" + std::to_string(i), &vel[i]});
  }
  return arrays;
}

}  // namespace

void save_checkpoint(const std::string& dir, Trainer& trainer, const std::string& config_json) {
  std::filesystem::create_directories(dir);
  const std::vector<NamedArray> arrays = named_arrays(trainer);

  std::ofstream bin(dir + "/checkpoint.bin", std::ios::binary);
  if (!bin) throw ParseError(dir + "/checkpoint.bin: cannot open for writing");
  ordered_json manifest;
  manifest["format"] = "cpr-checkpoint-v1";
  ordered_json table = ordered_json::array();
  std::size_t offset = 0;
  for (const NamedArray& a : arrays) {
    ordered_json entry;
    entry["name"] = a.name;
    entry["shape"] = a.tensor->shape();
    entry["offset"] = offset;
    table.push_back(std::move(entry));
    bin.write(reinterpret_cast<const char*>(a.tensor->data()),
              static_cast<std::streamsize>(a.tensor->size() * sizeof(double)));
    offset += a.tensor->size();
  }
  manifest["arrays"] = std::move(table);
  manifest["train_state"] = {{"iter", trainer.iter()},
                             {"rho_c", trainer.thresholds().rho_c},
                             {"rho_o", trainer.thresholds().rho_o},
                             {"rng", trainer.loop_rng().save_state()}};
  manifest["config"] = ordered_json::parse(config_json);

  std::ofstream meta(dir + "/checkpoint.json");
  if (!meta) throw ParseError(dir + "/checkpoint.json: cannot open for writing");
  meta << manifest.dump(2) << "\n";
}

std::string checkpoint_config_json(const std::string& dir) {
  std::ifstream meta(dir + "/checkpoint.json");
  if (!meta) throw ParseError(dir + "/checkpoint.json: cannot open");
  std::stringstream ss;
  ss << meta.rdbuf();
  const auto manifest = ordered_json::parse(ss.str());
  return manifest.at("config").dump(2);
}

void restore_checkpoint(const std::string& dir, Trainer& trainer) {
  std::ifstream meta(dir + "/checkpoint.json");
  if (!meta) throw ParseError(dir + "/checkpoint.json: cannot open");
  std::stringstream ss;
  ss << meta.rdbuf();
  const auto manifest = ordered_json::parse(ss.str());
  if (manifest.value("format", "") != "cpr-checkpoint-v1") {
    throw ParseError(dir + ": unknown checkpoint format");
  }

  std::ifstream bin(dir + "/checkpoint.bin", std::ios::binary);
  if (!bin) throw ParseError(dir + "/checkpoint.bin: cannot open");

  const std::vector<NamedArray> arrays = named_arrays(trainer);
  const auto& table = manifest.at("arrays");
  if (table.size() != arrays.size()) {
    throw ParseError(dir + ": checkpoint array count does not match the model");
  }
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    const auto& entry = table[i];
    if (entry.at("name").get<std::string>() != arrays[i].name) {
      throw ParseError(dir + ": checkpoint array order mismatch at " + arrays[i].name);
    }
    const std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
    if (shape != arrays[i].tensor->shape()) {
      throw ParseError(dir + ": shape mismatch for " + arrays[i].name);
    }
    bin.seekg(static_cast<std::streamoff>(entry.at("offset").get<std::size_t>() *
                                          sizeof(double)));
    bin.read(reinterpret_cast<char*>(arrays[i].tensor->data()),
             static_cast<std::streamsize>(arrays[i].tensor->size() * sizeof(double)));
    if (!bin) throw ParseError(dir + ": checkpoint binary truncated at " + arrays[i].name);
  }

  const auto& state = manifest.at("train_state");
  trainer.set_iter(state.at("iter").get<int>());
  trainer.thresholds().rho_c = state.at("rho_c").get<double>();
  trainer.thresholds().rho_o = state.at("rho_o").get<double>();
  trainer.loop_rng().load_state(state.at("rng").get<std::string>());
}

}  // namespace cpr
