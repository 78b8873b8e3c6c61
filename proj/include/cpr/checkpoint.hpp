#pragma once

#include <string>

#include "cpr/trainer.hpp"

namespace cpr {

// Checkpoint = checkpoint.bin (named float64 arrays, little-endian, back to
// back) + checkpoint.json (manifest: array table, training state, rng stream,
// resolved config). Arrays cover all parameters and optimizer velocities.
void save_checkpoint(const std::string& dir, Trainer& trainer, const std::string& config_json);

// Reads the embedded config back out of a manifest.
std::string checkpoint_config_json(const std::string& dir);

// Restores parameters, velocities, thresholds, iteration and rng into a
// trainer built from the same config and data.
void restore_checkpoint(const std::string& dir, Trainer& trainer);

}  // namespace cpr
