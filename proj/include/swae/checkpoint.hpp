#pragma once

#include <string>

#include "swae/trainer.hpp"

namespace swae {

/// Binary checkpoint: magic "SWAE" + version byte 1, a length-prefixed and
/// checksummed JSON manifest (config, vocab, counters, rng state, array
/// table), then the raw little-endian float64 payload. Bit-exact round trip
/// by construction; any corruption fails the checksum or a size check.
void save_checkpoint(const std::string& path, const TrainState& state);

/// Reconstructs the full training state. Throws on unknown magic/version,
/// truncation, checksum mismatch, or a manifest/model shape disagreement.
TrainState load_checkpoint(const std::string& path);

} // namespace swae
