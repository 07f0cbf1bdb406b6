#pragma once

#include <filesystem>

#include "csk/signal.hpp"

namespace csk {

/// Reads a mono RIFF/WAVE file holding 16-bit PCM or 32-bit float samples.
/// Samples are returned in [-1, 1] for PCM input. Throws DataError.
RawSignal read_wav(const std::filesystem::path& path);

/// Writes 32-bit float mono WAVE.
void write_wav(const std::filesystem::path& path, const RawSignal& signal);

}  // namespace csk
