// RIFF PCM wav read/write: mono, 16-bit little-endian. Inputs at other
// sample rates are resampled to 16 kHz on read.
#ifndef AVSI_WAV_HPP
#define AVSI_WAV_HPP

#include <string>

#include "avsi/types.hpp"

namespace avsi {

Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& w);

}  // namespace avsi

#endif  // AVSI_WAV_HPP
