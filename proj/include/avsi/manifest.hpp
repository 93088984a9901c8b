// Dataset manifest: JSON-lines, one record per utterance carrying the wav
// path, phone label indices, an optional landmark CSV path and the sampled
// gap plan. Paths are stored as written (normally relative to the manifest).
#ifndef AVSI_MANIFEST_HPP
#define AVSI_MANIFEST_HPP

#include <string>
#include <vector>

#include "avsi/corruption.hpp"

namespace avsi {

struct ManifestRecord {
  std::string id;
  std::string wav;
  std::vector<int> phones;
  std::string landmarks;  // empty means null (no visual track)
  GapPlan gaps;
};

std::vector<ManifestRecord> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records);

// Resolve a manifest-relative path against the manifest's directory.
std::string resolve_path(const std::string& manifest_path, const std::string& entry);

}  // namespace avsi

#endif  // AVSI_MANIFEST_HPP
