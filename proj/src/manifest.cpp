#include "avsi/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace avsi {

using ordered_json = nlohmann::ordered_json;

std::vector<ManifestRecord> read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("manifest: cannot open '" + path + "'");
  std::vector<ManifestRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    ManifestRecord r;
    try {
      ordered_json j = ordered_json::parse(line);
      r.id = j.at("id").get<std::string>();
      r.wav = j.at("wav").get<std::string>();
      r.phones = j.at("phones").get<std::vector<int>>();
      if (j.contains("landmarks") && !j.at("landmarks").is_null())
        r.landmarks = j.at("landmarks").get<std::string>();
      if (j.contains("gaps") && !j.at("gaps").is_null()) {
        for (const auto& g : j.at("gaps")) {
          if (!g.is_array() || g.size() != 2)
            throw std::runtime_error("malformed gap entry");
          r.gaps.gaps.emplace_back(g[0].get<double>(), g[1].get<double>());
        }
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("manifest: bad record at " + path + ":" +
                               std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("manifest: cannot open '" + path + "' for writing");
  for (const auto& r : records) {
    ordered_json j;
    j["id"] = r.id;
    j["wav"] = r.wav;
    j["phones"] = r.phones;
    if (r.landmarks.empty())
      j["landmarks"] = nullptr;
    else
      j["landmarks"] = r.landmarks;
    ordered_json gaps = ordered_json::array();
    for (const auto& g : r.gaps.gaps) gaps.push_back({g.first, g.second});
    j["gaps"] = gaps;
    os << j.dump() << "\n";
  }
  if (!os) throw std::runtime_error("manifest: write failed for '" + path + "'");
}

std::string resolve_path(const std::string& manifest_path, const std::string& entry) {
  if (entry.empty()) return entry;
  std::filesystem::path p(entry);
  if (p.is_absolute()) return entry;
  return (std::filesystem::path(manifest_path).parent_path() / p).string();
}

}  // namespace avsi
