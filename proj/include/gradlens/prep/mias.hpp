#pragma once
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradlens::prep {

enum Label : int { kNormal = 0, kBenign = 1, kMalignant = 2 };

const char* label_name(int label);

// Lesion circle in MIAS coordinates: x from the left edge, y from the bottom.
struct Roi {
  int x = 0;
  int y = 0;
  int radius = 0;
  friend bool operator==(const Roi&, const Roi&) = default;
};

struct MammogramRecord {
  std::string id;
  std::string tissue;
  std::string abnormality;  // CALC, CIRC, SPIC, MISC, ARCH, ASYM or NORM
  int label = kNormal;
  std::optional<Roi> roi;
  // Abnormal images without usable coordinates.
  bool annotation_less() const { return label != kNormal && !roi; }
};

class ManifestError : public std::runtime_error {
 public:
  ManifestError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ManifestListing {
  // One entry per image id, in file order. Images with several abnormality
  // rows keep the first row.
  std::vector<MammogramRecord> records;
  int rows = 0;  // data rows read, before merging repeated ids
};

// Parses a MIAS Info.txt listing: "id tissue class [severity x y radius]".
// A leading header row starting with REFNUM, blank lines and "*NOTE*"
// annotations are ignored.
ManifestListing parse_manifest(const std::string& text);
ManifestListing load_manifest(const std::filesystem::path& info_path);

struct UsableSelection {
  std::vector<MammogramRecord> usable;
  std::vector<std::string> annotation_less;  // abnormal ids dropped for lack of ROI
  std::vector<std::string> excluded;         // ids dropped by the exclusion list
};

// Drops annotation-less abnormal images and the configured exclusions.
UsableSelection select_usable(const std::vector<MammogramRecord>& records, const std::set<std::string>& exclusions);

}  // namespace gradlens::prep
