#include "gradlens/prep/mias.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

namespace gradlens::prep {
namespace {

bool parse_int(const std::string& s, int& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

}  // namespace

const char* label_name(int label) {
  switch (label) {
    case kNormal:
      return "normal";
    case kBenign:
      return "benign";
    case kMalignant:
      return "malignant";
  }
  return "unknown";
}

ManifestListing parse_manifest(const std::string& text) {
  ManifestListing out;
  std::unordered_set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) {
      if (t.front() == '*') break;  // "*NOTE 3*" and similar trailing remarks
      tok.push_back(t);
    }
    if (tok.empty()) continue;
    if (tok[0] == "REFNUM") continue;
    if (tok.size() < 3) throw ManifestError(line_no, "expected at least id, tissue and class");
    if (tok.size() > 7) throw ManifestError(line_no, "too many fields");
    MammogramRecord rec;
    rec.id = tok[0];
    rec.tissue = tok[1];
    rec.abnormality = tok[2];
    if (rec.abnormality == "NORM") {
      if (tok.size() != 3) throw ManifestError(line_no, "normal image with severity or coordinates");
      rec.label = kNormal;
    } else {
      if (tok.size() < 4) throw ManifestError(line_no, "abnormal image without severity");
      if (tok[3] == "B") {
        rec.label = kBenign;
      } else if (tok[3] == "M") {
        rec.label = kMalignant;
      } else {
        throw ManifestError(line_no, "unknown severity '" + tok[3] + "'");
      }
      if (tok.size() == 7) {
        Roi roi;
        if (!parse_int(tok[4], roi.x) || !parse_int(tok[5], roi.y) || !parse_int(tok[6], roi.radius)) {
          throw ManifestError(line_no, "non-integer ROI coordinates");
        }
        if (roi.radius <= 0) throw ManifestError(line_no, "ROI radius must be positive");
        rec.roi = roi;
      } else if (tok.size() != 4) {
        throw ManifestError(line_no, "incomplete ROI coordinates");
      }
    }
    ++out.rows;
    if (seen.insert(rec.id).second) out.records.push_back(std::move(rec));
  }
  return out;
}

ManifestListing load_manifest(const std::filesystem::path& info_path) {
  std::ifstream in(info_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest " + info_path.string());
  return parse_manifest(std::string(std::istreambuf_iterator<char>(in), {}));
}

UsableSelection select_usable(const std::vector<MammogramRecord>& records, const std::set<std::string>& exclusions) {
  UsableSelection s;
  for (const auto& r : records) {
    if (r.annotation_less()) {
      s.annotation_less.push_back(r.id);
    } else if (exclusions.contains(r.id)) {
      s.excluded.push_back(r.id);
    } else {
      s.usable.push_back(r);
    }
  }
  return s;
}

}  // namespace gradlens::prep
