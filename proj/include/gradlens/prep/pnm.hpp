#pragma once
#include <filesystem>
#include <stdexcept>
#include <string>

#include "gradlens/prep/image.hpp"

namespace gradlens::prep {

class PnmError : public std::runtime_error {
 public:
  enum class Kind { kIo, kUnsupportedMagic, kBadHeader, kMaxval, kShortPayload };
  PnmError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Reads binary (P5) or ASCII (P2) graymaps with maxval <= 255. Samples are
// rescaled to 0..255 when maxval is smaller.
GrayImage load_pgm(const std::filesystem::path& path);
GrayImage parse_pgm(const std::string& bytes);

void save_pgm(const GrayImage& image, const std::filesystem::path& path);
void save_ppm(const RgbImage& image, const std::filesystem::path& path);
std::string encode_pgm(const GrayImage& image);
std::string encode_ppm(const RgbImage& image);

}  // namespace gradlens::prep
