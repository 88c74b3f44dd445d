#include "gradlens/prep/pnm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>

namespace gradlens::prep {
namespace {

using Kind = PnmError::Kind;

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : b_(bytes) {}

  // Next whitespace-delimited token, skipping '#' comments.
  std::string token() {
    for (;;) {
      while (pos_ < b_.size() && std::isspace(static_cast<unsigned char>(b_[pos_]))) ++pos_;
      if (pos_ < b_.size() && b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n' && b_[pos_] != '\r') ++pos_;
        continue;
      }
      break;
    }
    const std::size_t start = pos_;
    while (pos_ < b_.size() && !std::isspace(static_cast<unsigned char>(b_[pos_])) && b_[pos_] != '#') ++pos_;
    return b_.substr(start, pos_ - start);
  }

  int number(const char* what) {
    const std::string t = token();
    if (t.empty()) throw PnmError(Kind::kBadHeader, std::string("missing ") + what);
    long v = 0;
    for (char c : t) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        throw PnmError(Kind::kBadHeader, std::string("invalid ") + what + " '" + t + "'");
      }
      v = v * 10 + (c - '0');
      if (v > 1'000'000) throw PnmError(Kind::kBadHeader, std::string(what) + " too large");
    }
    return static_cast<int>(v);
  }

  // Binary payload starts after exactly one whitespace byte.
  std::size_t payload_start() const { return pos_ + 1; }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PnmError(Kind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_all(const std::string& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PnmError(Kind::kIo, "cannot write " + path.string());
  out << bytes;
  if (!out) throw PnmError(Kind::kIo, "failed writing " + path.string());
}

std::uint8_t rescale(int v, int maxval) {
  if (maxval == 255) return static_cast<std::uint8_t>(v);
  return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
}

}  // namespace

GrayImage parse_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
    throw PnmError(Kind::kUnsupportedMagic, "unsupported magic '" + bytes.substr(0, 2) + "'");
  }
  const bool binary = bytes[1] == '5';
  HeaderReader r(bytes);
  r.token();
  const int w = r.number("width");
  const int h = r.number("height");
  const int maxval = r.number("maxval");
  if (w <= 0 || h <= 0) throw PnmError(Kind::kBadHeader, "image dimensions must be positive");
  if (maxval <= 0 || maxval > 255) {
    throw PnmError(Kind::kMaxval, "maxval " + std::to_string(maxval) + " outside 1..255");
  }
  GrayImage img(w, h);
  const std::size_t n = img.pixels.size();
  if (binary) {
    const std::size_t start = r.payload_start();
    if (start > bytes.size() || bytes.size() - start < n) {
      throw PnmError(Kind::kShortPayload, "pixel payload has " +
                                              std::to_string(start > bytes.size() ? 0 : bytes.size() - start) +
                                              " bytes, expected " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int v = static_cast<unsigned char>(bytes[start + i]);
      if (v > maxval) throw PnmError(Kind::kBadHeader, "sample exceeds maxval");
      img.pixels[i] = rescale(v, maxval);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::string t = r.token();
      if (t.empty()) throw PnmError(Kind::kShortPayload, "ASCII payload ends after " + std::to_string(i) + " samples");
      int v = 0;
      for (char c : t) {
        if (!std::isdigit(static_cast<unsigned char>(c)) || v > 65535) {
          throw PnmError(Kind::kBadHeader, "invalid sample '" + t + "'");
        }
        v = v * 10 + (c - '0');
      }
      if (v > maxval) throw PnmError(Kind::kBadHeader, "sample exceeds maxval");
      img.pixels[i] = rescale(v, maxval);
    }
  }
  return img;
}

GrayImage load_pgm(const std::filesystem::path& path) { return parse_pgm(read_all(path)); }

std::string encode_pgm(const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(image.pixels.begin(), image.pixels.end());
  return out;
}

std::string encode_ppm(const RgbImage& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(image.rgb.begin(), image.rgb.end());
  return out;
}

void save_pgm(const GrayImage& image, const std::filesystem::path& path) { write_all(encode_pgm(image), path); }
void save_ppm(const RgbImage& image, const std::filesystem::path& path) { write_all(encode_ppm(image), path); }

}  // namespace gradlens::prep
