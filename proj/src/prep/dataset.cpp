#include "gradlens/prep/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gradlens/binary_io.hpp"
#include "gradlens/parallel.hpp"
#include "gradlens/prep/pnm.hpp"
#include "gradlens/prep/roi.hpp"
#include "gradlens/text.hpp"

namespace gradlens::prep {
namespace {

template <typename T>
T parse_number(const std::string& s, const std::string& what) {
  T v{};
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw DataError("invalid " + what + " '" + s + "'");
  return v;
}

Recipe parse_recipe(const std::string& s) {
  for (int i = 0; i < kRecipeCount; ++i) {
    if (Recipe::from_index(i).describe() == s) return Recipe::from_index(i);
  }
  throw DataError("unknown recipe '" + s + "'");
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string counts_line(const std::array<int, 3>& c) {
  return std::to_string(c[0]) + " " + std::to_string(c[1]) + " " + std::to_string(c[2]);
}

const char* kSplitKeys[3] = {"train", "validation", "test"};

}  // namespace

void write_sample(const ProcessedSample& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write sample " + path.string());
  if (s.image.rank() != 3) throw std::invalid_argument("sample image must be rank 3");
  out << kSampleMagic << "\n"
      << "id: " << s.id << "\n"
      << "label: " << s.label << "\n"
      << "recipe: " << s.recipe.describe() << "\n"
      << "shape: " << s.image.dim(0) << " " << s.image.dim(1) << " " << s.image.dim(2) << "\n"
      << "mask: " << (s.has_lesion() ? 1 : 0) << "\n\n";
  write_f32le(out, s.image.values());
  if (s.has_lesion()) {
    out.write(reinterpret_cast<const char*>(s.lesion_mask.data()), static_cast<std::streamsize>(s.lesion_mask.size()));
  }
  if (!out) throw DataError("failed writing sample " + path.string());
}

ProcessedSample read_sample(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open sample " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSampleMagic) throw DataError("bad magic in sample " + path.string());
  std::string header;
  while (std::getline(in, line) && !line.empty()) header += line + "\n";
  if (!in) throw DataError("sample header not terminated in " + path.string());
  ProcessedSample s;
  std::vector<int> shape;
  bool mask = false;
  try {
    for (const auto& [k, v] : parse_key_values(header, ':')) {
      if (k == "id") {
        s.id = v;
      } else if (k == "label") {
        s.label = parse_number<int>(v, "label");
      } else if (k == "recipe") {
        s.recipe = parse_recipe(v);
      } else if (k == "shape") {
        for (const auto& w : split_words(v)) shape.push_back(parse_number<int>(w, "shape"));
      } else if (k == "mask") {
        mask = v == "1";
      }
    }
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (shape.size() != 3 || shape[0] <= 0 || shape[1] <= 0 || shape[2] <= 0) {
    throw DataError("sample " + path.string() + " has no valid shape");
  }
  s.image = Tensor(shape);
  if (!read_f32le(in, s.image.values())) throw DataError("sample " + path.string() + " is truncated");
  if (mask) {
    s.lesion_mask.resize(static_cast<std::size_t>(shape[0]) * shape[1]);
    in.read(reinterpret_cast<char*>(s.lesion_mask.data()), static_cast<std::streamsize>(s.lesion_mask.size()));
    if (static_cast<std::size_t>(in.gcount()) != s.lesion_mask.size()) {
      throw DataError("sample " + path.string() + " mask is truncated");
    }
  }
  return s;
}

std::array<int, 3> DatasetManifest::class_counts() const {
  std::array<int, 3> c{};
  for (const auto& e : samples) {
    if (e.label >= 0 && e.label < 3) ++c[e.label];
  }
  return c;
}

std::string format_manifest(const DatasetManifest& m) {
  std::ostringstream o;
  o << "format: " << kManifestFormat << "\n";
  o << "source: " << m.source << "\n";
  o << "seed: " << m.seed << "\n";
  o << "fractions: " << format_double(m.fractions.train) << " " << format_double(m.fractions.validation) << " "
    << format_double(m.fractions.test) << "\n";
  o << "listed: " << m.listed << "\n";
  o << "annotation_less: " << join(m.annotation_less, ",") << "\n";
  o << "excluded: " << join(m.excluded, ",") << "\n";
  o << "usable: " << m.samples.size() << "\n";
  o << "class_counts: " << counts_line(m.class_counts()) << "\n";
  for (int s = 0; s < 3; ++s) o << kSplitKeys[s] << "_counts: " << counts_line(m.split.class_counts[s]) << "\n";
  o << "train_augmented: " << m.train_augmented << "\n";
  o << "train_duplicates: " << m.train_duplicates << "\n";
  o << "train_balanced_per_class: " << m.train_balanced_per_class << "\n";
  for (int s = 0; s < 3; ++s) o << kSplitKeys[s] << ": " << join(m.split.ids[s], " ") << "\n";
  for (const auto& e : m.samples) o << "sample: " << e.id << " " << e.label << " " << e.file << "\n";
  return o.str();
}

DatasetManifest parse_manifest_text(const std::string& text) {
  DatasetManifest m;
  KeyValues kv;
  try {
    kv = parse_key_values(text, ':');
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
  bool format_ok = false;
  const auto list = [](const std::string& v) {
    std::vector<std::string> out;
    for (auto& s : split(v, ',')) {
      if (!s.empty()) out.push_back(s);
    }
    return out;
  };
  const auto counts = [](const std::string& v) {
    std::array<int, 3> c{};
    const auto w = split_words(v);
    if (w.size() != 3) throw DataError("manifest: expected three class counts");
    for (int i = 0; i < 3; ++i) c[i] = parse_number<int>(w[i], "class count");
    return c;
  };
  for (const auto& [k, v] : kv) {
    if (k == "format") {
      format_ok = v == kManifestFormat;
    } else if (k == "source") {
      m.source = v;
    } else if (k == "seed") {
      m.seed = parse_number<std::uint64_t>(v, "seed");
    } else if (k == "fractions") {
      const auto w = split_words(v);
      if (w.size() != 3) throw DataError("manifest: expected three split fractions");
      m.fractions = {std::stod(w[0]), std::stod(w[1]), std::stod(w[2])};
    } else if (k == "listed") {
      m.listed = parse_number<int>(v, "listed");
    } else if (k == "annotation_less") {
      m.annotation_less = list(v);
    } else if (k == "excluded") {
      m.excluded = list(v);
    } else if (k == "train_augmented") {
      m.train_augmented = parse_number<std::size_t>(v, "train_augmented");
    } else if (k == "train_duplicates") {
      m.train_duplicates = parse_number<std::size_t>(v, "train_duplicates");
    } else if (k == "train_balanced_per_class") {
      m.train_balanced_per_class = parse_number<std::size_t>(v, "train_balanced_per_class");
    } else if (k == "sample") {
      const auto w = split_words(v);
      if (w.size() != 3) throw DataError("manifest: malformed sample line '" + v + "'");
      m.samples.push_back({w[0], parse_number<int>(w[1], "label"), w[2]});
    } else {
      for (int s = 0; s < 3; ++s) {
        if (k == kSplitKeys[s]) m.split.ids[s] = split_words(v);
        if (k == std::string(kSplitKeys[s]) + "_counts") m.split.class_counts[s] = counts(v);
      }
    }
  }
  if (!format_ok) throw DataError("manifest: missing or unsupported format line");
  m.split.seed = m.seed;
  return m;
}

std::vector<const ProcessedSample*> Dataset::split(Split s) const {
  std::vector<const ProcessedSample*> out;
  for (const auto& id : manifest.split.of(s)) {
    auto it = samples.find(id);
    if (it == samples.end()) throw DataError("split lists unknown sample '" + id + "'");
    out.push_back(&it->second);
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const DatasetManifest& manifest,
                   const std::vector<ProcessedSample>& samples) {
  std::filesystem::create_directories(dir / "samples");
  for (const auto& s : samples) write_sample(s, dir / "samples" / (s.id + ".sample"));
  write_text_file((dir / "manifest.txt").string(), format_manifest(manifest));
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset d;
  d.dir = dir;
  const auto manifest_path = dir / "manifest.txt";
  if (!std::filesystem::exists(manifest_path)) throw DataError("no manifest.txt in " + dir.string());
  d.manifest = parse_manifest_text(read_text_file(manifest_path.string()));
  for (const auto& e : d.manifest.samples) {
    ProcessedSample s = read_sample(dir / e.file);
    if (s.id != e.id || s.label != e.label) {
      throw DataError("sample file " + e.file + " does not match its manifest entry");
    }
    d.samples.emplace(e.id, std::move(s));
  }
  for (int s = 0; s < 3; ++s) d.split(static_cast<Split>(s));
  return d;
}

TrainingSet::TrainingSet(std::vector<const ProcessedSample*> bases, std::uint64_t seed)
    : bases_(std::move(bases)), seed_(seed) {
  std::vector<ProcessedSample> copies;
  copies.reserve(bases_.size());
  for (const auto* b : bases_) copies.push_back(*b);
  const AugmentedSet set = augment_dataset(copies, seed);
  augmented_ = set.items.size();
  duplicates_ = set.duplicates;
  std::vector<int> labels;
  labels.reserve(set.items.size());
  for (const auto& it : set.items) labels.push_back(bases_[it.source]->label);
  for (std::size_t i : balance_classes(labels, seed)) items_.push_back(set.items[i]);
}

Tensor TrainingSet::image(std::size_t i) const {
  const AugmentedRef& r = items_[i];
  return apply_recipe(*bases_[r.source], r.recipe, seed_).image;
}

std::size_t TrainingSet::per_class() const { return items_.size() / 3; }

DatasetManifest plan_dataset(const std::string& source, const std::vector<ProcessedSample>& samples,
                             const SplitFractions& fractions, std::uint64_t seed) {
  DatasetManifest m;
  m.source = source;
  m.seed = seed;
  m.fractions = fractions;
  std::vector<LabeledId> items;
  std::map<std::string, const ProcessedSample*> by_id;
  for (const auto& s : samples) {
    items.push_back({s.id, s.label});
    by_id[s.id] = &s;
    m.samples.push_back({s.id, s.label, "samples/" + s.id + ".sample"});
  }
  m.split = stratified_split(items, fractions, derive_seed(seed, "preprocess"));
  m.split.seed = seed;
  std::vector<const ProcessedSample*> train;
  for (const auto& id : m.split.of(Split::kTrain)) train.push_back(by_id.at(id));
  const TrainingSet ts(train, seed);
  m.train_augmented = ts.augmented();
  m.train_duplicates = ts.duplicates();
  m.train_balanced_per_class = ts.per_class();
  return m;
}

ProcessedSample preprocess_image(const GrayImage& raw, const MammogramRecord& record, const ClaheConfig& clahe_cfg) {
  const ArtifactRemoval ar = remove_artifacts(raw);
  const GrayImage enhanced = clahe(ar.cleaned, clahe_cfg);
  Crop crop;
  if (record.label == kNormal) {
    crop = central_crop_normal(enhanced, ar.mask);
  } else {
    if (!record.roi) throw DataError(record.id + ": abnormal image without ROI");
    crop = extract_roi(enhanced, *record.roi);
  }
  ProcessedSample s;
  s.id = record.id;
  s.label = record.label;
  s.image = to_tensor(crop.image);
  s.lesion_mask = std::move(crop.lesion);
  return s;
}

PreprocessResult preprocess_mias(const PreprocessConfig& config) {
  const auto info = config.mias_dir / "Info.txt";
  if (!std::filesystem::exists(info)) throw DataError("missing Info.txt in " + config.mias_dir.string());
  ManifestListing listing;
  try {
    listing = load_manifest(info);
  } catch (const ManifestError& e) {
    throw DataError("Info.txt " + std::string(e.what()));
  }
  if (listing.records.empty()) throw DataError("Info.txt lists no images");
  const UsableSelection sel = select_usable(listing.records, config.exclusions);

  PreprocessResult r;
  r.samples.resize(sel.usable.size());
  parallel_for(sel.usable.size(), config.jobs, [&](std::size_t i) {
    const auto& rec = sel.usable[i];
    const auto path = config.mias_dir / (rec.id + ".pgm");
    GrayImage raw;
    try {
      raw = load_pgm(path);
    } catch (const PnmError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
    if (raw.width != config.expected_side || raw.height != config.expected_side) {
      throw DataError(path.string() + ": expected " + std::to_string(config.expected_side) + "x" +
                      std::to_string(config.expected_side) + " pixels");
    }
    try {
      r.samples[i] = preprocess_image(raw, rec, config.clahe);
    } catch (const std::invalid_argument& e) {
      throw DataError(rec.id + ": " + e.what());
    }
  });
  std::sort(r.samples.begin(), r.samples.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  r.manifest = plan_dataset("mias", r.samples, config.fractions, config.seed);
  r.manifest.listed = static_cast<int>(listing.records.size());
  r.manifest.annotation_less = sel.annotation_less;
  r.manifest.excluded = sel.excluded;
  return r;
}

}  // namespace gradlens::prep
