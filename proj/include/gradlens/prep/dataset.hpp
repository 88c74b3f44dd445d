#pragma once
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradlens/nn/trainer.hpp"
#include "gradlens/prep/augment.hpp"
#include "gradlens/prep/enhance.hpp"
#include "gradlens/prep/mias.hpp"
#include "gradlens/prep/sample.hpp"
#include "gradlens/prep/split.hpp"

namespace gradlens::prep {

// Problems with input data: missing files, unreadable images, malformed
// listings, or a dataset directory inconsistent with its manifest.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kSampleMagic = "GRADLENS-S v1";
inline constexpr const char* kManifestFormat = "gradlens-dataset v1";

// Text header (magic, id, label, recipe, shape, mask flag), an empty line,
// little-endian float32 pixels, then the lesion mask bytes when flagged.
void write_sample(const ProcessedSample& sample, const std::filesystem::path& path);
ProcessedSample read_sample(const std::filesystem::path& path);

struct SampleEntry {
  std::string id;
  int label = 0;
  std::string file;  // relative to the dataset directory
};

struct DatasetManifest {
  std::string source;  // "mias" or "synthetic"
  std::uint64_t seed = 0;
  SplitFractions fractions;
  int listed = 0;  // images in the input listing
  std::vector<std::string> annotation_less;
  std::vector<std::string> excluded;
  std::vector<SampleEntry> samples;
  SplitManifest split;
  // Training-set augmentation summary.
  std::size_t train_augmented = 0;
  std::size_t train_duplicates = 0;
  std::size_t train_balanced_per_class = 0;

  std::array<int, 3> class_counts() const;
};

std::string format_manifest(const DatasetManifest& m);
DatasetManifest parse_manifest_text(const std::string& text);

struct Dataset {
  std::filesystem::path dir;
  DatasetManifest manifest;
  std::map<std::string, ProcessedSample> samples;  // base (identity) samples by id

  std::vector<const ProcessedSample*> split(Split s) const;
};

// Writes one sample file per base sample plus "manifest.txt".
void write_dataset(const std::filesystem::path& dir, const DatasetManifest& manifest,
                   const std::vector<ProcessedSample>& samples);
Dataset load_dataset(const std::filesystem::path& dir);

// Split, augmentation and balancing bookkeeping for a set of base samples.
DatasetManifest plan_dataset(const std::string& source, const std::vector<ProcessedSample>& samples,
                             const SplitFractions& fractions, std::uint64_t seed);

// Augmented, deduplicated and class-balanced training set; images are
// generated on demand.
class TrainingSet : public nn::ExampleSource {
 public:
  TrainingSet(std::vector<const ProcessedSample*> bases, std::uint64_t seed);
  std::size_t size() const override { return items_.size(); }
  int label(std::size_t i) const override { return bases_[items_[i].source]->label; }
  Tensor image(std::size_t i) const override;
  std::size_t augmented() const { return augmented_; }
  std::size_t duplicates() const { return duplicates_; }
  std::size_t per_class() const;

 private:
  std::vector<const ProcessedSample*> bases_;
  std::vector<AugmentedRef> items_;
  std::uint64_t seed_;
  std::size_t augmented_ = 0;
  std::size_t duplicates_ = 0;
};

// Base samples used as-is (validation and test).
class SampleSet : public nn::ExampleSource {
 public:
  explicit SampleSet(std::vector<const ProcessedSample*> samples) : samples_(std::move(samples)) {}
  std::size_t size() const override { return samples_.size(); }
  int label(std::size_t i) const override { return samples_[i]->label; }
  Tensor image(std::size_t i) const override { return samples_[i]->image; }
  const ProcessedSample& sample(std::size_t i) const { return *samples_[i]; }

 private:
  std::vector<const ProcessedSample*> samples_;
};

struct PreprocessConfig {
  std::filesystem::path mias_dir;
  std::set<std::string> exclusions;
  SplitFractions fractions;
  ClaheConfig clahe;
  int expected_side = 1024;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Full MIAS pipeline for one image: artifact removal, CLAHE, lesion or
// central crop, 224x224 tensor.
ProcessedSample preprocess_image(const GrayImage& raw, const MammogramRecord& record, const ClaheConfig& clahe);

struct PreprocessResult {
  DatasetManifest manifest;
  std::vector<ProcessedSample> samples;
};

// Reads Info.txt and the PGM files in config.mias_dir.
PreprocessResult preprocess_mias(const PreprocessConfig& config);

}  // namespace gradlens::prep
