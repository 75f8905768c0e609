#pragma once

#include "annorank/baselines.hpp"
#include "annorank/ranksvm.hpp"
#include "annorank/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace annorank {

struct LoadOptions {
  int max_candidates = 100;
  /// Treat box coordinates in the file as inclusive pixel indices and convert
  /// to half-open by adding 1 to the max coordinates.
  bool voc_inclusive_boxes = false;
  /// Drop ground-truth boxes flagged difficult at load time. Off by default
  /// so that save(load(x)) is the identity; evaluation skips difficult boxes
  /// through AnnotatedImage::usable_ground_truth regardless.
  bool exclude_difficult = false;
};

/// JSONL dataset: one image object per line.
std::vector<AnnotatedImage> load_dataset(const std::filesystem::path& path,
                                         const LoadOptions& options = {});
void save_dataset(const std::vector<AnnotatedImage>& images,
                  const std::filesystem::path& path);

struct VocObject {
  std::string name;
  BBox box;  // half-open after conversion
  bool difficult = false;
};

struct VocAnnotation {
  std::string filename;
  int width = 0;
  int height = 0;
  std::vector<VocObject> objects;
};

/// Pascal VOC annotation XML. Box coordinates in the file are inclusive pixel
/// indices; xmax and ymax gain +1 on conversion to the half-open convention.
VocAnnotation parse_voc_annotation(const std::filesystem::path& path);

using AnyModel = std::variant<RankModel, BinaryModel>;

void save_model(const RankModel& model, const std::filesystem::path& path);
void save_model(const BinaryModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);
RankModel load_rank_model(const std::filesystem::path& path);
BinaryModel load_binary_model(const std::filesystem::path& path);

void save_results(const std::vector<AnnotationResult>& results,
                  const std::filesystem::path& path);
std::vector<AnnotationResult> load_results(const std::filesystem::path& path);

/// Candidate overlap profile for the generator.
struct OverlapProfile {
  double zero_fraction = 0.4;  // candidates with no overlap at all
  double min_iou = 0.05;
  double max_iou = 0.9;
};

struct SynthConfig {
  int n_images = 50;
  int candidates_per_image = 20;
  int dim = 50;
  double noise_sigma = 0.05;
  OverlapProfile profile;
  /// 0 makes every candidate histogram a scaled copy of the object histogram;
  /// 1 mixes in fully distinct background content.
  double hidden_signal_strength = 1.0;
  std::uint64_t seed = 0;
  int n_classes = 4;
};

/// Ground truth the generator intended, for oracle tests.
struct OracleRecord {
  std::string image_id;
  std::vector<double> ious;
  std::vector<double> distances;
  std::vector<int> intended_ranks;
  int best_index = 0;
};

struct SynthDataset {
  std::vector<AnnotatedImage> images;
  std::vector<OracleRecord> oracle;
};

SynthDataset synth_generate(const SynthConfig& config);

void save_oracle(const std::vector<OracleRecord>& records,
                 const std::filesystem::path& path);
std::vector<OracleRecord> load_oracle(const std::filesystem::path& path);

}  // namespace annorank
