#include "annorank/dataio.hpp"

#include "annorank/errors.hpp"

#include "json.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace annorank {

namespace {

// std::map-backed json keeps keys sorted, so equal values serialize to equal
// bytes; doubles print in shortest round-trip form.
using nlohmann::json;

json box_to_json(const BBox& box) {
  return json::array({box.x1, box.y1, box.x2, box.y2});
}

BBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw ParseError("box must be an array [x1, y1, x2, y2]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// Dense array, or sparse {"dim": D, "entries": [[index, value], ...]}.
Vector vector_from_json(const json& j) {
  if (j.is_array()) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
  }
  if (j.is_object() && j.contains("dim") && j.contains("entries")) {
    Vector v = Vector::Zero(j.at("dim").get<Eigen::Index>());
    for (const json& entry : j.at("entries")) {
      if (!entry.is_array() || entry.size() != 2) {
        throw ParseError("sparse histogram entries must be [index, value]");
      }
      const Eigen::Index idx = entry[0].get<Eigen::Index>();
      if (idx < 0 || idx >= v.size()) {
        throw ParseError("sparse histogram index out of range");
      }
      v[idx] = entry[1].get<double>();
    }
    return v;
  }
  throw ParseError("histogram must be a dense array or {dim, entries}");
}

void check_box(const BBox& box, const AnnotatedImage& image,
               const char* what) {
  if (!box.valid()) {
    throw ValidationError("image '" + image.image_id + "': " + what +
                          " is degenerate or non-finite");
  }
  if (box.x1 < 0.0 || box.y1 < 0.0 || box.x2 > image.width ||
      box.y2 > image.height) {
    throw ValidationError("image '" + image.image_id + "': " + what +
                          " exceeds the image bounds");
  }
}

void check_histogram(const Vector& h, const AnnotatedImage& image,
                     const char* what) {
  double mass = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (!std::isfinite(h[i]) || h[i] < 0.0) {
      throw ValidationError("image '" + image.image_id + "': " + what +
                            " has a negative or non-finite entry");
    }
    mass += h[i];
  }
  if (mass <= 0.0) {
    throw ValidationError("image '" + image.image_id + "': " + what +
                          " has zero L1 mass");
  }
}

AnnotatedImage image_from_json(const json& j, const LoadOptions& options) {
  for (const char* field : {"image_id", "class_label", "width", "height",
                            "candidates"}) {
    if (!j.contains(field)) {
      throw ParseError(std::string("record lacks required field '") + field +
                       "'");
    }
  }
  AnnotatedImage image;
  image.image_id = j.at("image_id").get<std::string>();
  image.class_label = j.at("class_label").get<std::string>();
  image.width = j.at("width").get<int>();
  image.height = j.at("height").get<int>();
  if (image.width < 1 || image.height < 1) {
    throw ValidationError("image '" + image.image_id +
                          "': width and height must be positive");
  }

  const double shift = options.voc_inclusive_boxes ? 1.0 : 0.0;
  for (const json& jc : j.at("candidates")) {
    Candidate cand;
    cand.box = box_from_json(jc.at("box"));
    cand.box.x2 += shift;
    cand.box.y2 += shift;
    if (jc.contains("objectness")) {
      cand.objectness = jc.at("objectness").get<double>();
      if (!std::isfinite(*cand.objectness)) {
        throw ValidationError("image '" + image.image_id +
                              "': objectness is not finite");
      }
    }
    cand.histogram = vector_from_json(jc.at("histogram"));
    image.candidates.push_back(std::move(cand));
  }
  if (image.candidates.empty()) {
    throw ValidationError("image '" + image.image_id + "' has no candidates");
  }
  if (static_cast<int>(image.candidates.size()) > options.max_candidates) {
    throw ValidationError("image '" + image.image_id + "' has " +
                          std::to_string(image.candidates.size()) +
                          " candidates, more than the limit of " +
                          std::to_string(options.max_candidates));
  }

  if (j.contains("ground_truth")) {
    for (const json& jb : j.at("ground_truth")) {
      BBox box = box_from_json(jb);
      box.x2 += shift;
      box.y2 += shift;
      image.ground_truth.push_back(box);
    }
  }
  if (j.contains("difficult")) {
    for (const json& jd : j.at("difficult")) {
      image.difficult.push_back(jd.get<bool>());
    }
    if (image.difficult.size() != image.ground_truth.size()) {
      throw ValidationError("image '" + image.image_id +
                            "': difficult flags do not match the "
                            "ground-truth boxes");
    }
  } else {
    image.difficult.assign(image.ground_truth.size(), false);
  }
  if (j.contains("gt_histogram")) {
    image.gt_histogram = vector_from_json(j.at("gt_histogram"));
  }

  if (options.exclude_difficult) {
    std::vector<BBox> kept;
    for (std::size_t i = 0; i < image.ground_truth.size(); ++i) {
      if (!image.difficult[i]) kept.push_back(image.ground_truth[i]);
    }
    image.ground_truth = std::move(kept);
    image.difficult.assign(image.ground_truth.size(), false);
  }

  const Eigen::Index dim = image.candidates.front().histogram.size();
  for (const Candidate& cand : image.candidates) {
    check_box(cand.box, image, "candidate box");
    if (cand.histogram.size() != dim) {
      throw DimensionMismatchError(
          "image '" + image.image_id + "': candidate histogram dimensions " +
          std::to_string(dim) + " vs " +
          std::to_string(cand.histogram.size()));
    }
    check_histogram(cand.histogram, image, "candidate histogram");
  }
  for (const BBox& box : image.ground_truth) {
    check_box(box, image, "ground-truth box");
  }
  if (image.gt_histogram) {
    if (image.gt_histogram->size() != dim) {
      throw DimensionMismatchError(
          "image '" + image.image_id + "': ground-truth histogram dimension " +
          std::to_string(image.gt_histogram->size()) + " vs candidate " +
          std::to_string(dim));
    }
    check_histogram(*image.gt_histogram, image, "ground-truth histogram");
  }
  return image;
}

json image_to_json(const AnnotatedImage& image) {
  json j;
  j["image_id"] = image.image_id;
  j["class_label"] = image.class_label;
  j["width"] = image.width;
  j["height"] = image.height;
  json candidates = json::array();
  for (const Candidate& cand : image.candidates) {
    json jc;
    jc["box"] = box_to_json(cand.box);
    if (cand.objectness) jc["objectness"] = *cand.objectness;
    jc["histogram"] = vector_to_json(cand.histogram);
    candidates.push_back(std::move(jc));
  }
  j["candidates"] = std::move(candidates);
  json gts = json::array();
  for (const BBox& box : image.ground_truth) gts.push_back(box_to_json(box));
  j["ground_truth"] = std::move(gts);
  j["difficult"] = image.difficult;
  if (image.gt_histogram) {
    j["gt_histogram"] = vector_to_json(*image.gt_histogram);
  }
  return j;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write '" + path.string() + "'");
  }
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open '" + path.string() + "'");
  }
  return in;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

json parse_line(const std::string& line, std::size_t line_number) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_number) + ": " + e.what());
  }
}

}  // namespace

std::vector<AnnotatedImage> load_dataset(const std::filesystem::path& path,
                                         const LoadOptions& options) {
  std::ifstream in = open_for_read(path);
  std::vector<AnnotatedImage> images;
  std::string line;
  std::size_t line_number = 0;
  Eigen::Index dim = -1;
  while (std::getline(in, line)) {
    ++line_number;
    if (blank(line)) continue;
    const json j = parse_line(line, line_number);
    AnnotatedImage image;
    try {
      image = image_from_json(j, options);
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_number) + ": " +
                       e.what());
    }
    const Eigen::Index image_dim = image.candidates.front().histogram.size();
    if (dim < 0) {
      dim = image_dim;
    } else if (image_dim != dim) {
      throw DimensionMismatchError("image '" + image.image_id +
                                   "': histogram dimensions " +
                                   std::to_string(dim) + " vs " +
                                   std::to_string(image_dim));
    }
    images.push_back(std::move(image));
  }
  return images;
}

void save_dataset(const std::vector<AnnotatedImage>& images,
                  const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  for (const AnnotatedImage& image : images) {
    out << image_to_json(image).dump() << '\n';
  }
}

VocAnnotation parse_voc_annotation(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_xml(path.string(), tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(e.what());
  }

  VocAnnotation annotation;
  try {
    const pt::ptree& root = tree.get_child("annotation");
    annotation.filename = root.get<std::string>("filename", "");
    annotation.width = root.get<int>("size.width", 0);
    annotation.height = root.get<int>("size.height", 0);
    for (const auto& [key, node] : root) {
      if (key != "object") continue;
      VocObject object;
      object.name = node.get<std::string>("name");
      object.difficult = node.get<int>("difficult", 0) != 0;
      // Inclusive pixel indices become half-open: +1 on the max corner.
      object.box.x1 = node.get<double>("bndbox.xmin");
      object.box.y1 = node.get<double>("bndbox.ymin");
      object.box.x2 = node.get<double>("bndbox.xmax") + 1.0;
      object.box.y2 = node.get<double>("bndbox.ymax") + 1.0;
      annotation.objects.push_back(std::move(object));
    }
  } catch (const pt::ptree_error& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
  return annotation;
}

namespace {

constexpr const char* kModelFormat = "annorank-model";
constexpr int kModelVersion = 1;

json stats_to_json(const TrainingStats& stats) {
  json j;
  j["iterations"] = stats.iterations;
  j["final_objective"] = stats.final_objective;
  j["final_gradient_norm"] = stats.final_gradient_norm;
  return j;
}

TrainingStats stats_from_json(const json& j) {
  TrainingStats stats;
  stats.iterations = j.at("iterations").get<int>();
  stats.final_objective = j.at("final_objective").get<double>();
  stats.final_gradient_norm = j.at("final_gradient_norm").get<double>();
  return stats;
}

json model_header(const char* kind, Eigen::Index dim) {
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = kind;
  j["dim"] = dim;
  return j;
}

json checked_model_document(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kModelFormat) {
    throw ParseError("'" + path.string() + "' is not a model document");
  }
  const int version = j.value("version", -1);
  if (version != kModelVersion) {
    throw VersionMismatchError("'" + path.string() + "' has format version " +
                               std::to_string(version) + ", expected " +
                               std::to_string(kModelVersion));
  }
  return j;
}

Vector weights_from_json(const json& j) {
  const Vector weights = vector_from_json(j.at("weights"));
  if (weights.size() != j.at("dim").get<Eigen::Index>()) {
    throw ParseError("weight count does not match the declared dimension");
  }
  return weights;
}

}  // namespace

void save_model(const RankModel& model, const std::filesystem::path& path) {
  json j = model_header("rank", model.weights.size());
  j["weights"] = vector_to_json(model.weights);
  j["c"] = model.c;
  j["gt_mode"] = to_string(model.gt_mode);
  j["training_stats"] = stats_to_json(model.stats);
  open_for_write(path) << j.dump(2) << '\n';
}

void save_model(const BinaryModel& model, const std::filesystem::path& path) {
  json j = model_header("binary", model.weights.size());
  j["weights"] = vector_to_json(model.weights);
  j["bias"] = model.bias;
  j["c"] = model.c;
  j["feature_space"] = to_string(model.feature_space);
  j["training_stats"] = stats_to_json(model.stats);
  open_for_write(path) << j.dump(2) << '\n';
}

AnyModel load_model(const std::filesystem::path& path) {
  const json j = checked_model_document(path);
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rank") {
      RankModel model;
      model.weights = weights_from_json(j);
      model.c = j.at("c").get<double>();
      model.gt_mode = gt_mode_from_string(j.at("gt_mode").get<std::string>());
      model.stats = stats_from_json(j.at("training_stats"));
      return model;
    }
    if (kind == "binary") {
      BinaryModel model;
      model.weights = weights_from_json(j);
      model.bias = j.at("bias").get<double>();
      model.c = j.at("c").get<double>();
      model.feature_space =
          feature_space_from_string(j.at("feature_space").get<std::string>());
      model.stats = stats_from_json(j.at("training_stats"));
      return model;
    }
    throw ParseError("'" + path.string() + "': unknown model kind '" + kind +
                     "'");
  } catch (const json::exception& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

RankModel load_rank_model(const std::filesystem::path& path) {
  AnyModel model = load_model(path);
  if (!std::holds_alternative<RankModel>(model)) {
    throw ParseError("'" + path.string() + "' holds a binary model, not a "
                     "ranking model");
  }
  return std::get<RankModel>(std::move(model));
}

BinaryModel load_binary_model(const std::filesystem::path& path) {
  AnyModel model = load_model(path);
  if (!std::holds_alternative<BinaryModel>(model)) {
    throw ParseError("'" + path.string() + "' holds a ranking model, not a "
                     "binary model");
  }
  return std::get<BinaryModel>(std::move(model));
}

void save_results(const std::vector<AnnotationResult>& results,
                  const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  for (const AnnotationResult& result : results) {
    json j;
    j["image_id"] = result.image_id;
    j["chosen_index"] = result.chosen_index;
    j["chosen_box"] = box_to_json(result.chosen_box);
    j["candidate_scores"] = result.candidate_scores;
    if (result.correct) j["correct"] = *result.correct;
    out << j.dump() << '\n';
  }
}

std::vector<AnnotationResult> load_results(
    const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  std::vector<AnnotationResult> results;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (blank(line)) continue;
    const json j = parse_line(line, line_number);
    try {
      AnnotationResult result;
      result.image_id = j.at("image_id").get<std::string>();
      result.chosen_index = j.at("chosen_index").get<int>();
      result.chosen_box = box_from_json(j.at("chosen_box"));
      result.candidate_scores =
          j.at("candidate_scores").get<std::vector<double>>();
      if (j.contains("correct")) result.correct = j.at("correct").get<bool>();
      results.push_back(std::move(result));
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_number) + ": " +
                       e.what());
    }
  }
  return results;
}

void save_oracle(const std::vector<OracleRecord>& records,
                 const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  for (const OracleRecord& record : records) {
    json j;
    j["image_id"] = record.image_id;
    j["ious"] = record.ious;
    j["distances"] = record.distances;
    j["intended_ranks"] = record.intended_ranks;
    j["best_index"] = record.best_index;
    out << j.dump() << '\n';
  }
}

std::vector<OracleRecord> load_oracle(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  std::vector<OracleRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (blank(line)) continue;
    const json j = parse_line(line, line_number);
    try {
      OracleRecord record;
      record.image_id = j.at("image_id").get<std::string>();
      record.ious = j.at("ious").get<std::vector<double>>();
      record.distances = j.at("distances").get<std::vector<double>>();
      record.intended_ranks = j.at("intended_ranks").get<std::vector<int>>();
      record.best_index = j.at("best_index").get<int>();
      records.push_back(std::move(record));
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_number) + ": " +
                       e.what());
    }
  }
  return records;
}

}  // namespace annorank
