#include "annorank/dataio.hpp"
#include "annorank/errors.hpp"
#include "annorank/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

namespace annorank {

namespace {

constexpr double kCanvasW = 640.0;
constexpr double kCanvasH = 480.0;
// Image streams use indices 0..n_images-1; class-template streams start here.
constexpr std::uint64_t kClassStream = 1'000'000;

struct Trait {
  BBox box;
  double iou = 0.0;       // intended overlap, by construction
  double distance = 0.0;  // center distance to the ground truth
};

void validate(const SynthConfig& cfg) {
  if (cfg.n_images < 1 || cfg.candidates_per_image < 1 || cfg.n_classes < 1) {
    throw ValidationError("synth: counts must be at least 1");
  }
  if (cfg.dim < 3) {
    throw ValidationError("synth: dimension must be at least 3 so the "
                          "signal, context, and background pools are all "
                          "non-empty");
  }
  if (!(cfg.noise_sigma >= 0.0)) {
    throw ValidationError("synth: noise_sigma must be non-negative");
  }
  if (!(cfg.profile.zero_fraction >= 0.0 && cfg.profile.zero_fraction <= 1.0)) {
    throw ValidationError("synth: zero_fraction must lie in [0, 1]");
  }
  if (!(cfg.profile.min_iou > 0.0 && cfg.profile.min_iou <= cfg.profile.max_iou &&
        cfg.profile.max_iou < 1.0)) {
    throw ValidationError("synth: need 0 < min_iou <= max_iou < 1");
  }
  if (!(cfg.hidden_signal_strength >= 0.0 &&
        cfg.hidden_signal_strength <= 1.0)) {
    throw ValidationError("synth: hidden_signal_strength must lie in [0, 1]");
  }
}

// Positive entries on [begin, end), zero elsewhere, scaled to total mass.
// Equal masses across the building blocks make candidate mixtures exact
// convex combinations after L1 normalization.
Vector pool_pattern(Rng& rng, int dim, int begin, int end, double mass) {
  Vector v = Vector::Zero(dim);
  for (int k = begin; k < end; ++k) v[k] = rng.uniform(0.5, 1.5);
  return v * (mass / v.sum());
}

std::string padded(const char* prefix, int value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04d", prefix, value);
  return buf;
}

}  // namespace

SynthDataset synth_generate(const SynthConfig& cfg) {
  validate(cfg);

  const int dim = cfg.dim;
  const int n_ctx = std::max(1, dim / 4);
  const int n_unique = std::max(1, dim / 4);
  const int n_sig = dim - n_ctx - n_unique;
  const int ctx_begin = n_sig;
  const int unique_begin = n_sig + n_ctx;
  const double mass = static_cast<double>(dim);  // mean entry 1.0
  const double half_diag = 0.5 * std::hypot(kCanvasW, kCanvasH);

  std::vector<Vector> class_template(static_cast<std::size_t>(cfg.n_classes));
  for (int cls = 0; cls < cfg.n_classes; ++cls) {
    Rng rng(derive_seed(cfg.seed, kClassStream + static_cast<std::uint64_t>(cls)));
    class_template[static_cast<std::size_t>(cls)] =
        pool_pattern(rng, dim, 0, n_sig, mass);
  }

  SynthDataset out;
  for (int i = 0; i < cfg.n_images; ++i) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    const int cls = i % cfg.n_classes;

    AnnotatedImage image;
    image.image_id = padded("synth_", i);
    image.class_label = padded("class_", cls);
    image.width = static_cast<int>(kCanvasW);
    image.height = static_cast<int>(kCanvasH);

    // Object appearance: the class template with per-image jitter.
    Vector g = class_template[static_cast<std::size_t>(cls)];
    for (int k = 0; k < n_sig; ++k) g[k] *= rng.uniform(0.9, 1.1);
    g *= mass / g.sum();
    const Vector ctx = pool_pattern(rng, dim, ctx_begin, unique_begin, mass);

    // Ground-truth box placed so a shift of up to its own size stays on
    // the canvas in every direction.
    const double gw = kCanvasW * rng.uniform(0.15, 0.3);
    const double gh = kCanvasH * rng.uniform(0.15, 0.3);
    const double gx = rng.uniform(gw, kCanvasW - 2.0 * gw);
    const double gy = rng.uniform(gh, kCanvasH - 2.0 * gh);
    const BBox gt{gx, gy, gx + gw, gy + gh};

    const int m = cfg.candidates_per_image;
    int n_zero = static_cast<int>(
        std::lround(cfg.profile.zero_fraction * static_cast<double>(m)));
    n_zero = std::clamp(n_zero, 0, m);
    const int n_pos = m - n_zero;

    // Overlapping candidates: evenly spaced intended overlaps from max_iou
    // down, jittered by less than half the gap so the order stays strict.
    std::vector<double> ious(static_cast<std::size_t>(n_pos));
    if (n_pos == 1) {
      ious[0] = cfg.profile.max_iou;
    } else if (n_pos > 1) {
      const double spacing = (cfg.profile.max_iou - cfg.profile.min_iou) /
                             static_cast<double>(n_pos - 1);
      for (int t = 0; t < n_pos; ++t) {
        double v = cfg.profile.max_iou - spacing * static_cast<double>(t) +
                   0.25 * spacing * (2.0 * rng.uniform() - 1.0);
        ious[static_cast<std::size_t>(t)] =
            std::clamp(v, cfg.profile.min_iou, cfg.profile.max_iou);
      }
    }

    std::vector<Trait> traits;
    traits.reserve(static_cast<std::size_t>(m));
    for (int t = 0; t < n_pos; ++t) {
      const double target = ious[static_cast<std::size_t>(t)];
      // An identical box shifted by dx along one axis has
      // iou = (extent - dx) / (extent + dx); invert for the shift.
      const double frac = (1.0 - target) / (1.0 + target);
      BBox box = gt;
      switch (rng.uniform_int(4)) {
        case 0: box.x1 += frac * gw; box.x2 += frac * gw; break;
        case 1: box.x1 -= frac * gw; box.x2 -= frac * gw; break;
        case 2: box.y1 += frac * gh; box.y2 += frac * gh; break;
        default: box.y1 -= frac * gh; box.y2 -= frac * gh; break;
      }
      const double d = std::hypot(0.5 * (box.x1 + box.x2) - gt.center_x(),
                                  0.5 * (box.y1 + box.y2) - gt.center_y());
      traits.push_back({box, target, d});
    }
    for (int z = 0; z < n_zero; ++z) {
      BBox box;
      bool placed = false;
      for (int attempt = 0; attempt < 10000; ++attempt) {
        const double cw = kCanvasW * rng.uniform(0.1, 0.25);
        const double ch = kCanvasH * rng.uniform(0.1, 0.25);
        const double cx = rng.uniform(0.0, kCanvasW - cw);
        const double cy = rng.uniform(0.0, kCanvasH - ch);
        box = {cx, cy, cx + cw, cy + ch};
        if (box.x1 >= gt.x2 || box.x2 <= gt.x1 || box.y1 >= gt.y2 ||
            box.y2 <= gt.y1) {
          placed = true;
          break;
        }
      }
      if (!placed) {
        throw Error("synth: could not place a zero-overlap candidate");
      }
      const double d = std::hypot(box.center_x() - gt.center_x(),
                                  box.center_y() - gt.center_y());
      traits.push_back({box, 0.0, d});
    }

    // Scatter the construction order across candidate slots.
    std::vector<int> slot(static_cast<std::size_t>(m));
    std::iota(slot.begin(), slot.end(), 0);
    rng.shuffle(slot);
    std::vector<Trait> placed(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
      placed[static_cast<std::size_t>(slot[static_cast<std::size_t>(k)])] =
          traits[static_cast<std::size_t>(k)];
    }

    // Intended permutation from construction knowledge alone: overlapping
    // candidates by descending intended overlap, the rest by ascending
    // distance, ties by index.
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const Trait& ta = placed[static_cast<std::size_t>(a)];
      const Trait& tb = placed[static_cast<std::size_t>(b)];
      const bool a_hits = ta.iou > 0.0;
      const bool b_hits = tb.iou > 0.0;
      if (a_hits != b_hits) return a_hits;
      if (a_hits && ta.iou != tb.iou) return ta.iou > tb.iou;
      if (!a_hits && ta.distance != tb.distance) {
        return ta.distance < tb.distance;
      }
      return a < b;
    });
    OracleRecord oracle;
    oracle.image_id = image.image_id;
    oracle.intended_ranks.assign(static_cast<std::size_t>(m), 0);
    for (int pos = 0; pos < m; ++pos) {
      oracle.intended_ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] =
          pos + 1;
    }
    oracle.best_index = order[0];

    // Appearance: x = iou * g + (1 - iou) * b, where the background
    // b = (1 - strength) * g + strength * beta mixes the shared context
    // pattern (weighted by proximity) with candidate-specific content.
    const double strength = cfg.hidden_signal_strength;
    for (int j = 0; j < m; ++j) {
      const Trait& trait = placed[static_cast<std::size_t>(j)];
      const Vector unique = pool_pattern(rng, dim, unique_begin, dim, mass);
      const double proximity =
          0.8 * std::max(0.0, 1.0 - trait.distance / half_diag);
      const Vector beta = proximity * ctx + (1.0 - proximity) * unique;
      const Vector background = (1.0 - strength) * g + strength * beta;
      Vector x = trait.iou * g + (1.0 - trait.iou) * background;
      if (cfg.noise_sigma > 0.0) {
        for (int k = 0; k < dim; ++k) {
          x[k] = std::max(0.0, x[k] + cfg.noise_sigma * rng.normal());
        }
      }
      if (x.sum() <= 0.0) {
        throw Error("synth: noise_sigma wiped out a histogram; lower it");
      }

      Candidate cand;
      cand.box = trait.box;
      cand.histogram = std::move(x);
      cand.objectness = 0.5 * trait.iou + 0.5 * rng.uniform();
      image.candidates.push_back(std::move(cand));

      oracle.ious.push_back(trait.iou);
      oracle.distances.push_back(trait.distance);
    }

    image.ground_truth = {gt};
    image.difficult = {false};
    image.gt_histogram = g;
    out.images.push_back(std::move(image));
    out.oracle.push_back(std::move(oracle));
  }
  return out;
}

}  // namespace annorank
