#pragma once

#include <utility>
#include <vector>

#include "currseg/random_walker.hpp"

namespace currseg {

// A promptable segmenter bound to one image at a time. Implementations must
// be deterministic: a bound image plus identical prompts and profile give
// bit-identical results.
class Segmenter {
 public:
  virtual ~Segmenter() = default;

  // Binds the image all subsequent segment() calls operate on.
  virtual void set_image(const Image& image) = 0;

  virtual SegmentationResult segment(const PromptBundle& prompts,
                                     const StageProfile& profile) = 0;
};

// The built-in random-walker backend. Image features are precomputed once
// per (image, beta, smoothing) and shared across calls, mirroring a
// foundation model computing its image embedding once per image.
// The feature cache makes instances single-threaded; parallel evaluation
// uses one instance per worker.
class BuiltinSegmenter final : public Segmenter {
 public:
  BuiltinSegmenter() = default;
  explicit BuiltinSegmenter(const Image& image) { set_image(image); }

  void set_image(const Image& image) override {
    image_ = image;
    cache_.clear();
  }

  SegmentationResult segment(const PromptBundle& prompts,
                             const StageProfile& profile) override {
    return currseg::segment(features_for(profile), prompts, profile);
  }

  const ImageFeatures& features_for(const StageProfile& profile) {
    for (const auto& entry : cache_)
      if (entry.beta == profile.beta &&
          entry.sigma == profile.feature_smooth_sigma)
        return entry.features;
    cache_.push_back({profile.beta, profile.feature_smooth_sigma,
                      precompute_features(image_, profile)});
    return cache_.back().features;
  }

  const Image& image() const { return image_; }

 private:
  struct CacheEntry {
    double beta;
    double sigma;
    ImageFeatures features;
  };
  Image image_;
  std::vector<CacheEntry> cache_;
};

}  // namespace currseg
