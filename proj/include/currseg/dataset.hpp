#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "currseg/png_io.hpp"

namespace currseg {

struct DatasetEntry {
  std::string id;  // shared stem of the image and mask files
  std::filesystem::path image_path;
  std::filesystem::path mask_path;
};

struct Dataset {
  std::vector<DatasetEntry> entries;
  std::string split;
};

// Loads root/<split>/images/*.png with masks from root/<split>/masks/ by
// matching stem. Entries come back in lexicographic order of their stems;
// every pair is opened once to verify the dimensions match.
inline Dataset load_dataset(const std::filesystem::path& root,
                            const std::string& split) {
  namespace fs = std::filesystem;
  const fs::path dir = (split.empty() || split == ".") ? root : root / split;
  if (!fs::is_directory(dir)) {
    std::string available;
    if (fs::is_directory(root))
      for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) available += " " + e.path().filename().string();
    throw DataError("unknown split \"" + split + "\" under " + root.string() +
                    (available.empty() ? "" : "; available:" + available));
  }
  const fs::path images = dir / "images";
  const fs::path masks = dir / "masks";
  if (!fs::is_directory(images))
    throw DataError("dataset layout error: missing directory " + images.string());

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(images))
    if (e.is_regular_file() && e.path().extension() == ".png")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());

  Dataset dataset;
  dataset.split = split;
  for (const auto& image_path : files) {
    DatasetEntry entry;
    entry.id = image_path.stem().string();
    entry.image_path = image_path;
    entry.mask_path = masks / image_path.filename();
    if (!fs::exists(entry.mask_path))
      throw DataError("missing mask for image " + image_path.string() +
                      " (expected " + entry.mask_path.string() + ")");
    const Image image = load_image_png(entry.image_path);
    const BinaryMask mask = load_mask_png(entry.mask_path);
    if (image.width != mask.width || image.height != mask.height)
      throw DataError("dimension mismatch between " + entry.image_path.string() +
                      " and " + entry.mask_path.string());
    dataset.entries.push_back(std::move(entry));
  }
  if (dataset.entries.empty())
    std::cerr << "warning: dataset split \"" << split << "\" under "
              << root.string() << " is empty\n";
  return dataset;
}

}  // namespace currseg
