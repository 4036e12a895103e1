#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybviton/raster.hpp"

namespace hybviton {

/// Raised for missing, unreadable, malformed or unwritable raster files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Files are binary netpbm: P6 (8-bit RGB) for images, P5 (8-bit gray) for
// masks and label maps. Samples map to [0,1] by v/255 on load and
// round(v*255) on save.

RasterImage load_image(const std::filesystem::path& path);
BinaryMask load_mask(const std::filesystem::path& path, double threshold = 0.5);
SegmentationMap load_segmentation(const std::filesystem::path& path,
                                  int label_count = SegmentationMap::kDefaultLabelCount);

void save_image(const RasterImage& img, const std::filesystem::path& path);
/// Written as gray 0/255.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);
void save_segmentation(const SegmentationMap& seg, const std::filesystem::path& path);

// In-memory codecs; the file functions above are thin wrappers over these.
std::string encode_image(const RasterImage& img);
std::string encode_mask(const BinaryMask& mask);
std::string encode_segmentation(const SegmentationMap& seg);
RasterImage decode_image(const std::string& bytes);
BinaryMask decode_mask(const std::string& bytes, double threshold = 0.5);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

/// Stages several files, then renames them into place only once every
/// temporary write succeeded. Unrenamed temporaries are removed on destruction.
class AtomicFileBatch {
 public:
  AtomicFileBatch() = default;
  AtomicFileBatch(const AtomicFileBatch&) = delete;
  AtomicFileBatch& operator=(const AtomicFileBatch&) = delete;
  ~AtomicFileBatch();

  void add(std::filesystem::path path, std::string bytes);
  void commit();

 private:
  struct Entry {
    std::filesystem::path path;
    std::string bytes;
  };
  std::vector<Entry> entries_;
  std::vector<std::filesystem::path> staged_;
};

}  // namespace hybviton
