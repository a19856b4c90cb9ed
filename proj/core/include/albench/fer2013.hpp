#pragma once

#include <string>

#include "albench/pool.hpp"

namespace albench {

/// FER2013-style CSV: header `emotion,pixels,Usage`, emotion in 0..K-1,
/// pixels = dims space-separated base-10 integers in [0,255].
struct PixelCsv {
  SamplePool pool;          // Usage == "Training"
  LabelOracle oracle;       // sealed labels of the pool rows
  EvalSet eval_public;      // Usage == "PublicTest"
  EvalSet eval_private;     // Usage == "PrivateTest"
};

/// Generic loader for the CSV shape above. Pixels are scaled by 1/255.
/// Malformed rows raise std::runtime_error with the 1-based line number; a
/// wrong pixel count names the count found.
PixelCsv load_pixel_csv(const std::string& path, std::size_t dims, std::size_t num_classes,
                        std::size_t image_height = 0, std::size_t image_width = 0);

/// FER2013: 48x48 grayscale, 2304 pixels, 7 classes.
PixelCsv load_fer2013_csv(const std::string& path);

}  // namespace albench
