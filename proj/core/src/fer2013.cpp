#include "albench/fer2013.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace albench {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("csv line " + std::to_string(line_no) + ": " + what);
}

int parse_int(std::string_view s, std::size_t line_no, const char* what) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail(line_no, std::string("malformed ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

PixelCsv load_pixel_csv(const std::string& path, std::size_t dims, std::size_t num_classes,
                        std::size_t image_height, std::size_t image_width) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv file: " + path);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "emotion,pixels,Usage") {
    fail(line_no, "expected header 'emotion,pixels,Usage', got '" + line + "'");
  }

  std::vector<double> train_feat, pub_feat, priv_feat;
  std::vector<int> train_lab, pub_lab, priv_lab;
  std::vector<double> row(dims);

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      fail(line_no, "expected 3 comma-separated fields");
    }
    const std::string_view emotion_sv = std::string_view(line).substr(0, c1);
    const std::string_view pixels_sv = std::string_view(line).substr(c1 + 1, c2 - c1 - 1);
    const std::string_view usage_sv = std::string_view(line).substr(c2 + 1);

    const int emotion = parse_int(emotion_sv, line_no, "emotion");
    if (emotion < 0 || static_cast<std::size_t>(emotion) >= num_classes) {
      fail(line_no, "emotion " + std::to_string(emotion) + " outside 0.." +
                        std::to_string(num_classes - 1));
    }

    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < pixels_sv.size()) {
      while (pos < pixels_sv.size() && pixels_sv[pos] == ' ') ++pos;
      if (pos >= pixels_sv.size()) break;
      std::size_t end = pos;
      while (end < pixels_sv.size() && pixels_sv[end] != ' ') ++end;
      const int px = parse_int(pixels_sv.substr(pos, end - pos), line_no, "pixel");
      if (px < 0 || px > 255) {
        fail(line_no, "pixel value " + std::to_string(px) + " outside 0..255");
      }
      if (count < dims) row[count] = static_cast<double>(px) / 255.0;
      ++count;
      pos = end;
    }
    if (count != dims) {
      fail(line_no, "expected " + std::to_string(dims) + " pixels, found " +
                        std::to_string(count));
    }

    if (usage_sv == "Training") {
      train_feat.insert(train_feat.end(), row.begin(), row.end());
      train_lab.push_back(emotion);
    } else if (usage_sv == "PublicTest") {
      pub_feat.insert(pub_feat.end(), row.begin(), row.end());
      pub_lab.push_back(emotion);
    } else if (usage_sv == "PrivateTest") {
      priv_feat.insert(priv_feat.end(), row.begin(), row.end());
      priv_lab.push_back(emotion);
    } else {
      fail(line_no, "unknown Usage '" + std::string(usage_sv) + "'");
    }
  }

  if (train_lab.empty()) throw std::runtime_error("csv has no Training rows: " + path);

  PixelCsv out;
  out.pool.features = DenseMatrix(train_lab.size(), dims, std::move(train_feat));
  out.pool.num_classes = num_classes;
  out.pool.dataset_id = path;
  out.pool.image_height = image_height;
  out.pool.image_width = image_width;
  out.oracle = LabelOracle(std::move(train_lab));
  out.eval_public.features = DenseMatrix(pub_lab.size(), dims, std::move(pub_feat));
  out.eval_public.labels = std::move(pub_lab);
  out.eval_private.features = DenseMatrix(priv_lab.size(), dims, std::move(priv_feat));
  out.eval_private.labels = std::move(priv_lab);
  return out;
}

PixelCsv load_fer2013_csv(const std::string& path) {
  return load_pixel_csv(path, 48 * 48, 7, 48, 48);
}

}  // namespace albench
