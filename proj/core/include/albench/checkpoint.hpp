#pragma once

#include <string>

#include "albench/classifier.hpp"

namespace albench {

/// Versioned text checkpoints. Values are written as C hexfloats, so
/// load(save(m)) reproduces every parameter (and therefore every prediction)
/// bit-exactly.
void save_classifier(const ProbabilisticClassifier& model, const std::string& path);
ProbabilisticClassifier load_classifier(const std::string& path);

void save_encoder(const Encoder& encoder, const std::string& path);
std::unique_ptr<Encoder> load_encoder(const std::string& path);

}  // namespace albench
