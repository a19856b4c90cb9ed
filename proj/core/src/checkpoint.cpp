#include "albench/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace albench {

namespace {

constexpr const char* kMagic = "albench-model v1";

void write_matrix(std::ostream& out, const char* name, const DenseMatrix& m) {
  out << "param " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[40];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%a", m(i, j));
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
}

DenseMatrix read_matrix(std::istream& in, std::size_t rows, std::size_t cols) {
  DenseMatrix m(rows, cols);
  std::string tok;
  for (std::size_t k = 0; k < rows * cols; ++k) {
    if (!(in >> tok)) throw std::runtime_error("checkpoint: truncated parameter values");
    m.data()[k] = std::strtod(tok.c_str(), nullptr);
  }
  return m;
}

void write_params(std::ostream& out, const std::vector<const DenseMatrix*>& params) {
  out << "params " << params.size() << '\n';
  for (std::size_t i = 0; i < params.size(); ++i) {
    write_matrix(out, ("p" + std::to_string(i)).c_str(), *params[i]);
  }
}

void read_params(std::istream& in, const std::vector<DenseMatrix*>& params) {
  std::string tok;
  std::size_t count = 0;
  if (!(in >> tok >> count) || tok != "params") {
    throw std::runtime_error("checkpoint: expected params section");
  }
  if (count != params.size()) {
    throw std::runtime_error("checkpoint: has " + std::to_string(count) + " parameters, model needs " +
                             std::to_string(params.size()));
  }
  for (DenseMatrix* p : params) {
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(in >> tok >> name >> rows >> cols) || tok != "param") {
      throw std::runtime_error("checkpoint: malformed param header");
    }
    if (rows != p->rows() || cols != p->cols()) {
      throw std::runtime_error("checkpoint: param " + name + " shape (" + std::to_string(rows) +
                               "x" + std::to_string(cols) + ") does not match model " +
                               p->shape_str());
    }
    *p = read_matrix(in, rows, cols);
  }
}

std::ifstream open_checked(const std::string& path, std::string& kind, std::string& arch) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != kMagic) throw std::runtime_error("checkpoint: bad magic line '" + magic + "'");
  std::string tok;
  if (!(in >> tok >> kind) || tok != "kind") {
    throw std::runtime_error("checkpoint: expected kind line");
  }
  in >> std::ws;
  std::string arch_line;
  std::getline(in, arch_line);
  std::istringstream as(arch_line);
  if (!(as >> tok) || tok != "encoder") {
    throw std::runtime_error("checkpoint: expected encoder line, got '" + arch_line + "'");
  }
  arch = arch_line.substr(arch_line.find(' ') + 1);
  return in;
}

}  // namespace

void save_classifier(const ProbabilisticClassifier& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << kMagic << '\n';
  out << "kind classifier\n";
  out << "encoder " << model.encoder().arch_string() << '\n';
  out << "classes " << model.num_classes() << '\n';
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", model.dropout_rate());
  out << "dropout " << buf << '\n';
  std::vector<const DenseMatrix*> params = model.encoder().params();
  params.push_back(&model.head_w());
  params.push_back(&model.head_b());
  write_params(out, params);
}

ProbabilisticClassifier load_classifier(const std::string& path) {
  std::string kind, arch;
  std::ifstream in = open_checked(path, kind, arch);
  if (kind != "classifier") {
    throw std::runtime_error("checkpoint: kind '" + kind + "' is not a classifier");
  }
  std::string tok;
  std::size_t classes = 0;
  std::string dropout_tok;
  if (!(in >> tok >> classes) || tok != "classes") {
    throw std::runtime_error("checkpoint: expected classes line");
  }
  if (!(in >> tok >> dropout_tok) || tok != "dropout") {
    throw std::runtime_error("checkpoint: expected dropout line");
  }
  ProbabilisticClassifier model(make_encoder_from_arch(arch), classes,
                                std::strtod(dropout_tok.c_str(), nullptr));
  std::vector<DenseMatrix*> params = model.encoder().params();
  params.push_back(&model.head_w());
  params.push_back(&model.head_b());
  read_params(in, params);
  return model;
}

void save_encoder(const Encoder& encoder, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << kMagic << '\n';
  out << "kind encoder\n";
  out << "encoder " << encoder.arch_string() << '\n';
  write_params(out, encoder.params());
}

std::unique_ptr<Encoder> load_encoder(const std::string& path) {
  std::string kind, arch;
  std::ifstream in = open_checked(path, kind, arch);
  if (kind != "encoder") {
    throw std::runtime_error("checkpoint: kind '" + kind + "' is not an encoder");
  }
  std::unique_ptr<Encoder> enc = make_encoder_from_arch(arch);
  read_params(in, enc->params());
  return enc;
}

}  // namespace albench
