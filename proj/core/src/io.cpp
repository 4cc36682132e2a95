#include "otd/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace otd {

namespace {

std::string trim(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

// Next non-blank line, trimmed; throws with `what` when the stream ends.
std::string next_content_line(std::istream& in, const std::string& what) {
  std::string line;
  while (std::getline(in, line)) {
    std::string content = trim(line);
    if (!content.empty()) return content;
  }
  throw ParseError("unexpected end of input while reading " + what);
}

double parse_real(const std::string& token, const std::string& what) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &pos);
  } catch (const std::exception&) {
    throw ParseError("cannot parse real '" + token + "' in " + what);
  }
  if (pos != token.size()) {
    throw ParseError("cannot parse real '" + token + "' in " + what);
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite value '" + token + "' in " + what);
  }
  return value;
}

std::int64_t parse_int(const std::string& token, const std::string& what) {
  std::size_t pos = 0;
  long long value = 0;
  try {
    value = std::stoll(token, &pos);
  } catch (const std::exception&) {
    throw ParseError("cannot parse integer '" + token + "' in " + what);
  }
  if (pos != token.size()) {
    throw ParseError("cannot parse integer '" + token + "' in " + what);
  }
  return value;
}

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) tokens.push_back(token);
  return tokens;
}

// A line of the form `<keyword> <tokens...>`; returns the tokens.
std::vector<std::string> keyword_line(std::istream& in, const std::string& keyword) {
  const std::string line = next_content_line(in, "'" + keyword + "' line");
  std::vector<std::string> tokens = split_tokens(line);
  if (tokens.empty() || tokens[0] != keyword) {
    throw ParseError("expected '" + keyword + " ...', got '" + line + "'");
  }
  tokens.erase(tokens.begin());
  return tokens;
}

void expect_header(std::istream& in, const std::string& header) {
  const std::string line = next_content_line(in, "'" + header + "' header");
  if (line != header) {
    throw ParseError("expected '" + header + "', got '" + line + "'");
  }
}

void require_only_whitespace_left(std::istream& in, const std::string& path) {
  char c = 0;
  while (in.get(c)) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      throw ParseError("trailing data in " + path);
    }
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

void check_written(const std::ostream& out, const std::string& path) {
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace

std::string format_real(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

Tensor read_tensor(std::istream& in) {
  expect_header(in, "tensor v1");
  const std::vector<std::string> dim_tokens = keyword_line(in, "shape");
  if (dim_tokens.empty()) {
    throw ParseError("shape line lists no dimensions");
  }
  std::vector<std::int64_t> dims;
  for (const auto& token : dim_tokens) {
    const std::int64_t n = parse_int(token, "shape line");
    if (n < 1) throw ParseError("dimension must be >= 1, got " + token);
    dims.push_back(n);
  }
  Shape shape(std::move(dims));
  std::vector<double> values(shape.element_count());
  for (std::int64_t p = 0; p < shape.element_count(); ++p) {
    std::string token;
    if (!(in >> token)) {
      throw ParseError("tensor needs " + std::to_string(shape.element_count()) +
                       " entries, found " + std::to_string(p));
    }
    values[p] = parse_real(token, "tensor entries");
  }
  return Tensor(std::move(shape), std::move(values));
}

void write_tensor(std::ostream& out, const Tensor& t) {
  out << "tensor v1\n";
  out << "shape";
  for (std::int64_t n : t.shape().dims()) out << " " << n;
  out << "\n";
  const std::int64_t row = t.shape().dims().back();
  for (std::int64_t p = 0; p < t.size(); ++p) {
    out << format_real(t[p]);
    out << ((p + 1) % row == 0 ? "\n" : " ");
  }
}

Tensor read_tensor_file(const std::string& path) {
  std::ifstream in = open_input(path);
  Tensor t = read_tensor(in);
  require_only_whitespace_left(in, path);
  return t;
}

void write_tensor_file(const std::string& path, const Tensor& t) {
  std::ofstream out = open_output(path);
  write_tensor(out, t);
  out.flush();
  check_written(out, path);
}

SampleSet read_samples(std::istream& in) {
  const std::vector<std::string> header = keyword_line(in, "samples");
  if (header.size() != 3 || header[0] != "v1" || header[1] != "dim") {
    throw ParseError("expected 'samples v1 dim <n>'");
  }
  const std::int64_t dim = parse_int(header[2], "samples header");
  if (dim < 1) throw ParseError("sample dimension must be >= 1");
  SampleSet out;
  out.dim = dim;
  std::string line;
  while (std::getline(in, line)) {
    const std::string content = trim(line);
    if (content.empty()) continue;
    const std::vector<std::string> tokens = split_tokens(content);
    if (static_cast<std::int64_t>(tokens.size()) != dim) {
      throw ParseError("sample line has " + std::to_string(tokens.size()) +
                       " entries, expected " + std::to_string(dim));
    }
    std::vector<double> point(dim);
    for (std::int64_t a = 0; a < dim; ++a) {
      point[a] = parse_real(tokens[a], "sample line");
    }
    out.points.push_back(std::move(point));
  }
  return out;
}

void write_samples(std::ostream& out, const SampleSet& samples) {
  out << "samples v1 dim " << samples.dim << "\n";
  for (const auto& point : samples.points) {
    for (std::size_t a = 0; a < point.size(); ++a) {
      if (a > 0) out << " ";
      out << format_real(point[a]);
    }
    out << "\n";
  }
}

SampleSet read_samples_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_samples(in);
}

void write_samples_file(const std::string& path, const SampleSet& samples) {
  std::ofstream out = open_output(path);
  write_samples(out, samples);
  out.flush();
  check_written(out, path);
}

Decomposition read_decomposition(std::istream& in) {
  expect_header(in, "otd v1");
  const std::vector<std::string> sig_tokens = keyword_line(in, "signature");
  if (sig_tokens.size() != 1) {
    throw ParseError("signature line must hold exactly one block list");
  }
  Decomposition d;
  try {
    d.signature = Signature::parse(sig_tokens[0]);
  } catch (const std::invalid_argument& error) {
    throw ParseError(error.what());
  }
  const std::vector<std::string> rank_tokens = keyword_line(in, "rank");
  if (rank_tokens.size() != 1) {
    throw ParseError("rank line must hold exactly one integer");
  }
  d.rank = parse_int(rank_tokens[0], "rank line");
  if (d.rank < 0) throw ParseError("rank must be >= 0");
  const std::vector<std::string> weight_tokens = keyword_line(in, "weights");
  if (static_cast<std::int64_t>(weight_tokens.size()) != d.rank) {
    throw ParseError("weights line has " + std::to_string(weight_tokens.size()) +
                     " entries, expected " + std::to_string(d.rank));
  }
  for (const auto& token : weight_tokens) {
    d.weights.push_back(parse_real(token, "weights line"));
  }
  for (std::int64_t i = 0; i < d.rank; ++i) {
    std::vector<Tensor> row;
    for (std::int64_t j = 1; j <= d.signature.block_count(); ++j) {
      Tensor factor = read_tensor(in);
      if (factor.degree() !=
          static_cast<std::int64_t>(d.signature.block(j).size())) {
        throw ParseError("factor at summand " + std::to_string(i + 1) +
                         ", block " + std::to_string(j) + " has degree " +
                         std::to_string(factor.degree()) + ", expected " +
                         std::to_string(d.signature.block(j).size()));
      }
      if (i > 0 && factor.shape() != d.factors[0][j - 1].shape()) {
        throw ParseError("factor shapes disagree across summands at block " +
                         std::to_string(j));
      }
      row.push_back(std::move(factor));
    }
    d.factors.push_back(std::move(row));
  }
  return d;
}

void write_decomposition(std::ostream& out, const Decomposition& d) {
  out << "otd v1\n";
  out << "signature " << d.signature.to_string() << "\n";
  out << "rank " << d.rank << "\n";
  out << "weights";
  for (double w : d.weights) out << " " << format_real(w);
  out << "\n";
  for (const auto& row : d.factors) {
    for (const auto& factor : row) write_tensor(out, factor);
  }
}

Decomposition read_decomposition_file(const std::string& path) {
  std::ifstream in = open_input(path);
  Decomposition d = read_decomposition(in);
  require_only_whitespace_left(in, path);
  return d;
}

void write_decomposition_file(const std::string& path, const Decomposition& d) {
  std::ofstream out = open_output(path);
  write_decomposition(out, d);
  out.flush();
  check_written(out, path);
}

MixtureModel read_model(std::istream& in) {
  expect_header(in, "model v1");
  const std::vector<std::string> dim_tokens = keyword_line(in, "dim");
  if (dim_tokens.size() != 1) throw ParseError("dim line must hold one integer");
  MixtureModel model;
  model.dim = parse_int(dim_tokens[0], "dim line");
  if (model.dim < 1) throw ParseError("model dimension must be >= 1");
  const std::vector<std::string> comp_tokens = keyword_line(in, "components");
  if (comp_tokens.size() != 1) {
    throw ParseError("components line must hold one integer");
  }
  const std::int64_t r = parse_int(comp_tokens[0], "components line");
  if (r < 1) throw ParseError("component count must be >= 1");
  const std::vector<std::string> weight_tokens = keyword_line(in, "weights");
  if (static_cast<std::int64_t>(weight_tokens.size()) != r) {
    throw ParseError("weights line has " + std::to_string(weight_tokens.size()) +
                     " entries, expected " + std::to_string(r));
  }
  for (const auto& token : weight_tokens) {
    model.weights.push_back(parse_real(token, "weights line"));
  }
  for (std::int64_t i = 0; i < r; ++i) {
    const std::string line = next_content_line(in, "mean " + std::to_string(i + 1));
    const std::vector<std::string> tokens = split_tokens(line);
    if (static_cast<std::int64_t>(tokens.size()) != model.dim) {
      throw ParseError("mean " + std::to_string(i + 1) + " has " +
                       std::to_string(tokens.size()) + " entries, expected " +
                       std::to_string(model.dim));
    }
    std::vector<double> mean(model.dim);
    for (std::int64_t a = 0; a < model.dim; ++a) {
      mean[a] = parse_real(tokens[a], "mean " + std::to_string(i + 1));
    }
    model.means.push_back(std::move(mean));
  }
  return model;
}

void write_model(std::ostream& out, const MixtureModel& model) {
  out << "model v1\n";
  out << "dim " << model.dim << "\n";
  out << "components " << model.component_count() << "\n";
  out << "weights";
  for (double w : model.weights) out << " " << format_real(w);
  out << "\n";
  for (const auto& mean : model.means) {
    for (std::size_t a = 0; a < mean.size(); ++a) {
      if (a > 0) out << " ";
      out << format_real(mean[a]);
    }
    out << "\n";
  }
}

MixtureModel read_model_file(const std::string& path) {
  std::ifstream in = open_input(path);
  MixtureModel model = read_model(in);
  require_only_whitespace_left(in, path);
  return model;
}

void write_model_file(const std::string& path, const MixtureModel& model) {
  std::ofstream out = open_output(path);
  write_model(out, model);
  out.flush();
  check_written(out, path);
}

}  // namespace otd
