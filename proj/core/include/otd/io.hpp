// Text formats for tensors, sample sets, decompositions, and mixture models,
// shared by the library and the command-line tool. Writers emit 17
// significant digits so every double round-trips bit-exactly.
#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

#include "otd/decompose.hpp"
#include "otd/moments.hpp"
#include "otd/tensor.hpp"

namespace otd {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& message) : std::runtime_error(message) {}
};

// Shortest decimal form with 17 significant digits; parses back to the same
// double.
std::string format_real(double value);

// Format:  tensor v1 / shape n_1 ... n_d / entries in lexicographic order
// (last index fastest), whitespace-separated.
Tensor read_tensor(std::istream& in);
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor_file(const std::string& path);
void write_tensor_file(const std::string& path, const Tensor& t);

// Format:  samples v1 dim <n>  followed by one point per line.
SampleSet read_samples(std::istream& in);
void write_samples(std::ostream& out, const SampleSet& samples);
SampleSet read_samples_file(const std::string& path);
void write_samples_file(const std::string& path, const SampleSet& samples);

// Format:  otd v1 / signature <blocks> / rank <r> / weights <r reals>, then
// one tensor block per summand and signature block, summand-major.
Decomposition read_decomposition(std::istream& in);
void write_decomposition(std::ostream& out, const Decomposition& d);
Decomposition read_decomposition_file(const std::string& path);
void write_decomposition_file(const std::string& path, const Decomposition& d);

// Format:  model v1 / dim <n> / components <r> / weights <r reals>, then one
// mean per line.
MixtureModel read_model(std::istream& in);
void write_model(std::ostream& out, const MixtureModel& model);
MixtureModel read_model_file(const std::string& path);
void write_model_file(const std::string& path, const MixtureModel& model);

}  // namespace otd
