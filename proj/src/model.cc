#include "msrate/model.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "msrate/errors.h"

namespace msrate {

namespace {

using nlohmann::json;

void check_shape(const Matrix& m, int rows, int cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream msg;
    msg << name << " must be " << rows << "x" << cols << ", got " << m.rows() << "x"
        << m.cols();
    throw DimensionMismatch(msg.str());
  }
}

Matrix matrix_field(const json& doc, const char* key) {
  const json& value = doc.at(key);
  if (!value.is_array()) throw ParseError(std::string(key) + " must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (const json& row : value) {
    if (!row.is_array()) throw ParseError(std::string(key) + " must be an array of rows");
    std::vector<double> r;
    for (const json& x : row) {
      if (!x.is_number()) throw ParseError(std::string(key) + " has a non-numeric entry");
      r.push_back(x.get<double>());
    }
    rows.push_back(std::move(r));
  }
  try {
    return Matrix::from_rows(rows);
  } catch (const DimensionMismatch&) {
    throw DimensionMismatch(std::string(key) + " has rows of unequal length");
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string(key) + ": " + e.what());
  }
}

int int_field(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_number_integer()) throw ParseError(std::string(key) + " must be an integer");
  return v.get<int>();
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (const auto& r : m.to_rows()) rows.push_back(r);
  return rows;
}

}  // namespace

SystemSpec::SystemSpec(Matrix A, Matrix A_bar, Matrix B, Matrix B_bar, double sigma)
    : A_(std::move(A)),
      A_bar_(std::move(A_bar)),
      B_(std::move(B)),
      B_bar_(std::move(B_bar)),
      sigma_(sigma) {
  const int n = A_.rows();
  if (n < 1) throw DimensionMismatch("A must be non-empty");
  const int m = B_.cols();
  if (m < 1) throw DimensionMismatch("B must have at least one column");
  check_shape(A_, n, n, "A");
  check_shape(A_bar_, n, n, "A_bar");
  check_shape(B_, n, m, "B");
  check_shape(B_bar_, n, m, "B_bar");
  for (const Matrix* mat : {&A_, &A_bar_, &B_, &B_bar_}) {
    if (!mat->is_finite()) throw InvalidArgument("system matrices must be finite");
  }
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
    throw InvalidSigma("sigma must be finite and > 0");
  }
}

SymMatrix input_gram(const SystemSpec& spec) {
  const double s2 = spec.sigma() * spec.sigma();
  return SymMatrix::symmetric_part(spec.B().transpose() * spec.B() +
                                   s2 * (spec.B_bar().transpose() * spec.B_bar()));
}

double drift_constant(const SystemSpec& spec) {
  const double s2 = spec.sigma() * spec.sigma();
  return lambda_max(SymMatrix::symmetric_part(spec.A() * spec.A().transpose() +
                                              s2 * (spec.A_bar() * spec.A_bar().transpose())));
}

ValidationReport validate(const SystemSpec& spec) {
  ValidationReport r;
  r.stacked_rank = column_rank(vstack(spec.B(), spec.sigma() * spec.B_bar()));
  r.nondegenerate = r.stacked_rank == spec.m();
  r.C_A = std::max(drift_constant(spec), 0.0);
  r.R0_min_eig = lambda_min(input_gram(spec));
  return r;
}

SystemSpec parse_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config must be a JSON object");

  static const std::set<std::string> kKeys = {"n", "m", "A", "A_bar", "B", "B_bar", "sigma"};
  for (const auto& item : doc.items()) {
    if (!kKeys.contains(item.key())) throw ParseError("unknown key: " + item.key());
  }
  for (const auto& key : kKeys) {
    if (!doc.contains(key)) throw ParseError("missing key: " + key);
  }

  const int n = int_field(doc, "n");
  const int m = int_field(doc, "m");
  if (n < 1 || m < 1) throw DimensionMismatch("n and m must be positive");
  if (!doc.at("sigma").is_number()) throw ParseError("sigma must be a number");
  const double sigma = doc.at("sigma").get<double>();

  Matrix A = matrix_field(doc, "A");
  Matrix A_bar = matrix_field(doc, "A_bar");
  Matrix B = matrix_field(doc, "B");
  Matrix B_bar = matrix_field(doc, "B_bar");
  check_shape(A, n, n, "A");
  check_shape(A_bar, n, n, "A_bar");
  check_shape(B, n, m, "B");
  check_shape(B_bar, n, m, "B_bar");
  return SystemSpec(std::move(A), std::move(A_bar), std::move(B), std::move(B_bar), sigma);
}

SystemSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

std::string dump_spec(const SystemSpec& spec) {
  json doc;
  doc["n"] = spec.n();
  doc["m"] = spec.m();
  doc["A"] = matrix_json(spec.A());
  doc["A_bar"] = matrix_json(spec.A_bar());
  doc["B"] = matrix_json(spec.B());
  doc["B_bar"] = matrix_json(spec.B_bar());
  doc["sigma"] = spec.sigma();
  return doc.dump(2) + "\n";
}

SystemSpec scale_A(const SystemSpec& spec, double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("theta must be > 0");
  return SystemSpec(theta * spec.A(), spec.A_bar(), spec.B(), spec.B_bar(), spec.sigma());
}

SystemSpec with_sigma(const SystemSpec& spec, double sigma) {
  return SystemSpec(spec.A(), spec.A_bar(), spec.B(), spec.B_bar(), sigma);
}

}  // namespace msrate
