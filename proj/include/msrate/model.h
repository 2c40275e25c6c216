#pragma once

#include <filesystem>
#include <string>

#include "msrate/linalg.h"

namespace msrate {

/// Problem instance x⁺ = (A + Ā·ω)x + (B + B̄·ω)u with ω ~ N(0, σ²).
/// Immutable once constructed; the constructor checks shapes, finiteness
/// and σ > 0.
class SystemSpec {
 public:
  SystemSpec(Matrix A, Matrix A_bar, Matrix B, Matrix B_bar, double sigma);

  int n() const { return A_.rows(); }
  int m() const { return B_.cols(); }
  const Matrix& A() const { return A_; }
  const Matrix& A_bar() const { return A_bar_; }
  const Matrix& B() const { return B_; }
  const Matrix& B_bar() const { return B_bar_; }
  double sigma() const { return sigma_; }

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;

 private:
  Matrix A_;
  Matrix A_bar_;
  Matrix B_;
  Matrix B_bar_;
  double sigma_;
};

struct ValidationReport {
  bool nondegenerate = false;
  int stacked_rank = 0;     // column rank of [B; σ·B̄]
  double C_A = 0.0;         // λ_max(AAᵀ + σ²ĀĀᵀ)
  double R0_min_eig = 0.0;  // λ_min(BᵀB + σ²B̄ᵀB̄)
};

/// R₀ = BᵀB + σ²B̄ᵀB̄.
SymMatrix input_gram(const SystemSpec& spec);
/// λ_max(AAᵀ + σ²ĀĀᵀ).
double drift_constant(const SystemSpec& spec);

ValidationReport validate(const SystemSpec& spec);

/// Parses the JSON config schema
///   {"n", "m", "A", "A_bar", "B", "B_bar", "sigma"}
/// and rejects unknown keys. Throws ParseError, DimensionMismatch or
/// InvalidSigma.
SystemSpec parse_spec(const std::string& json_text);
SystemSpec load_spec(const std::filesystem::path& path);

/// Inverse of parse_spec. Doubles are written in shortest round-trip form.
std::string dump_spec(const SystemSpec& spec);

/// Copy with A replaced by θ·A.
SystemSpec scale_A(const SystemSpec& spec, double theta);
/// Copy with σ replaced.
SystemSpec with_sigma(const SystemSpec& spec, double sigma);

}  // namespace msrate
