#ifndef AIF_ERRORS_HPP
#define AIF_ERRORS_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace aif {

/// Network or controller composition violates a structural invariant
/// (dimension mismatch, unknown species, double feedback attachment, ...).
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The moment analysis cannot be carried out for this network
/// (non-unimolecular structure, singular SW, ...).
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A formula was evaluated outside its domain of validity. When the cause is a
/// non-Hurwitz matrix, `eigenvalue()` holds the offending eigenvalue.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what, std::complex<double> eigenvalue = {0.0, 0.0})
      : std::domain_error(what), eigenvalue_(eigenvalue) {}

  std::complex<double> eigenvalue() const noexcept { return eigenvalue_; }

 private:
  std::complex<double> eigenvalue_;
};

/// Floating point breakdown: non-finite propensities, eigen-solver failure.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment or model configuration. Messages carry the JSON path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aif

#endif  // AIF_ERRORS_HPP
