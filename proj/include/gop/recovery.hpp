#pragma once

#include "gop/sampling.hpp"

namespace gop {

struct RecoveryOptions {
  Real rank_tol = kDefaultRankTol;
  /// Round recovered parameters to integers and refit coefficients; always
  /// on for integer-parameter families.
  bool round_integer_params = false;
  /// Slack for the parameter-region check on inverted roots. Noise moves
  /// recovered parameters continuously, so this is far looser than the
  /// config-validation slack; clearly off-branch roots still land far
  /// outside and are skipped.
  Real region_slack = 1e-2;
};

struct RecoveryDiagnostics {
  RealVector singular_values;
  /// Relative l2 misfit of the refitted model against the raw measurements.
  Real residual = 0;
  Real min_root_separation = 0;
  Real min_param_separation = 0;
  std::vector<std::string> warnings;
};

struct RecoveryResult {
  /// Annihilating polynomial coefficients, ascending, normalized to a
  /// leading one.
  ComplexVector prony;
  /// All polynomial roots, i.e. candidate spectral values.
  ComplexVector mapped_roots;
  /// Parameters recovered through the inverse spectral map, sorted by real
  /// part then imaginary part; off-branch roots are skipped with a warning.
  ComplexVector params;
  ComplexVector coefficients;
  /// Populated for integer-parameter families (and on request).
  std::vector<long> rounded_params;
  ComplexVector refit_coefficients;
  RecoveryDiagnostics diagnostics;
};

/// Number of singular values above tol times the largest one.
int estimate_order(const ComplexMatrix& matrix, Real tol = kDefaultRankTol);

/// Least-squares coefficients for known parameters against the scheme's
/// measured data. Hankel schemes use all 2M distinct data values; general
/// schemes stack every matrix entry.
ComplexVector solve_coefficients(const SamplingScheme& scheme,
                                 const MeasurementMap& values,
                                 const ComplexVector& params);

/// Full pipeline: assemble, null vector, polynomial roots, inverse spectral
/// map, coefficient fit, diagnostics.
RecoveryResult recover(const SamplingScheme& scheme,
                       const MeasurementMap& values,
                       const RecoveryOptions& options = {});

}  // namespace gop
