#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "degentaxis/grid.hpp"

namespace degentaxis {

/// The four weighted interpolation inequalities exercised by the harness.
/// With A, B the gradient integrals of each family:
///   MassPower      int phi^p psi <= C (int phi^{q-1} psi |grad phi|^2
///                                      + int (phi/psi)|grad psi|^2 + int phi psi),
///                  p = (2 p* + 3)/3, 0 <= q <= 2 p*/3, int phi^{p*} <= M
///   LrProduct      ||phi^{(p+1)/2} psi^{1/2}||_{L^r}^2 <= eta int phi^{p-1} psi |grad phi|^2
///                  + eta int phi^{p+1} psi^{-1} |grad psi|^2 + C (int phi)^p int phi psi,
///                  p > 0, 1 < r < 6
///   QuarticSignal  int phi^beta psi <= int phi^k psi |grad phi|^2
///                  + int phi |grad psi|^4 / psi^3 + C int phi psi,
///                  -1 < k < -1/3, 1 <= beta < k + 8/3, int phi <= L
///   PowerSignal    int phi^beta psi <= eta int phi^{p-1} psi |grad phi|^2
///                  + eta int phi |grad psi|^q / psi^{q-1} + C int phi psi,
///                  p0 > 3/2, p > 1, q > 2 + 3p/p0, 1 <= beta < 2 p0/3 + p + 1,
///                  0 < eta < 1, int phi^{p0} <= L
enum class InequalityKind { MassPower, LrProduct, QuarticSignal, PowerSignal };

std::string to_string(InequalityKind k);
/// Accepts the names produced by to_string; throws InvalidArgument otherwise.
InequalityKind inequality_from_string(const std::string& s);

/// Exponent tuple; each family reads only its own entries.
struct InequalityExponents {
  double p_star = 1.0;  ///< MassPower
  double p = 1.0;       ///< LrProduct, PowerSignal (MassPower derives it from p_star)
  double q = 0.0;       ///< MassPower, PowerSignal
  double r = 2.0;       ///< LrProduct
  double k = -0.5;      ///< QuarticSignal
  double beta = 1.0;    ///< QuarticSignal, PowerSignal
  double p0 = 1.6;      ///< PowerSignal
  double eta = 0.5;     ///< LrProduct, PowerSignal
  /// M or L: bound on int phi^m with m = p_star, 1 or p0 (unused by LrProduct).
  double bound = 10.0;
};

/// Exponent of the mass constraint int phi^m <= bound, or nullopt.
std::optional<double> mass_exponent(InequalityKind kind, const InequalityExponents& e);

/// Hypotheses on the exponents that fail, each named; empty when admissible.
std::vector<std::string> exponent_violations(InequalityKind kind, const InequalityExponents& e);

/// One evaluated instance.
struct InequalityCase {
  InequalityKind kind = InequalityKind::MassPower;
  InequalityExponents exponents;
  std::uint64_t seed = 0;
  double lhs = 0.0;
  /// Named right-hand side integrals (without their coefficients).
  std::vector<std::pair<std::string, double>> rhs_terms;
  /// Right-hand side part with a fixed coefficient (1 or eta); 0 for MassPower.
  double fixed_part = 0.0;
  /// The integral the constant multiplies.
  double constant_weight = 0.0;
  /// Smallest C that makes this instance hold (clamped at 0).
  double implied_constant = 0.0;
  /// Violated exponent hypotheses plus a failed mass bound, if any.
  std::vector<std::string> violations;
};

/// Evaluates both sides with the shared discrete calculus. Throws
/// RegimeError naming the first violated hypothesis unless
/// `allow_inadmissible` is set, and InvalidArgument for fields that are not
/// strictly positive or live on different grids.
InequalityCase evaluate_inequality(InequalityKind kind, const InequalityExponents& e, const Field& phi,
                                   const Field& psi, bool allow_inadmissible = false);

/// Truncated cosine series with random coefficients (Neumann-compatible
/// modes of total wave number <= mode_count), shifted so that its minimum
/// equals min_value + offset. mode_count = 0 gives the constant
/// min_value + offset. Deterministic per seed on every platform.
Field sample_positive_field(const Grid& grid, std::uint64_t seed, int mode_count, double min_value,
                            double offset = 0.0);

struct SamplerOptions {
  int max_modes = 4;
  double phi_min = 0.1;
  double psi_min = 0.1;
  /// Share of samples whose phi is a narrow Gaussian spike (width 1-4 cells)
  /// instead of a cosine series.
  double spike_fraction = 0.25;
  /// Rescale phi so the mass constraint is met with equality.
  bool saturate_bound = true;
};

/// The (phi, psi) pair of sample `seed`.
std::pair<Field, Field> sample_pair(const Grid& grid, InequalityKind kind, const InequalityExponents& e,
                                    std::uint64_t seed, const SamplerOptions& opts);

struct ConstantFit {
  double c_hat = 0.0;
  std::uint64_t argmax_seed = 0;
  /// Implied constant per evaluated sample, in seed order.
  std::vector<double> ratios;
  std::vector<InequalityCase> cases;
  /// Samples dropped because the constant's weight fell below 1e-12.
  int skipped = 0;
};

/// Evaluates seeds first_seed, ..., first_seed + sample_count - 1 and
/// returns the largest implied constant. Throws InvalidArgument for
/// sample_count <= 0 and RegimeError for inadmissible exponents.
ConstantFit fit_constant(const Grid& grid, InequalityKind kind, const InequalityExponents& e, int sample_count,
                         std::uint64_t first_seed, const SamplerOptions& opts = {});

struct HuntOptions {
  /// Samples per batch; batch A fits C_hat, batch B is checked against C_cap.
  int budget = 100;
  std::uint64_t seed = 1;
  /// Explicit cap; when unset, 2 * C_hat of batch A.
  std::optional<double> c_cap;
  /// Cells per axis of the refinement study run at inadmissible points.
  std::vector<int> refinement = {16, 32, 64};
  SamplerOptions sampler;
};

struct HuntEntry {
  InequalityExponents exponents;
  bool admissible = true;
  std::vector<std::string> violations;
  double c_hat = 0.0;
  double c_hat_check = 0.0;  ///< C_hat of the check batch
  double c_cap = 0.0;
  int violation_count = 0;
  std::vector<std::uint64_t> violating_seeds;
  /// (cells per axis, C_hat) at inadmissible points.
  std::vector<std::pair<int, double>> refinement;
  std::vector<InequalityCase> cases;
};

/// Fits and checks every exponent point. Inside the admissible ranges a
/// violation is a check-batch sample whose implied constant exceeds C_cap;
/// outside, only the refinement study is logged.
std::vector<HuntEntry> violation_hunt(const Grid& grid, InequalityKind kind,
                                      const std::vector<InequalityExponents>& points, const HuntOptions& opts);

/// CSV header and rows: one row per case.
std::string inequality_csv_header();
std::string inequality_csv_row(const InequalityCase& c);

}  // namespace degentaxis
