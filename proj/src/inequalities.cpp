#include "degentaxis/inequalities.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <span>

#include "degentaxis/error.hpp"
#include "degentaxis/parallel.hpp"

namespace degentaxis {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Portable uniform on [0, 1): the standard distributions are not
// bit-identical across library implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename Fn>
double integrate_cells(const Grid& g, Fn&& fn) {
  Field terms(g);
  parallel_for(g.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) terms[i] = fn(i);
  });
  return integrate(terms);
}

void require_positive(const Field& f, const char* name) {
  require_finite(f, name);
  for (double x : f.values) {
    if (!(x > 0.0)) throw InvalidArgument(std::string(name) + " must be strictly positive");
  }
}

ConstantFit fit_impl(const Grid& grid, InequalityKind kind, const InequalityExponents& e, int sample_count,
                     std::uint64_t first_seed, const SamplerOptions& opts, bool allow_inadmissible) {
  if (sample_count <= 0) throw InvalidArgument("fit_constant needs sample_count > 0");
  if (!allow_inadmissible) {
    const auto bad = exponent_violations(kind, e);
    if (!bad.empty()) throw RegimeError(to_string(kind) + ": " + bad.front());
  }
  std::vector<InequalityCase> cases(static_cast<std::size_t>(sample_count));
  parallel_for(
      cases.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const std::uint64_t seed = first_seed + i;
          const auto [phi, psi] = sample_pair(grid, kind, e, seed, opts);
          cases[i] = evaluate_inequality(kind, e, phi, psi, true);
          cases[i].seed = seed;
        }
      },
      1);

  ConstantFit fit;
  bool first = true;
  for (const auto& c : cases) {
    if (c.constant_weight < 1e-12) {
      ++fit.skipped;
      continue;
    }
    fit.ratios.push_back(c.implied_constant);
    if (first || c.implied_constant > fit.c_hat) {
      fit.c_hat = c.implied_constant;
      fit.argmax_seed = c.seed;
      first = false;
    }
  }
  fit.cases = std::move(cases);
  return fit;
}

}  // namespace

std::string to_string(InequalityKind k) {
  switch (k) {
    case InequalityKind::MassPower: return "mass-power";
    case InequalityKind::LrProduct: return "lr-product";
    case InequalityKind::QuarticSignal: return "quartic-signal";
    case InequalityKind::PowerSignal: return "power-signal";
  }
  return "?";
}

InequalityKind inequality_from_string(const std::string& s) {
  for (auto k : {InequalityKind::MassPower, InequalityKind::LrProduct, InequalityKind::QuarticSignal,
                 InequalityKind::PowerSignal}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown inequality '" + s +
                        "' (expected mass-power, lr-product, quartic-signal or power-signal)");
}

std::optional<double> mass_exponent(InequalityKind kind, const InequalityExponents& e) {
  switch (kind) {
    case InequalityKind::MassPower: return e.p_star;
    case InequalityKind::LrProduct: return std::nullopt;
    case InequalityKind::QuarticSignal: return 1.0;
    case InequalityKind::PowerSignal: return e.p0;
  }
  return std::nullopt;
}

std::vector<std::string> exponent_violations(InequalityKind kind, const InequalityExponents& e) {
  std::vector<std::string> out;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) out.push_back(what);
  };
  switch (kind) {
    case InequalityKind::MassPower:
      need(e.p_star >= 1.0, "p* >= 1");
      need(e.q >= 0.0 && e.q <= 2.0 * e.p_star / 3.0, "q in [0, 2p*/3]");
      need(e.bound > 0.0, "M > 0");
      break;
    case InequalityKind::LrProduct:
      need(e.p > 0.0, "p > 0");
      need(e.r > 1.0 && e.r < 6.0, "r in (1, 6)");
      need(e.eta > 0.0, "eta > 0");
      break;
    case InequalityKind::QuarticSignal:
      need(e.k > -1.0 && e.k < -1.0 / 3.0, "k in (-1, -1/3)");
      need(e.beta >= 1.0 && e.beta < e.k + 8.0 / 3.0, "beta in [1, k + 8/3)");
      need(e.bound > 0.0, "L > 0");
      break;
    case InequalityKind::PowerSignal:
      need(e.p0 > 1.5, "p0 > 3/2");
      need(e.p > 1.0, "p > 1");
      need(e.q > 2.0 + 3.0 * e.p / e.p0, "q > 2 + 3p/p0");
      need(e.beta >= 1.0 && e.beta < 2.0 * e.p0 / 3.0 + e.p + 1.0, "beta in [1, 2p0/3 + p + 1)");
      need(e.eta > 0.0 && e.eta < 1.0, "eta in (0, 1)");
      need(e.bound > 0.0, "L > 0");
      break;
  }
  return out;
}

InequalityCase evaluate_inequality(InequalityKind kind, const InequalityExponents& e, const Field& phi,
                                   const Field& psi, bool allow_inadmissible) {
  if (!(phi.grid == psi.grid)) throw InvalidArgument("phi and psi live on different grids");
  require_positive(phi, "phi");
  require_positive(psi, "psi");

  InequalityCase c;
  c.kind = kind;
  c.exponents = e;
  c.violations = exponent_violations(kind, e);
  if (const auto m = mass_exponent(kind, e)) {
    const double mass = integrate_cells(phi.grid, [&](std::size_t i) { return std::pow(phi[i], *m); });
    if (mass > e.bound * (1.0 + 1e-12)) c.violations.push_back("mass bound int phi^m <= bound");
  }
  if (!allow_inadmissible && !c.violations.empty()) {
    throw RegimeError(to_string(kind) + ": " + c.violations.front());
  }

  const Grid& g = phi.grid;
  const Field gphi = cell_gradient_squared(phi);
  const Field gpsi = cell_gradient_squared(psi);
  const double mass_term = integrate_product(phi, psi);

  double grad_phi = 0.0;
  double grad_psi = 0.0;
  double weight = mass_term;
  double fixed_coeff = 1.0;
  switch (kind) {
    case InequalityKind::MassPower: {
      const double p = (2.0 * e.p_star + 3.0) / 3.0;
      c.lhs = integrate_cells(g, [&](std::size_t i) { return std::pow(phi[i], p) * psi[i]; });
      grad_phi = integrate_cells(g, [&](std::size_t i) { return std::pow(phi[i], e.q - 1.0) * psi[i] * gphi[i]; });
      grad_psi = integrate_cells(g, [&](std::size_t i) { return phi[i] / psi[i] * gpsi[i]; });
      fixed_coeff = 0.0;
      weight = grad_phi + grad_psi + mass_term;
      break;
    }
    case InequalityKind::LrProduct: {
      const double s = 0.5 * e.r * (e.p + 1.0);
      const double lr = integrate_cells(g, [&](std::size_t i) { return std::pow(phi[i], s) * std::pow(psi[i], 0.5 * e.r); });
      c.lhs = std::pow(lr, 2.0 / e.r);
      grad_phi = integrate_cells(g, [&](std::size_t i) { return std::pow(phi[i], e.p - 1.0) * psi[i] * gphi[i]; });
      grad_psi = integrate_cells(g, [&](std::size_t i) { return std::pow(phi[i], e.p + 1.0) / psi[i] * gpsi[i]; });
      fixed_coeff = e.eta;
      weight = std::pow(integrate(phi), e.p) * mass_term;
      break;
    }
    case InequalityKind::QuarticSignal: {
      c.lhs = integrate_cells(g, [&](std::size_t i) { return std::pow(phi[i], e.beta) * psi[i]; });
      grad_phi = integrate_cells(g, [&](std::size_t i) { return std::pow(phi[i], e.k) * psi[i] * gphi[i]; });
      grad_psi = integrate_cells(g, [&](std::size_t i) { return phi[i] * gpsi[i] * gpsi[i] / (psi[i] * psi[i] * psi[i]); });
      break;
    }
    case InequalityKind::PowerSignal: {
      c.lhs = integrate_cells(g, [&](std::size_t i) { return std::pow(phi[i], e.beta) * psi[i]; });
      grad_phi = integrate_cells(g, [&](std::size_t i) { return std::pow(phi[i], e.p - 1.0) * psi[i] * gphi[i]; });
      grad_psi = integrate_cells(g, [&](std::size_t i) {
        return phi[i] * std::pow(gpsi[i], 0.5 * e.q) / std::pow(psi[i], e.q - 1.0);
      });
      fixed_coeff = e.eta;
      break;
    }
  }
  c.rhs_terms = {{"grad_phi", grad_phi}, {"grad_psi", grad_psi}, {"mass", mass_term}};
  c.fixed_part = fixed_coeff * (grad_phi + grad_psi);
  c.constant_weight = weight;
  c.implied_constant = weight > 0.0 ? std::max(0.0, (c.lhs - c.fixed_part) / weight) : 0.0;
  return c;
}

Field sample_positive_field(const Grid& grid, std::uint64_t seed, int mode_count, double min_value, double offset) {
  if (!(min_value > 0.0)) throw InvalidArgument("sample_positive_field needs min_value > 0");
  if (mode_count < 0) throw InvalidArgument("sample_positive_field needs mode_count >= 0");
  std::mt19937_64 rng(seed);

  // cos(pi k x / L) per axis at the cell centers
  std::array<std::vector<std::vector<double>>, 3> basis;
  for (int a = 0; a < 3; ++a) {
    const int kmax = a < grid.dim ? mode_count : 0;
    basis[a].assign(kmax + 1, std::vector<double>(grid.cells[a]));
    for (int k = 0; k <= kmax; ++k) {
      for (int i = 0; i < grid.cells[a]; ++i) {
        basis[a][k][i] = std::cos(M_PI * k * grid.center(a, i) / grid.extents[a]);
      }
    }
  }

  Field f(grid, 0.0);
  const int ky_max = static_cast<int>(basis[1].size()) - 1;
  const int kz_max = static_cast<int>(basis[2].size()) - 1;
  for (int kz = 0; kz <= kz_max; ++kz) {
    for (int ky = 0; ky <= ky_max; ++ky) {
      for (int kx = 0; kx <= mode_count; ++kx) {
        const int total = kx + ky + kz;
        if (total == 0 || total > mode_count) continue;
        const double coeff = (2.0 * uniform01(rng) - 1.0) / total;
        for (int iz = 0; iz < grid.cells[2]; ++iz) {
          for (int iy = 0; iy < grid.cells[1]; ++iy) {
            const double cyz = coeff * basis[1][ky][iy] * basis[2][kz][iz];
            const std::size_t row = grid.index(0, iy, iz);
            for (int ix = 0; ix < grid.cells[0]; ++ix) f[row + ix] += cyz * basis[0][kx][ix];
          }
        }
      }
    }
  }
  const double lo = *std::min_element(f.values.begin(), f.values.end());
  for (double& x : f.values) x = x - lo + min_value + offset;
  return f;
}

std::pair<Field, Field> sample_pair(const Grid& grid, InequalityKind kind, const InequalityExponents& e,
                                    std::uint64_t seed, const SamplerOptions& opts) {
  std::mt19937_64 rng(splitmix64(seed));
  const int span = opts.max_modes + 1;
  const int phi_modes = static_cast<int>(rng() % static_cast<std::uint64_t>(span));
  const int psi_modes = static_cast<int>(rng() % static_cast<std::uint64_t>(span));
  const std::uint64_t phi_seed = rng();
  const std::uint64_t psi_seed = rng();
  Field phi = sample_positive_field(grid, phi_seed, phi_modes, opts.phi_min);
  Field psi = sample_positive_field(grid, psi_seed, psi_modes, opts.psi_min);
  if (uniform01(rng) < opts.spike_fraction) {
    // A bump a few cells wide: the shape that stresses the inequalities
    // as the grid is refined.
    double h = grid.spacing[0];
    for (int a = 1; a < grid.dim; ++a) h = std::min(h, grid.spacing[a]);
    const double width = h * (1.0 + 3.0 * uniform01(rng));
    const double height = 1.0 + 9.0 * uniform01(rng);
    std::array<double, 3> centre{};
    for (int a = 0; a < grid.dim; ++a) centre[a] = grid.extents[a] * uniform01(rng);
    const Field bump = sample_field(grid, [&](double x, double y, double z) {
      const double d[3] = {x - centre[0], y - centre[1], z - centre[2]};
      double r2 = 0.0;
      for (int a = 0; a < grid.dim; ++a) r2 += d[a] * d[a];
      return height * std::exp(-0.5 * r2 / (width * width));
    });
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = opts.phi_min + bump[i];
  }
  if (opts.saturate_bound) {
    if (const auto m = mass_exponent(kind, e)) {
      double mass = 0.0;
      {
        Field pw(grid);
        for (std::size_t i = 0; i < pw.size(); ++i) pw[i] = std::pow(phi[i], *m);
        mass = integrate(pw);
      }
      // slightly inside the bound so rounding never trips the mass check
      const double scale = std::pow(e.bound / mass, 1.0 / *m) * (1.0 - 1e-14);
      for (double& x : phi.values) x *= scale;
    }
  }
  return {std::move(phi), std::move(psi)};
}

ConstantFit fit_constant(const Grid& grid, InequalityKind kind, const InequalityExponents& e, int sample_count,
                         std::uint64_t first_seed, const SamplerOptions& opts) {
  return fit_impl(grid, kind, e, sample_count, first_seed, opts, false);
}

std::vector<HuntEntry> violation_hunt(const Grid& grid, InequalityKind kind,
                                      const std::vector<InequalityExponents>& points, const HuntOptions& opts) {
  if (opts.budget <= 0) throw InvalidArgument("violation_hunt needs budget > 0");
  std::vector<HuntEntry> report;
  for (const auto& e : points) {
    HuntEntry entry;
    entry.exponents = e;
    entry.violations = exponent_violations(kind, e);
    entry.admissible = entry.violations.empty();
    const auto seed_b = opts.seed + static_cast<std::uint64_t>(opts.budget);
    if (entry.admissible) {
      ConstantFit fit = fit_impl(grid, kind, e, opts.budget, opts.seed, opts.sampler, false);
      ConstantFit check = fit_impl(grid, kind, e, opts.budget, seed_b, opts.sampler, false);
      entry.c_hat = fit.c_hat;
      entry.c_hat_check = check.c_hat;
      entry.c_cap = opts.c_cap.value_or(2.0 * fit.c_hat);
      for (const auto& c : check.cases) {
        if (c.constant_weight >= 1e-12 && c.implied_constant > entry.c_cap) {
          ++entry.violation_count;
          entry.violating_seeds.push_back(c.seed);
        }
      }
      entry.cases = std::move(fit.cases);
      entry.cases.insert(entry.cases.end(), check.cases.begin(), check.cases.end());
    } else {
      for (int n : opts.refinement) {
        const std::array<int, 3> cells{n, n, n};
        const Grid fine = make_grid(grid.dim, std::span<const int>(cells.data(), grid.dim),
                                    std::span<const double>(grid.extents.data(), grid.dim));
        const ConstantFit fit = fit_impl(fine, kind, e, opts.budget, opts.seed, opts.sampler, true);
        entry.refinement.emplace_back(n, fit.c_hat);
        if (n == grid.cells[0]) entry.c_hat = fit.c_hat;
      }
    }
    report.push_back(std::move(entry));
  }
  return report;
}

std::string inequality_csv_header() {
  return "inequality,p_star,p,q,r,k,beta,p0,eta,bound,seed,lhs,grad_phi,grad_psi,mass,fixed_part,constant_weight,"
         "implied_constant,admissible";
}

std::string inequality_csv_row(const InequalityCase& c) {
  const auto& e = c.exponents;
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                "%.17g,%d",
                to_string(c.kind).c_str(), e.p_star, e.p, e.q, e.r, e.k, e.beta, e.p0, e.eta, e.bound,
                static_cast<unsigned long long>(c.seed), c.lhs, c.rhs_terms.at(0).second, c.rhs_terms.at(1).second,
                c.rhs_terms.at(2).second, c.fixed_part, c.constant_weight, c.implied_constant,
                c.violations.empty() ? 1 : 0);
  return buf;
}

}  // namespace degentaxis
