#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ccm/chtc.hpp"
#include "ccm/geometry.hpp"
#include "ccm/solver.hpp"
#include "ccm/thermal_block.hpp"

namespace ccm {

/// Boundary-balance samples of one strand face, one per surface node.
struct FluxSamples {
  std::vector<double> coord;
  std::vector<double> p;  // W/m^2
  std::vector<double> q;  // K
  std::vector<std::optional<double>> y;  // nozzle offset, B members only
  std::vector<Membership> membership;

  std::size_t size() const { return p.size(); }
};

/// Temperatures at the surface node and the next two nodes into the strand.
struct StencilTemperatures {
  std::vector<double> t0, t1, t2;
  std::vector<double> lambda0;  // conductivity at the surface node
  double q = 0.0;               // node spacing along the normal
};

/// Measured surface temperatures per face; an empty face is not measured and
/// keeps the context boundary condition.
struct SurfaceMeasurement {
  std::vector<double> inner;
  std::vector<double> outer;
};

/// Model-side knowledge used to close the interior problem: a section state
/// from a forward run with prior coefficients (starting field, inflow, speed)
/// and the boundary law of any unmeasured face.
struct InteriorContext {
  ThermalBlock block;
  FaceEnvironment inner_env, outer_env;
  std::vector<double> alpha_inner, alpha_outer;
};

InteriorContext interior_context(const Machine& model, const std::string& section);

struct DirichletOptions {
  double tolerance = 1e-6;  // max |dT/dtau| [K/s] at convergence
  int max_steps = 50000;
  kernels::Backend backend = kernels::Backend::serial;
};

/// Quasi-steady interior field for the measured surface data: the section's
/// own discrete balance (conduction, phase change and withdrawal) is relaxed
/// to steady state with the measured face nodes held fixed. Returns the
/// stencil of `face`. Throws NumericError with the final residual when the
/// step budget runs out.
StencilTemperatures solve_interior_dirichlet(const InteriorContext& context, const SurfaceMeasurement& measured,
                                             Face face, const DirichletOptions& options = {});

/// The relaxed block itself; placed in a context it warm-starts solves for nearby data.
ThermalBlock relax_interior(const InteriorContext& context, const SurfaceMeasurement& measured,
                           const DirichletOptions& options = {});
StencilTemperatures face_stencil(const ThermalBlock& block, Face face);

/// P_i = lambda (T2 - 4 T1 + 3 T0) / (2q) - C (T_env^4 - T0^4), Q_i = T_env - T0.
FluxSamples flux_samples(const StencilTemperatures& stencil, const FaceEnvironment& env, const SectionGrid& grid);

inline constexpr double min_abs_q = 1e-6;

/// argmin sum (P - alpha_c Q)^2 over K members. Throws DegenerateDataError.
double fit_alpha_c(const FluxSamples& samples);
/// argmin over B members with alpha_c held fixed. Throws DegenerateDataError.
double fit_alpha_p(const FluxSamples& samples, double alpha_c, double w);

/// Raw arrays variants (all samples used).
double fit_alpha_c(std::span<const double> p, std::span<const double> q);
double fit_alpha_p(std::span<const double> p, std::span<const double> q, std::span<const double> y, double alpha_c,
                   double w);

struct DirectReversion {
  std::vector<double> coord;
  std::vector<double> alpha;
  std::vector<std::size_t> source_index;
  std::size_t excluded = 0;
};

DirectReversion direct_reversion(const FluxSamples& samples);

struct Identification {
  std::string section;
  Face face = Face::inner;
  ChtcProfile profile;  // alpha_p clipped at 0
  double alpha_p_raw = 0.0;
  FluxSamples samples;
  std::size_t excluded = 0;
  double residual_norm = 0.0;  // sqrt(sum (P - alpha Q)^2) over used samples
  bool no_enhancement = false;
};

/// Dirichlet solve, flux samples, alpha_c on K, alpha_p on B.
Identification identify(const InteriorContext& context, const SectionGrid& grid, const SurfaceMeasurement& measured,
                        Face face, const DirichletOptions& options = {});

void write_identification_report(std::ostream& out, const Identification& id);

}  // namespace ccm
