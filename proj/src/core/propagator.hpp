#pragma once

#include "lattice.hpp"
#include "medium.hpp"
#include "rng.hpp"
#include "source.hpp"

#include <vector>

namespace pcb {

enum class RegimeKind { kinetic, diffusive, custom };

struct RegimeScaling {
    double epsilon = 0.05;
    RegimeKind regime = RegimeKind::kinetic;
    double eta_custom = 1.0;
    double k0 = 1.0;
};

// Validates the scaling (diffusive needs epsilon < e^{-e}).
void validate_scaling(const RegimeScaling& scaling);
double eta(const RegimeScaling& scaling);

struct PropagationPlan {
    double z_final = 1.0;
    int n_steps = 1;
    std::vector<double> record_planes;
    double dz() const { return z_final / n_steps; }
};

// Snaps record planes to step boundaries (warning when one moves), sorts and
// deduplicates them. An empty list records z_final only.
PropagationPlan make_plan(double z_final, int n_steps, std::vector<double> record_planes);

// Default step: min(eps k0 dx^2 n / (8 pi), ell_m / 4).
double default_step(const RegimeScaling& scaling, const Grid& grid, const MediumSpec& medium);

// Strang split-step integrator on one grid. Fields are advanced in place.
class SplitStepper {
  public:
    SplitStepper(const MediumSpec& medium, const RegimeScaling& scaling, const Grid& grid, double dz);

    // Multiplies a forward spectrum by the free propagator over fraction*dz.
    void free_spectral(std::vector<cplx>& spectrum, double fraction) const;
    // exp(i (k0 / 2 eta) screen) pointwise.
    void apply_screen(std::vector<cplx>& field, const std::vector<double>& screen) const;
    void sample_screen(RandomStream& stream, std::vector<double>& screen) const { sampler_.sample(stream, screen); }

    // One full step: half free, screen, half free.
    void step(ComplexField& u, RandomStream& stream) const;

    double dz() const { return dz_; }
    const Grid& grid() const { return grid_; }

  private:
    Grid grid_;
    double dz_;
    double phase_coeff_; // eta / (4 k0 eps) so half steps use exp(-i coeff dz |k|^2)
    double screen_coeff_; // k0 / (2 eta)
    std::vector<double> k2_;
    PhaseScreenSampler sampler_;
};

ComplexField split_step(const ComplexField& u, const MediumSpec& medium, const RegimeScaling& scaling, double dz,
                        RandomStream& stream);

// Output indexed [plane][time sample]. All time samples see the same screens.
using PlaneStack = std::vector<std::vector<ComplexField>>;

PlaneStack propagate(const SourceRealization& source, const MediumSpec& medium, const RegimeScaling& scaling,
                     const PropagationPlan& plan, RandomStream& stream);

} // namespace pcb
