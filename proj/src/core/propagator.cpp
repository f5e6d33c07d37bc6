#include "propagator.hpp"

#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pcb {

void validate_scaling(const RegimeScaling& s)
{
    if (!(s.epsilon > 0.0 && s.epsilon < 1.0))
        config_error("epsilon must lie in (0,1)");
    if (!(s.k0 > 0.0) || !std::isfinite(s.k0))
        config_error("k0 must be positive");
    if (s.regime == RegimeKind::diffusive && !(s.epsilon < std::exp(-std::numbers::e)))
        config_error("diffusive regime requires epsilon < e^{-e} ~ 0.0660 so that ln ln(1/epsilon) > 0");
    if (s.regime == RegimeKind::custom && (!(s.eta_custom > 0.0) || !std::isfinite(s.eta_custom)))
        config_error("custom eta must be positive");
}

double eta(const RegimeScaling& s)
{
    validate_scaling(s);
    switch (s.regime) {
    case RegimeKind::kinetic:
        return 1.0;
    case RegimeKind::diffusive:
        return 1.0 / std::log(std::log(1.0 / s.epsilon));
    case RegimeKind::custom:
        return s.eta_custom;
    }
    return 1.0;
}

PropagationPlan make_plan(double z_final, int n_steps, std::vector<double> record_planes)
{
    if (!(z_final > 0.0) || !std::isfinite(z_final))
        config_error("z_final must be positive");
    if (n_steps < 1)
        config_error("n_steps must be at least 1");
    PropagationPlan plan;
    plan.z_final = z_final;
    plan.n_steps = n_steps;
    if (record_planes.empty())
        record_planes.push_back(z_final);
    double dz = z_final / n_steps;
    for (double z : record_planes) {
        if (!(z >= 0.0 && z <= z_final * (1.0 + 1e-12)))
            config_error("record planes must lie in [0, z_final]");
        double snapped = std::round(z / dz) * dz;
        if (std::abs(snapped - z) > 1e-9 * std::max(1.0, z_final)) {
            std::ostringstream os;
            os << "record plane " << z << " snapped to step boundary " << snapped;
            warn(os.str());
        }
        plan.record_planes.push_back(snapped);
    }
    std::sort(plan.record_planes.begin(), plan.record_planes.end());
    plan.record_planes.erase(std::unique(plan.record_planes.begin(), plan.record_planes.end(),
                                         [dz](double a, double b) { return std::abs(a - b) < 0.5 * dz; }),
                             plan.record_planes.end());
    return plan;
}

double default_step(const RegimeScaling& scaling, const Grid& grid, const MediumSpec& medium)
{
    double dz = scaling.epsilon * scaling.k0 * grid.dx * grid.dx * grid.n / (8.0 * std::numbers::pi);
    if (medium.kind == MediumKind::gaussian)
        dz = std::min(dz, medium.ell_m / 4.0);
    return dz;
}

SplitStepper::SplitStepper(const MediumSpec& medium, const RegimeScaling& scaling, const Grid& grid, double dz)
    : grid_(grid), dz_(dz), sampler_(medium, grid, dz)
{
    double e = eta(scaling);
    phase_coeff_ = e / (4.0 * scaling.k0 * scaling.epsilon);
    screen_coeff_ = scaling.k0 / (2.0 * e);
    if (screen_coeff_ * std::sqrt(dz * medium.sigma_R2) > std::numbers::pi)
        warn("screen phase wraps: reduce the propagation step");
    k2_.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        Point k = grid.wavevector(j);
        k2_[j] = grid.dim == 1 ? k[0] * k[0] : norm2(k);
    }
}

void SplitStepper::free_spectral(std::vector<cplx>& spectrum, double fraction) const
{
    // Half step of exp(i eta dz / (2 k0 eps) Laplacian) is exp(-i eta dz |k|^2 / (4 k0 eps)),
    // so a full step is twice that phase.
    double c = 2.0 * phase_coeff_ * dz_ * fraction;
    for (std::size_t j = 0; j < spectrum.size(); ++j)
        spectrum[j] *= std::polar(1.0, -c * k2_[j]);
}

void SplitStepper::apply_screen(std::vector<cplx>& field, const std::vector<double>& screen) const
{
    for (std::size_t j = 0; j < field.size(); ++j)
        field[j] *= std::polar(1.0, screen_coeff_ * screen[j]);
}

void SplitStepper::step(ComplexField& u, RandomStream& stream) const
{
    const auto dims = grid_.dims();
    const double inv = 1.0 / double(grid_.size());
    std::vector<double> screen;
    sample_screen(stream, screen);
    fft_inplace(u.values.data(), dims, -1);
    free_spectral(u.values, 0.5);
    fft_inplace(u.values.data(), dims, +1);
    for (auto& v : u.values)
        v *= inv;
    apply_screen(u.values, screen);
    fft_inplace(u.values.data(), dims, -1);
    free_spectral(u.values, 0.5);
    fft_inplace(u.values.data(), dims, +1);
    for (auto& v : u.values)
        v *= inv;
}

ComplexField split_step(const ComplexField& u, const MediumSpec& medium, const RegimeScaling& scaling, double dz,
                        RandomStream& stream)
{
    if (!(dz > 0.0))
        config_error("step dz must be positive");
    SplitStepper stepper(medium, scaling, u.grid, dz);
    ComplexField out = u;
    stepper.step(out, stream);
    return out;
}

PlaneStack propagate(const SourceRealization& source, const MediumSpec& medium, const RegimeScaling& scaling,
                     const PropagationPlan& plan, RandomStream& stream)
{
    if (source.fields.empty())
        config_error("source realization has no time samples");
    const Grid& grid = source.fields.front().grid;
    for (const auto& f : source.fields)
        if (f.grid.n != grid.n || f.grid.dim != grid.dim || f.grid.dx != grid.dx)
            config_error("source time samples live on different grids");
    const double dz = plan.dz();
    SplitStepper stepper(medium, scaling, grid, dz);
    const auto dims = grid.dims();
    const double inv = 1.0 / double(grid.size());
    const std::size_t n_times = source.fields.size();

    // Step index at which each plane is recorded.
    std::vector<int> record_steps;
    for (double z : plan.record_planes)
        record_steps.push_back(int(std::lround(z / dz)));

    PlaneStack out(record_steps.size());
    std::size_t next_plane = 0;
    auto record = [&](int step_index, const std::vector<std::vector<cplx>>& physical) {
        while (next_plane < record_steps.size() && record_steps[next_plane] == step_index) {
            for (std::size_t t = 0; t < n_times; ++t) {
                ComplexField f(grid);
                f.values = physical[t];
                f.time_index = source.fields[t].time_index;
                check_boundary(f, "record plane");
                out[next_plane].push_back(std::move(f));
            }
            ++next_plane;
        }
    };

    std::vector<std::vector<cplx>> state(n_times);
    for (std::size_t t = 0; t < n_times; ++t)
        state[t] = source.fields[t].values;
    record(0, state);

    // Spectral state carries a pending half step between screens unless a
    // plane is recorded, which completes it.
    std::vector<double> screen;
    bool pending_half = false;
    for (int s = 1; s <= plan.n_steps && next_plane < record_steps.size(); ++s) {
        stepper.sample_screen(stream, screen);
        for (std::size_t t = 0; t < n_times; ++t) {
            auto& v = state[t];
            if (!pending_half)
                fft_inplace(v.data(), dims, -1);
            stepper.free_spectral(v, pending_half ? 1.0 : 0.5);
            fft_inplace(v.data(), dims, +1);
            for (auto& x : v)
                x *= inv;
            stepper.apply_screen(v, screen);
            fft_inplace(v.data(), dims, -1);
        }
        pending_half = true;
        bool at_record = next_plane < record_steps.size() && record_steps[next_plane] == s;
        if (at_record) {
            for (std::size_t t = 0; t < n_times; ++t) {
                auto& v = state[t];
                stepper.free_spectral(v, 0.5);
                fft_inplace(v.data(), dims, +1);
                for (auto& x : v)
                    x *= inv;
            }
            pending_half = false;
            record(s, state);
        }
    }
    return out;
}

} // namespace pcb
