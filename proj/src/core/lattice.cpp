#include "lattice.hpp"

#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pcb {

Point Grid::point(std::size_t flat) const
{
    if (dim == 1)
        return {coordinate(0, int(flat)), 0.0};
    return {coordinate(0, int(flat / n)), coordinate(1, int(flat % n))};
}

double Grid::wavenumber(int index) const
{
    int m = index < n / 2 ? index : index - n;
    return 2.0 * std::numbers::pi * m / (n * dx);
}

Point Grid::wavevector(std::size_t flat) const
{
    if (dim == 1)
        return {wavenumber(int(flat)), 0.0};
    return {wavenumber(int(flat / n)), wavenumber(int(flat % n))};
}

std::vector<double> Grid::coordinates() const
{
    std::vector<double> c(n);
    for (int i = 0; i < n; ++i)
        c[i] = coordinate(0, i);
    return c;
}

std::vector<double> Grid::wavenumbers_sorted() const
{
    std::vector<double> k(n);
    for (int m = -n / 2; m < n / 2; ++m)
        k[m + n / 2] = 2.0 * std::numbers::pi * m / (n * dx);
    return k;
}

std::size_t Grid::nearest(const Point& p) const
{
    auto index = [&](int axis) {
        double u = (p[axis] - origin[axis]) / dx;
        long i = std::lround(u);
        if (i < 0 || i >= n) {
            std::ostringstream os;
            os << "point coordinate " << p[axis] << " lies outside the grid";
            config_error(os.str());
        }
        return std::size_t(i);
    };
    if (dim == 1)
        return index(0);
    return index(0) * n + index(1);
}

Grid make_grid(int dim, int n_per_axis, double dx, const std::vector<double>& origin)
{
    if (dim != 1 && dim != 2)
        config_error("grid dimension must be 1 or 2");
    if (n_per_axis < 8 || (n_per_axis & (n_per_axis - 1)) != 0)
        config_error("grid points per axis must be a power of two and at least 8");
    if (!(dx > 0.0))
        config_error("grid spacing dx must be positive");
    Grid g;
    g.dim = dim;
    g.n = n_per_axis;
    g.dx = dx;
    for (int a = 0; a < dim && a < int(origin.size()); ++a)
        g.origin[a] = origin[a];
    return g;
}

Grid make_centered_grid(int dim, int n_per_axis, double dx)
{
    double o = -0.5 * n_per_axis * dx;
    return make_grid(dim, n_per_axis, dx, {o, o});
}

double ComplexField::squared_norm() const
{
    double s = 0.0;
    for (const auto& v : values)
        s += std::norm(v);
    return std::pow(grid.dx, grid.dim) * s;
}

ComplexField forward_spectrum(const ComplexField& f)
{
    ComplexField out = f;
    fft_inplace(out.values.data(), f.grid.dims(), -1);
    return out;
}

ComplexField inverse_spectrum(const ComplexField& spectrum)
{
    ComplexField out = spectrum;
    fft_inplace(out.values.data(), spectrum.grid.dims(), +1);
    double scale = 1.0 / double(spectrum.grid.size());
    for (auto& v : out.values)
        v *= scale;
    return out;
}

double spectral_squared_norm(const ComplexField& spectrum)
{
    double s = 0.0;
    for (const auto& v : spectrum.values)
        s += std::norm(v);
    return std::pow(spectrum.grid.dx, spectrum.grid.dim) * s / double(spectrum.grid.size());
}

double boundary_fraction(const ComplexField& f)
{
    const Grid& g = f.grid;
    double peak = 0.0;
    for (const auto& v : f.values)
        peak = std::max(peak, std::norm(v));
    if (peak == 0.0)
        return 0.0;
    double edge = 0.0;
    if (g.dim == 1) {
        edge = std::max(std::norm(f.values.front()), std::norm(f.values.back()));
    } else {
        int n = g.n;
        for (int i = 0; i < n; ++i) {
            edge = std::max({edge, std::norm(f.values[i]), std::norm(f.values[std::size_t(n - 1) * n + i]),
                             std::norm(f.values[std::size_t(i) * n]),
                             std::norm(f.values[std::size_t(i) * n + n - 1])});
        }
    }
    return edge / peak;
}

void check_boundary(const ComplexField& f, const std::string& context)
{
    double frac = boundary_fraction(f);
    if (frac > 1e-8) {
        std::ostringstream os;
        os << "boundary intensity exceeds 1e-8 of peak (" << context << "); enlarge the grid";
        warn(os.str());
    }
}

} // namespace pcb
