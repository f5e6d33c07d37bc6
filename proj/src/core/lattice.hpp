#pragma once

#include "common.hpp"

#include <optional>
#include <vector>

namespace pcb {

// Uniform periodic grid. Samples sit at origin + i*dx along each axis, and the
// flat index for d = 2 is i0*n + i1.
struct Grid {
    int dim = 1;
    int n = 8;
    double dx = 1.0;
    Point origin{0.0, 0.0};

    std::size_t size() const { return dim == 1 ? std::size_t(n) : std::size_t(n) * n; }
    double extent() const { return n * dx; }
    double coordinate(int axis, int i) const { return origin[axis] + i * dx; }
    Point point(std::size_t flat) const;
    // Wavenumber for FFT-ordered index: 2*pi*m/(n*dx), m in [-n/2, n/2).
    double wavenumber(int index) const;
    Point wavevector(std::size_t flat) const;
    std::vector<double> coordinates() const;
    std::vector<double> wavenumbers_sorted() const;
    std::vector<int> dims() const { return dim == 1 ? std::vector<int>{n} : std::vector<int>{n, n}; }
    // Nearest grid index to a point; throws if the point is outside the box.
    std::size_t nearest(const Point& p) const;
};

Grid make_grid(int dim, int n_per_axis, double dx, const std::vector<double>& origin);

// Grid centred on zero: origin = -n*dx/2 on each axis.
Grid make_centered_grid(int dim, int n_per_axis, double dx);

struct ComplexField {
    Grid grid;
    std::vector<cplx> values;
    std::optional<int> time_index;

    ComplexField() = default;
    explicit ComplexField(const Grid& g) : grid(g), values(g.size()) {}

    // dx^d * sum |values|^2
    double squared_norm() const;
};

// Forward transform: F_k = sum_j f_j e^{-i k (x_j - origin)}. No normalization.
ComplexField forward_spectrum(const ComplexField& f);
// Inverse transform, carries the 1/n^d factor.
ComplexField inverse_spectrum(const ComplexField& spectrum);
// Parseval partner of squared_norm for a spectrum from forward_spectrum.
double spectral_squared_norm(const ComplexField& spectrum);

// Largest |u|^2 on the outermost grid points divided by the peak |u|^2.
double boundary_fraction(const ComplexField& f);
// Emits a warning when boundary_fraction exceeds 1e-8.
void check_boundary(const ComplexField& f, const std::string& context);

} // namespace pcb
