#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace nls {

using cplx = std::complex<double>;
using RVec = std::vector<double>;
using CVec = std::vector<cplx>;

// Periodic uniform grid on [-L/2, L/2) per axis.
struct Grid {
    int dim = 1;
    std::size_t n = 0;
    double length = 0.0;
    double dx = 0.0;

    std::size_t size() const { return dim == 1 ? n : n * n; }
    double x(std::size_t i) const { return -0.5 * length + static_cast<double>(i) * dx; }
    // FFT ordering: 0, 1, ..., n/2-1, -n/2, ..., -1 (times 2*pi/L)
    double k(std::size_t i) const;
    std::vector<double> coords() const;
    std::vector<double> wavenumbers() const;
    // index of the mirror point x -> -x
    std::size_t mirror(std::size_t i) const { return (n - i) % n; }
    bool operator==(const Grid& o) const { return dim == o.dim && n == o.n && length == o.length; }
    bool operator!=(const Grid& o) const { return !(*this == o); }
};

Grid make_grid(std::size_t n, double length, int dim = 1);

struct ComplexField {
    Grid grid;
    CVec values;
};

struct RealField {
    Grid grid;
    RVec values;
};

// in-place transforms; backward includes the 1/N factor
void fft_forward(const Grid& g, CVec& data);
void fft_backward(const Grid& g, CVec& data);

CVec to_complex(const RVec& f);
RVec real_part(const CVec& f);

// axis 0 is the slow (row) index in 2D
CVec derivative(const Grid& g, const CVec& f, int axis = 0);
RVec derivative(const Grid& g, const RVec& f);
CVec laplacian(const Grid& g, const CVec& f);
RVec second_derivative(const Grid& g, const RVec& f);
ComplexField spectral_laplacian(const ComplexField& f);

// translate f(x) -> f(x - s) along an axis through the Fourier phase
CVec spectral_shift(const Grid& g, const CVec& f, double s, int axis = 0);
RVec spectral_shift(const Grid& g, const RVec& f, double s);

double integrate(const Grid& g, const RVec& f);
cplx integrate(const Grid& g, const CVec& f);
double inner(const Grid& g, const RVec& f, const RVec& h);
double l2_norm(const Grid& g, const RVec& f);
double l2_norm(const Grid& g, const CVec& f);
double l2_norm_spectral(const Grid& g, const CVec& f);
double h1_norm(const Grid& g, const RVec& f);
double h1_norm(const Grid& g, const CVec& f);
double sup_norm(const RVec& f);
double sup_norm(const CVec& f);

// parity about x = 0 (1D)
RVec even_part(const Grid& g, const RVec& f);
RVec odd_part(const Grid& g, const RVec& f);

// fraction of spectral energy in the outer tenth of the wavenumber band
double tail_energy_fraction(const Grid& g, const CVec& f);

void write_snapshot(const std::string& path, const ComplexField& f);
ComplexField read_snapshot(const std::string& path);

}  // namespace nls
