#include "nlslab/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace nls {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

double Grid::k(std::size_t i) const {
    const double base = 2.0 * std::numbers::pi / length;
    const auto half = n / 2;
    return i < half ? base * static_cast<double>(i) : base * (static_cast<double>(i) - static_cast<double>(n));
}

std::vector<double> Grid::coords() const {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = x(i);
    return out;
}

std::vector<double> Grid::wavenumbers() const {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = k(i);
    return out;
}

Grid make_grid(std::size_t n, double length, int dim) {
    if (n < 16 || (n & (n - 1)) != 0) throw std::invalid_argument("grid size must be a power of two >= 16");
    if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("grid length must be positive");
    if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
    Grid g;
    g.dim = dim;
    g.n = n;
    g.length = length;
    g.dx = length / static_cast<double>(n);
    return g;
}

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::mutex plan_mutex;
std::map<std::pair<int, std::size_t>, PlanPair> plan_cache;

const PlanPair& plans_for(const Grid& g) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(g.dim, g.n);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;
    const std::size_t total = g.size();
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const int n = static_cast<int>(g.n);
    PlanPair p;
    if (g.dim == 1) {
        p.fwd = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, flags);
        p.bwd = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, flags);
    } else {
        p.fwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, flags);
        p.bwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, flags);
    }
    fftw_free(buf);
    return plan_cache.emplace(key, p).first->second;
}

void check_size(const Grid& g, std::size_t got) {
    if (got != g.size()) throw std::invalid_argument("field size does not match grid");
}

}  // namespace

void fft_forward(const Grid& g, CVec& data) {
    check_size(g, data.size());
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plans_for(g).fwd, p, p);
}

void fft_backward(const Grid& g, CVec& data) {
    check_size(g, data.size());
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plans_for(g).bwd, p, p);
    const double s = 1.0 / static_cast<double>(data.size());
    for (auto& z : data) z *= s;
}

CVec to_complex(const RVec& f) { return CVec(f.begin(), f.end()); }

RVec real_part(const CVec& f) {
    RVec out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
    return out;
}

CVec derivative(const Grid& g, const CVec& f, int axis) {
    CVec h = f;
    fft_forward(g, h);
    const std::size_t n = g.n;
    const std::size_t nyq = n / 2;
    if (g.dim == 1) {
        for (std::size_t i = 0; i < n; ++i) h[i] *= (i == nyq) ? cplx(0.0) : cplx(0.0, g.k(i));
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t idx = axis == 0 ? i : j;
                h[i * n + j] *= (idx == nyq) ? cplx(0.0) : cplx(0.0, g.k(idx));
            }
    }
    fft_backward(g, h);
    return h;
}

RVec derivative(const Grid& g, const RVec& f) { return real_part(derivative(g, to_complex(f), 0)); }

CVec laplacian(const Grid& g, const CVec& f) {
    CVec h = f;
    fft_forward(g, h);
    const std::size_t n = g.n;
    if (g.dim == 1) {
        for (std::size_t i = 0; i < n; ++i) h[i] *= -g.k(i) * g.k(i);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) h[i * n + j] *= -(g.k(i) * g.k(i) + g.k(j) * g.k(j));
    }
    fft_backward(g, h);
    return h;
}

RVec second_derivative(const Grid& g, const RVec& f) { return real_part(laplacian(g, to_complex(f))); }

ComplexField spectral_laplacian(const ComplexField& f) { return {f.grid, laplacian(f.grid, f.values)}; }

CVec spectral_shift(const Grid& g, const CVec& f, double s, int axis) {
    CVec h = f;
    fft_forward(g, h);
    const std::size_t n = g.n;
    const std::size_t nyq = n / 2;
    auto phase = [&](std::size_t i) {
        // Nyquist mode shifted with its real cosine so real fields stay real
        if (i == nyq) return cplx(std::cos(g.k(i) * s), 0.0);
        return std::polar(1.0, -g.k(i) * s);
    };
    if (g.dim == 1) {
        for (std::size_t i = 0; i < n; ++i) h[i] *= phase(i);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) h[i * n + j] *= phase(axis == 0 ? i : j);
    }
    fft_backward(g, h);
    return h;
}

RVec spectral_shift(const Grid& g, const RVec& f, double s) { return real_part(spectral_shift(g, to_complex(f), s, 0)); }

double integrate(const Grid& g, const RVec& f) {
    check_size(g, f.size());
    double s = 0.0;
    for (double v : f) s += v;
    return s * (g.dim == 1 ? g.dx : g.dx * g.dx);
}

cplx integrate(const Grid& g, const CVec& f) {
    check_size(g, f.size());
    cplx s = 0.0;
    for (const auto& v : f) s += v;
    return s * (g.dim == 1 ? g.dx : g.dx * g.dx);
}

double inner(const Grid& g, const RVec& f, const RVec& h) {
    check_size(g, f.size());
    check_size(g, h.size());
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * h[i];
    return s * (g.dim == 1 ? g.dx : g.dx * g.dx);
}

double l2_norm(const Grid& g, const RVec& f) { return std::sqrt(inner(g, f, f)); }

double l2_norm(const Grid& g, const CVec& f) {
    check_size(g, f.size());
    double s = 0.0;
    for (const auto& v : f) s += std::norm(v);
    return std::sqrt(s * (g.dim == 1 ? g.dx : g.dx * g.dx));
}

double l2_norm_spectral(const Grid& g, const CVec& f) {
    CVec h = f;
    fft_forward(g, h);
    double s = 0.0;
    for (const auto& v : h) s += std::norm(v);
    const double cell = g.dim == 1 ? g.dx : g.dx * g.dx;
    return std::sqrt(s * cell / static_cast<double>(h.size()));
}

double h1_norm(const Grid& g, const CVec& f) {
    CVec h = f;
    fft_forward(g, h);
    const std::size_t n = g.n;
    const std::size_t nyq = n / 2;
    double s = 0.0;
    auto k2 = [&](std::size_t i) { return i == nyq ? 0.0 : g.k(i) * g.k(i); };
    if (g.dim == 1) {
        for (std::size_t i = 0; i < n; ++i) s += (1.0 + k2(i)) * std::norm(h[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) s += (1.0 + k2(i) + k2(j)) * std::norm(h[i * n + j]);
    }
    const double cell = g.dim == 1 ? g.dx : g.dx * g.dx;
    return std::sqrt(s * cell / static_cast<double>(h.size()));
}

double h1_norm(const Grid& g, const RVec& f) { return h1_norm(g, to_complex(f)); }

double sup_norm(const RVec& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

double sup_norm(const CVec& f) {
    double m = 0.0;
    for (const auto& v : f) m = std::max(m, std::abs(v));
    return m;
}

RVec even_part(const Grid& g, const RVec& f) {
    check_size(g, f.size());
    RVec out(f.size());
    for (std::size_t i = 0; i < g.n; ++i) out[i] = 0.5 * (f[i] + f[g.mirror(i)]);
    return out;
}

RVec odd_part(const Grid& g, const RVec& f) {
    check_size(g, f.size());
    RVec out(f.size());
    for (std::size_t i = 0; i < g.n; ++i) out[i] = 0.5 * (f[i] - f[g.mirror(i)]);
    // the point x = -L/2 is its own mirror on the periodic grid
    return out;
}

double tail_energy_fraction(const Grid& g, const CVec& f) {
    CVec h = f;
    fft_forward(g, h);
    const double kmax = std::numbers::pi / g.dx;
    const double cut = 0.9 * kmax;
    double tail = 0.0, total = 0.0;
    const std::size_t n = g.n;
    for (std::size_t i = 0; i < h.size(); ++i) {
        double kk;
        if (g.dim == 1) {
            kk = std::abs(g.k(i));
        } else {
            kk = std::max(std::abs(g.k(i / n)), std::abs(g.k(i % n)));
        }
        const double e = std::norm(h[i]);
        total += e;
        if (kk > cut) tail += e;
    }
    return total > 0.0 ? tail / total : 0.0;
}

void write_snapshot(const std::string& path, const ComplexField& f) {
    check_size(f.grid, f.values.size());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open snapshot for writing: " + path);
    out.write("NLSF", 4);
    const std::uint32_t header[3] = {1u, static_cast<std::uint32_t>(f.grid.dim), static_cast<std::uint32_t>(f.grid.n)};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    for (int d = 0; d < f.grid.dim; ++d) out.write(reinterpret_cast<const char*>(&f.grid.length), sizeof(double));
    // std::complex<double> is layout-compatible with double[2]
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(cplx)));
    if (!out) throw std::runtime_error("snapshot write failed: " + path);
}

ComplexField read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "NLSF", 4) != 0) throw std::runtime_error("not an NLSF snapshot: " + path);
    std::uint32_t header[3];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || header[0] != 1u) throw std::runtime_error("unsupported snapshot version");
    const int dim = static_cast<int>(header[1]);
    if (dim != 1 && dim != 2) throw std::runtime_error("bad snapshot dimension");
    double lengths[2] = {0.0, 0.0};
    for (int d = 0; d < dim; ++d) in.read(reinterpret_cast<char*>(&lengths[d]), sizeof(double));
    if (dim == 2 && lengths[0] != lengths[1]) throw std::runtime_error("anisotropic snapshots are not supported");
    ComplexField f{make_grid(header[2], lengths[0], dim), {}};
    f.values.resize(f.grid.size());
    in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(cplx)));
    if (!in) throw std::runtime_error("truncated snapshot: " + path);
    return f;
}

}  // namespace nls
