#include "sfis/fkpde.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>

#include "sfis/common.hpp"
#include "sfis/averaging.hpp"

namespace sfis {

namespace {

// B(z) = z / (e^z - 1), the exponential-fitting flux weight, evaluated
// without cancellation on either side of 0.
double bernoulli_weight(double z) {
    if (std::abs(z) < 1e-10) return 1.0 - 0.5 * z;
    if (z > 0.0) return z * std::exp(-z) / (-std::expm1(-z));
    const double w = -z;
    return w * std::exp(-w) / (-std::expm1(-w)) + w;
}

void central_differences(const double* v, double* dv, int n, double dx) {
    for (int i = 1; i + 1 < n; ++i) dv[i] = (v[i + 1] - v[i - 1]) / (2.0 * dx);
    dv[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx);
    dv[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dx);
}

// Pre-factored tridiagonal solver; the matrix is reused every time step.
struct TridiagFactor {
    std::vector<double> lower, diagU, upper;

    TridiagFactor(const std::vector<double>& lo, const std::vector<double>& di,
                  const std::vector<double>& up)
        : lower(lo), diagU(di), upper(up) {
        const std::size_t n = diagU.size();
        for (std::size_t i = 1; i < n; ++i) {
            if (diagU[i - 1] == 0.0)
                throw IllPosedConfig("singular tridiagonal system");
            const double l = lower[i - 1] / diagU[i - 1];
            lower[i - 1] = l;
            diagU[i] -= l * upper[i - 1];
        }
        if (diagU[n - 1] == 0.0) throw IllPosedConfig("singular tridiagonal system");
    }

    void solve(double* rhs) const {
        const std::size_t n = diagU.size();
        for (std::size_t i = 1; i < n; ++i) rhs[i] -= lower[i - 1] * rhs[i - 1];
        rhs[n - 1] /= diagU[n - 1];
        for (std::size_t i = n - 1; i-- > 0;)
            rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diagU[i];
    }
};

double lerp_row(const std::vector<double>& xs, const double* row, double xq) {
    const int n = int(xs.size());
    if (xq <= xs.front()) return row[0];
    if (xq >= xs.back()) return row[n - 1];
    const auto it = std::upper_bound(xs.begin(), xs.end(), xq);
    const int i = int(it - xs.begin()) - 1;
    const double t = (xq - xs[std::size_t(i)]) /
                     (xs[std::size_t(i) + 1] - xs[std::size_t(i)]);
    return (1.0 - t) * row[i] + t * row[i + 1];
}

}  // namespace

double ValueGrid::phiEval(double t, double xq) const {
    const double dt = (T - t0) / double(m);
    double tau = (t - t0) / dt;
    tau = std::clamp(tau, 0.0, double(m));
    const int j = std::min(int(tau), m - 1);
    const double w = tau - double(j);
    const double a = lerp_row(x, phi.data() + std::size_t(j) * nx, xq);
    const double b = lerp_row(x, phi.data() + std::size_t(j + 1) * nx, xq);
    return (1.0 - w) * a + w * b;
}

double ValueGrid::dphiEval(double t, double xq) const {
    const double dt = (T - t0) / double(m);
    double tau = (t - t0) / dt;
    tau = std::clamp(tau, 0.0, double(m));
    const int j = std::min(int(tau), m - 1);
    const double w = tau - double(j);
    const double a = lerp_row(x, dphi.data() + std::size_t(j) * nx, xq);
    const double b = lerp_row(x, dphi.data() + std::size_t(j + 1) * nx, xq);
    return (1.0 - w) * a + w * b;
}

ValueGrid solve_phi0(const AveragedModel& avg, const ModelParams& params,
                     const PdeConfig& cfg) {
    if (cfg.nx < 3 || cfg.m < 1 || !(cfg.xLo < cfg.xHi))
        throw IllPosedConfig("pde grid needs nx >= 3, m >= 1, xLo < xHi");
    const double slack = 1e-9 * (cfg.xHi - cfg.xLo);
    if (avg.grid.front() > cfg.xLo + slack || avg.grid.back() < cfg.xHi - slack)
        throw ValidationError("averaged model does not cover the pde domain");

    const int nx = cfg.nx;
    const int m = cfg.m;
    const double beta = params.beta;
    const double dt = (params.T - params.t0) / double(m);

    ValueGrid grid;
    grid.t0 = params.t0;
    grid.T = params.T;
    grid.m = m;
    grid.nx = nx;
    grid.xLo = cfg.xLo;
    grid.xHi = cfg.xHi;
    grid.x = uniform_nodes(cfg.xLo, cfg.xHi, nx);
    const double dx = (cfg.xHi - cfg.xLo) / double(nx - 1);

    // Face-centered jump rates of the exponentially fitted flux.
    std::vector<double> lamUp(std::size_t(nx) - 1), lamDn(std::size_t(nx) - 1);
    for (int i = 0; i + 1 < nx; ++i) {
        const double a0 = avg.aAt(grid.x[std::size_t(i)]);
        const double a1 = avg.aAt(grid.x[std::size_t(i) + 1]);
        const double aF = (a0 * a0 + a1 * a1) / (4.0 * beta);
        if (!(aF > 0.0)) throw EllipticityViolation("vanishing averaged diffusion");
        const double fF = 0.5 * (avg.fAt(grid.x[std::size_t(i)]) +
                                 avg.fAt(grid.x[std::size_t(i) + 1]));
        const double p = fF * dx / aF;
        lamUp[std::size_t(i)] = aF / (dx * dx) * bernoulli_weight(-p);
        lamDn[std::size_t(i)] = aF / (dx * dx) * bernoulli_weight(p);
    }

    std::vector<double> lower(std::size_t(nx) - 1), diag(std::size_t(nx), 0.0),
        upper(std::size_t(nx) - 1);
    for (int i = 0; i < nx; ++i) {
        double d = 1.0 / dt;
        if (i + 1 < nx) d += lamUp[std::size_t(i)];
        if (i > 0) d += lamDn[std::size_t(i) - 1];
        diag[std::size_t(i)] = d;
    }
    for (int i = 0; i + 1 < nx; ++i) {
        upper[std::size_t(i)] = -lamUp[std::size_t(i)];
        lower[std::size_t(i)] = -lamDn[std::size_t(i)];
    }
    if (cfg.bc == BcRule::dirichlet_one) {
        diag.front() = 1.0;
        upper.front() = 0.0;
        diag.back() = 1.0;
        lower.back() = 0.0;
    }
    TridiagFactor lu(lower, diag, upper);

    std::vector<double> rmul(std::size_t(nx), 0.0);
    for (int i = 0; i < nx; ++i)
        rmul[std::size_t(i)] = 1.0 / dt - beta * avg.hAt(grid.x[std::size_t(i)]);

    grid.phi.assign(std::size_t(m + 1) * nx, 0.0);
    grid.dphi.assign(std::size_t(m + 1) * nx, 0.0);
    double* rowT = grid.phi.data() + std::size_t(m) * nx;
    for (int i = 0; i < nx; ++i) rowT[i] = 1.0;

    std::vector<double> rhs(std::size_t(nx), 0.0);
    for (int j = m - 1; j >= 0; --j) {
        const double* prev = grid.phi.data() + std::size_t(j + 1) * nx;
        for (int i = 0; i < nx; ++i) rhs[std::size_t(i)] = rmul[std::size_t(i)] * prev[i];
        if (cfg.bc == BcRule::dirichlet_one) {
            rhs.front() = 1.0;
            rhs.back() = 1.0;
        }
        lu.solve(rhs.data());
        double* row = grid.phi.data() + std::size_t(j) * nx;
        std::copy(rhs.begin(), rhs.end(), row);
    }

    const double hMin = *std::min_element(avg.hTilde.begin(), avg.hTilde.end());
    for (std::size_t k = 0; k < grid.phi.size(); ++k) {
        if (!(grid.phi[k] > 0.0))
            throw PositivityViolation("phi0 lost positivity; refine the grid");
        if (hMin >= 0.0 && grid.phi[k] > 1.0 + 1e-10)
            throw PositivityViolation("phi0 exceeded the maximum principle bound");
    }

    for (int j = 0; j <= m; ++j)
        central_differences(grid.phi.data() + std::size_t(j) * nx,
                            grid.dphi.data() + std::size_t(j) * nx, nx, dx);
    return grid;
}

ValueGrid log_transform(const ValueGrid& grid, double beta) {
    ValueGrid out = grid;
    for (std::size_t k = 0; k < grid.phi.size(); ++k) {
        if (!(grid.phi[k] > 0.0))
            throw PositivityViolation("log transform requires positive phi0");
        out.phi[k] = -std::log(grid.phi[k]) / beta;
        out.dphi[k] = -grid.dphi[k] / (beta * grid.phi[k]);
    }
    return out;
}

namespace {

// Band LU without pivoting; the five-point operator is strictly
// diagonally dominant so elimination never needs row swaps.
class BandFactor {
public:
    BandFactor(std::size_t n, std::size_t bw) : n_(n), bw_(bw), w_(2 * bw + 1),
                                                a_(n * (2 * bw + 1), 0.0) {}

    double& at(std::size_t i, std::size_t j) {
        return a_[i * w_ + (j + bw_ - i)];
    }

    void factor() {
        for (std::size_t j = 0; j < n_; ++j) {
            const double piv = at(j, j);
            if (piv == 0.0) throw IllPosedConfig("singular banded system");
            const std::size_t iMax = std::min(j + bw_, n_ - 1);
            const std::size_t kMax = std::min(j + bw_, n_ - 1);
            for (std::size_t i = j + 1; i <= iMax; ++i) {
                const double l = at(i, j) / piv;
                if (l == 0.0) continue;
                at(i, j) = l;
                double* ri = &a_[i * w_ + (j + 1 + bw_ - i)];
                const double* rj = &a_[j * w_ + (j + 1 + bw_ - j)];
                for (std::size_t k = 0; k <= kMax - j - 1; ++k) ri[k] -= l * rj[k];
            }
        }
    }

    void solve(std::vector<double>& b) const {
        for (std::size_t i = 1; i < n_; ++i) {
            const std::size_t j0 = i > bw_ ? i - bw_ : 0;
            double s = b[i];
            const double* row = &a_[i * w_];
            for (std::size_t j = j0; j < i; ++j) s -= row[j + bw_ - i] * b[j];
            b[i] = s;
        }
        for (std::size_t i = n_; i-- > 0;) {
            const std::size_t j1 = std::min(i + bw_, n_ - 1);
            double s = b[i];
            const double* row = &a_[i * w_];
            for (std::size_t j = i + 1; j <= j1; ++j) s -= row[j + bw_ - i] * b[j];
            b[i] = s / row[bw_];
        }
    }

private:
    std::size_t n_, bw_, w_;
    std::vector<double> a_;
};

}  // namespace

std::size_t ValueGrid2d::sliceIndex(double t) const {
    std::size_t best = 0;
    double dist = std::abs(times[0] - t);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double d = std::abs(times[k] - t);
        if (d < dist) {
            dist = d;
            best = k;
        }
    }
    return best;
}

namespace {

double bilinear_slice(const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::vector<double>& v, double xq, double yq) {
    const int nx = int(xs.size()), ny = int(ys.size());
    const double xc = std::clamp(xq, xs.front(), xs.back());
    const double yc = std::clamp(yq, ys.front(), ys.back());
    const double dx = (xs.back() - xs.front()) / double(nx - 1);
    const double dy = (ys.back() - ys.front()) / double(ny - 1);
    int i = std::min(int((xc - xs.front()) / dx), nx - 2);
    int j = std::min(int((yc - ys.front()) / dy), ny - 2);
    const double tx = (xc - xs[std::size_t(i)]) / dx;
    const double ty = (yc - ys[std::size_t(j)]) / dy;
    const double* base = v.data() + std::size_t(i) * ny + j;
    const double v00 = base[0], v01 = base[1];
    const double v10 = base[ny], v11 = base[ny + 1];
    return (1.0 - tx) * ((1.0 - ty) * v00 + ty * v01) +
           tx * ((1.0 - ty) * v10 + ty * v11);
}

}  // namespace

double ValueGrid2d::phiEval(std::size_t slice, double xq, double yq) const {
    return bilinear_slice(x, y, phi[slice], xq, yq);
}
double ValueGrid2d::dphixEval(std::size_t slice, double xq, double yq) const {
    return bilinear_slice(x, y, dphix[slice], xq, yq);
}
double ValueGrid2d::dphiyEval(std::size_t slice, double xq, double yq) const {
    return bilinear_slice(x, y, dphiy[slice], xq, yq);
}

ValueGrid2d solve_phi_eps_2d(const ModelSpec& model, const Pde2dConfig& cfg) {
    if (cfg.nx < 3 || cfg.ny < 3 || cfg.m < 1)
        throw IllPosedConfig("2d grid needs nx, ny >= 3 and m >= 1");
    if (!(cfg.xLo < cfg.xHi) || !(cfg.yLo < cfg.yHi))
        throw IllPosedConfig("2d domain bounds are inverted");

    const int nx = cfg.nx, ny = cfg.ny, m = cfg.m;
    const double beta = model.params.beta;
    const double eps = model.params.epsilon;
    const double dt = (model.params.T - model.params.t0) / double(m);

    ValueGrid2d grid;
    grid.t0 = model.params.t0;
    grid.T = model.params.T;
    grid.nx = nx;
    grid.ny = ny;
    grid.xLo = cfg.xLo;
    grid.xHi = cfg.xHi;
    grid.yLo = cfg.yLo;
    grid.yHi = cfg.yHi;
    grid.x = uniform_nodes(cfg.xLo, cfg.xHi, nx);
    grid.y = uniform_nodes(cfg.yLo, cfg.yHi, ny);
    const double dx = (cfg.xHi - cfg.xLo) / double(nx - 1);
    const double dy = (cfg.yHi - cfg.yLo) / double(ny - 1);

    const std::size_t n = std::size_t(nx) * std::size_t(ny);
    const std::size_t bw = std::size_t(ny);
    BandFactor lu(n, bw);

    double maxPeclet = 0.0;
    std::vector<double> lamXu(std::size_t(nx - 1) * ny), lamXd(std::size_t(nx - 1) * ny);
    for (int i = 0; i + 1 < nx; ++i) {
        const double a0 = model.alpha1(grid.x[std::size_t(i)]);
        const double a1 = model.alpha1(grid.x[std::size_t(i) + 1]);
        const double aF = (a0 * a0 + a1 * a1) / (4.0 * beta);
        if (!(aF > 0.0)) throw EllipticityViolation("vanishing slow diffusion");
        for (int j = 0; j < ny; ++j) {
            const double fF = 0.5 * (model.f(grid.x[std::size_t(i)], grid.y[std::size_t(j)]) +
                                     model.f(grid.x[std::size_t(i) + 1], grid.y[std::size_t(j)]));
            const double p = fF * dx / aF;
            maxPeclet = std::max(maxPeclet, std::abs(p));
            lamXu[std::size_t(i) * ny + j] = aF / (dx * dx) * bernoulli_weight(-p);
            lamXd[std::size_t(i) * ny + j] = aF / (dx * dx) * bernoulli_weight(p);
        }
    }
    std::vector<double> lamYu(std::size_t(nx) * (ny - 1)), lamYd(std::size_t(nx) * (ny - 1));
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j + 1 < ny; ++j) {
            const double xv = grid.x[std::size_t(i)];
            const double b0 = model.alpha2(xv, grid.y[std::size_t(j)]);
            const double b1 = model.alpha2(xv, grid.y[std::size_t(j) + 1]);
            const double aF = (b0 * b0 + b1 * b1) / (4.0 * beta * eps);
            if (!(aF > 0.0)) throw EllipticityViolation("vanishing fast diffusion");
            const double gF = 0.5 * (model.g(xv, grid.y[std::size_t(j)]) +
                                     model.g(xv, grid.y[std::size_t(j) + 1])) / eps;
            const double p = gF * dy / aF;
            maxPeclet = std::max(maxPeclet, std::abs(p));
            lamYu[std::size_t(i) * (ny - 1) + j] = aF / (dy * dy) * bernoulli_weight(-p);
            lamYd[std::size_t(i) * (ny - 1) + j] = aF / (dy * dy) * bernoulli_weight(p);
        }
    }
    grid.pecletWarning = maxPeclet > 2.0;

    for (int i = 0; i < nx; ++i) {
        const double hx = model.h(grid.x[std::size_t(i)]);
        if (hx < 0.0) throw ValidationError("running cost must be nonnegative");
        for (int j = 0; j < ny; ++j) {
            const std::size_t r = std::size_t(i) * ny + j;
            double d = 1.0 / dt + beta * hx;
            if (i + 1 < nx) {
                d += lamXu[std::size_t(i) * ny + j];
                lu.at(r, r + bw) = -lamXu[std::size_t(i) * ny + j];
            }
            if (i > 0) {
                d += lamXd[std::size_t(i - 1) * ny + j];
                lu.at(r, r - bw) = -lamXd[std::size_t(i - 1) * ny + j];
            }
            if (j + 1 < ny) {
                d += lamYu[std::size_t(i) * (ny - 1) + j];
                lu.at(r, r + 1) = -lamYu[std::size_t(i) * (ny - 1) + j];
            }
            if (j > 0) {
                d += lamYd[std::size_t(i) * (ny - 1) + j - 1];
                lu.at(r, r - 1) = -lamYd[std::size_t(i) * (ny - 1) + j - 1];
            }
            lu.at(r, r) = d;
        }
    }
    lu.factor();

    std::vector<double> cur(n, 1.0);
    std::vector<int> storedJ;
    std::vector<std::vector<double>> storedPhi;
    const int every = std::max(1, cfg.storeEvery);
    if (m % every == 0) {
        storedJ.push_back(m);
        storedPhi.push_back(cur);
    }
    std::vector<double> rhs(n);
    for (int j = m - 1; j >= 0; --j) {
        for (std::size_t k = 0; k < n; ++k) rhs[k] = cur[k] / dt;
        lu.solve(rhs);
        cur.swap(rhs);
        if (j % every == 0 || j == 0) {
            storedJ.push_back(j);
            storedPhi.push_back(cur);
        }
    }

    for (std::size_t s = storedJ.size(); s-- > 0;) {
        grid.times.push_back(grid.t0 + double(storedJ[s]) * dt);
        grid.phi.push_back(std::move(storedPhi[s]));
    }
    for (const auto& slice : grid.phi)
        for (double v : slice)
            if (!(v > 0.0))
                throw PositivityViolation("phi_eps lost positivity; refine the grid");

    grid.dphix.resize(grid.phi.size());
    grid.dphiy.resize(grid.phi.size());
    for (std::size_t s = 0; s < grid.phi.size(); ++s) {
        const auto& p = grid.phi[s];
        auto& px = grid.dphix[s];
        auto& py = grid.dphiy[s];
        px.assign(n, 0.0);
        py.assign(n, 0.0);
        for (int j = 0; j < ny; ++j) {
            for (int i = 1; i + 1 < nx; ++i)
                px[std::size_t(i) * ny + j] =
                    (p[std::size_t(i + 1) * ny + j] - p[std::size_t(i - 1) * ny + j]) /
                    (2.0 * dx);
            px[std::size_t(0) * ny + j] =
                (-3.0 * p[j] + 4.0 * p[std::size_t(1) * ny + j] -
                 p[std::size_t(2) * ny + j]) /
                (2.0 * dx);
            px[std::size_t(nx - 1) * ny + j] =
                (3.0 * p[std::size_t(nx - 1) * ny + j] -
                 4.0 * p[std::size_t(nx - 2) * ny + j] +
                 p[std::size_t(nx - 3) * ny + j]) /
                (2.0 * dx);
        }
        for (int i = 0; i < nx; ++i) {
            const double* col = p.data() + std::size_t(i) * ny;
            double* out = py.data() + std::size_t(i) * ny;
            central_differences(col, out, ny, dy);
        }
    }
    return grid;
}

std::string value_grid_csv(const ValueGrid& grid) {
    std::ostringstream os;
    os << "# t0 = " << fmt(grid.t0) << "\n# T = " << fmt(grid.T)
       << "\n# m = " << grid.m << "\n# nx = " << grid.nx
       << "\n# xLo = " << fmt(grid.xLo) << "\n# xHi = " << fmt(grid.xHi) << "\n";
    const std::pair<const char*, const std::vector<double>*> sections[] = {
        {"phi", &grid.phi}, {"dphi", &grid.dphi}};
    for (const auto& [name, matp] : sections) {
        os << "# section = " << name << "\n";
        const auto& mat = *matp;
        for (int j = 0; j <= grid.m; ++j) {
            const double* row = mat.data() + std::size_t(j) * grid.nx;
            for (int i = 0; i < grid.nx; ++i) {
                if (i) os << ',';
                os << fmt(row[i]);
            }
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace sfis
