// SPDX-License-Identifier: Apache-2.0
//
// rbeam - resonant beam positioning simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rbeam/geometry.hpp"
#include "rbeam/parallel.hpp"
#include "rbeam/propagation.hpp"
#include "rbeam/rng.hpp"

namespace rbeam {

inline constexpr double kSpectrumDenominatorFloor = 1e-12;

/// L complex snapshots across the M receive elements, one per column.
struct SnapshotBatch {
    Eigen::MatrixXcd snapshots; // M x L
    double noise_power = 0.0;   // per-element noise variance, watts

    int element_count() const { return static_cast<int>(snapshots.rows()); }
    int snapshot_count() const { return static_cast<int>(snapshots.cols()); }
};

/// Narrowband snapshot synthesis: snapshot l is s_l * a + n_l with a the
/// received amplitude vector, s_l a unit-power circular Gaussian scalar
/// modulation and n_l circular Gaussian noise of per-element variance
/// noise_power. Deterministic for a given seed; the draw order is the
/// modulation scalar followed by the element noises, snapshot by snapshot.
inline SnapshotBatch synthesize_snapshots(const FieldState& rx_field, double noise_power,
                                          int count, std::uint64_t rng_seed)
{
    if (count < 1)
        throw std::invalid_argument("synthesize_snapshots: need at least one snapshot");
    if (noise_power < 0.0)
        throw std::invalid_argument("synthesize_snapshots: negative noise power");
    const Eigen::Index m = rx_field.amplitudes.size();
    SnapshotBatch batch;
    batch.noise_power = noise_power;
    batch.snapshots.resize(m, count);
    SeededRng rng(rng_seed);
    for (int l = 0; l < count; ++l) {
        const std::complex<double> s = rng.circular_gaussian(1.0);
        for (Eigen::Index i = 0; i < m; ++i) {
            std::complex<double> n =
                noise_power > 0.0 ? rng.circular_gaussian(noise_power) : 0.0;
            batch.snapshots(i, l) = s * rx_field.amplitudes[i] + n;
        }
    }
    return batch;
}

/// Sample covariance with its Hermitian eigendecomposition, eigenvalues
/// sorted descending.
struct CovarianceEstimate {
    Eigen::MatrixXcd matrix;       // M x M Hermitian
    Eigen::VectorXd eigenvalues;   // descending
    Eigen::MatrixXcd eigenvectors; // columns aligned with eigenvalues
};

inline CovarianceEstimate sample_covariance(const SnapshotBatch& batch)
{
    if (batch.snapshot_count() < 1)
        throw std::invalid_argument("sample_covariance: empty batch");
    CovarianceEstimate est;
    const double inv_l = 1.0 / batch.snapshot_count();
    est.matrix = batch.snapshots * batch.snapshots.adjoint() * inv_l;
    // Symmetrize roundoff before the solver; the product is Hermitian up
    // to machine precision by construction.
    est.matrix = 0.5 * (est.matrix + est.matrix.adjoint().eval());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(est.matrix);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("sample_covariance: eigendecomposition failed "
                                 "(matrix size " + std::to_string(est.matrix.rows()) + ")");
    const Eigen::Index m = est.matrix.rows();
    est.eigenvalues.resize(m);
    est.eigenvectors.resize(m, m);
    // Eigen returns ascending order; flip to descending.
    for (Eigen::Index i = 0; i < m; ++i) {
        est.eigenvalues[i] = solver.eigenvalues()[m - 1 - i];
        est.eigenvectors.col(i) = solver.eigenvectors().col(m - 1 - i);
    }
    return est;
}

/// Eigenvectors of the M - K smallest eigenvalues, as columns.
inline Eigen::MatrixXcd noise_subspace(const CovarianceEstimate& cov, int source_count)
{
    const Eigen::Index m = cov.eigenvectors.rows();
    if (source_count < 1 || source_count >= m)
        throw std::invalid_argument("noise_subspace: need 1 <= K < M");
    return cov.eigenvectors.rightCols(m - source_count);
}

/// Spatial spectrum value 1 / ||V_N^H a(theta, phi)||^2 against the
/// arrival manifold, with the denominator floored at 1e-12 so exact
/// orthogonality yields a finite clamped peak.
inline double music_spectrum(const Eigen::MatrixXcd& noise_sub, const PlanarArray& array,
                             const Direction& dir, double wavelength)
{
    if (noise_sub.rows() != array.size())
        throw std::invalid_argument("music_spectrum: subspace/array size mismatch");
    const Eigen::VectorXcd a = arrival_vector(array, dir, wavelength);
    const double denom = (noise_sub.adjoint() * a).squaredNorm();
    return 1.0 / std::max(denom, kSpectrumDenominatorFloor);
}

/// Noise-projector spectrum evaluated from the signal subspace instead of
/// the explicit noise basis: with a complete orthonormal eigenbasis,
/// ||V_N^H a||^2 = ||a||^2 - ||V_S^H a||^2, which turns each spectrum
/// sample from an O(M^2) product into an O(M K) one. Axis-aligned planar
/// grids additionally factor the arrival phases per axis.
class SpectrumEvaluator {
public:
    SpectrumEvaluator(Eigen::MatrixXcd signal_basis, const PlanarArray& array,
                      double wavelength)
        : signal_basis_(std::move(signal_basis)),
          m_(array.size()),
          wave_number_(2.0 * std::numbers::pi / wavelength)
    {
        if (signal_basis_.rows() != m_)
            throw std::invalid_argument("SpectrumEvaluator: basis/array size mismatch");
        separable_ = array.axis_aligned();
        if (separable_) {
            const int ns = array.side_count;
            x_coords_.resize(ns);
            y_coords_.resize(ns);
            for (int i = 0; i < ns; ++i) {
                x_coords_[i] = array.element_positions[static_cast<size_t>(i) * ns].x();
                y_coords_[i] = array.element_positions[static_cast<size_t>(i)].y();
            }
            basis_grids_.reserve(static_cast<size_t>(signal_basis_.cols()));
            for (Eigen::Index k = 0; k < signal_basis_.cols(); ++k) {
                Eigen::MatrixXcd g(ns, ns);
                for (int i = 0; i < ns; ++i)
                    for (int j = 0; j < ns; ++j)
                        g(i, j) = std::conj(signal_basis_(i * ns + j, k));
                basis_grids_.push_back(std::move(g));
            }
        } else {
            positions_ = &array.element_positions;
        }
    }

    /// Squared projection of the arrival vector onto the noise subspace.
    double denominator(const Direction& dir) const
    {
        const Vec3 u = dir.unit();
        double sig = 0.0;
        if (separable_) {
            const int ns = static_cast<int>(x_coords_.size());
            Eigen::VectorXcd xv(ns), yv(ns);
            for (int i = 0; i < ns; ++i) {
                xv[i] = std::polar(1.0, -wave_number_ * x_coords_[i] * u.x());
                yv[i] = std::polar(1.0, -wave_number_ * y_coords_[i] * u.y());
            }
            for (const auto& g : basis_grids_) {
                const std::complex<double> dot = xv.transpose() * (g * yv);
                sig += std::norm(dot);
            }
        } else {
            Eigen::VectorXcd a(m_);
            for (Eigen::Index i = 0; i < m_; ++i)
                a[i] = std::polar(1.0, -wave_number_ * (*positions_)[static_cast<size_t>(i)].dot(u));
            sig = (signal_basis_.adjoint() * a).squaredNorm();
        }
        return static_cast<double>(m_) - sig;
    }

    double operator()(const Direction& dir) const
    {
        return 1.0 / std::max(denominator(dir), kSpectrumDenominatorFloor);
    }

private:
    Eigen::MatrixXcd signal_basis_;
    Eigen::Index m_;
    double wave_number_;
    bool separable_ = false;
    std::vector<double> x_coords_, y_coords_;
    std::vector<Eigen::MatrixXcd> basis_grids_;
    const std::vector<Vec3>* positions_ = nullptr;
};

/// Top eigenvector of the sample covariance. For L < M the eigenpair is
/// obtained from the L x L Gram matrix (identical operator spectrum up to
/// the zero eigenvalues), which avoids forming the M x M covariance for
/// large apertures.
inline Eigen::MatrixXcd principal_signal_basis(const SnapshotBatch& batch, int source_count)
{
    const Eigen::Index m = batch.snapshots.rows();
    const Eigen::Index l = batch.snapshots.cols();
    if (source_count < 1 || source_count >= m)
        throw std::invalid_argument("principal_signal_basis: need 1 <= K < M");
    if (l < m) {
        const Eigen::MatrixXcd gram = batch.snapshots.adjoint() * batch.snapshots;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("principal_signal_basis: Gram eigendecomposition failed");
        const int k = std::min<int>(source_count, static_cast<int>(l));
        Eigen::MatrixXcd basis(m, k);
        for (int i = 0; i < k; ++i) {
            Eigen::VectorXcd v = batch.snapshots * solver.eigenvectors().col(l - 1 - i);
            const double norm = v.norm();
            if (norm == 0.0)
                throw std::runtime_error("principal_signal_basis: zero snapshot batch");
            basis.col(i) = v / norm;
        }
        return basis;
    }
    const CovarianceEstimate cov = sample_covariance(batch);
    return cov.eigenvectors.leftCols(source_count);
}

struct GridSpec {
    double theta_max_deg = 70.0;
    double coarse_step_deg = 0.5;
    double refine_resolution_deg = 0.005;
    int workers = 0; // 0 = auto
};

struct DoaEstimate {
    double theta_hat = 0.0; // radians
    double phi_hat = 0.0;   // radians
    double peak_value = 0.0;
    double spectrum_median = 0.0;
    double peak_to_median = 0.0;
    bool low_confidence = false;
    int refinement_iterations = 0;
};

/// Rectangular spectrum sampling for export or ratio statistics.
struct SpectrumGrid {
    std::vector<double> theta_deg;
    std::vector<double> phi_deg;
    Eigen::MatrixXd value; // linear spectrum, (theta index, phi index)
};

inline SpectrumGrid spectrum_grid(const SpectrumEvaluator& eval, const GridSpec& grid)
{
    SpectrumGrid out;
    for (double t = 0.0; t <= grid.theta_max_deg + 1e-9; t += grid.coarse_step_deg)
        out.theta_deg.push_back(t);
    for (double p = 0.0; p < 360.0 - 1e-9; p += grid.coarse_step_deg)
        out.phi_deg.push_back(p);
    const int nt = static_cast<int>(out.theta_deg.size());
    const int np = static_cast<int>(out.phi_deg.size());
    out.value.resize(nt, np);
    parallel_for(0, nt, grid.workers, [&](int i) {
        for (int j = 0; j < np; ++j)
            out.value(i, j) =
                eval(Direction::from_degrees(out.theta_deg[static_cast<size_t>(i)],
                                             out.phi_deg[static_cast<size_t>(j)]));
    });
    return out;
}

/// Coarse-to-fine search of the 2-D spectrum: full-range scan at the
/// coarse step, then successive halving of a 5 x 5 neighborhood around the
/// running best until the step falls below the requested resolution.
/// Single-source estimator (K = 1).
inline DoaEstimate estimate_doa(const SnapshotBatch& batch, const PlanarArray& array,
                                double wavelength, const GridSpec& grid = {})
{
    const SpectrumEvaluator eval(principal_signal_basis(batch, 1), array, wavelength);

    const int nt = static_cast<int>(std::floor(grid.theta_max_deg / grid.coarse_step_deg)) + 1;
    const int np = static_cast<int>(std::lround(360.0 / grid.coarse_step_deg));

    struct RowBest {
        double denom = std::numeric_limits<double>::infinity();
        int phi_idx = 0;
    };
    std::vector<RowBest> row_best(static_cast<size_t>(nt));
    Eigen::MatrixXd denoms(nt, np);
    parallel_for(0, nt, grid.workers, [&](int i) {
        const double theta = deg2rad(i * grid.coarse_step_deg);
        RowBest best;
        for (int j = 0; j < np; ++j) {
            const double d = eval.denominator({theta, deg2rad(j * grid.coarse_step_deg)});
            denoms(i, j) = d;
            if (d < best.denom) {
                best.denom = d;
                best.phi_idx = j;
            }
        }
        row_best[static_cast<size_t>(i)] = best;
    });

    int best_i = 0;
    for (int i = 1; i < nt; ++i)
        if (row_best[static_cast<size_t>(i)].denom < row_best[static_cast<size_t>(best_i)].denom)
            best_i = i;

    double theta = best_i * grid.coarse_step_deg;
    double phi = row_best[static_cast<size_t>(best_i)].phi_idx * grid.coarse_step_deg;
    double best_denom = row_best[static_cast<size_t>(best_i)].denom;

    DoaEstimate est;
    double step = grid.coarse_step_deg;
    while (step > grid.refine_resolution_deg) {
        step *= 0.5;
        double local_theta = theta, local_phi = phi;
        for (int di = -2; di <= 2; ++di) {
            const double t = std::clamp(theta + di * step, 0.0, grid.theta_max_deg);
            for (int dj = -2; dj <= 2; ++dj) {
                const double p = phi + dj * step;
                const double d = eval.denominator(Direction::from_degrees(t, p));
                if (d < best_denom) {
                    best_denom = d;
                    local_theta = t;
                    local_phi = p;
                }
            }
        }
        theta = local_theta;
        phi = local_phi;
        est.refinement_iterations++;
    }

    // Median over the coarse spectrum for the confidence gate.
    std::vector<double> spectrum(static_cast<size_t>(nt) * np);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < np; ++j)
            spectrum[static_cast<size_t>(i) * np + j] =
                1.0 / std::max(denoms(i, j), kSpectrumDenominatorFloor);
    auto mid = spectrum.begin() + spectrum.size() / 2;
    std::nth_element(spectrum.begin(), mid, spectrum.end());
    est.spectrum_median = *mid;

    est.theta_hat = deg2rad(theta);
    est.phi_hat = deg2rad(phi < 0.0 ? phi + 360.0 : (phi >= 360.0 ? phi - 360.0 : phi));
    est.peak_value = 1.0 / std::max(best_denom, kSpectrumDenominatorFloor);
    est.peak_to_median = est.peak_value / est.spectrum_median;
    est.low_confidence = est.peak_to_median < std::pow(10.0, 0.3); // under 3 dB
    return est;
}

} // namespace rbeam
