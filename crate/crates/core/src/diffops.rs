//! Tangential differential operators: ∇*, L*, ∇*·, L*·, ∇*×, Δ*, the
//! tensor-producing ∇*⊗ / L*⊗, and the tensor divergences ∇*·T, L*·T.
//!
//! Scalar↔vector operators act spectrally through the eigenrules
//! ∇*Y_{n,j} = √(n(n+1)) Ψ_{n,j}, L*Y_{n,j} = √(n(n+1)) Φ_{n,j},
//! Δ*Y_{n,j} = -n(n+1) Y_{n,j}. Tensor divergences use the per-degree
//! identity tables for ∇*·Y^(i,k) and L*·Y^(i,k).

use std::sync::Arc;

use crate::error::Result;
use crate::sht::{mode_index, modes, sft_forward, sft_inverse, GridScalar, SphereGrid,
                 SpectralScalar};
use crate::tensor::{GridTensor, SpectralTensor};
use crate::vector::{vsft_inverse, Frame, GridVector, SpectralVector};

#[inline]
fn nu(n: usize) -> f64 {
    ((n * (n + 1)) as f64).sqrt()
}

/// Tangential gradient: ∇*f = Σ √(n(n+1)) f̂_{n,j} Ψ_{n,j}.
pub fn grad_star(f: &SpectralScalar) -> SpectralVector {
    let mut out = SpectralVector::zeros(f.band, f.radius);
    for (n, j) in modes(f.band) {
        if n >= 1 {
            out.psi[mode_index(n, j)] = nu(n) * f.get(n, j);
        }
    }
    out
}

/// Tangential curl of a scalar: L*f = ê_r × ∇*f = Σ √(n(n+1)) f̂ Φ_{n,j}.
pub fn lstar(f: &SpectralScalar) -> SpectralVector {
    let mut out = SpectralVector::zeros(f.band, f.radius);
    for (n, j) in modes(f.band) {
        if n >= 1 {
            out.phi[mode_index(n, j)] = nu(n) * f.get(n, j);
        }
    }
    out
}

/// Tangential divergence: ∇*·u = -Σ √(n(n+1)) û^ψ Y_{n,j}; the radial
/// component does not enter.
pub fn div_star(u: &SpectralVector) -> SpectralScalar {
    let mut out = SpectralScalar::zeros(u.band, u.radius);
    for (n, j) in modes(u.band) {
        if n >= 1 {
            out.set(n, j, -nu(n) * u.psi[mode_index(n, j)]);
        }
    }
    out
}

/// Scalar curl: L*·u = -Σ √(n(n+1)) û^φ Y_{n,j}.
pub fn lstar_dot(u: &SpectralVector) -> SpectralScalar {
    let mut out = SpectralScalar::zeros(u.band, u.radius);
    for (n, j) in modes(u.band) {
        if n >= 1 {
            out.set(n, j, -nu(n) * u.phi[mode_index(n, j)]);
        }
    }
    out
}

/// Normal curl ∇*×u = (L*·u) ê_r, sampled on the grid.
pub fn curl_star(u: &SpectralVector, grid: &Arc<SphereGrid>) -> Result<GridVector> {
    let s = lstar_dot(u);
    let f = sft_inverse(&s, grid)?;
    let mut out = GridVector::zeros(grid.clone(), Frame::Spherical);
    out.comps[0] = f.values;
    Ok(out)
}

/// Beltrami operator: Δ*f = -n(n+1) f̂_{n,j}.
pub fn beltrami(f: &SpectralScalar) -> SpectralScalar {
    let mut out = f.clone();
    for (n, j) in modes(f.band) {
        let v = out.get(n, j) * -((n * (n + 1)) as f64);
        out.set(n, j, v);
    }
    out
}

/// ∇*⊗u on the grid: T_{lm} = (∇* u_m)_l, by exact spectral differentiation
/// of the Cartesian components at the given analysis band (callers pass the
/// field band + 1, since Cartesian components of a band-N vector carry
/// degree N+1 content).
pub fn grad_tensor_grid(u: &GridVector, analysis_band: usize) -> Result<GridTensor> {
    let grid = &u.grid;
    let uc = u.to_frame(Frame::Cartesian);
    let mut out = GridTensor::zeros(grid.clone());
    for m in 0..3 {
        let comp = GridScalar {
            grid: grid.clone(),
            values: uc.comps[m].clone(),
        };
        let c = sft_forward(&comp, analysis_band)?;
        let g = vsft_inverse(&grad_star(&c), grid)?.to_frame(Frame::Cartesian);
        for l in 0..3 {
            let dst = &mut out.comps[3 * l + m];
            for (d, s) in dst.iter_mut().zip(&g.comps[l]) {
                *d = *s;
            }
        }
    }
    Ok(out)
}

/// L*⊗u on the grid: rotates the (tangential) first index of ∇*⊗u by 90°.
pub fn lstar_tensor_grid(u: &GridVector, analysis_band: usize) -> Result<GridTensor> {
    Ok(rot_first(&grad_tensor_grid(u, analysis_band)?))
}

/// (ê_r ×) applied to the first index of a grid tensor.
pub fn rot_first(t: &GridTensor) -> GridTensor {
    let grid = &t.grid;
    let mut out = GridTensor::zeros(grid.clone());
    for i in 0..grid.nlat() {
        let tn = grid.nodes()[i];
        let c = grid.cos_lat()[i];
        for k in 0..grid.nlon() {
            let idx = grid.index(i, k);
            let (er, _, _) = crate::vector::local_frame(grid.longitudes()[k], tn, c);
            for m in 0..3 {
                let col = [
                    t.comps[m][idx],
                    t.comps[3 + m][idx],
                    t.comps[6 + m][idx],
                ];
                out.comps[m][idx] = er[1] * col[2] - er[2] * col[1];
                out.comps[3 + m][idx] = er[2] * col[0] - er[0] * col[2];
                out.comps[6 + m][idx] = er[0] * col[1] - er[1] * col[0];
            }
        }
    }
    out
}

/// ∇*⊗u analyzed into tensor-harmonic coefficients at band N
/// (grid differentiation at band N+1 followed by the tensor SFT).
pub fn grad_tensor(u: &GridVector, band: usize) -> Result<SpectralTensor> {
    let t = grad_tensor_grid(u, band + 1)?;
    crate::tensor::tsft_forward(&t, band)
}

/// L*⊗u analyzed into tensor-harmonic coefficients at band N.
pub fn lstar_tensor(u: &GridVector, band: usize) -> Result<SpectralTensor> {
    let t = lstar_tensor_grid(u, band + 1)?;
    crate::tensor::tsft_forward(&t, band)
}

/// Tensor divergence ∇*·T via the per-degree identities
/// (ν = √(n(n+1)), s = √(2(n(n+1)-2))):
///   ∇*·Y^(1,k) = 0,
///   ∇*·Y^(2,1) = -ν 𝐘 + Ψ,          ∇*·Y^(2,2) = -√2 𝐘 + (ν/√2) Ψ,
///   ∇*·Y^(2,3) = -(s/2) Ψ,          ∇*·Y^(3,1) = Φ,
///   ∇*·Y^(3,2) = -(s/2) Φ,          ∇*·Y^(3,3) = -(ν/√2) Φ.
pub fn div_star_tensor(t: &SpectralTensor) -> SpectralVector {
    let mut out = SpectralVector::zeros(t.band, t.radius);
    let sqrt2 = std::f64::consts::SQRT_2;
    for (n, j) in modes(t.band) {
        let idx = mode_index(n, j);
        let v = nu(n);
        let t21 = t.comp(2, 1)[idx];
        let t22 = t.comp(2, 2)[idx];
        let t23 = t.comp(2, 3)[idx];
        let t31 = t.comp(3, 1)[idx];
        let t32 = t.comp(3, 2)[idx];
        let t33 = t.comp(3, 3)[idx];
        out.y[idx] = -v * t21 - sqrt2 * t22;
        if n >= 1 {
            let sh = if n >= 2 {
                (2.0 * (v * v - 2.0)).sqrt() / 2.0
            } else {
                0.0
            };
            out.psi[idx] = t21 + v / sqrt2 * t22 - sh * t23;
            out.phi[idx] = t31 - sh * t32 - v / sqrt2 * t33;
        }
    }
    out
}

/// L*·T via the rotated table (L*·T = -∇*·(RotT)):
///   L*·Y^(1,k) = 0,
///   L*·Y^(2,1) = -Φ,                L*·Y^(2,2) = (ν/√2) Φ,
///   L*·Y^(2,3) = (s/2) Φ,           L*·Y^(3,1) = -ν 𝐘 + Ψ,
///   L*·Y^(3,2) = -(s/2) Ψ,          L*·Y^(3,3) = -√2 𝐘 + (ν/√2) Ψ.
pub fn lstar_dot_tensor(t: &SpectralTensor) -> SpectralVector {
    let mut out = SpectralVector::zeros(t.band, t.radius);
    let sqrt2 = std::f64::consts::SQRT_2;
    for (n, j) in modes(t.band) {
        let idx = mode_index(n, j);
        let v = nu(n);
        let t21 = t.comp(2, 1)[idx];
        let t22 = t.comp(2, 2)[idx];
        let t23 = t.comp(2, 3)[idx];
        let t31 = t.comp(3, 1)[idx];
        let t32 = t.comp(3, 2)[idx];
        let t33 = t.comp(3, 3)[idx];
        out.y[idx] = -v * t31 - sqrt2 * t33;
        if n >= 1 {
            let sh = if n >= 2 {
                (2.0 * (v * v - 2.0)).sqrt() / 2.0
            } else {
                0.0
            };
            out.psi[idx] = t31 + v / sqrt2 * t33 - sh * t32;
            out.phi[idx] = -t21 + v / sqrt2 * t22 + sh * t23;
        }
    }
    out
}
