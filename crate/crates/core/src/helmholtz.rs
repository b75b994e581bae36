//! Helmholtz decomposition of vector and tensor fields into scalar
//! potentials, and filtering through plain scalar convolution of those
//! potentials — spectrally this is a per-mode diagonal rescaling, so the
//! equivalence with the generalized convolutions is exact.
//!
//! Vectors: u = u_r ê_r + ∇*f + L*η with ⟨f⟩ = ⟨η⟩ = 0.
//! Tensors: nine scalars F^(i,k), one per canonical family, with per-mode
//! scale constants c^(i,k)(n) relating each bracket of the expansion to the
//! unit-norm basis field: 1 for (1,1); √(n(n+1)) for (1,2),(1,3),(2,1),(3,1);
//! √2 for (2,2),(3,3); √(n(n+1))·√(2(n(n+1)-2)) for (2,3),(3,2).

use crate::error::{Error, Result};
use crate::kernels::ZonalKernelSpectrum;
use crate::sht::{mode_index, modes, SpectralScalar};
use crate::tensor::{family_index, family_min_degree, SpectralTensor, FAMILIES};
use crate::vector::SpectralVector;

/// Scalar potentials of a vector field: radial part, irrotational potential,
/// toroidal potential. f and η have no n = 0 content (structural zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPotentials {
    pub u_r: SpectralScalar,
    pub f: SpectralScalar,
    pub eta: SpectralScalar,
}

/// Scalar potentials of a tensor field, one per family; slots below a
/// family's minimum degree are structural zeros, which realizes the
/// mean-zero constraints of the decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorPotentials {
    pub band: usize,
    pub radius: f64,
    pub f: [SpectralScalar; 9],
}

impl TensorPotentials {
    pub fn comp(&self, i: usize, k: usize) -> &SpectralScalar {
        &self.f[family_index(i, k)]
    }
}

#[inline]
fn nu(n: usize) -> f64 {
    ((n * (n + 1)) as f64).sqrt()
}

/// Scale constant c^(i,k)(n) between the Helmholtz bracket with F = Y_{n,j}
/// and the unit-norm basis field Y^(i,k)_{n,j}.
pub fn tensor_scale(i: usize, k: usize, n: usize) -> f64 {
    let sqrt2 = std::f64::consts::SQRT_2;
    match (i, k) {
        (1, 1) => 1.0,
        (1, 2) | (1, 3) | (2, 1) | (3, 1) => nu(n),
        (2, 2) | (3, 3) => sqrt2,
        (2, 3) | (3, 2) => nu(n) * (2.0 * ((n * (n + 1)) as f64 - 2.0)).sqrt(),
        _ => unreachable!(),
    }
}

/// Unique potentials of a vector field: û_r = û^Y, f̂ = û^ψ/√(n(n+1)),
/// η̂ = û^φ/√(n(n+1)) for n ≥ 1.
pub fn helmholtz_vector(u: &SpectralVector) -> VectorPotentials {
    let mut u_r = SpectralScalar::zeros(u.band, u.radius);
    let mut f = SpectralScalar::zeros(u.band, u.radius);
    let mut eta = SpectralScalar::zeros(u.band, u.radius);
    for (n, j) in modes(u.band) {
        let idx = mode_index(n, j);
        u_r.coeffs[idx] = u.y[idx];
        if n >= 1 {
            f.coeffs[idx] = u.psi[idx] / nu(n);
            eta.coeffs[idx] = u.phi[idx] / nu(n);
        }
    }
    VectorPotentials { u_r, f, eta }
}

/// Exact inverse of [`helmholtz_vector`].
pub fn reconstruct_vector(p: &VectorPotentials) -> SpectralVector {
    let band = p.u_r.band;
    let mut out = SpectralVector::zeros(band, p.u_r.radius);
    for (n, j) in modes(band) {
        let idx = mode_index(n, j);
        out.y[idx] = p.u_r.coeffs[idx];
        if n >= 1 {
            out.psi[idx] = nu(n) * p.f.coeffs[idx];
            out.phi[idx] = nu(n) * p.eta.coeffs[idx];
        }
    }
    out
}

/// Filter a vector by scalar-convolving its three potentials and
/// reconstructing; equals the generalized vector convolution.
pub fn filter_vector_via_scalars(
    u: &SpectralVector,
    kernel: &ZonalKernelSpectrum,
) -> Result<SpectralVector> {
    if kernel.nmax < u.band {
        return Err(Error::BandMismatch {
            what: "filter_vector_via_scalars",
            need: u.band,
            have: kernel.nmax,
        });
    }
    let mut p = helmholtz_vector(u);
    for (n, j) in modes(u.band) {
        let idx = mode_index(n, j);
        let g = kernel.ghat(n as i64);
        p.u_r.coeffs[idx] *= g;
        p.f.coeffs[idx] *= g;
        p.eta.coeffs[idx] *= g;
    }
    Ok(reconstruct_vector(&p))
}

/// Unique potentials of a tensor field: F̂^(i,k)_{n,j} = T̂^{(i,k)}_{n,j} / c^(i,k)(n).
pub fn helmholtz_tensor(t: &SpectralTensor) -> TensorPotentials {
    let mut f: [SpectralScalar; 9] =
        std::array::from_fn(|_| SpectralScalar::zeros(t.band, t.radius));
    for (fi, (i, k)) in FAMILIES.iter().enumerate() {
        let min = family_min_degree(*i, *k);
        for (n, j) in modes(t.band) {
            if n < min {
                continue;
            }
            let idx = mode_index(n, j);
            f[fi].coeffs[idx] = t.comps[fi][idx] / tensor_scale(*i, *k, n);
        }
    }
    TensorPotentials {
        band: t.band,
        radius: t.radius,
        f,
    }
}

/// Exact inverse of [`helmholtz_tensor`].
pub fn reconstruct_tensor(p: &TensorPotentials) -> SpectralTensor {
    let mut out = SpectralTensor::zeros(p.band, p.radius);
    for (fi, (i, k)) in FAMILIES.iter().enumerate() {
        let min = family_min_degree(*i, *k);
        for (n, j) in modes(p.band) {
            if n < min {
                continue;
            }
            let idx = mode_index(n, j);
            out.comps[fi][idx] = p.f[fi].coeffs[idx] * tensor_scale(*i, *k, n);
        }
    }
    out
}

/// Filter a tensor by scalar-convolving its nine potentials and
/// reconstructing; equals the generalized tensor convolution.
pub fn filter_tensor_via_scalars(
    t: &SpectralTensor,
    kernel: &ZonalKernelSpectrum,
) -> Result<SpectralTensor> {
    if kernel.nmax < t.band {
        return Err(Error::BandMismatch {
            what: "filter_tensor_via_scalars",
            need: t.band,
            have: kernel.nmax,
        });
    }
    let mut p = helmholtz_tensor(t);
    for fi in 0..9 {
        for (n, j) in modes(t.band) {
            let idx = mode_index(n, j);
            p.f[fi].coeffs[idx] *= kernel.ghat(n as i64);
        }
    }
    Ok(reconstruct_tensor(&p))
}
