//! Rank-2 tensor spherical harmonics: the canonical nine-family basis
//! Y^(i,k), the single-degree-component basis K^(i,k) reached through the
//! per-degree transformations [A] (5×5) and [B] (4×4), the tensor SFT, and
//! the generalized tensor convolution (spectral-diagonal and
//! componentwise-oracle implementations).
//!
//! Family validity: (1,1), (2,2), (3,3) exist from n = 0; (1,2), (1,3),
//! (2,1), (3,1) from n = 1; (2,3), (3,2) from n = 2.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::ZonalKernelSpectrum;
use crate::sht::{
    mode_count, mode_index, modes, sft_forward, sft_inverse, GridScalar, SphereGrid,
    SpectralScalar,
};
use crate::vector::{local_frame, vsft_forward, vsft_inverse, Frame, GridVector, SpectralVector};

/// The nine families (i,k), row-major.
pub const FAMILIES: [(usize, usize); 9] = [
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 1),
    (2, 2),
    (2, 3),
    (3, 1),
    (3, 2),
    (3, 3),
];

#[inline]
pub fn family_index(i: usize, k: usize) -> usize {
    3 * (i - 1) + (k - 1)
}

/// Smallest degree at which family (i,k) exists.
pub fn family_min_degree(i: usize, k: usize) -> usize {
    match (i, k) {
        (1, 1) | (2, 2) | (3, 3) => 0,
        (2, 3) | (3, 2) => 2,
        _ => 1,
    }
}

/// Kernel shift pairing each K-family with its Cartesian component degree:
/// deg(i,k) = n - shift(i,k).
pub fn family_shift(i: usize, k: usize) -> i64 {
    match (i, k) {
        (1, 1) => -2,
        (1, 3) | (3, 1) => -1,
        (1, 2) | (2, 1) | (3, 3) => 0,
        (2, 3) | (3, 2) => 1,
        (2, 2) => 2,
        _ => unreachable!(),
    }
}

/// Sampled rank-2 tensor field; nine Cartesian components per point,
/// component (l,m) stored at slot 3l+m, latitude-major in the point index.
#[derive(Debug, Clone)]
pub struct GridTensor {
    pub grid: Arc<SphereGrid>,
    pub comps: [Vec<f64>; 9],
}

impl GridTensor {
    pub fn zeros(grid: Arc<SphereGrid>) -> Self {
        let n = grid.npts();
        Self {
            grid,
            comps: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    pub fn from_components(grid: Arc<SphereGrid>, comps: [Vec<f64>; 9]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.npts()) {
            return Err(Error::DimensionMismatch(
                "tensor component length != grid size".into(),
            ));
        }
        Ok(Self { grid, comps })
    }

    /// Discrete ⟨T·S⟩ with the pointwise tensor scalar product Σ_lm T_lm S_lm.
    pub fn dot(&self, other: &GridTensor) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.grid.nlat() {
            let mu = self.grid.point_measure(i);
            for k in 0..self.grid.nlon() {
                let idx = self.grid.index(i, k);
                let mut p = 0.0;
                for lm in 0..9 {
                    p += self.comps[lm][idx] * other.comps[lm][idx];
                }
                acc += mu * p;
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn add_scaled(&mut self, other: &GridTensor, a: f64) {
        for lm in 0..9 {
            for (v, o) in self.comps[lm].iter_mut().zip(&other.comps[lm]) {
                *v += a * o;
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        for lm in 0..9 {
            for v in &mut self.comps[lm] {
                *v *= a;
            }
        }
    }

    /// Mean of each Cartesian component.
    pub fn mean_cartesian(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for (lm, dst) in out.iter_mut().enumerate() {
            let f = GridScalar {
                grid: self.grid.clone(),
                values: self.comps[lm].clone(),
            };
            *dst = f.mean();
        }
        out
    }
}

/// Coefficients over the canonical tensor basis; nine arrays indexed by
/// family, each dense over the (n,j) triangle with structural zeros below
/// each family's minimum degree.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTensor {
    pub band: usize,
    pub radius: f64,
    pub comps: [Vec<f64>; 9],
}

impl SpectralTensor {
    pub fn zeros(band: usize, radius: f64) -> Self {
        let n = mode_count(band);
        Self {
            band,
            radius,
            comps: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    #[inline]
    pub fn comp(&self, i: usize, k: usize) -> &[f64] {
        &self.comps[family_index(i, k)]
    }

    #[inline]
    pub fn comp_mut(&mut self, i: usize, k: usize) -> &mut [f64] {
        &mut self.comps[family_index(i, k)]
    }

    pub fn norm_sq(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    pub fn add_scaled(&mut self, other: &SpectralTensor, a: f64) {
        for f in 0..9 {
            for (v, o) in self.comps[f].iter_mut().zip(&other.comps[f]) {
                *v += a * o;
            }
        }
    }

    /// Zero every coefficient below its family's minimum degree.
    pub fn enforce_validity(&mut self) {
        for (fi, (i, k)) in FAMILIES.iter().enumerate() {
            let min = family_min_degree(*i, *k);
            for n in 0..min.min(self.band + 1) {
                for j in -(n as i64)..=n as i64 {
                    self.comps[fi][mode_index(n, j)] = 0.0;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// transformation matrices
// ---------------------------------------------------------------------------

/// K-families (rows) of the 5×5 system.
pub const A_ROWS: [(usize, usize); 5] = [(1, 1), (1, 2), (2, 1), (2, 2), (3, 3)];
/// Y-families (columns) of the 5×5 system.
pub const A_COLS: [(usize, usize); 5] = [(1, 1), (1, 2), (2, 1), (2, 2), (2, 3)];
/// K-families (rows) of the 4×4 system.
pub const B_ROWS: [(usize, usize); 4] = [(1, 3), (2, 3), (3, 1), (3, 2)];
/// Y-families (columns) of the 4×4 system.
pub const B_COLS: [(usize, usize); 4] = [(1, 3), (3, 1), (3, 2), (3, 3)];

/// Diagonal factor matrices of the n ≥ 2 assembly [A] = [E_a⁻¹] M_a [C_a],
/// [B] = [E_b⁻¹] M_b [C_b].
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFactors {
    pub c_a: [f64; 5],
    pub e_a: [f64; 5],
    pub c_b: [f64; 4],
    pub e_b: [f64; 4],
}

/// Per-degree transformation matrices between the canonical and the
/// single-degree-component tensor bases: (K-block) = [A or B] (Y-block).
/// Both are orthogonal on the families valid at the degree; rows/columns of
/// families that do not exist at n ∈ {0,1} are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorBasisMatrices {
    pub n: usize,
    pub a: [[f64; 5]; 5],
    pub b: [[f64; 4]; 4],
    /// Factor matrices of the closed-form assembly; `None` at the collapsed
    /// degrees n = 0, 1 where the rows are hard-coded.
    pub factors: Option<MatrixFactors>,
}

pub fn tensor_matrices(n: usize) -> TensorBasisMatrices {
    if n == 0 {
        let mut a = [[0.0; 5]; 5];
        // K^(1,1) = √(2/3) Y^(1,1) - √(1/3) Y^(2,2);  K^(2,1) = √(1/3) Y^(1,1) + √(2/3) Y^(2,2)
        a[0][0] = (2.0 / 3.0_f64).sqrt();
        a[0][3] = -(1.0 / 3.0_f64).sqrt();
        a[2][0] = (1.0 / 3.0_f64).sqrt();
        a[2][3] = (2.0 / 3.0_f64).sqrt();
        let mut b = [[0.0; 4]; 4];
        // K^(3,1) = Y^(3,3)
        b[2][3] = 1.0;
        return TensorBasisMatrices {
            n,
            a,
            b,
            factors: None,
        };
    }
    if n == 1 {
        let mut a = [[0.0; 5]; 5];
        let r15 = 15.0_f64.sqrt();
        a[0] = [
            (2.0 / 5.0_f64).sqrt(),
            -(1.0 / 5.0_f64).sqrt(),
            -(1.0 / 5.0_f64).sqrt(),
            -(1.0 / 5.0_f64).sqrt(),
            0.0,
        ];
        a[1] = [
            (1.0 / 3.0_f64).sqrt(),
            (2.0 / 3.0_f64).sqrt(),
            0.0,
            0.0,
            0.0,
        ];
        a[2] = [
            2.0 / r15,
            -std::f64::consts::SQRT_2 / r15,
            (3.0 / 10.0_f64).sqrt(),
            (3.0 / 10.0_f64).sqrt(),
            0.0,
        ];
        // row 3 is K^(2,2): zero at n = 1
        a[4] = [
            0.0,
            0.0,
            std::f64::consts::FRAC_1_SQRT_2,
            -std::f64::consts::FRAC_1_SQRT_2,
            0.0,
        ];
        let mut b = [[0.0; 4]; 4];
        let r6 = 6.0_f64.sqrt();
        let r3 = 3.0_f64.sqrt();
        b[0] = [2.0 / r6, 1.0 / r6, 0.0, -1.0 / r6];
        b[1] = [1.0 / r3, -1.0 / r3, 0.0, 1.0 / r3];
        b[2] = [0.0, std::f64::consts::FRAC_1_SQRT_2, 0.0, std::f64::consts::FRAC_1_SQRT_2];
        // row 3 is K^(3,2): zero at n = 1
        return TensorBasisMatrices {
            n,
            a,
            b,
            factors: None,
        };
    }

    let nf = n as f64;
    let nu2 = nf * (nf + 1.0);
    let s2 = 2.0 * nu2 * (nu2 - 2.0);

    let c_a = [1.0, nu2.sqrt(), nu2.sqrt(), std::f64::consts::SQRT_2, s2.sqrt()];
    let e_a = [
        ((nf + 1.0) * (nf + 2.0) * (2.0 * nf + 1.0) * (2.0 * nf + 3.0)).sqrt(),
        (nf * nf * (2.0 * nf - 1.0) * (2.0 * nf + 1.0)).sqrt(),
        ((nf + 1.0) * (nf + 1.0) * (2.0 * nf + 1.0) * (2.0 * nf + 3.0)).sqrt(),
        ((nf - 1.0) * nf * (2.0 * nf - 1.0) * (2.0 * nf + 1.0)).sqrt(),
        nf * (nf + 1.0),
    ];
    let m_a = [
        [
            (nf + 1.0) * (nf + 2.0),
            -(nf + 2.0),
            -(nf + 2.0),
            -0.5 * (nf + 2.0) * (nf + 1.0),
            0.5,
        ],
        [nf * nf, nf, 1.0 - nf, 0.5 * (nf - 1.0) * nf, -0.5],
        [
            (nf + 1.0) * (nf + 1.0),
            -(nf + 1.0),
            nf + 2.0,
            0.5 * (nf + 1.0) * (nf + 2.0),
            -0.5,
        ],
        [
            (nf - 1.0) * nf,
            nf - 1.0,
            nf - 1.0,
            -0.5 * (nf - 1.0) * nf,
            0.5,
        ],
        [0.0, 0.0, 1.0, -0.5 * nu2, -0.5],
    ];
    let mut a = [[0.0; 5]; 5];
    for r in 0..5 {
        for c in 0..5 {
            a[r][c] = m_a[r][c] * c_a[c] / e_a[r];
        }
    }

    let c_b = [nu2.sqrt(), nu2.sqrt(), s2.sqrt(), std::f64::consts::SQRT_2];
    let e_b = [
        (nf * (nf + 1.0) * (nf + 1.0) * (2.0 * nf + 1.0)).sqrt(),
        (nf * nf * (nf + 1.0) * (2.0 * nf + 1.0)).sqrt(),
        ((nf + 1.0) * (nf + 1.0) * (nf + 2.0) * (2.0 * nf + 1.0)).sqrt(),
        ((nf - 1.0) * nf * nf * (2.0 * nf + 1.0)).sqrt(),
    ];
    let m_b = [
        [nf + 1.0, 1.0, -0.5, -0.5 * nu2],
        [nf, -1.0, 0.5, 0.5 * nu2],
        [0.0, nf + 2.0, -0.5, 0.5 * (nf + 1.0) * (nf + 2.0)],
        [0.0, nf - 1.0, 0.5, -0.5 * (nf - 1.0) * nf],
    ];
    let mut b = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            b[r][c] = m_b[r][c] * c_b[c] / e_b[r];
        }
    }

    TensorBasisMatrices {
        n,
        a,
        b,
        factors: Some(MatrixFactors { c_a, e_a, c_b, e_b }),
    }
}

/// Gauss-Jordan inverse with partial pivoting; `None` if singular.
pub fn invert_matrix<const N: usize>(m: [[f64; N]; N]) -> Option<[[f64; N]; N]> {
    let mut a = m;
    let mut inv = [[0.0; N]; N];
    for (r, row) in inv.iter_mut().enumerate() {
        row[r] = 1.0;
    }
    for col in 0..N {
        let mut piv = col;
        for r in col + 1..N {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for c in 0..N {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for r in 0..N {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..N {
                        a[r][c] -= f * a[col][c];
                        inv[r][c] -= f * inv[col][c];
                    }
                }
            }
        }
    }
    Some(inv)
}

// ---------------------------------------------------------------------------
// transforms
// ---------------------------------------------------------------------------

fn er_components(grid: &SphereGrid) -> [Vec<f64>; 3] {
    let mut er: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; grid.npts()]);
    for i in 0..grid.nlat() {
        let t = grid.nodes()[i];
        let c = grid.cos_lat()[i];
        for k in 0..grid.nlon() {
            let idx = grid.index(i, k);
            let (e, _, _) = local_frame(grid.longitudes()[k], t, c);
            for a in 0..3 {
                er[a][idx] = e[a];
            }
        }
    }
    er
}

#[inline]
fn nu(n: usize) -> f64 {
    ((n * (n + 1)) as f64).sqrt()
}

#[inline]
fn shalf(n: usize) -> f64 {
    // s/2 with s = √(2(n(n+1)-2)), for n ≥ 2
    (2.0 * ((n * (n + 1)) as f64 - 2.0)).sqrt() / 2.0
}

/// Forward tensor SFT: T̂^{(i,k)}_{n,j} = ⟨T · Y^(i,k)_{n,j}⟩, evaluated by
/// exact structural contractions:
///   the ê_r-row and ê_r-column vector fields give the (1,k) and (i,1)
///   families, the i_tan/j_tan traces give (2,2) and (3,3), and the spectral
///   column divergences ∇*·T, L*·T determine (2,3), (3,2) through the
///   divergence identity tables.
pub fn tsft_forward(field: &GridTensor, band: usize) -> Result<SpectralTensor> {
    let grid = &field.grid;
    grid.require_band(band + 2)?;
    let er = er_components(grid);
    let npts = grid.npts();

    let mut w = GridVector::zeros(grid.clone(), Frame::Cartesian); // ê_rᵀ T
    let mut u = GridVector::zeros(grid.clone(), Frame::Cartesian); // T ê_r
    let mut tr_tan = GridScalar::zeros(grid.clone());
    let mut jt = GridScalar::zeros(grid.clone());
    for idx in 0..npts {
        let t = |l: usize, m: usize| field.comps[3 * l + m][idx];
        let e = [er[0][idx], er[1][idx], er[2][idx]];
        let mut a_rr = 0.0;
        for l in 0..3 {
            for m in 0..3 {
                a_rr += e[l] * t(l, m) * e[m];
            }
        }
        for m in 0..3 {
            w.comps[m][idx] = (0..3).map(|l| e[l] * t(l, m)).sum();
        }
        for l in 0..3 {
            u.comps[l][idx] = (0..3).map(|m| t(l, m) * e[m]).sum();
        }
        tr_tan.values[idx] = t(0, 0) + t(1, 1) + t(2, 2) - a_rr;
        jt.values[idx] = e[0] * (t(2, 1) - t(1, 2))
            + e[1] * (t(0, 2) - t(2, 0))
            + e[2] * (t(1, 0) - t(0, 1));
    }

    let vw = vsft_forward(&w, band)?;
    let vu = vsft_forward(&u, band)?;
    let s22 = sft_forward(&tr_tan, band)?;
    let s33 = sft_forward(&jt, band)?;

    // spectral column divergences: D_m = ∇*·(T_{·m}), E_m = L*·(T_{·m})
    let mut dcomps: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::new());
    let mut ecomps: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::new());
    for m in 0..3 {
        let col = GridVector::from_components(
            grid.clone(),
            Frame::Cartesian,
            [
                field.comps[m].clone(),
                field.comps[3 + m].clone(),
                field.comps[6 + m].clone(),
            ],
        )?;
        let cc = vsft_forward(&col, band + 1)?;
        dcomps[m] = sft_inverse(&crate::diffops::div_star(&cc), grid)?.values;
        ecomps[m] = sft_inverse(&crate::diffops::lstar_dot(&cc), grid)?.values;
    }
    let dvec = GridVector::from_components(grid.clone(), Frame::Cartesian, dcomps)?;
    let evec = GridVector::from_components(grid.clone(), Frame::Cartesian, ecomps)?;
    let dpsi = vsft_forward(&dvec, band)?;
    let epsi = vsft_forward(&evec, band)?;

    let mut out = SpectralTensor::zeros(band, grid.radius());
    let sqrt2 = std::f64::consts::SQRT_2;
    for (n, j) in modes(band) {
        let idx = mode_index(n, j);
        out.comp_mut(1, 1)[idx] = vw.y[idx];
        out.comp_mut(2, 2)[idx] = s22.coeffs[idx] / sqrt2;
        out.comp_mut(3, 3)[idx] = s33.coeffs[idx] / sqrt2;
        if n >= 1 {
            out.comp_mut(1, 2)[idx] = vw.psi[idx];
            out.comp_mut(1, 3)[idx] = vw.phi[idx];
            out.comp_mut(2, 1)[idx] = vu.psi[idx];
            out.comp_mut(3, 1)[idx] = vu.phi[idx];
        }
        if n >= 2 {
            let v = nu(n);
            let sh = shalf(n);
            let t21 = out.comp(2, 1)[idx];
            let t22 = out.comp(2, 2)[idx];
            let t31 = out.comp(3, 1)[idx];
            let t33 = out.comp(3, 3)[idx];
            out.comp_mut(2, 3)[idx] = (t21 + v / sqrt2 * t22 - dpsi.psi[idx]) / sh;
            out.comp_mut(3, 2)[idx] = (t31 + v / sqrt2 * t33 - epsi.psi[idx]) / sh;
        }
    }
    out.enforce_validity();
    Ok(out)
}

/// Inverse tensor SFT (synthesis) by the same structural grouping:
/// T = ê_r⊗W + U⊗ê_r + (S₂₂ i_tan + S₃₃ j_tan)/√2
///   + [∇*⊗P - L*⊗F + 2 P⊗ê_r] + [∇*⊗P' + L*⊗F' + 2 P'⊗ê_r],
/// with W, U, P, F, P', F' vector syntheses of the family coefficients.
pub fn tsft_inverse(coeffs: &SpectralTensor, grid: &Arc<SphereGrid>) -> Result<GridTensor> {
    grid.require_band(coeffs.band + 1)?;
    if grid.radius() != coeffs.radius {
        return Err(Error::RadiusMismatch {
            a: grid.radius(),
            b: coeffs.radius,
        });
    }
    let band = coeffs.band;
    let n_modes = mode_count(band);
    let sqrt2 = std::f64::consts::SQRT_2;

    let mut wv = SpectralVector::zeros(band, coeffs.radius);
    wv.y.copy_from_slice(coeffs.comp(1, 1));
    wv.psi.copy_from_slice(coeffs.comp(1, 2));
    wv.phi.copy_from_slice(coeffs.comp(1, 3));
    let w = vsft_inverse(&wv, grid)?.to_frame(Frame::Cartesian);

    let mut uv = SpectralVector::zeros(band, coeffs.radius);
    uv.psi.copy_from_slice(coeffs.comp(2, 1));
    uv.phi.copy_from_slice(coeffs.comp(3, 1));
    let u = vsft_inverse(&uv, grid)?.to_frame(Frame::Cartesian);

    let mut c22 = SpectralScalar::zeros(band, coeffs.radius);
    c22.coeffs.copy_from_slice(coeffs.comp(2, 2));
    let s22 = sft_inverse(&c22, grid)?;
    let mut c33 = SpectralScalar::zeros(band, coeffs.radius);
    c33.coeffs.copy_from_slice(coeffs.comp(3, 3));
    let s33 = sft_inverse(&c33, grid)?;

    // second-order families, grouped through their defining combinations
    let mut pv = SpectralVector::zeros(band, coeffs.radius);
    let mut fv = SpectralVector::zeros(band, coeffs.radius);
    let mut pv2 = SpectralVector::zeros(band, coeffs.radius);
    let mut fv2 = SpectralVector::zeros(band, coeffs.radius);
    let mut any23 = false;
    for idx in 0..n_modes {
        let t23 = coeffs.comp(2, 3)[idx];
        let t32 = coeffs.comp(3, 2)[idx];
        if t23 != 0.0 || t32 != 0.0 {
            any23 = true;
        }
    }
    if any23 {
        for (n, j) in modes(band) {
            if n < 2 {
                continue;
            }
            let idx = mode_index(n, j);
            let s = 2.0 * shalf(n);
            pv.psi[idx] = coeffs.comp(2, 3)[idx] / s;
            fv.phi[idx] = coeffs.comp(2, 3)[idx] / s;
            pv2.phi[idx] = coeffs.comp(3, 2)[idx] / s;
            fv2.psi[idx] = coeffs.comp(3, 2)[idx] / s;
        }
    }

    let er = er_components(grid);
    let mut out = GridTensor::zeros(grid.clone());
    for idx in 0..grid.npts() {
        let e = [er[0][idx], er[1][idx], er[2][idx]];
        for l in 0..3 {
            for m in 0..3 {
                let itan = (if l == m { 1.0 } else { 0.0 }) - e[l] * e[m];
                // (j_tan)_{lm} = ε_{lpm} e_p
                let jtan = match (l, m) {
                    (0, 1) => -e[2],
                    (1, 0) => e[2],
                    (1, 2) => -e[0],
                    (2, 1) => e[0],
                    (2, 0) => -e[1],
                    (0, 2) => e[1],
                    _ => 0.0,
                };
                out.comps[3 * l + m][idx] = e[l] * w.comps[m][idx]
                    + u.comps[l][idx] * e[m]
                    + s22.values[idx] / sqrt2 * itan
                    + s33.values[idx] / sqrt2 * jtan;
            }
        }
    }

    if any23 {
        let p = vsft_inverse(&pv, grid)?.to_frame(Frame::Cartesian);
        let f = vsft_inverse(&fv, grid)?;
        let p2 = vsft_inverse(&pv2, grid)?.to_frame(Frame::Cartesian);
        let f2 = vsft_inverse(&fv2, grid)?;
        let gp = crate::diffops::grad_tensor_grid(&p, band + 1)?;
        let lf = crate::diffops::rot_first(&crate::diffops::grad_tensor_grid(&f.to_frame(Frame::Cartesian), band + 1)?);
        let gp2 = crate::diffops::grad_tensor_grid(&p2, band + 1)?;
        let lf2 = crate::diffops::rot_first(&crate::diffops::grad_tensor_grid(&f2.to_frame(Frame::Cartesian), band + 1)?);
        for idx in 0..grid.npts() {
            let e = [er[0][idx], er[1][idx], er[2][idx]];
            for l in 0..3 {
                for m in 0..3 {
                    let lm = 3 * l + m;
                    out.comps[lm][idx] += gp.comps[lm][idx] - lf.comps[lm][idx]
                        + 2.0 * p.comps[l][idx] * e[m]
                        + gp2.comps[lm][idx]
                        + lf2.comps[lm][idx]
                        + 2.0 * p2.comps[l][idx] * e[m];
                }
            }
        }
    }
    Ok(out)
}

/// Samples of one canonical tensor basis field.
pub fn eval_tensor_basis(
    i: usize,
    k: usize,
    n: usize,
    j: i64,
    grid: &Arc<SphereGrid>,
) -> Result<GridTensor> {
    if !(1..=3).contains(&i) || !(1..=3).contains(&k) || j.unsigned_abs() as usize > n {
        return Err(Error::InvalidIndex { n, j });
    }
    if n < family_min_degree(i, k) {
        return Err(Error::InvalidFamily { i, k, n });
    }
    let mut c = SpectralTensor::zeros(n, grid.radius());
    c.comp_mut(i, k)[mode_index(n, j)] = 1.0;
    tsft_inverse(&c, grid)
}

/// Generalized tensor convolution, spectral-diagonal form: every coefficient
/// at degree n is scaled by Ĝ(n) across all nine families.
pub fn convolve_tensor(
    coeffs: &SpectralTensor,
    kernel: &ZonalKernelSpectrum,
) -> Result<SpectralTensor> {
    if kernel.nmax < coeffs.band {
        return Err(Error::BandMismatch {
            what: "convolve_tensor",
            need: coeffs.band,
            have: kernel.nmax,
        });
    }
    let mut out = coeffs.clone();
    for (n, j) in modes(coeffs.band) {
        let idx = mode_index(n, j);
        let g = kernel.ghat(n as i64);
        for f in 0..9 {
            out.comps[f][idx] *= g;
        }
    }
    Ok(out)
}

/// Generalized tensor convolution by its defining componentwise pipeline:
/// project onto the nine K-families via [A],[B], synthesize each part on the
/// grid, convolve every Cartesian component against the deg-compensating
/// shifted kernel, and resum. Independent oracle for [`convolve_tensor`].
pub fn convolve_tensor_edmonds_oracle(
    field: &GridTensor,
    band: usize,
    kernel: &ZonalKernelSpectrum,
) -> Result<GridTensor> {
    let grid = &field.grid;
    grid.require_band(band + 2)?;
    if kernel.nmax < band + 2 {
        return Err(Error::BandMismatch {
            what: "convolve_tensor_edmonds_oracle",
            need: band + 2,
            have: kernel.nmax,
        });
    }
    let tc = tsft_forward(field, band)?;
    let mats: Vec<TensorBasisMatrices> = (0..=band).map(tensor_matrices).collect();
    let mut out = GridTensor::zeros(grid.clone());

    for (i, k) in FAMILIES {
        // K-projection coefficients of this family, then the single-part
        // tensor K̂·K^(i,k) expressed back in the canonical families
        let mut part = SpectralTensor::zeros(band, grid.radius());
        let mut nonzero = false;
        for (n, j) in modes(band) {
            let idx = mode_index(n, j);
            let m = &mats[n];
            if let Some(r) = A_ROWS.iter().position(|f| *f == (i, k)) {
                let mut kc = 0.0;
                for (c, fam) in A_COLS.iter().enumerate() {
                    kc += m.a[r][c] * part_coeff(&tc, *fam, idx);
                }
                if kc != 0.0 {
                    nonzero = true;
                }
                for (c, fam) in A_COLS.iter().enumerate() {
                    part.comp_mut(fam.0, fam.1)[idx] = m.a[r][c] * kc;
                }
            } else {
                let r = B_ROWS.iter().position(|f| *f == (i, k)).expect("family");
                let mut kc = 0.0;
                for (c, fam) in B_COLS.iter().enumerate() {
                    kc += m.b[r][c] * part_coeff(&tc, *fam, idx);
                }
                if kc != 0.0 {
                    nonzero = true;
                }
                for (c, fam) in B_COLS.iter().enumerate() {
                    part.comp_mut(fam.0, fam.1)[idx] = m.b[r][c] * kc;
                }
            }
        }
        if !nonzero {
            continue;
        }
        let gpart = tsft_inverse(&part, grid)?;
        let shift = family_shift(i, k);
        let gs = kernel.shifted(shift);
        let zero_below = (-shift).max(0) as usize;
        for lm in 0..9 {
            let comp = GridScalar {
                grid: grid.clone(),
                values: gpart.comps[lm].clone(),
            };
            let filtered =
                crate::vector::scalar_convolve_shifted(&comp, band + 2, &gs, zero_below)?;
            for (dst, v) in out.comps[lm].iter_mut().zip(&filtered.values) {
                *dst += v;
            }
        }
    }
    Ok(out)
}

#[inline]
fn part_coeff(t: &SpectralTensor, fam: (usize, usize), idx: usize) -> f64 {
    t.comp(fam.0, fam.1)[idx]
}

/// Reproducible random coefficients over all valid slots, uniform in [-1, 1).
pub fn random_spectral_tensor<R: rand::Rng>(
    band: usize,
    radius: f64,
    rng: &mut R,
) -> SpectralTensor {
    let mut out = SpectralTensor::zeros(band, radius);
    for (n, j) in modes(band) {
        let idx = mode_index(n, j);
        for (fi, (i, k)) in FAMILIES.iter().enumerate() {
            if n >= family_min_degree(*i, *k) {
                out.comps[fi][idx] = rng.gen_range(-1.0..1.0);
            }
        }
    }
    out
}
