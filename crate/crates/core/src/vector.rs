//! Vector spherical harmonics on the sphere: the canonical basis
//! 𝐘 = ê_r Y, Ψ = ∇*Y/√(n(n+1)), Φ = L*Y/√(n(n+1)), the degree-wise
//! rotation [S] to the basis whose Cartesian components are single-degree
//! scalar harmonics, the vector SFT, and the generalized vector convolution
//! (spectral-diagonal and componentwise-oracle implementations).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::ZonalKernelSpectrum;
use crate::sht::{
    mode_count, mode_index, modes, sft_forward, sft_inverse, GridScalar, ShTables, SphereGrid,
    TrigTables,
};

/// Component frame of a sampled vector field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Local spherical frame (ê_r, ê_λ, ê_φ); the file-format tag is "frame".
    Spherical,
    /// Fixed Cartesian frame (ê_1, ê_2, ê_3).
    Cartesian,
}

/// Sampled vector field; three components per grid point, latitude-major.
#[derive(Debug, Clone)]
pub struct GridVector {
    pub grid: Arc<SphereGrid>,
    pub frame: Frame,
    pub comps: [Vec<f64>; 3],
}

/// Unit vectors of the local frame at (λ, φ), as Cartesian triples.
#[inline]
pub(crate) fn local_frame(lam: f64, t: f64, c: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let (sl, cl) = lam.sin_cos();
    let er = [c * cl, c * sl, t];
    let el = [-sl, cl, 0.0];
    let ep = [-t * cl, -t * sl, c];
    (er, el, ep)
}

impl GridVector {
    pub fn zeros(grid: Arc<SphereGrid>, frame: Frame) -> Self {
        let n = grid.npts();
        Self {
            grid,
            frame,
            comps: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    pub fn from_components(
        grid: Arc<SphereGrid>,
        frame: Frame,
        comps: [Vec<f64>; 3],
    ) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.npts()) {
            return Err(Error::DimensionMismatch(
                "vector component length != grid size".into(),
            ));
        }
        Ok(Self { grid, frame, comps })
    }

    /// Rotate components into the requested frame (exact orthogonal rotation
    /// per point; round trips are lossless to machine precision).
    pub fn to_frame(&self, frame: Frame) -> GridVector {
        if frame == self.frame {
            return self.clone();
        }
        let grid = &self.grid;
        let mut out = GridVector::zeros(grid.clone(), frame);
        for i in 0..grid.nlat() {
            let t = grid.nodes()[i];
            let c = grid.cos_lat()[i];
            for k in 0..grid.nlon() {
                let idx = grid.index(i, k);
                let (er, el, ep) = local_frame(grid.longitudes()[k], t, c);
                match frame {
                    Frame::Cartesian => {
                        let (vr, vl, vp) =
                            (self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]);
                        for a in 0..3 {
                            out.comps[a][idx] = vr * er[a] + vl * el[a] + vp * ep[a];
                        }
                    }
                    Frame::Spherical => {
                        let v = [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]];
                        out.comps[0][idx] = v[0] * er[0] + v[1] * er[1] + v[2] * er[2];
                        out.comps[1][idx] = v[0] * el[0] + v[1] * el[1] + v[2] * el[2];
                        out.comps[2][idx] = v[0] * ep[0] + v[1] * ep[1] + v[2] * ep[2];
                    }
                }
            }
        }
        out
    }

    /// Pointwise dot product field u·v.
    pub fn dot_field(&self, other: &GridVector) -> GridScalar {
        let a = self.to_frame(Frame::Cartesian);
        let b = other.to_frame(Frame::Cartesian);
        let mut out = GridScalar::zeros(self.grid.clone());
        for idx in 0..self.grid.npts() {
            out.values[idx] = (0..3).map(|m| a.comps[m][idx] * b.comps[m][idx]).sum();
        }
        out
    }

    /// Discrete ⟨u·v⟩.
    pub fn dot(&self, other: &GridVector) -> f64 {
        self.dot_field(other).mean()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn add_scaled(&mut self, other: &GridVector, a: f64) {
        assert_eq!(self.frame, other.frame, "frame mismatch in add_scaled");
        for m in 0..3 {
            for (v, o) in self.comps[m].iter_mut().zip(&other.comps[m]) {
                *v += a * o;
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        for m in 0..3 {
            for v in &mut self.comps[m] {
                *v *= a;
            }
        }
    }

    /// u × ê_r, pointwise. In the local frame (v_r, v_λ, v_φ) × ê_r = (0, v_φ, -v_λ).
    pub fn cross_er(&self) -> GridVector {
        let s = self.to_frame(Frame::Spherical);
        let mut out = GridVector::zeros(self.grid.clone(), Frame::Spherical);
        for idx in 0..self.grid.npts() {
            out.comps[0][idx] = 0.0;
            out.comps[1][idx] = s.comps[2][idx];
            out.comps[2][idx] = -s.comps[1][idx];
        }
        out
    }

    /// Radial component u·ê_r as a scalar field.
    pub fn radial(&self) -> GridScalar {
        let s = self.to_frame(Frame::Spherical);
        GridScalar {
            grid: self.grid.clone(),
            values: s.comps[0].clone(),
        }
    }

    /// Mean of each Cartesian component.
    pub fn mean_cartesian(&self) -> [f64; 3] {
        let c = self.to_frame(Frame::Cartesian);
        let mut out = [0.0; 3];
        for (m, dst) in out.iter_mut().enumerate() {
            let f = GridScalar {
                grid: self.grid.clone(),
                values: c.comps[m].clone(),
            };
            *dst = f.mean();
        }
        out
    }
}

/// Coefficients over the canonical basis: û^Y, û^ψ, û^φ per (n, j).
/// Ψ and Φ do not exist at n = 0; those slots are structural zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector {
    pub band: usize,
    pub radius: f64,
    pub y: Vec<f64>,
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
}

impl SpectralVector {
    pub fn zeros(band: usize, radius: f64) -> Self {
        let n = mode_count(band);
        Self {
            band,
            radius,
            y: vec![0.0; n],
            psi: vec![0.0; n],
            phi: vec![0.0; n],
        }
    }

    pub fn add_scaled(&mut self, other: &SpectralVector, a: f64) {
        for (v, o) in self.y.iter_mut().zip(&other.y) {
            *v += a * o;
        }
        for (v, o) in self.psi.iter_mut().zip(&other.psi) {
            *v += a * o;
        }
        for (v, o) in self.phi.iter_mut().zip(&other.phi) {
            *v += a * o;
        }
    }

    /// Σ over all families and modes of the squared coefficients.
    pub fn norm_sq(&self) -> f64 {
        self.y.iter().map(|c| c * c).sum::<f64>()
            + self.psi.iter().map(|c| c * c).sum::<f64>()
            + self.phi.iter().map(|c| c * c).sum::<f64>()
    }
}

/// Coefficients over the single-degree-component basis K^(1), K^(2), K^(3).
#[derive(Debug, Clone, PartialEq)]
pub struct EdmondsVectorCoeffs {
    pub band: usize,
    pub radius: f64,
    pub k: [Vec<f64>; 3],
}

/// The degree-n rotation taking (𝐘, Ψ, Φ) to (K^(1), K^(2), K^(3)):
/// rows (√(n+1), -√n, 0; √n, √(n+1), 0; 0, 0, √(2n+1)) / √(2n+1).
/// At n = 0 this degenerates to the identity on the surviving 𝐘 slot.
pub fn edmonds_matrix(n: usize) -> [[f64; 3]; 3] {
    let nf = n as f64;
    let d = (2.0 * nf + 1.0).sqrt();
    [
        [(nf + 1.0).sqrt() / d, -nf.sqrt() / d, 0.0],
        [nf.sqrt() / d, (nf + 1.0).sqrt() / d, 0.0],
        [0.0, 0.0, 1.0],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorBasisKind {
    Y,
    Psi,
    Phi,
}

/// Samples of one canonical vector basis field on the grid.
pub fn eval_vector_basis(
    kind: VectorBasisKind,
    n: usize,
    j: i64,
    grid: &Arc<SphereGrid>,
) -> Result<GridVector> {
    if j.unsigned_abs() as usize > n {
        return Err(Error::InvalidIndex { n, j });
    }
    if n == 0 && kind != VectorBasisKind::Y {
        return Err(Error::InvalidIndex { n, j });
    }
    grid.require_band(n)?;
    let mut coeffs = SpectralVector::zeros(n, grid.radius());
    let idx = mode_index(n, j);
    match kind {
        VectorBasisKind::Y => coeffs.y[idx] = 1.0,
        VectorBasisKind::Psi => coeffs.psi[idx] = 1.0,
        VectorBasisKind::Phi => coeffs.phi[idx] = 1.0,
    }
    vsft_inverse(&coeffs, grid)
}

/// ∂_λ factor of the longitude part: dτ_j(λ_k), using the trig tables.
#[inline]
fn dtau(j: i64, m: usize, trig: &TrigTables, k: usize) -> f64 {
    if j > 0 {
        -(m as f64) * trig.sin(m)[k]
    } else if j < 0 {
        m as f64 * trig.cos(m)[k]
    } else {
        0.0
    }
}

#[inline]
fn tau(j: i64, m: usize, trig: &TrigTables, k: usize) -> f64 {
    if j >= 0 {
        trig.cos(m)[k]
    } else {
        trig.sin(m)[k]
    }
}

/// Forward vector SFT: quadrature projections onto 𝐘, Ψ, Φ.
pub fn vsft_forward(field: &GridVector, band: usize) -> Result<SpectralVector> {
    let grid = &field.grid;
    grid.require_band(band)?;
    let f = field.to_frame(Frame::Spherical);
    let tab = ShTables::build(grid, band);
    let trig = TrigTables::build(grid, band);
    let nlat = grid.nlat();
    let nlon = grid.nlon();
    let mut out = SpectralVector::zeros(band, grid.radius());
    for (n, j) in modes(band) {
        let m = j.unsigned_abs() as usize;
        let amp = if j == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
        let qv = tab.q(n, m);
        let dv = tab.dq(n, m);
        let nu = ((n * (n + 1)) as f64).sqrt();
        let mut ay = 0.0;
        let mut apsi = 0.0;
        let mut aphi = 0.0;
        for i in 0..nlat {
            let mu = grid.point_measure(i);
            let ci = grid.cos_lat()[i];
            for k in 0..nlon {
                let idx = grid.index(i, k);
                let yv = amp * qv[i] * tau(j, m, &trig, k);
                ay += mu * yv * f.comps[0][idx];
                if n >= 1 {
                    let pl = amp * qv[i] * dtau(j, m, &trig, k) / (nu * ci);
                    let pp = amp * dv[i] * tau(j, m, &trig, k) / nu;
                    // Ψ = (0, pl, pp); Φ = ê_r × Ψ = (0, -pp, pl)
                    apsi += mu * (pl * f.comps[1][idx] + pp * f.comps[2][idx]);
                    aphi += mu * (-pp * f.comps[1][idx] + pl * f.comps[2][idx]);
                }
            }
        }
        let idx = mode_index(n, j);
        out.y[idx] = ay;
        if n >= 1 {
            out.psi[idx] = apsi;
            out.phi[idx] = aphi;
        }
    }
    Ok(out)
}

/// Inverse vector SFT (synthesis), local-frame output.
pub fn vsft_inverse(coeffs: &SpectralVector, grid: &Arc<SphereGrid>) -> Result<GridVector> {
    grid.require_band(coeffs.band)?;
    if grid.radius() != coeffs.radius {
        return Err(Error::RadiusMismatch {
            a: grid.radius(),
            b: coeffs.radius,
        });
    }
    let band = coeffs.band;
    let tab = ShTables::build(grid, band);
    let trig = TrigTables::build(grid, band);
    let nlat = grid.nlat();
    let nlon = grid.nlon();
    let mut out = GridVector::zeros(grid.clone(), Frame::Spherical);
    for (n, j) in modes(band) {
        let idx = mode_index(n, j);
        let (cy, cpsi, cphi) = (coeffs.y[idx], coeffs.psi[idx], coeffs.phi[idx]);
        if cy == 0.0 && cpsi == 0.0 && cphi == 0.0 {
            continue;
        }
        let m = j.unsigned_abs() as usize;
        let amp = if j == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
        let qv = tab.q(n, m);
        let dv = tab.dq(n, m);
        let nu = ((n * (n + 1)) as f64).sqrt();
        for i in 0..nlat {
            let ci = grid.cos_lat()[i];
            for k in 0..nlon {
                let gidx = grid.index(i, k);
                let yv = amp * qv[i] * tau(j, m, &trig, k);
                out.comps[0][gidx] += cy * yv;
                if n >= 1 {
                    let pl = amp * qv[i] * dtau(j, m, &trig, k) / (nu * ci);
                    let pp = amp * dv[i] * tau(j, m, &trig, k) / nu;
                    out.comps[1][gidx] += cpsi * pl - cphi * pp;
                    out.comps[2][gidx] += cpsi * pp + cphi * pl;
                }
            }
        }
    }
    Ok(out)
}

/// Cartesian components of a spectral vector at an arbitrary point (λ, φ).
pub fn eval_vector_point(coeffs: &SpectralVector, lam: f64, phi: f64) -> [f64; 3] {
    let (sl, cl) = lam.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let er = [cp * cl, cp * sl, sp];
    let mut out = [0.0f64; 3];
    for (n, j) in modes(coeffs.band) {
        let idx = mode_index(n, j);
        let (cy, cpsi, cphi) = (coeffs.y[idx], coeffs.psi[idx], coeffs.phi[idx]);
        if cy == 0.0 && cpsi == 0.0 && cphi == 0.0 {
            continue;
        }
        if cy != 0.0 {
            let y = crate::sht::eval_y_point(n, j, lam, phi);
            for a in 0..3 {
                out[a] += cy * y * er[a];
            }
        }
        if n >= 1 && (cpsi != 0.0 || cphi != 0.0) {
            let nu = ((n * (n + 1)) as f64).sqrt();
            let g = crate::sht::eval_grad_y_point(n, j, lam, phi);
            let psi = [g[0] / nu, g[1] / nu, g[2] / nu];
            let phi_v = [
                er[1] * psi[2] - er[2] * psi[1],
                er[2] * psi[0] - er[0] * psi[2],
                er[0] * psi[1] - er[1] * psi[0],
            ];
            for a in 0..3 {
                out[a] += cpsi * psi[a] + cphi * phi_v[a];
            }
        }
    }
    out
}

/// Per-mode application of [S]: û^(i) = Σ_a S_{ia} û^canonical_a.
pub fn to_edmonds(coeffs: &SpectralVector) -> EdmondsVectorCoeffs {
    let n_modes = mode_count(coeffs.band);
    let mut k = [
        vec![0.0; n_modes],
        vec![0.0; n_modes],
        vec![0.0; n_modes],
    ];
    for (n, j) in modes(coeffs.band) {
        let idx = mode_index(n, j);
        let s = edmonds_matrix(n);
        let v = [coeffs.y[idx], coeffs.psi[idx], coeffs.phi[idx]];
        for (i, ki) in k.iter_mut().enumerate() {
            ki[idx] = s[i][0] * v[0] + s[i][1] * v[1] + s[i][2] * v[2];
        }
    }
    EdmondsVectorCoeffs {
        band: coeffs.band,
        radius: coeffs.radius,
        k,
    }
}

/// Inverse of [`to_edmonds`] (transpose of the rotation).
pub fn from_edmonds(coeffs: &EdmondsVectorCoeffs) -> SpectralVector {
    let mut out = SpectralVector::zeros(coeffs.band, coeffs.radius);
    for (n, j) in modes(coeffs.band) {
        let idx = mode_index(n, j);
        let s = edmonds_matrix(n);
        let v = [coeffs.k[0][idx], coeffs.k[1][idx], coeffs.k[2][idx]];
        out.y[idx] = s[0][0] * v[0] + s[1][0] * v[1] + s[2][0] * v[2];
        if n >= 1 {
            out.psi[idx] = s[0][1] * v[0] + s[1][1] * v[1] + s[2][1] * v[2];
            out.phi[idx] = s[0][2] * v[0] + s[1][2] * v[1] + s[2][2] * v[2];
        }
    }
    out
}

/// Generalized vector convolution, spectral-diagonal form: every canonical
/// coefficient at degree n is scaled by Ĝ(n).
pub fn convolve_vector(
    coeffs: &SpectralVector,
    kernel: &ZonalKernelSpectrum,
) -> Result<SpectralVector> {
    if kernel.nmax < coeffs.band {
        return Err(Error::BandMismatch {
            what: "convolve_vector",
            need: coeffs.band,
            have: kernel.nmax,
        });
    }
    let mut out = coeffs.clone();
    for (n, j) in modes(coeffs.band) {
        let idx = mode_index(n, j);
        let g = kernel.ghat(n as i64);
        out.y[idx] *= g;
        out.psi[idx] *= g;
        out.phi[idx] *= g;
    }
    Ok(out)
}

/// Spectral shifts pairing each K-family with the kernel that compensates
/// its Cartesian component degree (n+1, n-1, n).
pub const VECTOR_FAMILY_SHIFTS: [i64; 3] = [-1, 1, 0];

/// Scalar convolution of one grid scalar by spectral multiplication with a
/// (possibly shifted) kernel table. Coefficients at degrees below
/// `zero_below` are structurally zero for an exact decomposition and are
/// zeroed before the multiply, so below-range policy values meet exact zeros.
pub(crate) fn scalar_convolve_shifted(
    field: &GridScalar,
    band: usize,
    shifted: &ZonalKernelSpectrum,
    zero_below: usize,
) -> Result<GridScalar> {
    let mut c = sft_forward(field, band)?;
    for n in 0..zero_below.min(band + 1) {
        for j in -(n as i64)..=n as i64 {
            c.set(n, j, 0.0);
        }
    }
    for (n, j) in modes(band) {
        let v = c.get(n, j) * shifted.ghat(n as i64);
        c.set(n, j, v);
    }
    sft_inverse(&c, &field.grid)
}

/// Generalized vector convolution by its defining componentwise pipeline:
/// decompose into the three single-degree parts, convolve every Cartesian
/// component against the matching shifted kernel, and resum.
///
/// Used as the independent oracle against the spectral-diagonal route.
pub fn convolve_vector_edmonds_oracle(
    field: &GridVector,
    band: usize,
    kernel: &ZonalKernelSpectrum,
) -> Result<GridVector> {
    let grid = &field.grid;
    // u^(1) carries Cartesian degree n+1 content
    grid.require_band(band + 1)?;
    if kernel.nmax < band + 1 {
        return Err(Error::BandMismatch {
            what: "convolve_vector_edmonds_oracle",
            need: band + 1,
            have: kernel.nmax,
        });
    }
    let canon = vsft_forward(field, band)?;
    let edm = to_edmonds(&canon);
    let mut out = GridVector::zeros(grid.clone(), Frame::Cartesian);
    for part in 0..3 {
        // canonical coefficients of u^(part): rows of [S] give the K fields
        let mut vi = SpectralVector::zeros(band, grid.radius());
        for (n, j) in modes(band) {
            let idx = mode_index(n, j);
            let s = edmonds_matrix(n);
            let kc = edm.k[part][idx];
            vi.y[idx] = s[part][0] * kc;
            if n >= 1 {
                vi.psi[idx] = s[part][1] * kc;
                vi.phi[idx] = s[part][2] * kc;
            }
        }
        let ui = vsft_inverse(&vi, grid)?.to_frame(Frame::Cartesian);
        let shift = VECTOR_FAMILY_SHIFTS[part];
        let gs = kernel.shifted(shift);
        let zero_below = (-shift).max(0) as usize;
        for m in 0..3 {
            let comp = GridScalar {
                grid: grid.clone(),
                values: ui.comps[m].clone(),
            };
            let filtered = scalar_convolve_shifted(&comp, band + 1, &gs, zero_below)?;
            for (dst, v) in out.comps[m].iter_mut().zip(&filtered.values) {
                *dst += v;
            }
        }
    }
    Ok(out)
}

/// Reproducible random coefficients over all valid slots, uniform in [-1, 1).
pub fn random_spectral_vector<R: rand::Rng>(
    band: usize,
    radius: f64,
    rng: &mut R,
) -> SpectralVector {
    let mut out = SpectralVector::zeros(band, radius);
    for (n, j) in modes(band) {
        let idx = mode_index(n, j);
        out.y[idx] = rng.gen_range(-1.0..1.0);
        if n >= 1 {
            out.psi[idx] = rng.gen_range(-1.0..1.0);
            out.phi[idx] = rng.gen_range(-1.0..1.0);
        }
    }
    out
}
