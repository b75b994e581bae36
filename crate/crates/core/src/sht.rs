//! Gauss–Legendre quadrature grids, real spherical harmonics, and the scalar
//! spherical Fourier transform.
//!
//! Conventions: the inner product carries the 1/(4πr²) prefactor, so
//! ⟨Y_{n,j} Y_{m,k}⟩ = δ_{nm} δ_{jk} and Y_{0,0} ≡ 1 ("geodesy 4π"
//! normalization, no Condon–Shortley phase). Harmonics are
//! Y_{n,j}(λ,φ) = √(2−δ_{j0}) · Q_{n,|j|}(sin φ) · {cos jλ (j≥0) | sin |j|λ (j<0)}
//! with Q_{n,m} the normalized associated Legendre function,
//! ∫ Q_{n,m}² dt = 2/(2−δ_{m0}) · (2−δ_{m0})/… normalized so the above holds.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
///
/// Newton iteration on the P_n three-term recurrence; weights
/// w_i = 2 / ((1 - x_i²) P_n'(x_i)²). Σ w_i = 2.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // standard initial guess, roots ordered descending in cos
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_{n-1}
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            // P_n'(x) = n (x P_n - P_{n-1}) / (x² - 1)
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // one clean-up evaluation of dp at the converged root
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 1..n {
            let kf = k as f64;
            let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[n - 1 - i] = x; // ascending
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // enforce exact symmetry of the rule (nodes come in ± pairs)
    for i in 0..n / 2 {
        let a = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[n - 1 - i] = a;
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Quadrature grid on the sphere of radius r: Gauss–Legendre nodes in
/// t = sin(latitude) × uniformly spaced longitudes λ_k = -π + 2πk/nlon.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    radius: f64,
    nlat: usize,
    nlon: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    cos_lat: Vec<f64>,
    longitudes: Vec<f64>,
}

impl SphereGrid {
    pub fn new(nlat: usize, nlon: usize, radius: f64) -> Result<Self> {
        if nlat == 0 || nlon == 0 || !(radius > 0.0) {
            return Err(Error::ParamOutOfRange(format!(
                "grid nlat={nlat}, nlon={nlon}, radius={radius}"
            )));
        }
        let (nodes, weights) = gauss_legendre(nlat);
        let cos_lat = nodes.iter().map(|t| (1.0 - t * t).sqrt()).collect();
        let longitudes = (0..nlon)
            .map(|k| -PI + 2.0 * PI * k as f64 / nlon as f64)
            .collect();
        Ok(Self {
            radius,
            nlat,
            nlon,
            nodes,
            weights,
            cos_lat,
            longitudes,
        })
    }

    /// Grid sized for band limit N: nlat = N+1, nlon = 2N+2, so that products
    /// of two band-N fields are integrated exactly.
    pub fn for_band(band: usize, radius: f64) -> Self {
        Self::new(band + 1, 2 * band + 2, radius).expect("valid band grid")
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn nlat(&self) -> usize {
        self.nlat
    }
    pub fn nlon(&self) -> usize {
        self.nlon
    }
    pub fn npts(&self) -> usize {
        self.nlat * self.nlon
    }
    /// Gauss nodes t_i = sin(latitude), ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn cos_lat(&self) -> &[f64] {
        &self.cos_lat
    }
    pub fn longitudes(&self) -> &[f64] {
        &self.longitudes
    }

    /// Measure of one grid point in the mean inner product
    /// ⟨f,g⟩ = (1/4πr²)∫ f g dS = Σ_ik μ_i f_ik g_ik, μ_i = w_i / (2 nlon).
    pub fn point_measure(&self, ilat: usize) -> f64 {
        self.weights[ilat] / (2.0 * self.nlon as f64)
    }

    /// Whether quadrature of products of two band-B fields is exact:
    /// nlat ≥ B+1 and nlon ≥ 2B+1.
    pub fn supports_band(&self, band: usize) -> bool {
        self.nlat >= band + 1 && self.nlon >= 2 * band + 1
    }

    pub fn require_band(&self, band: usize) -> Result<()> {
        if self.supports_band(band) {
            Ok(())
        } else {
            Err(Error::GridTooCoarse {
                band,
                nlat: self.nlat,
                nlon: self.nlon,
                need_nlat: band + 1,
                need_nlon: 2 * band + 1,
            })
        }
    }

    /// Largest band limit the grid supports.
    pub fn max_band(&self) -> usize {
        (self.nlat - 1).min((self.nlon - 1) / 2)
    }

    /// Flat index of grid point (ilat, ilon); storage is latitude-major.
    #[inline]
    pub fn index(&self, ilat: usize, ilon: usize) -> usize {
        ilat * self.nlon + ilon
    }
}

/// Iterate all (n, j) modes up to the band limit, n ascending, j = -n..n.
pub fn modes(band: usize) -> impl Iterator<Item = (usize, i64)> {
    (0..=band).flat_map(|n| (-(n as i64)..=n as i64).map(move |j| (n, j)))
}

/// Number of (n, j) modes for a band limit: (N+1)².
pub fn mode_count(band: usize) -> usize {
    (band + 1) * (band + 1)
}

#[inline]
pub fn mode_index(n: usize, j: i64) -> usize {
    n * n + (n as i64 + j) as usize
}

// ---------------------------------------------------------------------------
// normalized associated Legendre tables
// ---------------------------------------------------------------------------

/// Per-grid tables of Q_{n,m}(t_i) and dQ_{n,m}/dφ at the Gauss nodes.
///
/// Stable recurrences on fully normalized functions:
///   Q_{0,0} = 1,
///   Q_{m,m}   = √((2m+1)/(2m)) √(1-t²) Q_{m-1,m-1},
///   Q_{m+1,m} = √(2m+3) t Q_{m,m},
///   Q_{n,m}   = a_{n,m} (t Q_{n-1,m} - b_{n,m} Q_{n-2,m}),
///     a = √((4n²-1)/(n²-m²)),  b = √(((n-1)²-m²)/(4(n-1)²-1)),
///   dQ_{n,m}/dφ = (e_{n,m} Q_{n-1,m} - n t Q_{n,m}) / cos φ,
///     e = √((2n+1)(n²-m²)/(2n-1)).
pub(crate) struct ShTables {
    band: usize,
    nlat: usize,
    q: Vec<f64>,
    dq: Vec<f64>,
}

#[inline]
fn tri(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

impl ShTables {
    pub fn build(grid: &SphereGrid, band: usize) -> Self {
        let nlat = grid.nlat();
        let t = grid.nodes();
        let c = grid.cos_lat();
        let ntri = tri(band, band) + 1;
        let mut q = vec![0.0; ntri * nlat];
        let mut dq = vec![0.0; ntri * nlat];
        for i in 0..nlat {
            q[tri(0, 0) * nlat + i] = 1.0;
        }
        for m in 1..=band {
            let f = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            for i in 0..nlat {
                q[tri(m, m) * nlat + i] = f * c[i] * q[tri(m - 1, m - 1) * nlat + i];
            }
        }
        for m in 0..=band {
            if m + 1 <= band {
                let f = (2.0 * m as f64 + 3.0).sqrt();
                for i in 0..nlat {
                    q[tri(m + 1, m) * nlat + i] = f * t[i] * q[tri(m, m) * nlat + i];
                }
            }
            for n in (m + 2)..=band {
                let nf = n as f64;
                let mf = m as f64;
                let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
                let b = ((((nf - 1.0) * (nf - 1.0)) - mf * mf)
                    / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0))
                    .sqrt();
                for i in 0..nlat {
                    q[tri(n, m) * nlat + i] = a
                        * (t[i] * q[tri(n - 1, m) * nlat + i] - b * q[tri(n - 2, m) * nlat + i]);
                }
            }
        }
        for m in 0..=band {
            for n in m..=band {
                let nf = n as f64;
                let mf = m as f64;
                let e = if n > m {
                    ((2.0 * nf + 1.0) * (nf * nf - mf * mf) / (2.0 * nf - 1.0)).sqrt()
                } else {
                    0.0
                };
                for i in 0..nlat {
                    let qn1 = if n > m {
                        q[tri(n - 1, m) * nlat + i]
                    } else {
                        0.0
                    };
                    dq[tri(n, m) * nlat + i] =
                        (e * qn1 - nf * t[i] * q[tri(n, m) * nlat + i]) / c[i];
                }
            }
        }
        Self { band, nlat, q, dq }
    }

    #[inline]
    pub fn q(&self, n: usize, m: usize) -> &[f64] {
        debug_assert!(m <= n && n <= self.band);
        &self.q[tri(n, m) * self.nlat..(tri(n, m) + 1) * self.nlat]
    }

    #[inline]
    pub fn dq(&self, n: usize, m: usize) -> &[f64] {
        debug_assert!(m <= n && n <= self.band);
        &self.dq[tri(n, m) * self.nlat..(tri(n, m) + 1) * self.nlat]
    }
}

/// cos(mλ_k), sin(mλ_k) tables for m = 0..=band.
pub(crate) struct TrigTables {
    nlon: usize,
    cosm: Vec<f64>,
    sinm: Vec<f64>,
}

impl TrigTables {
    pub fn build(grid: &SphereGrid, band: usize) -> Self {
        let nlon = grid.nlon();
        let mut cosm = vec![0.0; (band + 1) * nlon];
        let mut sinm = vec![0.0; (band + 1) * nlon];
        for m in 0..=band {
            for (k, &lam) in grid.longitudes().iter().enumerate() {
                cosm[m * nlon + k] = (m as f64 * lam).cos();
                sinm[m * nlon + k] = (m as f64 * lam).sin();
            }
        }
        Self { nlon, cosm, sinm }
    }

    #[inline]
    pub fn cos(&self, m: usize) -> &[f64] {
        &self.cosm[m * self.nlon..(m + 1) * self.nlon]
    }
    #[inline]
    pub fn sin(&self, m: usize) -> &[f64] {
        &self.sinm[m * self.nlon..(m + 1) * self.nlon]
    }
}

// ---------------------------------------------------------------------------
// fields
// ---------------------------------------------------------------------------

/// Real scalar samples on a [`SphereGrid`], latitude-major.
#[derive(Debug, Clone)]
pub struct GridScalar {
    pub grid: Arc<SphereGrid>,
    pub values: Vec<f64>,
}

impl GridScalar {
    pub fn zeros(grid: Arc<SphereGrid>) -> Self {
        let n = grid.npts();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.npts() {
            return Err(Error::DimensionMismatch(format!(
                "scalar field has {} samples, grid has {} points",
                values.len(),
                grid.npts()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<SphereGrid>, c: f64) -> Self {
        let n = grid.npts();
        Self {
            grid,
            values: vec![c; n],
        }
    }

    /// Spatial mean ⟨f⟩ = ⟨f, 1⟩.
    pub fn mean(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.grid.nlat() {
            let mu = self.grid.point_measure(i);
            for k in 0..self.grid.nlon() {
                acc += mu * self.values[self.grid.index(i, k)];
            }
        }
        acc
    }

    /// Discrete ⟨f, g⟩.
    pub fn dot(&self, other: &GridScalar) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.grid.nlat() {
            let mu = self.grid.point_measure(i);
            for k in 0..self.grid.nlon() {
                let idx = self.grid.index(i, k);
                acc += mu * self.values[idx] * other.values[idx];
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn add_scaled(&mut self, other: &GridScalar, a: f64) {
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += a * o;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }
}

/// Dense real spherical-harmonic coefficients f̂_{n,j} for 0 ≤ n ≤ N, |j| ≤ n.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalar {
    pub band: usize,
    pub radius: f64,
    pub coeffs: Vec<f64>,
}

impl SpectralScalar {
    pub fn zeros(band: usize, radius: f64) -> Self {
        Self {
            band,
            radius,
            coeffs: vec![0.0; mode_count(band)],
        }
    }

    #[inline]
    pub fn get(&self, n: usize, j: i64) -> f64 {
        self.coeffs[mode_index(n, j)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, j: i64, v: f64) {
        self.coeffs[mode_index(n, j)] = v;
    }

    /// Σ |f̂|² (the Parseval sum).
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn add_scaled(&mut self, other: &SpectralScalar, a: f64) {
        for (v, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *v += a * o;
        }
    }
}

// ---------------------------------------------------------------------------
// transforms
// ---------------------------------------------------------------------------

/// Samples of the real spherical harmonic Y_{n,j} on the grid.
pub fn eval_y(grid: &Arc<SphereGrid>, n: usize, j: i64) -> Result<GridScalar> {
    if j.unsigned_abs() as usize > n {
        return Err(Error::InvalidIndex { n, j });
    }
    grid.require_band(n)?;
    let tab = ShTables::build(grid, n);
    let trig = TrigTables::build(grid, n);
    let m = j.unsigned_abs() as usize;
    let qv = tab.q(n, m);
    let tau = if j >= 0 { trig.cos(m) } else { trig.sin(m) };
    let amp = if j == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
    let mut out = GridScalar::zeros(grid.clone());
    for i in 0..grid.nlat() {
        for k in 0..grid.nlon() {
            out.values[grid.index(i, k)] = amp * qv[i] * tau[k];
        }
    }
    Ok(out)
}

/// Y_{n,j} at an arbitrary point (λ, φ), by the same recurrences as the
/// grid tables.
pub fn eval_y_point(n: usize, j: i64, lam: f64, phi: f64) -> f64 {
    let m = j.unsigned_abs() as usize;
    assert!(m <= n, "invalid index ({n},{j})");
    let (q, _) = q_dq_point(n, m, phi);
    let amp = if j == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
    let tau = if j >= 0 {
        (j as f64 * lam).cos()
    } else {
        (m as f64 * lam).sin()
    };
    amp * q * tau
}

/// Cartesian components of ∇*Y_{n,j} at an arbitrary point.
pub fn eval_grad_y_point(n: usize, j: i64, lam: f64, phi: f64) -> [f64; 3] {
    let m = j.unsigned_abs() as usize;
    assert!(m <= n, "invalid index ({n},{j})");
    let (q, dq) = q_dq_point(n, m, phi);
    let amp = if j == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
    let (tau, dtau) = if j > 0 {
        ((j as f64 * lam).cos(), -(j as f64) * (j as f64 * lam).sin())
    } else if j < 0 {
        ((m as f64 * lam).sin(), m as f64 * (m as f64 * lam).cos())
    } else {
        (1.0, 0.0)
    };
    let glam = amp * q * dtau / phi.cos();
    let gphi = amp * dq * tau;
    let (sl, cl) = lam.sin_cos();
    let (sp, cp) = phi.sin_cos();
    // ê_λ = (-sinλ, cosλ, 0), ê_φ = (-sinφ cosλ, -sinφ sinλ, cosφ)
    [
        glam * -sl + gphi * (-sp * cl),
        glam * cl + gphi * (-sp * sl),
        gphi * cp,
    ]
}

/// Q_{n,m}(sin φ) and dQ_{n,m}/dφ at one point.
fn q_dq_point(n: usize, m: usize, phi: f64) -> (f64, f64) {
    let t = phi.sin();
    let c = phi.cos();
    let mut qmm = 1.0;
    for mm in 1..=m {
        qmm *= ((2 * mm + 1) as f64 / (2 * mm) as f64).sqrt() * c;
    }
    let (q, qprev) = if n == m {
        (qmm, 0.0)
    } else {
        let mut qp = qmm;
        let mut q = (2.0 * m as f64 + 3.0).sqrt() * t * qmm;
        for nn in (m + 2)..=n {
            let nf = nn as f64;
            let mf = m as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b =
                ((((nf - 1.0) * (nf - 1.0)) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0))
                    .sqrt();
            let qn = a * (t * q - b * qp);
            qp = q;
            q = qn;
        }
        (q, qp)
    };
    let nf = n as f64;
    let mf = m as f64;
    let e = if n > m {
        ((2.0 * nf + 1.0) * (nf * nf - mf * mf) / (2.0 * nf - 1.0)).sqrt()
    } else {
        0.0
    };
    let dq = (e * qprev - nf * t * q) / c;
    (q, dq)
}

/// Forward scalar SFT: f̂_{n,j} = ⟨f, Y_{n,j}⟩ by exact quadrature.
pub fn sft_forward(field: &GridScalar, band: usize) -> Result<SpectralScalar> {
    let grid = &field.grid;
    grid.require_band(band)?;
    let nlat = grid.nlat();
    let nlon = grid.nlon();
    let tab = ShTables::build(grid, band);
    let trig = TrigTables::build(grid, band);

    // longitude analysis: C[i][m] = Σ_k f cos(mλ_k), S[i][m] = Σ_k f sin(mλ_k)
    let mut cc = vec![0.0; nlat * (band + 1)];
    let mut ss = vec![0.0; nlat * (band + 1)];
    for i in 0..nlat {
        for m in 0..=band {
            let (cm, sm) = (trig.cos(m), trig.sin(m));
            let mut ac = 0.0;
            let mut as_ = 0.0;
            for k in 0..nlon {
                let f = field.values[grid.index(i, k)];
                ac += f * cm[k];
                as_ += f * sm[k];
            }
            cc[i * (band + 1) + m] = ac;
            ss[i * (band + 1) + m] = as_;
        }
    }

    let mut out = SpectralScalar::zeros(band, grid.radius());
    for n in 0..=band {
        for j in -(n as i64)..=n as i64 {
            let m = j.unsigned_abs() as usize;
            let amp = if j == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
            let qv = tab.q(n, m);
            let mut acc = 0.0;
            for i in 0..nlat {
                let a = if j >= 0 {
                    cc[i * (band + 1) + m]
                } else {
                    ss[i * (band + 1) + m]
                };
                acc += grid.point_measure(i) * qv[i] * a;
            }
            out.set(n, j, amp * acc);
        }
    }
    Ok(out)
}

/// Inverse scalar SFT (synthesis): f = Σ f̂_{n,j} Y_{n,j}.
pub fn sft_inverse(coeffs: &SpectralScalar, grid: &Arc<SphereGrid>) -> Result<GridScalar> {
    grid.require_band(coeffs.band)?;
    if grid.radius() != coeffs.radius {
        return Err(Error::RadiusMismatch {
            a: grid.radius(),
            b: coeffs.radius,
        });
    }
    let band = coeffs.band;
    let nlat = grid.nlat();
    let nlon = grid.nlon();
    let tab = ShTables::build(grid, band);
    let trig = TrigTables::build(grid, band);

    // latitude profiles per order: gc[i][m], gs[i][m]
    let mut gc = vec![0.0; nlat * (band + 1)];
    let mut gs = vec![0.0; nlat * (band + 1)];
    for n in 0..=band {
        for j in -(n as i64)..=n as i64 {
            let m = j.unsigned_abs() as usize;
            let amp = if j == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
            let c = amp * coeffs.get(n, j);
            if c == 0.0 {
                continue;
            }
            let qv = tab.q(n, m);
            let dst = if j >= 0 { &mut gc } else { &mut gs };
            for i in 0..nlat {
                dst[i * (band + 1) + m] += c * qv[i];
            }
        }
    }

    let mut out = GridScalar::zeros(grid.clone());
    for i in 0..nlat {
        for k in 0..nlon {
            let mut acc = 0.0;
            for m in 0..=band {
                acc += gc[i * (band + 1) + m] * trig.cos(m)[k]
                    + gs[i * (band + 1) + m] * trig.sin(m)[k];
            }
            out.values[grid.index(i, k)] = acc;
        }
    }
    Ok(out)
}

/// Per-degree power: p_n = Σ_j |f̂_{n,j}|².
pub fn power_spectrum(coeffs: &SpectralScalar) -> Vec<f64> {
    let mut p = vec![0.0; coeffs.band + 1];
    for (n, j) in modes(coeffs.band) {
        let c = coeffs.get(n, j);
        p[n] += c * c;
    }
    p
}

/// Reproducible random coefficients, uniform in [-1, 1).
pub fn random_spectral_scalar<R: rand::Rng>(
    band: usize,
    radius: f64,
    rng: &mut R,
) -> SpectralScalar {
    let mut out = SpectralScalar::zeros(band, radius);
    for c in &mut out.coeffs {
        *c = rng.gen_range(-1.0..1.0);
    }
    out
}
