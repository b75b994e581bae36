//! User-facing filtering operators and the commutation verification engine.
//!
//! `verify_commutation` checks the fifteen operator relations on seeded
//! random fields, routing the two sides through independent implementations:
//! the left side filters with the componentwise oracles (grid pipelines,
//! double-quadrature scalar convolution), the right side with the
//! spectral-diagonal filters.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diffops::{
    beltrami, curl_star, div_star, div_star_tensor, grad_star, grad_tensor_grid, lstar,
    lstar_dot, lstar_dot_tensor, lstar_tensor_grid,
};
use crate::error::{Error, Result};
use crate::kernels::{inverse_legendre, ZonalKernelSpectrum};
use crate::sht::{
    modes, random_spectral_scalar, sft_inverse, GridScalar, SphereGrid, SpectralScalar,
};
use crate::tensor::{
    convolve_tensor, convolve_tensor_edmonds_oracle, random_spectral_tensor,
    GridTensor, SpectralTensor,
};
use crate::vector::{
    convolve_vector, convolve_vector_edmonds_oracle, random_spectral_vector, vsft_inverse,
    Frame, GridVector, SpectralVector,
};

/// Scalar filtering f̄ = G*f: multiply every coefficient at degree n by Ĝ(n).
pub fn filter_scalar(f: &SpectralScalar, kernel: &ZonalKernelSpectrum) -> Result<SpectralScalar> {
    if kernel.nmax < f.band {
        return Err(Error::BandMismatch {
            what: "filter_scalar",
            need: f.band,
            have: kernel.nmax,
        });
    }
    let mut out = f.clone();
    for (n, j) in modes(f.band) {
        let v = out.get(n, j) * kernel.ghat(n as i64);
        out.set(n, j, v);
    }
    Ok(out)
}

/// Vector filtering ū = G⃗*u (generalized convolution, spectral form).
pub fn filter_vector(u: &SpectralVector, kernel: &ZonalKernelSpectrum) -> Result<SpectralVector> {
    convolve_vector(u, kernel)
}

/// Tensor filtering T̄ = G↔*T (generalized convolution, spectral form).
pub fn filter_tensor(t: &SpectralTensor, kernel: &ZonalKernelSpectrum) -> Result<SpectralTensor> {
    convolve_tensor(t, kernel)
}

/// Scalar convolution by brute-force double quadrature: for each output
/// point x, (G*f)(x) = Σ_b dS_b G(x̂·r̂_b) f(r̂_b) over a padded inner grid.
/// The independent ground-truth oracle for the scalar spectral multiply.
pub fn convolve_scalar_quadrature(
    f: &SpectralScalar,
    outer: &Arc<SphereGrid>,
    inner: &Arc<SphereGrid>,
    kernel: &ZonalKernelSpectrum,
) -> Result<GridScalar> {
    let finner = sft_inverse(f, inner)?;
    let r2 = inner.radius() * inner.radius();
    let four_pi_r2 = 4.0 * std::f64::consts::PI * r2;
    // unit-sphere positions of the inner points, and their dS weights
    let npts_in = inner.npts();
    let mut pos = vec![[0.0f64; 3]; npts_in];
    let mut ds = vec![0.0f64; npts_in];
    for i in 0..inner.nlat() {
        let t = inner.nodes()[i];
        let c = inner.cos_lat()[i];
        for k in 0..inner.nlon() {
            let idx = inner.index(i, k);
            let (sl, cl) = inner.longitudes()[k].sin_cos();
            pos[idx] = [c * cl, c * sl, t];
            ds[idx] = four_pi_r2 * inner.point_measure(i);
        }
    }
    let mut out = GridScalar::zeros(outer.clone());
    for i in 0..outer.nlat() {
        let t = outer.nodes()[i];
        let c = outer.cos_lat()[i];
        for k in 0..outer.nlon() {
            let (sl, cl) = outer.longitudes()[k].sin_cos();
            let x = [c * cl, c * sl, t];
            let mut acc = 0.0;
            for b in 0..npts_in {
                let dot = x[0] * pos[b][0] + x[1] * pos[b][1] + x[2] * pos[b][2];
                acc += ds[b] * inverse_legendre(kernel, dot.clamp(-1.0, 1.0)) * finner.values[b];
            }
            out.values[outer.index(i, k)] = acc;
        }
    }
    Ok(out)
}

/// The fifteen relations of the commutation sweep, in report order.
pub const RELATION_NAMES: [&str; 15] = [
    "grad_scalar",
    "lstar_scalar",
    "radial_embed",
    "radial_project",
    "cross_radial",
    "div_vector",
    "lstar_dot_vector",
    "curl_vector",
    "beltrami_scalar",
    "radial_tensor_left",
    "radial_tensor_right",
    "grad_tensor",
    "lstar_tensor",
    "div_tensor",
    "lstar_dot_tensor",
];

#[derive(Debug, Clone)]
pub struct RelationResult {
    pub name: &'static str,
    pub left_norm: f64,
    pub right_norm: f64,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct CommutationReport {
    pub band: usize,
    pub radius: f64,
    pub kernel: String,
    pub seed: u64,
    pub tol: f64,
    pub relations: Vec<RelationResult>,
}

impl CommutationReport {
    pub fn all_pass(&self) -> bool {
        self.relations.iter().all(|r| r.pass)
    }

    /// Plain-text table, one row per relation.
    pub fn table(&self) -> String {
        let mut s = format!(
            "commutation sweep: band={} radius={} kernel={} seed={} tol={:.1e}\n",
            self.band, self.radius, self.kernel, self.seed, self.tol
        );
        s.push_str(&format!(
            "{:<20} {:>12} {:>12} {:>12}  {}\n",
            "relation", "left-norm", "right-norm", "residual", "pass"
        ));
        for r in &self.relations {
            s.push_str(&format!(
                "{:<20} {:>12.5e} {:>12.5e} {:>12.5e}  {}\n",
                r.name,
                r.left_norm,
                r.right_norm,
                r.residual,
                if r.pass { "yes" } else { "NO" }
            ));
        }
        s
    }

    /// Machine-readable key=value lines.
    pub fn key_values(&self) -> String {
        let mut s = format!(
            "band={}\nradius={}\nkernel={}\nseed={}\ntol={}\n",
            self.band, self.radius, self.kernel, self.seed, self.tol
        );
        for r in &self.relations {
            s.push_str(&format!("relation.{}.residual={}\n", r.name, r.residual));
            s.push_str(&format!("relation.{}.pass={}\n", r.name, r.pass));
        }
        s.push_str(&format!("all_pass={}\n", self.all_pass()));
        s
    }
}

/// Thread cap for the relation sweep; SPHERE_COARSE_THREADS overrides.
fn thread_count() -> usize {
    if let Ok(v) = std::env::var("SPHERE_COARSE_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(8)
}

struct SweepContext {
    band: usize,
    tol: f64,
    grid: Arc<SphereGrid>,
    inner: Arc<SphereGrid>,
    kernel: ZonalKernelSpectrum,
    f: SpectralScalar,
    u: SpectralVector,
    t: SpectralTensor,
    ug: GridVector,
    ff: SpectralScalar,
    fu: SpectralVector,
    ft: SpectralTensor,
}

impl SweepContext {
    fn oracle_scalar(&self, g: &SpectralScalar) -> Result<GridScalar> {
        convolve_scalar_quadrature(g, &self.grid, &self.inner, &self.kernel)
    }
    fn oracle_vector(&self, g: &GridVector) -> Result<GridVector> {
        convolve_vector_edmonds_oracle(g, self.band, &self.kernel)
    }
    fn oracle_tensor(&self, g: &GridTensor) -> Result<GridTensor> {
        convolve_tensor_edmonds_oracle(g, self.band, &self.kernel)
    }

    fn result_scalar(&self, idx: usize, l: &GridScalar, r: &GridScalar) -> RelationResult {
        let ln = l.norm();
        let rn = r.norm();
        let mut d = l.clone();
        d.add_scaled(r, -1.0);
        self.make(idx, ln, rn, d.norm())
    }
    fn result_vector(&self, idx: usize, l: &GridVector, r: &GridVector) -> RelationResult {
        let lc = l.to_frame(Frame::Cartesian);
        let rc = r.to_frame(Frame::Cartesian);
        let ln = lc.norm();
        let rn = rc.norm();
        let mut d = lc.clone();
        d.add_scaled(&rc, -1.0);
        self.make(idx, ln, rn, d.norm())
    }
    fn result_tensor(&self, idx: usize, l: &GridTensor, r: &GridTensor) -> RelationResult {
        let ln = l.norm();
        let rn = r.norm();
        let mut d = l.clone();
        d.add_scaled(r, -1.0);
        self.make(idx, ln, rn, d.norm())
    }
    fn make(&self, idx: usize, ln: f64, rn: f64, dn: f64) -> RelationResult {
        let residual = dn / ln.max(rn).max(1e-300);
        RelationResult {
            name: RELATION_NAMES[idx],
            left_norm: ln,
            right_norm: rn,
            residual,
            pass: residual < self.tol,
        }
    }

    fn dyad_er(&self, u: &GridVector, er_left: bool) -> GridTensor {
        let uc = u.to_frame(Frame::Cartesian);
        let grid = &self.grid;
        let mut out = GridTensor::zeros(grid.clone());
        for i in 0..grid.nlat() {
            let t = grid.nodes()[i];
            let c = grid.cos_lat()[i];
            for k in 0..grid.nlon() {
                let idx = grid.index(i, k);
                let (er, _, _) = crate::vector::local_frame(grid.longitudes()[k], t, c);
                for l in 0..3 {
                    for m in 0..3 {
                        out.comps[3 * l + m][idx] = if er_left {
                            er[l] * uc.comps[m][idx]
                        } else {
                            uc.comps[l][idx] * er[m]
                        };
                    }
                }
            }
        }
        out
    }

    fn run(&self, idx: usize) -> Result<RelationResult> {
        let grid = &self.grid;
        match idx {
            0 => {
                // ∇*f: oracle-filter the gradient field vs gradient of the filtered scalar
                let l = self.oracle_vector(&vsft_inverse(&grad_star(&self.f), grid)?)?;
                let r = vsft_inverse(&grad_star(&self.ff), grid)?;
                Ok(self.result_vector(idx, &l, &r))
            }
            1 => {
                let l = self.oracle_vector(&vsft_inverse(&lstar(&self.f), grid)?)?;
                let r = vsft_inverse(&lstar(&self.ff), grid)?;
                Ok(self.result_vector(idx, &l, &r))
            }
            2 => {
                // f ê_r
                let fg = sft_inverse(&self.f, grid)?;
                let mut embed = GridVector::zeros(grid.clone(), Frame::Spherical);
                embed.comps[0] = fg.values;
                let l = self.oracle_vector(&embed)?;
                let ffg = sft_inverse(&self.ff, grid)?;
                let mut r = GridVector::zeros(grid.clone(), Frame::Spherical);
                r.comps[0] = ffg.values;
                Ok(self.result_vector(idx, &l, &r))
            }
            3 => {
                // u·ê_r: scalar oracle on the radial part
                let mut ur = SpectralScalar::zeros(self.band, self.f.radius);
                ur.coeffs.copy_from_slice(&self.u.y);
                let l = self.oracle_scalar(&ur)?;
                let r = vsft_inverse(&self.fu, grid)?.radial();
                Ok(self.result_scalar(idx, &l, &r))
            }
            4 => {
                let l = self.oracle_vector(&self.ug.cross_er())?;
                let r = vsft_inverse(&self.fu, grid)?.cross_er();
                Ok(self.result_vector(idx, &l, &r))
            }
            5 => {
                let l = self.oracle_scalar(&div_star(&self.u))?;
                let r = sft_inverse(&div_star(&self.fu), grid)?;
                Ok(self.result_scalar(idx, &l, &r))
            }
            6 => {
                let l = self.oracle_scalar(&lstar_dot(&self.u))?;
                let r = sft_inverse(&lstar_dot(&self.fu), grid)?;
                Ok(self.result_scalar(idx, &l, &r))
            }
            7 => {
                // ∇*×u is purely radial
                let l = self.oracle_vector(&curl_star(&self.u, grid)?)?;
                let r = curl_star(&self.fu, grid)?;
                Ok(self.result_vector(idx, &l, &r))
            }
            8 => {
                let l = self.oracle_scalar(&beltrami(&self.f))?;
                let r = sft_inverse(&beltrami(&self.ff), grid)?;
                Ok(self.result_scalar(idx, &l, &r))
            }
            9 => {
                let l = self.oracle_tensor(&self.dyad_er(&self.ug, true))?;
                let fug = vsft_inverse(&self.fu, grid)?;
                let r = self.dyad_er(&fug, true);
                Ok(self.result_tensor(idx, &l, &r))
            }
            10 => {
                let l = self.oracle_tensor(&self.dyad_er(&self.ug, false))?;
                let fug = vsft_inverse(&self.fu, grid)?;
                let r = self.dyad_er(&fug, false);
                Ok(self.result_tensor(idx, &l, &r))
            }
            11 => {
                let l = self.oracle_tensor(&grad_tensor_grid(&self.ug, self.band + 1)?)?;
                let fug = vsft_inverse(&self.fu, grid)?;
                let r = grad_tensor_grid(&fug, self.band + 1)?;
                Ok(self.result_tensor(idx, &l, &r))
            }
            12 => {
                let l = self.oracle_tensor(&lstar_tensor_grid(&self.ug, self.band + 1)?)?;
                let fug = vsft_inverse(&self.fu, grid)?;
                let r = lstar_tensor_grid(&fug, self.band + 1)?;
                Ok(self.result_tensor(idx, &l, &r))
            }
            13 => {
                let l = self.oracle_vector(&vsft_inverse(&div_star_tensor(&self.t), grid)?)?;
                let r = vsft_inverse(&div_star_tensor(&self.ft), grid)?;
                Ok(self.result_vector(idx, &l, &r))
            }
            14 => {
                let l = self.oracle_vector(&vsft_inverse(&lstar_dot_tensor(&self.t), grid)?)?;
                let r = vsft_inverse(&lstar_dot_tensor(&self.ft), grid)?;
                Ok(self.result_vector(idx, &l, &r))
            }
            _ => unreachable!(),
        }
    }
}

/// Run the fifteen-relation commutation sweep on seeded random fields.
///
/// The kernel must cover band+2 (the tensor oracle's analysis margin).
pub fn verify_commutation(
    band: usize,
    radius: f64,
    kernel: &ZonalKernelSpectrum,
    kernel_desc: &str,
    seed: u64,
    tol: f64,
) -> Result<CommutationReport> {
    if kernel.nmax < band + 2 {
        return Err(Error::BandMismatch {
            what: "verify_commutation",
            need: band + 2,
            have: kernel.nmax,
        });
    }
    let grid = Arc::new(SphereGrid::for_band(band + 2, radius));
    let inner = Arc::new(SphereGrid::for_band(band + kernel.nmax, radius));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_spectral_scalar(band, radius, &mut rng);
    let u = random_spectral_vector(band, radius, &mut rng);
    let t = random_spectral_tensor(band, radius, &mut rng);
    let ug = vsft_inverse(&u, &grid)?;
    let ff = filter_scalar(&f, kernel)?;
    let fu = filter_vector(&u, kernel)?;
    let ft = filter_tensor(&t, kernel)?;
    let ctx = SweepContext {
        band,
        tol,
        grid,
        inner,
        kernel: kernel.clone(),
        f,
        u,
        t,
        ug,
        ff,
        fu,
        ft,
    };

    let nrel = RELATION_NAMES.len();
    let mut slots: Vec<Option<Result<RelationResult>>> = (0..nrel).map(|_| None).collect();
    let nthreads = thread_count().min(nrel);
    if nthreads <= 1 {
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Some(ctx.run(i));
        }
    } else {
        let chunk = nrel.div_ceil(nthreads);
        std::thread::scope(|scope| {
            for (c, slot_chunk) in slots.chunks_mut(chunk).enumerate() {
                let ctx = &ctx;
                scope.spawn(move || {
                    for (off, slot) in slot_chunk.iter_mut().enumerate() {
                        *slot = Some(ctx.run(c * chunk + off));
                    }
                });
            }
        });
    }
    let mut relations = Vec::with_capacity(nrel);
    for slot in slots {
        relations.push(slot.expect("relation computed")?);
    }
    Ok(CommutationReport {
        band,
        radius,
        kernel: kernel_desc.to_string(),
        seed,
        tol,
        relations,
    })
}
