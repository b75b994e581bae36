//! Zonal kernels: Legendre transform Ĝ(n) = 2πr² ∫ G(t) P_n(t) dt, its
//! inverse G(t) = Σ Ĝ(n) (2n+1)/(4πr²) P_n(t), built-in kernel families, and
//! the spectral shifts Ĝ(n±1), Ĝ(n±2) used by the generalized convolutions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sht::gauss_legendre;

/// Legendre spectrum of a zonal kernel on the sphere of radius r.
///
/// `below_range` holds the values assigned to Ĝ(-1) and Ĝ(-2); filter outputs
/// are independent of this choice, and the test suite checks that bitwise.
/// Entries above `nmax` read as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalKernelSpectrum {
    pub radius: f64,
    pub nmax: usize,
    pub ghat: Vec<f64>,
    pub below_range: [f64; 2],
}

impl ZonalKernelSpectrum {
    pub fn from_ghat(ghat: Vec<f64>, radius: f64) -> Result<Self> {
        if ghat.is_empty() {
            return Err(Error::ParamOutOfRange("empty kernel spectrum".into()));
        }
        if let Some(bad) = ghat.iter().find(|v| !v.is_finite()) {
            return Err(Error::ParamOutOfRange(format!(
                "non-finite kernel coefficient {bad}"
            )));
        }
        Ok(Self {
            radius,
            nmax: ghat.len() - 1,
            ghat,
            below_range: [0.0, 0.0],
        })
    }

    pub fn with_below_range(mut self, values: [f64; 2]) -> Self {
        self.below_range = values;
        self
    }

    /// Ĝ(n) for any integer n; below-range indices take the policy values,
    /// indices above the band limit take 0.
    #[inline]
    pub fn ghat(&self, n: i64) -> f64 {
        if n < 0 {
            match n {
                -1 => self.below_range[0],
                -2 => self.below_range[1],
                _ => 0.0,
            }
        } else if n as usize > self.nmax {
            0.0
        } else {
            self.ghat[n as usize]
        }
    }

    /// Normalized iff Ĝ(0) = 1 exactly (equivalently G*1 = 1).
    pub fn is_normalized(&self) -> bool {
        self.ghat[0] == 1.0
    }

    /// Spectrally shifted kernel: Ĝ'(n) = Ĝ(n + s).
    pub fn shifted(&self, s: i64) -> ZonalKernelSpectrum {
        let ghat = (0..=self.nmax)
            .map(|n| self.ghat(n as i64 + s))
            .collect();
        ZonalKernelSpectrum {
            radius: self.radius,
            nmax: self.nmax,
            ghat,
            below_range: self.below_range,
        }
    }
}

/// Legendre transform of a kernel given as a callable on t ∈ [-1, 1],
/// by Gauss–Legendre quadrature with `quad_points` nodes.
pub fn legendre_transform<F: Fn(f64) -> f64>(
    g: F,
    nmax: usize,
    radius: f64,
    quad_points: usize,
) -> Result<ZonalKernelSpectrum> {
    if quad_points < nmax + 1 {
        return Err(Error::ParamOutOfRange(format!(
            "quad_points {quad_points} < nmax+1 = {}",
            nmax + 1
        )));
    }
    let (nodes, weights) = gauss_legendre(quad_points);
    let mut ghat = vec![0.0; nmax + 1];
    for (&t, &w) in nodes.iter().zip(&weights) {
        let gv = g(t);
        if !gv.is_finite() {
            return Err(Error::NonFiniteKernel { t });
        }
        // accumulate w G(t) P_n(t) for all n by the P_n recurrence
        let mut p0 = 1.0;
        let mut p1 = t;
        ghat[0] += w * gv;
        if nmax >= 1 {
            ghat[1] += w * gv * t;
        }
        for n in 2..=nmax {
            let nf = n as f64;
            let p2 = ((2.0 * nf - 1.0) * t * p1 - (nf - 1.0) * p0) / nf;
            ghat[n] += w * gv * p2;
            p0 = p1;
            p1 = p2;
        }
    }
    let scale = 2.0 * PI * radius * radius;
    for v in &mut ghat {
        *v *= scale;
    }
    ZonalKernelSpectrum::from_ghat(ghat, radius)
}

/// Default quadrature point count for [`legendre_transform`].
pub fn default_quad_points(nmax: usize) -> usize {
    4 * (nmax + 1)
}

/// Truncated synthesis G(t) = Σ_{n ≤ nmax} Ĝ(n) (2n+1)/(4πr²) P_n(t).
pub fn inverse_legendre(spec: &ZonalKernelSpectrum, t: f64) -> f64 {
    let r2 = spec.radius * spec.radius;
    let mut acc = spec.ghat[0] / (4.0 * PI * r2);
    if spec.nmax == 0 {
        return acc;
    }
    let mut p0 = 1.0;
    let mut p1 = t;
    acc += spec.ghat[1] * 3.0 / (4.0 * PI * r2) * t;
    for n in 2..=spec.nmax {
        let nf = n as f64;
        let p2 = ((2.0 * nf - 1.0) * t * p1 - (nf - 1.0) * p0) / nf;
        acc += spec.ghat[n] * (2.0 * nf + 1.0) / (4.0 * PI * r2) * p2;
        p0 = p1;
        p1 = p2;
    }
    acc
}

/// Built-in kernel families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    /// Sharp spectral cutoff: Ĝ(n) = 1 for n ≤ nc, else 0.
    Truncation { nc: usize },
    /// Abel–Poisson: Ĝ(n) = hⁿ, 0 < h < 1.
    AbelPoisson { h: f64 },
    /// Ĝ(n) from quadrature of exp(-ε(1-t)), normalized to Ĝ(0) = 1.
    Gaussian { eps: f64 },
}

pub fn builtin_kernel(kind: KernelKind, nmax: usize, radius: f64) -> Result<ZonalKernelSpectrum> {
    match kind {
        KernelKind::Truncation { nc } => {
            if nc > nmax {
                return Err(Error::ParamOutOfRange(format!(
                    "truncation degree {nc} exceeds nmax {nmax}"
                )));
            }
            let ghat = (0..=nmax).map(|n| if n <= nc { 1.0 } else { 0.0 }).collect();
            ZonalKernelSpectrum::from_ghat(ghat, radius)
        }
        KernelKind::AbelPoisson { h } => {
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::ParamOutOfRange(format!("abel-poisson h={h}")));
            }
            let ghat = (0..=nmax).map(|n| h.powi(n as i32)).collect();
            ZonalKernelSpectrum::from_ghat(ghat, radius)
        }
        KernelKind::Gaussian { eps } => {
            if !(eps > 0.0) {
                return Err(Error::ParamOutOfRange(format!("gaussian eps={eps}")));
            }
            let r2 = radius * radius;
            let mut spec = legendre_transform(
                |t| (-eps * (1.0 - t)).exp() / (4.0 * PI * r2),
                nmax,
                radius,
                default_quad_points(nmax),
            )?;
            let g0 = spec.ghat[0];
            for v in &mut spec.ghat {
                *v /= g0;
            }
            spec.ghat[0] = 1.0;
            Ok(spec)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_kernel_is_normalized_delta() {
        let r = 1.7;
        let spec = legendre_transform(|_| 1.0 / (4.0 * PI * r * r), 8, r, 64).unwrap();
        assert!((spec.ghat[0] - 1.0).abs() < 1e-14);
        for n in 1..=8 {
            assert!(spec.ghat[n].abs() < 1e-14);
        }
        assert!(spec.is_normalized() || (spec.ghat[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linear_kernel_picks_degree_one() {
        let r = 1.0;
        let spec = legendre_transform(|t| 3.0 / (4.0 * PI) * t, 6, r, 64).unwrap();
        assert!((spec.ghat[1] - 1.0).abs() < 1e-13);
        for n in [0usize, 2, 3, 4, 5, 6] {
            assert!(spec.ghat[n].abs() < 1e-13);
        }
    }

    #[test]
    fn abel_poisson_closed_form_matches_quadrature() {
        // G(t) = (1/4πr²)(1-h²)/(1+h²-2ht)^{3/2} has Ĝ(n) = hⁿ
        let h = 0.9;
        let r = 1.3;
        let spec = legendre_transform(
            |t| (1.0 - h * h) / (4.0 * PI * r * r * (1.0 + h * h - 2.0 * h * t).powf(1.5)),
            20,
            r,
            256,
        )
        .unwrap();
        for n in 0..=20usize {
            assert!(
                (spec.ghat[n] - h.powi(n as i32)).abs() < 1e-10,
                "n={n}: {} vs {}",
                spec.ghat[n],
                h.powi(n as i32)
            );
        }
    }

    #[test]
    fn inverse_of_pure_degree_zero_is_constant() {
        let r = 2.0;
        let spec = ZonalKernelSpectrum::from_ghat(vec![1.0], r).unwrap();
        for t in [-1.0, -0.3, 0.5, 1.0] {
            assert!((inverse_legendre(&spec, t) - 1.0 / (4.0 * PI * r * r)).abs() < 1e-16);
        }
    }

    #[test]
    fn band_limited_round_trip() {
        let r = 1.0;
        let spec = builtin_kernel(KernelKind::Truncation { nc: 4 }, 9, r).unwrap();
        let back = legendre_transform(|t| inverse_legendre(&spec, t), 9, r, 64).unwrap();
        for n in 0..=9 {
            assert!(
                (back.ghat[n] - spec.ghat[n]).abs() < 1e-12,
                "n={n}: {} vs {}",
                back.ghat[n],
                spec.ghat[n]
            );
        }
    }

    #[test]
    fn abel_poisson_synthesis_converges_at_caustic() {
        // at t=1 the closed form is (1/4πr²)(1+h)/(1-h)²; the truncated
        // synthesis approaches it with tail ~ h^nmax
        let h = 0.5;
        let r = 1.0;
        let exact = (1.0 + h) / ((1.0 - h) * (1.0 - h)) / (4.0 * PI);
        let mut last = f64::INFINITY;
        for nmax in [10usize, 20, 40] {
            let spec = builtin_kernel(KernelKind::AbelPoisson { h }, nmax, r).unwrap();
            let err = (inverse_legendre(&spec, 1.0) - exact).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-11);
    }

    #[test]
    fn builtin_examples() {
        let tr = builtin_kernel(KernelKind::Truncation { nc: 2 }, 5, 1.0).unwrap();
        assert_eq!(tr.ghat, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        let ap = builtin_kernel(KernelKind::AbelPoisson { h: 0.8 }, 5, 1.0).unwrap();
        assert!((ap.ghat[3] - 0.512).abs() < 1e-15);
        let ga = builtin_kernel(KernelKind::Gaussian { eps: 10.0 }, 20, 1.0).unwrap();
        assert_eq!(ga.ghat[0], 1.0);
        for n in 1..=20 {
            assert!(
                ga.ghat[n] < ga.ghat[n - 1],
                "gaussian spectrum not decreasing at n={n}"
            );
            assert!(ga.ghat[n] > 0.0);
        }
    }

    #[test]
    fn shift_examples() {
        let tr = builtin_kernel(KernelKind::Truncation { nc: 2 }, 6, 1.0).unwrap();
        let s0 = tr.shifted(0);
        assert_eq!(s0.ghat, tr.ghat);
        let sp = tr.shifted(1);
        assert_eq!(sp.ghat, vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let sm = tr
            .clone()
            .with_below_range([7.5, 0.0])
            .shifted(-1);
        assert_eq!(sm.ghat, vec![7.5, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn out_of_range_parameters_rejected() {
        assert!(builtin_kernel(KernelKind::AbelPoisson { h: 1.0 }, 4, 1.0).is_err());
        assert!(builtin_kernel(KernelKind::Gaussian { eps: 0.0 }, 4, 1.0).is_err());
        assert!(builtin_kernel(KernelKind::Truncation { nc: 9 }, 4, 1.0).is_err());
    }

    #[test]
    fn non_finite_kernel_rejected() {
        let r = 1.0;
        let res = legendre_transform(|t| 1.0 / (t - t), 4, r, 16);
        assert!(matches!(res, Err(Error::NonFiniteKernel { .. })));
    }
}
