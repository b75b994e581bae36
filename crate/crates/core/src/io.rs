//! File formats and the command-line interface.
//!
//! Field files: 8-byte magic "SPHGRID1", one ASCII header line
//! `kind=<scalar|vector|tensor> nlat=<n> nlon=<n> radius=<r> frame=<frame|cartesian>`,
//! then the payload as little-endian f64, latitude-major, components
//! interleaved per point (1, 3, or 9 per point).
//!
//! Coefficient files: magic "SPHCOEF1", header
//! `kind=<...> band=<N> radius=<r>`, then per family the dense triangular
//! coefficient block in (n ascending, j ascending) order.
//!
//! Kernel files: text, first line "SPHKERN1", then `key value` lines
//! (`kind truncation|abelpoisson|gaussian|raw`, parameters, `nmax`,
//! `radius`, or `ghat v0 v1 ...` for raw spectra).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::filter::{filter_scalar, filter_tensor, filter_vector, verify_commutation};
use crate::helmholtz::{helmholtz_tensor, helmholtz_vector};
use crate::kernels::{builtin_kernel, KernelKind, ZonalKernelSpectrum};
use crate::sht::{
    mode_count, power_spectrum, sft_forward, sft_inverse, GridScalar, SphereGrid, SpectralScalar,
};
use crate::tensor::{tsft_forward, tsft_inverse, GridTensor, SpectralTensor, FAMILIES};
use crate::vector::{vsft_forward, vsft_inverse, Frame, GridVector, SpectralVector};

const FIELD_MAGIC: &[u8; 8] = b"SPHGRID1";
const COEFF_MAGIC: &[u8; 8] = b"SPHCOEF1";
const KERNEL_MAGIC: &str = "SPHKERN1";

/// A sampled field of any rank.
#[derive(Debug, Clone)]
pub enum FieldData {
    Scalar(GridScalar),
    Vector(GridVector),
    Tensor(GridTensor),
}

impl FieldData {
    pub fn kind(&self) -> &'static str {
        match self {
            FieldData::Scalar(_) => "scalar",
            FieldData::Vector(_) => "vector",
            FieldData::Tensor(_) => "tensor",
        }
    }
    pub fn grid(&self) -> &Arc<SphereGrid> {
        match self {
            FieldData::Scalar(f) => &f.grid,
            FieldData::Vector(f) => &f.grid,
            FieldData::Tensor(f) => &f.grid,
        }
    }
}

/// Coefficients of any rank.
#[derive(Debug, Clone)]
pub enum CoeffData {
    Scalar(SpectralScalar),
    Vector(SpectralVector),
    Tensor(SpectralTensor),
}

impl CoeffData {
    pub fn kind(&self) -> &'static str {
        match self {
            CoeffData::Scalar(_) => "scalar",
            CoeffData::Vector(_) => "vector",
            CoeffData::Tensor(_) => "tensor",
        }
    }
    pub fn band(&self) -> usize {
        match self {
            CoeffData::Scalar(c) => c.band,
            CoeffData::Vector(c) => c.band,
            CoeffData::Tensor(c) => c.band,
        }
    }
}

fn header_line(pairs: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (i, (k, v)) in pairs.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(k);
        s.push('=');
        s.push_str(v);
    }
    s.push('\n');
    s
}

fn parse_header(line: &str) -> Result<std::collections::HashMap<String, String>> {
    let mut map = std::collections::HashMap::new();
    for tok in line.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::MalformedHeader(format!("token {tok:?}")))?;
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::MalformedHeader(format!("duplicate key {k:?}")));
        }
    }
    Ok(map)
}

fn header_get<'a>(
    map: &'a std::collections::HashMap<String, String>,
    key: &str,
) -> Result<&'a str> {
    map.get(key)
        .map(|s| s.as_str())
        .ok_or_else(|| Error::MalformedHeader(format!("missing key {key:?}")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::MalformedHeader(format!("bad {what}: {s:?}")))
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("bad {what}: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::MalformedHeader(format!("non-finite {what}: {s:?}")));
    }
    Ok(v)
}

fn write_payload<W: Write>(w: &mut W, columns: &[&[f64]], npts: usize) -> Result<()> {
    for idx in 0..npts {
        for col in columns {
            w.write_all(&col[idx].to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_exact_payload<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let expected = count * 8;
    if bytes.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::DimensionMismatch(format!(
            "trailing bytes: payload has {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let mut out = Vec::with_capacity(count);
    for chunk in bytes.chunks_exact(8) {
        out.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    Ok(out)
}

fn read_magic_and_header<R: Read>(r: &mut R, magic: &[u8; 8]) -> Result<String> {
    let mut got = [0u8; 8];
    r.read_exact(&mut got).map_err(|_| Error::BadMagic {
        expected: String::from_utf8_lossy(magic).into_owned(),
        found: "<short file>".into(),
    })?;
    if &got != magic {
        return Err(Error::BadMagic {
            expected: String::from_utf8_lossy(magic).into_owned(),
            found: String::from_utf8_lossy(&got).into_owned(),
        });
    }
    let mut line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        r.read_exact(&mut byte)
            .map_err(|_| Error::MalformedHeader("unterminated header line".into()))?;
        if byte[0] == b'\n' {
            break;
        }
        line.push(byte[0]);
        if line.len() > 4096 {
            return Err(Error::MalformedHeader("header line too long".into()));
        }
    }
    String::from_utf8(line).map_err(|_| Error::MalformedHeader("non-UTF8 header".into()))
}

// rotation between Cartesian and local-frame tensor components at one point
fn tensor_to_frame(t: &[f64; 9], er: [f64; 3], el: [f64; 3], ep: [f64; 3]) -> [f64; 9] {
    let e = [er, el, ep];
    let mut out = [0.0; 9];
    for a in 0..3 {
        for b in 0..3 {
            let mut acc = 0.0;
            for l in 0..3 {
                for m in 0..3 {
                    acc += e[a][l] * t[3 * l + m] * e[b][m];
                }
            }
            out[3 * a + b] = acc;
        }
    }
    out
}

fn tensor_from_frame(t: &[f64; 9], er: [f64; 3], el: [f64; 3], ep: [f64; 3]) -> [f64; 9] {
    let e = [er, el, ep];
    let mut out = [0.0; 9];
    for l in 0..3 {
        for m in 0..3 {
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    acc += e[a][l] * t[3 * a + b] * e[b][m];
                }
            }
            out[3 * l + m] = acc;
        }
    }
    out
}

/// Write a field file; vectors are stored in their current frame, tensors in
/// the requested frame tag.
pub fn write_field<P: AsRef<Path>>(path: P, field: &FieldData) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(FIELD_MAGIC)?;
    let grid = field.grid();
    let frame = match field {
        FieldData::Scalar(_) | FieldData::Tensor(_) => "cartesian",
        FieldData::Vector(v) => match v.frame {
            Frame::Spherical => "frame",
            Frame::Cartesian => "cartesian",
        },
    };
    let header = header_line(&[
        ("kind", field.kind().to_string()),
        ("nlat", grid.nlat().to_string()),
        ("nlon", grid.nlon().to_string()),
        ("radius", format!("{}", grid.radius())),
        ("frame", frame.to_string()),
    ]);
    w.write_all(header.as_bytes())?;
    let npts = grid.npts();
    match field {
        FieldData::Scalar(f) => write_payload(&mut w, &[&f.values], npts)?,
        FieldData::Vector(f) => {
            write_payload(&mut w, &[&f.comps[0], &f.comps[1], &f.comps[2]], npts)?
        }
        FieldData::Tensor(f) => {
            let cols: Vec<&[f64]> = f.comps.iter().map(|c| c.as_slice()).collect();
            write_payload(&mut w, &cols, npts)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a field file.
pub fn read_field<P: AsRef<Path>>(path: P) -> Result<FieldData> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_magic_and_header(&mut r, FIELD_MAGIC)?;
    let map = parse_header(&header)?;
    let kind = header_get(&map, "kind")?.to_string();
    let nlat = parse_usize(header_get(&map, "nlat")?, "nlat")?;
    let nlon = parse_usize(header_get(&map, "nlon")?, "nlon")?;
    let radius = parse_f64(header_get(&map, "radius")?, "radius")?;
    let frame = header_get(&map, "frame")?.to_string();
    let grid = Arc::new(SphereGrid::new(nlat, nlon, radius)?);
    let npts = grid.npts();
    let ncomp = match kind.as_str() {
        "scalar" => 1,
        "vector" => 3,
        "tensor" => 9,
        other => {
            return Err(Error::MalformedHeader(format!("unknown kind {other:?}")));
        }
    };
    let flat = read_exact_payload(&mut r, npts * ncomp)?;
    match kind.as_str() {
        "scalar" => Ok(FieldData::Scalar(GridScalar::from_values(grid, flat)?)),
        "vector" => {
            let mut comps: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; npts]);
            for idx in 0..npts {
                for c in 0..3 {
                    comps[c][idx] = flat[idx * 3 + c];
                }
            }
            let fr = match frame.as_str() {
                "frame" => Frame::Spherical,
                "cartesian" => Frame::Cartesian,
                other => {
                    return Err(Error::MalformedHeader(format!("unknown frame {other:?}")));
                }
            };
            Ok(FieldData::Vector(GridVector::from_components(
                grid, fr, comps,
            )?))
        }
        _ => {
            let mut comps: [Vec<f64>; 9] = std::array::from_fn(|_| vec![0.0; npts]);
            for idx in 0..npts {
                for c in 0..9 {
                    comps[c][idx] = flat[idx * 9 + c];
                }
            }
            if frame == "frame" {
                // convert local-frame components to Cartesian storage
                for i in 0..grid.nlat() {
                    let t = grid.nodes()[i];
                    let cl = grid.cos_lat()[i];
                    for k in 0..grid.nlon() {
                        let idx = grid.index(i, k);
                        let (er, el, ep) =
                            crate::vector::local_frame(grid.longitudes()[k], t, cl);
                        let mut v = [0.0; 9];
                        for c in 0..9 {
                            v[c] = comps[c][idx];
                        }
                        let cart = tensor_from_frame(&v, er, el, ep);
                        for c in 0..9 {
                            comps[c][idx] = cart[c];
                        }
                    }
                }
            } else if frame != "cartesian" {
                return Err(Error::MalformedHeader(format!("unknown frame {frame:?}")));
            }
            Ok(FieldData::Tensor(GridTensor::from_components(grid, comps)?))
        }
    }
}

/// Write a tensor field with local-frame components (round-trips through
/// [`read_field`], which converts back to Cartesian storage).
pub fn write_tensor_frame_tagged<P: AsRef<Path>>(path: P, field: &GridTensor) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(FIELD_MAGIC)?;
    let grid = &field.grid;
    let header = header_line(&[
        ("kind", "tensor".to_string()),
        ("nlat", grid.nlat().to_string()),
        ("nlon", grid.nlon().to_string()),
        ("radius", format!("{}", grid.radius())),
        ("frame", "frame".to_string()),
    ]);
    w.write_all(header.as_bytes())?;
    for i in 0..grid.nlat() {
        let t = grid.nodes()[i];
        let cl = grid.cos_lat()[i];
        for k in 0..grid.nlon() {
            let idx = grid.index(i, k);
            let (er, el, ep) = crate::vector::local_frame(grid.longitudes()[k], t, cl);
            let mut v = [0.0; 9];
            for c in 0..9 {
                v[c] = field.comps[c][idx];
            }
            let fr = tensor_to_frame(&v, er, el, ep);
            for c in 0..9 {
                w.write_all(&fr[c].to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Write a coefficient file.
pub fn write_coeffs<P: AsRef<Path>>(path: P, coeffs: &CoeffData) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(COEFF_MAGIC)?;
    let (band, radius) = match coeffs {
        CoeffData::Scalar(c) => (c.band, c.radius),
        CoeffData::Vector(c) => (c.band, c.radius),
        CoeffData::Tensor(c) => (c.band, c.radius),
    };
    let header = header_line(&[
        ("kind", coeffs.kind().to_string()),
        ("band", band.to_string()),
        ("radius", format!("{radius}")),
    ]);
    w.write_all(header.as_bytes())?;
    let write_block = |w: &mut BufWriter<File>, block: &[f64]| -> Result<()> {
        for v in block {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    };
    match coeffs {
        CoeffData::Scalar(c) => write_block(&mut w, &c.coeffs)?,
        CoeffData::Vector(c) => {
            write_block(&mut w, &c.y)?;
            write_block(&mut w, &c.psi)?;
            write_block(&mut w, &c.phi)?;
        }
        CoeffData::Tensor(c) => {
            for f in &c.comps {
                write_block(&mut w, f)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a coefficient file.
pub fn read_coeffs<P: AsRef<Path>>(path: P) -> Result<CoeffData> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_magic_and_header(&mut r, COEFF_MAGIC)?;
    let map = parse_header(&header)?;
    let kind = header_get(&map, "kind")?.to_string();
    let band = parse_usize(header_get(&map, "band")?, "band")?;
    let radius = parse_f64(header_get(&map, "radius")?, "radius")?;
    let nmodes = mode_count(band);
    let nfam = match kind.as_str() {
        "scalar" => 1,
        "vector" => 3,
        "tensor" => 9,
        other => {
            return Err(Error::MalformedHeader(format!("unknown kind {other:?}")));
        }
    };
    let flat = read_exact_payload(&mut r, nmodes * nfam)?;
    match kind.as_str() {
        "scalar" => {
            let mut c = SpectralScalar::zeros(band, radius);
            c.coeffs.copy_from_slice(&flat);
            Ok(CoeffData::Scalar(c))
        }
        "vector" => {
            let mut c = SpectralVector::zeros(band, radius);
            c.y.copy_from_slice(&flat[..nmodes]);
            c.psi.copy_from_slice(&flat[nmodes..2 * nmodes]);
            c.phi.copy_from_slice(&flat[2 * nmodes..]);
            Ok(CoeffData::Vector(c))
        }
        _ => {
            let mut c = SpectralTensor::zeros(band, radius);
            for f in 0..9 {
                c.comps[f].copy_from_slice(&flat[f * nmodes..(f + 1) * nmodes]);
            }
            Ok(CoeffData::Tensor(c))
        }
    }
}

/// Read a kernel spec file.
pub fn read_kernel_file<P: AsRef<Path>>(path: P) -> Result<ZonalKernelSpectrum> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.trim() == KERNEL_MAGIC => {}
        other => {
            return Err(Error::BadMagic {
                expected: KERNEL_MAGIC.into(),
                found: other.unwrap_or("<empty>").into(),
            });
        }
    }
    let mut kind = None;
    let mut nmax = None;
    let mut radius = 1.0;
    let mut param: Option<f64> = None;
    let mut ghat: Option<Vec<f64>> = None;
    for line in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let key = it.next().unwrap();
        match key {
            "kind" => kind = it.next().map(|s| s.to_string()),
            "nmax" => nmax = Some(parse_usize(it.next().unwrap_or(""), "nmax")?),
            "radius" => radius = parse_f64(it.next().unwrap_or(""), "radius")?,
            "nc" | "h" | "eps" => param = Some(parse_f64(it.next().unwrap_or(""), key)?),
            "ghat" => {
                let vals: std::result::Result<Vec<f64>, _> =
                    it.map(|s| s.parse::<f64>()).collect();
                ghat = Some(vals.map_err(|_| {
                    Error::MalformedHeader("bad ghat values in kernel file".into())
                })?);
            }
            other => {
                return Err(Error::MalformedHeader(format!(
                    "unknown kernel file key {other:?}"
                )));
            }
        }
    }
    match kind.as_deref() {
        Some("raw") | None if ghat.is_some() => {
            ZonalKernelSpectrum::from_ghat(ghat.unwrap(), radius)
        }
        Some("truncation") => {
            let nc = param.ok_or_else(|| Error::MalformedHeader("missing nc".into()))? as usize;
            let nmax = nmax.ok_or_else(|| Error::MalformedHeader("missing nmax".into()))?;
            builtin_kernel(KernelKind::Truncation { nc }, nmax, radius)
        }
        Some("abelpoisson") => {
            let h = param.ok_or_else(|| Error::MalformedHeader("missing h".into()))?;
            let nmax = nmax.ok_or_else(|| Error::MalformedHeader("missing nmax".into()))?;
            builtin_kernel(KernelKind::AbelPoisson { h }, nmax, radius)
        }
        Some("gaussian") => {
            let eps = param.ok_or_else(|| Error::MalformedHeader("missing eps".into()))?;
            let nmax = nmax.ok_or_else(|| Error::MalformedHeader("missing nmax".into()))?;
            builtin_kernel(KernelKind::Gaussian { eps }, nmax, radius)
        }
        other => Err(Error::MalformedHeader(format!(
            "kernel file kind {other:?} unsupported"
        ))),
    }
}

/// Write a raw-spectrum kernel file.
pub fn write_kernel_file<P: AsRef<Path>>(path: P, kernel: &ZonalKernelSpectrum) -> Result<()> {
    let mut s = format!("{KERNEL_MAGIC}\nkind raw\nradius {}\nghat", kernel.radius);
    for v in &kernel.ghat {
        s.push_str(&format!(" {v}"));
    }
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Parse a CLI kernel spec: `truncation:Nc`, `abelpoisson:h`, `gaussian:eps`,
/// or `file:PATH`. Builtins are built with the given band limit.
pub fn parse_kernel_spec(spec: &str, nmax: usize, radius: f64) -> Result<ZonalKernelSpectrum> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| Error::ParamOutOfRange(format!("kernel spec {spec:?}")))?;
    match kind {
        "truncation" => {
            let nc = parse_usize(arg, "truncation degree")?;
            builtin_kernel(KernelKind::Truncation { nc: nc.min(nmax) }, nmax, radius)
        }
        "abelpoisson" => {
            let h = parse_f64(arg, "abel-poisson h")?;
            builtin_kernel(KernelKind::AbelPoisson { h }, nmax, radius)
        }
        "gaussian" => {
            let eps = parse_f64(arg, "gaussian eps")?;
            builtin_kernel(KernelKind::Gaussian { eps }, nmax, radius)
        }
        "file" => read_kernel_file(arg),
        other => Err(Error::ParamOutOfRange(format!(
            "unknown kernel kind {other:?}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// command-line interface
// ---------------------------------------------------------------------------

const USAGE: &str = "usage: sphere-coarse <command> [options]

commands:
  filter     --in FIELD --kernel SPEC --out FIELD
  spectrum   --in FIELD
  decompose  --in FIELD --out-prefix PREFIX
  synth      --coeffs COEFFS --grid N --out FIELD
  verify     --band N --kernel SPEC [--seed S] [--tol T] [--radius R] [--kv]
  check-file --in FILE [--dump-text]

kernel SPEC: truncation:Nc | abelpoisson:h | gaussian:eps | file:PATH";

struct Args {
    values: std::collections::HashMap<String, String>,
    flags: std::collections::HashSet<String>,
}

fn parse_args(args: &[String], flags_allowed: &[&str]) -> std::result::Result<Args, String> {
    let mut values = std::collections::HashMap::new();
    let mut flags = std::collections::HashSet::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if !a.starts_with("--") {
            return Err(format!("unexpected argument {a:?}"));
        }
        let key = a.trim_start_matches("--").to_string();
        if flags_allowed.contains(&key.as_str()) {
            flags.insert(key);
        } else {
            let v = it.next().ok_or_else(|| format!("missing value for {a}"))?;
            if values.insert(key, v.clone()).is_some() {
                return Err(format!("duplicate option {a}"));
            }
        }
    }
    Ok(Args { values, flags })
}

impl Args {
    fn req(&self, key: &str) -> std::result::Result<&str, String> {
        self.values
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| format!("missing required option --{key}"))
    }
    fn opt(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }
}

fn cmd_filter(a: &Args) -> Result<()> {
    let field = read_field(a.req("in").map_err(usage_err)?)?;
    let grid = field.grid().clone();
    let out_path = a.req("out").map_err(usage_err)?.to_string();
    let spec = a.req("kernel").map_err(usage_err)?;
    match field {
        FieldData::Scalar(f) => {
            let band = grid.max_band();
            let kernel = parse_kernel_spec(spec, band, grid.radius())?;
            let c = sft_forward(&f, band)?;
            let fc = filter_scalar(&c, &kernel)?;
            let out = sft_inverse(&fc, &grid)?;
            write_field(out_path, &FieldData::Scalar(out))
        }
        FieldData::Vector(f) => {
            let band = grid.max_band();
            let kernel = parse_kernel_spec(spec, band, grid.radius())?;
            let frame = f.frame;
            let c = vsft_forward(&f, band)?;
            let fc = filter_vector(&c, &kernel)?;
            let out = vsft_inverse(&fc, &grid)?.to_frame(frame);
            write_field(out_path, &FieldData::Vector(out))
        }
        FieldData::Tensor(f) => {
            let band = grid.max_band().checked_sub(2).ok_or_else(|| {
                Error::GridTooCoarse {
                    band: 0,
                    nlat: grid.nlat(),
                    nlon: grid.nlon(),
                    need_nlat: 3,
                    need_nlon: 5,
                }
            })?;
            let kernel = parse_kernel_spec(spec, band, grid.radius())?;
            let c = tsft_forward(&f, band)?;
            let fc = filter_tensor(&c, &kernel)?;
            let out = tsft_inverse(&fc, &grid)?;
            write_field(out_path, &FieldData::Tensor(out))
        }
    }
}

fn cmd_spectrum(a: &Args) -> Result<String> {
    let field = read_field(a.req("in").map_err(usage_err)?)?;
    let grid = field.grid().clone();
    let power: Vec<f64> = match &field {
        FieldData::Scalar(f) => {
            let c = sft_forward(f, grid.max_band())?;
            power_spectrum(&c)
        }
        FieldData::Vector(f) => {
            let c = vsft_forward(f, grid.max_band())?;
            let mut p = vec![0.0; c.band + 1];
            for (n, j) in crate::sht::modes(c.band) {
                let idx = crate::sht::mode_index(n, j);
                p[n] += c.y[idx] * c.y[idx] + c.psi[idx] * c.psi[idx] + c.phi[idx] * c.phi[idx];
            }
            p
        }
        FieldData::Tensor(f) => {
            let band = grid.max_band().saturating_sub(2);
            let c = tsft_forward(f, band)?;
            let mut p = vec![0.0; band + 1];
            for (n, j) in crate::sht::modes(band) {
                let idx = crate::sht::mode_index(n, j);
                for fam in 0..9 {
                    p[n] += c.comps[fam][idx] * c.comps[fam][idx];
                }
            }
            p
        }
    };
    let mut out = format!("# {} field, per-degree power\n", field.kind());
    out.push_str("degree power\n");
    for (n, v) in power.iter().enumerate() {
        out.push_str(&format!("{n} {v:.17e}\n"));
    }
    Ok(out)
}

fn cmd_decompose(a: &Args) -> Result<()> {
    let field = read_field(a.req("in").map_err(usage_err)?)?;
    let prefix = a.req("out-prefix").map_err(usage_err)?.to_string();
    let grid = field.grid().clone();
    match field {
        FieldData::Vector(f) => {
            let c = vsft_forward(&f, grid.max_band())?;
            let p = helmholtz_vector(&c);
            write_coeffs(format!("{prefix}_ur.sphcoef"), &CoeffData::Scalar(p.u_r))?;
            write_coeffs(format!("{prefix}_f.sphcoef"), &CoeffData::Scalar(p.f))?;
            write_coeffs(format!("{prefix}_eta.sphcoef"), &CoeffData::Scalar(p.eta))?;
            Ok(())
        }
        FieldData::Tensor(f) => {
            let band = grid.max_band().saturating_sub(2);
            let c = tsft_forward(&f, band)?;
            let p = helmholtz_tensor(&c);
            for (fi, (i, k)) in FAMILIES.iter().enumerate() {
                write_coeffs(
                    format!("{prefix}_F{i}{k}.sphcoef"),
                    &CoeffData::Scalar(p.f[fi].clone()),
                )?;
            }
            Ok(())
        }
        FieldData::Scalar(_) => Err(Error::ParamOutOfRange(
            "decompose expects a vector or tensor field".into(),
        )),
    }
}

fn cmd_synth(a: &Args) -> Result<()> {
    let coeffs = read_coeffs(a.req("coeffs").map_err(usage_err)?)?;
    let n = parse_usize(a.req("grid").map_err(usage_err)?, "grid band")?;
    let out = a.req("out").map_err(usage_err)?.to_string();
    let radius = match &coeffs {
        CoeffData::Scalar(c) => c.radius,
        CoeffData::Vector(c) => c.radius,
        CoeffData::Tensor(c) => c.radius,
    };
    let grid = Arc::new(SphereGrid::for_band(n, radius));
    match coeffs {
        CoeffData::Scalar(c) => {
            let f = sft_inverse(&c, &grid)?;
            write_field(out, &FieldData::Scalar(f))
        }
        CoeffData::Vector(c) => {
            let f = vsft_inverse(&c, &grid)?.to_frame(Frame::Cartesian);
            write_field(out, &FieldData::Vector(f))
        }
        CoeffData::Tensor(c) => {
            let f = tsft_inverse(&c, &grid)?;
            write_field(out, &FieldData::Tensor(f))
        }
    }
}

fn cmd_verify(a: &Args) -> Result<(String, bool)> {
    let band = parse_usize(a.req("band").map_err(usage_err)?, "band")?;
    let seed = match a.opt("seed") {
        Some(s) => s
            .parse::<u64>()
            .map_err(|_| Error::ParamOutOfRange(format!("bad seed {s:?}")))?,
        None => 0,
    };
    let tol = match a.opt("tol") {
        Some(s) => parse_f64(s, "tol")?,
        None => 1e-9,
    };
    let radius = match a.opt("radius") {
        Some(s) => parse_f64(s, "radius")?,
        None => 1.0,
    };
    let spec = a.req("kernel").map_err(usage_err)?;
    let kernel = parse_kernel_spec(spec, band + 2, radius)?;
    let report = verify_commutation(band, radius, &kernel, spec, seed, tol)?;
    let text = if a.flags.contains("kv") {
        report.key_values()
    } else {
        report.table()
    };
    Ok((text, report.all_pass()))
}

fn cmd_check_file(a: &Args) -> Result<String> {
    let path = a.req("in").map_err(usage_err)?;
    // try field, then coefficients, then kernel
    match read_field(path) {
        Ok(f) => {
            let g = f.grid();
            let mut s = format!(
                "field file: kind={} nlat={} nlon={} radius={}\n",
                f.kind(),
                g.nlat(),
                g.nlon(),
                g.radius()
            );
            if a.flags.contains("dump-text") {
                match &f {
                    FieldData::Scalar(v) => {
                        s.push_str("ilat ilon value\n");
                        for i in 0..g.nlat() {
                            for k in 0..g.nlon() {
                                s.push_str(&format!("{i} {k} {:.17e}\n", v.values[g.index(i, k)]));
                            }
                        }
                    }
                    FieldData::Vector(v) => {
                        s.push_str("ilat ilon c0 c1 c2\n");
                        for i in 0..g.nlat() {
                            for k in 0..g.nlon() {
                                let idx = g.index(i, k);
                                s.push_str(&format!(
                                    "{i} {k} {:.17e} {:.17e} {:.17e}\n",
                                    v.comps[0][idx], v.comps[1][idx], v.comps[2][idx]
                                ));
                            }
                        }
                    }
                    FieldData::Tensor(v) => {
                        s.push_str("ilat ilon T00..T22\n");
                        for i in 0..g.nlat() {
                            for k in 0..g.nlon() {
                                let idx = g.index(i, k);
                                s.push_str(&format!("{i} {k}"));
                                for c in 0..9 {
                                    s.push_str(&format!(" {:.17e}", v.comps[c][idx]));
                                }
                                s.push('\n');
                            }
                        }
                    }
                }
            }
            return Ok(s);
        }
        Err(Error::BadMagic { .. }) => {}
        Err(e) => return Err(e),
    }
    match read_coeffs(path) {
        Ok(c) => {
            return Ok(format!(
                "coefficient file: kind={} band={}\n",
                c.kind(),
                c.band()
            ));
        }
        Err(Error::BadMagic { .. }) => {}
        Err(e) => return Err(e),
    }
    let k = read_kernel_file(path)?;
    Ok(format!(
        "kernel file: nmax={} radius={} normalized={}\n",
        k.nmax,
        k.radius,
        k.is_normalized()
    ))
}

fn usage_err(msg: String) -> Error {
    Error::ParamOutOfRange(format!("usage: {msg}"))
}

/// Run the CLI on the given arguments (without the program name).
/// Exit codes: 0 success, 1 verification/I-O failure, 2 usage error.
pub fn cli(args: &[String]) -> i32 {
    let Some(cmd) = args.first() else {
        eprintln!("{USAGE}");
        return 2;
    };
    let rest = &args[1..];
    let parsed = match cmd.as_str() {
        "filter" | "spectrum" | "decompose" | "synth" => parse_args(rest, &[]),
        "verify" => parse_args(rest, &["kv"]),
        "check-file" => parse_args(rest, &["dump-text"]),
        other => {
            eprintln!("unknown command {other:?}\n{USAGE}");
            return 2;
        }
    };
    let a = match parsed {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}\n{USAGE}");
            return 2;
        }
    };
    let outcome: Result<i32> = (|| match cmd.as_str() {
        "filter" => cmd_filter(&a).map(|_| 0),
        "spectrum" => {
            let text = cmd_spectrum(&a)?;
            print!("{text}");
            Ok(0)
        }
        "decompose" => cmd_decompose(&a).map(|_| 0),
        "synth" => cmd_synth(&a).map(|_| 0),
        "verify" => {
            let (text, pass) = cmd_verify(&a)?;
            print!("{text}");
            Ok(if pass { 0 } else { 1 })
        }
        "check-file" => {
            let text = cmd_check_file(&a)?;
            print!("{text}");
            Ok(0)
        }
        _ => unreachable!(),
    })();
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let usage = matches!(&e, Error::ParamOutOfRange(msg) if msg.starts_with("usage:"));
            eprintln!("error: {e}");
            if usage {
                eprintln!("{USAGE}");
                2
            } else {
                1
            }
        }
    }
}
