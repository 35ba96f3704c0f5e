//! Single-photon pulse spectra on uniform frequency grids, trapezoidal
//! quadrature, and the decomposition of the reflected photon into orthonormal
//! output modes.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::NodeParams;
use crate::spectral::{transfer_pair, TransferEval};

pub const MIN_GRID_POINTS: usize = 1 << 10;
pub const DEFAULT_GRID_POINTS: usize = 1 << 12;
/// Half-width of the Gaussian support, in units of the linewidth.
pub const GAUSSIAN_SUPPORT: f64 = 8.0;
/// Amplitudes below this are treated as an absent output mode.
pub const MODE_THRESHOLD: f64 = 1e-12;
const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n: usize,
}

impl FrequencyGrid {
    pub fn new(omega_min: f64, omega_max: f64, n: usize) -> Result<Self> {
        if n < MIN_GRID_POINTS {
            return Err(Error::GridTooCoarse { n, min: MIN_GRID_POINTS });
        }
        if !(omega_max > omega_min) || !omega_min.is_finite() || !omega_max.is_finite() {
            return Err(Error::GridMismatch(format!("empty frequency range [{omega_min}, {omega_max}]")));
        }
        Ok(Self { omega_min, omega_max, n })
    }

    pub fn step(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.n - 1) as f64
    }

    pub fn omega(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.omega_max
        } else {
            self.omega_min + i as f64 * self.step()
        }
    }

    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.omega(i))
    }

    pub fn weight(&self, i: usize) -> f64 {
        let h = self.step();
        if i == 0 || i + 1 == self.n {
            h / 2.0
        } else {
            h
        }
    }

    /// Same range with twice the resolution.
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n - 1, ..*self }
    }

    fn same_as(&self, other: &Self) -> bool {
        self.n == other.n
            && (self.omega_min - other.omega_min).abs() <= 1e-12 * (1.0 + self.omega_min.abs())
            && (self.omega_max - other.omega_max).abs() <= 1e-12 * (1.0 + self.omega_max.abs())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

pub fn trapezoid(grid: &FrequencyGrid, values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().enumerate().map(|(i, v)| grid.weight(i) * v).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: FrequencyGrid,
    pub values: Vec<C64>,
}

impl Spectrum {
    pub fn new(grid: FrequencyGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!("{} samples for a {}-point grid", values.len(), grid.n)));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: FrequencyGrid, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.omegas().map(f).collect();
        Self { grid, values }
    }

    pub fn norm_sqr(&self) -> f64 {
        trapezoid(&self.grid, self.values.iter().map(|v| v.norm_sqr()))
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self, other>`, antilinear in `self`.
    pub fn inner(&self, other: &Spectrum) -> Result<C64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| a.conj() * b * self.grid.weight(i))
            .sum())
    }

    pub fn scaled(&self, s: C64) -> Spectrum {
        Spectrum { grid: self.grid, values: self.values.iter().map(|v| v * s).collect() }
    }

    /// Pointwise product with transfer-function samples.
    pub fn filtered(&self, r: impl Iterator<Item = C64>) -> Spectrum {
        Spectrum { grid: self.grid, values: self.values.iter().zip(r).map(|(u, r)| u * r).collect() }
    }

    pub fn peak_power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max)
    }

    /// Indices where the power exceeds `fraction` of the peak.
    pub fn support(&self, fraction: f64) -> Vec<usize> {
        let cut = fraction * self.peak_power();
        (0..self.grid.n).filter(|&i| self.values[i].norm_sqr() > cut).collect()
    }

    fn check_normalized(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PulseSpec {
    Gaussian { sigma: f64, delta: f64 },
    Sampled(Spectrum),
}

impl PulseSpec {
    pub fn gaussian(sigma: f64, delta: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::NonPhysicalParameter { field: "sigma", value: sigma });
        }
        if !delta.is_finite() {
            return Err(Error::NonPhysicalParameter { field: "delta", value: delta });
        }
        Ok(Self::Gaussian { sigma, delta })
    }

    pub fn sampled(spectrum: Spectrum) -> Result<Self> {
        spectrum.check_normalized()?;
        Ok(Self::Sampled(spectrum))
    }

    pub fn center(&self) -> f64 {
        match self {
            Self::Gaussian { delta, .. } => *delta,
            Self::Sampled(s) => trapezoid(&s.grid, s.values.iter().zip(s.grid.omegas()).map(|(v, w)| w * v.norm_sqr())),
        }
    }

    pub fn gaussian_amplitude(sigma: f64, delta: f64, omega: f64) -> f64 {
        let x = (omega - delta) / sigma;
        (std::f64::consts::PI * sigma * sigma).powf(-0.25) * (-0.5 * x * x).exp()
    }
}

/// Grid covering the pulse and the transfer-function features of nodes with
/// cooperativity up to `cooperativity`.
///
/// The point count is raised above `n` when needed to keep at least four
/// samples per spectral linewidth.
pub fn default_grid(pulse: &PulseSpec, cooperativity: f64, n: usize) -> Result<FrequencyGrid> {
    match pulse {
        PulseSpec::Gaussian { sigma, delta } => {
            let half = GAUSSIAN_SUPPORT * sigma + 5.0 * (cooperativity.max(0.0) + 1.0);
            let needed = (2.0 * half / (sigma / 4.0)).ceil() as usize + 1;
            let mut points = n.max(MIN_GRID_POINTS);
            while points < needed {
                points *= 2;
            }
            FrequencyGrid::new(delta - half, delta + half, points)
        }
        PulseSpec::Sampled(s) => Ok(s.grid),
    }
}

pub fn node_grid(pulse: &PulseSpec, nodes: &[&NodeParams], n: usize) -> Result<FrequencyGrid> {
    let c = nodes.iter().flat_map(|node| [node.cooperativity(0), node.cooperativity(1)]).fold(0.0, f64::max);
    default_grid(pulse, c, n)
}

pub fn spectrum_of(pulse: &PulseSpec, grid: &FrequencyGrid) -> Result<Spectrum> {
    match pulse {
        PulseSpec::Gaussian { sigma, delta } => {
            let need_min = delta - GAUSSIAN_SUPPORT * sigma;
            let need_max = delta + GAUSSIAN_SUPPORT * sigma;
            if grid.omega_min > need_min || grid.omega_max < need_max {
                return Err(Error::GridTooNarrow {
                    omega_min: grid.omega_min,
                    omega_max: grid.omega_max,
                    need_min,
                    need_max,
                });
            }
            let s = Spectrum::from_fn(*grid, |w| C64::new(PulseSpec::gaussian_amplitude(*sigma, *delta, w), 0.0));
            s.check_normalized()?;
            Ok(s)
        }
        PulseSpec::Sampled(s) => {
            s.grid.check_same(grid)?;
            s.check_normalized()?;
            Ok(s.clone())
        }
    }
}

/// Trapezoidal `∫ weight |f|^2 dω`.
pub fn overlap_integral(f: &Spectrum, weight: &[f64]) -> Result<f64> {
    if weight.len() != f.grid.n {
        return Err(Error::GridMismatch(format!("{} weights for a {}-point grid", weight.len(), f.grid.n)));
    }
    Ok(trapezoid(&f.grid, f.values.iter().zip(weight).map(|(v, w)| w * v.norm_sqr())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub alpha_v0_minus: C64,
    pub alpha_v0_plus: C64,
    pub alpha_v1_plus: C64,
    pub v0: Spectrum,
    /// `None` when the second mode carries less than [`MODE_THRESHOLD`].
    pub v1: Option<Spectrum>,
}

impl ModeDecomposition {
    /// `alpha^0 v0 + alpha^1 v1` for the symmetric (`plus = true`) or
    /// antisymmetric combination.
    pub fn reconstruct(&self, plus: bool) -> Vec<C64> {
        let (a0, a1) =
            if plus { (self.alpha_v0_plus, self.alpha_v1_plus) } else { (self.alpha_v0_minus, C64::new(0.0, 0.0)) };
        let mut out: Vec<C64> = self.v0.values.iter().map(|v| a0 * v).collect();
        if let Some(v1) = &self.v1 {
            for (o, v) in out.iter_mut().zip(&v1.values) {
                *o += a1 * v;
            }
        }
        out
    }

    /// Output amplitudes `(alpha_v0^k, alpha_v1^k)` of qubit branch `k`.
    pub fn branch_amplitudes(&self, k: usize) -> (C64, C64) {
        let s = if k == 0 { 1.0 } else { -1.0 };
        (self.alpha_v0_plus + s * self.alpha_v0_minus, self.alpha_v1_plus)
    }
}

pub fn decompose_modes(u: &Spectrum, transfer: &[TransferEval]) -> Result<ModeDecomposition> {
    if transfer.len() != u.grid.n {
        return Err(Error::GridMismatch(format!("{} transfer samples for a {}-point grid", transfer.len(), u.grid.n)));
    }
    let ends = [(0, transfer[0].omega), (u.grid.n - 1, transfer[u.grid.n - 1].omega)];
    for (i, w) in ends {
        if (u.grid.omega(i) - w).abs() > 1e-9 * (1.0 + w.abs()) {
            return Err(Error::GridMismatch("transfer samples off the pulse grid".into()));
        }
    }

    let minus = u.filtered(transfer.iter().map(|t| t.r_minus));
    let plus = u.filtered(transfer.iter().map(|t| t.r_plus));

    let a_minus = minus.norm();
    if a_minus < MODE_THRESHOLD {
        return Err(Error::DegenerateAntisymmetric { norm: a_minus });
    }
    let v0 = minus.scaled(C64::new(1.0 / a_minus, 0.0));

    // Two Gram-Schmidt passes keep v1 orthogonal when the residual is small.
    let mut a0_plus = v0.inner(&plus)?;
    let mut residual = plus.clone();
    for (r, v) in residual.values.iter_mut().zip(&v0.values) {
        *r -= a0_plus * v;
    }
    let correction = v0.inner(&residual)?;
    a0_plus += correction;
    for (r, v) in residual.values.iter_mut().zip(&v0.values) {
        *r -= correction * v;
    }

    let a1_plus = residual.norm();
    let v1 = (a1_plus >= MODE_THRESHOLD).then(|| residual.scaled(C64::new(1.0 / a1_plus, 0.0)));
    Ok(ModeDecomposition {
        alpha_v0_minus: C64::new(a_minus, 0.0),
        alpha_v0_plus: a0_plus,
        alpha_v1_plus: if v1.is_some() { C64::new(a1_plus, 0.0) } else { C64::new(0.0, 0.0) },
        v0,
        v1,
    })
}

pub fn decompose_for_node(node: &NodeParams, u: &Spectrum) -> Result<ModeDecomposition> {
    let transfer: Vec<_> = u.grid.omegas().map(|w| transfer_pair(node, w)).collect();
    decompose_modes(u, &transfer)
}

/// Reads a spectrum from CSV with header `omega,re,im` on a uniform grid.
pub fn read_spectrum_csv<R: Read>(reader: R) -> Result<Spectrum> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Import(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["omega", "re", "im"] {
        return Err(Error::Import(format!("expected header omega,re,im, found {headers:?}")));
    }
    let mut omegas = Vec::new();
    let mut values = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Import(e.to_string()))?;
        let field = |j: usize| -> Result<f64> {
            record[j].parse().map_err(|_| Error::Import(format!("row {}: bad number {:?}", line + 2, &record[j])))
        };
        omegas.push(field(0)?);
        values.push(C64::new(field(1)?, field(2)?));
    }
    if omegas.len() < 2 {
        return Err(Error::GridTooCoarse { n: omegas.len(), min: MIN_GRID_POINTS });
    }
    let grid = FrequencyGrid::new(omegas[0], *omegas.last().unwrap(), omegas.len())?;
    for (i, w) in omegas.iter().enumerate() {
        if (grid.omega(i) - w).abs() > 1e-9 * grid.step() + 1e-12 * w.abs() {
            return Err(Error::GridMismatch(format!("row {}: non-uniform grid at omega = {w}", i + 2)));
        }
    }
    let spectrum = Spectrum::new(grid, values)?;
    spectrum.check_normalized()?;
    Ok(spectrum)
}

pub fn read_spectrum_csv_path(path: &Path) -> Result<Spectrum> {
    let file = std::fs::File::open(path).map_err(|e| Error::Import(format!("{}: {e}", path.display())))?;
    read_spectrum_csv(file)
}

pub fn write_spectrum_csv<W: Write>(spectrum: &Spectrum, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Import(e.to_string());
    wtr.write_record(["omega", "re", "im"]).map_err(io)?;
    for (w, v) in spectrum.grid.omegas().zip(&spectrum.values) {
        wtr.write_record([format!("{w:.16e}"), format!("{:.16e}", v.re), format!("{:.16e}", v.im)]).map_err(io)?;
    }
    wtr.flush().map_err(|e| Error::Import(e.to_string()))
}
