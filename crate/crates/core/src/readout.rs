//! Optical qubit readout: reflection-intensity contrast and interferometric
//! phase readout.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::NodeParams;
use crate::protocol::Port;
use crate::pulse::{node_grid, spectrum_of, PulseSpec, Spectrum, DEFAULT_GRID_POINTS};
use crate::spectral::reflection;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutReport {
    pub p_reflect_state0: f64,
    pub p_reflect_state1: f64,
    pub contrast: f64,
    /// `port_probs[k][p]`: state `k` leaves through port a (`p = 0`) or b.
    /// Only filled by phase readout.
    pub port_probs: Option<[[f64; 2]; 2]>,
    /// Equal-prior misassignment probability given a detection; state 0 is
    /// assigned to port a and state 1 to port b.
    pub error: Option<f64>,
    /// `1 - min_k P(correct port | detection, k)`.
    pub worst_case_error: Option<f64>,
}

fn pulse_spectrum(node: &NodeParams, pulse: &PulseSpec) -> Result<Spectrum> {
    let grid = node_grid(pulse, &[node], DEFAULT_GRID_POINTS)?;
    spectrum_of(pulse, &grid)
}

fn averaged(u: &Spectrum, f: impl Fn(f64) -> f64) -> f64 {
    u.grid.omegas().enumerate().map(|(i, w)| u.grid.weight(i) * f(w) * u.values[i].norm_sqr()).sum()
}

fn reflectivities(node: &NodeParams, u: &Spectrum) -> [f64; 2] {
    [0, 1].map(|k| averaged(u, |w| reflection(node, k, w).norm_sqr()))
}

/// Pulse-averaged reflection probability of each qubit state.
pub fn intensity_readout(node: &NodeParams, pulse: &PulseSpec) -> Result<ReadoutReport> {
    intensity_readout_on(node, &pulse_spectrum(node, pulse)?)
}

pub fn intensity_readout_on(node: &NodeParams, u: &Spectrum) -> Result<ReadoutReport> {
    if !node.is_three_level() {
        return Err(Error::PreconditionViolated("needs a three-level node (g1 = 0)".into()));
    }
    let [p0, p1] = reflectivities(node, u);
    Ok(ReadoutReport {
        p_reflect_state0: p0,
        p_reflect_state1: p1,
        contrast: (p0 - p1).abs(),
        port_probs: None,
        error: None,
        worst_case_error: None,
    })
}

/// Interferometric readout: the reflected photon recombines with a reference
/// arm, so state `k` exits with amplitudes `(r_k + 1)/2` at port a and
/// `(r_k - 1)/2` at port b.
pub fn phase_readout(node: &NodeParams, pulse: &PulseSpec) -> Result<ReadoutReport> {
    Ok(phase_readout_on(node, &pulse_spectrum(node, pulse)?))
}

pub fn phase_readout_on(node: &NodeParams, u: &Spectrum) -> ReadoutReport {
    let [p0, p1] = reflectivities(node, u);
    let port_probs = [0, 1]
        .map(|k| [1.0, -1.0].map(|s| averaged(u, |w| ((reflection(node, k, w) + C64::new(s, 0.0)) / 2.0).norm_sqr())));
    let (error, worst) = phase_errors(&port_probs);
    ReadoutReport {
        p_reflect_state0: p0,
        p_reflect_state1: p1,
        contrast: (p0 - p1).abs(),
        port_probs: Some(port_probs),
        error,
        worst_case_error: worst,
    }
}

/// Port that signals qubit state `k`.
pub fn assigned_port(k: usize) -> Port {
    if k == 0 {
        Port::A
    } else {
        Port::B
    }
}

fn phase_errors(p: &[[f64; 2]; 2]) -> (Option<f64>, Option<f64>) {
    let mut wrong = [0.0; 2];
    for k in 0..2 {
        let det = p[k][0] + p[k][1];
        if det <= 0.0 {
            return (None, None);
        }
        wrong[k] = p[k][1 - k] / det;
    }
    (Some(0.5 * (wrong[0] + wrong[1])), Some(wrong[0].max(wrong[1])))
}
