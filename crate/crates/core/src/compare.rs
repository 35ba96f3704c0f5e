//! Success probabilities of emission-based entanglement schemes, next to the
//! reflection protocol evaluated on two identical nodes.

use crate::error::{Error, Result};
use crate::model::NodeParams;
use crate::protocol::evaluate_protocol;
use crate::pulse::{node_grid, spectrum_of, PulseSpec, DEFAULT_GRID_POINTS};

/// Regime thresholds for `γ ≪ κ` and `σ_u ≪ (C+1)γ`.
pub const REGIME_RATIO: f64 = 1e-2;
/// Allowed relative gap between the Barrett-Kok and single-port reflection rates.
pub const MATCH_TOL: f64 = 0.05;

/// Probability that an excited emitter decays through the cavity into the
/// setup, `κ₁/(κ+γ) · C/(C+1)`, on resonance.
pub fn emission_probability(cooperativity: f64, kappa: f64, kappa1: f64, gamma: f64) -> f64 {
    kappa1 / (kappa + gamma) * cooperativity / (cooperativity + 1.0)
}

pub fn barrett_kok_success(p_em: f64, eta: f64) -> f64 {
    eta * p_em * p_em / 2.0
}

/// `2√η sin²θ P_em`. Small `θ_prep` buys fidelity at the cost of rate; the
/// expression only holds for `θ_prep ≪ 1` and values above 1 are rejected.
pub fn single_click_success(p_em: f64, eta: f64, theta_prep: f64) -> Result<f64> {
    let s = theta_prep.sin();
    let p = 2.0 * eta.sqrt() * s * s * p_em;
    if p > 1.0 {
        return Err(Error::RegimeViolation(format!(
            "single-click probability {p} exceeds 1 at theta_prep = {theta_prep}"
        )));
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub p_em: f64,
    pub p_barrett_kok: f64,
    pub p_single_click: f64,
    /// Port-b probability of the reflection protocol.
    pub p_reflection_single_port: f64,
    /// Both ports combined.
    pub p_reflection_two_port: f64,
    pub narrow_emitter: bool,
    pub narrow_pulse: bool,
    /// `|P_BK - P_b| / P_b`.
    pub relative_gap: f64,
}

impl ComparisonReport {
    pub fn in_regime(&self) -> bool {
        self.narrow_emitter && self.narrow_pulse
    }

    /// Whether the Barrett-Kok rate equals the single-port reflection rate,
    /// checked only inside the regime where the two coincide.
    pub fn rates_match(&self) -> Option<bool> {
        self.in_regime().then_some(self.relative_gap < MATCH_TOL)
    }
}

/// Compares emission and reflection schemes for a three-level node on
/// resonance. `theta_prep` is the single-click preparation angle.
pub fn compare_protocols(node: &NodeParams, pulse: &PulseSpec, eta: f64, theta_prep: f64) -> Result<ComparisonReport> {
    if !node.is_three_level() {
        return Err(Error::PreconditionViolated("needs a three-level node (g1 = 0)".into()));
    }
    let c = node.cooperativity(0);
    let kappa = node.kappa();
    let gamma = node.transitions[0].gamma;
    let p_em = emission_probability(c, kappa, node.kappa1, gamma);

    let grid = node_grid(pulse, &[node], DEFAULT_GRID_POINTS)?;
    let u = spectrum_of(pulse, &grid)?;
    let outcome = evaluate_protocol(node, node, &u, eta);

    let p_bk = barrett_kok_success(p_em, eta);
    let sigma = match pulse {
        PulseSpec::Gaussian { sigma, .. } => *sigma,
        PulseSpec::Sampled(s) => rms_width(s),
    };
    let relative_gap = if outcome.p_b > 0.0 {
        (p_bk - outcome.p_b).abs() / outcome.p_b
    } else if p_bk == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ComparisonReport {
        p_em,
        p_barrett_kok: p_bk,
        p_single_click: single_click_success(p_em, eta, theta_prep)?,
        p_reflection_single_port: outcome.p_b,
        p_reflection_two_port: outcome.p_a + outcome.p_b,
        narrow_emitter: gamma / kappa <= REGIME_RATIO,
        narrow_pulse: sigma / ((c + 1.0) * gamma) <= REGIME_RATIO,
        relative_gap,
    })
}

fn rms_width(s: &crate::pulse::Spectrum) -> f64 {
    let w: Vec<f64> = s.values.iter().map(|v| v.norm_sqr()).collect();
    let norm = crate::pulse::trapezoid(&s.grid, w.iter().copied());
    let mean = crate::pulse::trapezoid(&s.grid, s.grid.omegas().zip(&w).map(|(o, p)| o * p)) / norm;
    let var = crate::pulse::trapezoid(&s.grid, s.grid.omegas().zip(&w).map(|(o, p)| (o - mean).powi(2) * p)) / norm;
    // |ũ|² of the Gaussian has variance σ²/2.
    (2.0 * var).sqrt()
}
