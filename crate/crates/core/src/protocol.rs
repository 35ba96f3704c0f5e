//! Two-node Mach-Zehnder protocol: Bell-channel amplitudes, per-port
//! detection probabilities and heralded fidelities.
//!
//! Port `a` heralds Φ⁻ and port `b` heralds Ψ⁻. Node-pair combinations are
//! `r_σ^± = (r_σ^A ± r_σ^B)/2` with σ ∈ {+, −} the per-node combination.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{NodeDeviation, NodeParams, ReferenceNode};
use crate::pulse::{trapezoid, ModeDecomposition, PulseSpec, Spectrum};
use crate::spectral::{default_step, second_derivative, transfer_pair};

const NO_SIGNAL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    A,
    B,
}

impl Port {
    pub const BOTH: [Port; 2] = [Port::A, Port::B];

    pub fn target(self) -> BellState {
        match self {
            Port::A => BellState::PhiMinus,
            Port::B => BellState::PsiMinus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Port::A => "a",
            Port::B => "b",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellState {
    PhiMinus,
    PsiMinus,
    /// Unnormalized sum Φ⁺ + Ψ⁺.
    PhiPlusPsiPlus,
}

impl BellState {
    pub fn label(self) -> &'static str {
        match self {
            BellState::PhiMinus => "Phi-",
            BellState::PsiMinus => "Psi-",
            BellState::PhiPlusPsiPlus => "Phi+ + Psi+",
        }
    }
}

/// Photonic amplitudes of the final state, up to a common factor 1/√2.
#[derive(Debug, Clone, PartialEq)]
pub struct BellChannelAmplitudes {
    /// `r_-^+ u`
    pub minus_sum: Spectrum,
    /// `r_-^- u`
    pub minus_diff: Spectrum,
    /// `r_+^+ u`
    pub plus_sum: Spectrum,
    /// `r_+^- u`
    pub plus_diff: Spectrum,
}

impl BellChannelAmplitudes {
    pub fn channel(&self, state: BellState, port: Port) -> &Spectrum {
        match (state, port) {
            (BellState::PhiPlusPsiPlus, Port::A) => &self.plus_sum,
            (BellState::PhiPlusPsiPlus, Port::B) => &self.plus_diff,
            (BellState::PhiMinus, Port::A) => &self.minus_sum,
            (BellState::PhiMinus, Port::B) => &self.minus_diff,
            (BellState::PsiMinus, Port::A) => &self.minus_diff,
            (BellState::PsiMinus, Port::B) => &self.minus_sum,
        }
    }

    /// `∫ R_p |u|^2 dω`, the detection probability at unit transmittivity
    /// before the factor 1/2.
    pub fn port_weight(&self, port: Port) -> f64 {
        let plus = match port {
            Port::A => &self.plus_sum,
            Port::B => &self.plus_diff,
        };
        self.minus_sum.norm_sqr() + self.minus_diff.norm_sqr() + 2.0 * plus.norm_sqr()
    }
}

pub fn bell_amplitudes(a: &NodeParams, b: &NodeParams, u: &Spectrum) -> BellChannelAmplitudes {
    let n = u.grid.n;
    let mut out = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for (w, uu) in u.grid.omegas().zip(&u.values) {
        let ta = transfer_pair(a, w);
        let tb = transfer_pair(b, w);
        out[0].push((ta.r_minus + tb.r_minus) / 2.0 * uu);
        out[1].push((ta.r_minus - tb.r_minus) / 2.0 * uu);
        out[2].push((ta.r_plus + tb.r_plus) / 2.0 * uu);
        out[3].push((ta.r_plus - tb.r_plus) / 2.0 * uu);
    }
    let [minus_sum, minus_diff, plus_sum, plus_diff] = out.map(|values| Spectrum { grid: u.grid, values });
    BellChannelAmplitudes { minus_sum, minus_diff, plus_sum, plus_diff }
}

pub fn detection_probability(amps: &BellChannelAmplitudes, port: Port, eta: f64) -> f64 {
    eta / 2.0 * amps.port_weight(port)
}

/// Overlap of the heralded two-qubit state with the target of `port`.
pub fn fidelity_exact(amps: &BellChannelAmplitudes, port: Port) -> Result<f64> {
    let weight = amps.port_weight(port);
    if weight / 2.0 < NO_SIGNAL {
        return Err(Error::NoSignal { probability: weight / 2.0 });
    }
    Ok(amps.minus_sum.norm_sqr() / weight)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolOutcome {
    pub p_a: f64,
    pub p_b: f64,
    pub f_a: Option<f64>,
    pub f_b: Option<f64>,
    /// Pulse-averaged node factors `∫ R_p |u|^2`.
    pub r_a: f64,
    pub r_b: f64,
    pub target_a: BellState,
    pub target_b: BellState,
}

impl ProtocolOutcome {
    pub fn probability(&self, port: Port) -> f64 {
        match port {
            Port::A => self.p_a,
            Port::B => self.p_b,
        }
    }

    pub fn fidelity(&self, port: Port) -> Option<f64> {
        match port {
            Port::A => self.f_a,
            Port::B => self.f_b,
        }
    }
}

pub fn evaluate_protocol(a: &NodeParams, b: &NodeParams, u: &Spectrum, eta: f64) -> ProtocolOutcome {
    let amps = bell_amplitudes(a, b, u);
    ProtocolOutcome {
        p_a: detection_probability(&amps, Port::A, eta),
        p_b: detection_probability(&amps, Port::B, eta),
        f_a: fidelity_exact(&amps, Port::A).ok(),
        f_b: fidelity_exact(&amps, Port::B).ok(),
        r_a: amps.port_weight(Port::A),
        r_b: amps.port_weight(Port::B),
        target_a: Port::A.target(),
        target_b: Port::B.target(),
    }
}

/// Second-order expansion of the fidelity in the linewidth of a Gaussian
/// pulse, using finite-difference curvatures at the pulse center.
pub fn fidelity_taylor(a: &NodeParams, b: &NodeParams, pulse: &PulseSpec, port: Port) -> Result<f64> {
    let PulseSpec::Gaussian { sigma, delta } = *pulse else {
        return Err(Error::PreconditionViolated("Taylor fidelity needs a Gaussian pulse".into()));
    };
    let signal = |w: f64| {
        let (ta, tb) = (transfer_pair(a, w), transfer_pair(b, w));
        ((ta.r_minus + tb.r_minus) / 2.0).norm_sqr()
    };
    let noise = |w: f64| {
        let (ta, tb) = (transfer_pair(a, w), transfer_pair(b, w));
        let plus = match port {
            Port::A => (ta.r_plus + tb.r_plus) / 2.0,
            Port::B => (ta.r_plus - tb.r_plus) / 2.0,
        };
        2.0 * plus.norm_sqr() + ((ta.r_minus - tb.r_minus) / 2.0).norm_sqr()
    };
    let h = default_step(delta);
    let (m, n) = (signal(delta), noise(delta));
    if m < NO_SIGNAL {
        return Err(Error::NoSignal { probability: m });
    }
    let m2 = second_derivative(signal, delta, h)?;
    let n2 = second_derivative(noise, delta, h)?;
    let s = sigma * sigma / 4.0;
    Ok(1.0 - n / m - s * n2 / m + s * m2 * n / (m * m))
}

/// Closed-form fidelity of two near-identical three-level nodes driven on
/// resonance, to second order in the deviations and in the pulse linewidth.
///
/// `eps_gamma` has no closed-form coefficient and is ignored here.
pub fn fidelity_nv_perturbative(reference: &ReferenceNode, dev: &NodeDeviation, sigma: f64, port: Port) -> Result<f64> {
    let ReferenceNode { cooperativity: c, kappa, kappa1, gamma } = *reference;
    if !(c > 0.0) {
        return Err(Error::PreconditionViolated("cooperativity must be positive".into()));
    }
    let c1 = c + 1.0;
    let dd = dev.delta_a - dev.delta_b;
    let coop = 3.0 * dev.eps_c * dev.eps_c / (4.0 * c * c * c1 * c1);
    let cross = dev.eps_c * (c + 4.0) / (2.0 * c * c * c1);
    let quad = (3.0 * c * c + 8.0 * c + 8.0) / (4.0 * c * c);
    match port {
        Port::A => {
            let ratio = (c + 1.0) / (c + 2.0);
            if (kappa1 / kappa - ratio).abs() > 1e-9 {
                return Err(Error::PreconditionViolated(format!(
                    "port a expansion needs kappa1/kappa = {ratio}, got {}",
                    kappa1 / kappa
                )));
            }
            let x = dev.eps_kappa / kappa - dev.eps_kappa1 * (c + 2.0) / (kappa * c1);
            let flat = 1.0 / gamma - (c * c + 2.0 * c + 2.0) / (c * kappa);
            Ok(1.0
                - 4.0 * sigma * sigma / (c1 * c1) * flat * flat
                - (3.0 * dd * dd + 8.0 * dev.delta_a * dev.delta_b) / (gamma * gamma * c1 * c1)
                - coop
                - cross * x
                - quad * x * x)
        }
        Port::B => {
            let x = dev.eps_kappa / kappa - dev.eps_kappa1 / kappa1;
            Ok(1.0 - 3.0 * dd * dd / (gamma * gamma * c1 * c1) - coop - cross * x - quad * x * x)
        }
    }
}

/// Fidelity of identical nodes behind an interferometer with arm phase
/// mismatch `phi`.
pub fn phase_error_fidelity(phi: f64, d: &ModeDecomposition) -> f64 {
    let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    let minus = d.alpha_v0_minus.norm_sqr();
    let plus = d.alpha_v0_plus.norm_sqr() + d.alpha_v1_plus.norm_sqr();
    c * c * minus / (minus + 2.0 * s * s * plus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Phase,
    Intensity,
    Generic,
}

pub const DEFAULT_ENCODING_TOL: f64 = 1e-3;

/// Classifies the node on the support of `u` (power above 1e-6 of the peak).
/// Intensity encoding is tested first, so a node whose uncoupled state is
/// fully absorbed reports `Intensity` even if `r_+` also happens to vanish.
pub fn classify_encoding(node: &NodeParams, u: &Spectrum, tol: f64) -> Encoding {
    let (mut max_plus, mut max_one) = (0.0f64, 0.0f64);
    for i in u.support(1e-6) {
        let t = transfer_pair(node, u.grid.omega(i));
        max_plus = max_plus.max(t.r_plus.norm_sqr());
        max_one = max_one.max(t.r1.norm_sqr());
    }
    if max_one < tol {
        Encoding::Intensity
    } else if max_plus < tol {
        Encoding::Phase
    } else {
        Encoding::Generic
    }
}

/// `∫ (|r_0|^2 + |r_1|^2)/2 |u|^2` averaged over both nodes: the total
/// reflected fraction, which bounds `P_a + P_b` at unit transmittivity.
pub fn reflected_fraction(a: &NodeParams, b: &NodeParams, u: &Spectrum) -> f64 {
    trapezoid(
        &u.grid,
        u.grid.omegas().zip(&u.values).map(|(w, uu)| {
            let (ta, tb) = (transfer_pair(a, w), transfer_pair(b, w));
            let r: f64 = [ta.r0, ta.r1, tb.r0, tb.r1].iter().map(C64::norm_sqr).sum();
            r / 4.0 * uu.norm_sqr()
        }),
    )
}
