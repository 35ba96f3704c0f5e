//! Physical parameters of a spin-cavity node.
//!
//! All rates and frequencies are dimensionless, measured in units of the decay
//! rate of transition 0 of the reference node; times are in the inverse unit.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionParams {
    pub g: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl TransitionParams {
    pub fn new(g: f64, gamma: f64, delta: f64) -> Self {
        Self { g, gamma, delta }
    }

    /// A transition that does not couple to the cavity.
    pub fn uncoupled() -> Self {
        Self { g: 0.0, gamma: 1.0, delta: 0.0 }
    }
}

/// One-sided cavity with front mirror `kappa1`, loss channel `kappa2` and two
/// qubit-state-dependent transitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub transitions: [TransitionParams; 2],
}

impl NodeParams {
    pub fn new(kappa1: f64, kappa2: f64, transitions: [TransitionParams; 2]) -> Result<Self> {
        validate_node(Self { kappa1, kappa2, transitions })
    }

    /// Three-level node: transition 1 is decoupled from the cavity.
    pub fn three_level(cooperativity: f64, kappa: f64, kappa1: f64, gamma: f64, delta: f64) -> Result<Self> {
        check_cavity(kappa, kappa1)?;
        check_positive("gamma", gamma)?;
        check_non_negative("cooperativity", cooperativity)?;
        let g = coupling_from_cooperativity(cooperativity, kappa, gamma);
        Self::new(
            kappa1,
            kappa - kappa1,
            [TransitionParams::new(g, gamma, delta), TransitionParams::new(0.0, gamma, delta)],
        )
    }

    pub fn kappa(&self) -> f64 {
        self.kappa1 + self.kappa2
    }

    pub fn coupling_ratio(&self) -> f64 {
        self.kappa1 / self.kappa()
    }

    pub fn cooperativity(&self, k: usize) -> f64 {
        let t = &self.transitions[k];
        4.0 * t.g * t.g / (self.kappa() * t.gamma)
    }

    pub fn is_three_level(&self) -> bool {
        self.transitions[1].g == 0.0
    }

    /// Copy with every transition detuning shifted by `shift`.
    pub fn detuned(&self, shift: f64) -> Self {
        let mut out = *self;
        for t in &mut out.transitions {
            t.delta += shift;
        }
        out
    }
}

pub fn coupling_from_cooperativity(cooperativity: f64, kappa: f64, gamma: f64) -> f64 {
    (cooperativity * kappa * gamma / 4.0).sqrt()
}

fn check_positive(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPhysicalParameter { field, value })
    }
}

fn check_non_negative(field: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPhysicalParameter { field, value })
    }
}

fn check_cavity(kappa: f64, kappa1: f64) -> Result<()> {
    check_positive("kappa1", kappa1)?;
    check_positive("kappa", kappa)?;
    if kappa1 > kappa * (1.0 + 1e-15) {
        return Err(Error::NonPhysicalParameter { field: "kappa1", value: kappa1 });
    }
    Ok(())
}

pub fn validate_node(params: NodeParams) -> Result<NodeParams> {
    check_positive("kappa1", params.kappa1)?;
    // Rounding in kappa - kappa1 may leave a tiny negative loss rate.
    if params.kappa2 < 0.0 && params.kappa2 > -1e-12 * params.kappa1 {
        let mut fixed = params;
        fixed.kappa2 = 0.0;
        return validate_node(fixed);
    }
    check_non_negative("kappa2", params.kappa2)?;
    const G: [&str; 2] = ["transitions[0].g", "transitions[1].g"];
    const GAMMA: [&str; 2] = ["transitions[0].gamma", "transitions[1].gamma"];
    const DELTA: [&str; 2] = ["transitions[0].delta", "transitions[1].delta"];
    for (k, t) in params.transitions.iter().enumerate() {
        check_non_negative(G[k], t.g)?;
        check_positive(GAMMA[k], t.gamma)?;
        if !t.delta.is_finite() {
            return Err(Error::NonPhysicalParameter { field: DELTA[k], value: t.delta });
        }
    }
    Ok(params)
}

/// Four-level node whose two transitions share `g` and `gamma` and are split
/// by `zeta` around the common detuning `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourLevelConfig {
    pub kappa1: f64,
    pub kappa2: f64,
    pub g: f64,
    pub gamma: f64,
    pub zeta: f64,
    pub delta: f64,
}

impl FourLevelConfig {
    pub fn from_cooperativity(
        cooperativity: f64,
        kappa: f64,
        kappa1: f64,
        gamma: f64,
        zeta: f64,
        delta: f64,
    ) -> Result<Self> {
        check_cavity(kappa, kappa1)?;
        check_positive("gamma", gamma)?;
        check_non_negative("cooperativity", cooperativity)?;
        Ok(Self {
            kappa1,
            kappa2: kappa - kappa1,
            g: coupling_from_cooperativity(cooperativity, kappa, gamma),
            gamma,
            zeta,
            delta,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa1 + self.kappa2
    }

    pub fn cooperativity(&self) -> f64 {
        4.0 * self.g * self.g / (self.kappa() * self.gamma)
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..*self }
    }

    /// Same node with a new front-mirror rate at fixed total `kappa`.
    pub fn with_coupling_ratio(&self, ratio: f64) -> Self {
        let kappa = self.kappa();
        Self { kappa1: ratio * kappa, kappa2: (1.0 - ratio) * kappa, ..*self }
    }
}

pub fn expand_four_level(cfg: &FourLevelConfig) -> Result<NodeParams> {
    check_non_negative("zeta", cfg.zeta)?;
    let t = |delta| TransitionParams::new(cfg.g, cfg.gamma, delta);
    NodeParams::new(cfg.kappa1, cfg.kappa2, [t(cfg.delta - cfg.zeta / 2.0), t(cfg.delta + cfg.zeta / 2.0)])
}

/// Reference three-level node described by its independent coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceNode {
    pub cooperativity: f64,
    pub kappa: f64,
    pub kappa1: f64,
    pub gamma: f64,
}

impl ReferenceNode {
    pub fn node(&self, delta: f64) -> Result<NodeParams> {
        NodeParams::three_level(self.cooperativity, self.kappa, self.kappa1, self.gamma, delta)
    }
}

/// Static offsets of node B from the reference; node A keeps the reference
/// parameters and only carries its own detuning `delta_a`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeDeviation {
    pub eps_c: f64,
    pub eps_kappa: f64,
    pub eps_kappa1: f64,
    pub eps_gamma: f64,
    pub delta_a: f64,
    pub delta_b: f64,
}

impl NodeDeviation {
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            eps_c: s * self.eps_c,
            eps_kappa: s * self.eps_kappa,
            eps_kappa1: s * self.eps_kappa1,
            eps_gamma: s * self.eps_gamma,
            delta_a: s * self.delta_a,
            delta_b: s * self.delta_b,
        }
    }

    /// Builds (node A, node B). The coupling of node B is re-derived from its
    /// deviated cooperativity, cavity and emitter rates.
    pub fn apply(&self, reference: &ReferenceNode) -> Result<(NodeParams, NodeParams)> {
        let a = reference.node(self.delta_a)?;
        let b = ReferenceNode {
            cooperativity: reference.cooperativity + self.eps_c,
            kappa: reference.kappa + self.eps_kappa,
            kappa1: reference.kappa1 + self.eps_kappa1,
            gamma: reference.gamma + self.eps_gamma,
        }
        .node(self.delta_b)?;
        Ok((a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupParams {
    pub eta: f64,
    pub phi: f64,
}

impl SetupParams {
    pub fn new(eta: f64, phi: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::NonPhysicalParameter { field: "eta", value: eta });
        }
        if !phi.is_finite() {
            return Err(Error::NonPhysicalParameter { field: "phi", value: phi });
        }
        Ok(Self { eta, phi })
    }
}

impl Default for SetupParams {
    fn default() -> Self {
        Self { eta: 1.0, phi: 0.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cooperativity_from_coupling() {
        let n =
            NodeParams::new(1.0, 0.0, [TransitionParams::new(1.0, 1.0, 0.0), TransitionParams::uncoupled()]).unwrap();
        assert_eq!(n.kappa(), 1.0);
        assert_eq!(n.cooperativity(0), 4.0);

        let n =
            NodeParams::new(1.0, 1.0, [TransitionParams::new(0.5f64.sqrt(), 1.0, 0.0), TransitionParams::uncoupled()])
                .unwrap();
        assert_eq!(n.kappa(), 2.0);
        assert!((n.cooperativity(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonphysical_fields() {
        let t = [TransitionParams::uncoupled(); 2];
        let err = NodeParams::new(0.0, 1.0, t).unwrap_err();
        assert_eq!(err, Error::NonPhysicalParameter { field: "kappa1", value: 0.0 });

        let mut bad = t;
        bad[1].gamma = -1.0;
        match NodeParams::new(1.0, 0.0, bad) {
            Err(Error::NonPhysicalParameter { field, .. }) => {
                assert_eq!(field, "transitions[1].gamma")
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut bad = t;
        bad[0].g = -0.1;
        assert!(matches!(
            NodeParams::new(1.0, 0.0, bad),
            Err(Error::NonPhysicalParameter { field: "transitions[0].g", .. })
        ));
        assert!(matches!(NodeParams::new(1.0, -0.5, t), Err(Error::NonPhysicalParameter { field: "kappa2", .. })));
    }

    #[test]
    fn four_level_split() {
        let cfg = |zeta, delta| FourLevelConfig::from_cooperativity(2.0, 10.0, 8.0, 1.0, zeta, delta).unwrap();
        let n = expand_four_level(&cfg(10.0, 0.0)).unwrap();
        assert_eq!((n.transitions[0].delta, n.transitions[1].delta), (-5.0, 5.0));
        let n = expand_four_level(&cfg(0.0, 2.0)).unwrap();
        assert_eq!(n.transitions[0], n.transitions[1]);
        assert_eq!(n.transitions[0].delta, 2.0);
        let n = expand_four_level(&cfg(10.0, 3.0)).unwrap();
        assert_eq!((n.transitions[0].delta, n.transitions[1].delta), (-2.0, 8.0));
        assert!((n.cooperativity(0) - 2.0).abs() < 1e-14);
        assert_eq!(n.cooperativity(0), n.cooperativity(1));
    }

    #[test]
    fn deviation_rederives_coupling() {
        let reference = ReferenceNode { cooperativity: 2.0, kappa: 5.0, kappa1: 3.75, gamma: 1.0 };
        let dev =
            NodeDeviation { eps_c: 0.1, eps_kappa: 0.2, eps_kappa1: 0.05, eps_gamma: 0.1, delta_a: 0.3, delta_b: -0.2 };
        let (a, b) = dev.apply(&reference).unwrap();
        assert!((a.cooperativity(0) - 2.0).abs() < 1e-14);
        assert!((b.cooperativity(0) - 2.1).abs() < 1e-14);
        assert!((b.kappa() - 5.2).abs() < 1e-14);
        assert!((b.kappa1 - 3.8).abs() < 1e-14);
        assert_eq!(b.transitions[0].gamma, 1.1);
        assert_eq!(a.transitions[0].delta, 0.3);
        assert_eq!(b.transitions[0].delta, -0.2);

        let broken = NodeDeviation { eps_kappa1: -4.0, ..Default::default() };
        assert!(broken.apply(&reference).is_err());
    }

    #[test]
    fn setup_bounds() {
        assert!(SetupParams::new(1.0, 0.0).is_ok());
        assert!(SetupParams::new(0.0, 0.0).is_err());
        assert!(SetupParams::new(1.1, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn derived_quantities_exact(k1 in 0.01f64..100.0, k2 in 0.0f64..100.0, g in 0.0f64..30.0, gamma in 0.01f64..10.0) {
            let n = NodeParams::new(k1, k2, [TransitionParams::new(g, gamma, 0.0), TransitionParams::uncoupled()]).unwrap();
            prop_assert_eq!(n.kappa(), k1 + k2);
            let c = 4.0 * g * g / ((k1 + k2) * gamma);
            prop_assert!((n.cooperativity(0) - c).abs() <= 4.0 * f64::EPSILON * c.max(1e-300));
        }
    }
}
