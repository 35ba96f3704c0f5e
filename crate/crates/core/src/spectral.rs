//! Reflection transfer functions of a node and their frequency derivatives.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::NodeParams;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Which transfer function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Minus,
    Plus,
    Zero,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferEval {
    pub omega: f64,
    pub r0: C64,
    pub r1: C64,
    pub r_plus: C64,
    pub r_minus: C64,
}

impl TransferEval {
    pub fn get(&self, which: Component) -> C64 {
        match which {
            Component::Minus => self.r_minus,
            Component::Plus => self.r_plus,
            Component::Zero => self.r0,
            Component::One => self.r1,
        }
    }
}

/// Reflection amplitude of the node when the qubit is in state `k`.
pub fn reflection(node: &NodeParams, k: usize, omega: f64) -> C64 {
    let t = &node.transitions[k];
    let kappa = node.kappa();
    let a = C64::new(1.0, -2.0 * (omega - t.delta) / t.gamma);
    let b = C64::new(1.0, -2.0 * omega / kappa);
    1.0 - 2.0 * node.coupling_ratio() * a / (a * b + node.cooperativity(k))
}

pub fn transfer_pair(node: &NodeParams, omega: f64) -> TransferEval {
    let r0 = reflection(node, 0, omega);
    let r1 = reflection(node, 1, omega);
    TransferEval { omega, r0, r1, r_plus: (r0 + r1) / 2.0, r_minus: (r0 - r1) / 2.0 }
}

pub fn transfer_on(node: &NodeParams, omegas: impl IntoIterator<Item = f64>) -> Vec<TransferEval> {
    omegas.into_iter().map(|w| transfer_pair(node, w)).collect()
}

/// Closed-form `|r_-(0)|^2` of a resonant three-level node.
pub fn resonant_peak(node: &NodeParams) -> Result<f64> {
    if !node.is_three_level() {
        return Err(Error::PreconditionViolated("resonant peak needs a three-level node (g1 = 0)".into()));
    }
    if node.transitions[0].delta != 0.0 {
        return Err(Error::PreconditionViolated("resonant peak needs a resonant emitter (delta0 = 0)".into()));
    }
    let rho = node.coupling_ratio();
    let c = node.cooperativity(0);
    Ok(rho * rho * c * c / ((c + 1.0) * (c + 1.0)))
}

pub fn default_step(omega: f64) -> f64 {
    1e-4 * (omega.abs() + 1.0).max(1.0)
}

fn check_step(x: f64, h: f64) -> Result<()> {
    let limit = 64.0 * f64::EPSILON * x.abs().max(1.0);
    if !(h >= limit) {
        return Err(Error::StepTooSmall { h, limit });
    }
    Ok(())
}

/// Three-point central second difference.
pub fn second_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> Result<f64> {
    check_step(x, h)?;
    Ok((f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h))
}

/// Five-point central second difference, fourth order in `h`.
pub fn second_derivative_5pt(f: impl Fn(f64) -> f64, x: f64, h: f64) -> Result<f64> {
    check_step(x, h)?;
    let f0 = f(x);
    let (p1, m1) = (f(x + h), f(x - h));
    let (p2, m2) = (f(x + 2.0 * h), f(x - 2.0 * h));
    Ok((-p2 + 16.0 * p1 - 30.0 * f0 + 16.0 * m1 - m2) / (12.0 * h * h))
}

pub fn d2_modsq(node: &NodeParams, which: Component, omega: f64, h: f64) -> Result<f64> {
    second_derivative(|w| transfer_pair(node, w).get(which).norm_sqr(), omega, h)
}

/// Decay rates (positive) of the poles of `r_k` in the lower half plane.
pub fn pole_decay_rates(node: &NodeParams, k: usize) -> Vec<f64> {
    let t = &node.transitions[k];
    let kappa = node.kappa();
    let c = node.cooperativity(k);
    if c == 0.0 {
        // The emitter pole cancels against the numerator.
        return vec![kappa / 2.0];
    }
    // (A - 2i x/gamma)(1 - 2i x/kappa) + C = 0 with A = 1 + 2i delta/gamma.
    let a = C64::new(1.0, 2.0 * t.delta / t.gamma);
    let qa = C64::new(-4.0 / (t.gamma * kappa), 0.0);
    let qb = -2.0 * I * (a / kappa + 1.0 / t.gamma);
    let qc = a + c;
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)].iter().map(|x| -x.im).collect()
}

/// Slowest amplitude decay rate among both transfer functions.
pub fn slowest_decay_rate(node: &NodeParams) -> f64 {
    (0..2).flat_map(|k| pole_decay_rates(node, k)).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TransitionParams;
    use proptest::prelude::*;

    fn three(c: f64, kappa: f64, ratio: f64, delta: f64) -> NodeParams {
        NodeParams::three_level(c, kappa, ratio * kappa, 1.0, delta).unwrap()
    }

    // Explicit three-level combinations written out independently of `reflection`.
    fn explicit_pair(c: f64, kappa: f64, rho: f64, omega: f64) -> (C64, C64) {
        let a = C64::new(1.0, -2.0 * omega);
        let b = C64::new(1.0, -2.0 * omega / kappa);
        let den = a * b * b + c * b;
        let minus = rho * c / den;
        let plus = 1.0 - rho * (2.0 * a * b + c) / den;
        (minus, plus)
    }

    #[test]
    fn reflection_limits() {
        assert!(reflection(&three(1.0, 4.0, 1.0, 0.0), 0, 0.0).norm() < 1e-15);
        let empty = three(0.0, 4.0, 1.0, 0.0);
        assert!((reflection(&empty, 0, 0.0) + 1.0).norm() < 1e-15);
        let critical = three(0.0, 4.0, 0.5, 0.0);
        assert!(reflection(&critical, 0, 0.0).norm() < 1e-15);
    }

    #[test]
    fn transfer_pair_examples() {
        let t = transfer_pair(&three(2.0, 5.0, 0.75, 0.0), 0.0);
        assert!(t.r_plus.norm() < 1e-15);
        assert!((t.r_minus - 0.5).norm() < 1e-15);

        let n = NodeParams::new(2.0, 1.0, [TransitionParams::new(1.3, 0.7, 0.2), TransitionParams::new(1.3, 0.7, 0.2)])
            .unwrap();
        for w in [-3.0, 0.0, 0.4, 10.0] {
            assert_eq!(transfer_pair(&n, w).r_minus, C64::new(0.0, 0.0));
        }

        let t = transfer_pair(&three(1.0, 3.0, 1.0, 0.0), 0.0);
        assert!((t.r_minus.norm_sqr() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn explicit_three_level_agreement() {
        for &(c, kappa, rho) in &[(2.0, 5.0, 0.75), (0.5, 1.0, 1.0), (10.0, 40.0, 0.6)] {
            let n = three(c, kappa, rho, 0.0);
            for i in 0..=400 {
                let w = -20.0 + 0.1 * i as f64;
                let t = transfer_pair(&n, w);
                let (m, p) = explicit_pair(c, kappa, rho, w);
                assert!((t.r_minus - m).norm() <= 1e-12 * m.norm().max(1e-3));
                assert!((t.r_plus - p).norm() <= 1e-12 * p.norm().max(1e-3));
            }
        }
    }

    #[test]
    fn resonant_peak_examples() {
        assert!((resonant_peak(&three(1.0, 2.0, 1.0, 0.0)).unwrap() - 0.25).abs() < 1e-15);
        assert!((resonant_peak(&three(1.0, 2.0, 0.5, 0.0)).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        let big = resonant_peak(&three(1e6, 2e6, 1.0, 0.0)).unwrap();
        assert!((big - (1.0 - 2e-6)).abs() < 1e-11);
        let n = three(3.0, 7.0, 0.8, 0.0);
        let numeric = transfer_pair(&n, 0.0).r_minus.norm_sqr();
        assert!((resonant_peak(&n).unwrap() - numeric).abs() < 1e-12 * numeric);

        let siv =
            NodeParams::new(1.0, 0.0, [TransitionParams::new(1.0, 1.0, 0.0), TransitionParams::new(1.0, 1.0, 1.0)])
                .unwrap();
        assert!(matches!(resonant_peak(&siv), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn curvature_oracles() {
        // Frozen from symbolic differentiation of the explicit three-level forms.
        let n = three(2.0, 10.0, 1.0, 0.0);
        let m = d2_modsq(&n, Component::Minus, 0.0, default_step(0.0)).unwrap();
        assert!((m - (-112.0 / 405.0)).abs() < 1e-7);
        let p = d2_modsq(&n, Component::Plus, 0.0, default_step(0.0)).unwrap();
        assert!((p - 0.517_530_864_197_530_9).abs() < 1e-7);

        let n = three(2.0, 10.0, 0.75, 0.0);
        let m = second_derivative_5pt(|w| transfer_pair(&n, w).r_minus.norm_sqr(), 0.0, 1e-2).unwrap();
        assert!((m - (-0.155_555_555_555_555_56)).abs() < 1e-9);

        let empty = three(0.0, 3.0, 1.0, 0.0);
        let e = d2_modsq(&empty, Component::Zero, 0.0, default_step(0.0)).unwrap();
        assert!(e.abs() < 1e-6);
    }

    #[test]
    fn step_guard() {
        let n = three(2.0, 5.0, 0.75, 0.0);
        assert!(matches!(d2_modsq(&n, Component::Minus, 0.0, 1e-15), Err(Error::StepTooSmall { .. })));
        assert!(d2_modsq(&n, Component::Minus, 1e3, 1e-12).is_err());
        assert!(d2_modsq(&n, Component::Minus, 0.0, 1e-13).is_ok());
    }

    #[test]
    fn purcell_linewidth() {
        for c in [0.5, 2.0, 5.0] {
            let n = three(c, 1e3 * (c + 1.0), 1.0, 0.0);
            let peak = transfer_pair(&n, 0.0).r_minus.norm_sqr();
            let f = |w: f64| transfer_pair(&n, w).r_minus.norm_sqr() - peak / 2.0;
            let (mut lo, mut hi) = (0.0, 10.0 * (c + 1.0));
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            let fwhm = 2.0 * lo;
            assert!((fwhm / (c + 1.0) - 1.0).abs() < 0.02, "C={c}: {fwhm}");
        }
    }

    #[test]
    fn decay_rates_match_purcell_pole() {
        let n = three(2.0, 1e4, 1.0, 0.0);
        let rates = pole_decay_rates(&n, 0);
        let slow = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((slow - 1.5).abs() < 1e-2);
        let empty = three(0.0, 6.0, 1.0, 0.0);
        assert_eq!(slowest_decay_rate(&empty), 3.0);
    }

    proptest! {
        #[test]
        fn reflection_bounded(
            k1 in 0.01f64..200.0, k2 in 0.0f64..200.0,
            g0 in 0.0f64..50.0, g1 in 0.0f64..50.0,
            ga0 in 0.01f64..10.0, ga1 in 0.01f64..10.0,
            d0 in -50.0f64..50.0, d1 in -50.0f64..50.0,
            w in -100.0f64..100.0,
        ) {
            let n = NodeParams::new(k1, k2, [TransitionParams::new(g0, ga0, d0), TransitionParams::new(g1, ga1, d1)]).unwrap();
            let t = transfer_pair(&n, w);
            for r in [t.r0, t.r1, t.r_plus, t.r_minus] {
                prop_assert!(r.norm() <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn lossless_empty_cavity_unitary(k1 in 0.01f64..200.0, w in -100.0f64..100.0) {
            let n = NodeParams::new(k1, 0.0, [TransitionParams::uncoupled(); 2]).unwrap();
            prop_assert!((reflection(&n, 0, w).norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn minus_vanishes_with_cooperativity(kappa in 0.5f64..100.0, rho in 0.5f64..1.0, w in -10.0f64..10.0) {
            let small = three(1e-9, kappa, rho, 0.0);
            prop_assert!(transfer_pair(&small, w).r_minus.norm() < 1e-8);
        }
    }
}
