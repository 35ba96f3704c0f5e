//! Seeded randomized checks of library invariants, for quick field checks of
//! a build. The same properties are covered by the library's property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use heralded::model::{expand_four_level, FourLevelConfig, NodeParams};
use heralded::protocol::evaluate_protocol;
use heralded::pulse::{decompose_for_node, node_grid, spectrum_of, PulseSpec, DEFAULT_GRID_POINTS};
use heralded::spectral::transfer_pair;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest violation margin seen (negative when every case held).
    pub worst: f64,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn random_node(rng: &mut ChaCha8Rng) -> NodeParams {
    let kappa = rng.gen_range(0.5..50.0);
    let kappa1 = rng.gen_range(0.01..=1.0) * kappa;
    let gamma = rng.gen_range(0.1..5.0);
    let c = rng.gen_range(0.0..30.0);
    let delta = rng.gen_range(-5.0..5.0);
    if rng.gen_bool(0.5) {
        NodeParams::three_level(c, kappa, kappa1, gamma, delta).expect("sampled inside the valid region")
    } else {
        let zeta = rng.gen_range(0.0..20.0);
        let cfg = FourLevelConfig::from_cooperativity(c, kappa, kappa1, gamma, zeta, delta)
            .expect("sampled inside the valid region");
        expand_four_level(&cfg).expect("sampled inside the valid region")
    }
}

fn property(name: &'static str, cases: usize, mut margin: impl FnMut() -> f64) -> PropertyResult {
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..cases {
        let m = margin();
        worst = worst.max(m);
        if !(m <= 0.0) {
            failures += 1;
        }
    }
    PropertyResult { name, cases, failures, worst }
}

pub fn run_checks(seed: u64, cases: usize) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    out.push(property("reflection bounded by one", cases * 10, || {
        let node = random_node(&mut rng);
        let w = rng.gen_range(-100.0..100.0);
        let t = transfer_pair(&node, w);
        t.r0.norm().max(t.r1.norm()) - (1.0 + 1e-12)
    }));

    out.push(property("four-level mirror symmetry", cases * 10, || {
        let kappa = rng.gen_range(1.0..100.0);
        let cfg = FourLevelConfig::from_cooperativity(
            rng.gen_range(0.1..30.0),
            kappa,
            rng.gen_range(0.5..1.0) * kappa,
            1.0,
            rng.gen_range(0.0..20.0),
            rng.gen_range(-10.0..10.0),
        )
        .expect("sampled inside the valid region");
        let w = rng.gen_range(-50.0..50.0);
        let (Ok(a), Ok(b)) = (expand_four_level(&cfg), expand_four_level(&cfg.with_delta(-cfg.delta))) else {
            return 0.0;
        };
        let (ta, tb) = (transfer_pair(&a, w), transfer_pair(&b, -w));
        (ta.r_minus.norm() - tb.r_minus.norm()).abs().max((ta.r_plus.norm() - tb.r_plus.norm()).abs()) - 1e-12
    }));

    let pulse_node = |rng: &mut ChaCha8Rng| {
        let node = random_node(rng);
        let pulse = PulseSpec::gaussian(rng.gen_range(0.05..2.0), rng.gen_range(-2.0..2.0)).expect("positive width");
        let grid = node_grid(&pulse, &[&node], DEFAULT_GRID_POINTS).expect("valid grid");
        (node, spectrum_of(&pulse, &grid).expect("grid covers the pulse"))
    };

    out.push(property("identical nodes: P_b <= eta/2, F in [0, 1]", cases, || {
        let (node, u) = pulse_node(&mut rng);
        let eta = rng.gen_range(0.0..=1.0);
        let o = evaluate_protocol(&node, &node, &u, eta);
        let mut m = o.p_b - (eta / 2.0 + 1e-9);
        for f in [o.f_a, o.f_b].into_iter().flatten() {
            m = m.max(f - (1.0 + 1e-9)).max(-f);
        }
        m
    }));

    out.push(property("mode decomposition keeps the reflected norm", cases, || {
        let (node, u) = pulse_node(&mut rng);
        let Ok(d) = decompose_for_node(&node, &u) else { return 0.0 };
        let total: f64 = u
            .grid
            .omegas()
            .enumerate()
            .map(|(i, w)| {
                let t = transfer_pair(&node, w);
                u.grid.weight(i) * (t.r_minus.norm_sqr() + t.r_plus.norm_sqr()) * u.values[i].norm_sqr()
            })
            .sum();
        let kept = d.alpha_v0_minus.norm_sqr() + d.alpha_v0_plus.norm_sqr() + d.alpha_v1_plus.norm_sqr();
        (kept - total).abs() - 1e-9
    }));

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_pass_and_are_seeded() {
        let a = run_checks(3, 20);
        assert!(a.iter().all(PropertyResult::passed), "{a:?}");
        assert_eq!(a, run_checks(3, 20));
    }
}
