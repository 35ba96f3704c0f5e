//! Closed-form optima of the three-level node and numerical searches for the
//! flattest transfer functions and the best four-level detuning.

use crate::error::{Error, Result};
use crate::model::{expand_four_level, FourLevelConfig, NodeParams};
use crate::spectral::{reflection, second_derivative_5pt, transfer_pair, Component};

pub const PARAM_TOL: f64 = 1e-8;
pub const OBJECTIVE_TOL: f64 = 1e-12;
pub const MAX_EVALUATIONS: usize = 10_000;
/// Step of the five-point curvature used inside optimizers.
const CURVATURE_STEP: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub argument: Vec<f64>,
    pub objective: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub bracket: Vec<(f64, f64)>,
}

impl OptimizationResult {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged { evaluations: self.evaluations })
        }
    }
}

/// Minimizes a unimodal `f` on `[a, b]`.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64, max_evals: usize) -> OptimizationResult {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut evals = 2;
    while hi - lo > tol * (1.0 + 0.5 * (lo + hi).abs()) && evals < max_evals {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        evals += 1;
    }
    let (x, fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    OptimizationResult {
        argument: vec![x],
        objective: fx,
        evaluations: evals,
        converged: hi - lo <= tol * (1.0 + 0.5 * (lo + hi).abs()),
        bracket: vec![(a.min(b), a.max(b))],
    }
}

/// Nelder-Mead minimization; points outside `bounds` are projected back.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    bounds: &[(f64, f64)],
    xtol: f64,
    ftol: f64,
    max_evals: usize,
) -> OptimizationResult {
    let n = x0.len();
    let clamp = |x: &mut Vec<f64>| {
        for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
            *xi = xi.clamp(lo, hi);
        }
    };
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut start = x0.to_vec();
    clamp(&mut start);
    let f0 = eval(&start, &mut evals);
    simplex.push((start.clone(), f0));
    for i in 0..n {
        let mut x = start.clone();
        x[i] += steps[i];
        if x[i] > bounds[i].1 {
            x[i] = start[i] - steps[i];
        }
        clamp(&mut x);
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }

    let mut converged = false;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0];
        let diameter = simplex
            .iter()
            .skip(1)
            .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let scale = 1.0 + best.0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let spread = simplex[n].1 - simplex[0].1;
        if diameter <= xtol * scale || (spread <= ftol && diameter <= 1e3 * xtol * scale) {
            converged = true;
            break;
        }

        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (w - c)).collect();
            clamp(&mut x);
            x
        };

        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let x = along(-0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            } else {
                let x = along(0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let mut x: Vec<f64> = entry.0.iter().zip(&best).map(|(a, b)| b + 0.5 * (a - b)).collect();
                    clamp(&mut x);
                    let v = eval(&x, &mut evals);
                    *entry = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    OptimizationResult {
        argument: simplex[0].0.clone(),
        objective: simplex[0].1,
        evaluations: evals,
        converged,
        bracket: bounds.to_vec(),
    }
}

/// Cavity rate (in units of γ) at which the resonant transfer functions are
/// flattest for cooperativity `c`.
pub fn optimal_kappa(c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::PreconditionViolated(format!("cooperativity must be positive, got {c}")));
    }
    Ok((c * c + 2.0 * c + 2.0) / c)
}

/// Front-mirror ratio κ₁/κ that makes `r_+(0)` vanish.
pub fn phase_encoding_ratio(c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::PreconditionViolated(format!("cooperativity must be positive, got {c}")));
    }
    Ok((c + 1.0) / (c + 2.0))
}

/// Three-level flatness problem at fixed cooperativity; κ and κ₁/κ are the
/// candidate free parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatnessProblem {
    pub cooperativity: f64,
    pub gamma: f64,
    pub delta: f64,
    pub coupling_ratio: f64,
    /// Frequency at which the curvature is evaluated.
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeParameters {
    /// κ only, at the problem's coupling ratio.
    Kappa,
    /// κ and κ₁/κ, with `|r_+(omega)|` added to the objective so that the
    /// optimum also satisfies phase encoding.
    KappaAndPhaseEncodedRatio,
}

impl FlatnessProblem {
    fn node(&self, kappa: f64, ratio: f64) -> Option<NodeParams> {
        NodeParams::three_level(self.cooperativity, kappa, ratio * kappa, self.gamma, self.delta).ok()
    }

    fn curvature(&self, node: &NodeParams, target: Component) -> f64 {
        second_derivative_5pt(|w| transfer_pair(node, w).get(target).norm_sqr(), self.omega, CURVATURE_STEP)
            .unwrap_or(f64::INFINITY)
    }
}

pub fn flatness_optimize(
    problem: &FlatnessProblem,
    target: Component,
    free: FreeParameters,
    bounds: &[(f64, f64)],
) -> Result<OptimizationResult> {
    let needed = match free {
        FreeParameters::Kappa => 1,
        FreeParameters::KappaAndPhaseEncodedRatio => 2,
    };
    if bounds.len() != needed || bounds.iter().any(|(lo, hi)| !(hi > lo) || !(*lo > 0.0)) {
        return Err(Error::PreconditionViolated(format!("need {needed} nonempty positive bounds, got {bounds:?}")));
    }
    let result = match free {
        FreeParameters::Kappa => {
            let f = |kappa: f64| match problem.node(kappa, problem.coupling_ratio) {
                Some(node) => problem.curvature(&node, target).abs(),
                None => f64::INFINITY,
            };
            golden_section(f, bounds[0].0, bounds[0].1, PARAM_TOL, MAX_EVALUATIONS)
        }
        FreeParameters::KappaAndPhaseEncodedRatio => {
            let f = |x: &[f64]| match problem.node(x[0], x[1]) {
                Some(node) => {
                    problem.curvature(&node, target).abs() + transfer_pair(&node, problem.omega).r_plus.norm()
                }
                None => f64::INFINITY,
            };
            let x0 = [0.5 * (bounds[0].0 + bounds[0].1), 0.5 * (bounds[1].0 + bounds[1].1)];
            let steps = [0.25 * (bounds[0].1 - bounds[0].0), 0.25 * (bounds[1].1 - bounds[1].0)];
            nelder_mead(f, &x0, &steps, bounds, PARAM_TOL, OBJECTIVE_TOL, MAX_EVALUATIONS)
        }
    };
    result.require_converged()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kappa1Mode {
    FixedRatio(f64),
    EnforcePhaseEncoding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SivOptimum {
    pub delta_o: f64,
    pub omega_o: f64,
    pub coupling_ratio: f64,
    /// `|r_-(omega_o)|^2 (κ/κ₁)^2`
    pub peak_scaled: f64,
    pub peak: f64,
    pub r_plus_sq: f64,
    pub phase_condition_met: bool,
    pub d2_minus: f64,
    pub d2_plus: f64,
    pub search: OptimizationResult,
}

/// Detuning bracket for the four-level search. Above the plateau threshold the
/// optimum moves out roughly in proportion to the Purcell width.
pub fn siv_bracket(cfg: &FourLevelConfig) -> f64 {
    2.0 * cfg.zeta + 5.0 * cfg.gamma + 3.0 * (cfg.cooperativity() + 1.0) * cfg.gamma
}

/// `|r_-|^2 (κ/κ₁)^2`, which does not depend on κ₁ at fixed κ.
fn siv_scaled(cfg: &FourLevelConfig, delta: f64, omega: f64) -> f64 {
    let node = expand_four_level(&cfg.with_coupling_ratio(1.0).with_delta(delta)).expect("validated four-level config");
    transfer_pair(&node, omega).r_minus.norm_sqr()
}

fn peak_over_omega(cfg: &FourLevelConfig, delta: f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let n = ((hi - lo) / step).ceil() as usize;
    let (mut best_w, mut best) = (lo, f64::NEG_INFINITY);
    for i in 0..=n {
        let w = lo + i as f64 * (hi - lo) / n as f64;
        let v = siv_scaled(cfg, delta, w);
        if v > best {
            best = v;
            best_w = w;
        }
    }
    let r = golden_section(|w| -siv_scaled(cfg, delta, w), best_w - step, best_w + step, 1e-10, 500);
    if -r.objective > best {
        (r.argument[0], -r.objective)
    } else {
        (best_w, best)
    }
}

/// Maximizes the peak of `|r_-|^2` of a four-level node over the common
/// detuning, then fixes κ₁ according to `mode`. Only `delta >= 0` is
/// searched; the mirror solution is `(-delta_o, -omega_o)`.
pub fn optimize_siv_detuning(cfg: &FourLevelConfig, mode: Kappa1Mode) -> Result<SivOptimum> {
    if cfg.zeta == 0.0 {
        return Err(Error::DegenerateAntisymmetric { norm: 0.0 });
    }
    expand_four_level(cfg)?;
    let bracket = siv_bracket(cfg);
    let (w_lo, w_hi) = (-bracket - cfg.zeta, bracket + cfg.zeta);
    let step = cfg.gamma / 4.0;

    let nd = (bracket / step).ceil() as usize;
    let (mut best_d, mut best_w, mut best) = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..=nd {
        let d = bracket * i as f64 / nd as f64;
        let (w, v) = peak_over_omega(cfg, d, w_lo, w_hi, step);
        if v > best {
            (best_d, best_w, best) = (d, w, v);
        }
    }

    let bounds = [(0.0, bracket), (w_lo, w_hi)];
    let search = nelder_mead(
        |x| -siv_scaled(cfg, x[0], x[1]),
        &[best_d, best_w],
        &[step, step],
        &bounds,
        PARAM_TOL,
        OBJECTIVE_TOL,
        MAX_EVALUATIONS,
    );
    if !search.converged {
        return Err(Error::NotConverged { evaluations: search.evaluations });
    }
    let (mut delta_o, omega_o) = (search.argument[0], search.argument[1]);
    if delta_o < PARAM_TOL {
        delta_o = 0.0;
    }

    let ratio = match mode {
        Kappa1Mode::FixedRatio(r) => r,
        Kappa1Mode::EnforcePhaseEncoding => {
            let node = expand_four_level(&cfg.with_coupling_ratio(1.0).with_delta(delta_o))?;
            let t = 1.0 - transfer_pair(&node, omega_o).r_plus;
            phase_ratio_bisection(t.norm_sqr(), t.re)
        }
    };
    let node = expand_four_level(&cfg.with_coupling_ratio(ratio).with_delta(delta_o))?;
    let at = transfer_pair(&node, omega_o);
    let curvature =
        |c: Component| second_derivative_5pt(|w| transfer_pair(&node, w).get(c).norm_sqr(), omega_o, CURVATURE_STEP);
    let r_plus_sq = at.r_plus.norm_sqr();
    Ok(SivOptimum {
        delta_o,
        omega_o,
        coupling_ratio: ratio,
        peak_scaled: at.r_minus.norm_sqr() / (ratio * ratio),
        peak: at.r_minus.norm_sqr(),
        r_plus_sq,
        phase_condition_met: r_plus_sq < 1e-6,
        d2_minus: curvature(Component::Minus)?,
        d2_plus: curvature(Component::Plus)?,
        search,
    })
}

/// Minimizes `|1 - rho T|^2` over `rho` in (1/2, 1] by bisection on its
/// derivative `2 (rho |T|^2 - Re T)`, which is increasing in `rho`.
fn phase_ratio_bisection(t_sq: f64, t_re: f64) -> f64 {
    let slope = |rho: f64| rho * t_sq - t_re;
    let (mut lo, mut hi) = (0.5, 1.0);
    if slope(hi) <= 0.0 {
        return hi;
    }
    if slope(lo) >= 0.0 {
        return lo;
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPoint {
    /// Qubit state whose reflection vanishes.
    pub state: usize,
    pub omega: f64,
    /// Emitter detuning at which the root occurs.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRoots {
    pub roots: Vec<RootPoint>,
    /// `|r_1|^2` of the uncoupled state at the roots.
    pub contrast: f64,
}

/// Zeros of the coupled-state reflection `r_0` of a three-level node.
pub fn coupled_state_roots(node: &NodeParams) -> Result<CoupledRoots> {
    if !node.is_three_level() {
        return Err(Error::PreconditionViolated("needs a three-level node (g1 = 0)".into()));
    }
    let kappa = node.kappa();
    let kt = 2.0 * node.kappa1 - kappa;
    let t = &node.transitions[0];
    if !(kt > 0.0) {
        return Err(Error::NoRoots(format!("2 kappa1 - kappa = {kt} is not positive")));
    }
    let ct = 4.0 * t.g * t.g / (kt * t.gamma);
    if ct < 1.0 {
        return Err(Error::NoRoots(format!("effective cooperativity {ct} is below 1")));
    }
    // Rounding in g^2 can split the double root at ct = 1.
    let s = if ct - 1.0 < 1e-12 { 0.0 } else { (ct - 1.0).sqrt() };
    let mut roots = vec![RootPoint { state: 0, omega: s * kt / 2.0, delta: s * (kt - t.gamma) / 2.0 }];
    if s > 0.0 {
        roots.push(RootPoint { state: 0, omega: -s * kt / 2.0, delta: -s * (kt - t.gamma) / 2.0 });
    }
    roots.retain(|r| reflection(&with_delta(node, r.delta), 0, r.omega).norm() < 1e-10);
    if roots.is_empty() {
        return Err(Error::NoRoots("closed-form roots failed verification".into()));
    }
    let c = node.cooperativity(0);
    Ok(CoupledRoots { roots, contrast: c / (kappa / kt - kt / kappa + c) })
}

/// Resonant zero of the uncoupled-state reflection, present for a critically
/// coupled cavity.
pub fn critical_root(node: &NodeParams) -> Option<RootPoint> {
    let delta = node.transitions[1].delta;
    (node.is_three_level() && reflection(node, 1, 0.0).norm() < 1e-10).then_some(RootPoint {
        state: 1,
        omega: 0.0,
        delta,
    })
}

/// All intensity-encoding operating points of a three-level node.
pub fn intensity_encoding_points(node: &NodeParams) -> Result<Vec<RootPoint>> {
    let mut points = match coupled_state_roots(node) {
        Ok(r) => r.roots,
        Err(Error::NoRoots(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    points.extend(critical_root(node));
    if points.is_empty() {
        return Err(Error::NoRoots("neither qubit state has a reflection zero".into()));
    }
    Ok(points)
}

fn with_delta(node: &NodeParams, delta: f64) -> NodeParams {
    let mut n = *node;
    for t in &mut n.transitions {
        t.delta = delta;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::d2_modsq;
    use proptest::prelude::*;

    #[test]
    fn closed_forms() {
        assert_eq!(optimal_kappa(2.0).unwrap(), 5.0);
        assert_eq!(optimal_kappa(1.0).unwrap(), 5.0);
        assert!((optimal_kappa(1e4).unwrap() / 1e4 - 1.0).abs() < 3e-4);
        assert!(optimal_kappa(0.0).is_err());
        assert_eq!(phase_encoding_ratio(2.0).unwrap(), 0.75);
        assert!((phase_encoding_ratio(1e6).unwrap() - 1.0).abs() < 1e-5);
        let s2 = 2f64.sqrt();
        assert!((phase_encoding_ratio(s2).unwrap() - (s2 + 1.0) / (s2 + 2.0)).abs() < 1e-15);
        assert!(phase_encoding_ratio(-1.0).is_err());
    }

    #[test]
    fn phase_ratio_zeroes_r_plus() {
        for c in [0.5, 2.0, 7.0, 100.0] {
            let k = optimal_kappa(c).unwrap();
            let node = NodeParams::three_level(c, k, phase_encoding_ratio(c).unwrap() * k, 1.0, 0.0).unwrap();
            assert!(transfer_pair(&node, 0.0).r_plus.norm() < 1e-12);
            let d2 = d2_modsq(&node, Component::Plus, 0.0, 1e-4).unwrap();
            assert!(d2.abs() < 1e-6, "C={c}: {d2}");
        }
    }

    #[test]
    fn golden_section_quadratic() {
        let r = golden_section(|x| (x - 1.3).powi(2), -4.0, 7.0, 1e-10, 1000);
        assert!(r.converged);
        assert!((r.argument[0] - 1.3).abs() < 1e-8);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(rosen, &[-1.2, 1.0], &[0.5, 0.5], &[(-5.0, 5.0), (-5.0, 5.0)], 1e-10, 1e-20, 10_000);
        assert!(r.converged);
        assert!((r.argument[0] - 1.0).abs() < 1e-6 && (r.argument[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn flatness_recovers_closed_forms() {
        for c in [1.0, 2.0] {
            let p = FlatnessProblem { cooperativity: c, gamma: 1.0, delta: 0.0, coupling_ratio: 1.0, omega: 0.0 };
            let r = flatness_optimize(&p, Component::Minus, FreeParameters::Kappa, &[(0.5, 50.0)]).unwrap();
            assert!((r.argument[0] / optimal_kappa(c).unwrap() - 1.0).abs() < 1e-4, "{r:?}");
        }

        let c = 2.0;
        let p = FlatnessProblem { cooperativity: c, gamma: 1.0, delta: 0.0, coupling_ratio: 0.75, omega: 0.0 };
        let r = flatness_optimize(
            &p,
            Component::Plus,
            FreeParameters::KappaAndPhaseEncodedRatio,
            &[(1.0, 20.0), (0.55, 0.99)],
        )
        .unwrap();
        assert!((r.argument[0] / 5.0 - 1.0).abs() < 1e-4, "{r:?}");
        assert!((r.argument[1] / 0.75 - 1.0).abs() < 1e-4, "{r:?}");
        let node = NodeParams::three_level(c, r.argument[0], r.argument[0] * r.argument[1], 1.0, 0.0).unwrap();
        assert!(d2_modsq(&node, Component::Plus, 0.0, 1e-4).unwrap().abs() < 1e-6);
    }

    #[test]
    fn flatness_rejects_bad_bounds() {
        let p = FlatnessProblem { cooperativity: 2.0, gamma: 1.0, delta: 0.0, coupling_ratio: 1.0, omega: 0.0 };
        assert!(flatness_optimize(&p, Component::Minus, FreeParameters::Kappa, &[(3.0, 1.0)]).is_err());
        assert!(flatness_optimize(&p, Component::Minus, FreeParameters::Kappa, &[]).is_err());
    }

    fn siv(c: f64, zeta: f64) -> FourLevelConfig {
        FourLevelConfig::from_cooperativity(c, 100.0, 100.0, 1.0, zeta, 0.0).unwrap()
    }

    #[test]
    fn siv_degenerate() {
        assert!(matches!(
            optimize_siv_detuning(&siv(5.0, 0.0), Kappa1Mode::EnforcePhaseEncoding),
            Err(Error::DegenerateAntisymmetric { .. })
        ));
    }

    #[test]
    fn siv_plateau_and_phase() {
        let o = optimize_siv_detuning(&siv(20.0, 10.0), Kappa1Mode::EnforcePhaseEncoding).unwrap();
        assert!((o.peak_scaled - 0.82).abs() < 0.02, "{o:?}");
        assert!(o.phase_condition_met);
        assert!(o.delta_o >= 0.0);
    }

    #[test]
    fn siv_matches_brute_force_scan() {
        // Independent oracle: dense scan over both signs of the detuning.
        let cfg = siv(5.0, 10.0);
        let o = optimize_siv_detuning(&cfg, Kappa1Mode::FixedRatio(1.0)).unwrap();
        let mut best = 0.0f64;
        for i in 0..=400 {
            let d = -20.0 + 0.1 * i as f64;
            let node = expand_four_level(&cfg.with_delta(d)).unwrap();
            for j in 0..=1200 {
                let w = -30.0 + 0.05 * j as f64;
                best = best.max(transfer_pair(&node, w).r_minus.norm_sqr());
            }
        }
        assert!(o.peak_scaled >= best - 1e-6, "{} < {best}", o.peak_scaled);
        assert!((o.peak_scaled - best).abs() < 1e-3);
    }

    #[test]
    fn siv_non_decreasing_then_flat() {
        let peaks: Vec<f64> = [2.0, 5.0, 8.0, 10.0, 15.0, 20.0, 30.0]
            .iter()
            .map(|&c| optimize_siv_detuning(&siv(c, 10.0), Kappa1Mode::FixedRatio(1.0)).unwrap().peak_scaled)
            .collect();
        for w in peaks.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{peaks:?}");
        }
        let plateau = peaks[3];
        assert!(peaks[3..].iter().all(|p| (p / plateau - 1.0).abs() < 0.02), "{peaks:?}");
    }

    #[test]
    fn phase_bisection() {
        // T = 1/rho* for a real T gives the root exactly.
        assert!((phase_ratio_bisection(1.0 / 0.5625, 1.0 / 0.75) - 0.75).abs() < 1e-12);
        assert_eq!(phase_ratio_bisection(0.25, 0.5), 1.0);
    }

    #[test]
    fn coupled_roots() {
        let node = NodeParams::three_level(4.0, 10.0, 10.0, 1.0, 0.0).unwrap();
        let r = coupled_state_roots(&node).unwrap();
        assert_eq!(r.roots.len(), 2);
        assert!((r.contrast - 1.0).abs() < 1e-14);
        for p in &r.roots {
            assert!(reflection(&with_delta(&node, p.delta), 0, p.omega).norm() < 1e-10);
        }
        assert!((r.roots[0].omega + r.roots[1].omega).abs() < 1e-14);

        // Effective cooperativity exactly 1: both roots collapse to resonance.
        let kt = 2.0 * 6.0 - 10.0;
        let g = (kt / 4.0f64).sqrt();
        let node = NodeParams::new(
            6.0,
            4.0,
            [crate::model::TransitionParams::new(g, 1.0, 0.0), crate::model::TransitionParams::new(0.0, 1.0, 0.0)],
        )
        .unwrap();
        let r = coupled_state_roots(&node).unwrap();
        assert_eq!(r.roots, vec![RootPoint { state: 0, omega: 0.0, delta: 0.0 }]);
    }

    #[test]
    fn critically_coupled_points() {
        let node = NodeParams::three_level(3.0, 10.0, 5.0, 1.0, 0.0).unwrap();
        assert!(matches!(coupled_state_roots(&node), Err(Error::NoRoots(_))));
        let pts = intensity_encoding_points(&node).unwrap();
        assert_eq!(pts, vec![RootPoint { state: 1, omega: 0.0, delta: 0.0 }]);

        let node = NodeParams::three_level(0.1, 10.0, 4.0, 1.0, 0.0).unwrap();
        assert!(matches!(intensity_encoding_points(&node), Err(Error::NoRoots(_))));
    }

    proptest! {
        #[test]
        fn four_level_mirror_symmetry(c in 0.5f64..40.0, zeta in 0.5f64..20.0, d in -30.0f64..30.0, w in -40.0f64..40.0, ratio in 0.5f64..1.0) {
            let cfg = FourLevelConfig::from_cooperativity(c, 100.0, 100.0 * ratio, 1.0, zeta, d).unwrap();
            let a = transfer_pair(&expand_four_level(&cfg).unwrap(), w);
            let b = transfer_pair(&expand_four_level(&cfg.with_delta(-d)).unwrap(), -w);
            prop_assert!((a.r_minus.norm() - b.r_minus.norm()).abs() < 1e-12);
            prop_assert!((a.r_plus.norm() - b.r_plus.norm()).abs() < 1e-12);
        }

        #[test]
        fn closed_form_roots_vanish(c in 1.0f64..50.0, kappa in 1.0f64..50.0, ratio in 0.55f64..1.0) {
            let node = NodeParams::three_level(c, kappa, ratio * kappa, 1.0, 0.0).unwrap();
            if let Ok(r) = coupled_state_roots(&node) {
                for p in r.roots {
                    let n = with_delta(&node, p.delta);
                    prop_assert!(reflection(&n, 0, p.omega).norm() < 1e-10);
                    prop_assert!((reflection(&n, 1, p.omega).norm_sqr() - r.contrast).abs() < 1e-10);
                }
            }
        }
    }
}
