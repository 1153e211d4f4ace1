//! Analytic moments and Monte-Carlo sampling of repeat-until-success T
//! costs for composed gearboxes, flat gearboxes and full plans.
//!
//! Every trial draws from its own ChaCha8 stream (seed, stream = trial
//! index), so results do not depend on the number of worker threads.

use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gearbox::{composed_angle, success_prob_from_sin_sq, Angle, GearboxNode};

/// Percentiles reported by default.
pub const DEFAULT_PERCENTILES: [f64; 3] = [2.5, 50.0, 97.5];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostStats {
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    /// (percentile, value), nearest rank on the sorted sample.
    pub percentiles: Vec<(f64, f64)>,
    pub analytic_mean: Option<f64>,
    pub analytic_variance_bound: Option<f64>,
    /// Mean including offline ancilla preparation, when the sampled
    /// quantity is the online cost.
    pub total_mean: Option<f64>,
}

impl CostStats {
    pub fn from_samples(samples: &[f64]) -> CostStats {
        assert!(!samples.is_empty(), "no samples");
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let percentiles = DEFAULT_PERCENTILES.iter().map(|&p| (p, nearest_rank(&sorted, p))).collect();
        CostStats {
            samples: samples.len(),
            mean,
            variance,
            percentiles,
            analytic_mean: None,
            analytic_variance_bound: None,
            total_mean: None,
        }
    }

    pub fn percentile(&self, p: f64) -> Option<f64> {
        self.percentiles.iter().find(|(q, _)| (q - p).abs() < 1e-12).map(|x| x.1)
    }

    pub fn std_error(&self) -> f64 {
        (self.variance / self.samples as f64).sqrt()
    }
}

/// Nearest-rank percentile of an ascending sample.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelProb {
    pub q: u32,
    pub p: f64,
}

fn check_theta0(theta0: &Angle) -> Result<()> {
    if theta0.is_zero() || theta0.radians >= FRAC_PI_4 {
        return Err(Error::InvalidInput(format!("θ₀ = {} must lie in (0, π/4)", theta0.radians)));
    }
    Ok(())
}

/// P_q = cos⁴φ_q + sin⁴φ_q with φ_q = tan⁻¹(tan^(2^{q−1}) θ₀), q = 1..=d.
pub fn level_probs(theta0: &Angle, d: u32) -> Result<Vec<LevelProb>> {
    check_theta0(theta0)?;
    (1..=d)
        .map(|q| {
            let phi = if q == 1 { *theta0 } else { composed_angle(theta0, q - 1)? };
            Ok(LevelProb { q, p: success_prob_from_sin_sq(phi.sin_sq()) })
        })
        .collect()
}

fn prod_p(theta0: &Angle, d: u32) -> Result<(Vec<f64>, f64)> {
    let ps: Vec<f64> = level_probs(theta0, d)?.into_iter().map(|l| l.p).collect();
    let prod = ps.iter().product();
    Ok((ps, prod))
}

/// (1 − cos 4θ₀)/4 + 2tan⁴θ₀/(1 − tan²θ₀).
pub fn ancilla_fail_bound(theta0: &Angle) -> Result<f64> {
    check_theta0(theta0)?;
    let t = theta0.radians;
    let t2 = t.tan().powi(2);
    Ok((1.0 - (4.0 * t).cos()) / 4.0 + 2.0 * t2 * t2 / (1.0 - t2))
}

/// Trial-count bounds exactly as printed with the ancilla-assisted
/// corollary: E ≤ 1/((3 + cos 4θ₀)/4 + e), V ≤ ((1 − cos 4θ₀)/4 − e)/(…)²
/// with e = 2tan⁴θ₀/(1 − tan²θ₀).
pub fn ancilla_trial_moments(theta0: &Angle) -> Result<(f64, f64)> {
    check_theta0(theta0)?;
    let t = theta0.radians;
    let t2 = t.tan().powi(2);
    let e = 2.0 * t2 * t2 / (1.0 - t2);
    let succ = (3.0 + (4.0 * t).cos()) / 4.0 + e;
    let fail = (1.0 - (4.0 * t).cos()) / 4.0 - e;
    Ok((1.0 / succ, fail / (succ * succ)))
}

/// Geometric-distribution moments implied directly by the failure bound p:
/// E ≤ 1/(1 − p), V ≤ p/(1 − p)².
pub fn lemma_geometric_moments(theta0: &Angle) -> Result<(f64, f64)> {
    let p = ancilla_fail_bound(theta0)?;
    Ok((1.0 / (1.0 - p), p / ((1.0 - p) * (1.0 - p))))
}

/// E(n_d) = 2^d / (P₁⋯P_d).
pub fn expected_n(theta0: &Angle, d: u32) -> Result<f64> {
    let (_, prod) = prod_p(theta0, d)?;
    Ok(2f64.powi(d as i32) / prod)
}

/// 2^{2d+1}(1 − P₁)/(P_d²⋯P₁²) · (1 + P_d⋯P₁/(2^d P₁)).
pub fn variance_n_bound(theta0: &Angle, d: u32) -> Result<f64> {
    let (ps, prod) = prod_p(theta0, d)?;
    let p1 = ps[0];
    let two_d = 2f64.powi(d as i32);
    Ok(2f64.powi(2 * d as i32 + 1) * (1.0 - p1) / (prod * prod) * (1.0 + prod / (two_d * p1)))
}

/// Exact variance of n_d from the compound-geometric recursion
/// V_q = 2V_{q−1}/P_q + 4^q(1 − P_q)/(P₁⋯P_q)², V₀ = 0.
pub fn variance_n_exact(theta0: &Angle, d: u32) -> Result<f64> {
    let (ps, _) = prod_p(theta0, d)?;
    let mut v = 0.0;
    let mut prod = 1.0;
    for (i, &p) in ps.iter().enumerate() {
        let q = i as i32 + 1;
        prod *= p;
        v = 2.0 * v / p + 4f64.powi(q) * (1.0 - p) / (prod * prod);
    }
    Ok(v)
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.random::<f64>() < p
}

fn run_trials<F>(trials: usize, seed: u64, f: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    (0..trials).into_par_iter().map(|i| f(&mut trial_rng(seed, i))).collect()
}

/// Number of base applications to realize one success of level q.
fn sample_level(ps: &[f64], q: usize, rng: &mut ChaCha8Rng, attempts: &mut [u64]) -> u64 {
    if q == 0 {
        return 1;
    }
    let mut n = 0;
    loop {
        attempts[q - 1] += 1;
        n += sample_level(ps, q - 1, rng, attempts) + sample_level(ps, q - 1, rng, attempts);
        if bernoulli(rng, ps[q - 1]) {
            return n;
        }
    }
}

/// Distribution of n_d, the number of U/U† applications needed for one
/// success of the d-fold composed gearbox.
pub fn simulate_composed(theta0: &Angle, d: u32, trials: usize, seed: u64) -> Result<CostStats> {
    check_trials(trials)?;
    let (ps, _) = prod_p(theta0, d)?;
    let samples = run_trials(trials, seed, |rng| {
        let mut att = vec![0u64; d as usize];
        sample_level(&ps, d as usize, rng, &mut att) as f64
    });
    let mut st = CostStats::from_samples(&samples);
    st.analytic_mean = Some(expected_n(theta0, d)?);
    st.analytic_variance_bound = Some(variance_n_bound(theta0, d)?);
    Ok(st)
}

/// Per level q: total measurement attempts and successes over all trials
/// of the composed process. Attempts/successes estimates 1/P_q.
pub fn composed_level_attempts(theta0: &Angle, d: u32, trials: usize, seed: u64) -> Result<Vec<(u64, u64)>> {
    check_trials(trials)?;
    let (ps, _) = prod_p(theta0, d)?;
    let per_trial: Vec<(Vec<u64>, Vec<u64>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let mut att = vec![0u64; d as usize];
            sample_level(&ps, d as usize, &mut rng, &mut att);
            // every level-q attempt consumes two level-(q−1) successes
            let succ: Vec<u64> =
                (0..d as usize).map(|q| if q + 1 == d as usize { 1 } else { 2 * att[q + 1] }).collect();
            (att, succ)
        })
        .collect();
    let mut out = vec![(0u64, 0u64); d as usize];
    for (a, s) in per_trial {
        for q in 0..d as usize {
            out[q].0 += a[q];
            out[q].1 += s[q];
        }
    }
    Ok(out)
}

/// Online attempts of the ancilla-assisted protocol for the d-fold
/// composed gearbox: with U|0⟩ and the lower-level states prepared offline,
/// an attempt succeeds only if the top measurement and each online
/// dagger-level measurement succeed.
pub fn simulate_ancilla_trials(theta0: &Angle, d: u32, trials: usize, seed: u64) -> Result<CostStats> {
    check_trials(trials)?;
    let (ps, _) = prod_p(theta0, d)?;
    let samples = run_trials(trials, seed, |rng| {
        let mut n = 0u64;
        loop {
            n += 1;
            let mut ok = true;
            for &p in ps.iter().rev() {
                if !bernoulli(rng, p) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return n as f64;
            }
        }
    });
    let mut st = CostStats::from_samples(&samples);
    let (e, v) = ancilla_trial_moments(theta0)?;
    st.analytic_mean = Some(e);
    st.analytic_variance_bound = Some(v);
    Ok(st)
}

/// Mean T-count of one flat gearbox of `d` identical leaves: per attempt
/// 4(d−1) + 2·d·leaf_t, success cos⁴θ + sin⁴θ with sin²θ = j^{2d}.
pub fn direct_gearbox_mean(j_offdiag: f64, leaf_t: u64, d: u32) -> Result<f64> {
    let (per, p) = direct_gearbox_params(j_offdiag, leaf_t, d)?;
    Ok(per as f64 / p)
}

fn direct_gearbox_params(j_offdiag: f64, leaf_t: u64, d: u32) -> Result<(u64, f64)> {
    if !(j_offdiag > 0.0 && j_offdiag < 1.0) || d == 0 {
        return Err(Error::InvalidInput("need 0 < j < 1 and d ≥ 1".into()));
    }
    let s = (2.0 * d as f64 * j_offdiag.log2()).exp2();
    Ok((4 * (d as u64 - 1) + 2 * d as u64 * leaf_t, success_prob_from_sin_sq(s)))
}

/// Output angle of a flat gearbox of `d` identical leaves.
pub fn direct_gearbox_angle(j_offdiag: f64, d: u32) -> Result<Angle> {
    crate::gearbox::gearbox_angle(&vec![j_offdiag; d as usize])
}

pub fn simulate_direct_gearbox(j_offdiag: f64, leaf_t: u64, d: u32, trials: usize, seed: u64) -> Result<CostStats> {
    check_trials(trials)?;
    let (per, p) = direct_gearbox_params(j_offdiag, leaf_t, d)?;
    let samples = run_trials(trials, seed, |rng| {
        let mut n = per;
        while !bernoulli(rng, p) {
            n += per;
        }
        n as f64
    });
    let mut st = CostStats::from_samples(&samples);
    st.analytic_mean = Some(per as f64 / p);
    Ok(st)
}

/// 4·log₂(1/θ); the additive constant is taken as zero.
pub fn reference_tcount(theta: &Angle) -> f64 {
    4.0 * theta.log2_inv
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AncillaMode {
    /// Ancilla preparations are counted with everything else.
    Online,
    /// Ancilla preparations happen beforehand; the sampled quantity is the
    /// online T-count and `total_mean` keeps the full cost.
    Offline,
}

impl std::str::FromStr for AncillaMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "online" => Ok(AncillaMode::Online),
            "offline" => Ok(AncillaMode::Offline),
            _ => Err(Error::Parse(format!("ancilla mode `{s}` (expected online|offline)"))),
        }
    }
}

/// Precomputed probabilities for sampling a plan tree.
enum PlanTree {
    Leaf(u64),
    Gearbox { p: f64, toffoli: u64, children: Vec<PlanTree> },
    Composed { ps: Vec<f64>, base: Box<PlanTree> },
}

impl PlanTree {
    fn build(node: &GearboxNode) -> Result<PlanTree> {
        Ok(match node {
            GearboxNode::Leaf(w) => PlanTree::Leaf(w.tcount() as u64),
            GearboxNode::Gearbox(ch) => PlanTree::Gearbox {
                p: node.success_prob()?,
                toffoli: 4 * (ch.len() as u64 - 1),
                children: ch.iter().map(PlanTree::build).collect::<Result<_>>()?,
            },
            GearboxNode::Composed(b, d) => {
                let theta0 = Angle::asin_of_log2(b.log2_offdiag()?);
                let (ps, _) = prod_p(&theta0, *d)?;
                PlanTree::Composed { ps, base: Box::new(PlanTree::build(b)?) }
            }
        })
    }

    /// (total, online) T-count of realizing this node once. `live` marks an
    /// application that acts on a qubit already coupled to the data.
    fn sample(&self, live: bool, rng: &mut ChaCha8Rng) -> (u64, u64) {
        match self {
            PlanTree::Leaf(t) => (*t, if live { *t } else { 0 }),
            PlanTree::Gearbox { p, toffoli, children } => {
                let (mut tot, mut on) = (0, 0);
                loop {
                    tot += toffoli;
                    if live {
                        on += toffoli;
                    }
                    for c in children {
                        let (a, _) = c.sample(false, rng);
                        let (b, bo) = c.sample(live, rng);
                        tot += a + b;
                        on += bo;
                    }
                    if bernoulli(rng, *p) {
                        return (tot, on);
                    }
                }
            }
            PlanTree::Composed { ps, base } => Self::sample_level(ps, base, ps.len(), live, rng),
        }
    }

    fn sample_level(ps: &[f64], base: &PlanTree, q: usize, live: bool, rng: &mut ChaCha8Rng) -> (u64, u64) {
        if q == 0 {
            return base.sample(live, rng);
        }
        let (mut tot, mut on) = (0, 0);
        loop {
            let (a, _) = Self::sample_level(ps, base, q - 1, false, rng);
            let (b, bo) = Self::sample_level(ps, base, q - 1, live, rng);
            tot += a + b;
            on += bo;
            if bernoulli(rng, ps[q - 1]) {
                return (tot, on);
            }
        }
    }

    /// Analytic (total, online) means.
    fn mean(&self, live: bool) -> (f64, f64) {
        match self {
            PlanTree::Leaf(t) => (*t as f64, if live { *t as f64 } else { 0.0 }),
            PlanTree::Gearbox { p, toffoli, children } => {
                let mut tot = *toffoli as f64;
                let mut on = if live { *toffoli as f64 } else { 0.0 };
                for c in children {
                    let (a, _) = c.mean(false);
                    let (b, bo) = c.mean(live);
                    tot += a + b;
                    on += bo;
                }
                (tot / p, on / p)
            }
            PlanTree::Composed { ps, base } => {
                let (mut tot, mut on) = base.mean(live);
                let (mut tot_off, _) = base.mean(false);
                for &p in ps {
                    let t = (tot_off + tot) / p;
                    on /= p;
                    tot_off = 2.0 * tot_off / p;
                    tot = t;
                }
                (tot, on)
            }
        }
    }
}

/// Analytic (total, online) mean T-count of a plan.
pub fn analytic_plan_mean(node: &GearboxNode) -> Result<(f64, f64)> {
    node.validate()?;
    Ok(PlanTree::build(node)?.mean(true))
}

/// T-count distribution of a full plan: every gearbox attempt costs
/// 4(d−1) plus a forward and a dagger realization of each child, succeeds
/// with the probability given by the realized child angles, and on failure
/// is retried with fresh resources after a free Clifford correction.
pub fn simulate_plan(node: &GearboxNode, trials: usize, seed: u64, mode: AncillaMode) -> Result<CostStats> {
    check_trials(trials)?;
    node.validate()?;
    let tree = PlanTree::build(node)?;
    let pairs: Vec<(u64, u64)> =
        (0..trials).into_par_iter().map(|i| tree.sample(true, &mut trial_rng(seed, i))).collect();
    let totals: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
    let (mean_tot, mean_on) = tree.mean(true);
    let mut st = match mode {
        AncillaMode::Online => {
            let mut st = CostStats::from_samples(&totals);
            st.analytic_mean = Some(mean_tot);
            st
        }
        AncillaMode::Offline => {
            let online: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            let mut st = CostStats::from_samples(&online);
            st.analytic_mean = Some(mean_on);
            st
        }
    };
    st.total_mean = Some(totals.iter().sum::<f64>() / totals.len() as f64);
    Ok(st)
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_8;

    fn pi8() -> Angle {
        Angle::from_radians(FRAC_PI_8)
    }

    #[test]
    fn level_probabilities() {
        let l = level_probs(&pi8(), 3).unwrap();
        assert!((l[0].p - 0.75).abs() < 1e-12);
        assert!((l[1].p - 0.944444).abs() < 1e-6);
        assert!(l[2].p >= l[1].p);
    }

    #[test]
    fn lemma_and_corollary_values() {
        assert!((ancilla_fail_bound(&pi8()).unwrap() - 0.321068).abs() < 1e-6);
        let (e, v) = ancilla_trial_moments(&pi8()).unwrap();
        assert!((e - 1.21793).abs() < 1e-5 && e < 1.25);
        assert!((v - 0.26542).abs() < 1e-5 && v < 1.0 / 3.0);
        let (e0, v0) = ancilla_trial_moments(&Angle::from_radians(1e-9)).unwrap();
        assert!((e0 - 1.0).abs() < 1e-12 && v0.abs() < 1e-12);
        assert!(ancilla_fail_bound(&Angle::from_radians(1e-9)).unwrap() < 1e-15);
        assert!(ancilla_fail_bound(&Angle::from_radians(FRAC_PI_4)).is_err());
    }

    #[test]
    fn expectation_examples() {
        assert!((expected_n(&pi8(), 1).unwrap() - 2.0 / 0.75).abs() < 1e-12);
        assert!((expected_n(&pi8(), 2).unwrap() - 5.6471).abs() < 1e-4);
        for d in 1..10 {
            assert!(expected_n(&pi8(), d).unwrap() <= 5.0 * 2f64.powi(d as i32 - 1));
        }
        assert!((variance_n_bound(&pi8(), 1).unwrap() - 16.0 / 3.0).abs() < 1e-9);
        assert!((variance_n_exact(&pi8(), 1).unwrap() - 16.0 / 9.0).abs() < 1e-12);
        assert!((variance_n_exact(&pi8(), 2).unwrap() - 5.536).abs() < 1e-3);
        assert!(variance_n_bound(&Angle::from_radians(1e-9), 3).unwrap() < 1e-12);
    }

    #[test]
    fn tiny_theta_is_deterministic() {
        let st = simulate_composed(&Angle::from_radians(1e-12), 4, 200, 1).unwrap();
        assert_eq!(st.mean, 16.0);
        assert_eq!(st.variance, 0.0);
    }

    #[test]
    fn determinism() {
        let a = simulate_composed(&pi8(), 3, 500, 42).unwrap();
        let b = simulate_composed(&pi8(), 3, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_composed(&pi8(), 3, 500, 43).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn nearest_rank_percentiles() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 2.5), 3.0);
        assert_eq!(nearest_rank(&v, 50.0), 50.0);
        assert_eq!(nearest_rank(&v, 97.5), 98.0);
        assert_eq!(nearest_rank(&v, 0.0), 1.0);
    }

    #[test]
    fn direct_gearbox() {
        let (per, p) = direct_gearbox_params(FRAC_PI_8.sin(), 1, 1).unwrap();
        assert_eq!(per, 2);
        assert!((p - 0.75).abs() < 1e-12);
        let st = simulate_direct_gearbox(1e-9, 3, 4, 100, 0).unwrap();
        assert_eq!(st.mean, (12 + 24) as f64);
    }

    #[test]
    fn reference_line() {
        assert!((reference_tcount(&Angle::from_radians(2f64.powi(-10))) - 40.0).abs() < 1e-12);
        assert_eq!(reference_tcount(&Angle::from_radians(1.0)), 0.0);
    }

    #[test]
    fn plan_analytic_decomposition() {
        let node = GearboxNode::parse("GB(HZTHZTHZTH, C*2(H T H))").unwrap();
        let (tot, _) = analytic_plan_mean(&node).unwrap();
        let want = (4.0 + 6.0 + 2.0 * expected_n(&pi8(), 2).unwrap()) / node.success_prob().unwrap();
        assert!((tot - want).abs() < 1e-9);
        assert!((tot - 21.294).abs() < 1e-2);
    }
}
