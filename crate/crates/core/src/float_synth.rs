//! Floating-point synthesis of small X rotations: a Clifford multiple of
//! π/4, an exponent set D realized by composed HTH gearboxes, and a
//! mantissa unitary U_m, all combined in one gearbox
//! GB(U_m, C*D₁(HTH), …, C*D_d(HTH)).

use std::f64::consts::FRAC_PI_4;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::columns::{ColumnBfs, MAX_T_HARD_CAP};
use crate::cost::{simulate_plan, AncillaMode, CostStats};
use crate::error::{Error, Result};
use crate::exact::GateWord;
use crate::gearbox::{d_of_weight, gearbox_angle_from_log2_sin_sq, log2_sin_phi_of_d, Angle, GearboxNode};

/// φ_in = kπ/4 + φ_rem with φ_rem ∈ [0, π/4).
pub fn decompose_angle(phi_in: f64) -> Result<(i64, f64)> {
    if !phi_in.is_finite() {
        return Err(Error::InvalidInput(format!("angle {phi_in} is not finite")));
    }
    let k = (phi_in / FRAC_PI_4).floor();
    let rem = (phi_in - k * FRAC_PI_4).clamp(0.0, FRAC_PI_4);
    if rem >= FRAC_PI_4 {
        return Ok((k as i64 + 1, 0.0));
    }
    Ok((k as i64, rem))
}

/// (γ, α) with φ = α·10^{−γ}, γ = max(0, ⌈−log₁₀ φ⌉).
pub fn gamma_alpha(phi: f64) -> (i32, f64) {
    if phi <= 0.0 {
        return (0, 0.0);
    }
    let gamma = (-phi.log10()).ceil().max(0.0) as i32;
    (gamma, phi * 10f64.powi(gamma))
}

/// log₂ sqrt(tan φ/(1 + tan φ)), the lower bound on sin φ(D).
fn log2_feasibility_bound(phi: &Angle) -> f64 {
    let lt = phi.log2_tan();
    0.5 * (lt - lt.exp2().ln_1p() / std::f64::consts::LN_2)
}

/// Largest even weight w with sin φ(D(w)) ≥ 2^`log2_bound`.
fn select_weight(log2_bound: f64) -> Result<Option<u64>> {
    const SLACK: f64 = 1e-12;
    let lt = std::f64::consts::FRAC_PI_8.tan().log2();
    // log₂ sin φ(D(w)) ≤ w·log₂ tan(π/8), so nothing above this is feasible
    let top = (log2_bound / lt).floor().min(1e18);
    if top < 2.0 {
        return Ok(None);
    }
    let mut w = (top as u64) & !1;
    if w >= 1 << 62 {
        return Err(Error::Resource("rotation too small for a 62-bit exponent weight".into()));
    }
    while w >= 2 {
        if log2_sin_phi_of_d(&d_of_weight(w)?)? >= log2_bound - SLACK {
            return Ok(Some(w));
        }
        w -= 2;
    }
    Ok(None)
}

/// Exponent set with the smallest φ(D) still satisfying
/// sin φ(D) ≥ sqrt(tan φ_rem/(1 + tan φ_rem)). An empty set is returned
/// (φ(∅) = π/2) when even D = [1] is infeasible.
pub fn select_exponent(phi_rem: f64) -> Result<(Vec<u32>, Angle)> {
    if !(phi_rem > 0.0 && phi_rem < FRAC_PI_4) {
        return Err(Error::InvalidInput(format!("φ_rem = {phi_rem} outside (0, π/4)")));
    }
    let bound = log2_feasibility_bound(&Angle::from_radians(phi_rem));
    match select_weight(bound)? {
        Some(w) => {
            let d = d_of_weight(w)?;
            let phi_d = Angle::asin_of_log2(log2_sin_phi_of_d(&d)?);
            Ok((d, phi_d))
        }
        None => Ok((Vec::new(), Angle::from_radians(std::f64::consts::FRAC_PI_2))),
    }
}

fn log2_sin_of(d_set: &[u32]) -> Result<f64> {
    if d_set.is_empty() {
        Ok(0.0)
    } else {
        log2_sin_phi_of_d(d_set)
    }
}

/// |u_m| = sqrt(sin φ_rem/(cos φ_rem + sin φ_rem))/sin φ_D and
/// φ̃ = sin⁻¹|u_m|.
pub fn mantissa_target(phi_rem: f64, log2_sin_phi_d: f64) -> Result<(f64, f64)> {
    if !(phi_rem > 0.0 && phi_rem < FRAC_PI_4) {
        return Err(Error::InvalidInput(format!("φ_rem = {phi_rem} outside (0, π/4)")));
    }
    let l = log2_feasibility_bound(&Angle::from_radians(phi_rem)) - log2_sin_phi_d;
    if l > 1e-9 {
        return Err(Error::InvalidInput("exponent set is infeasible for this remainder".into()));
    }
    let t = l.min(0.0).exp2();
    Ok((t, t.asin()))
}

/// tan⁻¹(tan²(sin⁻¹(|u_m|·sin φ_D))), the rotation applied on success.
pub fn realized_angle(mag: f64, log2_sin_phi_d: f64) -> Result<Angle> {
    if !(0.0..=1.0).contains(&mag) {
        return Err(Error::InvalidInput(format!("|u_m| = {mag} outside [0,1]")));
    }
    gearbox_angle_from_log2_sin_sq(2.0 * (mag.log2() + log2_sin_phi_d))
}

/// Result of the bounded approximate-synthesis oracle.
#[derive(Clone, Debug, Serialize)]
pub struct Approximation {
    pub word: String,
    pub abs_u: f64,
    pub tcount: usize,
    /// | |u| − target | of the returned word.
    pub achieved_delta: f64,
    /// Whether the requested tolerance was met.
    pub within: bool,
}

impl Approximation {
    pub fn gate_word(&self) -> GateWord {
        GateWord::parse(&self.word).expect("oracle words always parse")
    }
}

fn column_bfs(max_t: usize) -> Result<Arc<ColumnBfs>> {
    static CACHE: Mutex<Option<Arc<ColumnBfs>>> = Mutex::new(None);
    let mut guard = CACHE.lock().map_err(|_| Error::Invariant("column cache poisoned".into()))?;
    if let Some(b) = guard.as_ref() {
        if b.max_t() >= max_t {
            return Ok(b.clone());
        }
    }
    let b = Arc::new(ColumnBfs::new(max_t)?);
    *guard = Some(b.clone());
    Ok(b)
}

/// Minimal-T word with | |u₁₀| − target | ≤ δ among all Clifford+T unitaries
/// with at most `max_t` T gates. When none qualifies the closest word is
/// returned with `within = false`.
pub fn approx_synthesize(target: f64, delta: f64, max_t: usize) -> Result<Approximation> {
    if target.is_nan() || target <= 0.0 || target > 1.0 {
        return Err(Error::InvalidInput(format!("target {target} outside (0, 1]")));
    }
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidInput("δ must be non-negative".into()));
    }
    if max_t > MAX_T_HARD_CAP {
        return Err(Error::Resource(format!("approximate synthesis beyond {MAX_T_HARD_CAP} T gates is not supported")));
    }
    let bfs = column_bfs(max_t)?;
    let mut best: Option<(f64, usize, usize)> = None;
    for t in 0..=max_t {
        let mut layer_best: Option<(f64, usize)> = None;
        for e in bfs.layer(t) {
            let dev = (e.abs - target).abs();
            if layer_best.is_none_or(|(d, _)| dev < d) {
                layer_best = Some((dev, e.index));
            }
        }
        let Some((dev, index)) = layer_best else { continue };
        if best.is_none_or(|(d, _, _)| dev < d) {
            best = Some((dev, index, t));
        }
        if dev <= delta + 1e-12 {
            break;
        }
    }
    let (dev, index, t) = best.ok_or_else(|| Error::Invariant("empty column enumeration".into()))?;
    let word = bfs.word(index);
    let abs_u = word.eval().entry(1, 0).abs();
    Ok(Approximation { word: word.to_string(), abs_u, tcount: t, achieved_delta: dev, within: dev <= delta + 1e-12 })
}

/// How the mantissa unitary is obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum MantissaSource {
    /// Bounded exhaustive oracle with this many T gates at most.
    Oracle { max_t: usize },
    /// A given word.
    Fixed(GateWord),
    /// The exact ideal magnitude; no circuit, so no cost sampling.
    Ideal,
}

#[derive(Clone, Debug)]
pub struct FloatOptions {
    pub mantissa: MantissaSource,
    pub trials: usize,
    pub seed: u64,
}

impl Default for FloatOptions {
    fn default() -> Self {
        FloatOptions { mantissa: MantissaSource::Oracle { max_t: 12 }, trials: 0, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FloatingPlan {
    pub phi_in: f64,
    pub k: i64,
    pub phi_rem: f64,
    pub gamma: i32,
    pub alpha: f64,
    pub delta: f64,
    #[serde(rename = "D")]
    pub d_set: Vec<u32>,
    pub phi_d: f64,
    pub log2_sin_phi_d: f64,
    pub target_mag: f64,
    pub phi_tilde: f64,
    pub mantissa_word: Option<String>,
    pub mantissa_mag: f64,
    /// Whether the oracle met the requested tolerance.
    pub mantissa_within: bool,
    pub realized_angle: f64,
    pub log2_inv_realized: f64,
    pub relative_error: f64,
    /// The exponent set is empty because even D = [1] was infeasible.
    pub empty_exponent: bool,
    pub node: Option<String>,
    pub static_tcount: u64,
}

impl FloatingPlan {
    pub fn gearbox(&self) -> Result<Option<GearboxNode>> {
        self.node.as_deref().map(GearboxNode::parse).transpose()
    }
}

fn plan_node(word: &GateWord, d_set: &[u32]) -> Result<GearboxNode> {
    let hth = GearboxNode::leaf("H T H")?;
    let mut ch = vec![GearboxNode::Leaf(word.clone())];
    ch.extend(d_set.iter().map(|&j| GearboxNode::composed(hth.clone(), j)));
    let node = GearboxNode::Gearbox(ch);
    node.validate()?;
    Ok(node)
}

/// The relative error |realized − φ_rem|/φ_rem, computed in log space.
fn relative_error(realized: &Angle, phi_rem: &Angle) -> f64 {
    if realized.is_zero() {
        return 1.0;
    }
    ((phi_rem.log2_inv - realized.log2_inv).exp2() - 1.0).abs()
}

/// Assemble a floating-point plan for e^{−iφ_in X} with relative mantissa
/// precision δ; when `trials > 0` and a circuit exists, its T-count is
/// sampled.
pub fn synthesize_floating(phi_in: f64, delta: f64, opts: &FloatOptions) -> Result<(FloatingPlan, Option<CostStats>)> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidInput("δ must be positive".into()));
    }
    let (k, phi_rem) = decompose_angle(phi_in)?;
    let (gamma, alpha) = gamma_alpha(phi_rem);
    let mut plan = FloatingPlan {
        phi_in,
        k,
        phi_rem,
        gamma,
        alpha,
        delta,
        d_set: Vec::new(),
        phi_d: 0.0,
        log2_sin_phi_d: 0.0,
        target_mag: 0.0,
        phi_tilde: 0.0,
        mantissa_word: None,
        mantissa_mag: 0.0,
        mantissa_within: true,
        realized_angle: 0.0,
        log2_inv_realized: f64::INFINITY,
        relative_error: 0.0,
        empty_exponent: false,
        node: None,
        static_tcount: 0,
    };
    // Clifford-only when within δ·|φ_in| of a multiple of π/4
    let near = phi_rem.min(FRAC_PI_4 - phi_rem);
    if phi_rem == 0.0 || near <= delta * phi_in.abs() {
        if phi_rem > FRAC_PI_4 / 2.0 {
            plan.k += 1;
        }
        // relative to the whole input angle, since nothing remains to rotate
        plan.relative_error = if near == 0.0 { 0.0 } else { near / phi_in.abs() };
        plan.phi_rem = 0.0;
        return Ok((plan, None));
    }

    let (d_set, phi_d) = select_exponent(phi_rem)?;
    let ls = log2_sin_of(&d_set)?;
    let (target, phi_tilde) = mantissa_target(phi_rem, ls)?;
    plan.empty_exponent = d_set.is_empty();
    plan.phi_d = phi_d.radians;
    plan.log2_sin_phi_d = ls;
    plan.target_mag = target;
    plan.phi_tilde = phi_tilde;

    let word = match &opts.mantissa {
        MantissaSource::Ideal => None,
        MantissaSource::Fixed(w) => Some(w.clone()),
        MantissaSource::Oracle { max_t } => {
            let a = approx_synthesize(target, delta * target, *max_t)?;
            if !a.within {
                log::warn!("mantissa oracle reached {:.3e} instead of {:.3e}", a.achieved_delta, delta * target);
            }
            plan.mantissa_within = a.within;
            Some(a.gate_word())
        }
    };
    let mag = match &word {
        Some(w) => w.eval().entry(1, 0).abs(),
        None => target,
    };
    plan.mantissa_mag = mag;
    let realized = realized_angle(mag, ls)?;
    plan.realized_angle = realized.radians;
    plan.log2_inv_realized = realized.log2_inv;
    plan.relative_error = relative_error(&realized, &Angle::from_radians(phi_rem));
    plan.d_set = d_set;

    let mut stats = None;
    if let Some(w) = &word {
        let node = plan_node(w, &plan.d_set)?;
        plan.static_tcount = node.static_tcount();
        if opts.trials > 0 {
            stats = Some(simulate_plan(&node, opts.trials, opts.seed, AncillaMode::Online)?);
        }
        plan.mantissa_word = Some(w.to_string());
        plan.node = Some(node.to_string());
    }
    Ok((plan, stats))
}

/// Constants of the asymptotic cost predictors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PredictorConstants {
    /// Additive constant of the mean T-count.
    pub c: f64,
    /// Slope in log₂(10^γ).
    pub slope: f64,
    /// Additive constant of the T-depth bound.
    pub k_depth: f64,
}

impl Default for PredictorConstants {
    fn default() -> Self {
        PredictorConstants { c: 8.2, slope: 1.14, k_depth: 24.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostPrediction {
    pub mean_tcount: f64,
    pub tdepth_bound: f64,
    /// δ ≥ (10^{−γ})^{143/200}: the mantissa precision is coarse enough for
    /// the floating-point method to beat direct synthesis.
    pub crossover_ok: bool,
    #[serde(rename = "D")]
    pub d_set: Vec<u32>,
}

/// Asymptotic mean T-count 8·log₂(1/δ) + slope·log₂(10^γ) + C and T-depth
/// bound 2·max D_j + 8·log₂(1/δ) + 2⌊log₂ d + 1⌋ + K for φ = 10^{−γ}.
pub fn predicted_cost(gamma: f64, delta: f64, k: &PredictorConstants) -> Result<CostPrediction> {
    if gamma.is_nan() || gamma < 0.0 || delta.is_nan() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidInput("need γ ≥ 0 and δ ∈ (0, 1)".into()));
    }
    let l10 = std::f64::consts::LOG2_10;
    let inv_delta = -delta.log2();
    let mean = 8.0 * inv_delta + k.slope * gamma * l10 + k.c;
    // log₂ tan φ ≈ log₂ φ for φ = 10^{−γ}
    let phi = Angle { radians: 10f64.powf(-gamma), log2_inv: gamma * l10, tan_power: None };
    let d_set = if gamma * l10 < 1.0 {
        Vec::new()
    } else {
        match select_weight(log2_feasibility_bound(&phi))? {
            Some(w) => d_of_weight(w)?,
            None => Vec::new(),
        }
    };
    let max_d = d_set.last().copied().unwrap_or(0) as f64;
    let d = d_set.len() as f64;
    let ctrl = if d >= 1.0 { 2.0 * (d.log2() + 1.0).floor() } else { 0.0 };
    let tdepth = 2.0 * max_d + 8.0 * inv_delta + ctrl + k.k_depth;
    let boundary = -gamma * 143.0 / 200.0 * 10f64.log2();
    let crossover_ok = delta.log2() >= boundary - 1e-12;
    Ok(CostPrediction { mean_tcount: mean, tdepth_bound: tdepth, crossover_ok, d_set })
}
