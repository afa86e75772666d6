//! Seeded Monte Carlo estimation of event probabilities, critical-point
//! bisection and the staged-growth experiments.
//!
//! Trial `i` draws its sites from a ChaCha8 stream keyed by the master
//! seed with stream number `i`, one `u32` per site in row-major order. A
//! site is occupied iff its uniform is below `p · 2³²`, so for a fixed
//! trial the seed set is monotone in `p` (the standard coupling). Tallies
//! are plain sums, so results do not depend on the worker count.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::asymptotics::droplet_log_prob_bounds;
use crate::error::{Error, Result};
use crate::lattice::{ClosureWorkspace, EventKind, Grid, NeighbourhoodRule};
use crate::par;

/// Default per-trial cell budget.
pub const DEFAULT_CELL_BUDGET: u64 = 1 << 26;
/// Default cap on trials per bisection probe.
pub const DEFAULT_PROBE_CAP: u64 = 1 << 20;
/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

const CHUNK: u64 = 32;

/// An event on a `width × height` region at density `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub rule: NeighbourhoodRule,
    pub width: usize,
    pub height: usize,
    pub kind: EventKind,
    pub p: f64,
}

impl EventSpec {
    pub fn new(rule: NeighbourhoodRule, width: usize, height: usize, kind: EventKind, p: f64) -> Self {
        Self {
            rule,
            width,
            height,
            kind,
            p,
        }
    }

    pub fn with_p(&self, p: f64) -> Self {
        Self { p, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter(format!("p must lie in [0,1], got {}", self.p)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter("region must be non-empty".into()));
        }
        let cells = (self.width as u64 + 2) * (self.height as u64 + 1);
        if cells > DEFAULT_CELL_BUDGET {
            return Err(Error::InstanceTooLarge(format!(
                "{}x{} region exceeds the cell budget {DEFAULT_CELL_BUDGET}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub master_seed: u64,
    pub trials: u64,
    pub event: EventSpec,
    pub parallel_width: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: u64,
    pub successes: u64,
}

impl McEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(successes, trials);
        let p_hat = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        Self {
            p_hat,
            ci_lo: ci_lo.min(p_hat),
            ci_hi: ci_hi.max(p_hat),
            trials,
            successes,
        }
    }

    pub fn covers(&self, value: f64) -> bool {
        self.ci_lo <= value && value <= self.ci_hi
    }

    /// Binomial standard error of `p_hat`.
    pub fn std_err(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let ph = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (ph + z2 / (2.0 * n)) / denom;
    let half = Z95 * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Occupation threshold on `u32` uniforms: occupied iff `u < threshold`.
pub fn site_threshold(p: f64) -> u64 {
    (p.clamp(0.0, 1.0) * 4_294_967_296.0).round() as u64
}

/// The RNG of trial `index`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Bernoulli(`p`) seeds on a `width × height` grid for trial `index`.
pub fn sample_seeds(width: usize, height: usize, p: f64, master_seed: u64, index: u64) -> Grid {
    let mut g = Grid::bounded(width, height);
    fill_seeds(&mut g, (0, 0), width, height, site_threshold(p), &mut trial_rng(master_seed, index));
    g
}

fn fill_seeds(g: &mut Grid, origin: (usize, usize), w: usize, h: usize, threshold: u64, rng: &mut ChaCha8Rng) {
    for y in 0..h {
        for x in 0..w {
            if (rng.next_u32() as u64) < threshold {
                g.set(origin.0 + x, origin.1 + y, true);
            }
        }
    }
}

/// Whether the event holds in trial `index`.
pub fn trial_outcome(event: &EventSpec, master_seed: u64, index: u64, ws: &mut ClosureWorkspace) -> bool {
    let layout = event.kind.layout(event.width, event.height);
    let mut g = layout.blank();
    fill_seeds(
        &mut g,
        layout.origin,
        event.width,
        event.height,
        site_threshold(event.p),
        &mut trial_rng(master_seed, index),
    );
    ws.fills(&g, &event.rule)
}

/// Successes among trials `start..end`.
pub fn tally(event: &EventSpec, master_seed: u64, start: u64, end: u64) -> u64 {
    let chunks = (end.saturating_sub(start)).div_ceil(CHUNK);
    par::map_reduce(
        chunks as usize,
        || 0u64,
        |c| {
            let mut ws = ClosureWorkspace::new();
            let lo = start + c as u64 * CHUNK;
            let hi = (lo + CHUNK).min(end);
            (lo..hi)
                .filter(|&i| trial_outcome(event, master_seed, i, &mut ws))
                .count() as u64
        },
        |a, b| a + b,
    )
}

pub fn estimate_event(plan: &TrialPlan) -> Result<McEstimate> {
    if plan.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    plan.event.validate()?;
    let successes = par::with_workers(plan.parallel_width, || {
        tally(&plan.event, plan.master_seed, 0, plan.trials)
    });
    Ok(McEstimate::from_counts(successes, plan.trials))
}

/// JSON-lines record of one estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub event: String,
    pub p: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub width: usize,
    pub height: usize,
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

impl EstimateRecord {
    pub fn new(event: &EventSpec, est: &McEstimate, seed: u64) -> Self {
        Self {
            event: event.kind.name().to_string(),
            p: event.p,
            l: event.width.max(event.height),
            width: event.width,
            height: event.height,
            trials: est.trials,
            successes: est.successes,
            p_hat: est.p_hat,
            ci_lo: est.ci_lo,
            ci_hi: est.ci_hi,
            seed,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Parameters of a critical-point bisection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcSearch {
    pub l: usize,
    pub rule: NeighbourhoodRule,
    pub target: f64,
    pub trials_per_probe: u64,
    pub max_trials_per_probe: u64,
    pub tol: f64,
    pub master_seed: u64,
    pub parallel_width: usize,
}

impl PcSearch {
    pub fn new(l: usize, rule: NeighbourhoodRule) -> Self {
        Self {
            l,
            rule,
            target: 0.5,
            trials_per_probe: 64,
            max_trials_per_probe: DEFAULT_PROBE_CAP,
            tol: 1e-3,
            master_seed: 0,
            parallel_width: par::default_workers(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeDecision {
    /// CI entirely below the target: `p` is subcritical, raise the bracket.
    Below,
    /// CI entirely above the target.
    Above,
    /// Trial cap reached with the CI still straddling the target; decided
    /// by the point estimate.
    CappedBelow,
    CappedAbove,
}

impl ProbeDecision {
    pub fn is_capped(self) -> bool {
        matches!(self, Self::CappedBelow | Self::CappedAbove)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
    pub estimate: McEstimate,
    pub decision: ProbeDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcResult {
    pub p_c: f64,
    pub lo: f64,
    pub hi: f64,
    pub probes: Vec<Probe>,
    /// Some probe hit the trial cap.
    pub capped: bool,
    /// The probe that set the final bracket hit the cap.
    pub budget_exhausted: bool,
}

impl PcResult {
    /// Probe log as CSV.
    pub fn probe_csv(&self) -> String {
        let mut s = String::from("p,lo,hi,trials,successes,p_hat,ci_lo,ci_hi,decision\n");
        for pr in &self.probes {
            let e = &pr.estimate;
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                pr.p,
                pr.lo,
                pr.hi,
                e.trials,
                e.successes,
                e.p_hat,
                e.ci_lo,
                e.ci_hi,
                serde_json::to_value(pr.decision).unwrap().as_str().unwrap()
            ));
        }
        s
    }
}

/// Bisection for the `p` at which `P_p([L]² internally filled)` crosses
/// `target`. Every probe reuses trial streams `0..n`, so successive
/// probes see the same uniform field (common random numbers).
pub fn find_pc(search: &PcSearch) -> Result<PcResult> {
    if !(search.target > 0.0 && search.target < 1.0) {
        return Err(Error::InvalidParameter(format!("target must lie in (0,1), got {}", search.target)));
    }
    if !(search.tol > 0.0) || search.trials_per_probe == 0 || search.l == 0 {
        return Err(Error::InvalidParameter("tol, trials_per_probe and L must be positive".into()));
    }
    let base = EventSpec::new(search.rule.clone(), search.l, search.l, EventKind::InternallyFilled, 0.0);
    base.validate()?;
    let cap = search.max_trials_per_probe.max(search.trials_per_probe);
    par::with_workers(search.parallel_width, || {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut probes = Vec::new();
        let mut last_capped = false;
        while hi - lo > search.tol {
            let p = 0.5 * (lo + hi);
            let event = base.with_p(p);
            let mut n = search.trials_per_probe;
            let mut successes = tally(&event, search.master_seed, 0, n);
            let decision = loop {
                let est = McEstimate::from_counts(successes, n);
                if est.ci_hi < search.target {
                    break ProbeDecision::Below;
                }
                if est.ci_lo > search.target {
                    break ProbeDecision::Above;
                }
                if n >= cap {
                    break if est.p_hat < search.target {
                        ProbeDecision::CappedBelow
                    } else {
                        ProbeDecision::CappedAbove
                    };
                }
                let next = (2 * n).min(cap);
                successes += tally(&event, search.master_seed, n, next);
                n = next;
            };
            probes.push(Probe {
                p,
                lo,
                hi,
                estimate: McEstimate::from_counts(successes, n),
                decision,
            });
            last_capped = decision.is_capped();
            match decision {
                ProbeDecision::Below | ProbeDecision::CappedBelow => lo = p,
                ProbeDecision::Above | ProbeDecision::CappedAbove => hi = p,
            }
        }
        Ok(PcResult {
            p_c: 0.5 * (lo + hi),
            lo,
            hi,
            capped: probes.iter().any(|pr| pr.decision.is_capped()),
            budget_exhausted: last_capped,
            probes,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonWindow {
    pub eps: f64,
    pub p_eps: PcResult,
    pub p_one_minus_eps: PcResult,
}

impl EpsilonWindow {
    pub fn width(&self) -> f64 {
        self.p_one_minus_eps.p_c - self.p_eps.p_c
    }
}

/// `p` values where the fill probability crosses `eps` and `1 − eps`.
pub fn epsilon_window(search: &PcSearch, eps: f64) -> Result<EpsilonWindow> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1/2], got {eps}")));
    }
    let lower = find_pc(&PcSearch {
        target: eps,
        ..search.clone()
    })?;
    let upper = find_pc(&PcSearch {
        target: 1.0 - eps,
        ..search.clone()
    })?;
    Ok(EpsilonWindow {
        eps,
        p_eps: lower,
        p_one_minus_eps: upper,
    })
}

/// One step of the staged-growth trajectory `x_ℓ = ⌈e^{3ℓp}/(3p)⌉`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthStage {
    pub ell: usize,
    pub x: usize,
    pub x_next: usize,
    /// `P([x_ℓ]×[ℓ] ⇒ [x_{ℓ+1}]×[ℓ])`.
    pub horizontal: McEstimate,
    /// `P([x_ℓ]×[ℓ] ⇒ [x_ℓ]×[ℓ+1])`.
    pub vertical: McEstimate,
    /// `(8p²x_ℓ/(5e))` when `8p²x_ℓ/5 ≤ 1`.
    pub vertical_bound: Option<f64>,
    /// In the middle third of the trajectory.
    pub mid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagedGrowth {
    pub p: f64,
    /// Last height `m = ⌈(1/3p) ln(3/p)⌉`.
    pub m: usize,
    pub trials: u64,
    pub stages: Vec<GrowthStage>,
}

/// Trajectory width at height `ell`.
pub fn trajectory_width(p: f64, ell: usize) -> f64 {
    (3.0 * ell as f64 * p).exp() / (3.0 * p)
}

/// Runs the horizontal and vertical one-step growth events along the
/// trajectory for `ℓ = 1..m`. A horizontal step is a horizontal traversal
/// of the new `(x_{ℓ+1} − x_ℓ) × ℓ` strip; a vertical step an upward
/// traversal of the new `x_ℓ × 1` row.
pub fn staged_growth_experiment(p: f64, trials: u64, master_seed: u64, budget: u64) -> Result<StagedGrowth> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0,1], got {p}")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let m = if p >= 1.0 {
        1
    } else {
        (((3.0 / p).ln() / (3.0 * p)).ceil() as usize).max(1)
    };
    let xs: Vec<usize> = (1..=m + 1)
        .map(|l| trajectory_width(p, l).ceil().max(1.0) as usize)
        .collect();
    let cells = xs[m] as u64 * (m as u64 + 1);
    if !xs.iter().all(|&x| x < usize::MAX / 4) || cells > budget {
        return Err(Error::TrajectoryTooLarge { cells, budget });
    }
    let rule = NeighbourhoodRule::anisotropic_12();
    let mut stages = Vec::with_capacity(m);
    for ell in 1..=m {
        let (x, x_next) = (xs[ell - 1], xs[ell]);
        let horizontal = if x_next > x {
            let ev = EventSpec::new(rule.clone(), x_next - x, ell, EventKind::HorTrav, p);
            estimate_event(&TrialPlan {
                master_seed,
                trials,
                event: ev,
                parallel_width: par::default_workers(),
            })?
        } else {
            McEstimate::from_counts(trials, trials)
        };
        let ev = EventSpec::new(rule.clone(), x, 1, EventKind::UpTrav, p);
        let vertical = estimate_event(&TrialPlan {
            master_seed: master_seed ^ 0x9e37_79b9_7f4a_7c15,
            trials,
            event: ev,
            parallel_width: par::default_workers(),
        })?;
        let r = 8.0 * p * p * x as f64 / 5.0;
        stages.push(GrowthStage {
            ell,
            x,
            x_next,
            horizontal,
            vertical,
            vertical_bound: (r <= 1.0).then(|| r / std::f64::consts::E),
            mid: 3 * ell > m && 3 * ell <= 2 * m,
        });
    }
    Ok(StagedGrowth { p, m, trials, stages })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropletRow {
    pub p: f64,
    pub estimate: McEstimate,
    /// `ln p̂`; `None` when there were no successes.
    pub log_p_hat: Option<f64>,
    /// `ln` of the Wilson upper limit; a bound on the exponent when there
    /// were no successes.
    pub log_ci_hi: f64,
    /// Two-term exponent, when `p < 1/e`.
    pub two_term: Option<f64>,
    pub ratio: Option<f64>,
    pub zero_successes: bool,
}

/// Estimates `ln P(x × y internally filled)` for each `p`.
pub fn droplet_if_scan(p_list: &[f64], x: usize, y: usize, trials: u64, master_seed: u64) -> Result<Vec<DropletRow>> {
    let rule = NeighbourhoodRule::anisotropic_12();
    p_list
        .iter()
        .map(|&p| {
            let est = estimate_event(&TrialPlan {
                master_seed,
                trials,
                event: EventSpec::new(rule.clone(), x, y, EventKind::InternallyFilled, p),
                parallel_width: par::default_workers(),
            })?;
            let log_p_hat = (est.successes > 0).then(|| est.p_hat.ln());
            let two_term = droplet_log_prob_bounds(p).ok().map(|b| b.0);
            let ratio = match (log_p_hat, two_term) {
                (Some(a), Some(b)) if b != 0.0 => Some(a / b),
                _ => None,
            };
            Ok(DropletRow {
                p,
                estimate: est,
                log_p_hat,
                log_ci_hi: est.ci_hi.ln(),
                two_term,
                ratio,
                zero_successes: est.successes == 0,
            })
        })
        .collect()
}
