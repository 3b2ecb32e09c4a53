use serde::Serialize;

use crate::qcore::logbar;
use crate::{Error, Result};

/// Which measurement model a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    /// Single-copy measurements in Haar-random bases, scored by collisions.
    Incoherent,
    /// Two-copy SWAP tests.
    Coherent,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Incoherent => "incoherent",
            Self::Coherent => "coherent",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "incoherent" | "im" => Some(Self::Incoherent),
            "coherent" | "cm" => Some(Self::Coherent),
            _ => None,
        }
    }

    fn divisor(&self) -> f64 {
        match self {
            Self::Incoherent => 1.0,
            Self::Coherent => 2.0,
        }
    }
}

/// What to do when ceilings in the schedule push consumption past `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum BudgetPolicy {
    /// Run the schedule as written and record the overshoot.
    #[default]
    AllowOvershoot,
    /// Shorten the final phase so consumption never exceeds `N`.
    Strict,
}

/// Cumulative per-state allotments `N_1 ≤ … ≤ N_{K-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetSchedule {
    pub mode: Mode,
    pub n_k: Vec<u64>,
    pub logbar_k: f64,
    pub total_budget: u64,
}

/// Ceiling that snaps values within 1e-9 (relative) of an integer to it, so
/// rounding noise in `loḡ(K)` cannot bump an exact quotient up by one.
pub(crate) fn robust_ceil(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// `N_k = ⌈(1/(c·loḡK))·(N−K)/(K+1−k)⌉` with `c = 1` (incoherent) or
/// `c = 2` (coherent).
pub fn phase_budgets(n: u64, k_arms: usize, mode: Mode) -> Result<BudgetSchedule> {
    if k_arms < 2 {
        return Err(Error::TooFewStates(k_arms));
    }
    if n <= k_arms as u64 {
        return Err(Error::InsufficientBudget { budget: n, reason: format!("need more than K = {k_arms} copies") });
    }
    let lb = logbar(k_arms);
    let span = (n - k_arms as u64) as f64;
    let n_k = (1..k_arms).map(|k| robust_ceil(span / (mode.divisor() * lb * (k_arms + 1 - k) as f64))).collect();
    Ok(BudgetSchedule { mode, n_k, logbar_k: lb, total_budget: n })
}

/// Total cost of running `targets` (cumulative per-survivor allotments, one
/// per phase) when each unit costs `unit_cost` copies and phase `k` has
/// `K - k + 1` survivors.
pub(crate) fn successive_rejects_cost(k_arms: usize, targets: &[u64], unit_cost: u64) -> u64 {
    let mut prev = 0;
    let mut total = 0;
    for (idx, &t) in targets.iter().enumerate() {
        let survivors = (k_arms - idx) as u64;
        total += survivors * unit_cost * (t - prev);
        prev = t;
    }
    total
}

/// Shortens the last phase until the run fits in `budget` copies.
pub(crate) fn clamp_final_phase(k_arms: usize, targets: &mut [u64], unit_cost: u64, budget: u64) -> Result<()> {
    let cost = successive_rejects_cost(k_arms, targets, unit_cost);
    if cost <= budget {
        return Ok(());
    }
    let excess = cost - budget;
    // The final phase has two survivors.
    let per_unit = 2 * unit_cost;
    let cut = excess.div_ceil(per_unit);
    let last = targets.len() - 1;
    let floor = if last == 0 { 0 } else { targets[last - 1] };
    if targets[last] < floor + cut {
        return Err(Error::InsufficientBudget { budget, reason: "strict budget leaves the final phase empty".into() });
    }
    targets[last] -= cut;
    Ok(())
}
