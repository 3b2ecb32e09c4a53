//! Successive-rejects identification of the purest state.
//!
//! Both drivers share one elimination engine ([`successive_rejects`]): in
//! phase `k` every survivor is topped up to its cumulative allotment, scored
//! on everything collected so far, and the lowest score leaves. They differ
//! only in what an allotment unit is and how it is scored:
//!
//! - incoherent: a unit is one Haar-random basis, measured `m` times per
//!   survivor and scored with the collision statistic;
//! - coherent: a unit is one SWAP test (two copies), scored by its accept bit.

mod schedule;
mod theory;
mod transcript;

pub use schedule::{phase_budgets, BudgetPolicy, BudgetSchedule, Mode};
pub use theory::{theoretical_exponents, theoretical_exponents_for, ExponentReport};
pub use transcript::{parse_phase_records, PhaseRecord, RunTranscript, Strategy};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::estimate::collision_from_counts;
use crate::measure::{swap_test_sample, Categorical, RotatedBasis, SpectralState};
use crate::qcore::{sample_haar_unitary, StateEnsemble};
use crate::stream::{fork, StreamKey};
use crate::{Error, Result};
pub(crate) use schedule::robust_ceil;
use schedule::{clamp_final_phase, successive_rejects_cost};

/// Source of cumulative per-arm scores for the elimination engine.
pub trait ArmScores {
    /// Brings `arm` up to `target` allotment units (never fewer than it
    /// already has) and returns its score over all units so far.
    fn advance(&mut self, arm: usize, target: u64) -> Result<f64>;
}

/// Runs successive rejects over arms `0..k_arms` with cumulative allotments
/// `targets` (one per phase, `k_arms - 1` phases). Each phase removes the
/// survivor with the smallest score; ties remove the lowest index.
pub fn successive_rejects<S: ArmScores + ?Sized>(
    k_arms: usize,
    targets: &[u64],
    scores: &mut S,
) -> Result<(usize, Vec<PhaseRecord>)> {
    if targets.len() + 1 != k_arms {
        return Err(Error::InvalidArgument(format!("{} phase targets for {k_arms} arms", targets.len())));
    }
    let mut survivors: Vec<usize> = (0..k_arms).collect();
    let mut phases = Vec::with_capacity(targets.len());
    for (idx, &target) in targets.iter().enumerate() {
        let w = survivors.iter().map(|&arm| scores.advance(arm, target)).collect::<Result<Vec<f64>>>()?;
        let pos = argmin_lowest(&w);
        let eliminated = survivors[pos];
        phases.push(PhaseRecord { phase: idx + 1, survivors: survivors.clone(), w, eliminated: vec![eliminated] });
        survivors.remove(pos);
    }
    Ok((survivors[0], phases))
}

fn argmin_lowest(w: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in w.iter().enumerate().skip(1) {
        if *v < w[best] {
            best = i;
        }
    }
    best
}

fn argmax_lowest(w: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in w.iter().enumerate().skip(1) {
        if *v > w[best] {
            best = i;
        }
    }
    best
}

/// Collision scores over a shared, lazily drawn sequence of Haar bases.
///
/// Basis `j` is the `j`-th draw from a dedicated stream, so the bases are
/// the same whether they are drawn up front or on first use; drawing lazily
/// skips the tail of bases the schedule never reaches.
struct CollisionScores {
    states: Vec<SpectralState>,
    dim: usize,
    m: usize,
    bases: Vec<RotatedBasis>,
    basis_rng: ChaCha8Rng,
    outcome_rng: ChaCha8Rng,
    sums: Vec<f64>,
    counts: Vec<u64>,
    buckets: Vec<u64>,
}

impl CollisionScores {
    fn new(ens: &StateEnsemble, m: usize, key: StreamKey) -> Self {
        let mut rng = key.rng();
        let basis_rng = fork(&mut rng);
        let outcome_rng = fork(&mut rng);
        Self {
            states: ens.states().iter().map(SpectralState::new).collect(),
            dim: ens.dim(),
            m,
            bases: Vec::new(),
            basis_rng,
            outcome_rng,
            sums: vec![0.0; ens.len()],
            counts: vec![0; ens.len()],
            buckets: vec![0; ens.dim()],
        }
    }

    fn ensure_bases(&mut self, count: usize) -> Result<()> {
        while self.bases.len() < count {
            let u = sample_haar_unitary(self.dim, &mut self.basis_rng)?;
            self.bases.push(RotatedBasis::new(u));
        }
        Ok(())
    }
}

impl ArmScores for CollisionScores {
    fn advance(&mut self, arm: usize, target: u64) -> Result<f64> {
        self.ensure_bases(target as usize)?;
        for j in self.counts[arm]..target {
            let dist = self.states[arm].distribution(&self.bases[j as usize])?;
            let cat = Categorical::new(&dist);
            self.buckets.iter_mut().for_each(|b| *b = 0);
            for _ in 0..self.m {
                self.buckets[cat.sample(&mut self.outcome_rng)] += 1;
            }
            self.sums[arm] += collision_from_counts(&self.buckets, self.m).g_tilde;
        }
        self.counts[arm] = self.counts[arm].max(target);
        Ok(mean_or_zero(self.sums[arm], self.counts[arm]))
    }
}

/// SWAP-test accept frequencies.
struct SwapScores<'a> {
    purities: &'a [f64],
    rng: ChaCha8Rng,
    accepts: Vec<u64>,
    counts: Vec<u64>,
}

impl<'a> SwapScores<'a> {
    fn new(ens: &'a StateEnsemble, key: StreamKey) -> Self {
        Self { purities: ens.purities(), rng: key.rng(), accepts: vec![0; ens.len()], counts: vec![0; ens.len()] }
    }
}

impl ArmScores for SwapScores<'_> {
    fn advance(&mut self, arm: usize, target: u64) -> Result<f64> {
        // Float noise can put a purity a hair above 1.
        let z = self.purities[arm].min(1.0);
        for _ in self.counts[arm]..target {
            if swap_test_sample(z, &mut self.rng)? {
                self.accepts[arm] += 1;
            }
        }
        self.counts[arm] = self.counts[arm].max(target);
        Ok(mean_or_zero(self.accepts[arm] as f64, self.counts[arm]))
    }
}

fn mean_or_zero(sum: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Incoherent-measurement identification.
///
/// Phase `k` measures every survivor `m` times in each new basis
/// `⌊N_{k-1}/m⌋ < j ≤ ⌊N_k/m⌋` and scores it by the mean collision
/// statistic over all bases `1..=⌊N_k/m⌋`.
pub fn run_im_pqsi(
    ens: &StateEnsemble,
    n: u64,
    m: usize,
    key: StreamKey,
    policy: BudgetPolicy,
) -> Result<RunTranscript> {
    if m < 2 {
        return Err(Error::CopiesPerBasis(m));
    }
    let k = ens.len();
    if n <= (k * m) as u64 {
        return Err(Error::InsufficientBudget { budget: n, reason: format!("need more than K·m = {} copies", k * m) });
    }
    let schedule = phase_budgets(n, k, Mode::Incoherent)?;
    let mut targets: Vec<u64> = schedule.n_k.iter().map(|nk| nk / m as u64).collect();
    if targets[0] == 0 {
        return Err(Error::InsufficientBudget {
            budget: n,
            reason: format!("first phase allots {} copies, fewer than m = {m}", schedule.n_k[0]),
        });
    }
    if policy == BudgetPolicy::Strict {
        clamp_final_phase(k, &mut targets, m as u64, n)?;
    }
    let mut scores = CollisionScores::new(ens, m, key);
    let (selected, phases) = successive_rejects(k, &targets, &mut scores)?;
    Ok(RunTranscript {
        mode: Mode::Incoherent,
        strategy: Strategy::SuccessiveRejects,
        selected,
        phases,
        copies_consumed: successive_rejects_cost(k, &targets, m as u64),
        total_budget: n,
        m: Some(m),
        key,
    })
}

/// Coherent-measurement identification: `N_k − N_{k−1}` new SWAP tests per
/// survivor in phase `k`, scored by the accept frequency over all `N_k`.
pub fn run_cm_pqsi(ens: &StateEnsemble, n: u64, key: StreamKey, policy: BudgetPolicy) -> Result<RunTranscript> {
    let k = ens.len();
    if n <= 2 * k as u64 {
        return Err(Error::InsufficientBudget { budget: n, reason: format!("need more than 2K = {} copies", 2 * k) });
    }
    let mut targets = phase_budgets(n, k, Mode::Coherent)?.n_k;
    if policy == BudgetPolicy::Strict {
        clamp_final_phase(k, &mut targets, 2, n)?;
    }
    let mut scores = SwapScores::new(ens, key);
    let (selected, phases) = successive_rejects(k, &targets, &mut scores)?;
    Ok(RunTranscript {
        mode: Mode::Coherent,
        strategy: Strategy::SuccessiveRejects,
        selected,
        phases,
        copies_consumed: successive_rejects_cost(k, &targets, 2),
        total_budget: n,
        m: None,
        key,
    })
}

/// Control strategy: split `N` evenly, score every state once on its full
/// share and pick the highest score (ties go to the lowest index).
pub fn run_uniform_baseline(
    ens: &StateEnsemble,
    n: u64,
    mode: Mode,
    m: usize,
    key: StreamKey,
) -> Result<RunTranscript> {
    let k = ens.len() as u64;
    let unit_cost = match mode {
        Mode::Incoherent => {
            if m < 2 {
                return Err(Error::CopiesPerBasis(m));
            }
            m as u64
        }
        Mode::Coherent => 2,
    };
    let per_state = n / (k * unit_cost);
    if per_state == 0 {
        return Err(Error::InsufficientBudget {
            budget: n,
            reason: format!("cannot give each of {k} states one unit of {unit_cost} copies"),
        });
    }
    let w = match mode {
        Mode::Incoherent => {
            let mut s = CollisionScores::new(ens, m, key);
            (0..ens.len()).map(|a| s.advance(a, per_state)).collect::<Result<Vec<_>>>()?
        }
        Mode::Coherent => {
            let mut s = SwapScores::new(ens, key);
            (0..ens.len()).map(|a| s.advance(a, per_state)).collect::<Result<Vec<_>>>()?
        }
    };
    let selected = argmax_lowest(&w);
    let survivors: Vec<usize> = (0..ens.len()).collect();
    let eliminated = survivors.iter().copied().filter(|&a| a != selected).collect();
    Ok(RunTranscript {
        mode,
        strategy: Strategy::Uniform,
        selected,
        phases: vec![PhaseRecord { phase: 1, survivors, w, eliminated }],
        copies_consumed: k * unit_cost * per_state,
        total_budget: n,
        m: (mode == Mode::Incoherent).then_some(m),
        key,
    })
}

/// How `m` (copies per basis) is chosen for incoherent runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MPolicy {
    Fixed(usize),
    /// `m = ⌈1/√c⌉` for a caller-supplied gap floor `c`.
    SqrtC(f64),
    /// `m = d`.
    EqualD,
}

impl MPolicy {
    /// Resolves `m` for dimension `d`. The boolean reports whether the floor
    /// `m ≥ 2` had to be applied.
    pub fn resolve(&self, d: usize) -> Result<(usize, bool)> {
        let raw = match *self {
            Self::Fixed(m) => m,
            Self::SqrtC(c) => {
                if !(c > 0.0 && c <= 1.0) {
                    return Err(Error::InvalidArgument(format!("gap floor c = {c} not in (0, 1]")));
                }
                (1.0 / c.sqrt()).ceil() as usize
            }
            Self::EqualD => d,
        };
        Ok((raw.max(2), raw < 2))
    }
}

/// Draws one uniformly random index in `0..k`; used when a trial carries no
/// information about which arm is best.
pub(crate) fn uniform_choice<R: Rng + ?Sized>(k: usize, rng: &mut R) -> usize {
    rng.random_range(0..k)
}
