use std::fmt::Write as _;

use serde::Serialize;

use super::schedule::Mode;
use crate::stream::StreamKey;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    SuccessiveRejects,
    Uniform,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SuccessiveRejects => "successive-rejects",
            Self::Uniform => "uniform",
        }
    }
}

/// One phase: who was still in, their scores, who left.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRecord {
    /// 1-based phase index.
    pub phase: usize,
    pub survivors: Vec<usize>,
    /// Scores aligned with `survivors`.
    pub w: Vec<f64>,
    pub eliminated: Vec<usize>,
}

/// Full record of one identification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTranscript {
    pub mode: Mode,
    pub strategy: Strategy,
    pub selected: usize,
    pub phases: Vec<PhaseRecord>,
    pub copies_consumed: u64,
    pub total_budget: u64,
    /// Copies per basis (incoherent runs only).
    pub m: Option<usize>,
    pub key: StreamKey,
}

impl RunTranscript {
    pub fn overshoot(&self) -> u64 {
        self.copies_consumed.saturating_sub(self.total_budget)
    }

    /// Line-delimited record: a `#` metadata line, then one tab-separated
    /// line per phase with `phase, survivors, w values, eliminated`. Scores
    /// carry 17 significant digits.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        let m = self.m.map_or_else(|| "-".to_string(), |m| m.to_string());
        writeln!(
            out,
            "# mode={} strategy={} selected={} copies={} budget={} m={} seed={} cell={} trial={}",
            self.mode.name(),
            self.strategy.name(),
            self.selected,
            self.copies_consumed,
            self.total_budget,
            m,
            self.key.master_seed,
            self.key.cell,
            self.key.trial
        )
        .unwrap();
        for rec in &self.phases {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                rec.phase,
                join(rec.survivors.iter()),
                rec.w.iter().map(|w| format!("{w:.16e}")).collect::<Vec<_>>().join(","),
                join(rec.eliminated.iter())
            )
            .unwrap();
        }
        out
    }
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses the phase lines of [`RunTranscript::to_records`]; `#` lines are
/// skipped.
pub fn parse_phase_records(text: &str) -> Result<Vec<PhaseRecord>> {
    fn list<T: std::str::FromStr>(field: &str) -> Result<Vec<T>> {
        if field.is_empty() {
            return Ok(Vec::new());
        }
        field.split(',').map(|s| s.parse().map_err(|_| Error::InvalidArgument(format!("bad field {s:?}")))).collect()
    }
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::InvalidArgument(format!("expected 4 fields in {line:?}")));
            }
            let phase = fields[0].parse().map_err(|_| Error::InvalidArgument(format!("bad phase {:?}", fields[0])))?;
            Ok(PhaseRecord { phase, survivors: list(fields[1])?, w: list(fields[2])?, eliminated: list(fields[3])? })
        })
        .collect()
}
