//! Point-wise equivalence reports shared by the circuit and MLP checks.

use rayon::prelude::*;
use serde::Serialize;

pub const MAX_WITNESSES: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub point: String,
    pub expected: String,
    pub got: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EquivReport {
    pub points: usize,
    pub matches: usize,
    pub mismatches: usize,
    /// The first mismatching points, in domain order.
    pub witnesses: Vec<Mismatch>,
    /// Set when the domain was empty, so a clean report proves nothing.
    pub empty_domain: bool,
}

impl EquivReport {
    /// Runs `check` on every point in parallel; aggregation keeps domain order.
    pub fn run<P, F>(points: &[P], check: F) -> EquivReport
    where
        P: Sync,
        F: Fn(&P) -> Option<Mismatch> + Sync,
    {
        let results: Vec<Option<Mismatch>> = points.par_iter().map(|p| check(p)).collect();
        let mut report = EquivReport { points: points.len(), empty_domain: points.is_empty(), ..Default::default() };
        for r in results {
            match r {
                None => report.matches += 1,
                Some(m) => {
                    report.mismatches += 1;
                    if report.witnesses.len() < MAX_WITNESSES {
                        report.witnesses.push(m);
                    }
                }
            }
        }
        report
    }

    pub fn passed(&self) -> bool {
        self.mismatches == 0 && !self.empty_domain
    }

    pub fn merge(&mut self, other: EquivReport) {
        self.points += other.points;
        self.matches += other.matches;
        self.mismatches += other.mismatches;
        for w in other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
        self.empty_domain = self.points == 0;
    }

    pub fn empty() -> EquivReport {
        EquivReport { empty_domain: true, ..Default::default() }
    }
}
