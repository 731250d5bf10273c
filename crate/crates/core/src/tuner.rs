//! Scan of the tension parameter `p` for the smallest L∞ error at a target time.
//!
//! A coarse uniform grid over `[p_min, p_max]` is refined `refine_rounds` times
//! around the incumbent minimum, each round re-gridding one coarse cell on
//! either side. Candidates are independent solves and run in parallel; the
//! trace is always assembled in grid order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::ProblemSpec;
use crate::stepper::{run, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub p_min: f64,
    pub p_max: f64,
    pub coarse_count: usize,
    pub refine_rounds: usize,
    pub target_time: f64,
}

impl ScanSpec {
    pub const DEFAULT_P_MIN: f64 = 1e-4;
    pub const DEFAULT_P_MAX: f64 = 1e-2;
    pub const DEFAULT_COARSE_COUNT: usize = 50;
    pub const DEFAULT_REFINE_ROUNDS: usize = 3;

    pub fn new(target_time: f64) -> Self {
        Self {
            p_min: Self::DEFAULT_P_MIN,
            p_max: Self::DEFAULT_P_MAX,
            coarse_count: Self::DEFAULT_COARSE_COUNT,
            refine_rounds: Self::DEFAULT_REFINE_ROUNDS,
            target_time,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p_min > 0.0 && self.p_min <= self.p_max && self.p_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scan interval must satisfy 0 < p_min <= p_max, got [{}, {}]",
                self.p_min, self.p_max
            )));
        }
        if self.coarse_count < 3 {
            return Err(Error::InvalidParameter(format!(
                "coarse_count must be >= 3, got {}",
                self.coarse_count
            )));
        }
        Ok(())
    }
}

/// One evaluated candidate. `error` is `+∞` when the run failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub round: usize,
    pub p: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub best_p: f64,
    pub best_error: f64,
    /// All candidates, round by round, ascending in `p` within a round.
    pub trace: Vec<ScanPoint>,
}

/// L∞ error at `target_time` for tension `p`; `+∞` if the solve fails.
pub fn objective(problem: &ProblemSpec, template: &SolverConfig, p: f64, target_time: f64) -> f64 {
    let mut config = template.clone().with_p(p);
    config.t_end = target_time;
    config.snapshot_times = vec![target_time];
    match run(problem, &config) {
        Ok(snaps) => snaps
            .first()
            .and_then(|s| s.linf_error)
            .filter(|e| e.is_finite())
            .unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo];
    }
    let step = (hi - lo) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + i as f64 * step
            }
        })
        .collect()
}

fn evaluate(
    problem: &ProblemSpec,
    template: &SolverConfig,
    ps: &[f64],
    round: usize,
    target_time: f64,
) -> Vec<ScanPoint> {
    ps.par_iter()
        .map(|&p| ScanPoint {
            round,
            p,
            error: objective(problem, template, p, target_time),
        })
        .collect()
}

/// First point with the smallest finite error.
fn incumbent(trace: &[ScanPoint]) -> Option<ScanPoint> {
    trace
        .iter()
        .filter(|pt| pt.error.is_finite())
        .fold(None, |best: Option<ScanPoint>, pt| match best {
            Some(b) if b.error <= pt.error => Some(b),
            _ => Some(*pt),
        })
}

fn finish(trace: Vec<ScanPoint>) -> Result<ScanResult> {
    let best = incumbent(&trace).ok_or(Error::NoViableP)?;
    Ok(ScanResult {
        best_p: best.p,
        best_error: best.error,
        trace,
    })
}

/// Coarse-to-fine scan of `p`.
pub fn scan_p(
    problem: &ProblemSpec,
    template: &SolverConfig,
    spec: &ScanSpec,
) -> Result<ScanResult> {
    spec.validate()?;
    let mut trace = evaluate(
        problem,
        template,
        &linspace(spec.p_min, spec.p_max, spec.coarse_count),
        0,
        spec.target_time,
    );
    let mut cell = (spec.p_max - spec.p_min) / (spec.coarse_count - 1) as f64;
    for round in 1..=spec.refine_rounds {
        let Some(best) = incumbent(&trace) else { break };
        if cell == 0.0 {
            break;
        }
        let lo = (best.p - cell).max(spec.p_min);
        let hi = (best.p + cell).min(spec.p_max);
        let grid = linspace(lo, hi, spec.coarse_count);
        trace.extend(evaluate(problem, template, &grid, round, spec.target_time));
        cell = (hi - lo) / (spec.coarse_count - 1) as f64;
    }
    finish(trace)
}

/// Literal linear scan `p_min, p_min + step, …, ≤ p_max`.
pub fn scan_exhaustive(
    problem: &ProblemSpec,
    template: &SolverConfig,
    p_min: f64,
    p_max: f64,
    step: f64,
    target_time: f64,
) -> Result<ScanResult> {
    if !(p_min > 0.0 && p_min <= p_max && step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exhaustive scan needs 0 < p_min <= p_max and step > 0, got [{p_min}, {p_max}] step {step}"
        )));
    }
    let count = ((p_max - p_min) / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|i| p_min + i as f64 * step).collect();
    finish(evaluate(problem, template, &grid, 0, target_time))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(p: f64, error: f64) -> ScanPoint {
        ScanPoint { round: 0, p, error }
    }

    #[test]
    fn linspace_endpoints_are_exact() {
        let g = linspace(1e-4, 1e-2, 50);
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[49], 1e-2);
        assert_eq!(linspace(0.3, 0.3, 50), vec![0.3]);
    }

    #[test]
    fn incumbent_skips_divergent_and_prefers_first_tie() {
        let trace = [
            pt(1.0, f64::INFINITY),
            pt(2.0, 0.5),
            pt(3.0, 0.5),
            pt(4.0, 0.7),
        ];
        assert_eq!(incumbent(&trace).unwrap().p, 2.0);
        assert!(matches!(
            finish(vec![pt(1.0, f64::INFINITY)]),
            Err(Error::NoViableP)
        ));
    }

    #[test]
    fn spec_validation() {
        let mut s = ScanSpec::new(0.5);
        assert!(s.validate().is_ok());
        s.coarse_count = 2;
        assert!(s.validate().is_err());
        let mut s = ScanSpec::new(0.5);
        s.p_min = 0.0;
        assert!(s.validate().is_err());
    }
}
