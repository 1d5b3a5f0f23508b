use super::protocol::{AgentKind, AgentSpec, Protocol};
use super::runner::run_repeats;
use super::stats::{mean, variance};
use crate::{Error, Result};

/// One evaluated learning-rate combination.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub spec: AgentSpec,
    /// Mean over repetitions of each repetition's mean episode length.
    pub mean_steps: f64,
    /// Population std of the per-repetition means.
    pub std_steps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Index into `rows` of the lowest mean; ties go to the earlier row.
    pub best: usize,
}

impl SweepResult {
    pub fn best_row(&self) -> &SweepRow {
        &self.rows[self.best]
    }
}

/// Expands `base` into one spec per learning-rate combination.
///
/// SF agents take the cross product `primary × reward` (Ψ rate major);
/// Q agents take `primary` as `lr_q` and ignore `reward`.
pub fn learning_rate_grid(base: &AgentSpec, primary: &[f64], reward: &[f64]) -> Result<Vec<AgentSpec>> {
    if primary.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let mut out = Vec::new();
    match base.kind {
        AgentKind::FittedSf => {
            if reward.is_empty() {
                return Err(Error::Config("sweep grid needs at least one reward learning rate".into()));
            }
            for &lr_sf in primary {
                for &lr_reward in reward {
                    let mut spec = base.clone();
                    spec.config.lr_sf = lr_sf;
                    spec.config.lr_reward = lr_reward;
                    out.push(spec);
                }
            }
        }
        AgentKind::FittedQ => {
            for &lr_q in primary {
                let mut spec = base.clone();
                spec.config.lr_q = lr_q;
                out.push(spec);
            }
        }
    }
    for spec in &out {
        spec.config.validate()?;
    }
    Ok(out)
}

/// Runs every candidate with the same seeds and picks the lowest mean
/// episode length.
pub fn sweep(protocol: &Protocol, candidates: &[AgentSpec], num_repeats: usize, base_seed: u64) -> Result<SweepResult> {
    if candidates.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let curves = run_repeats(protocol, candidates, num_repeats, base_seed)?;
    let rows: Vec<SweepRow> = candidates
        .iter()
        .zip(&curves)
        .map(|(spec, runs)| {
            let means: Vec<f64> = runs.iter().map(|c| c.mean_steps()).collect();
            SweepRow { spec: spec.clone(), mean_steps: mean(&means), std_steps: variance(&means, 0).sqrt() }
        })
        .collect();
    let mut best = 0;
    for (i, row) in rows.iter().enumerate() {
        if row.mean_steps < rows[best].mean_steps {
            best = i;
        }
    }
    Ok(SweepResult { rows, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::protocol::ProtocolKind;
    use crate::experiments::runner::repeat_and_summarize;

    fn tiny() -> Protocol {
        let mut p = Protocol::defaults(ProtocolKind::SingleTask);
        p.episodes_per_phase = 6;
        p.step_cap = 300;
        p
    }

    #[test]
    fn grid_is_primary_major() {
        let p = tiny();
        let grid = learning_rate_grid(&p.agent("sf").unwrap(), &[0.1, 0.01, 0.001], &[0.1, 0.01]).unwrap();
        assert_eq!(grid.len(), 6);
        assert_eq!((grid[1].config.lr_sf, grid[1].config.lr_reward), (0.1, 0.01));
        assert_eq!((grid[2].config.lr_sf, grid[2].config.lr_reward), (0.01, 0.1));
        let q = learning_rate_grid(&p.agent("fqi").unwrap(), &[0.1, 0.01], &[5.0]).unwrap();
        assert_eq!(q.len(), 2);
        assert!(learning_rate_grid(&p.agent("fqi").unwrap(), &[], &[]).is_err());
    }

    #[test]
    fn single_point_matches_plain_run() {
        let p = tiny();
        let sf = p.agent("sf").unwrap();
        let s = sweep(&p, &[sf.clone()], 3, 11).unwrap();
        let r = repeat_and_summarize(&p, &[sf], 3, 11).unwrap();
        assert_eq!(s.best, 0);
        assert_eq!(s.rows[0].mean_steps, r.agents[0].mean_steps);
        assert_eq!(s.rows[0].std_steps, r.agents[0].std_steps);
    }

    #[test]
    fn ties_go_to_the_first_row() {
        let p = tiny();
        let sf = p.agent("sf").unwrap();
        let s = sweep(&p, &[sf.clone(), sf], 2, 4).unwrap();
        assert_eq!(s.rows[0].mean_steps, s.rows[1].mean_steps);
        assert_eq!(s.best, 0);
    }
}
