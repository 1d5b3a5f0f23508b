use std::path::Path;

use crate::experiments::{CounterexampleReport, Summary, SweepResult};
use crate::Result;

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(dir.join(name))?)
}

pub fn write_curves(dir: &Path, summary: &Summary) -> Result<()> {
    let mut w = writer(dir, "curves.csv")?;
    w.write_record(["protocol", "agent", "repeat", "phase", "episode", "steps", "capped"])?;
    for runs in &summary.curves {
        for (r, c) in runs.iter().enumerate() {
            for e in 0..c.len() {
                w.write_record([
                    c.protocol.clone(),
                    c.agent.clone(),
                    r.to_string(),
                    c.phase[e].to_string(),
                    e.to_string(),
                    c.steps[e].to_string(),
                    u8::from(c.capped[e]).to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_losses(dir: &Path, summary: &Summary) -> Result<()> {
    let mut w = writer(dir, "losses.csv")?;
    w.write_record(["protocol", "agent", "repeat", "update_index", "loss_name", "value"])?;
    for runs in &summary.curves {
        for (r, c) in runs.iter().enumerate() {
            for l in &c.losses {
                w.write_record([
                    c.protocol.clone(),
                    c.agent.clone(),
                    r.to_string(),
                    l.update_index.to_string(),
                    l.name.to_string(),
                    l.value.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per agent, then `welch_t` and `welch_p` rows (value in the
/// second column) when two agents with repetitions were compared.
pub fn write_summary(dir: &Path, summary: &Summary) -> Result<()> {
    let mut w = writer(dir, "summary.csv")?;
    w.write_record(["agent", "mean_steps", "std_steps"])?;
    for a in &summary.agents {
        w.write_record([a.agent.clone(), a.mean_steps.to_string(), a.std_steps.to_string()])?;
    }
    if let Some(t) = &summary.welch {
        w.write_record(["welch_t".to_string(), t.t.to_string(), String::new()])?;
        w.write_record(["welch_p".to_string(), t.p.to_string(), String::new()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep(dir: &Path, result: &SweepResult) -> Result<()> {
    let mut w = writer(dir, "sweep.csv")?;
    w.write_record(["agent", "lr_sf", "lr_reward", "lr_q", "mean_steps", "std_steps", "best"])?;
    for (i, row) in result.rows.iter().enumerate() {
        let c = &row.spec.config;
        w.write_record([
            row.spec.name.clone(),
            c.lr_sf.to_string(),
            c.lr_reward.to_string(),
            c.lr_q.to_string(),
            row.mean_steps.to_string(),
            row.std_steps.to_string(),
            u8::from(i == result.best).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Feature labels `phi1_a, phi1_b, phi2_a, ...` of the counterexample.
pub fn counterexample_labels(len: usize) -> Vec<String> {
    (0..len).map(|i| format!("phi{}_{}", i / 2 + 1, if i % 2 == 0 { 'a' } else { 'b' })).collect()
}

pub fn write_counterexample(dir: &Path, reports: &[CounterexampleReport]) -> Result<()> {
    let mut w = writer(dir, "report.csv")?;
    w.write_record(["gamma", "feature", "psi_pi_aa", "psi_pi_ab", "abs_diff"])?;
    for rep in reports {
        for (i, label) in counterexample_labels(rep.psi_a.len()).into_iter().enumerate() {
            w.write_record([
                rep.gamma.to_string(),
                label,
                rep.psi_a[i].to_string(),
                rep.psi_b[i].to_string(),
                (rep.psi_a[i] - rep.psi_b[i]).abs().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
