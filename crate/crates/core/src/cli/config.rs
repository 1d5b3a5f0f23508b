//! Flat `key = value` run configuration.
//!
//! Values are applied on top of the protocol defaults in the order they are
//! given: config file first, then command-line flags. The manifest written
//! next to every run lists each key once, so feeding it back through
//! `--config` reproduces the run.

use std::fmt::Write as _;
use std::path::Path;

use crate::experiments::protocol::{corner_phases, shift_phases};
use crate::experiments::{repeat_seed, Phase, Protocol, ProtocolKind};
use crate::learn::{EpsilonKind, ExpectationPolicy, InitScheme, ResetStrategy, TieBreak};
use crate::mdp::Cell;
use crate::{Error, Result};

pub const AGENT_NAMES: [&str; 3] = ["sf", "fqi", "sf-reset-all"];

/// Fully resolved settings of one `run`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub protocol: Protocol,
    pub agents: Vec<String>,
    pub repeats: usize,
    pub seed: u64,
}

/// Ordered `(key, value)` pairs with the line they came from, for messages.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    entries: Vec<(String, String, String)>,
}

impl Settings {
    pub fn new() -> Self {
        Settings::default()
    }

    pub fn push(&mut self, key: &str, value: &str, origin: impl Into<String>) {
        self.entries.push((key.trim().to_string(), value.trim().to_string(), origin.into()));
    }

    /// Parses `key = value` lines. `#` starts a comment.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut out = Settings::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{source}:{}: expected key = value, got {line:?}", n + 1)))?;
            out.push(k, v, format!("{source}:{}", n + 1));
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses a `key=value` command-line override.
    pub fn push_assignment(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got {assignment:?}")))?;
        self.push(k, v, "--set");
        Ok(())
    }

    pub fn extend(&mut self, other: Settings) {
        self.entries.extend(other.entries);
    }

    /// Last value given for `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().rev().find(|(k, _, _)| k == key).map(|(_, v, _)| v.as_str())
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let kind: ProtocolKind = self
            .get("protocol")
            .ok_or_else(|| Error::Config("no protocol given (use --protocol or protocol = ... in the config)".into()))?
            .parse()?;
        let mut cfg = RunConfig {
            protocol: Protocol::defaults(kind),
            agents: vec!["sf".into(), "fqi".into()],
            repeats: 20,
            seed: 0,
        };
        let mut num_phases = None;
        let mut phases = None;
        for (key, value, origin) in &self.entries {
            let ctx = |e: Error| match e {
                Error::Config(m) => Error::Config(format!("{origin}: {key}: {m}")),
                other => other,
            };
            match key.as_str() {
                "num_phases" => num_phases = Some(parse_num::<usize>(value).map_err(ctx)?),
                "phases" => phases = Some(parse_phases(value).map_err(ctx)?),
                _ => apply(&mut cfg, key, value).map_err(ctx)?,
            }
        }
        let p = &mut cfg.protocol;
        p.phases = match phases {
            Some(list) => list,
            None => default_phases(kind, p.width, p.height, num_phases.unwrap_or(p.phases.len())),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_phases(kind: ProtocolKind, width: usize, height: usize, n: usize) -> Vec<Phase> {
    match kind {
        ProtocolKind::SingleTask => {
            let phase = Phase { start: Cell::new(width - 1, 0), goal: Cell::new(width - 1, height - 1) };
            vec![phase; n]
        }
        ProtocolKind::SlightShift => shift_phases(width, height, n),
        ProtocolKind::CornerRotation | ProtocolKind::FailureCase => corner_phases(width, height, n),
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("cannot parse {v:?}")))
}

fn parse_reset(v: &str) -> Result<ResetStrategy> {
    match v {
        "reset_w_only" => Ok(ResetStrategy::ResetWOnly),
        "reset_all" => Ok(ResetStrategy::ResetAll),
        "keep_all" => Ok(ResetStrategy::KeepAll),
        _ => Err(Error::Config(format!("unknown reset strategy {v:?} (reset_w_only, reset_all, keep_all)"))),
    }
}

fn reset_name(r: ResetStrategy) -> &'static str {
    match r {
        ResetStrategy::ResetWOnly => "reset_w_only",
        ResetStrategy::ResetAll => "reset_all",
        ResetStrategy::KeepAll => "keep_all",
    }
}

/// `0.3`, `annealed`, or `decay:SCALE:BASE:FLOOR`.
fn parse_epsilon(v: &str) -> Result<EpsilonKind> {
    if v == "annealed" {
        return Ok(EpsilonKind::ANNEALED);
    }
    if let Some(rest) = v.strip_prefix("decay:") {
        let parts: Vec<f64> = rest.split(':').map(parse_num).collect::<Result<_>>()?;
        if let [scale, base, floor] = parts[..] {
            return Ok(EpsilonKind::Decay { scale, base, floor });
        }
        return Err(Error::Config(format!("expected decay:SCALE:BASE:FLOOR, got {v:?}")));
    }
    Ok(EpsilonKind::Constant(parse_num(v)?))
}

fn epsilon_text(e: EpsilonKind) -> String {
    match e {
        EpsilonKind::Constant(x) => format!("{x}"),
        EpsilonKind::Decay { scale, base, floor } => format!("decay:{scale}:{base}:{floor}"),
    }
}

fn parse_cell(v: &str) -> Result<Cell> {
    let (c, r) = v
        .split_once(',')
        .ok_or_else(|| Error::Config(format!("expected COL,ROW, got {v:?}")))?;
    Ok(Cell::new(parse_num(c.trim())?, parse_num(r.trim())?))
}

/// `COL,ROW>COL,ROW; ...`: start then goal, one pair per phase.
fn parse_phases(v: &str) -> Result<Vec<Phase>> {
    v.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (s, g) = pair
                .split_once('>')
                .ok_or_else(|| Error::Config(format!("expected START>GOAL, got {pair:?}")))?;
            Ok(Phase { start: parse_cell(s)?, goal: parse_cell(g)? })
        })
        .collect()
}

fn phases_text(phases: &[Phase]) -> String {
    phases
        .iter()
        .map(|p| format!("{},{}>{},{}", p.start.col, p.start.row, p.goal.col, p.goal.row))
        .collect::<Vec<_>>()
        .join(";")
}

fn apply(cfg: &mut RunConfig, key: &str, v: &str) -> Result<()> {
    let p = &mut cfg.protocol;
    let a = &mut p.agent_defaults;
    match key {
        "protocol" => {}
        "agents" => cfg.agents = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        "repeats" => cfg.repeats = parse_num(v)?,
        "seed" => cfg.seed = parse_num(v)?,
        "width" => p.width = parse_num(v)?,
        "height" => p.height = parse_num(v)?,
        "slip_prob" => p.slip_prob = parse_num(v)?,
        "goal_reward" => p.goal_reward = parse_num(v)?,
        "gamma" => p.gamma = parse_num(v)?,
        "episodes_per_phase" => p.episodes_per_phase = parse_num(v)?,
        "step_cap" => p.step_cap = parse_num(v)?,
        "epsilon" => p.epsilon = parse_epsilon(v)?,
        "batch_size" => p.batch_size = parse_num(v)?,
        "lr_sf" => p.sf_rates.0 = parse_num(v)?,
        "lr_reward" => p.sf_rates.1 = parse_num(v)?,
        "lr_sf_reset_all" => p.sf_reset_all_rates.0 = parse_num(v)?,
        "lr_reward_reset_all" => p.sf_reset_all_rates.1 = parse_num(v)?,
        "lr_q" => p.fqi_rate = parse_num(v)?,
        "sf_reset" => p.sf_reset = parse_reset(v)?,
        "fqi_reset" => p.fqi_reset = parse_reset(v)?,
        "tie_break" => {
            a.tie_break = match v {
                "random" => TieBreak::Random,
                "lowest_index" => TieBreak::LowestIndex,
                _ => return Err(Error::Config(format!("unknown tie break {v:?} (random, lowest_index)"))),
            }
        }
        "expectation_policy" => {
            a.expectation_policy = match v {
                "behavior" => ExpectationPolicy::Behavior,
                "greedy" => ExpectationPolicy::Greedy,
                _ => return Err(Error::Config(format!("unknown expectation policy {v:?} (behavior, greedy)"))),
            }
        }
        "init" => {
            a.init = match v.strip_prefix("uniform:") {
                Some(scale) => InitScheme::Uniform { scale: parse_num(scale)? },
                None if v == "zero" => InitScheme::Zero,
                None => return Err(Error::Config(format!("unknown init {v:?} (zero, uniform:SCALE)"))),
            }
        }
        "adagrad_epsilon" => a.adagrad_epsilon = parse_num(v)?,
        "initial_accumulator" => a.initial_accumulator = parse_num(v)?,
        _ => return Err(Error::Config("unknown key".into())),
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() {
            return Err(Error::Config("no agents selected".into()));
        }
        for name in &self.agents {
            if !AGENT_NAMES.contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown agent {name:?} (expected sf, fqi, sf-reset-all)")));
            }
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be positive".into()));
        }
        self.protocol.validate()
    }

    pub fn repeat_seeds(&self) -> Vec<u64> {
        (0..self.repeats).map(|r| repeat_seed(self.seed, r)).collect()
    }

    /// Every setting as `key = value`, in a fixed order.
    pub fn to_manifest(&self) -> String {
        let p = &self.protocol;
        let a = &p.agent_defaults;
        let mut s = String::from("# sftransfer run manifest\n");
        let seeds: Vec<String> = self.repeat_seeds().iter().map(u64::to_string).collect();
        let _ = writeln!(s, "# repeat seeds: {}", seeds.join(","));
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("protocol", p.kind.to_string());
        kv("agents", self.agents.join(","));
        kv("repeats", self.repeats.to_string());
        kv("seed", self.seed.to_string());
        kv("width", p.width.to_string());
        kv("height", p.height.to_string());
        kv("slip_prob", p.slip_prob.to_string());
        kv("goal_reward", p.goal_reward.to_string());
        kv("gamma", p.gamma.to_string());
        kv("episodes_per_phase", p.episodes_per_phase.to_string());
        kv("step_cap", p.step_cap.to_string());
        kv("phases", phases_text(&p.phases));
        kv("epsilon", epsilon_text(p.epsilon));
        kv("batch_size", p.batch_size.to_string());
        kv("lr_sf", p.sf_rates.0.to_string());
        kv("lr_reward", p.sf_rates.1.to_string());
        kv("lr_sf_reset_all", p.sf_reset_all_rates.0.to_string());
        kv("lr_reward_reset_all", p.sf_reset_all_rates.1.to_string());
        kv("lr_q", p.fqi_rate.to_string());
        kv("sf_reset", reset_name(p.sf_reset).into());
        kv("fqi_reset", reset_name(p.fqi_reset).into());
        kv(
            "tie_break",
            match a.tie_break {
                TieBreak::Random => "random",
                TieBreak::LowestIndex => "lowest_index",
            }
            .into(),
        );
        kv(
            "expectation_policy",
            match a.expectation_policy {
                ExpectationPolicy::Behavior => "behavior",
                ExpectationPolicy::Greedy => "greedy",
            }
            .into(),
        );
        kv(
            "init",
            match a.init {
                InitScheme::Zero => "zero".into(),
                InitScheme::Uniform { scale } => format!("uniform:{scale}"),
            },
        );
        kv("adagrad_epsilon", a.adagrad_epsilon.to_string());
        kv("initial_accumulator", a.initial_accumulator.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<RunConfig> {
        Settings::parse(text, "test")?.resolve()
    }

    #[test]
    fn defaults_come_from_the_protocol() {
        let cfg = resolve("protocol = corner_rotation").unwrap();
        assert_eq!(cfg.protocol, Protocol::defaults(ProtocolKind::CornerRotation));
        assert_eq!(cfg.repeats, 20);
    }

    #[test]
    fn later_values_win() {
        let mut s = Settings::parse("protocol = single_task\nlr_sf = 0.5 # comment\n", "f").unwrap();
        s.push_assignment("lr_sf=0.25").unwrap();
        let cfg = s.resolve().unwrap();
        assert_eq!(cfg.protocol.sf_rates.0, 0.25);
    }

    #[test]
    fn manifest_round_trips() {
        let cfg = resolve(
            "protocol = slight_shift\nnum_phases = 4\nepsilon = decay:0.5:0.9:0.05\ninit = uniform:0.01\n\
             tie_break = lowest_index\nseed = 42\nrepeats = 3\nlr_q = 0.3",
        )
        .unwrap();
        assert_eq!(cfg.protocol.phases.len(), 4);
        let again = resolve(&cfg.to_manifest()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_manifest(), cfg.to_manifest());
    }

    #[test]
    fn explicit_phases_parse() {
        let cfg = resolve("protocol = corner_rotation\nphases = 0,0>4,4; 4,4>0,0\nwidth = 5\nheight = 5").unwrap();
        assert_eq!(cfg.protocol.phases[1], Phase { start: Cell::new(4, 4), goal: Cell::new(0, 0) });
    }

    #[test]
    fn bad_input_is_rejected() {
        assert!(resolve("lr_sf = 0.1").is_err());
        assert!(resolve("protocol = nope").is_err());
        assert!(resolve("protocol = single_task\nbogus = 1").is_err());
        assert!(resolve("protocol = single_task\nlr_sf = -1").is_err());
        assert!(resolve("protocol = single_task\nagents = sf,dqn").is_err());
        assert!(resolve("protocol = single_task\ngamma = 1.5").is_err());
        assert!(resolve("protocol = single_task\nfqi_reset = reset_w_only").is_err());
        assert!(resolve("protocol = single_task\nno equals sign").is_err());
        let err = resolve("protocol = single_task\nrepeats = x").unwrap_err();
        assert!(err.to_string().contains("test:2"), "{err}");
    }
}
