//! Run plans and the `key = value` configuration format.
//!
//! ```text
//! # comment
//! [problem]
//! name = jos1          # jos1 | quadratic
//! n = 50
//! [solver]
//! mode = mag_gm        # mag_gm | msd | mavd
//! a = 0, 0.5           # comma-separated lists are expanded by `sweep`
//! [output]
//! dir = runs/jos1
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Jos1,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    MagGm,
    Msd,
    Mavd,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::MagGm => "mag_gm",
            Mode::Msd => "msd",
            Mode::Mavd => "mavd",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub n: usize,
    /// Objectives; always 2 for JOS1.
    pub m: usize,
    pub seed: u64,
}

/// A fully validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub problem: ProblemSpec,
    pub mode: Mode,
    pub a: f64,
    pub b: f64,
    /// `None` means `1/L`.
    pub s: Option<f64>,
    pub eps: f64,
    pub k_max: usize,
    pub subproblem_tol: f64,
    pub alpha: f64,
    pub t_end: f64,
    /// `None` means the decade-doubling rule.
    pub dt: Option<f64>,
    pub sample_every: usize,
    /// Number of analytic Pareto reference points, when the problem has a sampler.
    pub refs: usize,
    /// Add the final iterate of a preliminary identical run as a reference point.
    pub tail_ref: bool,
    pub output_dir: Option<PathBuf>,
    pub store_iterates: bool,
}

impl Default for RunPlan {
    fn default() -> Self {
        Self {
            problem: ProblemSpec {
                kind: ProblemKind::Jos1,
                n: 2,
                m: 2,
                seed: 0,
            },
            mode: Mode::MagGm,
            a: 0.0,
            b: 0.25,
            s: None,
            eps: 1e-10,
            k_max: 100_000,
            subproblem_tol: 1e-10,
            alpha: 3.0,
            t_end: 1000.0,
            dt: None,
            sample_every: 100,
            refs: 64,
            tail_ref: true,
            output_dir: None,
            store_iterates: false,
        }
    }
}

const PROBLEM_KEYS: &[&str] = &["name", "n", "m", "seed"];
const SOLVER_KEYS: &[&str] = &[
    "mode",
    "a",
    "b",
    "s",
    "eps",
    "k_max",
    "subproblem_tol",
    "alpha",
    "t_end",
    "dt",
    "sample_every",
];
const OUTPUT_KEYS: &[&str] = &["dir", "store_iterates", "refs", "tail_ref"];
const DISCRETE_ONLY: &[&str] = &["a", "b", "s", "eps", "k_max"];
const MAVD_ONLY: &[&str] = &["alpha", "t_end", "dt", "sample_every"];

fn section_keys(section: &str) -> Option<&'static [&'static str]> {
    match section {
        "problem" => Some(PROBLEM_KEYS),
        "solver" => Some(SOLVER_KEYS),
        "output" => Some(OUTPUT_KEYS),
        _ => None,
    }
}

/// One `key = value` entry; `values` has several items for a sweep list.
#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    values: Vec<String>,
}

/// The document as written, keyed by `section.key`.
#[derive(Debug, Clone, Default)]
pub struct Document {
    entries: BTreeMap<String, Entry>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut section: Option<String> = None;
        let mut entries = BTreeMap::new();
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| anyhow!("line {line_no}: malformed section header `{line}`"))?
                    .trim();
                if section_keys(name).is_none() {
                    bail!("line {line_no}: unknown section [{name}]");
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {line_no}: expected `key = value`, found `{line}`"))?;
            let key = key.trim();
            let value = value.trim();
            let Some(sec) = section.as_deref() else {
                bail!("line {line_no}: key `{key}` appears before any section");
            };
            if !section_keys(sec).is_some_and(|keys| keys.contains(&key)) {
                bail!("line {line_no}: unknown key `{key}` in [{sec}]");
            }
            if value.is_empty() {
                bail!("line {line_no}: key `{key}` has no value");
            }
            let values: Vec<String> = value.split(',').map(|v| v.trim().to_string()).collect();
            if values.iter().any(String::is_empty) {
                bail!("line {line_no}: empty item in list for `{key}`");
            }
            let full = format!("{sec}.{key}");
            if let Some(prev) = entries.get(&full) {
                let prev: &Entry = prev;
                bail!("line {line_no}: `{key}` already set on line {}", prev.line);
            }
            entries.insert(full, Entry { line: line_no, values });
        }
        Ok(Self { entries })
    }

    /// Keys holding more than one value, in document order of their keys.
    fn swept(&self) -> Vec<(&str, &Entry)> {
        let mut keys: Vec<(&str, &Entry)> = self
            .entries
            .iter()
            .filter(|(_, e)| e.values.len() > 1)
            .map(|(k, e)| (k.as_str(), e))
            .collect();
        keys.sort_by_key(|(_, e)| e.line);
        keys
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, line: usize, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| anyhow!("line {line}: `{key}` has invalid value `{value}`"))
}

fn parse_bool(key: &str, line: usize, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => bail!("line {line}: `{key}` must be true or false, got `{value}`"),
    }
}

fn build_plan(values: &BTreeMap<&str, (usize, &str)>) -> Result<RunPlan> {
    let mut plan = RunPlan::default();
    let mut m_given = None;
    for (&full, &(line, value)) in values {
        let key = full.split_once('.').map(|(_, k)| k).unwrap_or(full);
        match full {
            "problem.name" => {
                plan.problem.kind = match value {
                    "jos1" => ProblemKind::Jos1,
                    "quadratic" => ProblemKind::Quadratic,
                    other => bail!("line {line}: unknown problem `{other}` (expected jos1 or quadratic)"),
                }
            }
            "problem.n" => plan.problem.n = parse_num(key, line, value)?,
            "problem.m" => m_given = Some((line, parse_num::<usize>(key, line, value)?)),
            "problem.seed" => plan.problem.seed = parse_num(key, line, value)?,
            "solver.mode" => {
                plan.mode = match value {
                    "mag_gm" => Mode::MagGm,
                    "msd" => Mode::Msd,
                    "mavd" => Mode::Mavd,
                    other => bail!("line {line}: unknown mode `{other}` (expected mag_gm, msd or mavd)"),
                }
            }
            "solver.a" => plan.a = parse_num(key, line, value)?,
            "solver.b" => plan.b = parse_num(key, line, value)?,
            "solver.s" => plan.s = if value == "auto" { None } else { Some(parse_num(key, line, value)?) },
            "solver.eps" => plan.eps = parse_num(key, line, value)?,
            "solver.k_max" => plan.k_max = parse_num(key, line, value)?,
            "solver.subproblem_tol" => plan.subproblem_tol = parse_num(key, line, value)?,
            "solver.alpha" => plan.alpha = parse_num(key, line, value)?,
            "solver.t_end" => plan.t_end = parse_num(key, line, value)?,
            "solver.dt" => plan.dt = if value == "auto" { None } else { Some(parse_num(key, line, value)?) },
            "solver.sample_every" => plan.sample_every = parse_num(key, line, value)?,
            "output.dir" => plan.output_dir = Some(PathBuf::from(value)),
            "output.store_iterates" => plan.store_iterates = parse_bool(key, line, value)?,
            "output.refs" => plan.refs = parse_num(key, line, value)?,
            "output.tail_ref" => plan.tail_ref = parse_bool(key, line, value)?,
            _ => unreachable!("keys are checked while parsing"),
        }
    }
    if !values.contains_key("problem.name") {
        bail!("[problem] name is required");
    }
    if !values.contains_key("problem.n") {
        bail!("[problem] n is required");
    }
    match (plan.problem.kind, m_given) {
        (ProblemKind::Jos1, Some((line, m))) if m != 2 => bail!("line {line}: jos1 has exactly 2 objectives, got m = {m}"),
        (ProblemKind::Jos1, _) => plan.problem.m = 2,
        (ProblemKind::Quadratic, Some((_, m))) => plan.problem.m = m,
        (ProblemKind::Quadratic, None) => bail!("[problem] m is required for the quadratic ensemble"),
    }
    let irrelevant = if plan.mode == Mode::Mavd { DISCRETE_ONLY } else { MAVD_ONLY };
    for key in irrelevant {
        if let Some(&(line, _)) = values.get(format!("solver.{key}").as_str()) {
            bail!("line {line}: `{key}` does not apply to mode = {}", plan.mode);
        }
    }
    if plan.problem.kind == ProblemKind::Jos1 && values.contains_key("problem.seed") {
        let (line, _) = values["problem.seed"];
        bail!("line {line}: `seed` applies only to the quadratic ensemble");
    }
    validate(&plan, values)?;
    Ok(plan)
}

fn validate(plan: &RunPlan, values: &BTreeMap<&str, (usize, &str)>) -> Result<()> {
    let at = |key: &str| {
        values
            .get(key)
            .map(|(line, _)| format!("line {line}: "))
            .unwrap_or_default()
    };
    if plan.problem.n == 0 {
        bail!("{}n must be at least 1", at("problem.n"));
    }
    if plan.problem.m == 0 {
        bail!("{}m must be at least 1", at("problem.m"));
    }
    if !(0.0..1.0).contains(&plan.a) {
        bail!("{}a must lie in [0, 1), got {}", at("solver.a"), plan.a);
    }
    if moaccel::schedule::validate_momentum(plan.a, plan.b).is_err() {
        bail!("{}b must lie in [a²/4, 1/4] = [{}, 0.25], got {}", at("solver.b"), plan.a * plan.a / 4.0, plan.b);
    }
    if let Some(s) = plan.s {
        if !(s > 0.0) || !s.is_finite() {
            bail!("{}s must be positive, got {s}", at("solver.s"));
        }
    }
    if !(plan.eps >= 0.0) {
        bail!("{}eps must be non-negative, got {}", at("solver.eps"), plan.eps);
    }
    if plan.k_max == 0 {
        bail!("{}k_max must be at least 1", at("solver.k_max"));
    }
    if !(plan.subproblem_tol > 0.0) {
        bail!("{}subproblem_tol must be positive", at("solver.subproblem_tol"));
    }
    if !(plan.alpha > 0.0) || !plan.alpha.is_finite() {
        bail!("{}alpha must be positive, got {}", at("solver.alpha"), plan.alpha);
    }
    if !(plan.t_end > 1.0) || !plan.t_end.is_finite() {
        bail!("{}t_end must exceed 1, got {}", at("solver.t_end"), plan.t_end);
    }
    if let Some(dt) = plan.dt {
        if !(dt > 0.0) {
            bail!("{}dt must be positive, got {dt}", at("solver.dt"));
        }
    }
    if plan.sample_every == 0 {
        bail!("{}sample_every must be at least 1", at("solver.sample_every"));
    }
    Ok(())
}

/// Parses a single-run document; list values are rejected.
pub fn parse_config(text: &str) -> Result<RunPlan> {
    let doc = Document::parse(text)?;
    if let Some((key, entry)) = doc.swept().first() {
        bail!("line {}: `{key}` holds a list; use `sweep` to expand it", entry.line);
    }
    let values = doc
        .entries
        .iter()
        .map(|(k, e)| (k.as_str(), (e.line, e.values[0].as_str())))
        .collect();
    build_plan(&values)
}

/// Expands every list value into the cartesian product of plans. Each plan comes
/// with a label naming its swept values, e.g. `a=0.5_b=0.0625`.
pub fn parse_sweep(text: &str) -> Result<Vec<(String, RunPlan)>> {
    let doc = Document::parse(text)?;
    let swept = doc.swept();
    let mut combos: Vec<Vec<(&str, usize, &str)>> = vec![Vec::new()];
    for (key, entry) in &swept {
        let mut next = Vec::with_capacity(combos.len() * entry.values.len());
        for combo in &combos {
            for value in &entry.values {
                let mut c = combo.clone();
                c.push((*key, entry.line, value.as_str()));
                next.push(c);
            }
        }
        combos = next;
    }
    combos
        .into_iter()
        .map(|combo| {
            let mut values: BTreeMap<&str, (usize, &str)> = doc
                .entries
                .iter()
                .map(|(k, e)| (k.as_str(), (e.line, e.values[0].as_str())))
                .collect();
            for &(key, line, value) in &combo {
                values.insert(key, (line, value));
            }
            let label = if combo.is_empty() {
                "run".to_string()
            } else {
                combo
                    .iter()
                    .map(|(key, _, value)| {
                        let short = key.split_once('.').map(|(_, k)| k).unwrap_or(key);
                        format!("{short}={value}")
                    })
                    .collect::<Vec<_>>()
                    .join("_")
            };
            Ok((label, build_plan(&values)?))
        })
        .collect()
}

fn fmt_f64(x: f64) -> String {
    // shortest representation that round-trips
    format!("{x:?}")
}

impl RunPlan {
    /// The plan as a configuration document with every value spelled out.
    /// `parse_config(plan.to_document())` reproduces the plan.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        out.push_str("[problem]\n");
        match self.problem.kind {
            ProblemKind::Jos1 => {
                out.push_str("name = jos1\n");
                out.push_str(&format!("n = {}\n", self.problem.n));
            }
            ProblemKind::Quadratic => {
                out.push_str("name = quadratic\n");
                out.push_str(&format!("n = {}\n", self.problem.n));
                out.push_str(&format!("m = {}\n", self.problem.m));
                out.push_str(&format!("seed = {}\n", self.problem.seed));
            }
        }
        out.push_str("[solver]\n");
        out.push_str(&format!("mode = {}\n", self.mode));
        if self.mode == Mode::Mavd {
            out.push_str(&format!("alpha = {}\n", fmt_f64(self.alpha)));
            out.push_str(&format!("t_end = {}\n", fmt_f64(self.t_end)));
            match self.dt {
                Some(dt) => out.push_str(&format!("dt = {}\n", fmt_f64(dt))),
                None => out.push_str("dt = auto\n"),
            }
            out.push_str(&format!("sample_every = {}\n", self.sample_every));
        } else {
            out.push_str(&format!("a = {}\n", fmt_f64(self.a)));
            out.push_str(&format!("b = {}\n", fmt_f64(self.b)));
            match self.s {
                Some(s) => out.push_str(&format!("s = {}\n", fmt_f64(s))),
                None => out.push_str("s = auto\n"),
            }
            out.push_str(&format!("eps = {}\n", fmt_f64(self.eps)));
            out.push_str(&format!("k_max = {}\n", self.k_max));
        }
        out.push_str(&format!("subproblem_tol = {}\n", fmt_f64(self.subproblem_tol)));
        out.push_str("[output]\n");
        if let Some(dir) = &self.output_dir {
            out.push_str(&format!("dir = {}\n", dir.display()));
        }
        out.push_str(&format!("store_iterates = {}\n", self.store_iterates));
        out.push_str(&format!("refs = {}\n", self.refs));
        out.push_str(&format!("tail_ref = {}\n", self.tail_ref));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let plan = parse_config("[problem]\nname = jos1\nn = 50\n[solver]\nmode = mag_gm\n").unwrap();
        assert_eq!(plan.problem.n, 50);
        assert_eq!(plan.a, 0.0);
        assert_eq!(plan.b, 0.25);
        assert_eq!(plan.s, None);
        assert_eq!(plan.eps, 1e-10);
        assert_eq!(plan.k_max, 100_000);
    }

    #[test]
    fn momentum_ranges() {
        let err = parse_config("[problem]\nname = jos1\nn = 2\n[solver]\nb = 0.3\n").unwrap_err();
        assert!(err.to_string().contains("b must lie in [a²/4, 1/4]"), "{err}");
        assert!(err.to_string().contains("line 5"), "{err}");
        let err = parse_config("[problem]\nname = jos1\nn = 2\n[solver]\na = 0.5\nb = 0.05\n").unwrap_err();
        assert!(err.to_string().contains("b must lie"), "{err}");
        assert!(parse_config("[problem]\nname = jos1\nn = 2\n[solver]\na = 0.5\nb = 0.0625\n").is_ok());
    }

    #[test]
    fn rejects_unknown_keys_with_line_numbers() {
        let err = parse_config("[problem]\nname = jos1\nn = 2\nfoo = 1\n").unwrap_err();
        assert!(err.to_string().starts_with("line 4:"), "{err}");
        let err = parse_config("name = jos1\n").unwrap_err();
        assert!(err.to_string().contains("before any section"), "{err}");
        let err = parse_config("[extras]\n").unwrap_err();
        assert!(err.to_string().contains("unknown section"), "{err}");
        let err = parse_config("[problem]\nname jos1\n").unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
    }

    #[test]
    fn mode_specific_keys() {
        let err = parse_config("[problem]\nname = jos1\nn = 2\n[solver]\nalpha = 3\n").unwrap_err();
        assert!(err.to_string().contains("does not apply"), "{err}");
        let err = parse_config("[problem]\nname = jos1\nn = 2\n[solver]\nmode = mavd\na = 0.5\n").unwrap_err();
        assert!(err.to_string().contains("does not apply"), "{err}");
        let plan = parse_config("[problem]\nname = jos1\nn = 2\n[solver]\nmode = mavd\nalpha = 2\nt_end = 50\n").unwrap();
        assert_eq!(plan.alpha, 2.0);
        assert_eq!(plan.t_end, 50.0);
    }

    #[test]
    fn quadratic_needs_m() {
        assert!(parse_config("[problem]\nname = quadratic\nn = 3\n").is_err());
        let plan = parse_config("[problem]\nname = quadratic\nn = 3\nm = 4\nseed = 9\n").unwrap();
        assert_eq!((plan.problem.m, plan.problem.seed), (4, 9));
        assert!(parse_config("[problem]\nname = jos1\nn = 3\nm = 3\n").is_err());
    }

    #[test]
    fn lists_need_sweep() {
        let text = "[problem]\nname = jos1\nn = 2, 50\n[solver]\na = 0, 0.5\nb = 0.0625\n";
        assert!(parse_config(text).is_err());
        let plans = parse_sweep(text).unwrap();
        assert_eq!(plans.len(), 4);
        assert_eq!(plans[0].0, "n=2_a=0");
        assert_eq!(plans[3].0, "n=50_a=0.5");
        assert_eq!(plans[3].1.problem.n, 50);
    }

    #[test]
    fn sweep_validates_every_combination() {
        let text = "[problem]\nname = jos1\nn = 2\n[solver]\na = 0, 0.9\nb = 0.0625\n";
        let err = parse_sweep(text).unwrap_err();
        assert!(err.to_string().contains("b must lie"), "{err}");
    }

    #[test]
    fn document_round_trips() {
        let texts = [
            "[problem]\nname = jos1\nn = 50\n[solver]\na = 0.5\nb = 0.0625\ns = 12.5\neps = 0\nk_max = 10\n[output]\ndir = out/x\nrefs = 8\n",
            "[problem]\nname = quadratic\nn = 20\nm = 3\nseed = 7\n[solver]\nmode = msd\n[output]\ntail_ref = false\n",
            "[problem]\nname = jos1\nn = 2\n[solver]\nmode = mavd\nalpha = 1\ndt = 0.01\nt_end = 20\nsample_every = 3\n",
        ];
        for text in texts {
            let plan = parse_config(text).unwrap();
            assert_eq!(parse_config(&plan.to_document()).unwrap(), plan);
        }
    }
}
