//! Built-in parameter sweeps, the repetition runner, and aggregation into
//! table rows.
//!
//! Every run in a sweep gets seed `base_seed + cell * reps + rep`, so any cell
//! can be reproduced on its own and results do not depend on how many worker
//! threads executed them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, ModelError};
use crate::model::{self, ModelParams, Tolerance, Wiring};
use crate::spectral::DEFAULT_K;

pub const BUILTIN_SWEEPS: [&str; 5] = [
    "symmetric",
    "asymmetric",
    "groupsize",
    "minority-large",
    "minority-small",
];

pub const AGGREGATE_HEADER: &str = "t1,t2,s,similarity,similarity_g1,similarity_g2,stabilisation_mean,stab_min,stab_q1,stab_median,stab_q3,stab_max,d_hat_mean,stabilised_runs,reps";

/// One parameter combination of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCell {
    pub t1: Tolerance,
    pub t2: Tolerance,
    pub s: f64,
}

impl GridCell {
    pub fn new(t1: f64, t2: f64, s: f64) -> Result<Self, ModelError> {
        Ok(Self {
            t1: Tolerance::new(t1)?,
            t2: Tolerance::new(t2)?,
            s,
        })
    }

    fn from_hundredths(t1: u32, t2: u32, s: u32) -> Self {
        Self {
            t1: Tolerance::from_hundredths(t1).expect("builtin tolerance"),
            t2: Tolerance::from_hundredths(t2).expect("builtin tolerance"),
            s: s as f64 / 100.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub grid: Vec<GridCell>,
    pub reps: usize,
    pub base_seed: u64,
    pub params_base: ModelParams,
}

fn steps_of_five() -> impl Iterator<Item = u32> {
    (1..=20).map(|i| i * 5)
}

/// The grid of one of [`BUILTIN_SWEEPS`], with 100 repetitions and seed 0.
pub fn builtin_sweep(name: &str) -> Result<SweepSpec, ExperimentError> {
    let cell = GridCell::from_hundredths;
    let grid: Vec<GridCell> = match name {
        "symmetric" => steps_of_five().map(|t| cell(t, t, 50)).collect(),
        "asymmetric" => [50, 90]
            .into_iter()
            .flat_map(|t1| steps_of_five().map(move |t2| cell(t1, t2, 50)))
            .collect(),
        "groupsize" => (1..=10)
            .flat_map(|i| [25, 50, 85, 95].into_iter().map(move |t| cell(t, t, i * 5)))
            .collect(),
        "minority-large" => [(50, 50), (50, 90), (90, 50), (90, 90)]
            .into_iter()
            .map(|(a, b)| cell(a, b, 15))
            .collect(),
        "minority-small" => [(15, 85), (15, 90), (20, 85), (20, 90)]
            .into_iter()
            .map(|(a, b)| cell(a, b, 15))
            .collect(),
        other => return Err(ExperimentError::UnknownSweep(other.to_string())),
    };
    Ok(SweepSpec {
        name: name.to_string(),
        grid,
        reps: 100,
        base_seed: 0,
        params_base: ModelParams::default(),
    })
}

/// Reads a custom grid: `key = value` lines override the base parameters
/// (`n`, `initial_degree`, `wiring`, `degree_floor`, `max_steps`), and every other
/// non-comment line is a `t1, t2, s` triple.
pub fn load_custom_grid(path: &Path) -> Result<SweepSpec, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    parse_custom_grid(&text, path)
}

pub fn parse_custom_grid(text: &str, path: &Path) -> Result<SweepSpec, ExperimentError> {
    let mut params = ModelParams::default();
    let mut grid = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        if let Some((key, value)) = line.split_once('=') {
            let value = value.trim();
            let num = || {
                value
                    .parse::<usize>()
                    .map_err(|e| ExperimentError::parse(path, lineno, format!("{key}: {e}")))
            };
            match key.trim() {
                "n" => params.n = num()?,
                "initial_degree" => params.initial_degree = num()?,
                "wiring" => {
                    params.wiring = Wiring::from_name(value).ok_or_else(|| {
                        ExperimentError::parse(path, lineno, format!("wiring: unknown '{value}'"))
                    })?
                }
                "degree_floor" => params.degree_floor = num()?,
                "max_steps" => params.max_steps = num()? as u32,
                other => {
                    return Err(ExperimentError::parse(
                        path,
                        lineno,
                        format!("unknown key '{other}'"),
                    ))
                }
            }
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 3 {
            return Err(ExperimentError::parse(path, lineno, "expected 't1, t2, s'"));
        }
        let nums = fields
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ExperimentError::parse(path, lineno, e.to_string()))?;
        let cell = GridCell::new(nums[0], nums[1], nums[2])
            .map_err(|e| ExperimentError::parse(path, lineno, e.to_string()))?;
        grid.push(cell);
    }
    let spec = SweepSpec {
        name: "custom".into(),
        grid,
        reps: 100,
        base_seed: 0,
        params_base: params,
    };
    spec.validate()?;
    Ok(spec)
}

impl SweepSpec {
    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_seed(mut self, base_seed: u64) -> Self {
        self.base_seed = base_seed;
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.grid.is_empty() {
            return Err(ExperimentError::EmptyGrid);
        }
        if self.reps == 0 {
            return Err(ExperimentError::ZeroReps);
        }
        for cell in &self.grid {
            self.params_for(cell).validate()?;
        }
        Ok(())
    }

    pub fn params_for(&self, cell: &GridCell) -> ModelParams {
        ModelParams {
            t1: cell.t1,
            t2: cell.t2,
            small_fraction: cell.s,
            ..self.params_base.clone()
        }
    }

    pub fn seed_for(&self, cell_index: usize, rep: usize) -> u64 {
        self.base_seed
            .wrapping_add((cell_index * self.reps) as u64)
            .wrapping_add(rep as u64)
    }

    /// Single-cell sweep for grid cell `index`, re-based so its runs get the
    /// same seeds as in the full sweep.
    pub fn cell(&self, index: usize) -> SweepSpec {
        SweepSpec {
            name: self.name.clone(),
            grid: vec![self.grid[index]],
            reps: self.reps,
            base_seed: self.seed_for(index, 0),
            params_base: self.params_base.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepOptions {
    pub parallelism: usize,
    pub k_singular: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
            k_singular: DEFAULT_K,
        }
    }
}

/// One line of the raw archive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub sweep: String,
    pub t1: f64,
    pub t2: f64,
    pub s: f64,
    pub seed: u64,
    pub stabilised: bool,
    pub stabilisation_step: Option<u32>,
    pub similarity_overall: f64,
    pub similarity_g1: f64,
    pub similarity_g2: f64,
    pub d_hat: usize,
}

/// Five-number summary plus mean of stabilisation steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilisationStats {
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub t1: f64,
    pub t2: f64,
    pub s: f64,
    pub similarity_mean: f64,
    pub similarity_g1: f64,
    pub similarity_g2: f64,
    /// Over stabilised runs only; `None` when no run stabilised.
    pub stabilisation: Option<StabilisationStats>,
    pub d_hat_mean: f64,
    pub stabilised_runs: usize,
    pub reps: usize,
}

/// Which runs feed the similarity and dimension means.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Population {
    /// Every run, at its final state (stabilised or not).
    All,
    StabilisedOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub name: String,
    pub rows: Vec<AggregateRow>,
    /// Ordered by cell, then repetition.
    pub records: Vec<RunRecord>,
}

/// Runs one simulation and measures its final state.
pub fn run_record(
    sweep: &str,
    params: &ModelParams,
    seed: u64,
    k_singular: usize,
) -> Result<RunRecord, ExperimentError> {
    let result = model::run(params, seed)?;
    let dim = result.dimension(k_singular)?;
    Ok(RunRecord {
        sweep: sweep.to_string(),
        t1: params.t1.as_f64(),
        t2: params.t2.as_f64(),
        s: params.small_fraction,
        seed,
        stabilised: result.stabilised(),
        stabilisation_step: result.stabilisation_step,
        similarity_overall: result.similarity.overall,
        similarity_g1: result.similarity.group1,
        similarity_g2: result.similarity.group2,
        d_hat: dim.d_hat,
    })
}

/// Executes every repetition of every cell on a pool of `parallelism`
/// workers and aggregates per cell in grid order.
pub fn run_sweep(spec: &SweepSpec, opts: &SweepOptions) -> Result<SweepOutcome, ExperimentError> {
    spec.validate()?;
    let tasks: Vec<(usize, usize)> = (0..spec.grid.len())
        .flat_map(|c| (0..spec.reps).map(move |r| (c, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.parallelism.max(1))
        .build()
        .expect("failed to build worker pool");
    let records: Vec<RunRecord> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, r)| {
                let params = spec.params_for(&spec.grid[c]);
                run_record(&spec.name, &params, spec.seed_for(c, r), opts.k_singular)
            })
            .collect::<Result<_, _>>()
    })?;
    let rows = records
        .chunks(spec.reps)
        .map(aggregate)
        .collect::<Result<_, _>>()?;
    Ok(SweepOutcome {
        name: spec.name.clone(),
        rows,
        records,
    })
}

/// Cell statistics over all runs.
pub fn aggregate(records: &[RunRecord]) -> Result<AggregateRow, ExperimentError> {
    aggregate_with(records, Population::All)
}

pub fn aggregate_with(
    records: &[RunRecord],
    population: Population,
) -> Result<AggregateRow, ExperimentError> {
    let first = records.first().ok_or(ExperimentError::EmptyResults)?;
    let mut steps: Vec<f64> = records
        .iter()
        .filter_map(|r| r.stabilisation_step.map(f64::from))
        .collect();
    steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let stabilisation = five_number(&steps).map(|(min, q1, median, q3, max)| StabilisationStats {
        mean: mean(steps.iter().copied()),
        min,
        q1,
        median,
        q3,
        max,
    });
    let pool: Vec<&RunRecord> = match population {
        Population::All => records.iter().collect(),
        Population::StabilisedOnly => records.iter().filter(|r| r.stabilised).collect(),
    };
    Ok(AggregateRow {
        t1: first.t1,
        t2: first.t2,
        s: first.s,
        similarity_mean: mean(pool.iter().map(|r| r.similarity_overall)),
        similarity_g1: mean(pool.iter().map(|r| r.similarity_g1)),
        similarity_g2: mean(pool.iter().map(|r| r.similarity_g2)),
        stabilisation,
        d_hat_mean: mean(pool.iter().map(|r| r.d_hat as f64)),
        stabilised_runs: steps.len(),
        reps: records.len(),
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

fn median_sorted(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// `(min, q1, median, q3, max)` of sorted data, quartiles as medians of the
/// lower and upper halves; an odd middle element belongs to both halves.
pub fn five_number(sorted: &[f64]) -> Option<(f64, f64, f64, f64, f64)> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let (lower, upper) = if n % 2 == 1 {
        (&sorted[..=n / 2], &sorted[n / 2..])
    } else {
        (&sorted[..n / 2], &sorted[n / 2..])
    };
    Some((
        sorted[0],
        median_sorted(lower),
        median_sorted(sorted),
        median_sorted(upper),
        sorted[n - 1],
    ))
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl AggregateRow {
    pub fn to_csv_line(&self) -> String {
        let st = self.stabilisation;
        [
            self.t1.to_string(),
            self.t2.to_string(),
            self.s.to_string(),
            self.similarity_mean.to_string(),
            self.similarity_g1.to_string(),
            self.similarity_g2.to_string(),
            opt_cell(st.map(|s| s.mean)),
            opt_cell(st.map(|s| s.min)),
            opt_cell(st.map(|s| s.q1)),
            opt_cell(st.map(|s| s.median)),
            opt_cell(st.map(|s| s.q3)),
            opt_cell(st.map(|s| s.max)),
            self.d_hat_mean.to_string(),
            self.stabilised_runs.to_string(),
            self.reps.to_string(),
        ]
        .join(",")
    }
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut s = String::from(AGGREGATE_HEADER);
    s.push('\n');
    for row in rows {
        s.push_str(&row.to_csv_line());
        s.push('\n');
    }
    s
}

pub fn parse_aggregate_csv(text: &str, path: &Path) -> Result<Vec<AggregateRow>, ExperimentError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == AGGREGATE_HEADER => {}
        _ => {
            return Err(ExperimentError::parse(
                path,
                1,
                "unexpected aggregate header",
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| ExperimentError::parse(path, i + 1, msg);
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 15 {
            return Err(err(format!("expected 15 fields, got {}", f.len())));
        }
        let num = |j: usize| {
            f[j].trim()
                .parse::<f64>()
                .map_err(|e| err(format!("field {j}: {e}")))
        };
        let opt = |j: usize| -> Result<Option<f64>, ExperimentError> {
            if f[j].trim().is_empty() {
                Ok(None)
            } else {
                num(j).map(Some)
            }
        };
        let stab = match (opt(6)?, opt(7)?, opt(8)?, opt(9)?, opt(10)?, opt(11)?) {
            (Some(mean), Some(min), Some(q1), Some(median), Some(q3), Some(max)) => {
                Some(StabilisationStats {
                    mean,
                    min,
                    q1,
                    median,
                    q3,
                    max,
                })
            }
            (None, None, None, None, None, None) => None,
            _ => return Err(err("partially blank stabilisation fields".into())),
        };
        let count = |j: usize| {
            f[j].trim()
                .parse::<usize>()
                .map_err(|e| err(format!("field {j}: {e}")))
        };
        rows.push(AggregateRow {
            t1: num(0)?,
            t2: num(1)?,
            s: num(2)?,
            similarity_mean: num(3)?,
            similarity_g1: num(4)?,
            similarity_g2: num(5)?,
            stabilisation: stab,
            d_hat_mean: num(12)?,
            stabilised_runs: count(13)?,
            reps: count(14)?,
        });
    }
    Ok(rows)
}

/// Raw archive text: one JSON object per line.
pub fn archive_text(records: &[RunRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let line = serde_json::to_string(r).expect("record serialises");
        let _ = writeln!(s, "{line}");
    }
    s
}

pub fn parse_archive(text: &str, path: &Path) -> Result<Vec<RunRecord>, ExperimentError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| ExperimentError::parse(path, i + 1, e.to_string()))
        })
        .collect()
}

pub fn raw_path(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(format!("{name}_raw.txt"))
}

pub fn aggregate_path(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(format!("{name}_agg.csv"))
}

impl SweepOutcome {
    /// Writes `<name>_raw.txt` and `<name>_agg.csv` into `out_dir`.
    pub fn write(&self, out_dir: &Path) -> Result<(PathBuf, PathBuf), ExperimentError> {
        fs::create_dir_all(out_dir).map_err(|e| ExperimentError::io(out_dir, e))?;
        let raw = raw_path(out_dir, &self.name);
        let agg = aggregate_path(out_dir, &self.name);
        fs::write(&raw, archive_text(&self.records)).map_err(|e| ExperimentError::io(&raw, e))?;
        fs::write(&agg, aggregate_csv(&self.rows)).map_err(|e| ExperimentError::io(&agg, e))?;
        Ok((raw, agg))
    }
}
