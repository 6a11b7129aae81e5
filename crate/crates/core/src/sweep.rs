//! Parameter-sweep harness: grid expansion over (r, l_r, c_r, N), parallel
//! deterministic execution keyed on (cell, seed), append-only checkpointing
//! with idempotent resume, and the flattening/averaging reports.

use std::collections::HashSet;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::avoid::Strategy;
use crate::error::Error;
use crate::sim::{run, RunDiagnostics, SimConfig};
use crate::swarm::SwarmParams;

/// One axis of a sweep: either explicit values or an evenly spaced range
/// (in linear or log domain).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub scale: Option<AxisScale>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisScale {
    Linear,
    Log,
}

impl AxisSpec {
    pub fn expand(&self, name: &str) -> Result<Vec<f64>, Error> {
        if let Some(values) = &self.values {
            if values.is_empty() {
                return Err(Error::SpecParse(format!("axis {name}: empty value list")));
            }
            return Ok(values.clone());
        }
        let (min, max, count) = match (self.min, self.max, self.count) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => {
                return Err(Error::SpecParse(format!(
                    "axis {name}: need either `values` or `min`+`max`+`count`"
                )))
            }
        };
        if count == 0 {
            return Err(Error::SpecParse(format!("axis {name}: count must be positive")));
        }
        if count == 1 {
            return Ok(vec![min]);
        }
        if max < min {
            return Err(Error::SpecParse(format!("axis {name}: max < min")));
        }
        let scale = self.scale.unwrap_or(AxisScale::Linear);
        let mut out = Vec::with_capacity(count);
        // endpoints pinned exactly; interior points interpolated
        match scale {
            AxisScale::Linear => {
                out.push(min);
                for k in 1..count - 1 {
                    out.push(min + (max - min) * k as f64 / (count - 1) as f64);
                }
                out.push(max);
            }
            AxisScale::Log => {
                if min <= 0.0 {
                    return Err(Error::SpecParse(format!(
                        "axis {name}: log scale needs positive bounds"
                    )));
                }
                let (lo, hi) = (min.ln(), max.ln());
                out.push(min);
                for k in 1..count - 1 {
                    out.push((lo + (hi - lo) * k as f64 / (count - 1) as f64).exp());
                }
                out.push(max);
            }
        }
        Ok(out)
    }
}

/// Sweep axes; any subset may be present. Absent axes use the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxesSpec {
    #[serde(default)]
    pub r: Option<AxisSpec>,
    #[serde(default)]
    pub l_r: Option<AxisSpec>,
    #[serde(default)]
    pub c_r: Option<AxisSpec>,
    #[serde(default)]
    pub n: Option<AxisSpec>,
}

/// Seed block: `base`+`count` expands to `base..base+count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsSpec {
    #[serde(default)]
    pub values: Option<Vec<u64>>,
    #[serde(default)]
    pub base: Option<u64>,
    #[serde(default)]
    pub count: Option<u64>,
}

impl SeedsSpec {
    pub fn expand(&self) -> Result<Vec<u64>, Error> {
        if let Some(values) = &self.values {
            if values.is_empty() {
                return Err(Error::SpecParse("seeds: empty value list".into()));
            }
            return Ok(values.clone());
        }
        match (self.base, self.count) {
            (Some(base), Some(count)) if count > 0 => Ok((0..count).map(|k| base + k).collect()),
            _ => Err(Error::SpecParse(
                "seeds: need either `values` or `base`+`count`".into(),
            )),
        }
    }
}

/// Base simulation settings for every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub strategy: String,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_v0")]
    pub v0: f64,
    #[serde(default = "default_t_d")]
    pub t_d: f64,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_l_r")]
    pub l_r: f64,
    #[serde(default = "default_c_r")]
    pub c_r: f64,
    #[serde(default = "default_a_max")]
    pub a_max: f64,
    pub t_total: f64,
    pub t_measure: f64,
    #[serde(default = "default_dt_cap")]
    pub dt_cap: f64,
    #[serde(default = "default_record_stride")]
    pub record_stride: u32,
    #[serde(default = "default_true")]
    pub collisions: bool,
}

fn default_n() -> usize {
    20
}
fn default_alpha() -> f64 {
    0.001
}
fn default_beta() -> f64 {
    1.0
}
fn default_v0() -> f64 {
    0.12
}
fn default_t_d() -> f64 {
    2.5
}
fn default_r() -> f64 {
    0.15
}
fn default_l_r() -> f64 {
    1.0
}
fn default_c_r() -> f64 {
    1.0
}
fn default_a_max() -> f64 {
    0.6
}
fn default_dt_cap() -> f64 {
    0.015
}
fn default_record_stride() -> u32 {
    10
}
fn default_true() -> bool {
    true
}

/// A parsed and validated sweep specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: BaseSpec,
    #[serde(default)]
    pub axes: AxesSpec,
    pub seeds: SeedsSpec,
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let spec: SweepSpec =
            toml::from_str(text).map_err(|e| Error::SpecParse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn strategy(&self) -> Result<Strategy, Error> {
        self.base.strategy.parse()
    }

    pub fn validate(&self) -> Result<(), Error> {
        let strategy = self.strategy()?;
        let grid = self.grid()?;
        // cautiousness ranges per strategy
        let (lo, hi) = match strategy {
            Strategy::None => (0.0, f64::INFINITY),
            Strategy::Potential | Strategy::Gyro => (0.0, 1.0),
            Strategy::Cbc => (1e-5, 1e5),
            Strategy::Orca => (0.1, 10.0),
        };
        for &c_r in &grid.c_r_values {
            if !(lo..=hi).contains(&c_r) {
                return Err(Error::SpecParse(format!(
                    "c_r = {c_r} outside the tested range [{lo}, {hi}] for strategy {strategy}"
                )));
            }
        }
        for &n in &grid.n_values {
            if n < 1 {
                return Err(Error::SpecParse("n axis contains zero".into()));
            }
        }
        // every cell must be a valid simulation config
        for cell in grid.cells() {
            self.config_for(&cell, 0).validate()?;
        }
        Ok(())
    }

    /// Expanded axis values (base value when an axis is absent).
    pub fn grid(&self) -> Result<SweepGrid, Error> {
        let expand_or = |axis: &Option<AxisSpec>, name: &str, base: f64| match axis {
            Some(a) => a.expand(name),
            None => Ok(vec![base]),
        };
        let r_values = expand_or(&self.axes.r, "r", self.base.r)?;
        let l_r_values = expand_or(&self.axes.l_r, "l_r", self.base.l_r)?;
        let c_r_values = expand_or(&self.axes.c_r, "c_r", self.base.c_r)?;
        let n_values: Vec<usize> = match &self.axes.n {
            Some(a) => a
                .expand("n")?
                .into_iter()
                .map(|v| v.round() as usize)
                .collect(),
            None => vec![self.base.n],
        };
        Ok(SweepGrid {
            r_values,
            l_r_values,
            c_r_values,
            n_values,
            seeds: self.seeds.expand()?,
        })
    }

    /// Simulation config for one cell and seed.
    pub fn config_for(&self, cell: &SweepCell, seed: u64) -> SimConfig {
        let params = SwarmParams {
            n: cell.n,
            alpha: self.base.alpha,
            beta: self.base.beta,
            v0: self.base.v0,
            t_d: self.base.t_d,
            r: cell.r,
            l_r: cell.l_r,
            c_r: cell.c_r,
            a_max: self.base.a_max,
        };
        SimConfig {
            params,
            strategy: self.strategy().expect("validated"),
            seed,
            t_total: self.base.t_total,
            t_measure: self.base.t_measure,
            dt_cap: self.base.dt_cap,
            record_stride: self.base.record_stride,
            snapshot_times: Vec::new(),
            collisions_enabled: self.base.collisions,
        }
    }
}

/// Expanded axis values for a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub r_values: Vec<f64>,
    pub l_r_values: Vec<f64>,
    pub c_r_values: Vec<f64>,
    pub n_values: Vec<usize>,
    pub seeds: Vec<u64>,
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub r: f64,
    pub l_r: f64,
    pub c_r: f64,
    pub n: usize,
}

impl SweepGrid {
    pub fn cell_count(&self) -> usize {
        self.r_values.len() * self.l_r_values.len() * self.c_r_values.len() * self.n_values.len()
    }

    /// Cells in fixed lexicographic order (r, l_r, c_r, n).
    pub fn cells(&self) -> impl Iterator<Item = SweepCell> + '_ {
        self.r_values.iter().flat_map(move |&r| {
            self.l_r_values.iter().flat_map(move |&l_r| {
                self.c_r_values.iter().flat_map(move |&c_r| {
                    self.n_values.iter().map(move |&n| SweepCell { r, l_r, c_r, n })
                })
            })
        })
    }
}

/// Result of one (cell, seed) simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub r: f64,
    pub l_r: f64,
    pub c_r: f64,
    pub n: usize,
    pub seed: u64,
    /// Missing when the simulation aborted.
    pub lambda: Option<f64>,
    pub collisions: u64,
    pub diagnostics: RunDiagnostics,
    pub error: Option<String>,
}

/// Full sweep output: records sorted by (cell index, seed index).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid: SweepGrid,
    pub records: Vec<CellRecord>,
}

/// Stable content key for one (cell, seed) work item (FNV-1a over the
/// parameter bit patterns).
pub fn record_key(cell: &SweepCell, seed: u64) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |v: u64| {
        for byte in v.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(cell.r.to_bits());
    eat(cell.l_r.to_bits());
    eat(cell.c_r.to_bits());
    eat(cell.n as u64);
    eat(seed);
    h
}

fn run_one(spec: &SweepSpec, cell: &SweepCell, seed: u64) -> CellRecord {
    let config = spec.config_for(cell, seed);
    match run(&config) {
        Ok(out) => CellRecord {
            r: cell.r,
            l_r: cell.l_r,
            c_r: cell.c_r,
            n: cell.n,
            seed,
            lambda: Some(out.lambda),
            collisions: out.collisions(),
            diagnostics: out.diagnostics,
            error: None,
        },
        Err(e) => CellRecord {
            r: cell.r,
            l_r: cell.l_r,
            c_r: cell.c_r,
            n: cell.n,
            seed,
            lambda: None,
            collisions: 0,
            diagnostics: RunDiagnostics::default(),
            error: Some(e.to_string().replace([',', '\n'], ";")),
        },
    }
}

/// Execute the sweep. Results are identical regardless of `workers`.
/// `checkpoint` (JSONL, keyed by the record key) is appended as items
/// complete; items already present are not recomputed.
pub fn run_sweep(
    spec: &SweepSpec,
    workers: usize,
    checkpoint: Option<&Path>,
    progress: bool,
) -> Result<SweepResult, Error> {
    spec.validate()?;
    let grid = spec.grid()?;
    let cells: Vec<SweepCell> = grid.cells().collect();

    let mut done: Vec<Option<CellRecord>> = vec![None; cells.len() * grid.seeds.len()];
    let mut done_keys: HashSet<u64> = HashSet::new();
    if let Some(path) = checkpoint {
        if path.exists() {
            for (lineno, line) in fs::read_to_string(path)?.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CellRecord = serde_json::from_str(line).map_err(|e| {
                    Error::ResultsParse(format!("checkpoint line {}: {e}", lineno + 1))
                })?;
                let cell = SweepCell {
                    r: rec.r,
                    l_r: rec.l_r,
                    c_r: rec.c_r,
                    n: rec.n,
                };
                done_keys.insert(record_key(&cell, rec.seed));
                // place into the slot if it belongs to this grid
                if let Some(slot) = slot_index(&grid, &cells, &cell, rec.seed) {
                    done[slot] = Some(rec);
                }
            }
        }
    }

    let work: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..grid.seeds.len()).map(move |s| (c, s)))
        .filter(|&(c, s)| {
            done[c * grid.seeds.len() + s].is_none()
                && !done_keys.contains(&record_key(&cells[c], grid.seeds[s]))
        })
        .collect();

    let sink = match checkpoint {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            Some(Mutex::new(
                fs::OpenOptions::new().create(true).append(true).open(path)?,
            ))
        }
        None => None,
    };

    let total = work.len();
    let completed = std::sync::atomic::AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;

    let fresh: Vec<((usize, usize), CellRecord)> = pool.install(|| {
        work.par_iter()
            .map(|&(c, s)| {
                let rec = run_one(spec, &cells[c], grid.seeds[s]);
                if let Some(sink) = &sink {
                    let mut line = serde_json::to_string(&rec).expect("record serializes");
                    line.push('\n');
                    let mut file = sink.lock().expect("checkpoint lock");
                    let _ = file.write_all(line.as_bytes());
                    let _ = file.flush();
                }
                if progress {
                    let k = completed.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                    if k % 25 == 0 || k == total {
                        eprintln!("sweep: {k}/{total} simulations done");
                    }
                }
                ((c, s), rec)
            })
            .collect()
    });

    for ((c, s), rec) in fresh {
        done[c * grid.seeds.len() + s] = Some(rec);
    }

    let records: Vec<CellRecord> = done
        .into_iter()
        .enumerate()
        .map(|(i, rec)| {
            rec.unwrap_or_else(|| {
                // checkpoint key collision without a payload slot
                let c = i / grid.seeds.len();
                let s = i % grid.seeds.len();
                run_one(spec, &cells[c], grid.seeds[s])
            })
        })
        .collect();

    Ok(SweepResult { grid, records })
}

fn slot_index(
    grid: &SweepGrid,
    cells: &[SweepCell],
    cell: &SweepCell,
    seed: u64,
) -> Option<usize> {
    let s = grid.seeds.iter().position(|&x| x == seed)?;
    let c = cells.iter().position(|x| {
        x.r.to_bits() == cell.r.to_bits()
            && x.l_r.to_bits() == cell.l_r.to_bits()
            && x.c_r.to_bits() == cell.c_r.to_bits()
            && x.n == cell.n
    })?;
    Some(c * grid.seeds.len() + s)
}

/// Seed-averaged lambda for each (cell), missing seeds excluded.
fn seed_mean_lambda(records: &[CellRecord]) -> (Option<f64>, usize) {
    let mut sum = 0.0;
    let mut count = 0usize;
    for rec in records {
        if let Some(l) = rec.lambda {
            sum += l;
            count += 1;
        }
    }
    if count == 0 {
        (None, 0)
    } else {
        (Some(sum / count as f64), count)
    }
}

/// Best-cautiousness table over (r, l_r).
#[derive(Debug, Clone, PartialEq)]
pub struct FlatRow {
    pub r: f64,
    pub l_r: f64,
    /// Highest seed-averaged lambda over the c_r axis; missing when every
    /// cell failed.
    pub best_lambda: Option<f64>,
    pub best_c_r: Option<f64>,
    /// c_r cells with at least one successful seed.
    pub cells_used: usize,
}

/// Reduce the result cube over the c_r axis, keeping the best seed-averaged
/// lambda per (r, l_r). Ties prefer the smaller c_r.
pub fn flatten_best_cr(result: &SweepResult) -> Vec<FlatRow> {
    let g = &result.grid;
    let seeds = g.seeds.len();
    let n_len = g.n_values.len();
    let c_len = g.c_r_values.len();
    let mut rows = Vec::with_capacity(g.r_values.len() * g.l_r_values.len());
    for (ri, &r) in g.r_values.iter().enumerate() {
        for (li, &l_r) in g.l_r_values.iter().enumerate() {
            let mut best: Option<(f64, f64)> = None; // (lambda, c_r)
            let mut cells_used = 0usize;
            for (ci, &c_r) in g.c_r_values.iter().enumerate() {
                // average the lambda over seeds for every n in this slice
                for ni in 0..n_len {
                    let cell_idx = ((ri * g.l_r_values.len() + li) * c_len + ci) * n_len + ni;
                    let recs = &result.records[cell_idx * seeds..(cell_idx + 1) * seeds];
                    let (mean, _) = seed_mean_lambda(recs);
                    if let Some(mean) = mean {
                        cells_used += 1;
                        let better = match best {
                            None => true,
                            Some((bl, _)) => mean > bl,
                        };
                        if better {
                            best = Some((mean, c_r));
                        }
                    }
                }
            }
            rows.push(FlatRow {
                r,
                l_r,
                best_lambda: best.map(|(l, _)| l),
                best_c_r: best.map(|(_, c)| c),
                cells_used,
            });
        }
    }
    rows
}

/// Lambda as a function of r, averaged over the sensing radius.
#[derive(Debug, Clone, PartialEq)]
pub struct LineRow {
    pub r: f64,
    pub mean_best_lambda: Option<f64>,
    /// l_r cells contributing to the mean.
    pub count: usize,
}

pub fn average_over_lr(flat: &[FlatRow]) -> Vec<LineRow> {
    let mut rows: Vec<LineRow> = Vec::new();
    for row in flat {
        match rows.iter_mut().find(|r| r.r.to_bits() == row.r.to_bits()) {
            Some(line) => {
                if let Some(l) = row.best_lambda {
                    line.mean_best_lambda = Some(line.mean_best_lambda.unwrap_or(0.0) + l);
                    line.count += 1;
                }
            }
            None => rows.push(LineRow {
                r: row.r,
                mean_best_lambda: row.best_lambda,
                count: row.best_lambda.is_some() as usize,
            }),
        }
    }
    for line in &mut rows {
        if let Some(sum) = line.mean_best_lambda {
            line.mean_best_lambda = Some(sum / line.count as f64);
        }
    }
    rows
}

/// Seed-averaged lambda per (N, c_r) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub c_r: f64,
    pub mean_lambda: Option<f64>,
    pub seeds_used: usize,
}

pub fn scaling_table(result: &SweepResult) -> Vec<ScalingRow> {
    let g = &result.grid;
    let seeds = g.seeds.len();
    let n_len = g.n_values.len();
    let c_len = g.c_r_values.len();
    let mut rows = Vec::with_capacity(n_len * c_len);
    for (ni, &n) in g.n_values.iter().enumerate() {
        for (ci, &c_r) in g.c_r_values.iter().enumerate() {
            // other axes must be singleton for a scaling study
            let mut sum = 0.0;
            let mut used = 0usize;
            for ri in 0..g.r_values.len() {
                for li in 0..g.l_r_values.len() {
                    let cell_idx =
                        ((ri * g.l_r_values.len() + li) * c_len + ci) * n_len + ni;
                    let recs = &result.records[cell_idx * seeds..(cell_idx + 1) * seeds];
                    for rec in recs {
                        if let Some(l) = rec.lambda {
                            sum += l;
                            used += 1;
                        }
                    }
                }
            }
            rows.push(ScalingRow {
                n,
                c_r,
                mean_lambda: (used > 0).then(|| sum / used as f64),
                seeds_used: used,
            });
        }
    }
    rows
}

/// The agent-count study fixes every non-swept parameter; only CBC and ORCA
/// are compared.
pub fn validate_scaling_spec(spec: &SweepSpec) -> Result<(), Error> {
    let strategy = spec.strategy()?;
    if !matches!(strategy, Strategy::Cbc | Strategy::Orca) {
        return Err(Error::SpecParse(
            "scaling study requires strategy cbc or orca".into(),
        ));
    }
    if spec.axes.n.is_none() {
        return Err(Error::SpecParse("scaling study requires an n axis".into()));
    }
    if spec.axes.r.is_some() || spec.axes.l_r.is_some() {
        return Err(Error::SpecParse(
            "scaling study sweeps only n and c_r".into(),
        ));
    }
    let b = &spec.base;
    let fixed = [
        (b.r, 0.15, "r"),
        (b.l_r, 1.0, "l_r"),
        (b.alpha, 0.001, "alpha"),
        (b.t_d, 2.5, "t_d"),
        (b.beta, 1.0, "beta"),
        (b.v0, 0.12, "v0"),
        (b.a_max, 0.6, "a_max"),
    ];
    for (have, want, name) in fixed {
        if have != want {
            return Err(Error::SpecParse(format!(
                "scaling study fixes {name} = {want}, got {have}"
            )));
        }
    }
    Ok(())
}

// ---- delimited-text serialization ----

pub const RESULTS_HEADER: &str = "r,l_r,c_r,n,seed,lambda,collisions,qp_infeasible,brakes,barrier_breaches,lp_fallbacks,b_clamps,clip_saturations,degenerate_metric_agents,max_input_norm,error";

pub fn results_csv(result: &SweepResult) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for rec in &result.records {
        let d = &rec.diagnostics;
        let lambda = rec.lambda.map(|l| l.to_string()).unwrap_or_default();
        let error = rec.error.clone().unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            rec.r,
            rec.l_r,
            rec.c_r,
            rec.n,
            rec.seed,
            lambda,
            rec.collisions,
            d.avoidance.qp_infeasible,
            d.avoidance.brakes,
            d.avoidance.barrier_breaches,
            d.avoidance.lp_fallbacks,
            d.avoidance.b_clamps,
            d.clip_saturations,
            d.degenerate_metric_agents,
            d.max_input_norm,
            error
        ));
    }
    s
}

/// Parse a results file back into a `SweepResult`; axes are reconstructed as
/// the sorted distinct values present.
pub fn parse_results_csv(text: &str) -> Result<SweepResult, Error> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::ResultsParse("empty file".into()))?;
    if header != RESULTS_HEADER {
        return Err(Error::ResultsParse(format!("unexpected header: {header}")));
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 16 {
            return Err(Error::ResultsParse(format!(
                "line {}: expected 16 fields, got {}",
                lineno + 2,
                f.len()
            )));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64, Error> {
            s.parse()
                .map_err(|_| Error::ResultsParse(format!("line {}: bad {what}", lineno + 2)))
        };
        let parse_u = |s: &str, what: &str| -> Result<u64, Error> {
            s.parse()
                .map_err(|_| Error::ResultsParse(format!("line {}: bad {what}", lineno + 2)))
        };
        let lambda = if f[5].is_empty() {
            None
        } else {
            Some(parse_f(f[5], "lambda")?)
        };
        records.push(CellRecord {
            r: parse_f(f[0], "r")?,
            l_r: parse_f(f[1], "l_r")?,
            c_r: parse_f(f[2], "c_r")?,
            n: parse_u(f[3], "n")? as usize,
            seed: parse_u(f[4], "seed")?,
            lambda,
            collisions: parse_u(f[6], "collisions")?,
            diagnostics: RunDiagnostics {
                avoidance: crate::avoid::AvoidanceDiagnostics {
                    qp_infeasible: parse_u(f[7], "qp_infeasible")?,
                    brakes: parse_u(f[8], "brakes")?,
                    barrier_breaches: parse_u(f[9], "barrier_breaches")?,
                    lp_fallbacks: parse_u(f[10], "lp_fallbacks")?,
                    b_clamps: parse_u(f[11], "b_clamps")?,
                },
                clip_saturations: parse_u(f[12], "clip_saturations")?,
                degenerate_metric_agents: parse_u(f[13], "degenerate_metric_agents")?,
                max_input_norm: parse_f(f[14], "max_input_norm")?,
            },
            error: if f[15].is_empty() {
                None
            } else {
                Some(f[15].to_string())
            },
        });
    }

    let grid = reconstruct_grid(&records)?;
    let mut ordered: Vec<Option<CellRecord>> =
        vec![None; grid.cell_count() * grid.seeds.len()];
    let cells: Vec<SweepCell> = grid.cells().collect();
    for rec in records {
        let cell = SweepCell {
            r: rec.r,
            l_r: rec.l_r,
            c_r: rec.c_r,
            n: rec.n,
        };
        match slot_index(&grid, &cells, &cell, rec.seed) {
            Some(slot) => ordered[slot] = Some(rec),
            None => return Err(Error::ResultsParse("record outside grid".into())),
        }
    }
    let records: Vec<CellRecord> = ordered
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::ResultsParse("results file does not cover the full grid".into()))?;
    Ok(SweepResult { grid, records })
}

fn reconstruct_grid(records: &[CellRecord]) -> Result<SweepGrid, Error> {
    if records.is_empty() {
        return Err(Error::ResultsParse("no records".into()));
    }
    fn distinct_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::new();
        for x in values {
            if !v.iter().any(|y| y.to_bits() == x.to_bits()) {
                v.push(x);
            }
        }
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        v
    }
    let mut n_values: Vec<usize> = Vec::new();
    let mut seeds: Vec<u64> = Vec::new();
    for rec in records {
        if !n_values.contains(&rec.n) {
            n_values.push(rec.n);
        }
        if !seeds.contains(&rec.seed) {
            seeds.push(rec.seed);
        }
    }
    n_values.sort_unstable();
    seeds.sort_unstable();
    Ok(SweepGrid {
        r_values: distinct_sorted(records.iter().map(|r| r.r)),
        l_r_values: distinct_sorted(records.iter().map(|r| r.l_r)),
        c_r_values: distinct_sorted(records.iter().map(|r| r.c_r)),
        n_values,
        seeds,
    })
}

pub fn flat_csv(rows: &[FlatRow]) -> String {
    let mut s = String::from("r,l_r,best_lambda,best_c_r,cells_used\n");
    for row in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            row.r,
            row.l_r,
            row.best_lambda.map(|l| l.to_string()).unwrap_or_default(),
            row.best_c_r.map(|c| c.to_string()).unwrap_or_default(),
            row.cells_used
        ));
    }
    s
}

pub fn lines_csv(rows: &[LineRow]) -> String {
    let mut s = String::from("r,mean_best_lambda,l_r_count\n");
    for row in rows {
        s.push_str(&format!(
            "{},{},{}\n",
            row.r,
            row.mean_best_lambda
                .map(|l| l.to_string())
                .unwrap_or_default(),
            row.count
        ));
    }
    s
}

pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut s = String::from("n,c_r,mean_lambda,seeds_used\n");
    for row in rows {
        s.push_str(&format!(
            "{},{},{},{}\n",
            row.n,
            row.c_r,
            row.mean_lambda.map(|l| l.to_string()).unwrap_or_default(),
            row.seeds_used
        ));
    }
    s
}
