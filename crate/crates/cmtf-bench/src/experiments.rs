//! Experiment orchestration: accuracy tables, the missing-data recovery
//! curve, the clustering demonstration, and file-based fitting. All runs
//! are deterministic given the plan seeds; replicates may execute in
//! parallel.

use crate::cluster::{kmeans, purity};
use cmtf_core::coupled::CoupledDataset;
use cmtf_core::eval::{fms, fms_relaxed, normalize_model, paired_t_test, success, tcs};
use cmtf_core::io;
use cmtf_core::solver::{
    cmtf_als, cmtf_opt, truncated_svd, FitResult, Init, LineSearchConfig, StopConfig, StopReason,
};
use cmtf_core::synth::{
    gen_clustering_example, gen_mask, gen_scenario, Scenario, ScenarioConfig, WeightMode,
};
use cmtf_core::tensor::Matrix;
use cmtf_core::{CmtfError, Result};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Offset between the data seed and the fit's initialization seed, keeping
/// the two RNG streams disjoint. The initialization is data-driven (leading
/// singular vectors), so its seed only pads columns beyond what the data's
/// singular vectors can supply.
const INIT_SEED_OFFSET: u64 = 0x1000_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Algorithm {
    Opt,
    Als,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Opt => "opt",
            Algorithm::Als => "als",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "opt" => Ok(Algorithm::Opt),
            "als" => Ok(Algorithm::Als),
            other => Err(format!("unknown algorithm {:?} (use opt or als)", other)),
        }
    }
}

pub fn scenario_name(s: Scenario) -> &'static str {
    match s {
        Scenario::TensorMatrix => "tensor-matrix",
        Scenario::TensorTensor => "tensor-tensor",
        Scenario::TensorTwoMatrices => "tensor-two-matrices",
    }
}

pub fn parse_scenario(s: &str) -> std::result::Result<Scenario, String> {
    match s {
        "tensor-matrix" | "1" => Ok(Scenario::TensorMatrix),
        "tensor-tensor" | "2" => Ok(Scenario::TensorTensor),
        "tensor-two-matrices" | "3" => Ok(Scenario::TensorTwoMatrices),
        other => Err(format!("unknown scenario {:?}", other)),
    }
}

pub fn parse_weight_mode(s: &str) -> std::result::Result<WeightMode, String> {
    match s {
        "unit" => Ok(WeightMode::Unit),
        "random-integer" => Ok(WeightMode::RandomInteger),
        other => Err(format!("unknown weight mode {:?}", other)),
    }
}

pub fn weight_mode_name(m: WeightMode) -> &'static str {
    match m {
        WeightMode::Unit => "unit",
        WeightMode::RandomInteger => "random-integer",
    }
}

/// Fits one dataset with the requested algorithm under default stopping
/// rules. Benchmarks initialize from the leading singular vectors of the
/// data unfoldings, so fits are deterministic given the data; the seed only
/// pads extra factor columns when the rank exceeds the data dimensions.
pub fn fit_dataset(
    data: &CoupledDataset,
    rank: usize,
    algorithm: Algorithm,
    init_seed: u64,
) -> Result<FitResult> {
    fit_dataset_with_init(data, rank, algorithm, &Init::Svd(init_seed))
}

/// Fits with an explicit initialization strategy.
pub fn fit_dataset_with_init(
    data: &CoupledDataset,
    rank: usize,
    algorithm: Algorithm,
    init: &Init,
) -> Result<FitResult> {
    match algorithm {
        Algorithm::Opt => cmtf_opt(
            data,
            rank,
            init,
            &StopConfig::opt_default(),
            &LineSearchConfig::default(),
        ),
        Algorithm::Als => cmtf_als(data, rank, init, &StopConfig::als_default()),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub scenarios: Vec<Scenario>,
    pub etas: Vec<f64>,
    pub rank: usize,
    pub fit_ranks: Vec<usize>,
    pub replicates: usize,
    pub algorithms: Vec<Algorithm>,
    pub weight_mode: WeightMode,
    pub base_seed: u64,
    pub out_dir: PathBuf,
    pub jobs: usize,
}

impl ExperimentPlan {
    fn validate(&self) -> Result<()> {
        if self.replicates == 0
            || self.scenarios.is_empty()
            || self.etas.is_empty()
            || self.fit_ranks.is_empty()
            || self.algorithms.is_empty()
        {
            return Err(CmtfError::InvalidArgument(
                "plan needs at least one scenario, eta, fit rank, algorithm, and replicate".into(),
            ));
        }
        if self.fit_ranks.iter().any(|&r| r < self.rank) {
            return Err(CmtfError::InvalidArgument(
                "fit ranks must be >= the generating rank".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ResultRow {
    pub scenario: Scenario,
    pub eta: f64,
    pub fit_rank: usize,
    pub algorithm: Algorithm,
    pub replicate: usize,
    pub seed: u64,
    pub fms: f64,
    pub fms_relaxed: f64,
    pub success: bool,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub func_evals: usize,
    pub final_objective: f64,
    pub wall_ms: u128,
}

pub const RAW_HEADER: &str = "scenario,eta,fit_rank,algorithm,replicate,seed,fms,fms_relaxed,success,stop_reason,iterations,func_evals,final_objective,wall_ms";

fn fexact(v: f64) -> String {
    format!("{:.16e}", v)
}

impl ResultRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            scenario_name(self.scenario),
            self.eta,
            self.fit_rank,
            self.algorithm,
            self.replicate,
            self.seed,
            fexact(self.fms),
            fexact(self.fms_relaxed),
            self.success,
            self.stop_reason,
            self.iterations,
            self.func_evals,
            fexact(self.final_objective),
            self.wall_ms
        )
    }
}

/// Runs one (cell, algorithm, replicate) task.
pub fn run_replicate(
    scenario: Scenario,
    eta: f64,
    weight_mode: WeightMode,
    rank: usize,
    fit_rank: usize,
    algorithm: Algorithm,
    replicate: usize,
    data_seed: u64,
) -> Result<ResultRow> {
    let mut cfg = ScenarioConfig::desk(scenario, eta, weight_mode, data_seed);
    cfg.rank = rank;
    let truth = gen_scenario(&cfg)?;
    let start = Instant::now();
    let result = fit_dataset(
        &truth.dataset,
        fit_rank,
        algorithm,
        data_seed + INIT_SEED_OFFSET,
    )?;
    let wall_ms = start.elapsed().as_millis();

    let truth_wk = truth.to_weighted_kruskal();
    // a degenerate fit can leave a zero column; score it as a total miss
    let (score, relaxed) = match normalize_model(&result.model, &truth.side_modes) {
        Ok(est_wk) => (
            fms(&truth_wk, &est_wk)?.score,
            fms_relaxed(&truth_wk, &est_wk)?.score,
        ),
        Err(_) => (0.0, 0.0),
    };
    Ok(ResultRow {
        scenario,
        eta,
        fit_rank,
        algorithm,
        replicate,
        seed: data_seed,
        fms: score,
        fms_relaxed: relaxed,
        success: success(score, truth.num_factor_matrices()),
        stop_reason: result.stop_reason,
        iterations: result.iterations,
        func_evals: result.func_evals,
        final_objective: result.final_objective(),
        wall_ms,
    })
}

fn run_parallel<T, F>(jobs: usize, tasks: Vec<T>, f: F) -> Result<Vec<ResultRow>>
where
    T: Sync,
    F: Fn(&T) -> Result<ResultRow> + Sync,
    ResultRow: Send,
{
    let run = || tasks.par_iter().map(&f).collect::<Result<Vec<_>>>();
    if jobs == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CmtfError::InvalidArgument(e.to_string()))?;
        pool.install(run)
    }
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        scenario_name(a.scenario)
            .cmp(scenario_name(b.scenario))
            .then(a.eta.partial_cmp(&b.eta).unwrap())
            .then(a.fit_rank.cmp(&b.fit_rank))
            .then(a.algorithm.cmp(&b.algorithm))
            .then(a.replicate.cmp(&b.replicate))
    });
}

/// Per-cell summary of raw rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub scenario: String,
    pub eta: String,
    pub fit_rank: usize,
    pub opt_success_pct: Option<f64>,
    pub opt_mean_fms: Option<f64>,
    pub als_success_pct: Option<f64>,
    pub als_mean_fms: Option<f64>,
    pub p_value: Option<f64>,
    pub p_degenerate: bool,
}

pub const AGGREGATE_HEADER: &str = "scenario,eta,fit_rank,opt_success_pct,opt_mean_fms,als_success_pct,als_mean_fms,p_value,p_degenerate";

fn opt_fmt(v: Option<f64>) -> String {
    v.map(fexact).unwrap_or_default()
}

impl AggregateRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.eta,
            self.fit_rank,
            opt_fmt(self.opt_success_pct),
            opt_fmt(self.opt_mean_fms),
            opt_fmt(self.als_success_pct),
            opt_fmt(self.als_mean_fms),
            opt_fmt(self.p_value),
            self.p_degenerate
        )
    }
}

/// Minimal raw-row view used for aggregation (also reconstructable from a
/// raw CSV file, which is what `verify` does).
#[derive(Debug, Clone)]
pub struct RawKey {
    pub scenario: String,
    pub eta: String,
    pub fit_rank: usize,
    pub algorithm: Algorithm,
    pub replicate: usize,
    pub fms: f64,
    pub success: bool,
}

pub fn aggregate(rows: &[RawKey]) -> Result<Vec<AggregateRow>> {
    let mut cells: Vec<(String, String, usize)> = rows
        .iter()
        .map(|r| (r.scenario.clone(), r.eta.clone(), r.fit_rank))
        .collect();
    cells.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.parse::<f64>().unwrap().partial_cmp(&b.1.parse::<f64>().unwrap()).unwrap())
            .then(a.2.cmp(&b.2))
    });
    cells.dedup();

    let mut out = Vec::new();
    for (scenario, eta, fit_rank) in cells {
        let cell: Vec<&RawKey> = rows
            .iter()
            .filter(|r| r.scenario == scenario && r.eta == eta && r.fit_rank == fit_rank)
            .collect();
        let series = |algo: Algorithm| -> Vec<&RawKey> {
            let mut v: Vec<&RawKey> = cell
                .iter()
                .copied()
                .filter(|r| r.algorithm == algo)
                .collect();
            v.sort_by_key(|r| r.replicate);
            v
        };
        let stats = |v: &[&RawKey]| -> (Option<f64>, Option<f64>) {
            if v.is_empty() {
                (None, None)
            } else {
                let n = v.len() as f64;
                (
                    Some(100.0 * v.iter().filter(|r| r.success).count() as f64 / n),
                    Some(v.iter().map(|r| r.fms).sum::<f64>() / n),
                )
            }
        };
        let opt_rows = series(Algorithm::Opt);
        let als_rows = series(Algorithm::Als);
        let (opt_success_pct, opt_mean_fms) = stats(&opt_rows);
        let (als_success_pct, als_mean_fms) = stats(&als_rows);
        let (p_value, p_degenerate) = if opt_rows.len() >= 2 && opt_rows.len() == als_rows.len() {
            let a: Vec<f64> = opt_rows.iter().map(|r| r.fms).collect();
            let b: Vec<f64> = als_rows.iter().map(|r| r.fms).collect();
            let t = paired_t_test(&a, &b)?;
            (Some(t.p), t.degenerate)
        } else {
            (None, false)
        };
        out.push(AggregateRow {
            scenario,
            eta,
            fit_rank,
            opt_success_pct,
            opt_mean_fms,
            als_success_pct,
            als_mean_fms,
            p_value,
            p_degenerate,
        });
    }
    Ok(out)
}

fn raw_key(row: &ResultRow) -> RawKey {
    RawKey {
        scenario: scenario_name(row.scenario).to_string(),
        eta: row.eta.to_string(),
        fit_rank: row.fit_rank,
        algorithm: row.algorithm,
        replicate: row.replicate,
        fms: row.fms,
        success: row.success,
    }
}

/// Runs the full accuracy-table sweep and writes `raw.csv` plus
/// `aggregate.csv` into the plan's output directory.
pub fn run_accuracy_tables(plan: &ExperimentPlan) -> Result<(PathBuf, PathBuf)> {
    plan.validate()?;
    let mut tasks = Vec::new();
    for &scenario in &plan.scenarios {
        for &eta in &plan.etas {
            for &fit_rank in &plan.fit_ranks {
                for &algorithm in &plan.algorithms {
                    for replicate in 0..plan.replicates {
                        tasks.push((scenario, eta, fit_rank, algorithm, replicate));
                    }
                }
            }
        }
    }
    let weight_mode = plan.weight_mode;
    let rank = plan.rank;
    let base = plan.base_seed;
    let mut rows = run_parallel(plan.jobs, tasks, |&(scenario, eta, fit_rank, algorithm, replicate)| {
        run_replicate(
            scenario,
            eta,
            weight_mode,
            rank,
            fit_rank,
            algorithm,
            replicate,
            base + replicate as u64,
        )
    })?;
    sort_rows(&mut rows);

    std::fs::create_dir_all(&plan.out_dir)?;
    let raw_path = plan.out_dir.join("raw.csv");
    let mut raw = String::from(RAW_HEADER);
    raw.push('\n');
    for row in &rows {
        raw.push_str(&row.csv_line());
        raw.push('\n');
    }
    std::fs::write(&raw_path, raw)?;

    let keys: Vec<RawKey> = rows.iter().map(raw_key).collect();
    let agg_rows = aggregate(&keys)?;
    let agg_path = plan.out_dir.join("aggregate.csv");
    let mut agg = String::from(AGGREGATE_HEADER);
    agg.push('\n');
    for row in &agg_rows {
        agg.push_str(&row.csv_line());
        agg.push('\n');
    }
    std::fs::write(&agg_path, agg)?;
    Ok((raw_path, agg_path))
}

/// Parses a raw accuracy CSV back into aggregation keys.
pub fn parse_raw_csv(text: &str) -> Result<Vec<RawKey>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RAW_HEADER => {}
        _ => return Err(CmtfError::Parse("unexpected raw CSV header".into())),
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 14 {
            return Err(CmtfError::Parse(format!("bad raw CSV line {:?}", line)));
        }
        out.push(RawKey {
            scenario: fields[0].to_string(),
            eta: fields[1].to_string(),
            fit_rank: fields[2]
                .parse()
                .map_err(|_| CmtfError::Parse("bad fit_rank".into()))?,
            algorithm: fields[3]
                .parse()
                .map_err(|e: String| CmtfError::Parse(e))?,
            replicate: fields[4]
                .parse()
                .map_err(|_| CmtfError::Parse("bad replicate".into()))?,
            fms: fields[6]
                .parse()
                .map_err(|_| CmtfError::Parse("bad fms".into()))?,
            success: fields[8]
                .parse()
                .map_err(|_| CmtfError::Parse("bad success flag".into()))?,
        });
    }
    Ok(out)
}

/// Recomputes the aggregate from a raw CSV and compares it byte-for-byte
/// with an aggregate CSV. Returns the mismatching lines, empty on success.
pub fn verify_tables(raw_text: &str, aggregate_text: &str) -> Result<Vec<String>> {
    let keys = parse_raw_csv(raw_text)?;
    let rows = aggregate(&keys)?;
    let mut expect = String::from(AGGREGATE_HEADER);
    expect.push('\n');
    for row in &rows {
        expect.push_str(&row.csv_line());
        expect.push('\n');
    }
    if expect == aggregate_text {
        return Ok(Vec::new());
    }
    let mut diffs = Vec::new();
    for (e, g) in expect.lines().zip(aggregate_text.lines()) {
        if e != g {
            diffs.push(format!("expected {:?}, found {:?}", e, g));
        }
    }
    let (el, gl) = (expect.lines().count(), aggregate_text.lines().count());
    if el != gl {
        diffs.push(format!("line counts differ: expected {}, found {}", el, gl));
    }
    Ok(diffs)
}

#[derive(Debug, Clone)]
pub struct MissingRow {
    pub fraction: f64,
    pub replicate: usize,
    pub data_seed: u64,
    pub mask_seed: u64,
    pub cp_tcs: f64,
    pub cmtf_tcs: f64,
    pub cp_stop: StopReason,
    pub cmtf_stop: StopReason,
    pub wall_ms: u128,
}

pub const MISSING_RAW_HEADER: &str =
    "fraction,replicate,data_seed,mask_seed,cp_tcs,cmtf_tcs,cp_stop,cmtf_stop,wall_ms";
pub const MISSING_AGG_HEADER: &str = "fraction,cp_mean_tcs,cmtf_mean_tcs";

/// Missing-data recovery comparison: CP on the masked tensor alone versus
/// the coupled factorization of the masked tensor plus its side matrix.
pub fn run_missing_curve(
    fractions: &[f64],
    replicates: usize,
    rank: usize,
    base_seed: u64,
    out_dir: &Path,
    jobs: usize,
) -> Result<(PathBuf, PathBuf)> {
    if fractions.iter().any(|&f| !(0.0..=0.95).contains(&f)) {
        return Err(CmtfError::InvalidArgument(
            "missing fractions must lie in [0, 0.95]".into(),
        ));
    }
    let mut tasks = Vec::new();
    for (fi, &fraction) in fractions.iter().enumerate() {
        for replicate in 0..replicates {
            tasks.push((fi, fraction, replicate));
        }
    }
    let rows: Vec<MissingRow> = {
        let run = |&(fi, fraction, replicate): &(usize, f64, usize)| -> Result<MissingRow> {
            let data_seed = base_seed + replicate as u64;
            let mask_seed = base_seed + 10_000 * (fi as u64 + 1) + replicate as u64;
            let cfg = ScenarioConfig::desk(
                Scenario::TensorMatrix,
                0.0,
                WeightMode::Unit,
                data_seed,
            );
            let mut cfg = cfg;
            cfg.rank = rank;
            let truth = gen_scenario(&cfg)?;
            let mask = gen_mask(&cfg.shape, fraction, mask_seed)?;
            let x = truth.dataset.tensor.clone();
            let start = Instant::now();

            let cp_data = CoupledDataset::new(x.clone(), Some(mask.clone()), vec![])?;
            let cp_fit = fit_dataset(&cp_data, rank, Algorithm::Opt, data_seed + INIT_SEED_OFFSET)?;
            let cmtf_data = CoupledDataset::new(
                x.clone(),
                Some(mask.clone()),
                truth.dataset.sides.clone(),
            )?;
            let cmtf_fit = fit_dataset(
                &cmtf_data,
                rank,
                Algorithm::Opt,
                data_seed + 2 * INIT_SEED_OFFSET,
            )?;
            let wall_ms = start.elapsed().as_millis();

            // with nothing missing the completion error is trivially zero
            let score = |fit: &FitResult| -> Result<f64> {
                if fraction == 0.0 {
                    return Ok(0.0);
                }
                tcs(&x, &mask, &fit.model.reconstruct_tensor())
            };
            Ok(MissingRow {
                fraction,
                replicate,
                data_seed,
                mask_seed,
                cp_tcs: score(&cp_fit)?,
                cmtf_tcs: score(&cmtf_fit)?,
                cp_stop: cp_fit.stop_reason,
                cmtf_stop: cmtf_fit.stop_reason,
                wall_ms,
            })
        };
        let collect = || tasks.par_iter().map(run).collect::<Result<Vec<_>>>();
        if jobs == 0 {
            collect()?
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| CmtfError::InvalidArgument(e.to_string()))?
                .install(collect)?
        }
    };
    let mut rows = rows;
    rows.sort_by(|a, b| {
        a.fraction
            .partial_cmp(&b.fraction)
            .unwrap()
            .then(a.replicate.cmp(&b.replicate))
    });

    std::fs::create_dir_all(out_dir)?;
    let raw_path = out_dir.join("missing_raw.csv");
    let mut raw = String::from(MISSING_RAW_HEADER);
    raw.push('\n');
    for r in &rows {
        raw.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.fraction,
            r.replicate,
            r.data_seed,
            r.mask_seed,
            fexact(r.cp_tcs),
            fexact(r.cmtf_tcs),
            r.cp_stop,
            r.cmtf_stop,
            r.wall_ms
        ));
    }
    std::fs::write(&raw_path, raw)?;

    let agg_path = out_dir.join("missing_aggregate.csv");
    let mut agg = String::from(MISSING_AGG_HEADER);
    agg.push('\n');
    for &fraction in fractions {
        let cell: Vec<&MissingRow> = rows.iter().filter(|r| r.fraction == fraction).collect();
        let n = cell.len() as f64;
        let cp = cell.iter().map(|r| r.cp_tcs).sum::<f64>() / n;
        let cm = cell.iter().map(|r| r.cmtf_tcs).sum::<f64>() / n;
        agg.push_str(&format!("{},{},{}\n", fraction, fexact(cp), fexact(cm)));
    }
    std::fs::write(&agg_path, agg)?;
    Ok((raw_path, agg_path))
}

/// One mode-0 coordinate set per method, plus its k-means purity.
#[derive(Debug, Clone)]
pub struct ClusteringOutcome {
    pub labels: Vec<usize>,
    /// (method name, coordinates) with one [x, y] row per entity.
    pub coordinates: Vec<(&'static str, Vec<Vec<f64>>)>,
    /// (method name, purity) in the same order.
    pub purities: Vec<(&'static str, f64)>,
}

pub fn run_clustering_demo(
    i: usize,
    j: usize,
    k: usize,
    m: usize,
    noise_scale: f64,
    seed: u64,
) -> Result<ClusteringOutcome> {
    let ex = gen_clustering_example(i, j, k, m, noise_scale, seed)?;

    // rank-2 SVD of the side matrix: left singular vectors as coordinates
    let (u, _s, _v) = truncated_svd(&ex.side, 2)?;
    let svd_coords = matrix_rows(&u);

    // rank-2 CP of the tensor alone
    let cp_data = CoupledDataset::new(ex.tensor.clone(), None, vec![])?;
    let cp_fit = fit_dataset(&cp_data, 2, Algorithm::Opt, seed + INIT_SEED_OFFSET)?;
    let cp_coords = matrix_rows(&entity_coordinates(&cp_fit.model.tensor_factors[0])?);

    // rank-2 coupled factorization of tensor and matrix
    let cmtf_data =
        CoupledDataset::new(ex.tensor.clone(), None, vec![(0, ex.side.clone())])?;
    let cmtf_fit = fit_dataset(&cmtf_data, 2, Algorithm::Opt, seed + 2 * INIT_SEED_OFFSET)?;
    let cmtf_coords = matrix_rows(&entity_coordinates(&cmtf_fit.model.tensor_factors[0])?);

    let coordinates = vec![
        ("svd", svd_coords),
        ("cp", cp_coords),
        ("cmtf", cmtf_coords),
    ];
    let purities = coordinates
        .iter()
        .map(|(name, coords)| {
            let assign = kmeans(coords, 4, seed + 3 * INIT_SEED_OFFSET, 10);
            (*name, purity(&assign, &ex.labels))
        })
        .collect();
    Ok(ClusteringOutcome {
        labels: ex.labels,
        coordinates,
        purities,
    })
}

/// Orthonormal basis of a fitted entity factor, used as scatter
/// coordinates. The factorization objective pins down the factor's column
/// space but not a well-scaled basis for it: the matrix term is invariant
/// to any in-span change of basis, so a fit can park both columns nearly
/// collinear while the span still carries the second discriminating
/// direction. The left singular vectors recover that span with unit scale
/// per axis, matching the coordinates the plain matrix SVD method uses.
fn entity_coordinates(f: &Matrix) -> Result<Matrix> {
    let (u, _s, _v) = truncated_svd(f, f.cols().min(f.rows()))?;
    Ok(u)
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| m[(r, c)]).collect())
        .collect()
}

pub const CLUSTERING_HEADER: &str = "method,row,label,x,y";

pub fn clustering_csv(outcome: &ClusteringOutcome) -> String {
    let mut out = String::from(CLUSTERING_HEADER);
    out.push('\n');
    for (method, coords) in &outcome.coordinates {
        for (row, xy) in coords.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                method,
                row,
                outcome.labels[row],
                fexact(xy[0]),
                fexact(xy[1])
            ));
        }
    }
    out
}

/// Minimal SVG scatter of the three coordinate sets, colored by label.
pub fn clustering_svg(outcome: &ClusteringOutcome) -> String {
    const COLORS: [&str; 4] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"];
    let panel = 240.0;
    let pad = 24.0;
    let width = panel * outcome.coordinates.len() as f64;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n",
        width, panel
    );
    for (pi, (method, coords)) in outcome.coordinates.iter().enumerate() {
        let (mut xmin, mut xmax, mut ymin, mut ymax) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for xy in coords {
            xmin = xmin.min(xy[0]);
            xmax = xmax.max(xy[0]);
            ymin = ymin.min(xy[1]);
            ymax = ymax.max(xy[1]);
        }
        let sx = |x: f64| {
            pi as f64 * panel + pad + (x - xmin) / (xmax - xmin).max(1e-12) * (panel - 2.0 * pad)
        };
        let sy = |y: f64| pad + (ymax - y) / (ymax - ymin).max(1e-12) * (panel - 2.0 * pad);
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"14\" font-size=\"12\">{}</text>\n",
            pi as f64 * panel + pad,
            method
        ));
        for (row, xy) in coords.iter().enumerate() {
            svg.push_str(&format!(
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{}\"/>\n",
                sx(xy[0]),
                sy(xy[1]),
                COLORS[outcome.labels[row] % 4]
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// File-based fit: parses the tensor (and optional mask / side matrices),
/// fits, and writes factor matrices, the objective trace, and a report
/// manifest into `out_dir`. Nothing is written before all inputs parse.
pub fn fit_files(
    tensor_path: &Path,
    mask_path: Option<&Path>,
    side_specs: &[(usize, PathBuf)],
    rank: usize,
    algorithm: Algorithm,
    init_seed: u64,
    out_dir: &Path,
) -> Result<FitResult> {
    let tensor = io::read_tensor(tensor_path)?;
    let mask = mask_path.map(io::read_tensor).transpose()?;
    let mut sides = Vec::new();
    for (mode, path) in side_specs {
        sides.push((*mode, io::read_matrix(path)?));
    }
    let data = CoupledDataset::new(tensor, mask, sides)?;
    let result = fit_dataset(&data, rank, algorithm, init_seed)?;

    std::fs::create_dir_all(out_dir)?;
    for (n, f) in result.model.tensor_factors.iter().enumerate() {
        io::write_matrix(out_dir.join(format!("factor_mode{}.txt", n)), f)?;
    }
    for (m, v) in result.model.side_factors.iter().enumerate() {
        io::write_matrix(out_dir.join(format!("factor_side{}.txt", m)), v)?;
    }
    let trace: String = result
        .objective_trace
        .iter()
        .map(|v| format!("{:.16e}\n", v))
        .collect();
    std::fs::write(out_dir.join("objective_trace.txt"), trace)?;
    io::write_manifest(
        out_dir.join("report.txt"),
        &[
            ("stop_reason".into(), result.stop_reason.to_string()),
            ("iterations".into(), result.iterations.to_string()),
            ("func_evals".into(), result.func_evals.to_string()),
            (
                "final_objective".into(),
                format!("{:.16e}", result.final_objective()),
            ),
        ],
    )?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregate_single_replicate_noiseless() {
        // one replicate, eta 0: both algorithms succeed with FMS ~ 1
        let rows: Vec<RawKey> = [Algorithm::Opt, Algorithm::Als]
            .iter()
            .map(|&algorithm| {
                let row = run_replicate(
                    Scenario::TensorMatrix,
                    0.0,
                    WeightMode::Unit,
                    3,
                    3,
                    algorithm,
                    0,
                    77,
                )
                .unwrap();
                assert!(row.success, "{:?} fms {}", algorithm, row.fms);
                assert!(row.fms > 0.999);
                raw_key(&row)
            })
            .collect();
        let agg = aggregate(&rows).unwrap();
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].opt_success_pct, Some(100.0));
        assert_eq!(agg[0].als_success_pct, Some(100.0));
    }

    #[test]
    fn p_value_of_identical_series_is_degenerate_one() {
        let mk = |algorithm, replicate| RawKey {
            scenario: "tensor-matrix".into(),
            eta: "0.1".into(),
            fit_rank: 3,
            algorithm,
            replicate,
            fms: 0.9,
            success: true,
        };
        let rows: Vec<RawKey> = (0..5)
            .flat_map(|r| vec![mk(Algorithm::Opt, r), mk(Algorithm::Als, r)])
            .collect();
        let agg = aggregate(&rows).unwrap();
        assert_eq!(agg[0].p_value, Some(1.0));
        assert!(agg[0].p_degenerate);
    }

    #[test]
    fn raw_csv_round_trip_preserves_aggregation() {
        let row = run_replicate(
            Scenario::TensorTwoMatrices,
            0.1,
            WeightMode::Unit,
            3,
            3,
            Algorithm::Opt,
            0,
            5,
        )
        .unwrap();
        let text = format!("{}\n{}\n", RAW_HEADER, row.csv_line());
        let keys = parse_raw_csv(&text).unwrap();
        assert_eq!(keys.len(), 1);
        assert_eq!(keys[0].fms, row.fms); // 17-digit round trip is exact
        assert_eq!(keys[0].success, row.success);
    }
}
