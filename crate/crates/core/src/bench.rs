//! Monte-Carlo benchmark harness and beampattern export.
//!
//! Trials are seeded independently from (master seed, trial index), so
//! summaries are identical for any thread count; only latency columns vary
//! between runs. Reported gains are normalized per weight vector by its own
//! grid peak (queried directions included), so every gain is <= 0 dB and
//! methods are comparable on one scale.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{
    random_scenario, sample_covariance, steering_vector, synthesize_snapshots, ArrayGeometry,
    Direction, Scenario, ScenarioDistribution,
};
use crate::beamformer::{
    capon_weights, coordinate_descent, greedy_sample, naive_quantize, objective, oracle_search,
    ObjectiveParams,
};
use crate::error::{Error, Result};
use crate::linalg::{inner, quadratic_form, HermitianMatrix};
use crate::policy::{gbdt_refine, load_model, GbdtModel};
use crate::seed::derive_seed;

/// Gains are clamped here so JSON output never needs -inf (a pattern null
/// can be exactly zero power).
pub const GAIN_FLOOR_DB: f64 = -400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodId {
    Capon,
    Naive,
    Oracle,
    Greedy,
    CoordDescent,
    GbdtRefine,
}

pub const ALL_METHODS: [MethodId; 6] = [
    MethodId::Capon,
    MethodId::Naive,
    MethodId::Oracle,
    MethodId::Greedy,
    MethodId::CoordDescent,
    MethodId::GbdtRefine,
];

impl MethodId {
    pub fn name(&self) -> &'static str {
        match self {
            MethodId::Capon => "capon",
            MethodId::Naive => "naive",
            MethodId::Oracle => "oracle",
            MethodId::Greedy => "greedy",
            MethodId::CoordDescent => "coord_descent",
            MethodId::GbdtRefine => "gbdt_refine",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL_METHODS
            .iter()
            .find(|m| m.name() == s)
            .copied()
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown method '{s}' (expected one of: capon, naive, oracle, greedy, \
                     coord_descent, gbdt_refine)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub step_deg: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { step_deg: 2.0 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_deg >= 1.0 && self.step_deg.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid step {} deg below the 1 deg resolution floor",
                self.step_deg
            )));
        }
        Ok(())
    }

    /// Azimuth samples 0 <= az < 360.
    pub fn azimuths(&self) -> Vec<f64> {
        let mut v = Vec::new();
        let mut i = 0u32;
        loop {
            let az = self.step_deg * f64::from(i);
            if az >= 360.0 {
                return v;
            }
            v.push(az);
            i += 1;
        }
    }

    /// Elevation samples 0 <= el <= 90.
    pub fn elevations(&self) -> Vec<f64> {
        let mut v = Vec::new();
        let mut i = 0u32;
        loop {
            let el = self.step_deg * f64::from(i);
            if el > 90.0 {
                return v;
            }
            v.push(el);
            i += 1;
        }
    }
}

/// Precomputed steering vectors over a full grid; built once and reused for
/// every weight vector evaluated against the same geometry.
struct GridTable {
    azimuths: Vec<f64>,
    elevations: Vec<f64>,
    /// Steering vectors in el-major order: index `e * n_az + a`.
    steers: Vec<Vec<Complex64>>,
}

impl GridTable {
    fn new(geom: &ArrayGeometry, grid: &GridSpec) -> Result<Self> {
        grid.validate()?;
        let azimuths = grid.azimuths();
        let elevations = grid.elevations();
        let mut steers = Vec::with_capacity(azimuths.len() * elevations.len());
        for &el in &elevations {
            for &az in &azimuths {
                let dir = Direction::new(az, el)?;
                steers.push(steering_vector(geom, &dir));
            }
        }
        Ok(GridTable {
            azimuths,
            elevations,
            steers,
        })
    }

    /// Max of |w^H a(.)|^2 over the grid.
    fn peak_power(&self, w: &[Complex64]) -> f64 {
        self.steers
            .iter()
            .map(|a| inner(w, a).norm_sqr())
            .fold(0.0, f64::max)
    }
}

fn power_toward(w: &[Complex64], geom: &ArrayGeometry, dir: &Direction) -> f64 {
    inner(w, &steering_vector(geom, dir)).norm_sqr()
}

fn ratio_db(power: f64, peak: f64) -> f64 {
    let db = 10.0 * (power / peak).log10();
    if db.is_nan() || db < GAIN_FLOOR_DB {
        GAIN_FLOOR_DB
    } else {
        db
    }
}

/// Gain toward `dir` normalized by the pattern's own peak over the grid
/// (including `dir` itself, so off-grid queries still report <= 0 dB).
pub fn beampattern_gain_db(
    w: &[Complex64],
    geom: &ArrayGeometry,
    dir: &Direction,
    grid: &GridSpec,
) -> Result<f64> {
    let table = GridTable::new(geom, grid)?;
    let p = power_toward(w, geom, dir);
    let peak = table.peak_power(w).max(p);
    if peak <= 0.0 {
        return Err(Error::InvalidArgument(
            "beampattern of an all-zero weight vector".into(),
        ));
    }
    Ok(ratio_db(p, peak))
}

/// One method's result within a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: MethodId,
    pub sat_gain_db: f64,
    /// Worst (largest) gain across jammers.
    pub intf_gain_db: f64,
    pub objective: f64,
    /// Solve wall time only; snapshot synthesis and gain evaluation excluded.
    pub latency_ns: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub symbols: Option<Vec<u8>>,
    /// Complex weights as (re, im) pairs, for continuous methods.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weights: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub scenario_id: u64,
    pub scenario: Scenario,
    pub outcomes: Vec<MethodOutcome>,
}

/// Everything `run_trial` needs beyond the scenario itself.
pub struct TrialOptions<'a> {
    pub methods: &'a [MethodId],
    pub params: ObjectiveParams,
    pub model: Option<&'a GbdtModel>,
    pub greedy_samples: usize,
    pub cd_sweeps: usize,
    pub refine_sweeps: usize,
    pub grid: GridSpec,
    /// Seeds the greedy solver; echoed as scenario_id.
    pub seed: u64,
}

fn continuous_objective(
    w: &[Complex64],
    r: &HermitianMatrix,
    a_g: &[Complex64],
    p: &ObjectiveParams,
) -> Result<f64> {
    let gain = inner(w, a_g).norm_sqr();
    let q = quadratic_form(r, w)?;
    Ok(p.alpha * gain - (1.0 - p.alpha) * q)
}

/// Runs every requested method on one scenario: one snapshot synthesis and
/// covariance estimate shared across methods, each solve individually timed.
pub fn run_trial(geom: &ArrayGeometry, sc: &Scenario, opt: &TrialOptions) -> Result<TrialResult> {
    opt.params.validate()?;
    if opt.methods.is_empty() {
        return Err(Error::InvalidArgument("no methods requested".into()));
    }
    if opt.methods.contains(&MethodId::GbdtRefine) {
        match opt.model {
            None => {
                return Err(Error::InvalidArgument(
                    "gbdt_refine requested without a model".into(),
                ))
            }
            Some(m) => {
                if m.n_antennas != geom.len() {
                    return Err(Error::Dimension(format!(
                        "model trained for {} antennas, geometry has {}",
                        m.n_antennas,
                        geom.len()
                    )));
                }
            }
        }
    }

    let batch = synthesize_snapshots(geom, sc)?;
    let r = sample_covariance(&batch);
    let a_g = steering_vector(geom, &sc.sat_dir);
    let p = &opt.params;
    let table = GridTable::new(geom, &opt.grid)?;

    let mut outcomes = Vec::with_capacity(opt.methods.len());
    for &method in opt.methods {
        let start = Instant::now();
        let (w, symbols, weights, obj) = match method {
            MethodId::Capon => {
                let w = capon_weights(&r, &a_g, p)?;
                let obj = continuous_objective(&w, &r, &a_g, p)?;
                let pairs = w.iter().map(|z| (z.re, z.im)).collect();
                (w, None, Some(pairs), obj)
            }
            MethodId::Naive => {
                let cont = capon_weights(&r, &a_g, p)?;
                let s = naive_quantize(&cont);
                let obj = objective(&s, &r, &a_g, p);
                (s.to_complex(), Some(s.symbols().to_vec()), None, obj)
            }
            MethodId::Oracle => {
                let s = oracle_search(&r, &a_g, p)?;
                let obj = objective(&s, &r, &a_g, p);
                (s.to_complex(), Some(s.symbols().to_vec()), None, obj)
            }
            MethodId::Greedy => {
                let s = greedy_sample(&r, &a_g, p, opt.greedy_samples, derive_seed(opt.seed, 1))?;
                let obj = objective(&s, &r, &a_g, p);
                (s.to_complex(), Some(s.symbols().to_vec()), None, obj)
            }
            MethodId::CoordDescent => {
                let cont = capon_weights(&r, &a_g, p)?;
                let init = naive_quantize(&cont);
                let s = coordinate_descent(&init, &r, &a_g, p, opt.cd_sweeps);
                let obj = objective(&s, &r, &a_g, p);
                (s.to_complex(), Some(s.symbols().to_vec()), None, obj)
            }
            MethodId::GbdtRefine => {
                let model = opt.model.expect("checked above");
                let s = gbdt_refine(model, &r, &a_g, p, opt.refine_sweeps)?;
                let obj = objective(&s, &r, &a_g, p);
                (s.to_complex(), Some(s.symbols().to_vec()), None, obj)
            }
        };
        let latency_ns = (start.elapsed().as_nanos() as u64).max(1);

        let sat_power = power_toward(&w, geom, &sc.sat_dir);
        let jam_powers: Vec<f64> = sc
            .jammer_dirs
            .iter()
            .map(|d| power_toward(&w, geom, d))
            .collect();
        let peak = table
            .peak_power(&w)
            .max(sat_power)
            .max(jam_powers.iter().cloned().fold(0.0, f64::max));
        if peak <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "method {method} produced an all-zero pattern"
            )));
        }
        let sat_gain_db = ratio_db(sat_power, peak);
        let intf_gain_db = jam_powers
            .iter()
            .map(|&pw| ratio_db(pw, peak))
            .fold(f64::NEG_INFINITY, f64::max);

        outcomes.push(MethodOutcome {
            method,
            sat_gain_db,
            intf_gain_db,
            objective: obj,
            latency_ns,
            symbols,
            weights,
        });
    }

    Ok(TrialResult {
        scenario_id: opt.seed,
        scenario: sc.clone(),
        outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub n: usize,
    pub trials: usize,
    pub methods: Vec<MethodId>,
    pub greedy_samples: usize,
    pub cd_sweeps: usize,
    pub refine_sweeps: usize,
    pub params: ObjectiveParams,
    pub grid: GridSpec,
    pub dist: ScenarioDistribution,
    pub model_path: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub master_seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n: 8,
            trials: 100,
            // gbdt_refine joins the list when a model path is supplied.
            methods: vec![
                MethodId::Capon,
                MethodId::Naive,
                MethodId::Oracle,
                MethodId::Greedy,
                MethodId::CoordDescent,
            ],
            greedy_samples: 100,
            cd_sweeps: 50,
            refine_sweeps: 3,
            params: ObjectiveParams::default(),
            grid: GridSpec::default(),
            dist: ScenarioDistribution::default(),
            model_path: None,
            out_dir: None,
            master_seed: 0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("methods list is empty".into()));
        }
        self.params.validate()?;
        self.grid.validate()?;
        self.dist.validate()?;
        if self.methods.contains(&MethodId::GbdtRefine) && self.model_path.is_none() {
            return Err(Error::InvalidArgument(
                "gbdt_refine requested without a model path".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
}

/// Nearest-rank quantile of an unsorted sample.
fn quantiles(values: &[f64]) -> Quantiles {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pick = |p: f64| {
        let rank = (p * sorted.len() as f64).ceil() as usize;
        sorted[rank.clamp(1, sorted.len()) - 1]
    };
    Quantiles {
        p10: pick(0.10),
        p50: pick(0.50),
        p90: pick(0.90),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: MethodId,
    pub mean_sat_gain_db: f64,
    pub mean_intf_gain_db: f64,
    pub mean_objective: f64,
    pub mean_latency_ms: f64,
    pub sat_gain_db: Quantiles,
    pub intf_gain_db: Quantiles,
    pub latency_ms: Quantiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub version: String,
    pub config: BenchConfig,
    pub trials: usize,
    pub methods: Vec<MethodSummary>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn summarize(config: &BenchConfig, results: &[TrialResult]) -> BenchmarkSummary {
    let methods = config
        .methods
        .iter()
        .map(|&method| {
            let rows: Vec<&MethodOutcome> = results
                .iter()
                .map(|t| {
                    t.outcomes
                        .iter()
                        .find(|o| o.method == method)
                        .expect("every trial ran every method")
                })
                .collect();
            let sat: Vec<f64> = rows.iter().map(|o| o.sat_gain_db).collect();
            let intf: Vec<f64> = rows.iter().map(|o| o.intf_gain_db).collect();
            let obj: Vec<f64> = rows.iter().map(|o| o.objective).collect();
            let lat: Vec<f64> = rows.iter().map(|o| o.latency_ns as f64 / 1e6).collect();
            MethodSummary {
                method,
                mean_sat_gain_db: mean(&sat),
                mean_intf_gain_db: mean(&intf),
                mean_objective: mean(&obj),
                mean_latency_ms: mean(&lat),
                sat_gain_db: quantiles(&sat),
                intf_gain_db: quantiles(&intf),
                latency_ms: quantiles(&lat),
            }
        })
        .collect();
    BenchmarkSummary {
        version: crate::VERSION.to_string(),
        config: config.clone(),
        trials: results.len(),
        methods,
    }
}

fn symbols_field(o: &MethodOutcome) -> String {
    match &o.symbols {
        Some(s) => s.iter().map(|d| char::from(b'0' + d)).collect(),
        None => String::new(),
    }
}

fn write_trials_csv(path: &Path, config: &BenchConfig, results: &[TrialResult]) -> Result<()> {
    let display = path.display().to_string();
    let mut out = String::new();
    out.push_str(&format!("# version: {}\n", crate::VERSION));
    out.push_str(&format!(
        "# config: {}\n",
        serde_json::to_string(config).expect("config serializes")
    ));
    out.push_str("trial,scenario_id,method,sat_gain_db,intf_gain_db,objective,latency_ns,symbols\n");
    for (i, t) in results.iter().enumerate() {
        for o in &t.outcomes {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                i,
                t.scenario_id,
                o.method,
                o.sat_gain_db,
                o.intf_gain_db,
                o.objective,
                o.latency_ns,
                symbols_field(o)
            ));
        }
    }
    fs::write(path, out).map_err(|e| Error::io(&display, e))
}

/// Runs the configured Monte-Carlo benchmark. Trial `i` draws its scenario
/// from `derive_seed(master_seed, i)`, so the summary (latency aside) does
/// not depend on thread count or scheduling. With `out_dir` set, writes
/// `trials.csv` and `summary.json` there.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchmarkSummary> {
    config.validate()?;
    let geom = ArrayGeometry::uniform_circular(config.n)?;
    let model = match &config.model_path {
        Some(path) => Some(load_model(path)?),
        None => None,
    };
    if let Some(m) = &model {
        if m.n_antennas != config.n {
            return Err(Error::Dimension(format!(
                "model trained for {} antennas, benchmark has n = {}",
                m.n_antennas, config.n
            )));
        }
    }

    let results: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|i| -> Result<TrialResult> {
            let trial_seed = derive_seed(config.master_seed, i as u64);
            let run = || -> Result<TrialResult> {
                let sc = random_scenario(&config.dist, trial_seed)?;
                let opt = TrialOptions {
                    methods: &config.methods,
                    params: config.params,
                    model: model.as_ref(),
                    greedy_samples: config.greedy_samples,
                    cd_sweeps: config.cd_sweeps,
                    refine_sweeps: config.refine_sweeps,
                    grid: config.grid,
                    seed: trial_seed,
                };
                run_trial(&geom, &sc, &opt)
            };
            run().map_err(|e| Error::Trial {
                index: i,
                scenario: format!("seed {trial_seed}"),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let summary = summarize(config, &results);
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        write_trials_csv(&dir.join("trials.csv"), config, &results)?;
        let spath = dir.join("summary.json");
        let mut text = serde_json::to_string_pretty(&summary)
            .map_err(|e| Error::io(spath.display().to_string(), std::io::Error::other(e)))?;
        text.push('\n');
        fs::write(&spath, text).map_err(|e| Error::io(spath.display().to_string(), e))?;
    }
    Ok(summary)
}

/// Writes the full-grid beampattern of one weight vector as CSV
/// (`az_deg,el_deg,gain_db`, el-major rows), peak-normalized so the maximum
/// emitted gain is exactly 0. `notes` lines are embedded as `#` comments.
pub fn export_beampattern_grid(
    w: &[Complex64],
    geom: &ArrayGeometry,
    grid: &GridSpec,
    path: &Path,
    notes: &[String],
) -> Result<()> {
    let display = path.display().to_string();
    if w.len() != geom.len() {
        return Err(Error::Dimension(format!(
            "{} weights for {} elements",
            w.len(),
            geom.len()
        )));
    }
    let table = GridTable::new(geom, grid)?;
    let powers: Vec<f64> = table.steers.iter().map(|a| inner(w, a).norm_sqr()).collect();
    let peak = powers.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::InvalidArgument(
            "beampattern of an all-zero weight vector".into(),
        ));
    }

    let file = fs::File::create(path).map_err(|e| Error::io(&display, e))?;
    let mut out = std::io::BufWriter::new(file);
    let mut emit = |line: &str| -> Result<()> {
        out.write_all(line.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| Error::io(&display, e))
    };
    emit(&format!("# version: {}", crate::VERSION))?;
    for note in notes {
        emit(&format!("# {note}"))?;
    }
    emit("az_deg,el_deg,gain_db")?;
    let n_az = table.azimuths.len();
    for (e, &el) in table.elevations.iter().enumerate() {
        for (a, &az) in table.azimuths.iter().enumerate() {
            let gain = ratio_db(powers[e * n_az + a], peak);
            emit(&format!("{az},{el},{gain}"))?;
        }
    }
    out.flush().map_err(|e| Error::io(&display, e))
}

/// Renders the summary as an aligned text table (one row per method).
pub fn format_table(summary: &BenchmarkSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<14} {:>10} {:>10} {:>14} {:>14}\n",
        "method", "sat_db", "intf_db", "latency_ms", "p50_latency_ms"
    ));
    for m in &summary.methods {
        out.push_str(&format!(
            "{:<14} {:>10.2} {:>10.2} {:>14.4} {:>14.4}\n",
            m.method.name(),
            m.mean_sat_gain_db,
            m.mean_intf_gain_db,
            m.mean_latency_ms,
            m.latency_ms.p50
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_scenario(n_jam: usize, seed: u64) -> Scenario {
        let jammers: Vec<Direction> = (0..n_jam)
            .map(|j| Direction::new(200.0 + 20.0 * j as f64, 5.0).unwrap())
            .collect();
        Scenario::new(
            Direction::new(40.0, 55.0).unwrap(),
            jammers.clone(),
            -20.0,
            vec![50.0; jammers.len()],
            512,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in ALL_METHODS {
            assert_eq!(m.name().parse::<MethodId>().unwrap(), m);
        }
        assert!("mvdr".parse::<MethodId>().is_err());
        assert_eq!(serde_json::to_string(&MethodId::GbdtRefine).unwrap(), "\"gbdt_refine\"");
    }

    #[test]
    fn grid_sizes() {
        let grid = GridSpec::default();
        assert_eq!(grid.azimuths().len(), 180);
        assert_eq!(grid.elevations().len(), 46);
        let coarse = GridSpec { step_deg: 45.0 };
        assert_eq!(coarse.azimuths().len(), 8);
        assert_eq!(coarse.elevations().len(), 3);
        assert!(GridSpec { step_deg: 0.5 }.validate().is_err());
    }

    #[test]
    fn matched_filter_peaks_at_its_own_direction() {
        let geom = ArrayGeometry::uniform_circular(4).unwrap();
        let dir = Direction::new(40.0, 30.0).unwrap();
        let a = steering_vector(&geom, &dir);
        let n = a.len() as f64;
        let w: Vec<Complex64> = a.iter().map(|z| z / n.sqrt()).collect();
        let g = beampattern_gain_db(&w, &geom, &dir, &GridSpec::default()).unwrap();
        assert!(g.abs() < 1e-9, "matched filter gain {g}");
    }

    #[test]
    fn single_element_weight_is_isotropic() {
        // Only element 0 active: |w^H a| = 1 everywhere, so the whole grid
        // sits at the peak.
        let geom = ArrayGeometry::uniform_circular(2).unwrap();
        let mut w = vec![Complex64::new(0.0, 0.0); 2];
        w[0] = Complex64::from_polar(1.0, 0.7);
        for dir in [
            Direction::new(0.0, 0.0).unwrap(),
            Direction::new(123.0, 45.0).unwrap(),
            Direction::new(300.0, 88.0).unwrap(),
        ] {
            let g = beampattern_gain_db(&w, &geom, &dir, &GridSpec { step_deg: 15.0 }).unwrap();
            assert!(g.abs() < 1e-12, "isotropic gain {g}");
        }
    }

    #[test]
    fn trial_runs_all_methods_and_orders_objectives() {
        let geom = ArrayGeometry::uniform_circular(4).unwrap();
        let sc = test_scenario(2, 7);
        let methods = [
            MethodId::Capon,
            MethodId::Naive,
            MethodId::Oracle,
            MethodId::Greedy,
            MethodId::CoordDescent,
        ];
        let opt = TrialOptions {
            methods: &methods,
            params: ObjectiveParams::default(),
            model: None,
            greedy_samples: 50,
            cd_sweeps: 50,
            refine_sweeps: 3,
            grid: GridSpec { step_deg: 10.0 },
            seed: 99,
        };
        let t = run_trial(&geom, &sc, &opt).unwrap();
        assert_eq!(t.outcomes.len(), methods.len());
        let get = |m: MethodId| t.outcomes.iter().find(|o| o.method == m).unwrap();
        let oracle = get(MethodId::Oracle);
        for m in [MethodId::Naive, MethodId::Greedy, MethodId::CoordDescent] {
            assert!(get(m).objective <= oracle.objective + 1e-12);
        }
        assert!(get(MethodId::CoordDescent).objective >= get(MethodId::Naive).objective - 1e-12);
        for o in &t.outcomes {
            assert!(o.sat_gain_db <= 0.0 && o.intf_gain_db <= 0.0);
            assert!(o.latency_ns >= 1);
        }
        assert!(get(MethodId::Capon).weights.is_some());
        assert!(get(MethodId::Oracle).symbols.is_some());
    }

    #[test]
    fn trial_is_deterministic_except_latency() {
        let geom = ArrayGeometry::uniform_circular(3).unwrap();
        let sc = test_scenario(1, 3);
        let methods = [MethodId::Naive, MethodId::Greedy];
        let opt = TrialOptions {
            methods: &methods,
            params: ObjectiveParams::default(),
            model: None,
            greedy_samples: 25,
            cd_sweeps: 50,
            refine_sweeps: 3,
            grid: GridSpec { step_deg: 15.0 },
            seed: 4,
        };
        let mut a = run_trial(&geom, &sc, &opt).unwrap();
        let mut b = run_trial(&geom, &sc, &opt).unwrap();
        for o in a.outcomes.iter_mut().chain(b.outcomes.iter_mut()) {
            o.latency_ns = 0;
        }
        assert_eq!(a, b);
    }

    #[test]
    fn trial_requires_model_for_refine() {
        let geom = ArrayGeometry::uniform_circular(3).unwrap();
        let sc = test_scenario(1, 3);
        let methods = [MethodId::GbdtRefine];
        let opt = TrialOptions {
            methods: &methods,
            params: ObjectiveParams::default(),
            model: None,
            greedy_samples: 10,
            cd_sweeps: 50,
            refine_sweeps: 3,
            grid: GridSpec { step_deg: 15.0 },
            seed: 4,
        };
        assert!(matches!(
            run_trial(&geom, &sc, &opt),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn benchmark_single_trial_matches_summary() {
        let config = BenchConfig {
            n: 3,
            trials: 1,
            methods: vec![MethodId::Capon, MethodId::Naive],
            grid: GridSpec { step_deg: 15.0 },
            dist: ScenarioDistribution {
                snapshots: 256,
                ..ScenarioDistribution::default()
            },
            master_seed: 11,
            ..BenchConfig::default()
        };
        let summary = run_benchmark(&config).unwrap();
        assert_eq!(summary.trials, 1);
        assert_eq!(summary.methods.len(), 2);
        for m in &summary.methods {
            assert_eq!(m.mean_sat_gain_db, m.sat_gain_db.p50);
            assert_eq!(m.mean_intf_gain_db, m.intf_gain_db.p10);
        }
    }

    #[test]
    fn benchmark_is_seed_stable_and_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let config = BenchConfig {
            n: 3,
            trials: 4,
            methods: vec![MethodId::Naive, MethodId::Greedy],
            greedy_samples: 20,
            grid: GridSpec { step_deg: 30.0 },
            dist: ScenarioDistribution {
                snapshots: 128,
                ..ScenarioDistribution::default()
            },
            out_dir: Some(dir.path().to_path_buf()),
            master_seed: 5,
            ..BenchConfig::default()
        };
        let a = run_benchmark(&config).unwrap();
        let b = run_benchmark(&BenchConfig {
            out_dir: None,
            ..config.clone()
        })
        .unwrap();
        for (x, y) in a.methods.iter().zip(b.methods.iter()) {
            assert_eq!(x.method, y.method);
            assert_eq!(x.mean_sat_gain_db, y.mean_sat_gain_db);
            assert_eq!(x.mean_intf_gain_db, y.mean_intf_gain_db);
            assert_eq!(x.mean_objective, y.mean_objective);
            assert_eq!(x.sat_gain_db, y.sat_gain_db);
            assert_eq!(x.intf_gain_db, y.intf_gain_db);
        }
        let csv = fs::read_to_string(dir.path().join("trials.csv")).unwrap();
        assert!(csv.starts_with("# version:"));
        // 4 trials x 2 methods + 2 comments + header.
        assert_eq!(csv.lines().count(), 2 + 1 + 8);
        let json = fs::read_to_string(dir.path().join("summary.json")).unwrap();
        let parsed: BenchmarkSummary = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.trials, 4);
    }

    #[test]
    fn benchmark_rejects_refine_without_model() {
        let config = BenchConfig {
            methods: vec![MethodId::GbdtRefine],
            ..BenchConfig::default()
        };
        assert!(matches!(
            run_benchmark(&config),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn pattern_export_grid_shape_and_peak() {
        let geom = ArrayGeometry::uniform_circular(4).unwrap();
        let dirp = Direction::new(10.0, 40.0).unwrap();
        let w: Vec<Complex64> = steering_vector(&geom, &dirp)
            .iter()
            .map(|z| z / 2.0)
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pattern.csv");
        export_beampattern_grid(
            &w,
            &geom,
            &GridSpec::default(),
            &path,
            &["note line".to_string()],
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# version:"));
        assert_eq!(lines.next().unwrap(), "# note line");
        assert_eq!(lines.next().unwrap(), "az_deg,el_deg,gain_db");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 8280);
        let gains: Vec<f64> = rows
            .iter()
            .map(|r| r.split(',').nth(2).unwrap().parse::<f64>().unwrap())
            .collect();
        let max = gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(max, 0.0);
        // el-major: first block has el = 0 for all azimuths.
        assert!(rows[..180].iter().all(|r| r.split(',').nth(1).unwrap() == "0"));
        assert!(rows[180].starts_with("0,2,"));
    }

    #[test]
    fn quantiles_nearest_rank() {
        let q = quantiles(&[5.0, 1.0, 3.0, 2.0, 4.0]);
        assert_eq!(q.p10, 1.0);
        assert_eq!(q.p50, 3.0);
        assert_eq!(q.p90, 5.0);
        let one = quantiles(&[7.0]);
        assert_eq!((one.p10, one.p50, one.p90), (7.0, 7.0, 7.0));
    }

    #[test]
    fn table_lists_each_method_once() {
        let config = BenchConfig {
            n: 3,
            trials: 2,
            methods: vec![MethodId::Capon, MethodId::Naive],
            grid: GridSpec { step_deg: 30.0 },
            dist: ScenarioDistribution {
                snapshots: 128,
                ..ScenarioDistribution::default()
            },
            ..BenchConfig::default()
        };
        let summary = run_benchmark(&config).unwrap();
        let table = format_table(&summary);
        assert_eq!(table.lines().count(), 3);
        assert!(table.contains("capon"));
        assert!(table.contains("naive"));
    }
}
