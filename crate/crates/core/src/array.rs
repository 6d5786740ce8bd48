//! Array geometry, steering vectors, scenarios, and snapshot simulation.
//!
//! Positions are in wavelengths, so a steering entry is
//! `exp(+j 2 pi <p, u>)` for element position `p` and unit arrival vector
//! `u`. Azimuth is measured in the horizontal plane, elevation up from it;
//! the desired (satellite) signal and every jammer are modeled as far-field
//! plane waves. Per-element noise power 1 sets the dB reference: the desired
//! signal arrives at `snr_db`, and jammer `m` at `snr_db + js_db_m`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

/// Power levels at or below this (dB) are treated as "off": the term is
/// omitted from synthesis entirely.
pub const OFF_DB: f64 = -300.0;

/// A look direction in degrees. Azimuth is wrapped into [0, 360) on
/// construction; elevation must lie in [0, 90].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DirectionRaw")]
pub struct Direction {
    azimuth_deg: f64,
    elevation_deg: f64,
}

#[derive(Deserialize)]
struct DirectionRaw {
    azimuth_deg: f64,
    elevation_deg: f64,
}

impl TryFrom<DirectionRaw> for Direction {
    type Error = Error;
    fn try_from(raw: DirectionRaw) -> Result<Self> {
        Direction::new(raw.azimuth_deg, raw.elevation_deg)
    }
}

impl Direction {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        if !azimuth_deg.is_finite() || !elevation_deg.is_finite() {
            return Err(Error::NonFinite(format!(
                "direction ({azimuth_deg}, {elevation_deg})"
            )));
        }
        if !(0.0..=90.0).contains(&elevation_deg) {
            return Err(Error::InvalidArgument(format!(
                "elevation {elevation_deg} deg outside [0, 90]"
            )));
        }
        Ok(Direction {
            azimuth_deg: azimuth_deg.rem_euclid(360.0),
            elevation_deg,
        })
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation_deg
    }

    /// Unit arrival vector (x, y, z) with z up.
    pub fn unit_vector(&self) -> [f64; 3] {
        let az = self.azimuth_deg.to_radians();
        let el = self.elevation_deg.to_radians();
        [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()]
    }

    /// Great-circle angle to another direction, in degrees.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        dot.clamp(-1.0, 1.0).acos().to_degrees()
    }
}

/// Antenna positions in wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    kind: String,
    positions: Vec<[f64; 3]>,
}

impl ArrayGeometry {
    /// Uniform circular array of `n` elements in the z = 0 plane, radius
    /// chosen so adjacent elements sit half a wavelength apart (chord
    /// spacing): `r = 0.25 / sin(pi / n)`.
    pub fn uniform_circular(n: usize) -> Result<Self> {
        if !(2..=16).contains(&n) {
            return Err(Error::InvalidArgument(format!(
                "element count {n} outside supported range [2, 16]"
            )));
        }
        let r = 0.25 / (PI / n as f64).sin();
        let positions = (0..n)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / n as f64;
                [r * phi.cos(), r * phi.sin(), 0.0]
            })
            .collect();
        Ok(ArrayGeometry {
            kind: "uniform-circular".into(),
            positions,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }
}

/// Steering vector of the array toward `dir`: entry `i` is
/// `exp(+j 2 pi <p_i, u(dir)>)`. Every entry has modulus 1.
pub fn steering_vector(geom: &ArrayGeometry, dir: &Direction) -> Vec<Complex64> {
    let u = dir.unit_vector();
    geom.positions()
        .iter()
        .map(|p| {
            let phase = 2.0 * PI * (p[0] * u[0] + p[1] * u[1] + p[2] * u[2]);
            Complex64::from_polar(1.0, phase)
        })
        .collect()
}

/// One simulated situation: a desired satellite plus jammers, with powers
/// relative to unit per-element noise, a snapshot count, and the RNG seed
/// that makes synthesis reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioRaw")]
pub struct Scenario {
    pub sat_dir: Direction,
    pub jammer_dirs: Vec<Direction>,
    /// Desired-signal power over per-element noise power, dB.
    pub snr_db: f64,
    /// Per-jammer power over desired-signal power, dB.
    pub js_db_per_jammer: Vec<f64>,
    pub snapshots: usize,
    pub seed: u64,
}

#[derive(Deserialize)]
struct ScenarioRaw {
    sat_dir: Direction,
    jammer_dirs: Vec<Direction>,
    snr_db: f64,
    js_db_per_jammer: Vec<f64>,
    snapshots: usize,
    seed: u64,
}

impl TryFrom<ScenarioRaw> for Scenario {
    type Error = Error;
    fn try_from(raw: ScenarioRaw) -> Result<Self> {
        Scenario::new(
            raw.sat_dir,
            raw.jammer_dirs,
            raw.snr_db,
            raw.js_db_per_jammer,
            raw.snapshots,
            raw.seed,
        )
    }
}

impl Scenario {
    pub fn new(
        sat_dir: Direction,
        jammer_dirs: Vec<Direction>,
        snr_db: f64,
        js_db_per_jammer: Vec<f64>,
        snapshots: usize,
        seed: u64,
    ) -> Result<Self> {
        if jammer_dirs.is_empty() {
            return Err(Error::InvalidArgument("scenario needs at least one jammer".into()));
        }
        if jammer_dirs.len() != js_db_per_jammer.len() {
            return Err(Error::Dimension(format!(
                "{} jammer directions vs {} J/S entries",
                jammer_dirs.len(),
                js_db_per_jammer.len()
            )));
        }
        if snapshots == 0 {
            return Err(Error::InvalidArgument("snapshot count must be positive".into()));
        }
        if !snr_db.is_finite() || js_db_per_jammer.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scenario power levels".into()));
        }
        Ok(Scenario {
            sat_dir,
            jammer_dirs,
            snr_db,
            js_db_per_jammer,
            snapshots,
            seed,
        })
    }
}

/// K complex array snapshots of length N, stored flat snapshot-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBatch {
    n: usize,
    data: Vec<Complex64>,
}

impl SnapshotBatch {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn snapshot(&self, k: usize) -> &[Complex64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }
}

/// Simulates `sc.snapshots` array snapshots:
/// `x[k] = a_g s[k] + sum_m a_{j,m} u_m[k] + n[k]`
/// with a BPSK chip sequence `s`, circular complex Gaussian jammer waveforms
/// `u_m`, and unit-power circular complex Gaussian noise `n`.
///
/// All randomness comes from a ChaCha8 generator seeded by `sc.seed`; per
/// snapshot the draw order is chip, then jammer waveforms in list order, then
/// per-element noise. Terms whose power is at or below [`OFF_DB`] are omitted
/// (draws included), which keeps the noise-only limit exact.
pub fn synthesize_snapshots(geom: &ArrayGeometry, sc: &Scenario) -> Result<SnapshotBatch> {
    let n = geom.len();
    if sc.snapshots < n {
        return Err(Error::InvalidArgument(format!(
            "snapshot count {} below element count {n}",
            sc.snapshots
        )));
    }
    let a_g = steering_vector(geom, &sc.sat_dir);
    let signal_on = sc.snr_db > OFF_DB;
    let signal_amp = 10f64.powf(sc.snr_db / 20.0);
    struct Jam {
        a: Vec<Complex64>,
        /// Per-quadrature std dev: total power 10^((snr+js)/10) split
        /// evenly between real and imaginary parts.
        sigma: f64,
    }
    let jams: Vec<Jam> = sc
        .jammer_dirs
        .iter()
        .zip(&sc.js_db_per_jammer)
        .filter(|(_, &js)| js > OFF_DB)
        .map(|(dir, &js)| Jam {
            a: steering_vector(geom, dir),
            sigma: (10f64.powf((sc.snr_db + js) / 10.0) / 2.0).sqrt(),
        })
        .collect();
    let noise_sigma = (1.0 / 2.0f64).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let mut data = vec![Complex64::ZERO; sc.snapshots * n];
    for k in 0..sc.snapshots {
        let x = &mut data[k * n..(k + 1) * n];
        if signal_on {
            let chip = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let s = chip * signal_amp;
            for (xi, ai) in x.iter_mut().zip(&a_g) {
                *xi += ai * s;
            }
        }
        for jam in &jams {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let u = Complex64::new(re, im) * jam.sigma;
            for (xi, ai) in x.iter_mut().zip(&jam.a) {
                *xi += ai * u;
            }
        }
        for xi in x.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *xi += Complex64::new(re * noise_sigma, im * noise_sigma);
        }
    }
    Ok(SnapshotBatch { n, data })
}

/// Sample covariance `R = (1/K) sum_k x[k] x[k]^H`.
///
/// Accumulates the lower triangle and mirrors it, so the result is Hermitian
/// bit-exactly and positive semidefinite by construction.
pub fn sample_covariance(batch: &SnapshotBatch) -> HermitianMatrix {
    let n = batch.n();
    let k = batch.k();
    assert!(k >= 1, "covariance of an empty batch");
    let mut acc = vec![Complex64::ZERO; n * n];
    for s in 0..k {
        let x = batch.snapshot(s);
        for i in 0..n {
            for j in 0..=i {
                acc[i * n + j] += x[i] * x[j].conj();
            }
        }
    }
    let scale = 1.0 / k as f64;
    let mut entries = vec![Complex64::ZERO; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = acc[i * n + j] * scale;
            if i == j {
                entries[i * n + i] = Complex64::new(v.re, 0.0);
            } else {
                entries[i * n + j] = v;
                entries[j * n + i] = v.conj();
            }
        }
    }
    HermitianMatrix::new(n, entries).expect("outer-product accumulation is Hermitian")
}

/// Uniform ranges from which Monte-Carlo scenarios are drawn.
///
/// Elevation priors default to satellite-high, jammer-low. A range with
/// equal endpoints pins that quantity (no RNG draw is consumed for it).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioDistribution {
    pub n_jammers: usize,
    pub sat_elevation_deg: [f64; 2],
    pub jammer_elevation_deg: [f64; 2],
    /// Half-open azimuth range, applied to satellite and jammers alike.
    pub azimuth_deg: [f64; 2],
    pub js_db: [f64; 2],
    pub snr_db: [f64; 2],
    pub snapshots: usize,
    /// Minimum great-circle angle between the satellite and every jammer.
    pub min_separation_deg: f64,
}

impl Default for ScenarioDistribution {
    // The default SNR sits deep below the noise floor so that the desired
    // signal's contribution to the sample covariance cannot cancel the
    // steering bonus: the net satellite preference coefficient
    // `alpha - (1 - alpha) * 10^(snr/10)` must stay positive and well above
    // snapshot estimation noise, or every solver turns satellite-blind.
    fn default() -> Self {
        ScenarioDistribution {
            n_jammers: 1,
            sat_elevation_deg: [15.0, 90.0],
            jammer_elevation_deg: [0.0, 30.0],
            azimuth_deg: [0.0, 360.0],
            js_db: [30.0, 70.0],
            snr_db: [-32.0, -32.0],
            snapshots: 4096,
            min_separation_deg: 10.0,
        }
    }
}

impl ScenarioDistribution {
    pub fn validate(&self) -> Result<()> {
        let check_range = |name: &str, r: [f64; 2], lo: f64, hi: f64| -> Result<()> {
            if !r[0].is_finite() || !r[1].is_finite() || r[0] > r[1] {
                return Err(Error::InvalidArgument(format!("bad {name} range {r:?}")));
            }
            if r[0] < lo || r[1] > hi {
                return Err(Error::InvalidArgument(format!(
                    "{name} range {r:?} outside [{lo}, {hi}]"
                )));
            }
            Ok(())
        };
        if self.n_jammers == 0 {
            return Err(Error::InvalidArgument("n_jammers must be >= 1".into()));
        }
        check_range("sat elevation", self.sat_elevation_deg, 0.0, 90.0)?;
        check_range("jammer elevation", self.jammer_elevation_deg, 0.0, 90.0)?;
        check_range("azimuth", self.azimuth_deg, 0.0, 360.0)?;
        check_range("J/S", self.js_db, f64::NEG_INFINITY, f64::INFINITY)?;
        check_range("SNR", self.snr_db, f64::NEG_INFINITY, f64::INFINITY)?;
        if self.snapshots == 0 {
            return Err(Error::InvalidArgument("snapshots must be positive".into()));
        }
        if !self.min_separation_deg.is_finite() || self.min_separation_deg < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "bad minimum separation {}",
                self.min_separation_deg
            )));
        }
        Ok(())
    }
}

fn draw_closed(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[1] > r[0] {
        rng.random_range(r[0]..=r[1])
    } else {
        r[0]
    }
}

fn draw_half_open(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[1] > r[0] {
        rng.random_range(r[0]..r[1])
    } else {
        r[0]
    }
}

/// Maximum jammer-azimuth redraws before giving up on the separation
/// constraint.
const SEPARATION_ATTEMPTS: usize = 100;

/// Draws one scenario from `dist`, deterministically in `seed`.
///
/// Draw order: satellite azimuth, satellite elevation, SNR; then per jammer
/// elevation, J/S, and azimuth, the last redrawn until the jammer sits at
/// least `min_separation_deg` from the satellite (up to 100 attempts). The
/// scenario's own synthesis seed is drawn last.
pub fn random_scenario(dist: &ScenarioDistribution, seed: u64) -> Result<Scenario> {
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sat_az = draw_half_open(&mut rng, dist.azimuth_deg);
    let sat_el = draw_closed(&mut rng, dist.sat_elevation_deg);
    let sat_dir = Direction::new(sat_az, sat_el)?;
    let snr_db = draw_closed(&mut rng, dist.snr_db);

    let mut jammer_dirs = Vec::with_capacity(dist.n_jammers);
    let mut js_db = Vec::with_capacity(dist.n_jammers);
    for _ in 0..dist.n_jammers {
        let el = draw_closed(&mut rng, dist.jammer_elevation_deg);
        let js = draw_closed(&mut rng, dist.js_db);
        let mut placed = None;
        for _ in 0..SEPARATION_ATTEMPTS {
            let az = draw_half_open(&mut rng, dist.azimuth_deg);
            let dir = Direction::new(az, el)?;
            if sat_dir.angle_to(&dir) >= dist.min_separation_deg {
                placed = Some(dir);
                break;
            }
        }
        let dir = placed.ok_or(Error::SeparationUnsatisfiable {
            min_separation_deg: dist.min_separation_deg,
            attempts: SEPARATION_ATTEMPTS,
        })?;
        jammer_dirs.push(dir);
        js_db.push(js);
    }
    let synth_seed = rng.random::<u64>();
    Scenario::new(sat_dir, jammer_dirs, snr_db, js_db, dist.snapshots, synth_seed)
}
