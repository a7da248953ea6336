//! Finite-population Euler-Maruyama simulation of the two-community
//! oscillator system in order-parameter form. Each oscillator owns three
//! counter-derived random streams (frequency draw, initial angle, noise),
//! so trajectories are reproducible bit-for-bit across thread counts and
//! community relabelings.

use crate::disorder::DisorderSpec;
use crate::error::{Error, Result};
use crate::io_util::fmt_f64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Rows with community synchronization below this carry a false validity
/// flag: the average angle is numerically meaningless there.
pub const PSI_VALID_FLOOR: f64 = 1e-3;

const KAPPA_CAP: f64 = 1e6;

/// Coupling strengths and noise level shared by the particle and spectral
/// systems. The alpha fields are the infinite-population community
/// fractions; the finite-N drift uses the actual counts instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub k1: f64,
    pub k2: f64,
    pub l1: f64,
    pub l2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub d: f64,
}

impl CouplingConfig {
    pub fn new(k1: f64, k2: f64, l1: f64, l2: f64, alpha1: f64, alpha2: f64, d: f64) -> Result<Self> {
        let cfg = CouplingConfig {
            k1,
            k2,
            l1,
            l2,
            alpha1,
            alpha2,
            d,
        };
        cfg.validate(false)?;
        Ok(cfg)
    }

    /// Equal communities with identical couplings.
    pub fn symmetric(k: f64, l: f64, d: f64) -> Result<Self> {
        Self::new(k, k, l, l, 0.5, 0.5, d)
    }

    /// `allow_degenerate` lifts the sign restrictions so the null model
    /// (all couplings zero) can be calibrated in tests.
    pub fn validate(&self, allow_degenerate: bool) -> Result<()> {
        for (name, v) in [
            ("k1", self.k1),
            ("k2", self.k2),
            ("l1", self.l1),
            ("l2", self.l2),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("d", self.d),
        ] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("coupling field {name} = {v} not finite")));
            }
        }
        if (self.alpha1 + self.alpha2 - 1.0).abs() > 1e-12 || self.alpha1 < 0.0 || self.alpha2 < 0.0 {
            return Err(Error::Domain(format!(
                "community weights ({}, {}) must be nonnegative and sum to 1",
                self.alpha1, self.alpha2
            )));
        }
        if self.d <= 0.0 {
            return Err(Error::Domain(format!("noise level d = {} must be positive", self.d)));
        }
        if !allow_degenerate {
            if self.k1 <= 0.0 || self.k2 <= 0.0 {
                return Err(Error::Domain(format!(
                    "internal couplings ({}, {}) must be positive",
                    self.k1, self.k2
                )));
            }
            if self.l1 == 0.0 || self.l2 == 0.0 {
                return Err(Error::Domain("cross couplings must be nonzero".into()));
            }
        }
        Ok(())
    }
}

/// Initial angle law for one community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    VonMises { mean: f64, concentration: f64 },
    Explicit { angles: Vec<f64> },
}

impl InitialSpec {
    fn validate(&self, n: usize) -> Result<()> {
        match self {
            InitialSpec::VonMises { mean, concentration } => {
                if !mean.is_finite() || !concentration.is_finite() || *concentration < 0.0 {
                    return Err(Error::Domain(format!(
                        "von Mises initial (mean {mean}, concentration {concentration}) invalid"
                    )));
                }
            }
            InitialSpec::Explicit { angles } => {
                if angles.len() != n {
                    return Err(Error::Domain(format!(
                        "explicit initial has {} angles for {} oscillators",
                        angles.len(),
                        n
                    )));
                }
                if angles.iter().any(|a| !a.is_finite()) {
                    return Err(Error::Domain("explicit initial contains non-finite angle".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n1: usize,
    pub n2: usize,
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    pub initial: [InitialSpec; 2],
    pub coupling: CouplingConfig,
    pub disorder: DisorderSpec,
    /// Override for the per-community stream roots; defaults derive from
    /// `seed`. Swapping these together with every per-community field
    /// swaps the output traces exactly.
    #[serde(default)]
    pub community_seeds: Option<[u64; 2]>,
    /// Permits zero couplings for null-model calibration.
    #[serde(default)]
    pub allow_degenerate: bool,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n1 < 2 || self.n2 < 2 {
            return Err(Error::Domain(format!(
                "community sizes ({}, {}) must be at least 2",
                self.n1, self.n2
            )));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 || self.dt > 0.05 {
            return Err(Error::Domain(format!(
                "dt = {} outside the stable range (0, 0.05]",
                self.dt
            )));
        }
        if self.steps == 0 {
            return Err(Error::Domain("steps must be positive".into()));
        }
        self.coupling.validate(self.allow_degenerate)?;
        self.initial[0].validate(self.n1)?;
        self.initial[1].validate(self.n2)?;
        Ok(())
    }

    fn community_seeds(&self) -> [u64; 2] {
        self.community_seeds
            .unwrap_or_else(|| [mix64(self.seed ^ mix64(1)), mix64(self.seed ^ mix64(2))])
    }
}

/// 64-bit finalizer used to key the counter-based streams.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

const TAG_OMEGA: u64 = 1;
const TAG_INIT: u64 = 2;
const TAG_NOISE: u64 = 3;

/// Independent stream for one (community root, purpose, oscillator) triple.
fn stream(root: u64, tag: u64, index: u64) -> ChaCha12Rng {
    let base = mix64(root ^ mix64(tag) ^ mix64(index).rotate_left(17));
    let mut key = [0u8; 32];
    for (j, chunk) in key.chunks_exact_mut(8).enumerate() {
        chunk.copy_from_slice(&mix64(base.wrapping_add(j as u64 + 1)).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Circular mean of a set of angles: synchronization level r in [0, 1] and
/// mean phase in [0, 2 pi). At r = 0 the phase is finite but meaningless.
pub fn order_params(angles: &[f64]) -> Result<(f64, f64)> {
    if angles.is_empty() {
        return Err(Error::Domain("order parameters of an empty angle list".into()));
    }
    let (c, s) = pairwise_phasor(angles);
    let n = angles.len() as f64;
    let r = (c / n).hypot(s / n).min(1.0);
    let psi = s.atan2(c).rem_euclid(TAU);
    Ok((r, psi))
}

/// Fixed-order pairwise phasor sum; the reduction tree depends only on the
/// slice length, so results are identical across thread counts.
fn pairwise_phasor(angles: &[f64]) -> (f64, f64) {
    if angles.len() <= 32 {
        let (mut c, mut s) = (0.0, 0.0);
        for &a in angles {
            let (sa, ca) = a.sin_cos();
            c += ca;
            s += sa;
        }
        (c, s)
    } else {
        let mid = angles.len() / 2;
        let (c1, s1) = pairwise_phasor(&angles[..mid]);
        let (c2, s2) = pairwise_phasor(&angles[mid..]);
        (c1 + c2, s1 + s2)
    }
}

/// Best-Fisher rejection sampler for the von Mises law; concentration 0
/// gives the uniform law, large concentrations are capped at 1e6.
fn sample_one_von_mises(rng: &mut ChaCha12Rng, mean: f64, concentration: f64) -> f64 {
    if concentration < 1e-10 {
        return rng.gen::<f64>() * TAU;
    }
    let kappa = concentration.min(KAPPA_CAP);
    let a = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let b = (a - (2.0 * a).sqrt()) / (2.0 * kappa);
    let r = (1.0 + b * b) / (2.0 * b);
    loop {
        let u1: f64 = rng.gen();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        let u2: f64 = rng.gen();
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let u3: f64 = rng.gen();
            let sign = if u3 > 0.5 { 1.0 } else { -1.0 };
            return (mean + sign * f.clamp(-1.0, 1.0).acos()).rem_euclid(TAU);
        }
    }
}

/// Von Mises initial sample with per-index streams: draw i depends only on
/// (seed, i), never on n.
pub fn sample_initial(mean: f64, concentration: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("empty initial sample".into()));
    }
    if !mean.is_finite() || !concentration.is_finite() || concentration < 0.0 {
        return Err(Error::Domain(format!(
            "von Mises parameters (mean {mean}, concentration {concentration}) invalid"
        )));
    }
    Ok((0..n)
        .map(|i| sample_one_von_mises(&mut stream(seed, TAG_INIT, i as u64), mean, concentration))
        .collect())
}

/// Frequency draw from the discrete disorder law by CDF inversion.
fn sample_omega(rng: &mut ChaCha12Rng, mu: &DisorderSpec) -> f64 {
    let nodes = mu.nodes();
    if nodes.len() == 1 {
        return nodes[0].0;
    }
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(omega, w) in nodes {
        acc += w;
        if u <= acc {
            return omega;
        }
    }
    nodes[nodes.len() - 1].0
}

struct CommunityState {
    theta: Vec<f64>,
    omega: Vec<f64>,
    noise: Vec<ChaCha12Rng>,
}

impl CommunityState {
    fn new(n: usize, root: u64, initial: &InitialSpec, mu: &DisorderSpec) -> CommunityState {
        let omega = (0..n)
            .map(|i| sample_omega(&mut stream(root, TAG_OMEGA, i as u64), mu))
            .collect();
        let theta = match initial {
            InitialSpec::VonMises { mean, concentration } => (0..n)
                .map(|i| {
                    sample_one_von_mises(&mut stream(root, TAG_INIT, i as u64), *mean, *concentration)
                })
                .collect(),
            InitialSpec::Explicit { angles } => {
                angles.iter().map(|a| a.rem_euclid(TAU)).collect()
            }
        };
        let noise = (0..n).map(|i| stream(root, TAG_NOISE, i as u64)).collect();
        CommunityState { theta, omega, noise }
    }

    /// One Euler-Maruyama substep with drift omega + p cos(theta)
    /// + q sin(theta), where (p, q) fold both mean-field terms.
    fn advance(&mut self, p: f64, q: f64, dt: f64, sigma: f64) -> bool {
        self.theta
            .par_iter_mut()
            .zip(self.noise.par_iter_mut())
            .zip(self.omega.par_iter())
            .map(|((theta, rng), &omega)| {
                let (s, c) = theta.sin_cos();
                let xi: f64 = rng.sample(StandardNormal);
                *theta = (*theta + (omega + p * c + q * s) * dt + sigma * xi).rem_euclid(TAU);
                theta.is_finite()
            })
            .reduce(|| true, |a, b| a && b)
    }
}

/// Owner of the particle state; single-owner, advanced step by step.
pub struct Simulator {
    cfg: SimulationConfig,
    c1: CommunityState,
    c2: CommunityState,
    step_index: u64,
}

impl Simulator {
    pub fn new(cfg: SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        let [root1, root2] = cfg.community_seeds();
        let c1 = CommunityState::new(cfg.n1, root1, &cfg.initial[0], &cfg.disorder);
        let c2 = CommunityState::new(cfg.n2, root2, &cfg.initial[1], &cfg.disorder);
        Ok(Simulator {
            cfg,
            c1,
            c2,
            step_index: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.cfg.dt
    }

    pub fn angles(&self) -> (&[f64], &[f64]) {
        (&self.c1.theta, &self.c2.theta)
    }

    /// Order parameters of the two communities: ((r1, psi1), (r2, psi2)).
    pub fn community_order_params(&self) -> ((f64, f64), (f64, f64)) {
        let p1 = order_params(&self.c1.theta).expect("community is non-empty");
        let p2 = order_params(&self.c2.theta).expect("community is non-empty");
        (p1, p2)
    }

    /// One Euler-Maruyama step: order parameters are recomputed, then every
    /// oscillator advances with drift
    /// omega + (K_m N_m / N) r_m sin(psi_m - theta)
    ///       + (L_m N_other / N) r_other sin(psi_other - theta).
    pub fn step(&mut self) -> Result<()> {
        let ((r1, psi1), (r2, psi2)) = self.community_order_params();
        let n = (self.cfg.n1 + self.cfg.n2) as f64;
        let cp = &self.cfg.coupling;
        let own1 = cp.k1 * self.cfg.n1 as f64 / n * r1;
        let cross1 = cp.l1 * self.cfg.n2 as f64 / n * r2;
        let own2 = cp.k2 * self.cfg.n2 as f64 / n * r2;
        let cross2 = cp.l2 * self.cfg.n1 as f64 / n * r1;
        // sin(psi - theta) = sin(psi) cos(theta) - cos(psi) sin(theta)
        let (sp1, cp1) = psi1.sin_cos();
        let (sp2, cp2) = psi2.sin_cos();
        let p_1 = own1 * sp1 + cross1 * sp2;
        let q_1 = -(own1 * cp1 + cross1 * cp2);
        let p_2 = own2 * sp2 + cross2 * sp1;
        let q_2 = -(own2 * cp2 + cross2 * cp1);
        let sigma = (cp.d * self.cfg.dt).sqrt();
        let ok1 = self.c1.advance(p_1, q_1, self.cfg.dt, sigma);
        let ok2 = self.c2.advance(p_2, q_2, self.cfg.dt, sigma);
        self.step_index += 1;
        if !(ok1 && ok2) {
            return Err(Error::Convergence(format!(
                "non-finite angle at step {}",
                self.step_index
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRow {
    pub t: f64,
    pub r1: f64,
    pub r2: f64,
    /// Unwrapped by nearest-branch continuation across rows.
    pub psi1: f64,
    pub psi2: f64,
    pub valid1: bool,
    pub valid2: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub seed: u64,
    pub rows: Vec<TimeSeriesRow>,
}

impl TimeSeries {
    /// Mean (r1, r2) over the final `window` rows.
    pub fn late_window_mean(&self, window: usize) -> Result<(f64, f64)> {
        if window == 0 || window > self.rows.len() {
            return Err(Error::Domain(format!(
                "window {window} outside 1..={}",
                self.rows.len()
            )));
        }
        let tail = &self.rows[self.rows.len() - window..];
        let n = window as f64;
        Ok((
            tail.iter().map(|r| r.r1).sum::<f64>() / n,
            tail.iter().map(|r| r.r2).sum::<f64>() / n,
        ))
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# seed = {}\n", self.seed);
        out.push_str("t,r1,r2,psi1,psi2,valid1,valid2\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_f64(row.t),
                fmt_f64(row.r1),
                fmt_f64(row.r2),
                fmt_f64(row.psi1),
                fmt_f64(row.psi2),
                row.valid1 as u8,
                row.valid2 as u8
            ));
        }
        out
    }
}

/// Nearest-branch continuation: shift `raw` by a multiple of 2 pi to land
/// within pi of `prev`.
fn unwrap_towards(prev: f64, raw: f64) -> f64 {
    prev + (raw - prev + PI).rem_euclid(TAU) - PI
}

/// Run the full simulation, recording order parameters at t = 0 and after
/// every step. Deterministic given the config.
pub fn simulate(cfg: &SimulationConfig) -> Result<TimeSeries> {
    let mut sim = Simulator::new(cfg.clone())?;
    let mut rows = Vec::with_capacity(cfg.steps + 1);
    let push_row = |sim: &Simulator, rows: &mut Vec<TimeSeriesRow>| {
        let ((r1, psi1_raw), (r2, psi2_raw)) = sim.community_order_params();
        let (psi1, psi2) = match rows.last() {
            None => (psi1_raw, psi2_raw),
            Some(prev) => (
                unwrap_towards(prev.psi1, psi1_raw),
                unwrap_towards(prev.psi2, psi2_raw),
            ),
        };
        rows.push(TimeSeriesRow {
            t: sim.time(),
            r1,
            r2,
            psi1,
            psi2,
            valid1: r1 >= PSI_VALID_FLOOR,
            valid2: r2 >= PSI_VALID_FLOOR,
        });
    };
    push_row(&sim, &mut rows);
    for _ in 0..cfg.steps {
        sim.step()?;
        push_row(&sim, &mut rows);
    }
    Ok(TimeSeries {
        seed: cfg.seed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::v_fn;
    use crate::disorder::DisorderKind;
    use crate::selfcons::symmetric_r_total;

    fn point_mass() -> DisorderSpec {
        DisorderSpec::new(DisorderKind::PointMassZero).unwrap()
    }

    fn base_config() -> SimulationConfig {
        SimulationConfig {
            n1: 64,
            n2: 64,
            dt: 0.01,
            steps: 50,
            seed: 42,
            initial: [
                InitialSpec::VonMises {
                    mean: PI,
                    concentration: 4.0,
                },
                InitialSpec::VonMises {
                    mean: PI,
                    concentration: 4.0,
                },
            ],
            coupling: CouplingConfig::symmetric(5.0, 2.0, 1.0).unwrap(),
            disorder: point_mass(),
            community_seeds: None,
            allow_degenerate: false,
        }
    }

    #[test]
    fn coupling_validation() {
        assert!(CouplingConfig::new(5.0, 5.0, 2.0, 2.0, 0.5, 0.5, 1.0).is_ok());
        assert!(CouplingConfig::new(0.0, 5.0, 2.0, 2.0, 0.5, 0.5, 1.0).is_err());
        assert!(CouplingConfig::new(5.0, 5.0, 0.0, 2.0, 0.5, 0.5, 1.0).is_err());
        assert!(CouplingConfig::new(5.0, 5.0, 2.0, 2.0, 0.6, 0.5, 1.0).is_err());
        assert!(CouplingConfig::new(5.0, 5.0, 2.0, 2.0, 0.5, 0.5, 0.0).is_err());
        // the degenerate gate admits the null model
        let null = CouplingConfig {
            k1: 0.0,
            k2: 0.0,
            l1: 0.0,
            l2: 0.0,
            alpha1: 0.5,
            alpha2: 0.5,
            d: 1.0,
        };
        assert!(null.validate(false).is_err());
        assert!(null.validate(true).is_ok());
    }

    #[test]
    fn config_validation_and_serde() {
        let cfg = base_config();
        assert!(cfg.validate().is_ok());
        let json = serde_json::to_string(&cfg).unwrap();
        let back: SimulationConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);

        let mut bad = base_config();
        bad.dt = 0.1;
        assert!(bad.validate().is_err());
        let mut bad = base_config();
        bad.n1 = 1;
        assert!(bad.validate().is_err());
        let mut bad = base_config();
        bad.initial[0] = InitialSpec::Explicit { angles: vec![0.0; 3] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn order_params_examples() {
        let (r, psi) = order_params(&[2.0; 17]).unwrap();
        assert!((r - 1.0).abs() <= 1e-12);
        assert!((psi - 2.0).abs() <= 1e-12);

        let (r, psi) = order_params(&[0.0, PI]).unwrap();
        assert!(r <= 1e-12);
        assert!(psi.is_finite());

        let (r, psi) = order_params(&[0.0, PI / 2.0]).unwrap();
        assert!((r - (2.0f64).sqrt() / 2.0).abs() <= 1e-12);
        assert!((psi - PI / 4.0).abs() <= 1e-12);

        assert!(order_params(&[]).is_err());
    }

    #[test]
    fn initial_uniform_null() {
        let angles = sample_initial(0.0, 0.0, 100_000, 7).unwrap();
        let (r, _) = order_params(&angles).unwrap();
        assert!(r <= 0.02, "uniform sample r = {r}");
    }

    #[test]
    fn initial_concentrated_collapses_to_mean() {
        let angles = sample_initial(1.5, 1e12, 1000, 7).unwrap();
        for a in angles {
            assert!((a - 1.5).abs() <= 0.01, "angle {a}");
        }
    }

    #[test]
    fn initial_circular_mean_matches() {
        let angles = sample_initial(PI, 4.0, 100_000, 11).unwrap();
        let (_, psi) = order_params(&angles).unwrap();
        assert!((psi - PI).abs() <= 0.02, "psi = {psi}");
    }

    #[test]
    fn von_mises_cosine_moment_matches_bessel_ratio() {
        let kappa = 4.0;
        let angles = sample_initial(0.0, kappa, 200_000, 13).unwrap();
        let mean_cos: f64 = angles.iter().map(|a| a.cos()).sum::<f64>() / angles.len() as f64;
        let want = v_fn(kappa).unwrap();
        assert!((mean_cos - want).abs() <= 0.01, "{mean_cos} vs {want}");
    }

    #[test]
    fn zero_drift_leaves_state_unchanged() {
        let initial: Vec<f64> = (0..32).map(|i| 0.1 + 0.19 * i as f64).collect();
        let cfg = SimulationConfig {
            n1: 32,
            n2: 32,
            dt: 0.01,
            steps: 10,
            seed: 3,
            initial: [
                InitialSpec::Explicit {
                    angles: initial.clone(),
                },
                InitialSpec::Explicit {
                    angles: initial.clone(),
                },
            ],
            coupling: CouplingConfig {
                k1: 0.0,
                k2: 0.0,
                l1: 0.0,
                l2: 0.0,
                alpha1: 0.5,
                alpha2: 0.5,
                d: 1e-300,
            },
            disorder: point_mass(),
            community_seeds: None,
            allow_degenerate: true,
        };
        let mut sim = Simulator::new(cfg).unwrap();
        for _ in 0..10 {
            sim.step().unwrap();
        }
        let wrapped: Vec<f64> = initial.iter().map(|a| a.rem_euclid(TAU)).collect();
        assert_eq!(sim.angles().0, &wrapped[..]);
        assert_eq!(sim.angles().1, &wrapped[..]);
    }

    #[test]
    fn synchronized_state_is_fixed() {
        let cfg = SimulationConfig {
            n1: 16,
            n2: 16,
            dt: 0.01,
            steps: 5,
            seed: 3,
            initial: [
                InitialSpec::Explicit { angles: vec![1.3; 16] },
                InitialSpec::Explicit { angles: vec![1.3; 16] },
            ],
            coupling: CouplingConfig {
                k1: 3.0,
                k2: 3.0,
                l1: 1.0,
                l2: 1.0,
                alpha1: 0.5,
                alpha2: 0.5,
                d: 1e-300,
            },
            disorder: point_mass(),
            community_seeds: None,
            allow_degenerate: false,
        };
        let mut sim = Simulator::new(cfg).unwrap();
        for _ in 0..5 {
            sim.step().unwrap();
        }
        assert_eq!(sim.angles().0, &[1.3; 16][..]);
    }

    #[test]
    fn identical_seeds_reproduce_bitwise() {
        let cfg = base_config();
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn community_swap_is_exact() {
        let mut cfg = base_config();
        cfg.n1 = 40;
        cfg.n2 = 72;
        cfg.steps = 60;
        cfg.coupling = CouplingConfig::new(3.0, 4.5, 1.5, -2.0, 0.4, 0.6, 0.8).unwrap();
        cfg.initial = [
            InitialSpec::VonMises {
                mean: 0.5,
                concentration: 3.0,
            },
            InitialSpec::VonMises {
                mean: 2.5,
                concentration: 6.0,
            },
        ];
        cfg.disorder = DisorderSpec::new(DisorderKind::Bimodal { omega0: 0.5 }).unwrap();
        cfg.community_seeds = Some([101, 202]);

        let mut swapped = cfg.clone();
        swapped.n1 = cfg.n2;
        swapped.n2 = cfg.n1;
        swapped.coupling =
            CouplingConfig::new(4.5, 3.0, -2.0, 1.5, 0.6, 0.4, 0.8).unwrap();
        swapped.initial = [cfg.initial[1].clone(), cfg.initial[0].clone()];
        swapped.community_seeds = Some([202, 101]);

        let a = simulate(&cfg).unwrap();
        let b = simulate(&swapped).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.r1, rb.r2);
            assert_eq!(ra.r2, rb.r1);
            assert_eq!(ra.psi1, rb.psi2);
            assert_eq!(ra.psi2, rb.psi1);
        }
    }

    #[test]
    fn null_model_stays_incoherent() {
        let cfg = SimulationConfig {
            n1: 500,
            n2: 500,
            dt: 0.05,
            steps: 2000,
            seed: 99,
            initial: [
                InitialSpec::VonMises {
                    mean: 0.0,
                    concentration: 0.0,
                },
                InitialSpec::VonMises {
                    mean: 0.0,
                    concentration: 0.0,
                },
            ],
            coupling: CouplingConfig {
                k1: 0.0,
                k2: 0.0,
                l1: 0.0,
                l2: 0.0,
                alpha1: 0.5,
                alpha2: 0.5,
                d: 1.0,
            },
            disorder: point_mass(),
            community_seeds: None,
            allow_degenerate: true,
        };
        let series = simulate(&cfg).unwrap();
        let (r1, r2) = series.late_window_mean(1000).unwrap();
        assert!(r1 <= 0.06 && r2 <= 0.06, "null model r = ({r1}, {r2})");
    }

    #[test]
    fn equilibrium_matches_selfcons_solution() {
        let mut cfg = base_config();
        cfg.n1 = 1000;
        cfg.n2 = 1000;
        cfg.steps = 4000;
        let series = simulate(&cfg).unwrap();
        let want = symmetric_r_total(7.0).unwrap();
        assert!((want - 0.918).abs() <= 1e-3);
        let (r1, r2) = series.late_window_mean(1000).unwrap();
        assert!((r1 - want).abs() <= 0.03, "r1 = {r1} vs {want}");
        assert!((r2 - want).abs() <= 0.03, "r2 = {r2} vs {want}");
        for row in &series.rows[series.rows.len() - 1000..] {
            assert!(row.valid1 && row.valid2);
        }
    }

    #[test]
    fn halving_dt_barely_moves_equilibrium() {
        let mut coarse = base_config();
        coarse.n1 = 500;
        coarse.n2 = 500;
        coarse.dt = 0.02;
        coarse.steps = 3000;
        let mut fine = coarse.clone();
        fine.dt = 0.01;
        fine.steps = 6000;
        let (ra, _) = simulate(&coarse).unwrap().late_window_mean(1000).unwrap();
        let (rb, _) = simulate(&fine).unwrap().late_window_mean(2000).unwrap();
        assert!((ra - rb).abs() <= 0.01, "{ra} vs {rb}");
    }

    #[test]
    fn unwrapped_phase_is_continuous() {
        let mut cfg = base_config();
        cfg.steps = 400;
        let series = simulate(&cfg).unwrap();
        for pair in series.rows.windows(2) {
            assert!((pair[1].psi1 - pair[0].psi1).abs() <= PI);
            assert!((pair[1].t - pair[0].t - cfg.dt).abs() <= 1e-12);
        }
    }

    #[test]
    fn csv_shape() {
        let mut cfg = base_config();
        cfg.steps = 3;
        let series = simulate(&cfg).unwrap();
        let csv = series.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# seed = 42");
        assert_eq!(lines[1], "t,r1,r2,psi1,psi2,valid1,valid2");
        assert_eq!(lines.len(), 2 + 4);
        assert!(lines[2].ends_with(",1,1"));
    }
}
