//! Stationary theory with natural-frequency disorder: the susceptibility
//! integral chi, the critical threshold 1/chi for the total coupling, and
//! the exact stationary densities p_m(theta, omega) with their four
//! self-consistency functionals.
//!
//! The reduction used throughout fixes unit noise and equal community
//! halves, folding the half-weights into the couplings, so the density
//! exponent reads
//!
//! ```text
//! E_1(theta) = 2 omega theta + L r2 cos(psi2 - theta) + K r1 cos(psi1 - theta)
//! ```
//!
//! (indices swapped for community 2) and the unnormalized density is
//! A = B (e^{4 pi omega} C + (1 - e^{4 pi omega}) P(theta)) with B = e^E,
//! P(theta) the inner cumulative integral of 1/B and C its full-circle
//! value. For omega = 0 this collapses to A = B.

use crate::error::{Error, Result};
use crate::io_util::fmt_f64;
use crate::selfcons::SymmetricCoupling;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Maximum node magnitude; keeps 4 pi |omega| clear of exp overflow.
const OMEGA_CAP: f64 = 55.0;

/// Supported disorder laws for the natural frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisorderKind {
    PointMassZero,
    Bimodal { omega0: f64 },
    DiscretizedGaussian { sigma: f64, n_nodes: usize },
}

/// A validated, discretized symmetric disorder law: weighted nodes summing
/// to one, symmetric under omega -> -omega, with zero mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DisorderKind", into = "DisorderKind")]
pub struct DisorderSpec {
    kind: DisorderKind,
    nodes: Vec<(f64, f64)>,
}

impl TryFrom<DisorderKind> for DisorderSpec {
    type Error = Error;

    fn try_from(kind: DisorderKind) -> Result<Self> {
        DisorderSpec::new(kind)
    }
}

impl From<DisorderSpec> for DisorderKind {
    fn from(spec: DisorderSpec) -> DisorderKind {
        spec.kind
    }
}

impl DisorderSpec {
    pub fn new(kind: DisorderKind) -> Result<Self> {
        let nodes = match kind {
            DisorderKind::PointMassZero => vec![(0.0, 1.0)],
            DisorderKind::Bimodal { omega0 } => {
                if !omega0.is_finite() || omega0 <= 0.0 || omega0 > OMEGA_CAP {
                    return Err(Error::Domain(format!(
                        "bimodal omega0 must lie in (0, {OMEGA_CAP}], got {omega0}"
                    )));
                }
                vec![(-omega0, 0.5), (omega0, 0.5)]
            }
            DisorderKind::DiscretizedGaussian { sigma, n_nodes } => {
                if !sigma.is_finite() || sigma <= 0.0 || sigma > 6.0 {
                    return Err(Error::Domain(format!(
                        "gaussian sigma must lie in (0, 6], got {sigma}"
                    )));
                }
                if n_nodes < 3 || n_nodes > 1001 || n_nodes % 2 == 0 {
                    return Err(Error::Domain(format!(
                        "gaussian n_nodes must be odd in [3, 1001], got {n_nodes}"
                    )));
                }
                gaussian_nodes(sigma, n_nodes)
            }
        };
        let spec = DisorderSpec { kind, nodes };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let sum: f64 = self.nodes.iter().map(|(_, w)| w).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("node weights sum to {sum}, not 1")));
        }
        let mean: f64 = self.nodes.iter().map(|(o, w)| o * w).sum();
        if mean.abs() > 1e-12 {
            return Err(Error::Domain(format!("node mean {mean} is not 0")));
        }
        for &(o, w) in &self.nodes {
            if !o.is_finite() || o.abs() > OMEGA_CAP || !w.is_finite() || w < 0.0 {
                return Err(Error::Domain(format!("bad node ({o}, {w})")));
            }
            // symmetry partner with equal weight
            let partner = self
                .nodes
                .iter()
                .any(|&(o2, w2)| (o2 + o).abs() <= 1e-14 * o.abs().max(1.0) && w2 == w);
            if !partner {
                return Err(Error::Domain(format!(
                    "node omega = {o} has no mirror of equal weight"
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> DisorderKind {
        self.kind
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// Whether threshold statements for this law rest on the concavity
    /// conjecture rather than a proof. Only the zero point mass is proven.
    pub fn conjectural(&self) -> bool {
        !matches!(self.kind, DisorderKind::PointMassZero)
    }
}

/// Symmetric uniform discretization of a centered Gaussian over +-8 sigma:
/// midpoint-in-probability weights renormalized to 1. Uniform spacing keeps
/// the weighted sums of smooth integrands spectrally accurate, and n odd
/// keeps omega = 0 a node. Built from the positive half plus its mirror so
/// the symmetry is exact in floating point.
fn gaussian_nodes(sigma: f64, n: usize) -> Vec<(f64, f64)> {
    let half = n / 2;
    let h = 8.0 * sigma / (half as f64 + 0.5);
    let mut nodes = Vec::with_capacity(n);
    let mut pos = Vec::with_capacity(half);
    for i in 1..=half {
        let omega = i as f64 * h;
        let w = (-0.5 * (omega / sigma) * (omega / sigma)).exp();
        pos.push((omega, w));
    }
    let total: f64 = 1.0 + 2.0 * pos.iter().map(|(_, w)| w).sum::<f64>();
    for &(o, w) in pos.iter().rev() {
        nodes.push((-o, w / total));
    }
    nodes.push((0.0, 1.0 / total));
    for &(o, w) in &pos {
        nodes.push((o, w / total));
    }
    nodes
}

/// Susceptibility of the disorder law: the node sum of w / (2 (1 + 4 w^2)).
pub fn chi(mu: &DisorderSpec) -> f64 {
    mu.nodes
        .iter()
        .map(|&(o, w)| w / (2.0 * (1.0 + 4.0 * o * o)))
        .sum()
}

/// Critical total coupling 1/chi. Equals 2 for the zero point mass.
pub fn critical_threshold(mu: &DisorderSpec) -> f64 {
    1.0 / chi(mu)
}

/// Which community's density to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Community {
    One,
    Two,
}

impl Community {
    pub fn index(self) -> u8 {
        match self {
            Community::One => 1,
            Community::Two => 2,
        }
    }
}

/// Mean-field state entering the stationary densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub r1: f64,
    pub r2: f64,
    pub psi1: f64,
    pub psi2: f64,
}

impl MeanFieldState {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r1", self.r1),
            ("r2", self.r2),
            ("psi1", self.psi1),
            ("psi2", self.psi2),
        ] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("state field {name} = {v} not finite")));
            }
        }
        if !(0.0..=1.0).contains(&self.r1) || !(0.0..=1.0).contains(&self.r2) {
            return Err(Error::Domain(format!(
                "(r1, r2) = ({}, {}) outside [0,1]^2",
                self.r1, self.r2
            )));
        }
        Ok(())
    }
}

const BASE_GRID: usize = 2048;
const MAX_GRID: usize = 65536;
const SELF_CHECK_TOL: f64 = 1e-9;

/// Per-community drift-potential coefficients: E(theta) = 2 w theta
/// + c_other cos(psi_other - theta) + c_own cos(psi_own - theta).
#[derive(Debug, Clone, Copy)]
struct Exponent {
    omega: f64,
    c_own: f64,
    psi_own: f64,
    c_other: f64,
    psi_other: f64,
}

impl Exponent {
    fn new(community: Community, state: &MeanFieldState, k: f64, l: f64, omega: f64) -> Self {
        match community {
            Community::One => Exponent {
                omega,
                c_own: k * state.r1,
                psi_own: state.psi1,
                c_other: l * state.r2,
                psi_other: state.psi2,
            },
            Community::Two => Exponent {
                omega,
                c_own: k * state.r2,
                psi_own: state.psi2,
                c_other: l * state.r1,
                psi_other: state.psi1,
            },
        }
    }

    fn e(&self, theta: f64) -> f64 {
        2.0 * self.omega * theta
            + self.c_other * (self.psi_other - theta).cos()
            + self.c_own * (self.psi_own - theta).cos()
    }

    fn e_prime(&self, theta: f64) -> f64 {
        2.0 * self.omega
            + self.c_other * (self.psi_other - theta).sin()
            + self.c_own * (self.psi_own - theta).sin()
    }
}

/// Tabulated density for one community at one frequency node.
#[derive(Debug, Clone)]
struct Table {
    n: usize,
    h: f64,
    e_min: f64,
    e_max: f64,
    /// exp(-(E - e_min)) at theta_j, j = 0..=n
    gtil: Vec<f64>,
    /// derivative of gtil
    gp: Vec<f64>,
    /// endpoint-corrected cumulative integral of gtil from 0
    ptil: Vec<f64>,
    /// endpoint-corrected reverse cumulative integral of gtil to 2 pi
    rtil: Vec<f64>,
    /// unnormalized density at theta_j
    q: Vec<f64>,
    /// normalizer: periodic trapezoid of q
    z: f64,
    e4: f64,
    ctil: f64,
}

impl Table {
    fn build(exp_: &Exponent, n: usize) -> Table {
        let h = TAU / n as f64;
        let e: Vec<f64> = (0..=n).map(|j| exp_.e(j as f64 * h)).collect();
        let e_min = e.iter().cloned().fold(f64::INFINITY, f64::min);
        let e_max = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let gtil: Vec<f64> = e.iter().map(|&v| (-(v - e_min)).exp()).collect();
        let gp: Vec<f64> = (0..=n)
            .map(|j| -exp_.e_prime(j as f64 * h) * gtil[j])
            .collect();

        // cumulative trapezoid with the h^2/12 endpoint correction; the
        // integrand is smooth, so the correction lifts the composite error
        // to O(h^4)
        let mut ptil = vec![0.0; n + 1];
        let mut acc = 0.0;
        for j in 1..=n {
            acc += 0.5 * h * (gtil[j - 1] + gtil[j]);
            ptil[j] = acc - h * h / 12.0 * (gp[j] - gp[0]);
        }
        let mut rtil = vec![0.0; n + 1];
        let mut acc = 0.0;
        for j in (0..n).rev() {
            acc += 0.5 * h * (gtil[j] + gtil[j + 1]);
            rtil[j] = acc - h * h / 12.0 * (gp[n] - gp[j]);
        }
        let ctil = ptil[n];

        let e4 = (4.0 * PI * exp_.omega).exp();
        let q: Vec<f64> = (0..=n)
            .map(|j| {
                let bracket = if exp_.omega >= 0.0 {
                    e4 * rtil[j].max(0.0) + ptil[j].max(0.0)
                } else {
                    e4 * ctil + (1.0 - e4) * ptil[j].max(0.0)
                };
                (e[j] - e_max).exp() * bracket
            })
            .collect();
        let z = h * q[..n].iter().sum::<f64>();
        Table {
            n,
            h,
            e_min,
            e_max,
            gtil,
            gp,
            ptil,
            rtil,
            q,
            z,
            e4,
            ctil,
        }
    }

    #[inline]
    fn p(&self, j: usize) -> f64 {
        self.q[j] / self.z
    }
}

/// Normalized stationary density of one community at one frequency,
/// tabulated on a theta-grid that is refined until halving the step moves
/// no grid value by more than 1e-9.
#[derive(Debug, Clone)]
pub struct StationaryDensity {
    community: Community,
    exponent: Exponent,
    table: Table,
}

impl StationaryDensity {
    pub fn build(
        community: Community,
        state: &MeanFieldState,
        c: &SymmetricCoupling,
        omega: f64,
    ) -> Result<Self> {
        state.validate()?;
        Self::build_unchecked(community, state, c.k(), c.l(), omega)
    }

    /// Builder without the r-range check; the linearization probe evaluates
    /// at slightly negative r.
    pub(crate) fn build_unchecked(
        community: Community,
        state: &MeanFieldState,
        k: f64,
        l: f64,
        omega: f64,
    ) -> Result<Self> {
        if !omega.is_finite() || omega.abs() > OMEGA_CAP {
            return Err(Error::Domain(format!(
                "omega = {omega} outside [-{OMEGA_CAP}, {OMEGA_CAP}]"
            )));
        }
        let exponent = Exponent::new(community, state, k, l, omega);
        let mut n = BASE_GRID;
        let mut coarse = Table::build(&exponent, n);
        loop {
            let fine = Table::build(&exponent, 2 * n);
            let max_diff = (0..=n)
                .map(|j| (coarse.p(j) - fine.p(2 * j)).abs())
                .fold(0.0, f64::max);
            if max_diff <= SELF_CHECK_TOL {
                return Ok(StationaryDensity {
                    community,
                    exponent,
                    table: fine,
                });
            }
            if 2 * n >= MAX_GRID {
                return Err(Error::Convergence(format!(
                    "density grid self-check stuck at {max_diff:.3e} with {} points",
                    2 * n
                )));
            }
            n *= 2;
            coarse = fine;
        }
    }

    pub fn community(&self) -> Community {
        self.community
    }

    /// Density value at an arbitrary angle: exact exponent plus a single
    /// corrected sub-panel for the cumulative integrals.
    pub fn eval(&self, theta: f64) -> f64 {
        let t = &self.table;
        let wrap = theta.rem_euclid(TAU);
        let j = ((wrap / t.h) as usize).min(t.n - 1);
        let tj = j as f64 * t.h;
        let e_th = self.exponent.e(wrap);
        let g_th = (-(e_th - t.e_min)).exp();
        let gp_th = -self.exponent.e_prime(wrap) * g_th;
        let d = wrap - tj;
        let p_th =
            t.ptil[j] + 0.5 * d * (t.gtil[j] + g_th) - d * d / 12.0 * (gp_th - t.gp[j]);
        let d2 = (j as f64 + 1.0) * t.h - wrap;
        let r_th =
            t.rtil[j + 1] + 0.5 * d2 * (g_th + t.gtil[j + 1]) - d2 * d2 / 12.0 * (t.gp[j + 1] - gp_th);
        let bracket = if self.exponent.omega >= 0.0 {
            t.e4 * r_th.max(0.0) + p_th.max(0.0)
        } else {
            t.e4 * t.ctil + (1.0 - t.e4) * p_th.max(0.0)
        };
        ((e_th - t.e_max).exp() * bracket / t.z).max(0.0)
    }

    /// Tabulated (theta, p) pairs over one period, excluding 2 pi.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        (0..self.table.n)
            .map(|j| (j as f64 * self.table.h, self.table.p(j)))
            .collect()
    }

    /// Periodic-trapezoid moment of cos(psi - theta) against the density.
    pub fn cos_moment(&self, psi: f64) -> f64 {
        let t = &self.table;
        let sum: f64 = (0..t.n)
            .map(|j| (psi - j as f64 * t.h).cos() * t.q[j])
            .sum();
        t.h * sum / t.z
    }

    /// Periodic-trapezoid moment of sin(psi - theta) against the density.
    pub fn sin_moment(&self, psi: f64) -> f64 {
        let t = &self.table;
        let sum: f64 = (0..t.n)
            .map(|j| (psi - j as f64 * t.h).sin() * t.q[j])
            .sum();
        t.h * sum / t.z
    }
}

/// Convenience scalar evaluation of the stationary density.
pub fn stationary_density(
    community: Community,
    theta: f64,
    omega: f64,
    state: &MeanFieldState,
    c: &SymmetricCoupling,
) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("theta = {theta} not finite")));
    }
    Ok(StationaryDensity::build(community, state, c, omega)?.eval(theta))
}

/// The four disorder-averaged self-consistency functionals
/// (V1, V2, U1, U2). A stationary state has V1 = r1, V2 = r2, U1 = U2 = 0.
/// The rotation convention psi1 = 0 is enforced.
pub fn selfcons_functionals(
    state: &MeanFieldState,
    c: &SymmetricCoupling,
    mu: &DisorderSpec,
) -> Result<(f64, f64, f64, f64)> {
    if state.psi1 != 0.0 {
        return Err(Error::Domain(format!(
            "functional convention requires psi1 = 0, got {}",
            state.psi1
        )));
    }
    state.validate()?;
    let (mut v1, mut v2, mut u1, mut u2) = (0.0, 0.0, 0.0, 0.0);
    for &(omega, w) in mu.nodes() {
        let d1 = StationaryDensity::build(Community::One, state, c, omega)?;
        let d2 = StationaryDensity::build(Community::Two, state, c, omega)?;
        v1 += w * d1.cos_moment(state.psi1);
        v2 += w * d2.cos_moment(state.psi2);
        u1 += w * d1.sin_moment(state.psi1);
        u2 += w * d2.sin_moment(state.psi2);
    }
    Ok((v1, v2, u1, u2))
}

/// V1 at the symmetric state (r, r) with psi1 = 0 and psi2 = c.psi. Skips
/// the range check so the linearization probe can pass small negative r.
fn v1_symmetric_raw(r: f64, c: &SymmetricCoupling, mu: &DisorderSpec) -> Result<f64> {
    let state = MeanFieldState {
        r1: r,
        r2: r,
        psi1: 0.0,
        psi2: c.psi().radians(),
    };
    let mut v1 = 0.0;
    for &(omega, w) in mu.nodes() {
        let d1 = StationaryDensity::build_unchecked(Community::One, &state, c.k(), c.l(), omega)?;
        v1 += w * d1.cos_moment(0.0);
    }
    Ok(v1)
}

/// Symmetric synchronization level under disorder: the positive root of
/// r = V1(r, r), or 0 at or below the critical total coupling 1/chi.
/// Positivity above the threshold leans on the concavity conjecture for
/// the disorder-averaged response; see [`DisorderSpec::conjectural`].
pub fn solve_symmetric_with_disorder(c: &SymmetricCoupling, mu: &DisorderSpec) -> Result<f64> {
    if c.total() <= critical_threshold(mu) {
        return Ok(0.0);
    }
    let f = |r: f64| -> Result<f64> { Ok(v1_symmetric_raw(r, c, mu)? - r) };
    let mut lo = 1e-8;
    let mut hi = 1.0 - 1e-12;
    if f(lo)? <= 0.0 {
        // threshold passed but the slope margin is thinner than the probe
        return Ok(0.0);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Deviation of the numerically-estimated slope of r -> V1(r, r) at 0 from
/// (K + L cos psi) chi. Magnitudes at the 1e-6 scale certify the expansion.
pub fn linearization_check(c: &SymmetricCoupling, mu: &DisorderSpec) -> Result<f64> {
    let h = 1e-5;
    let slope = (v1_symmetric_raw(h, c, mu)? - v1_symmetric_raw(-h, c, mu)?) / (2.0 * h);
    Ok(slope - c.total() * chi(mu))
}

/// CSV of density profiles over all frequency nodes: columns theta, omega, p.
pub fn density_profile_csv(
    community: Community,
    state: &MeanFieldState,
    c: &SymmetricCoupling,
    mu: &DisorderSpec,
    n_theta: usize,
) -> Result<String> {
    if !(8..=8192).contains(&n_theta) {
        return Err(Error::Domain(format!(
            "n_theta = {n_theta} outside [8, 8192]"
        )));
    }
    let mut out = String::from("theta,omega,p\n");
    for &(omega, _) in mu.nodes() {
        let d = StationaryDensity::build(community, state, c, omega)?;
        for i in 0..n_theta {
            let theta = TAU * i as f64 / n_theta as f64;
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(theta),
                fmt_f64(omega),
                fmt_f64(d.eval(theta))
            ));
        }
    }
    Ok(out)
}
