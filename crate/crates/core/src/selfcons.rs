//! Stationary self-consistency analysis for the symmetric two-community
//! reduction (equal community sizes, equal couplings, unit noise).
//!
//! With order parameters (r1, r2) and average-phase difference psi locked to
//! 0 or pi, stationarity reduces to the fixed-point system
//!
//! ```text
//! r1 = V(K r1 + L' r2)
//! r2 = V(K r2 + L' r1)        L' = L cos(psi)
//! ```
//!
//! using the odd extension of V. Solutions fall into three kinds: the
//! unsynchronized origin, symmetric points (r, r), and non-symmetric pairs
//! {(a, b), (b, a)}. Axis points (exactly one zero component) cannot solve
//! the system and the solver asserts none are produced.

use crate::bessel::{v_prime_raw, v_raw};
use crate::error::{Error, Result};
use crate::io_util::fmt_f64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Average-phase difference between the two communities, restricted to the
/// two stationary values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Psi {
    Zero,
    Pi,
}

impl Psi {
    pub fn cos(self) -> f64 {
        match self {
            Psi::Zero => 1.0,
            Psi::Pi => -1.0,
        }
    }

    pub fn radians(self) -> f64 {
        match self {
            Psi::Zero => 0.0,
            Psi::Pi => std::f64::consts::PI,
        }
    }
}

impl std::fmt::Display for Psi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Psi::Zero => write!(f, "zero"),
            Psi::Pi => write!(f, "pi"),
        }
    }
}

impl std::str::FromStr for Psi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" | "0" => Ok(Psi::Zero),
            "pi" => Ok(Psi::Pi),
            other => Err(Error::Domain(format!(
                "psi must be \"zero\"/\"0\" or \"pi\", got {other:?}"
            ))),
        }
    }
}

/// Couplings of the symmetric reduction: intra-community K > 0,
/// inter-community L != 0, phase difference psi in {0, pi}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetricCoupling {
    k: f64,
    l: f64,
    psi: Psi,
}

impl SymmetricCoupling {
    pub fn new(k: f64, l: f64, psi: Psi) -> Result<Self> {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::Domain(format!("K must be finite and > 0, got {k}")));
        }
        if !l.is_finite() || l == 0.0 {
            return Err(Error::Domain(format!("L must be finite and != 0, got {l}")));
        }
        Ok(SymmetricCoupling { k, l, psi })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn psi(&self) -> Psi {
        self.psi
    }

    /// Effective inter-community coupling L cos(psi).
    pub fn l_eff(&self) -> f64 {
        self.l * self.psi.cos()
    }

    /// Total coupling K + L cos(psi) felt by the symmetric branch.
    pub fn total(&self) -> f64 {
        self.k + self.l_eff()
    }
}

/// Classification of a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    Unsynchronized,
    Symmetric,
    NonSymmetric,
}

impl FixedPointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FixedPointKind::Unsynchronized => "unsynchronized",
            FixedPointKind::Symmetric => "symmetric",
            FixedPointKind::NonSymmetric => "non_symmetric",
        }
    }
}

/// A solution of the fixed-point system with its local linearization data.
///
/// `eigenvalues` are those of the self-consistency map's Jacobian at the
/// point, sorted descending; `residual` is the infinity norm of rhs(r) - r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub r1: f64,
    pub r2: f64,
    pub kind: FixedPointKind,
    pub eigenvalues: (f64, f64),
    pub residual: f64,
}

/// All fixed points found for one coupling, sorted by (r1, r2).
#[derive(Debug, Clone)]
pub struct SolutionSet {
    pub coupling: SymmetricCoupling,
    pub points: Vec<FixedPoint>,
    /// Seeds whose Newton iteration failed to converge (discarded).
    pub failed_seeds: usize,
}

/// Outcome of the non-symmetric ordering check r2 < r_sym < r1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingCheck {
    Holds,
    Violated,
    /// No symmetric point or no non-symmetric pair to compare.
    NotApplicable,
}

#[inline]
fn rhs_raw(r1: f64, r2: f64, k: f64, lp: f64) -> (f64, f64) {
    (v_raw(k * r1 + lp * r2), v_raw(k * r2 + lp * r1))
}

/// One application of the self-consistency map.
pub fn selfcons_rhs(r1: f64, r2: f64, c: &SymmetricCoupling) -> Result<(f64, f64)> {
    check_unit_square(r1, r2)?;
    Ok(rhs_raw(r1, r2, c.k, c.l_eff()))
}

fn check_unit_square(r1: f64, r2: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r1) || !(0.0..=1.0).contains(&r2) {
        return Err(Error::Domain(format!(
            "(r1, r2) = ({r1}, {r2}) outside [0,1]^2"
        )));
    }
    Ok(())
}

#[inline]
fn jac_raw(r1: f64, r2: f64, k: f64, lp: f64) -> [[f64; 2]; 2] {
    let da = v_prime_raw(k * r1 + lp * r2);
    let db = v_prime_raw(k * r2 + lp * r1);
    [[k * da, lp * da], [lp * db, k * db]]
}

/// Jacobian of the self-consistency map at (r1, r2).
pub fn jacobian(r1: f64, r2: f64, c: &SymmetricCoupling) -> Result<[[f64; 2]; 2]> {
    check_unit_square(r1, r2)?;
    Ok(jac_raw(r1, r2, c.k, c.l_eff()))
}

/// Eigenvalues of a 2x2 map Jacobian, sorted descending. The discriminant is
/// non-negative for these matrices (off-diagonal product L'^2 V' V' >= 0).
pub fn map_eigenvalues(j: &[[f64; 2]; 2]) -> (f64, f64) {
    let tr = j[0][0] + j[1][1];
    let disc = (j[0][0] - j[1][1]) * (j[0][0] - j[1][1]) + 4.0 * j[0][1] * j[1][0];
    let root = disc.max(0.0).sqrt();
    (0.5 * (tr + root), 0.5 * (tr - root))
}

const NEWTON_MAX_ITER: usize = 80;
const NEWTON_TOL: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-7;
const SEEDS_PER_AXIS: usize = 64;

fn g_inf(r: [f64; 2], k: f64, lp: f64) -> ([f64; 2], f64) {
    let (f1, f2) = rhs_raw(r[0], r[1], k, lp);
    let g = [f1 - r[0], f2 - r[1]];
    (g, g[0].abs().max(g[1].abs()))
}

/// Damped Newton on G(r) = rhs(r) - r from one seed. Iterates may leave the
/// unit square transiently; converged points outside it are rejected later.
fn newton_from(seed: [f64; 2], k: f64, lp: f64) -> Option<[f64; 2]> {
    let mut r = seed;
    let (mut g, mut gn) = g_inf(r, k, lp);
    for _ in 0..NEWTON_MAX_ITER {
        if gn <= NEWTON_TOL {
            return Some(r);
        }
        let j = jac_raw(r[0], r[1], k, lp);
        // Jacobian of G is J - I
        let a = j[0][0] - 1.0;
        let b = j[0][1];
        let c = j[1][0];
        let d = j[1][1] - 1.0;
        let det = a * d - b * c;
        if det.abs() < 1e-14 {
            return None;
        }
        let dx = [(-g[0] * d + g[1] * b) / det, (g[0] * c - g[1] * a) / det];
        let mut lambda = 1.0;
        let mut advanced = false;
        while lambda >= 1.0 / 1024.0 {
            let cand = [
                (r[0] + lambda * dx[0]).clamp(-0.5, 1.5),
                (r[1] + lambda * dx[1]).clamp(-0.5, 1.5),
            ];
            let (gc, gcn) = g_inf(cand, k, lp);
            if gcn < gn {
                r = cand;
                g = gc;
                gn = gcn;
                advanced = true;
                break;
            }
            lambda *= 0.5;
        }
        if !advanced {
            return None;
        }
    }
    if gn <= NEWTON_TOL {
        Some(r)
    } else {
        None
    }
}

fn classify(r1: f64, r2: f64) -> FixedPointKind {
    if r1 <= 1e-9 && r2 <= 1e-9 {
        FixedPointKind::Unsynchronized
    } else if (r1 - r2).abs() <= 1e-9 {
        FixedPointKind::Symmetric
    } else {
        FixedPointKind::NonSymmetric
    }
}

fn build_point(r1: f64, r2: f64, k: f64, lp: f64) -> FixedPoint {
    let kind = classify(r1, r2);
    let (r1, r2) = if kind == FixedPointKind::Unsynchronized {
        (0.0, 0.0)
    } else {
        (r1, r2)
    };
    let (_, residual) = g_inf([r1, r2], k, lp);
    let eigenvalues = map_eigenvalues(&jac_raw(r1, r2, k, lp));
    FixedPoint {
        r1,
        r2,
        kind,
        eigenvalues,
        residual,
    }
}

/// Find every fixed point in [0,1)^2 by damped Newton from a 64x64 seed
/// grid, deduplicated at infinity-norm tolerance 1e-7 and closed under the
/// (r1, r2) swap. Results are sorted by (r1, r2) and classification is
/// attached to each point.
pub fn find_all_solutions(c: &SymmetricCoupling) -> SolutionSet {
    let (k, lp) = (c.k, c.l_eff());
    let n = SEEDS_PER_AXIS;
    let results: Vec<Option<[f64; 2]>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let i = idx / n;
            let j = idx % n;
            let seed = [
                i as f64 / (n - 1) as f64,
                j as f64 / (n - 1) as f64,
            ];
            newton_from(seed, k, lp)
        })
        .collect();

    let failed_seeds = results.iter().filter(|r| r.is_none()).count();
    let mut raw: Vec<[f64; 2]> = results
        .into_iter()
        .flatten()
        .filter(|r| {
            r[0] >= -1e-9 && r[1] >= -1e-9 && r[0] < 1.0 && r[1] < 1.0
        })
        .map(|r| [r[0].max(0.0), r[1].max(0.0)])
        .collect();

    raw.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut kept: Vec<[f64; 2]> = Vec::new();
    for r in raw {
        if !kept
            .iter()
            .any(|q| (q[0] - r[0]).abs().max((q[1] - r[1]).abs()) <= DEDUP_TOL)
        {
            kept.push(r);
        }
    }

    // swap closure: the map commutes with the coordinate swap
    let mut extra: Vec<[f64; 2]> = Vec::new();
    for r in &kept {
        if (r[0] - r[1]).abs() > 1e-9 {
            let sw = [r[1], r[0]];
            let present = kept
                .iter()
                .chain(extra.iter())
                .any(|q| (q[0] - sw[0]).abs().max((q[1] - sw[1]).abs()) <= DEDUP_TOL);
            if !present {
                extra.push(sw);
            }
        }
    }
    kept.extend(extra);
    kept.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let points: Vec<FixedPoint> = kept
        .into_iter()
        .map(|r| build_point(r[0], r[1], k, lp))
        .collect();

    for p in &points {
        let one_zero = (p.r1 <= 1e-9) ^ (p.r2 <= 1e-9);
        assert!(
            !(one_zero && p.r1.max(p.r2) > 1e-6),
            "axis fixed point ({}, {}) found; excluded by construction",
            p.r1,
            p.r2
        );
    }

    SolutionSet {
        coupling: *c,
        points,
        failed_seeds,
    }
}

/// Positive solution of the symmetric branch r = V((K + L cos psi) r), found
/// by bisection. None at or below the critical total coupling 2.
pub fn symmetric_r(c: &SymmetricCoupling) -> Option<f64> {
    symmetric_r_total(c.total())
}

/// Same as [`symmetric_r`] but parameterized by the total coupling directly.
pub fn symmetric_r_total(total: f64) -> Option<f64> {
    if !(total > 2.0) {
        return None;
    }
    let f = |r: f64| v_raw(total * r) - r;
    let mut lo = 1e-12;
    let mut hi = 1.0;
    debug_assert!(f(lo) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Evaluate the displacement field rhs(r) - r on an n x n inclusive grid
/// over [0,1]^2. Rows are (r1, r2, v1, v2) in row-major order.
pub fn vector_field_grid(c: &SymmetricCoupling, n: usize) -> Result<Vec<(f64, f64, f64, f64)>> {
    if !(8..=512).contains(&n) {
        return Err(Error::Domain(format!(
            "vector field resolution {n} outside [8, 512]"
        )));
    }
    let (k, lp) = (c.k, c.l_eff());
    let step = 1.0 / (n - 1) as f64;
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        let r1 = i as f64 * step;
        for j in 0..n {
            let r2 = j as f64 * step;
            let (f1, f2) = rhs_raw(r1, r2, k, lp);
            rows.push((r1, r2, f1 - r1, f2 - r2));
        }
    }
    Ok(rows)
}

/// Check the ordering r2 < r_sym < r1 of every non-symmetric pair against
/// the positive symmetric solution.
pub fn verify_ordering(s: &SolutionSet) -> OrderingCheck {
    let sym = s
        .points
        .iter()
        .find(|p| p.kind == FixedPointKind::Symmetric)
        .map(|p| 0.5 * (p.r1 + p.r2));
    let ns: Vec<&FixedPoint> = s
        .points
        .iter()
        .filter(|p| p.kind == FixedPointKind::NonSymmetric)
        .collect();
    let (Some(rs), false) = (sym, ns.is_empty()) else {
        return OrderingCheck::NotApplicable;
    };
    for p in ns {
        let hi = p.r1.max(p.r2);
        let lo = p.r1.min(p.r2);
        if !(lo < rs && rs < hi) {
            return OrderingCheck::Violated;
        }
    }
    OrderingCheck::Holds
}

/// CSV serialization of a solution set (no '#' metadata; callers prepend it).
pub fn solution_set_to_csv(s: &SolutionSet) -> String {
    let mut out = String::from("r1,r2,kind,eig1,eig2,residual\n");
    for p in &s.points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(p.r1),
            fmt_f64(p.r2),
            p.kind.as_str(),
            fmt_f64(p.eigenvalues.0),
            fmt_f64(p.eigenvalues.1),
            fmt_f64(p.residual),
        ));
    }
    out
}

/// CSV serialization of a vector-field grid.
pub fn vector_field_to_csv(rows: &[(f64, f64, f64, f64)]) -> String {
    let mut out = String::from("r1,r2,v1,v2\n");
    for (r1, r2, v1, v2) in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(*r1),
            fmt_f64(*r2),
            fmt_f64(*v1),
            fmt_f64(*v2)
        ));
    }
    out
}
