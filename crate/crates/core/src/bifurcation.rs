//! Geometry of the branch point where non-symmetric solutions appear for
//! negative inter-community coupling.
//!
//! On the branch locus the anti-symmetric linearization mode of the
//! fixed-point system crosses unity at the symmetric solution. Eliminating
//! V' there gives the closed-form synchronization level
//!
//! ```text
//! r*(K, L) = sqrt(1 - 2K / (K^2 - L^2))
//! ```
//!
//! and membership reduces to the scalar equation V((K+L) r*) = r*. This
//! module solves that equation in all three directions (K*(L), L*(K),
//! K*(r)), evaluates the closed-form derivatives along the locus, and
//! classifies the (K, L) plane into regions by solution count.

use crate::bessel::{s_raw, v_raw, v_upper_bound, BoundLevel};
use crate::error::{Error, Result};
use crate::io_util::fmt_f64;
use crate::selfcons::{symmetric_r_total, Psi};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A point on the branch locus. `k_star + l > 2` and `l < 0` always hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationPoint {
    pub k_star: f64,
    pub l: f64,
    pub r_star: f64,
}

impl BifurcationPoint {
    /// Residual of V((K*+L) r*) = r*.
    pub fn selfcon_defect(&self) -> f64 {
        (v_raw((self.k_star + self.l) * self.r_star) - self.r_star).abs()
    }

    /// Residual of r* against the closed-form radical.
    pub fn radical_defect(&self) -> f64 {
        match r_star(self.k_star, self.l) {
            Ok(r) => (r - self.r_star).abs(),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Synchronization level at the branch point, from the closed form.
pub fn r_star(k: f64, l: f64) -> Result<f64> {
    if !k.is_finite() || !l.is_finite() {
        return Err(Error::Domain(format!("non-finite input (K={k}, L={l})")));
    }
    let kk_ll = k * k - l * l;
    if kk_ll <= 0.0 {
        return Err(Error::Domain(format!(
            "K^2 - L^2 = {kk_ll} must be positive (K={k}, L={l})"
        )));
    }
    let radicand = 1.0 - 2.0 * k / kk_ll;
    // tolerate rounding at the K^2 - L^2 = 2K boundary
    if radicand < -1e-12 {
        return Err(Error::Domain(format!(
            "K^2 - L^2 = {kk_ll} < 2K = {}; radicand negative (K={k}, L={l})",
            2.0 * k
        )));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// Total coupling K + L on the constant-r contour through (K, r): the
/// smaller root K - sqrt(K^2 - 2K/(1-r^2)), evaluated in the
/// subtraction-free form.
pub(crate) fn f_of_k_r(k: f64, r: f64) -> f64 {
    let a = 2.0 * k / (1.0 - r * r);
    let root = (k * k - a).max(0.0).sqrt();
    a / (k + root)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64, iters: usize) -> f64 {
    // assumes f(lo) < 0 < f(hi)
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * mid.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

const DEFECT_TOL: f64 = 1e-12;

/// Branch-point coupling K*(L) for fixed L < 0.
///
/// The root of h(K) = V((K+L) r*(K, L)) - r*(K, L) is bracketed between the
/// radicand-zero boundary K = 1 + sqrt(1 + L^2) (where r* = 0 and the
/// effective total coupling is still below 2, so h < 0) and a doubling
/// upper search; bisection refines to |h| <= 1e-12.
pub fn k_star_of_l(l: f64) -> Result<BifurcationPoint> {
    if !l.is_finite() || l >= 0.0 {
        return Err(Error::Domain(format!(
            "branch points require L < 0, got {l}"
        )));
    }
    let k_min = 1.0 + (1.0 + l * l).sqrt();
    let h = |k: f64| {
        let r = r_star(k, l).unwrap_or(0.0);
        v_raw((k + l) * r) - r
    };
    let lo = k_min + 1e-9;
    let mut hi = 2.0 * lo;
    let mut doublings = 0;
    while h(hi) <= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Convergence(format!(
                "no sign change for K*(L={l}) in [{lo}, {hi}]"
            )));
        }
    }
    let k_star = bisect(lo, hi, h, 200);
    let r = r_star(k_star, l)?;
    let point = BifurcationPoint { k_star, l, r_star: r };
    if point.selfcon_defect() > DEFECT_TOL {
        return Err(Error::Convergence(format!(
            "K*(L={l}): defect {} above {DEFECT_TOL}",
            point.selfcon_defect()
        )));
    }
    Ok(point)
}

/// Branch-point coupling L*(K) for fixed K > 2.
///
/// The root lies in (-sqrt(K(K-2)), 0): at the left end r* vanishes with
/// total coupling below 2 (h < 0), while as L -> 0- the symmetric level at
/// total coupling K stays strictly below the single-community fixed point
/// (h > 0).
pub fn l_star_of_k(k: f64) -> Result<BifurcationPoint> {
    if !k.is_finite() || k <= 2.0 {
        return Err(Error::Domain(format!(
            "branch points require K > 2, got {k} (the level r* vanishes at the boundary)"
        )));
    }
    let l_min = -(k * (k - 2.0)).sqrt();
    let h = |l: f64| {
        let r = r_star(k, l).unwrap_or(0.0);
        v_raw((k + l) * r) - r
    };
    let lo = l_min * (1.0 - 1e-12);
    let mut hi = l_min * 1e-13;
    let mut shrinks = 0;
    while h(hi) <= 0.0 {
        hi *= 1e-3;
        shrinks += 1;
        if shrinks > 10 {
            return Err(Error::Convergence(format!(
                "no sign change for L*(K={k}) in [{lo}, {hi}]"
            )));
        }
    }
    let l_star = bisect(lo, hi, h, 200);
    let r = r_star(k, l_star)?;
    let point = BifurcationPoint {
        k_star: k,
        l: l_star,
        r_star: r,
    };
    if point.selfcon_defect() > DEFECT_TOL {
        return Err(Error::Convergence(format!(
            "L*(K={k}): defect {} above {DEFECT_TOL}",
            point.selfcon_defect()
        )));
    }
    Ok(point)
}

/// Branch-point pair (K*, L) for a prescribed level r in (0, 1).
///
/// V(f(K) r) is strictly decreasing in K, so the root of V(f(K) r) = r is
/// bisected on the interval where f(K) stays admissible: for r < 1/sqrt(2)
/// that is (2/(1-r^2), 2(1-r^2)/(1-2r^2)); for larger r the right end is
/// found by doubling.
pub fn k_star_of_r(r: f64) -> Result<(f64, f64)> {
    if !r.is_finite() || r <= 0.0 || r >= 1.0 {
        return Err(Error::Domain(format!("r must lie in (0, 1), got {r}")));
    }
    let u = 1.0 - r * r;
    let phi = |k: f64| r - v_raw(f_of_k_r(k, r) * r); // increasing in k
    let lo = 2.0 / u * (1.0 + 1e-12);
    let mut hi = if r < std::f64::consts::FRAC_1_SQRT_2 {
        2.0 * u / (1.0 - 2.0 * r * r)
    } else {
        let mut hi = 4.0 / u;
        let mut doublings = 0;
        while phi(hi) <= 0.0 {
            hi *= 2.0;
            doublings += 1;
            if doublings > 60 {
                return Err(Error::Convergence(format!(
                    "no sign change for K*(r={r}) up to K={hi}"
                )));
            }
        }
        hi
    };
    if phi(hi) <= 0.0 {
        // interval end itself is the boundary case f = 2; nudge inward
        hi *= 1.0 + 1e-9;
    }
    let k_star = bisect(lo, hi, phi, 200);
    let l = -(k_star * k_star - 2.0 * k_star / u).max(0.0).sqrt();
    Ok((k_star, l))
}

/// Asymptotic regime selector for [`r_star_asymptotic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticRegime {
    NearTwo,
    LargeK,
}

/// Leading asymptotics of the branch level r*(K): sqrt((K-2)/2) just above
/// the corner at K = 2, and 1 - 1/(2 sqrt(K)) for large K.
pub fn r_star_asymptotic(k: f64, regime: AsymptoticRegime) -> Result<f64> {
    match regime {
        AsymptoticRegime::NearTwo => {
            if !(k > 2.0 && k <= 3.0) {
                return Err(Error::Domain(format!(
                    "near-two regime needs K in (2, 3], got {k}"
                )));
            }
            Ok(((k - 2.0) / 2.0).sqrt())
        }
        AsymptoticRegime::LargeK => {
            if !(k >= 10.0) {
                return Err(Error::Domain(format!(
                    "large-K regime needs K >= 10, got {k}"
                )));
            }
            Ok(1.0 - 0.5 / k.sqrt())
        }
    }
}

const ON_CURVE_TOL: f64 = 1e-8;

fn require_on_curve(k: f64, r: f64) -> Result<()> {
    let defect = (v_raw(f_of_k_r(k, r) * r) - r).abs();
    if defect > ON_CURVE_TOL {
        return Err(Error::Domain(format!(
            "(K={k}, r={r}) off the branch locus: defect {defect} > {ON_CURVE_TOL}"
        )));
    }
    Ok(())
}

/// Derivative of the branch level along the locus, dr*/dK, from the closed
/// rational form. Requires an on-locus pair (defect <= 1e-8); positive for
/// all K > 2.
pub fn dr_star_dk(k: f64, r_star_val: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r_star_val) || !k.is_finite() {
        return Err(Error::Domain(format!(
            "need finite K and r* in [0, 1), got ({k}, {r_star_val})"
        )));
    }
    require_on_curve(k, r_star_val)?;
    let r = r_star_val;
    let u = 1.0 - r * r;
    let denom_core = 2.0 - r * r - k * u * u;
    if denom_core.abs() < 1e-10 {
        return Err(Error::Domain(format!(
            "derivative denominator 2 - r*^2 - K(1 - r*^2)^2 = {denom_core} within 1e-10 of zero"
        )));
    }
    let f = f_of_k_r(k, r);
    Ok(r * u * (f * u - 1.0) / (2.0 * k * denom_core))
}

/// Derivative of the branch coupling along the locus, dL*/dK, as a rational
/// function of (K, L*).
///
/// Eliminating V and V' from the implicit-function quotient via the locus
/// identities V((K+L)r*) = r* and V'((K+L)r*) = 1/(K-L) leaves
///
/// ```text
/// dL*/dK = - (K-2)K^3 + 2K^2 L - 2(K-1)K L^2 + 2L^3 + L^4
///            -----------------------------------------------
///            (K-2)K^3            - 2(K+1)K L^2        + L^4
/// ```
///
/// The denominator's L^2 coefficient is -2(K+1)K: both the finite-difference
/// oracle along the locus and the [`g_partials`] quotient confirm it.
pub fn dl_star_dk(k: f64, l_star_val: f64) -> Result<f64> {
    let l = l_star_val;
    if !k.is_finite() || !l.is_finite() || l >= 0.0 {
        return Err(Error::Domain(format!(
            "need finite K and L* < 0, got ({k}, {l})"
        )));
    }
    let r = r_star(k, l)?;
    let defect = (v_raw((k + l) * r) - r).abs();
    if defect > ON_CURVE_TOL {
        return Err(Error::Domain(format!(
            "(K={k}, L={l}) off the branch locus: defect {defect} > {ON_CURVE_TOL}"
        )));
    }
    let num = (k - 2.0) * k.powi(3) + 2.0 * k * k * l - 2.0 * (k - 1.0) * k * l * l
        + 2.0 * l.powi(3)
        + l.powi(4);
    let den = (k - 2.0) * k.powi(3) - 2.0 * (k + 1.0) * k * l * l + l.powi(4);
    if den.abs() < 1e-10 * (k.powi(4)).max(1.0) {
        return Err(Error::Domain(format!(
            "derivative denominator {den} near zero at (K={k}, L={l})"
        )));
    }
    Ok(-num / den)
}

/// Partial derivatives of the implicit locus function
/// g(K, L) = r*(K, L) - V((K+L) r*(K, L)). Their ratio -dK/dL reproduces
/// dL*/dK on locus points.
pub fn g_partials(k: f64, l: f64) -> Result<(f64, f64)> {
    let r = r_star(k, l)?;
    if r == 0.0 {
        return Err(Error::Domain(format!(
            "g partials undefined where r* = 0 (K={k}, L={l})"
        )));
    }
    let kk_ll = k * k - l * l;
    let t1 = (4.0 * k * k / (kk_ll * kk_ll) - 2.0 / kk_ll) / (2.0 * r);
    let t2 = -2.0 * k * l / (kk_ll * kk_ll * r);
    let x = (k + l) * r;
    let v = v_raw(x);
    let s = s_raw(x);
    let factor = v * v - 0.5 - 0.5 * s;
    let d_k = t1 + ((k + l) * t1 + r) * factor;
    let d_l = t2 + ((k + l) * t2 + r) * factor;
    Ok((d_k, d_l))
}

/// Lower bound on the branch level implied by the implicit-function
/// condition, r* > sqrt(1 - (1 + sqrt(1 + 4K)) / (2K)), for K >= 2.
pub fn r_star_lower_bound(k: f64) -> Result<f64> {
    if !k.is_finite() || k < 2.0 {
        return Err(Error::Domain(format!("bound needs K >= 2, got {k}")));
    }
    let radicand = 1.0 - (1.0 + (1.0 + 4.0 * k).sqrt()) / (2.0 * k);
    Ok(radicand.max(0.0).sqrt())
}

/// Largest K below which the depth-2 ratio upper bound certifies the
/// [`r_star_lower_bound`] inequality: the root of
/// phi(K) = vbar_2(f(K) r-) - r- on (2, infinity), where vbar_2 is the
/// depth-2 upper bound on V and r- the lower bound. phi < 0 certifies.
pub fn bound_certificate_root() -> Result<f64> {
    let two = BoundLevel::new(2)?;
    let phi = |k: f64| -> f64 {
        let rm = r_star_lower_bound(k).unwrap();
        let x = f_of_k_r(k, rm) * rm;
        v_upper_bound(x, two).unwrap() - rm
    };
    let (lo, hi) = (2.05, 64.0);
    if !(phi(lo) < 0.0 && phi(hi) > 0.0) {
        return Err(Error::Convergence(format!(
            "certificate bracket [{lo}, {hi}] lost its sign change"
        )));
    }
    Ok(bisect(lo, hi, phi, 200))
}

/// Region label by solution count: unsynchronized only, symmetric
/// synchronized, or additionally non-symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseRegion {
    U,
    S,
    NS,
}

impl PhaseRegion {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseRegion::U => "U",
            PhaseRegion::S => "S",
            PhaseRegion::NS => "NS",
        }
    }
}

impl std::fmt::Display for PhaseRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classify (K, L, psi) by which solution kinds exist there.
pub fn classify_region(k: f64, l: f64, psi: Psi) -> Result<PhaseRegion> {
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::Domain(format!("K must be finite and > 0, got {k}")));
    }
    if !l.is_finite() {
        return Err(Error::Domain(format!("L must be finite, got {l}")));
    }
    let lp = l * psi.cos();
    classify_effective(k, lp, None)
}

/// Classifier on the effective coupling; `k_star_hint` skips the root solve
/// when the caller already knows K*(lp).
fn classify_effective(k: f64, lp: f64, k_star_hint: Option<f64>) -> Result<PhaseRegion> {
    if k + lp <= 2.0 {
        return Ok(PhaseRegion::U);
    }
    if lp < 0.0 {
        let k_star = match k_star_hint {
            Some(v) => v,
            None => k_star_of_l(lp)?.k_star,
        };
        if k > k_star {
            return Ok(PhaseRegion::NS);
        }
    }
    Ok(PhaseRegion::S)
}

/// One cell of a phase-diagram scan. `r_sym` is the positive symmetric
/// level when it exists; `r_star` is filled only in the NS region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCell {
    pub k: f64,
    pub l: f64,
    pub region: PhaseRegion,
    pub r_sym: Option<f64>,
    pub r_star: Option<f64>,
}

/// Classify an inclusive resolution x resolution grid over the given K and
/// L ranges. Rows are sorted by (K, L). L-rows share one K*(L) solve and
/// run concurrently.
pub fn scan_phase_diagram(
    k_range: (f64, f64),
    l_range: (f64, f64),
    resolution: usize,
    psi: Psi,
) -> Result<Vec<PhaseCell>> {
    let (k_min, k_max) = k_range;
    let (l_min, l_max) = l_range;
    if !(1..=2048).contains(&resolution) {
        return Err(Error::Domain(format!(
            "resolution {resolution} outside [1, 2048]"
        )));
    }
    if !(k_min.is_finite() && k_max.is_finite() && k_min > 0.0 && k_max >= k_min) {
        return Err(Error::Domain(format!(
            "K range ({k_min}, {k_max}) must be finite, positive, ordered"
        )));
    }
    if !(l_min.is_finite() && l_max.is_finite() && l_max >= l_min) {
        return Err(Error::Domain(format!(
            "L range ({l_min}, {l_max}) must be finite and ordered"
        )));
    }
    let grid = |lo: f64, hi: f64, i: usize| {
        if resolution == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (resolution - 1) as f64
        }
    };
    let mut rows: Vec<Vec<PhaseCell>> = (0..resolution)
        .into_par_iter()
        .map(|j| -> Result<Vec<PhaseCell>> {
            let l = grid(l_min, l_max, j);
            let lp = l * psi.cos();
            let k_star = if lp < 0.0 {
                Some(k_star_of_l(lp)?.k_star)
            } else {
                None
            };
            let mut row = Vec::with_capacity(resolution);
            for i in 0..resolution {
                let k = grid(k_min, k_max, i);
                let region = classify_effective(k, lp, k_star)?;
                let r_sym = symmetric_r_total(k + lp);
                let r_st = if region == PhaseRegion::NS {
                    r_star(k, lp).ok()
                } else {
                    None
                };
                row.push(PhaseCell {
                    k,
                    l,
                    region,
                    r_sym,
                    r_star: r_st,
                });
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a[0].l.partial_cmp(&b[0].l).unwrap());
    let mut cells: Vec<PhaseCell> = rows.into_iter().flatten().collect();
    cells.sort_by(|a, b| (a.k, a.l).partial_cmp(&(b.k, b.l)).unwrap());
    Ok(cells)
}

/// Trace the branch locus over K in [k_min, k_max], spaced geometrically in
/// K - 2 so that the steep region near the corner is resolved.
pub fn trace_line(k_min: f64, k_max: f64, n: usize) -> Result<Vec<BifurcationPoint>> {
    if !(k_min > 2.0 && k_max > k_min) {
        return Err(Error::Domain(format!(
            "trace range needs 2 < k_min < k_max, got ({k_min}, {k_max})"
        )));
    }
    if !(2..=100_000).contains(&n) {
        return Err(Error::Domain(format!("trace size {n} outside [2, 100000]")));
    }
    let ratio = (k_max - 2.0) / (k_min - 2.0);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let k = 2.0 + (k_min - 2.0) * ratio.powf(t);
            l_star_of_k(k)
        })
        .collect()
}

/// CSV serialization of a traced locus, with closed-form derivatives.
pub fn trace_to_csv(points: &[BifurcationPoint]) -> Result<String> {
    let mut out = String::from("k,l,r_star,dr_dk,dl_dk\n");
    for p in points {
        let dr = dr_star_dk(p.k_star, p.r_star)?;
        let dl = dl_star_dk(p.k_star, p.l)?;
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(p.k_star),
            fmt_f64(p.l),
            fmt_f64(p.r_star),
            fmt_f64(dr),
            fmt_f64(dl),
        ));
    }
    Ok(out)
}

/// CSV serialization of a phase-diagram scan. Optional columns are left
/// empty where absent.
pub fn phase_diagram_to_csv(cells: &[PhaseCell]) -> String {
    let mut out = String::from("k,l,region,r_sym,r_star\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(c.k),
            fmt_f64(c.l),
            c.region.as_str(),
            c.r_sym.map(fmt_f64).unwrap_or_default(),
            c.r_star.map(fmt_f64).unwrap_or_default(),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_star_closed_form_examples() {
        let r = r_star(5.0, -1.0).unwrap();
        assert!((r - (7.0f64 / 12.0).sqrt()).abs() <= 1e-15);
        assert!((r - 0.763763).abs() <= 1e-6);
        let boundary = r_star(4.0, -(8.0f64).sqrt()).unwrap();
        assert!(boundary.abs() <= 1e-7);
        let err = r_star(3.0, -2.8).unwrap_err().to_string();
        assert!(err.contains("radicand negative"), "{err}");
        let err = r_star(1.0, 3.0).unwrap_err().to_string();
        assert!(err.contains("must be positive"), "{err}");
    }

    #[test]
    fn branch_point_for_l_minus_two() {
        let p = k_star_of_l(-2.0).unwrap();
        assert!((p.k_star - 4.9953).abs() <= 1e-3, "K* = {}", p.k_star);
        assert!(p.selfcon_defect() <= 1e-10);
        assert!(p.radical_defect() <= 1e-10);
        assert!(p.k_star + p.l > 2.0);
        assert!(k_star_of_l(0.0).is_err());
        assert!(k_star_of_l(0.5).is_err());
    }

    #[test]
    fn branch_point_for_fixed_k() {
        let p = l_star_of_k(4.9953).unwrap();
        assert!((p.l - -2.0).abs() <= 2e-3, "L* = {}", p.l);
        assert!(p.selfcon_defect() <= 1e-10);

        let near = l_star_of_k(2.01).unwrap();
        assert!((near.l - -0.005).abs() <= 2e-3, "L*(2.01) = {}", near.l);

        let l6 = l_star_of_k(6.0).unwrap().l;
        let l5 = l_star_of_k(5.0).unwrap().l;
        let l4 = l_star_of_k(4.0).unwrap().l;
        assert!(l6 < l5 && l5 < l4);

        assert!(l_star_of_k(2.0).is_err());
        assert!(l_star_of_k(1.9).is_err());
    }

    #[test]
    fn prescribed_level_inversion() {
        let p = k_star_of_l(-2.0).unwrap();
        let (k, l) = k_star_of_r(p.r_star).unwrap();
        assert!((k - p.k_star).abs() <= 1e-6, "K {k} vs {}", p.k_star);
        assert!((l - p.l).abs() <= 1e-6, "L {l} vs {}", p.l);
        let resid = (v_raw((k + l) * p.r_star) - p.r_star).abs();
        assert!(resid <= 1e-10);

        let (k_small, _) = k_star_of_r(0.01).unwrap();
        assert!((k_small - 2.0).abs() <= 1e-3);

        let (k_big, _) = k_star_of_r(0.9).unwrap();
        let r2 = 0.81f64;
        assert!(k_big < (2.0 - r2) / ((1.0 - r2) * (1.0 - r2)));
        assert!(k_big > 2.0 / (1.0 - r2));

        assert!(k_star_of_r(0.0).is_err());
        assert!(k_star_of_r(1.0).is_err());
        assert!(k_star_of_r(-0.5).is_err());
    }

    #[test]
    fn asymptotic_forms() {
        let near = r_star_asymptotic(2.02, AsymptoticRegime::NearTwo).unwrap();
        assert!((near - 0.1).abs() <= 1e-12);
        let large = r_star_asymptotic(1e4, AsymptoticRegime::LargeK).unwrap();
        assert!((large - 0.995).abs() <= 1e-14);
        assert!(r_star_asymptotic(5.0, AsymptoticRegime::NearTwo).is_err());
        assert!(r_star_asymptotic(5.0, AsymptoticRegime::LargeK).is_err());

        let exact = l_star_of_k(2.01).unwrap().r_star;
        let asym = r_star_asymptotic(2.01, AsymptoticRegime::NearTwo).unwrap();
        assert!((asym / exact - 1.0).abs() <= 0.02, "{asym} vs {exact}");
    }

    #[test]
    fn level_derivative_positive_and_matches_difference() {
        for i in 0..20 {
            let k = 2.05 + 47.95 * i as f64 / 19.0;
            let p = l_star_of_k(k).unwrap();
            assert!(dr_star_dk(p.k_star, p.r_star).unwrap() > 0.0, "K = {k}");
        }

        let p = k_star_of_l(-2.0).unwrap();
        let d = dr_star_dk(p.k_star, p.r_star).unwrap();
        let h = 1e-4;
        let rp = l_star_of_k(p.k_star + h).unwrap().r_star;
        let rm = l_star_of_k(p.k_star - h).unwrap().r_star;
        let fd = (rp - rm) / (2.0 * h);
        assert!((d - fd).abs() <= 1e-5, "closed {d} vs fd {fd}");

        let steep = l_star_of_k(2.01).unwrap();
        let d_steep = dr_star_dk(steep.k_star, steep.r_star).unwrap();
        let slope_asym = 1.0 / (2.0 * (2.0 * (steep.k_star - 2.0)).sqrt());
        assert!((d_steep / slope_asym - 1.0).abs() <= 0.2, "{d_steep} vs {slope_asym}");

        assert!(dr_star_dk(5.0, 0.3).is_err()); // off locus
    }

    #[test]
    fn coupling_derivative_limits_and_difference() {
        let far = l_star_of_k(1000.0).unwrap();
        let d_far = dl_star_dk(far.k_star, far.l).unwrap();
        // approach to the -1 limit is ~1/(2 sqrt(K)): 0.0158 at K = 1000
        assert!((-1.02..=-0.98).contains(&d_far), "{d_far}");

        let near = l_star_of_k(2.001).unwrap();
        let d_near = dl_star_dk(near.k_star, near.l).unwrap();
        assert!((-0.52..=-0.48).contains(&d_near), "{d_near}");

        let p = l_star_of_k(10.0).unwrap();
        let d = dl_star_dk(p.k_star, p.l).unwrap();
        let h = 1e-4;
        let lp = l_star_of_k(10.0 + h).unwrap().l;
        let lm = l_star_of_k(10.0 - h).unwrap().l;
        let fd = (lp - lm) / (2.0 * h);
        assert!((d - fd).abs() <= 1e-5, "closed {d} vs fd {fd}");

        assert!(dl_star_dk(5.0, -0.3).is_err()); // off locus
    }

    #[test]
    fn implicit_partials_agree_with_rational_form() {
        for k in [4.9953, 10.0, 500.0] {
            let p = l_star_of_k(k).unwrap();
            let (dk, dl) = g_partials(p.k_star, p.l).unwrap();
            let ratio = -dk / dl;
            let rational = dl_star_dk(p.k_star, p.l).unwrap();
            assert!((ratio - rational).abs() <= 1e-6, "K={k}: {ratio} vs {rational}");
        }
        let far = l_star_of_k(500.0).unwrap();
        let (dk, dl) = g_partials(far.k_star, far.l).unwrap();
        assert!((-dk / dl - -1.0).abs() <= 0.03);
        let near = l_star_of_k(2.001).unwrap();
        let (dk, dl) = g_partials(near.k_star, near.l).unwrap();
        assert!((-dk / dl - -0.5).abs() <= 0.02);
    }

    #[test]
    fn level_bounds_hold_on_locus() {
        for k in [2.1, 3.0, 4.9953, 10.0, 100.0] {
            let p = l_star_of_k(k).unwrap();
            let r2 = p.r_star * p.r_star;
            let u = 1.0 - r2;
            assert!(2.0 / u < p.k_star, "lower bound at K={k}");
            assert!(p.k_star < (2.0 - r2) / (u * u), "upper bound at K={k}");
            let lower = r_star_lower_bound(k).unwrap();
            assert!(p.r_star > lower, "r* bound at K={k}: {} vs {lower}", p.r_star);
        }
    }

    #[test]
    fn certificate_root_location() {
        let root = bound_certificate_root().unwrap();
        assert!((root - 15.8684).abs() <= 0.01, "root = {root}");
    }

    #[test]
    fn region_classification_examples() {
        assert_eq!(classify_region(1.0, 0.5, Psi::Zero).unwrap(), PhaseRegion::U);
        assert_eq!(classify_region(5.0, 2.0, Psi::Zero).unwrap(), PhaseRegion::S);
        assert_eq!(classify_region(7.0, -2.0, Psi::Zero).unwrap(), PhaseRegion::NS);
        assert_eq!(classify_region(5.0, -2.0, Psi::Zero).unwrap(), PhaseRegion::NS);
        assert_eq!(classify_region(4.5, -2.0, Psi::Zero).unwrap(), PhaseRegion::S);
        assert_eq!(classify_region(7.0, 2.0, Psi::Pi).unwrap(), PhaseRegion::NS);
        assert!(classify_region(0.0, 1.0, Psi::Zero).is_err());
    }

    #[test]
    fn scan_grid_is_consistent_and_mirrors() {
        let cells = scan_phase_diagram((0.5, 8.0), (-4.0, 4.0), 21, Psi::Zero).unwrap();
        assert_eq!(cells.len(), 21 * 21);
        for c in cells.iter().step_by(17) {
            assert_eq!(c.region, classify_region(c.k, c.l, Psi::Zero).unwrap());
            if c.region == PhaseRegion::U {
                assert!(c.k + c.l <= 2.0 && c.r_sym.is_none());
            } else {
                assert!(c.r_sym.is_some());
            }
            if c.region == PhaseRegion::NS {
                assert!(c.r_star.is_some() && c.l < 0.0);
            }
        }
        // one cell just below / above the critical diagonal
        let below = cells.iter().find(|c| c.k == 2.0 && c.l < 0.0 && c.k + c.l <= 2.0);
        assert!(below.map(|c| c.region) == Some(PhaseRegion::U) || below.is_none());

        // the psi = pi classification is the psi = 0 one with L negated
        for c in &cells {
            assert_eq!(
                c.region,
                classify_region(c.k, -c.l, Psi::Pi).unwrap(),
                "at ({}, {})",
                c.k,
                c.l
            );
        }
        let mirrored = scan_phase_diagram((0.5, 8.0), (-4.0, 4.0), 21, Psi::Pi).unwrap();
        for c in mirrored.iter().step_by(13) {
            assert_eq!(c.region, classify_region(c.k, c.l, Psi::Pi).unwrap());
        }
    }

    #[test]
    fn trace_spacing_and_defects() {
        let pts = trace_line(2.001, 100.0, 60).unwrap();
        assert_eq!(pts.len(), 60);
        assert!(pts[0].k_star == 2.001 + 0.0 && (pts[59].k_star - 100.0).abs() <= 1e-9);
        for p in &pts {
            assert!(p.selfcon_defect() <= 1e-10);
            assert!(p.radical_defect() <= 1e-10);
            assert!(p.l < 0.0 && p.k_star + p.l > 2.0);
        }
        // geometric spacing puts the early points very close to 2
        assert!(pts[1].k_star - 2.0 < 0.002);
        let csv = trace_to_csv(&pts).unwrap();
        assert!(csv.starts_with("k,l,r_star,dr_dk,dl_dk\n"));
        assert_eq!(csv.lines().count(), 61);
    }
}
