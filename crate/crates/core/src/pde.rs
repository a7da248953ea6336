//! Fourier-spectral integration of the mean-field density equations: one
//! coefficient stack per (community, frequency node), coupled only through
//! the order parameters. Mode k obeys
//!
//! ```text
//! dc_k/dt = -(D/2) k^2 c_k - i k omega c_k + (k/2)(conj(G) c_{k-1} - G c_{k+1})
//! ```
//!
//! with G_1 = alpha1 K1 Z1 + alpha2 L1 Z2 (community 2 swaps indices) and
//! Z_m = 2 pi sum_nodes w conj(c_1). Only k = 0..=M is stored; negative
//! modes are conjugates by construction and c_0 stays pinned at 1/(2 pi),
//! so the mass and realness invariants hold exactly. The stepper applies
//! the diffusion factor exactly and the remaining terms explicitly; its
//! fixed points satisfy the stationary equation with no time-step bias.

use crate::disorder::{Community, DisorderSpec, MeanFieldState, StationaryDensity};
use crate::error::{Error, Result};
use crate::io_util::fmt_f64;
use crate::sde::CouplingConfig;
use crate::selfcons::SymmetricCoupling;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

const MIN_MODES: usize = 32;
const MAX_MODES: usize = 512;
const INV_TAU: f64 = 1.0 / TAU;

/// Spectral density field for both communities over the disorder nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    m: usize,
    t: f64,
    nodes: Vec<(f64, f64)>,
    /// coeffs[community][node][k], k = 0..=m
    coeffs: [Vec<Vec<Complex64>>; 2],
}

fn check_modes(m: usize) -> Result<()> {
    if !(MIN_MODES..=MAX_MODES).contains(&m) {
        return Err(Error::Domain(format!(
            "mode truncation {m} outside [{MIN_MODES}, {MAX_MODES}]"
        )));
    }
    Ok(())
}

/// I_k(x)/I_0(x) for k = 0..=m by backward recurrence on the ratio
/// I_k/I_{k-1}, started well above m where the ratio is negligible.
fn bessel_ratio_ladder(x: f64, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m + 1];
    out[0] = 1.0;
    if x <= 0.0 {
        return out;
    }
    let start = m + 40 + x.ceil() as usize;
    let mut rho = 0.0;
    let mut step = vec![0.0; m + 1];
    for k in (1..=start).rev() {
        rho = 1.0 / (2.0 * k as f64 / x + rho);
        if k <= m {
            step[k] = rho;
        }
    }
    for k in 1..=m {
        out[k] = out[k - 1] * step[k];
    }
    out
}

impl DensityField {
    /// Both communities uniform on the circle at every node.
    pub fn uniform(m: usize, mu: &DisorderSpec) -> Result<Self> {
        check_modes(m)?;
        let nodes = mu.nodes().to_vec();
        let stack = |n: usize| -> Vec<Vec<Complex64>> {
            (0..n)
                .map(|_| {
                    let mut c = vec![Complex64::new(0.0, 0.0); m + 1];
                    c[0] = Complex64::new(INV_TAU, 0.0);
                    c
                })
                .collect()
        };
        let coeffs = [stack(nodes.len()), stack(nodes.len())];
        Ok(DensityField {
            m,
            t: 0.0,
            nodes,
            coeffs,
        })
    }

    /// Uniform state with a first-harmonic bump of the given amplitude on
    /// both communities; the amplitude is exactly the initial r.
    pub fn perturb_first_harmonic(m: usize, mu: &DisorderSpec, amplitude: f64) -> Result<Self> {
        if !amplitude.is_finite() || !(0.0..=0.5).contains(&amplitude) {
            return Err(Error::Domain(format!(
                "perturbation amplitude {amplitude} outside [0, 0.5]"
            )));
        }
        let mut f = Self::uniform(m, mu)?;
        let c1 = Complex64::new(amplitude * INV_TAU, 0.0);
        for community in 0..2 {
            for stack in &mut f.coeffs[community] {
                stack[1] = c1;
            }
        }
        Ok(f)
    }

    /// Both communities start as the von Mises law with the given mean and
    /// concentration: c_k = e^{-ik mean} I_k(kappa) / (2 pi I_0(kappa)).
    pub fn von_mises(m: usize, mu: &DisorderSpec, mean: f64, kappa: f64) -> Result<Self> {
        if !mean.is_finite() || !kappa.is_finite() || kappa < 0.0 || kappa > 1e4 {
            return Err(Error::Domain(format!(
                "von Mises field (mean {mean}, kappa {kappa}) invalid"
            )));
        }
        let mut f = Self::uniform(m, mu)?;
        let ratios = bessel_ratio_ladder(kappa, m);
        for community in 0..2 {
            for stack in &mut f.coeffs[community] {
                for k in 1..=m {
                    let phase = Complex64::from_polar(1.0, -(k as f64) * mean);
                    stack[k] = ratios[k] * INV_TAU * phase;
                }
            }
        }
        Ok(f)
    }

    /// Projection of the exact stationary densities at a mean-field state:
    /// each (community, node) stack is the discrete Fourier transform of
    /// the tabulated density.
    pub fn from_stationary(
        m: usize,
        mu: &DisorderSpec,
        state: &MeanFieldState,
        c: &SymmetricCoupling,
    ) -> Result<Self> {
        let mut f = Self::uniform(m, mu)?;
        for (ci, community) in [(0, Community::One), (1, Community::Two)] {
            for (ni, &(omega, _)) in f.nodes.iter().enumerate() {
                let density = StationaryDensity::build(community, state, c, omega)?;
                let grid = density.grid();
                let n = grid.len() as f64;
                for k in 1..=m {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &(theta, p) in &grid {
                        acc += p * Complex64::from_polar(1.0, -(k as f64) * theta);
                    }
                    f.coeffs[ci][ni][k] = acc / n;
                }
            }
        }
        Ok(f)
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// Coefficient c_k for any k in [-m, m]; negative orders return the
    /// stored conjugate.
    pub fn coeff(&self, community: usize, node: usize, k: i64) -> Result<Complex64> {
        if community >= 2 || node >= self.nodes.len() || k.unsigned_abs() as usize > self.m {
            return Err(Error::Domain(format!(
                "coefficient index (community {community}, node {node}, k {k}) out of range"
            )));
        }
        let c = self.coeffs[community][node][k.unsigned_abs() as usize];
        Ok(if k < 0 { c.conj() } else { c })
    }

    /// Overwrite one mode, 1 <= k <= m; the pinned c_0 is not assignable.
    pub fn set_mode(&mut self, community: usize, node: usize, k: usize, value: Complex64) -> Result<()> {
        if community >= 2 || node >= self.nodes.len() || k == 0 || k > self.m {
            return Err(Error::Domain(format!(
                "mode index (community {community}, node {node}, k {k}) not assignable"
            )));
        }
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Domain("non-finite mode value".into()));
        }
        self.coeffs[community][node][k] = value;
        Ok(())
    }

    /// Mean phasor Z_m = 2 pi sum_nodes w conj(c_1), fixed node order.
    fn mean_phasor(&self, community: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (ni, &(_, w)) in self.nodes.iter().enumerate() {
            acc += w * self.coeffs[community][ni][1].conj();
        }
        TAU * acc
    }

    /// Reconstructed density at one (community, node, angle).
    pub fn density_at(&self, community: usize, node: usize, theta: f64) -> Result<f64> {
        if community >= 2 || node >= self.nodes.len() {
            return Err(Error::Domain(format!(
                "density index (community {community}, node {node}) out of range"
            )));
        }
        let stack = &self.coeffs[community][node];
        let rot = Complex64::from_polar(1.0, theta);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut p = stack[0].re;
        for k in 1..=self.m {
            phase *= rot;
            p += 2.0 * (stack[k] * phase).re;
        }
        Ok(p)
    }

    /// Minimum reconstructed density over all stacks on an n-point grid;
    /// values below -1e-8 indicate under-resolution.
    pub fn min_density(&self, n_grid: usize) -> Result<f64> {
        if !(8..=16384).contains(&n_grid) {
            return Err(Error::Domain(format!("n_grid = {n_grid} outside [8, 16384]")));
        }
        let mut min = f64::INFINITY;
        for community in 0..2 {
            for node in 0..self.nodes.len() {
                for i in 0..n_grid {
                    let theta = TAU * i as f64 / n_grid as f64;
                    min = min.min(self.density_at(community, node, theta)?);
                }
            }
        }
        Ok(min)
    }

    /// CSV snapshot: t, community, omega, theta, p.
    pub fn snapshot_csv(&self, n_theta: usize) -> Result<String> {
        if !(8..=8192).contains(&n_theta) {
            return Err(Error::Domain(format!("n_theta = {n_theta} outside [8, 8192]")));
        }
        let mut out = String::from("t,community,omega,theta,p\n");
        for community in 0..2 {
            for (node, &(omega, _)) in self.nodes.iter().enumerate() {
                for i in 0..n_theta {
                    let theta = TAU * i as f64 / n_theta as f64;
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        fmt_f64(self.t),
                        community + 1,
                        fmt_f64(omega),
                        fmt_f64(theta),
                        fmt_f64(self.density_at(community, node, theta)?)
                    ));
                }
            }
        }
        Ok(out)
    }

    /// JSON coefficient dump for restarts.
    pub fn to_json(&self) -> String {
        let dump = FieldDump::from(self);
        serde_json::to_string(&dump).expect("dump serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: FieldDump =
            serde_json::from_str(text).map_err(|e| Error::Domain(format!("restart parse: {e}")))?;
        dump.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct FieldDump {
    m: usize,
    t: f64,
    nodes: Vec<(f64, f64)>,
    coeffs: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<&DensityField> for FieldDump {
    fn from(f: &DensityField) -> FieldDump {
        FieldDump {
            m: f.m,
            t: f.t,
            nodes: f.nodes.clone(),
            coeffs: f
                .coeffs
                .iter()
                .map(|stacks| {
                    stacks
                        .iter()
                        .map(|stack| stack.iter().map(|c| [c.re, c.im]).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<FieldDump> for DensityField {
    type Error = Error;

    fn try_from(dump: FieldDump) -> Result<Self> {
        check_modes(dump.m)?;
        if !dump.t.is_finite() || dump.coeffs.len() != 2 || dump.nodes.is_empty() {
            return Err(Error::Domain("malformed field dump".into()));
        }
        let mut coeffs: [Vec<Vec<Complex64>>; 2] = [Vec::new(), Vec::new()];
        for (ci, stacks) in dump.coeffs.iter().enumerate() {
            if stacks.len() != dump.nodes.len() {
                return Err(Error::Domain("field dump node count mismatch".into()));
            }
            for stack in stacks {
                if stack.len() != dump.m + 1 {
                    return Err(Error::Domain("field dump mode count mismatch".into()));
                }
                let c: Vec<Complex64> = stack.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                    return Err(Error::Domain("field dump has non-finite coefficients".into()));
                }
                if (c[0] - Complex64::new(INV_TAU, 0.0)).norm() > 1e-14 {
                    return Err(Error::Domain("field dump violates unit mass".into()));
                }
                let mut c = c;
                c[0] = Complex64::new(INV_TAU, 0.0);
                coeffs[ci].push(c);
            }
        }
        Ok(DensityField {
            m: dump.m,
            t: dump.t,
            nodes: dump.nodes,
            coeffs,
        })
    }
}

/// Order parameters (r, psi) of one community, psi in [0, 2 pi).
pub fn order_params_of_field(f: &DensityField, community: usize) -> Result<(f64, f64)> {
    if community >= 2 {
        return Err(Error::Domain(format!("community index {community} out of range")));
    }
    let z = f.mean_phasor(community);
    Ok((z.norm(), z.arg().rem_euclid(TAU)))
}

fn mean_fields(f: &DensityField, cp: &CouplingConfig) -> (Complex64, Complex64) {
    let z1 = f.mean_phasor(0);
    let z2 = f.mean_phasor(1);
    (
        cp.alpha1 * cp.k1 * z1 + cp.alpha2 * cp.l1 * z2,
        cp.alpha2 * cp.k2 * z2 + cp.alpha1 * cp.l2 * z1,
    )
}

/// One explicit update of a single coefficient stack. `exps[k]` is the
/// exact diffusion factor e^{-D k^2 h / 2} and `phis[k]` its integrated
/// weight (1 - exps[k]) / lambda_k.
fn advance_stack(
    stack: &mut [Complex64],
    m: usize,
    omega: f64,
    g: Complex64,
    exps: &[f64],
    phis: &[f64],
) {
    let gbar = g.conj();
    let mut prev_old = stack[0];
    for k in 1..=m {
        let cur_old = stack[k];
        let next_old = if k < m { stack[k + 1] } else { Complex64::new(0.0, 0.0) };
        let kf = k as f64;
        let nonlinear = Complex64::new(0.0, -kf * omega) * cur_old
            + 0.5 * kf * (gbar * prev_old - g * next_old);
        stack[k] = exps[k] * cur_old + phis[k] * nonlinear;
        prev_old = cur_old;
    }
}

/// Advance the field to `t_end` with steps of at most `dt`. The coupling
/// is accepted in degenerate form (zero couplings) so linear decay cases
/// can be driven directly; sign restrictions are the caller's concern.
pub fn evolve(
    f: &DensityField,
    cp: &CouplingConfig,
    mu: &DisorderSpec,
    dt: f64,
    t_end: f64,
) -> Result<DensityField> {
    cp.validate(true)?;
    if f.nodes != mu.nodes() {
        return Err(Error::Domain(
            "field nodes do not match the disorder law".into(),
        ));
    }
    let m = f.m;
    let dt_cap = 0.5 / (cp.d * (m * m) as f64);
    if !dt.is_finite() || dt <= 0.0 || dt > dt_cap * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "dt = {dt} violates the stability bound {dt_cap:.3e} for {m} modes"
        )));
    }
    if !t_end.is_finite() || t_end < f.t {
        return Err(Error::Domain(format!(
            "t_end = {t_end} precedes the field time {}",
            f.t
        )));
    }

    let mut field = f.clone();
    let factors = |h: f64| -> (Vec<f64>, Vec<f64>) {
        let mut exps = vec![0.0; m + 1];
        let mut phis = vec![0.0; m + 1];
        for k in 1..=m {
            let lambda = 0.5 * cp.d * (k * k) as f64;
            exps[k] = (-lambda * h).exp();
            phis[k] = (1.0 - exps[k]) / lambda;
        }
        (exps, phis)
    };
    let (exps_full, phis_full) = factors(dt);

    let parallel = field.nodes.len() * 2 >= 8;
    let mut steps: u64 = 0;
    while field.t < t_end - 1e-12 {
        let h = dt.min(t_end - field.t);
        let full = (h - dt).abs() <= f64::EPSILON * dt;
        let (exps_last, phis_last);
        let (exps, phis): (&[f64], &[f64]) = if full {
            (&exps_full, &phis_full)
        } else {
            (exps_last, phis_last) = factors(h);
            (&exps_last, &phis_last)
        };
        let (g1, g2) = mean_fields(&field, cp);
        if !g1.re.is_finite() || !g1.im.is_finite() || !g2.re.is_finite() || !g2.im.is_finite() {
            return Err(Error::Convergence(format!(
                "non-finite coefficients at t = {}",
                field.t
            )));
        }
        let nodes = &field.nodes;
        let [stacks1, stacks2] = &mut field.coeffs;
        if parallel {
            stacks1
                .par_iter_mut()
                .zip(nodes.par_iter())
                .for_each(|(stack, &(omega, _))| advance_stack(stack, m, omega, g1, exps, phis));
            stacks2
                .par_iter_mut()
                .zip(nodes.par_iter())
                .for_each(|(stack, &(omega, _))| advance_stack(stack, m, omega, g2, exps, phis));
        } else {
            for (stack, &(omega, _)) in stacks1.iter_mut().zip(nodes.iter()) {
                advance_stack(stack, m, omega, g1, exps, phis);
            }
            for (stack, &(omega, _)) in stacks2.iter_mut().zip(nodes.iter()) {
                advance_stack(stack, m, omega, g2, exps, phis);
            }
        }
        field.t += h;
        steps += 1;
        if steps % 4096 == 0 || field.t >= t_end - 1e-12 {
            let finite = field
                .coeffs
                .iter()
                .flatten()
                .flatten()
                .all(|c| c.re.is_finite() && c.im.is_finite());
            if !finite {
                return Err(Error::Convergence(format!(
                    "non-finite coefficients at t = {}",
                    field.t
                )));
            }
        }
    }
    field.t = t_end;
    Ok(field)
}

/// Maximum stationary-equation defect over all modes and nodes:
/// |-(D/2) k^2 c_k - i k omega c_k + (k/2)(conj(G) c_{k-1} - G c_{k+1})|.
pub fn stationary_residual(f: &DensityField, cp: &CouplingConfig, mu: &DisorderSpec) -> Result<f64> {
    cp.validate(true)?;
    if f.nodes != mu.nodes() {
        return Err(Error::Domain(
            "field nodes do not match the disorder law".into(),
        ));
    }
    let (g1, g2) = mean_fields(f, cp);
    let mut worst = 0.0f64;
    for (community, g) in [(0usize, g1), (1usize, g2)] {
        let gbar = g.conj();
        for (ni, &(omega, _)) in f.nodes.iter().enumerate() {
            let stack = &f.coeffs[community][ni];
            for k in 1..=f.m {
                let kf = k as f64;
                let next = if k < f.m { stack[k + 1] } else { Complex64::new(0.0, 0.0) };
                let rhs = Complex64::new(-0.5 * cp.d * kf * kf, -kf * omega) * stack[k]
                    + 0.5 * kf * (gbar * stack[k - 1] - g * next);
                worst = worst.max(rhs.norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::v_fn;
    use crate::disorder::{solve_symmetric_with_disorder, DisorderKind};
    use crate::selfcons::{symmetric_r_total, Psi};

    fn point_mass() -> DisorderSpec {
        DisorderSpec::new(DisorderKind::PointMassZero).unwrap()
    }

    fn bimodal(omega0: f64) -> DisorderSpec {
        DisorderSpec::new(DisorderKind::Bimodal { omega0 }).unwrap()
    }

    fn degenerate_coupling(k: f64, l: f64, d: f64) -> CouplingConfig {
        CouplingConfig {
            k1: k,
            k2: k,
            l1: l,
            l2: l,
            alpha1: 0.5,
            alpha2: 0.5,
            d,
        }
    }

    #[test]
    fn uniform_field_has_zero_order_parameter() {
        let f = DensityField::uniform(32, &point_mass()).unwrap();
        let (r, _) = order_params_of_field(&f, 0).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(f.coeff(0, 0, 0).unwrap().re, INV_TAU);
    }

    #[test]
    fn von_mises_field_reproduces_bessel_ratio() {
        for kappa in [0.5, 2.0, 7.0] {
            let f = DensityField::von_mises(64, &point_mass(), 1.2, kappa).unwrap();
            let (r, psi) = order_params_of_field(&f, 0).unwrap();
            let want = v_fn(kappa).unwrap();
            assert!((r - want).abs() <= 1e-10, "kappa={kappa}: {r} vs {want}");
            assert!((psi - 1.2).abs() <= 1e-10);
        }
    }

    #[test]
    fn opposite_harmonics_cancel() {
        let mu = bimodal(1.0);
        let mut f = DensityField::uniform(32, &mu).unwrap();
        let a = Complex64::new(0.03, 0.01);
        f.set_mode(0, 0, 1, a).unwrap();
        f.set_mode(0, 1, 1, -a).unwrap();
        let (r, _) = order_params_of_field(&f, 0).unwrap();
        assert!(r <= 1e-15);
    }

    #[test]
    fn density_reconstruction_matches_von_mises() {
        let kappa = 3.0;
        let f = DensityField::von_mises(64, &point_mass(), 0.7, kappa).unwrap();
        let order0 = crate::bessel::BesselOrder::new(0).unwrap();
        let z = crate::bessel::bessel_i(order0, kappa).unwrap();
        for theta in [0.0f64, 0.7, 2.0, 5.5] {
            let want = ((kappa * (theta - 0.7).cos()).exp()) / (TAU * z);
            let got = f.density_at(0, 0, theta).unwrap();
            assert!((got - want).abs() <= 1e-10, "theta={theta}: {got} vs {want}");
        }
        assert!(f.min_density(256).unwrap() >= -1e-8);
    }

    #[test]
    fn pure_diffusion_decays_each_mode_exactly() {
        let f = DensityField::von_mises(32, &point_mass(), 0.0, 2.0).unwrap();
        let cp = degenerate_coupling(0.0, 0.0, 1.0);
        let t_end = 0.5;
        let dt = 0.5 / 1024.0;
        let g = evolve(&f, &cp, &point_mass(), dt, t_end).unwrap();
        for k in 1..=8i64 {
            let before = f.coeff(0, 0, k).unwrap();
            let after = g.coeff(0, 0, k).unwrap();
            let decay = (-0.5 * (k * k) as f64 * t_end).exp();
            let rel = (after - before * decay).norm() / (before.norm() * decay);
            assert!(rel <= 1e-12, "mode {k}: relative defect {rel}");
        }
    }

    #[test]
    fn subcritical_perturbation_decays_at_linear_rate() {
        // K + L = 1.8, linear rate (K + L - 2)/4 = -0.05
        let mu = point_mass();
        let f = DensityField::perturb_first_harmonic(32, &mu, 1e-2).unwrap();
        let cp = degenerate_coupling(1.3, 0.5, 1.0);
        let dt = 0.5 / 1024.0;
        let mid = evolve(&f, &cp, &mu, dt, 20.0).unwrap();
        let end = evolve(&mid, &cp, &mu, dt, 60.0).unwrap();
        let (r_mid, _) = order_params_of_field(&mid, 0).unwrap();
        let (r_end, _) = order_params_of_field(&end, 0).unwrap();
        assert!(r_end <= 1e-3, "r(60) = {r_end}");
        let rate = (r_end / r_mid).ln() / 40.0;
        assert!((rate - (-0.05)).abs() <= 0.005, "decay rate {rate}");
    }

    #[test]
    fn supercritical_evolution_reaches_selfcons_level() {
        let mu = point_mass();
        let f = DensityField::von_mises(64, &mu, 0.0, 3.0).unwrap();
        let cp = CouplingConfig::symmetric(5.0, 2.0, 1.0).unwrap();
        let dt = 0.5 / 4096.0;
        let g = evolve(&f, &cp, &mu, dt, 50.0).unwrap();
        let want = symmetric_r_total(7.0).unwrap();
        let (r1, psi1) = order_params_of_field(&g, 0).unwrap();
        let (r2, _) = order_params_of_field(&g, 1).unwrap();
        assert!((r1 - want).abs() <= 1e-4, "r1 = {r1} vs {want}");
        assert!((r2 - want).abs() <= 1e-4);
        assert!(psi1.min(TAU - psi1) <= 1e-6, "psi1 = {psi1}");
        assert!(stationary_residual(&g, &cp, &mu).unwrap() <= 1e-5);
        assert!(g.min_density(512).unwrap() >= -1e-8);
        assert_eq!(g.coeff(0, 0, 0).unwrap(), Complex64::new(INV_TAU, 0.0));
        let back = g.coeff(0, 0, -3).unwrap();
        assert_eq!(back, g.coeff(0, 0, 3).unwrap().conj());
    }

    #[test]
    fn doubling_modes_leaves_r_unchanged() {
        let mu = point_mass();
        let cp = CouplingConfig::symmetric(5.0, 2.0, 1.0).unwrap();
        let dt = 0.5 / (128.0 * 128.0);
        let r_at = |m: usize| {
            let f = DensityField::von_mises(m, &mu, 0.0, 3.0).unwrap();
            let g = evolve(&f, &cp, &mu, dt, 10.0).unwrap();
            order_params_of_field(&g, 0).unwrap().0
        };
        let r64 = r_at(64);
        let r128 = r_at(128);
        assert!((r64 - r128).abs() <= 1e-8, "{r64} vs {r128}");
    }

    #[test]
    fn incoherent_state_is_unstable_above_threshold() {
        let mu = point_mass();
        let f = DensityField::perturb_first_harmonic(32, &mu, 1e-3).unwrap();
        let cp = degenerate_coupling(1.6, 0.6, 1.0);
        let g = evolve(&f, &cp, &mu, 0.5 / 1024.0, 1.0).unwrap();
        let (r0, _) = order_params_of_field(&f, 0).unwrap();
        let (r1, _) = order_params_of_field(&g, 0).unwrap();
        assert!(r1 > r0 * 1.02, "r grew only from {r0} to {r1}");
    }

    #[test]
    fn stationary_projection_has_small_residual() {
        let r = symmetric_r_total(7.0).unwrap();
        let state = MeanFieldState {
            r1: r,
            r2: r,
            psi1: 0.0,
            psi2: 0.0,
        };
        let sc = SymmetricCoupling::new(5.0, 2.0, Psi::Zero).unwrap();
        let mu = point_mass();
        let f = DensityField::from_stationary(64, &mu, &state, &sc).unwrap();
        let cp = CouplingConfig::symmetric(5.0, 2.0, 1.0).unwrap();
        let resid = stationary_residual(&f, &cp, &mu).unwrap();
        assert!(resid <= 1e-6, "residual {resid}");

        // disordered variant
        let mu_b = bimodal(0.5);
        let sc_b = SymmetricCoupling::new(9.0, 2.0, Psi::Zero).unwrap();
        let rb = solve_symmetric_with_disorder(&sc_b, &mu_b).unwrap();
        assert!(rb > 0.0);
        let state_b = MeanFieldState {
            r1: rb,
            r2: rb,
            psi1: 0.0,
            psi2: 0.0,
        };
        let fb = DensityField::from_stationary(64, &mu_b, &state_b, &sc_b).unwrap();
        let cp_b = CouplingConfig::symmetric(9.0, 2.0, 1.0).unwrap();
        let resid_b = stationary_residual(&fb, &cp_b, &mu_b).unwrap();
        assert!(resid_b <= 1e-6, "disordered residual {resid_b}");
    }

    #[test]
    fn uniform_state_is_always_stationary() {
        let f = DensityField::uniform(32, &point_mass()).unwrap();
        let cp = CouplingConfig::symmetric(17.0, 3.0, 1.0).unwrap();
        assert!(stationary_residual(&f, &cp, &point_mass()).unwrap() <= 1e-12);
    }

    #[test]
    fn evolve_rejects_unstable_dt_and_node_mismatch() {
        let f = DensityField::uniform(64, &point_mass()).unwrap();
        let cp = CouplingConfig::symmetric(5.0, 2.0, 1.0).unwrap();
        let too_big = 1.0 / (64.0 * 64.0);
        assert!(evolve(&f, &cp, &point_mass(), too_big, 1.0).is_err());
        assert!(evolve(&f, &cp, &bimodal(1.0), 1e-4, 1.0).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mu = bimodal(0.7);
        let f = DensityField::von_mises(48, &mu, 0.3, 2.5).unwrap();
        let cp = CouplingConfig::symmetric(5.0, 2.0, 1.0).unwrap();
        let g = evolve(&f, &cp, &mu, 1e-4, 0.25).unwrap();
        let back = DensityField::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        assert!(DensityField::from_json("{\"m\": 4}").is_err());
    }

    #[test]
    fn snapshot_csv_shape() {
        let f = DensityField::uniform(32, &bimodal(1.0)).unwrap();
        let csv = f.snapshot_csv(16).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,community,omega,theta,p");
        assert_eq!(lines.len(), 1 + 2 * 2 * 16);
    }
}
