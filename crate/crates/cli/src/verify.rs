//! Named invariant suites behind `verify --suite <name>`: fast, deterministic
//! checks of the properties each module promises, printable as a table.

use kuramoto2c_core::selfcons::{
    find_all_solutions, selfcons_rhs, verify_ordering, FixedPointKind, OrderingCheck, Psi,
    SymmetricCoupling,
};
use kuramoto2c_core::{
    chi, concavity_certificate, critical_threshold, dl_star_dk, evolve, k_star_of_l,
    l_star_of_k, order_params, order_params_of_field, r_star_asymptotic, r_star_lower_bound,
    simulate, solve_symmetric_with_disorder, stationary_density, stationary_residual,
    symmetric_r_total, v_fn, v_prime, v_upper_bound, AsymptoticRegime, BoundLevel, Community,
    CouplingConfig, DensityField, DisorderKind, DisorderSpec, InitialSpec, MeanFieldState,
    SimulationConfig,
};
use std::f64::consts::PI;

pub const SUITE_NAMES: [&str; 7] = [
    "bessel",
    "selfcons",
    "bifurcation",
    "disorder",
    "pde",
    "sde",
    "all",
];

type Check = (&'static str, fn() -> Result<(), String>);

pub struct SuiteReport {
    pub suite: String,
    pub outcomes: Vec<(&'static str, Result<(), String>)>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.outcomes.iter().filter(|(_, r)| r.is_ok()).count()
    }

    pub fn failed(&self) -> usize {
        self.outcomes.len() - self.passed()
    }

    pub fn all_pass(&self) -> bool {
        self.failed() == 0
    }

    pub fn render(&self) -> String {
        let width = self
            .outcomes
            .iter()
            .map(|(name, _)| name.len())
            .max()
            .unwrap_or(0)
            .max("check".len());
        let mut out = format!("suite: {}\n{:width$}  status\n", self.suite, "check");
        for (name, result) in &self.outcomes {
            match result {
                Ok(()) => out.push_str(&format!("{name:width$}  pass\n")),
                Err(reason) => out.push_str(&format!("{name:width$}  FAIL  {reason}\n")),
            }
        }
        out.push_str(&format!(
            "result: {} passed, {} failed\n",
            self.passed(),
            self.failed()
        ));
        out
    }
}

/// Run one suite by name.
pub fn run_suite(name: &str) -> Result<SuiteReport, String> {
    let checks: Vec<Check> = match name {
        "bessel" => bessel_checks(),
        "selfcons" => selfcons_checks(),
        "bifurcation" => bifurcation_checks(),
        "disorder" => disorder_checks(),
        "pde" => pde_checks(),
        "sde" => sde_checks(),
        "all" => {
            let mut all = bessel_checks();
            all.extend(selfcons_checks());
            all.extend(bifurcation_checks());
            all.extend(disorder_checks());
            all.extend(pde_checks());
            all.extend(sde_checks());
            all
        }
        _ => {
            return Err(format!(
                "unknown suite {name:?}; available: {}",
                SUITE_NAMES.join(", ")
            ))
        }
    };
    let outcomes = checks.into_iter().map(|(n, f)| (n, f())).collect();
    Ok(SuiteReport {
        suite: name.to_string(),
        outcomes,
    })
}

fn err(msg: String) -> Result<(), String> {
    Err(msg)
}

/// 500 geometrically spaced arguments covering the series, crossover, and
/// asymptotic branches.
pub fn grid_500() -> Vec<f64> {
    (0..500)
        .map(|i| 1e-3 * (60.0f64 / 1e-3).powf(i as f64 / 499.0))
        .collect()
}

fn bessel_checks() -> Vec<Check> {
    vec![
        ("v-strictly-increasing", || {
            let g = grid_500();
            let mut prev = v_fn(0.0).map_err(|e| e.to_string())?;
            for &x in &g {
                let v = v_fn(x).map_err(|e| e.to_string())?;
                if v <= prev {
                    return err(format!("V not increasing at x = {x}"));
                }
                prev = v;
            }
            Ok(())
        }),
        ("v-odd-symmetry", || {
            for &x in &grid_500() {
                let plus = v_fn(x).map_err(|e| e.to_string())?;
                let minus = v_fn(-x).map_err(|e| e.to_string())?;
                if minus != -plus {
                    return err(format!("V(-x) != -V(x) at x = {x}"));
                }
            }
            Ok(())
        }),
        ("v-below-half-x", || {
            for &x in &grid_500() {
                let v = v_fn(x).map_err(|e| e.to_string())?;
                if !(v < 0.5 * x) {
                    return err(format!("V({x}) = {v} is not below x/2"));
                }
            }
            Ok(())
        }),
        ("v-prime-identity-vs-fd", || {
            for &x in &grid_500() {
                let h = 1e-6 * x.max(1.0);
                let fd = (v_fn(x + h).map_err(|e| e.to_string())?
                    - v_fn(x - h).map_err(|e| e.to_string())?)
                    / (2.0 * h);
                let an = v_prime(x).map_err(|e| e.to_string())?;
                if (an - fd).abs() > 1e-7 {
                    return err(format!("V'({x}): {an} vs fd {fd}"));
                }
            }
            Ok(())
        }),
        ("concavity-certificate-negative", || {
            for &x in &grid_500() {
                let c = concavity_certificate(x).map_err(|e| e.to_string())?;
                if !(c < 0.0) {
                    return err(format!("certificate at x = {x} is {c}, not negative"));
                }
            }
            Ok(())
        }),
        ("upper-bounds-nested", || {
            let b1 = BoundLevel::new(1).map_err(|e| e.to_string())?;
            let b2 = BoundLevel::new(2).map_err(|e| e.to_string())?;
            for &x in &grid_500() {
                let v = v_fn(x).map_err(|e| e.to_string())?;
                let u1 = v_upper_bound(x, b1).map_err(|e| e.to_string())?;
                let u2 = v_upper_bound(x, b2).map_err(|e| e.to_string())?;
                if !(v < u2 && u2 < u1) {
                    return err(format!("bound ordering fails at x = {x}: {v}, {u2}, {u1}"));
                }
            }
            Ok(())
        }),
    ]
}

fn selfcons_checks() -> Vec<Check> {
    vec![
        ("critical-line-grid", || {
            for psi in [Psi::Zero, Psi::Pi] {
                for i in 0..12 {
                    for j in 0..12 {
                        let k = 0.3 + 5.4 * i as f64 / 11.0;
                        let l = -2.6 + 5.2 * j as f64 / 11.0;
                        let total = k + l * psi.cos();
                        if (total - 2.0).abs() < 1e-6 || l == 0.0 {
                            continue;
                        }
                        let have = symmetric_r_total(total).is_some();
                        if have != (total > 2.0) {
                            return err(format!(
                                "positive symmetric solution mismatch at K = {k}, L = {l}"
                            ));
                        }
                    }
                }
            }
            Ok(())
        }),
        ("equilibrium-levels", || {
            // quoted reference levels are truncated expansions, so compare
            // as 3-decimal prefixes
            let aligned = symmetric_r_total(7.0).ok_or("no solution at total 7")?;
            if !(0.918..0.919).contains(&aligned) {
                return err(format!("aligned level {aligned} not 0.918..."));
            }
            let opposed = symmetric_r_total(3.0).ok_or("no solution at total 3")?;
            if !(0.724..0.725).contains(&opposed) {
                return err(format!("opposed level {opposed} not 0.724..."));
            }
            if (opposed - 0.724).abs() > 5e-4 {
                return err(format!("opposed level {opposed} drifted from 0.724"));
            }
            Ok(())
        }),
        ("ordering-at-branch-example", || {
            let c = SymmetricCoupling::new(5.5, -2.0, Psi::Zero).map_err(|e| e.to_string())?;
            let set = find_all_solutions(&c);
            if set.points.len() != 4 {
                return err(format!("expected 4 fixed points, got {}", set.points.len()));
            }
            if verify_ordering(&set) != OrderingCheck::Holds {
                return err("ordering r2 < r_sym < r1 violated".into());
            }
            Ok(())
        }),
        ("fixed-points-have-small-residuals", || {
            for (k, l) in [(5.0, 2.0), (5.5, -2.0), (3.0, -0.4)] {
                let c = SymmetricCoupling::new(k, l, Psi::Zero).map_err(|e| e.to_string())?;
                for p in find_all_solutions(&c).points {
                    let (f1, f2) = selfcons_rhs(p.r1, p.r2, &c).map_err(|e| e.to_string())?;
                    let res = (f1 - p.r1).abs().max((f2 - p.r2).abs());
                    if res > 1e-9 {
                        return err(format!(
                            "residual {res} at ({}, {}) for K = {k}, L = {l}",
                            p.r1, p.r2
                        ));
                    }
                }
            }
            Ok(())
        }),
        ("unsynchronized-point-always-present", || {
            for (k, l) in [(1.0, 0.5), (5.0, 2.0), (5.5, -2.0)] {
                let c = SymmetricCoupling::new(k, l, Psi::Zero).map_err(|e| e.to_string())?;
                let set = find_all_solutions(&c);
                let has_origin = set
                    .points
                    .iter()
                    .any(|p| p.kind == FixedPointKind::Unsynchronized);
                if !has_origin {
                    return err(format!("origin missing at K = {k}, L = {l}"));
                }
            }
            Ok(())
        }),
    ]
}

fn bifurcation_checks() -> Vec<Check> {
    vec![
        ("branch-point-example", || {
            let p = k_star_of_l(-2.0).map_err(|e| e.to_string())?;
            if (p.k_star - 4.9953).abs() > 1e-3 {
                return err(format!("K*(-2) = {} not near 4.9953", p.k_star));
            }
            Ok(())
        }),
        ("slope-limits", || {
            let far = l_star_of_k(1000.0).map_err(|e| e.to_string())?;
            let slope_far = dl_star_dk(1000.0, far.l).map_err(|e| e.to_string())?;
            if (slope_far + 1.0).abs() > 0.02 {
                return err(format!("dL*/dK at 1000 is {slope_far}, not near -1"));
            }
            let near = l_star_of_k(2.001).map_err(|e| e.to_string())?;
            let slope_near = dl_star_dk(2.001, near.l).map_err(|e| e.to_string())?;
            if (slope_near + 0.5).abs() > 0.02 {
                return err(format!("dL*/dK at 2.001 is {slope_near}, not near -0.5"));
            }
            Ok(())
        }),
        ("inverse-round-trip", || {
            for k in [2.2, 3.0, 5.0, 20.0, 80.0] {
                let l = l_star_of_k(k).map_err(|e| e.to_string())?.l;
                let back = k_star_of_l(l).map_err(|e| e.to_string())?.k_star;
                if (back - k).abs() > 1e-6 * k {
                    return err(format!("round trip K = {k} came back as {back}"));
                }
            }
            Ok(())
        }),
        ("asymptotic-forms", || {
            for (k, regime) in [
                (2.01, AsymptoticRegime::NearTwo),
                (1e4, AsymptoticRegime::LargeK),
            ] {
                let exact = l_star_of_k(k).map_err(|e| e.to_string())?.r_star;
                let approx = r_star_asymptotic(k, regime).map_err(|e| e.to_string())?;
                if (exact / approx - 1.0).abs() > 0.02 {
                    return err(format!("asymptotic ratio off at K = {k}: {exact} vs {approx}"));
                }
            }
            Ok(())
        }),
        ("branch-level-bounds", || {
            for k in [2.5, 4.0, 10.0, 100.0] {
                let p = l_star_of_k(k).map_err(|e| e.to_string())?;
                let lower = r_star_lower_bound(k).map_err(|e| e.to_string())?;
                if !(p.r_star > lower && p.r_star < 1.0) {
                    return err(format!("r*({k}) = {} outside ({lower}, 1)", p.r_star));
                }
            }
            Ok(())
        }),
    ]
}

fn disorder_checks() -> Vec<Check> {
    vec![
        ("thresholds-exact", || {
            let pm = DisorderSpec::new(DisorderKind::PointMassZero).map_err(|e| e.to_string())?;
            if critical_threshold(&pm) != 2.0 {
                return err(format!("point mass threshold is {}", critical_threshold(&pm)));
            }
            let bi =
                DisorderSpec::new(DisorderKind::Bimodal { omega0: 1.0 }).map_err(|e| e.to_string())?;
            if critical_threshold(&bi) != 10.0 {
                return err(format!("bimodal threshold is {}", critical_threshold(&bi)));
            }
            Ok(())
        }),
        ("transition-across-threshold", || {
            let kinds = [
                DisorderKind::PointMassZero,
                DisorderKind::Bimodal { omega0: 1.0 },
                DisorderKind::DiscretizedGaussian {
                    sigma: 0.5,
                    n_nodes: 41,
                },
            ];
            for kind in kinds {
                let mu = DisorderSpec::new(kind).map_err(|e| e.to_string())?;
                let th = critical_threshold(&mu);
                let below = SymmetricCoupling::new(0.475 * th, 0.475 * th, Psi::Zero)
                    .map_err(|e| e.to_string())?;
                let above = SymmetricCoupling::new(0.6 * th, 0.6 * th, Psi::Zero)
                    .map_err(|e| e.to_string())?;
                let r_below = solve_symmetric_with_disorder(&below, &mu).map_err(|e| e.to_string())?;
                let r_above = solve_symmetric_with_disorder(&above, &mu).map_err(|e| e.to_string())?;
                if r_below != 0.0 {
                    return err(format!("{kind:?}: r = {r_below} below threshold"));
                }
                if !(r_above > 0.0) {
                    return err(format!("{kind:?}: r = {r_above} above threshold"));
                }
            }
            Ok(())
        }),
        ("reflection-symmetry", || {
            let c = SymmetricCoupling::new(6.0, 1.5, Psi::Zero).map_err(|e| e.to_string())?;
            let state = MeanFieldState {
                r1: 0.6,
                r2: 0.6,
                psi1: 0.0,
                psi2: 0.0,
            };
            for (theta, omega) in [(0.7, 0.8), (2.1, 0.3), (5.0, 1.2)] {
                let a = stationary_density(Community::One, theta, omega, &state, &c)
                    .map_err(|e| e.to_string())?;
                let b = stationary_density(Community::One, -theta, -omega, &state, &c)
                    .map_err(|e| e.to_string())?;
                if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
                    return err(format!("p(theta, omega) != p(-theta, -omega) at ({theta}, {omega})"));
                }
            }
            Ok(())
        }),
        ("susceptibility-matches-slope", || {
            let mu =
                DisorderSpec::new(DisorderKind::Bimodal { omega0: 1.0 }).map_err(|e| e.to_string())?;
            let c = SymmetricCoupling::new(1.5, 1.5, Psi::Zero).map_err(|e| e.to_string())?;
            let defect = kuramoto2c_core::linearization_check(&c, &mu).map_err(|e| e.to_string())?;
            if defect.abs() > 1e-6 {
                return err(format!("linearized slope defect {defect} vs total * chi = {}", 3.0 * chi(&mu)));
            }
            Ok(())
        }),
    ]
}

fn pde_checks() -> Vec<Check> {
    vec![
        ("von-mises-order-params", || {
            let mu = DisorderSpec::new(DisorderKind::PointMassZero).map_err(|e| e.to_string())?;
            let f = DensityField::von_mises(48, &mu, 0.9, 2.5).map_err(|e| e.to_string())?;
            let (r, psi) = order_params_of_field(&f, 0).map_err(|e| e.to_string())?;
            let want = v_fn(2.5).map_err(|e| e.to_string())?;
            if (r - want).abs() > 1e-10 || (psi - 0.9).abs() > 1e-10 {
                return err(format!("({r}, {psi}) vs ({want}, 0.9)"));
            }
            Ok(())
        }),
        ("uniform-state-is-stationary", || {
            let mu =
                DisorderSpec::new(DisorderKind::Bimodal { omega0: 0.5 }).map_err(|e| e.to_string())?;
            let f = DensityField::uniform(32, &mu).map_err(|e| e.to_string())?;
            let cp = CouplingConfig::symmetric(3.0, 1.0, 1.0).map_err(|e| e.to_string())?;
            let res = stationary_residual(&f, &cp, &mu).map_err(|e| e.to_string())?;
            if res > 1e-14 {
                return err(format!("uniform residual {res}"));
            }
            Ok(())
        }),
        ("free-diffusion-decay", || {
            let mu = DisorderSpec::new(DisorderKind::PointMassZero).map_err(|e| e.to_string())?;
            let f0 = DensityField::von_mises(32, &mu, 0.0, 1.0).map_err(|e| e.to_string())?;
            let cp = CouplingConfig {
                k1: 0.0,
                k2: 0.0,
                l1: 0.0,
                l2: 0.0,
                alpha1: 0.5,
                alpha2: 0.5,
                d: 1.0,
            };
            let t = 0.75;
            let f1 = evolve(&f0, &cp, &mu, 1e-4, t).map_err(|e| e.to_string())?;
            let a0 = f0.coeff(0, 0, 1).map_err(|e| e.to_string())?.norm();
            let a1 = f1.coeff(0, 0, 1).map_err(|e| e.to_string())?.norm();
            let expected = a0 * (-0.5 * t).exp();
            if (a1 - expected).abs() > 1e-10 * expected {
                return err(format!("first mode decayed to {a1}, expected {expected}"));
            }
            Ok(())
        }),
    ]
}

fn sde_checks() -> Vec<Check> {
    fn small_config(seed: u64) -> Result<SimulationConfig, String> {
        Ok(SimulationConfig {
            n1: 60,
            n2: 50,
            dt: 0.01,
            steps: 150,
            seed,
            initial: [
                InitialSpec::VonMises {
                    mean: 0.3,
                    concentration: 3.0,
                },
                InitialSpec::VonMises {
                    mean: 1.1,
                    concentration: 2.0,
                },
            ],
            coupling: CouplingConfig::new(4.0, 3.5, 1.2, -0.8, 0.55, 0.45, 1.0)
                .map_err(|e| e.to_string())?,
            disorder: DisorderSpec::new(DisorderKind::Bimodal { omega0: 0.4 })
                .map_err(|e| e.to_string())?,
            community_seeds: None,
            allow_degenerate: false,
        })
    }
    vec![
        ("order-params-on-known-angles", || {
            let aligned = vec![0.7; 9];
            let (r, psi) = order_params(&aligned).map_err(|e| e.to_string())?;
            if (r - 1.0).abs() > 1e-12 || (psi - 0.7).abs() > 1e-12 {
                return err(format!("aligned angles gave ({r}, {psi})"));
            }
            let opposed = vec![0.0, PI];
            let (r2, _) = order_params(&opposed).map_err(|e| e.to_string())?;
            if r2 > 1e-12 {
                return err(format!("opposed pair gave r = {r2}"));
            }
            Ok(())
        }),
        ("identical-seeds-identical-runs", || {
            let cfg = small_config(99)?;
            let a = simulate(&cfg).map_err(|e| e.to_string())?;
            let b = simulate(&cfg).map_err(|e| e.to_string())?;
            if a.rows != b.rows {
                return err("repeated run diverged".into());
            }
            Ok(())
        }),
        ("distinct-seeds-distinct-runs", || {
            let a = simulate(&small_config(7)?).map_err(|e| e.to_string())?;
            let b = simulate(&small_config(8)?).map_err(|e| e.to_string())?;
            if a.rows == b.rows {
                return err("different seeds produced identical traces".into());
            }
            Ok(())
        }),
    ]
}
