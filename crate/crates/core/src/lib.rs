//! Numerics for a two-community mean-field oscillator model with noise:
//! special functions, stationary self-consistency, bifurcation geometry,
//! frequency disorder, stochastic particle simulation, and a spectral
//! solver for the mean-field density.

pub mod bessel;
pub mod bifurcation;
pub mod disorder;
pub mod error;
pub mod io_util;
pub mod pde;
pub mod sde;
pub mod selfcons;

pub use bessel::{
    bessel_i, concavity_certificate, s_fn, v_fn, v_prime, v_upper_bound, w_fn, BesselOrder,
    BoundLevel,
};
pub use bifurcation::{
    bound_certificate_root, classify_region, dl_star_dk, dr_star_dk, g_partials, k_star_of_l,
    k_star_of_r, l_star_of_k, phase_diagram_to_csv, r_star, r_star_asymptotic,
    r_star_lower_bound, scan_phase_diagram, trace_line, trace_to_csv, AsymptoticRegime,
    BifurcationPoint, PhaseCell, PhaseRegion,
};
pub use disorder::{
    chi, critical_threshold, density_profile_csv, linearization_check, selfcons_functionals,
    solve_symmetric_with_disorder, stationary_density, Community, DisorderKind, DisorderSpec,
    MeanFieldState, StationaryDensity,
};
pub use error::{Error, Result};
pub use pde::{evolve, order_params_of_field, stationary_residual, DensityField};
pub use sde::{
    order_params, sample_initial, simulate, CouplingConfig, InitialSpec, SimulationConfig,
    Simulator, TimeSeries, TimeSeriesRow,
};
pub use selfcons::{
    find_all_solutions, jacobian, map_eigenvalues, selfcons_rhs, solution_set_to_csv,
    symmetric_r, symmetric_r_total, vector_field_grid, vector_field_to_csv, verify_ordering,
    FixedPoint, FixedPointKind, OrderingCheck, Psi, SolutionSet, SymmetricCoupling,
};
