//! Computational laboratory for Brownian last passage percolation and its
//! scaled line-ensemble limits: the exact grid LPP dynamic program and
//! f-rewarded polymer weights, Dyson Brownian motion and Brownian-Gibbs
//! resampling, the jump-ensemble construction with its observables and
//! costs, Brownian-meander calculus, near-maximiser statistics, and the
//! patchwork quilt — together with the deterministic sampling and
//! statistics utilities the experiment harness builds on.

pub mod bridge;
pub mod ensemble;
pub mod error;
pub mod extremum;
pub mod gauss;
pub mod grid;
pub mod jump;
pub mod lpp;
pub mod meander;
pub mod quad;
pub mod quilt;
pub mod stats;
pub mod stream;

pub use bridge::{
    bridge_decompose, decompose_at_max, prob_inf_below, prob_sup_exceeds, sample_bridge,
    sample_motion, MaxDecomposition,
};
pub use ensemble::{
    dyson_bm, gibbs_resample, parabolic_shift, regular_tail_check,
    sample_gue_top, scaled_ensemble, LineEnsemble, RegularityReport, ResampleStats, TailEntry,
    TailSide,
};
pub use error::{Error, Result};
pub use extremum::{
    analytic_lemma_checks, arcsin_cdf, arcsin_measure, geometric_sum_survival,
    meander_bound_quadrature, nt_event, num_nt, num_nz, nz_event, LemmaCheck, MeanderBound,
    NearTouchOutcome, NearTouchSpec,
};
pub use gauss::{gauss_sf, normal_cdf, normal_sf, phi, phi_tilde, GaussParams};
pub use grid::{Grid, GridFunction};
pub use jump::{
    big_d_k, candidate_conditions_hold, compute_lr, concave_majorant, conditional_gaussian_tail,
    conditional_jump_probability, corner_vector, fav_check, former_e_k, in_good_region,
    in_ordered_positive_cone, little_c_k, observables, pass_test, pole_set, reconstruct,
    sample_jump_candidate, sample_jump_candidate_exact1, synthetic_fav_ensemble,
    synthetic_mild_ensemble, tent_map, vault_slope_costs, vault_variance, FavFlags, JumpData,
    JumpParams, Observables, PiecewiseLinear, Side,
};
pub use lpp::{
    f_rewarded_weight, last_passage, parabola_l, parabola_q, polymer_argmax, scaled_weight,
    Environment, RewardFunction,
};
pub use meander::{
    meander_marginal_density, meander_transition_density, sample_meander, sample_meander_bessel,
    MeanderState,
};
pub use quad::{adaptive_simpson, cumulative_trapezoid, InverseCdfTable};
pub use quilt::{
    build_quilt, increment_moment_experiment, IncrementMomentReport, IncrementMomentRow, Quilt,
};
pub use stats::{
    kolmogorov_sf, ks_one_sample, ks_two_sample, linear_fit, mean_stderr, wilson_ci, TailEstimate,
};
pub use stream::{derive_stream, Stream};
