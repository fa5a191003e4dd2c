//! Jump-ensemble experiments: the structural invariant suite at the
//! favourable scale, the Pass-rate and (Y, Z)-density monitors, the cost
//! tables, and the exact combinatorial oracles for the corner criterion
//! and the pole set.

use super::fmt;
use crate::config::RunConfig;
use crate::manifest::{CriterionResult, ExperimentReport};
use crate::runner::try_parallel_map;
use quiltlab_core::{
    conditional_gaussian_tail, conditional_jump_probability, corner_vector, derive_stream,
    in_good_region, in_ordered_positive_cone, observables, pass_test, pole_set, reconstruct,
    sample_jump_candidate_exact1, synthetic_fav_ensemble, vault_slope_costs, vault_variance,
    Error, JumpData, JumpParams, Result, Side,
};
use rand::Rng;

/// Resolve the jump parameters shared by the jump experiments.
fn jump_params(cfg: &RunConfig) -> Result<JumpParams> {
    JumpParams::new(
        cfg.f64("epsilon"),
        cfg.usize("k"),
        cfg.f64("d"),
        cfg.f64("c"),
        cfg.f64("big_c"),
        cfg.f64("const"),
    )
}

/// Per-draw outcome of the structural suite.
struct StructuralOutcome {
    slopes_ok: bool,
    sep_ok: bool,
    count_ok: bool,
    lr_ok: bool,
    cond_ok: bool,
    recon_resid: f64,
    fav: bool,
    poles: usize,
    max_slope: f64,
}

/// Hard structural invariants of the jump construction, checked on
/// synthetic favourable-scale ensembles with exact candidate draws.
pub fn structure(cfg: &RunConfig) -> Result<ExperimentReport> {
    let params = jump_params(cfg)?;
    let steps = cfg.usize("steps");
    let draws = cfg.u64("draws");
    let t = params.t;
    let tol = 1e-9 * t.max(1.0);

    let outcomes = try_parallel_map(cfg, &cfg.experiment, draws, |_, stream| {
        let ens = synthetic_fav_ensemble(&params, steps, stream)?;
        let data = JumpData::build(&ens, params)?;

        let slopes = data.tent.slopes();
        let max_slope = slopes.iter().fold(0.0f64, |a, &s| a.max(s.abs()));
        let slopes_ok = max_slope <= 4.0 * t + tol;

        let sep_ok = data
            .poles
            .windows(2)
            .all(|w| w[1] - w[0] >= params.d_ip - 1e-9);
        let count_ok = data.poles.len() as f64 <= 2.0 * t / params.d_ip;
        let lr_ok = !data.fav.f2
            || (data.l_point <= -t / 2.0 + tol && data.r_point >= t / 2.0 - tol);

        // Exact conditional draw; verify the conditioning directly.
        let j = sample_jump_candidate_exact1(&ens, &data, stream)?;
        let lower = ens.curve_fn(params.k + 1);
        let mut cond_ok = true;
        for &p in &data.poles {
            if !(j.eval(p)? >= lower.eval(p)?) {
                cond_ok = false;
            }
        }
        if !(j.eval(data.l_point)? >= data.corner_l[params.k - 1])
            || !(j.eval(data.r_point)? >= data.corner_r[params.k - 1])
        {
            cond_ok = false;
        }

        // Reconstruction continuity at the stitch points 𝔩 and 𝔯.
        let cands = vec![j];
        let rec = reconstruct(&cands, &data, &ens)?;
        let il = data.l_index();
        let ir = data.r_index();
        let recon_resid = (rec.curve(1)[il] - cands[0].value(0))
            .abs()
            .max((rec.curve(1)[ir] - cands[0].value(ir - il)).abs());

        Ok(StructuralOutcome {
            slopes_ok,
            sep_ok,
            count_ok,
            lr_ok,
            cond_ok,
            recon_resid,
            fav: data.fav.fav,
            poles: data.poles.len(),
            max_slope,
        })
    })?;

    let mut rep = ExperimentReport::new(
        "rep,fav,poles,max_tent_slope,slopes_ok,sep_ok,count_ok,lr_ok,cond_ok,recon_resid",
    );
    for (i, o) in outcomes.iter().enumerate() {
        rep.rows.push(format!(
            "{i},{},{},{},{},{},{},{},{},{}",
            o.fav as u8,
            o.poles,
            fmt(o.max_slope),
            o.slopes_ok as u8,
            o.sep_ok as u8,
            o.count_ok as u8,
            o.lr_ok as u8,
            o.cond_ok as u8,
            fmt(o.recon_resid)
        ));
    }

    let count = |f: &dyn Fn(&StructuralOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count();
    let n = outcomes.len();
    let checks: [(&str, usize); 5] = [
        ("tent-slope-window", count(&|o| !o.slopes_ok)),
        ("pole-separation", count(&|o| !o.sep_ok)),
        ("pole-count", count(&|o| !o.count_ok)),
        ("lr-window-on-f2", count(&|o| !o.lr_ok)),
        ("candidate-conditioning", count(&|o| !o.cond_ok)),
    ];
    for (name, violations) in checks {
        rep.criteria.push(CriterionResult::hard(
            name,
            violations == 0,
            format!("{violations} violations in {n} draws"),
        ));
    }
    let worst_resid =
        outcomes.iter().map(|o| o.recon_resid).fold(0.0f64, f64::max);
    rep.criteria.push(CriterionResult::hard(
        "reconstruction-continuity",
        worst_resid < 1e-12,
        format!("max stitch residual {worst_resid:.2e} over {n} draws"),
    ));
    let fav_rate = if n > 0 { count(&|o| o.fav) as f64 / n as f64 } else { 1.0 };
    rep.criteria.push(CriterionResult::monitor(
        "fav-frequency",
        fav_rate >= 1.0 - params.epsilon,
        format!("Fav frequency {fav_rate:.4} (target ≥ {})", 1.0 - params.epsilon),
    ));
    if let Some(msg) = params.epsilon_window_violation() {
        rep.criteria.push(CriterionResult::monitor("epsilon-window", false, msg));
    }
    Ok(rep)
}

/// Pass-rate monitor: the fraction of exact candidate draws passing the
/// full ordering test, against the one-sided theoretical floor.
pub fn pass_rate(cfg: &RunConfig) -> Result<ExperimentReport> {
    let params = jump_params(cfg)?;
    let steps = cfg.usize("steps");
    let draws = cfg.u64("draws");

    let passes = try_parallel_map(cfg, &cfg.experiment, draws, |_, stream| {
        let ens = synthetic_fav_ensemble(&params, steps, stream)?;
        let data = JumpData::build(&ens, params)?;
        let j = vec![sample_jump_candidate_exact1(&ens, &data, stream)?];
        pass_test(&j, &data, &ens)
    })?;
    let hits = passes.iter().filter(|&&p| p).count() as u64;
    let rate = if draws > 0 { hits as f64 / draws as f64 } else { 0.0 };
    // exp(−3973 k^{7/2} d_ip² D_k² (log ε^{−1})^{2/3}); underflows to 0
    // at realistic parameters, making the floor vacuous but well-defined.
    let k = params.k as f64;
    let log_eps = params.epsilon.recip().ln();
    let floor = (-3973.0
        * k.powf(3.5)
        * params.d_ip
        * params.d_ip
        * params.big_d_k
        * params.big_d_k
        * log_eps.powf(2.0 / 3.0))
    .exp();

    let mut rep = ExperimentReport::new("draws,passes,rate,floor");
    rep.rows.push(format!("{draws},{hits},{},{}", fmt(rate), fmt(floor)));
    rep.criteria.push(CriterionResult::monitor(
        "pass-rate-floor",
        rate >= floor,
        format!("pass rate {rate:.4} ≥ theoretical floor {floor:.3e}"),
    ));
    Ok(rep)
}

/// (Y, Z) observable monitor: kernel density estimates of the candidate's
/// deviations from the Tent map against sub-Gaussian envelope shapes.
pub fn density_monitor(cfg: &RunConfig) -> Result<ExperimentReport> {
    let params = jump_params(cfg)?;
    let steps = cfg.usize("steps");
    let draws = cfg.u64("draws");
    let eta = cfg.f64("eta");
    let d = params.d;

    let obs = try_parallel_map(cfg, &cfg.experiment, draws, |_, stream| {
        let ens = synthetic_fav_ensemble(&params, steps, stream)?;
        let data = JumpData::build(&ens, params)?;
        let j = vec![sample_jump_candidate_exact1(&ens, &data, stream)?];
        let o = observables(&j, &data, eta)?;
        let good = in_good_region(o.y, o.z, &params, o.pole_case);
        Ok((o, good))
    })?;

    let mut rep = ExperimentReport::new("kind,x,value,envelope");
    let n = obs.len();
    let good = obs.iter().filter(|(_, g)| *g).count();
    let pole_case = obs.iter().filter(|(o, _)| o.pole_case).count();
    rep.rows.push(format!("summary,0,{},{}", fmt(n as f64), fmt(good as f64)));

    let mut within = 0usize;
    let mut total = 0usize;
    for tag in ["y", "z"] {
        let vals: Vec<f64> = obs
            .iter()
            .map(|(o, _)| if tag == "y" { o.y } else { o.z })
            .collect();
        if vals.len() < 8 {
            continue;
        }
        // Silverman bandwidth over a symmetric evaluation lattice.
        let (mean, _) = quiltlab_core::mean_stderr(&vals)?;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (vals.len() as f64 - 1.0);
        let bw = 1.06 * var.sqrt() * (vals.len() as f64).powf(-0.2);
        let sigma2 = 4.0 * d;
        for i in 0..=40 {
            let x = -10.0 * d + 20.0 * d * i as f64 / 40.0;
            let kde = vals
                .iter()
                .map(|&v| {
                    let z = (x - v) / bw;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                / (vals.len() as f64 * bw * (2.0 * std::f64::consts::PI).sqrt());
            // Sub-Gaussian envelope shape for the negative deviations.
            let env = 3.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma2.sqrt())
                * (-x * x / (2.0 * sigma2)).exp();
            if x <= 0.0 {
                total += 1;
                if kde <= env {
                    within += 1;
                }
            }
            rep.rows.push(format!("kde-{tag},{},{},{}", fmt(x), fmt(kde), fmt(env)));
        }
    }
    let frac = if total > 0 { within as f64 / total as f64 } else { 1.0 };
    rep.criteria.push(CriterionResult::monitor(
        "density-envelope",
        frac >= 0.9,
        format!(
            "{within}/{total} negative-side KDE points within the envelope; \
             {pole_case}/{n} pole-case draws, {good}/{n} in the good region"
        ),
    ));
    Ok(rep)
}

/// Cost tables and the conditional-Gaussian monotonicity checks.
pub fn costs_tables(cfg: &RunConfig) -> Result<ExperimentReport> {
    let d = cfg.f64("d");
    let mut rep = ExperimentReport::new("kind,p1,p2,value,extra");
    let mut all_vs = true;

    // Vault/slope costs on a (y, z) lattice with a representative tent
    // triple (−d, 0, −d): threshold d above the mean of the side values.
    let lattice = [-3.0 * d, -d, 0.0, d, 3.0 * d];
    for &y in &lattice {
        for &z in &lattice {
            let (v, s) = vault_slope_costs(y, z, d, -d, 0.0, -d)?;
            if !(v >= 1.0 && s >= d.sqrt() - 1e-12) {
                all_vs = false;
            }
            rep.rows.push(format!("vault-slope,{},{},{},{}", fmt(y), fmt(z), fmt(v), fmt(s)));
        }
    }
    rep.criteria.push(CriterionResult::hard(
        "cost-lower-bounds",
        all_vs,
        "V ≥ 1 and S ≥ √d on the (y,z) lattice",
    ));

    // Conditional jump probability along the midpoint m = (y+z)/2 + Δ.
    let mut prev = f64::INFINITY;
    let mut monotone_jump = true;
    for i in 0..=20 {
        let m = -5.0 + 0.5 * i as f64;
        let p = conditional_jump_probability(2.0 * m, 0.0, 0.0, d)?;
        if p > prev + 1e-12 {
            monotone_jump = false;
        }
        prev = p;
        rep.rows.push(format!("conditional-jump,{},0,{},0", fmt(m), fmt(p)));
    }
    rep.criteria.push(CriterionResult::hard(
        "conditional-jump-monotone",
        monotone_jump,
        "P(U ∈ [0,1] | U ≥ 0) non-increasing in the midpoint",
    ));

    // Conditional-Gaussian monotonicity: strictly decreasing in s on
    // 50-point grids for nine (m, σ², r) combinations.
    let combos = [
        (-1.0, 0.5, 0.5),
        (-1.0, 1.0, 1.0),
        (-1.0, 2.0, 2.0),
        (0.0, 0.5, 1.0),
        (0.0, 1.0, 2.0),
        (0.0, 2.0, 0.5),
        (1.0, 0.5, 2.0),
        (1.0, 1.0, 0.5),
        (1.0, 2.0, 1.0),
    ];
    let mut strict = true;
    for &(m, sigma2, r) in combos.iter() {
        let sigma2: f64 = sigma2;
        let sd = sigma2.sqrt();
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let s = m - 3.0 * sd + 6.0 * sd * i as f64 / 49.0;
            let p = conditional_gaussian_tail(sigma2, r, s)?;
            if !(p < last) {
                strict = false;
            }
            last = p;
            rep.rows.push(format!(
                "conditional-tail,{},{},{},{}",
                fmt(sigma2), fmt(r), fmt(s), fmt(p)
            ));
        }
    }
    rep.criteria.push(CriterionResult::hard(
        "conditional-gaussian-monotone",
        strict,
        "strictly decreasing on 50-point s-grids for 9 (m,σ²,r) combinations",
    ));

    // Vault variance window on a pole-gap lattice.
    let mut window_ok = true;
    for i in 0..=30 {
        let gap = 5.0 * d + 0.5 * d * i as f64;
        let v = vault_variance(d, gap)?;
        if !(v >= 4.0 * d / 5.0 - 1e-12 && v <= 4.0 * d + 1e-12) {
            window_ok = false;
        }
        rep.rows.push(format!("vault-variance,{},0,{},0", fmt(gap), fmt(v)));
    }
    rep.criteria.push(CriterionResult::hard(
        "vault-variance-window",
        window_ok,
        "σ²₋₄d ∈ [4d/5, 4d] for pole gaps ≥ 5d",
    ));
    Ok(rep)
}

/// Brute-force side-interval test: re-pin every curve affinely to the
/// probe endpoint values and demand strict ordering above the next curve
/// and the lower curve away from the pivot.
fn side_passes_brute(
    curves: &[Vec<f64>],
    lower: &[f64],
    xs: &[f64],
    side: Side,
    vals: &[f64],
) -> bool {
    let n = xs.len();
    let (outer, inner) = match side {
        Side::Left => (0usize, n - 1),
        Side::Right => (n - 1, 0usize),
    };
    let span = xs[inner] - xs[outer];
    let k = curves.len();
    let rec: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let w = (xs[j] - xs[outer]) / span;
                    curves[i][j] + w * (vals[i] - curves[i][inner])
                })
                .collect()
        })
        .collect();
    for j in 0..n {
        for i in 0..k {
            let below = if i + 1 < k { rec[i + 1][j] } else { lower[j] };
            if j == outer {
                if !(rec[i][j] >= below) {
                    return false;
                }
            } else if !(rec[i][j] > below) {
                return false;
            }
        }
    }
    true
}

/// Corner-criterion oracle: logical equivalence of the cone test with the
/// brute-force side reconstruction on random instances.
pub fn corner_oracle(cfg: &RunConfig) -> Result<ExperimentReport> {
    let instances = cfg.u64("draws");
    let mut rep = ExperimentReport::new("rep,k,side,probes,agreements,disagreements");
    let mut total_agree = 0u64;
    let mut total_disagree = 0u64;
    for rep_i in 0..instances {
        let mut s = derive_stream(cfg.seed, &cfg.experiment, rep_i);
        let k = 1 + (rep_i % 3) as usize;
        let n = 16usize;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let side = if rep_i % 2 == 0 { Side::Left } else { Side::Right };
        let lower: Vec<f64> = (0..n).map(|_| s.gen::<f64>() - 0.5).collect();
        let curves: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let lift = 2.0 * (k - i) as f64;
                (0..n).map(|j| lower[j] + lift + s.gen::<f64>()).collect()
            })
            .collect();
        let refs: Vec<&[f64]> = curves.iter().map(|c| c.as_slice()).collect();
        let corners = corner_vector(&refs, &lower, &xs, side)?;
        let mut agreements = 0u64;
        let mut disagreements = 0u64;
        let mut probes = 0u64;
        for _ in 0..20 {
            let vals: Vec<f64> =
                (0..k).map(|i| corners[i] + 3.0 * (s.gen::<f64>() - 0.4)).collect();
            let diffs: Vec<f64> = (0..k).map(|i| vals[i] - corners[i]).collect();
            if diffs.iter().any(|&d| d.abs() <= 1e-9)
                || diffs.windows(2).any(|w| (w[0] - w[1]).abs() <= 1e-9)
            {
                continue;
            }
            probes += 1;
            let criterion = in_ordered_positive_cone(&diffs);
            let brute = side_passes_brute(&curves, &lower, &xs, side, &vals);
            if criterion == brute {
                agreements += 1;
            } else {
                disagreements += 1;
            }
        }
        total_agree += agreements;
        total_disagree += disagreements;
        rep.rows.push(format!(
            "{rep_i},{k},{side:?},{probes},{agreements},{disagreements}"
        ));
    }
    rep.criteria.push(CriterionResult::hard(
        "corner-criterion-equivalence",
        total_disagree == 0 && (instances == 0 || total_agree > 0),
        format!("{total_agree} agreements, {total_disagree} disagreements over {instances} instances"),
    ));
    Ok(rep)
}

/// Exhaustive pole-set search: maximal-cardinality, then lexicographically
/// maximal subset containing both ends with separation and coverage
/// constraints.
fn pole_set_brute(xs: &[f64], d_ip: f64) -> Option<Vec<f64>> {
    let m = xs.len();
    let mut best: Option<Vec<f64>> = None;
    for mask in 0u32..(1u32 << m) {
        if mask & 1 == 0 || mask & (1 << (m - 1)) == 0 {
            continue;
        }
        let sel: Vec<f64> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| xs[i]).collect();
        if sel.windows(2).any(|w| w[1] - w[0] < d_ip) {
            continue;
        }
        if !xs.iter().all(|&x| sel.iter().any(|&p| (x - p).abs() <= d_ip)) {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => {
                sel.len() > b.len() || (sel.len() == b.len() && sel > *b)
            }
        };
        if better {
            best = Some(sel);
        }
    }
    best
}

/// Pole-set oracle: the dynamic-programming construction must match the
/// exhaustive subset search exactly on random instances.
pub fn pole_oracle(cfg: &RunConfig) -> Result<ExperimentReport> {
    let instances = cfg.u64("draws");
    let d_ip = 5.0;
    let mut rep = ExperimentReport::new("rep,points,feasible,match");
    let mut mismatches = 0u64;
    for rep_i in 0..instances {
        let mut s = derive_stream(cfg.seed, &cfg.experiment, rep_i);
        let m = 2 + (s.gen::<u64>() % 11) as usize; // |xExt| ≤ 12
        let span = 20.0 + 40.0 * s.gen::<f64>();
        let mut xs: Vec<f64> = vec![0.0];
        for _ in 0..m.saturating_sub(2) {
            xs.push(span * s.gen::<f64>());
        }
        xs.push(span);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        let brute = pole_set_brute(&xs, d_ip);
        let fast = pole_set(&xs, xs[0], *xs.last().unwrap(), d_ip);
        let ok = match (&brute, &fast) {
            (Some(b), Ok(f)) => b == f,
            (None, Err(Error::Degenerate(_))) | (None, Err(Error::Domain(_))) => true,
            _ => false,
        };
        if !ok {
            mismatches += 1;
        }
        rep.rows.push(format!(
            "{rep_i},{},{},{}",
            xs.len(),
            brute.is_some() as u8,
            ok as u8
        ));
    }
    rep.criteria.push(CriterionResult::hard(
        "pole-set-oracle",
        mismatches == 0,
        format!("{mismatches} mismatches over {instances} instances"),
    ));
    Ok(rep)
}
