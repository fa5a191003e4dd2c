//! The experiment registry: every runnable experiment with its parameter
//! schema and tier defaults.

use crate::config::{float, int, ParamSpec, RunConfig};
use crate::experiments::{extremes, jump, lpp, meander, misc};
use crate::manifest::ExperimentReport;
use quiltlab_core::{Error, Result};

/// One registered experiment.
pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    pub schema: &'static [ParamSpec],
    pub run: fn(&RunConfig) -> Result<ExperimentReport>,
}

/// Shared schema fragment for the jump-ensemble experiments.
macro_rules! jump_schema {
    ($($extra:expr),* $(,)?) => {
        &[
            float("epsilon", 1e-3, 1e-3, "favourable-event failure budget ε"),
            int("k", 1, 1, "curve index of the jump resampling"),
            float("d", 1.0, 1.0, "pole-density horizon scale d"),
            float("c", 1.0, 1.0, "lower-bound constant c_k"),
            float("big_c", 1.0, 1.0, "upper-bound constant C_k"),
            float("const", 1.0, 1.0, "global constant prefactor"),
            int("steps", 1648, 1648, "grid steps across [−2T, 2T]"),
            $($extra),*
        ]
    };
}

/// The registry, in canonical order.
pub const REGISTRY: &[Experiment] = &[
    Experiment {
        name: "meander-densities",
        summary: "meander transition/marginal normalization, Chapman–Kolmogorov, sampler KS",
        schema: &[
            int("draws", 100_000, 2_000, "Monte Carlo draws for sampler fidelity"),
            int("steps", 32, 32, "sampler grid steps on [0, 1]"),
            float("tol_norm", 1e-6, 1e-6, "normalization tolerance"),
            float("tol_ck", 1e-5, 1e-5, "Chapman–Kolmogorov residual tolerance"),
            float("tol_ks", 0.01, 0.05, "KS distance tolerance for sampler fidelity"),
        ],
        run: meander::densities,
    },
    Experiment {
        name: "meander-bounds",
        summary: "appendix meander bound quadratures vs 1/2, 3/4 and 0.967",
        schema: &[],
        run: meander::bounds,
    },
    Experiment {
        name: "nz-tails",
        summary: "near-zero event probability vs the 2a bound",
        schema: &[
            int("draws", 100_000, 3_000, "meander draws"),
            int("steps", 256, 256, "meander grid steps on [0, 1]"),
        ],
        run: meander::nz_tails,
    },
    Experiment {
        name: "nt-arcsine",
        summary: "near-touch ∩ max-location probability vs the 4a·ArcSin bound",
        schema: &[
            int("draws", 100_000, 2_000, "two-sided Brownian draws"),
            int("steps", 2_048, 2_048, "grid steps on [−1, 1]"),
        ],
        run: extremes::nt_arcsine,
    },
    Experiment {
        name: "numnt-tail",
        summary: "near-touch count: decreasing log-linear survival",
        schema: &[
            int("draws", 100_000, 3_000, "two-sided Brownian draws"),
            int("steps", 2_048, 2_048, "grid steps on [−1, 1]"),
        ],
        run: extremes::numnt_tail,
    },
    Experiment {
        name: "bridge-sup",
        summary: "bridge supremum law P(sup ≥ r) = e^(−2r²/T)",
        schema: &[
            int("draws", 100_000, 5_000, "bridge draws per T"),
            int("steps", 512, 512, "bridge grid steps"),
        ],
        run: extremes::bridge_sup,
    },
    Experiment {
        name: "arcsine-argmax",
        summary: "arcsine law of the two-sided Brownian argmax",
        schema: &[
            int("draws", 100_000, 5_000, "two-sided Brownian draws"),
            int("steps", 1_024, 1_024, "grid steps on [−1, 1]"),
            float("tol_ks", 0.015, 0.05, "KS distance tolerance"),
        ],
        run: extremes::arcsine_argmax,
    },
    Experiment {
        name: "lpp-gue",
        summary: "last-passage value vs the top GUE eigenvalue, n ∈ {2, 5, 10}",
        schema: &[
            int("draws", 10_000, 1_500, "draws per side and per n"),
            int("grid_steps", 320_000, 32_000, "environment grid steps at n = 10"),
            int("max_n", 10, 5, "largest line count to test"),
            float("p_min", 0.01, 0.01, "two-sample KS p-value floor"),
        ],
        run: lpp::lpp_gue,
    },
    Experiment {
        name: "gibbs-invariance",
        summary: "one-point invariance of Dyson curves under Gibbs resampling",
        schema: &[
            int("draws", 6_000, 500, "resampling trials"),
            int("n", 5, 5, "number of Dyson curves"),
            int("steps", 48, 48, "grid steps on [1/4, 1]"),
            float("p_min", 0.01, 0.01, "two-sample KS p-value floor"),
        ],
        run: lpp::gibbs_invariance,
    },
    Experiment {
        name: "jump-structure",
        summary: "structural invariants of the jump data on favourable draws",
        schema: jump_schema![int("draws", 1_000, 25, "favourable-event draws")],
        run: jump::structure,
    },
    Experiment {
        name: "jump-pass-rate",
        summary: "jump test pass rate vs the analytic floor (monitoring)",
        schema: jump_schema![int("draws", 200, 20, "candidate draws")],
        run: jump::pass_rate,
    },
    Experiment {
        name: "jump-density-monitor",
        summary: "jump observable density vs the Gaussian envelope (monitoring)",
        schema: jump_schema![
            int("draws", 400, 30, "observable draws"),
            float("eta", 0.5, 0.5, "observable regularization η"),
        ],
        run: jump::density_monitor,
    },
    Experiment {
        name: "costs-tables",
        summary: "vault/slope cost tables, jump-probability monotonicity, Gaussian tails",
        schema: &[float("d", 1.0, 1.0, "pole-density horizon scale d")],
        run: jump::costs_tables,
    },
    Experiment {
        name: "corner-oracle",
        summary: "corner criterion vs brute-force side-passage oracle",
        schema: &[int("draws", 100, 30, "random instances")],
        run: jump::corner_oracle,
    },
    Experiment {
        name: "pole-oracle",
        summary: "greedy pole set vs exhaustive maximal-separated-subset oracle",
        schema: &[int("draws", 200, 50, "random instances")],
        run: jump::pole_oracle,
    },
    Experiment {
        name: "polymer-ordering",
        summary: "monotone ordering of leftmost polymer maximisers",
        schema: &[
            int("draws", 100, 20, "random environments"),
            int("steps", 192, 192, "environment grid steps on [0, 12]"),
        ],
        run: lpp::polymer_ordering,
    },
    Experiment {
        name: "quilt-continuity",
        summary: "quilt stitch continuity and the trivial-stitch identity",
        schema: &[int("draws", 50, 10, "random fabric triples")],
        run: misc::quilt_continuity,
    },
    Experiment {
        name: "increment-moment",
        summary: "rewarded-weight increment moment slope vs 1 − η/2 (monitoring)",
        schema: &[
            int("draws", 4_000, 300, "environment draws per y"),
            float("eta", 0.2, 0.2, "moment exponent deficit η"),
        ],
        run: misc::increment_moment,
    },
    Experiment {
        name: "analytic-lemmas",
        summary: "closed-form lemma checks over their parameter lattices",
        schema: &[],
        run: misc::analytic_lemmas,
    },
];

/// Look up an experiment by name.
pub fn find(name: &str) -> Result<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| {
        Error::Domain(format!(
            "unknown experiment `{name}` (run `quiltlab list` for the registry)"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique_and_complete() {
        let names: Vec<&str> = REGISTRY.iter().map(|e| e.name).collect();
        assert_eq!(names.len(), 19);
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        assert!(find("lpp-gue").is_ok());
        assert!(find("no-such-thing").is_err());
    }
}
