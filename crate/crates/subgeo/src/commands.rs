//! The subcommands, writing CSV to any `Write`.

use std::io::Write;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use subgeo_core::certify::{minorisation, Violation};
use subgeo_core::constants::theorem_c;
use subgeo_core::coupling::{
    chunk_count, dp_expected_sum, reduce_chunks, simulate_chunk, AugmentedSequence, DpQuery,
    PairWeight, SimStats, Stop, OUTCOME_LABELS,
};
use subgeo_core::ratefn::{big_h, big_h_inv, delta_k, rate_r, PhiSpec, Rate};
use subgeo_core::verify::{
    check_corollary_rescaled, check_rate_props, CheckRow, RescaleInput, Verifier,
};
use subgeo_core::{Error, Tolerances};

use crate::report::{float, write_check, writer, CHECK_HEADER};
use crate::spec_file::ChainSpec;

/// `n, r(n), δ_n, H(1+n), H⁻¹(ε_b n)` for `n < len`.
pub fn rates<W: Write>(out: W, alpha: f64, beta: f64, eps_b: f64, len: u64) -> Result<()> {
    let phi = PhiSpec::polynomial(alpha, beta)?;
    let mut w = writer(out);
    w.write_record(["n", "r", "delta", "big_h", "big_h_inv"])?;
    for n in 0..len {
        w.write_record([
            n.to_string(),
            float(rate_r(&phi, eps_b, n)?),
            float(delta_k(&phi, eps_b, n)?),
            float(big_h(&phi, 1.0 + n as f64)?),
            float(big_h_inv(&phi, eps_b * n as f64)?),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the certificate as `quantity,value` rows, or the violation listing
/// (`kernel_index,state,margin`) when certification fails. Returns whether
/// certification succeeded.
pub fn certify<W: Write>(out: W, spec: &ChainSpec, tol: &Tolerances) -> Result<bool> {
    let mut w = writer(out);
    match spec.certificate(tol) {
        Ok(cert) => {
            let k = cert.constants;
            w.write_record(["quantity", "value"])?;
            w.write_record(["chain_id", spec.id()])?;
            for (name, value) in [
                ("alpha", k.phi.alpha()),
                ("beta", k.phi.beta()),
                ("b_v", k.b_v),
                ("c_v", k.c_v),
                ("eps_b", k.eps_b),
                ("eps_nu", k.eps_nu),
            ] {
                w.write_record([name, &float(value)])?;
            }
            w.write_record(["small_set", &join(cert.small_set.indices())])?;
            for (ki, nu) in cert.nus.iter().enumerate() {
                for (y, p) in nu.iter().enumerate() {
                    w.write_record([format!("nu[{ki}][{y}]"), float(*p)])?;
                }
            }
            w.flush()?;
            Ok(true)
        }
        Err(crate::spec_file::SpecError::Core(Error::Certification { reason, violations })) => {
            eprintln!("certification failed for {}: {reason}", spec.id());
            write_violations(&mut w, &violations)?;
            if violations.is_empty() {
                if let Ok(m) = minorisation(&spec.chain()?.seq, &spec.chain()?.small_set) {
                    if let Some((x, x2, k)) = m.counterexample {
                        eprintln!("no common minorisation: states {x} and {x2} under kernel {k}");
                    }
                }
            }
            w.flush()?;
            Ok(false)
        }
        Err(e) => Err(e.into()),
    }
}

fn write_violations<W: Write>(w: &mut csv::Writer<W>, violations: &[Violation]) -> Result<()> {
    w.write_record(["kernel_index", "state", "margin"])?;
    for v in violations {
        w.write_record([
            v.kernel_index.to_string(),
            v.state.to_string(),
            float(v.margin),
        ])?;
    }
    Ok(())
}

fn join(ix: impl Iterator<Item = usize>) -> String {
    ix.map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

/// One row with the full constant ledger.
pub fn constants<W: Write>(out: W, spec: &ChainSpec, tol: &Tolerances) -> Result<()> {
    let k = spec.drift_constants(tol)?;
    let t = theorem_c(&k, tol.series_rel)?;
    let mut w = writer(out);
    w.write_record([
        "chain_id",
        "alpha",
        "beta",
        "b_v",
        "c_v",
        "eps_b",
        "eps_nu",
        "bar_b",
        "m_one",
        "r_one",
        "c_star",
        "series_terms",
        "series_tail",
        "c",
    ])?;
    w.write_record([
        spec.id().to_owned(),
        float(k.phi.alpha()),
        float(k.phi.beta()),
        float(k.b_v),
        float(k.c_v),
        float(k.eps_b),
        float(k.eps_nu),
        float(t.bar_b),
        t.m_one.map(float).unwrap_or_default(),
        float(t.r_one),
        float(t.c_star),
        t.series_terms_used.to_string(),
        float(t.series_tail_bound),
        float(t.c),
    ])?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Drift,
    Lemmas,
    Theorem,
    Corollary,
    All,
}

impl std::str::FromStr for Suite {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "drift" => Suite::Drift,
            "lemmas" => Suite::Lemmas,
            "theorem" => Suite::Theorem,
            "corollary" => Suite::Corollary,
            "all" => Suite::All,
            other => bail!("unknown suite `{other}` (drift, lemmas, theorem, corollary, all)"),
        })
    }
}

/// A verification result tagged with its parameters.
#[derive(Debug, Clone)]
pub struct Tagged {
    pub param: String,
    pub row: CheckRow,
}

fn tag(param: &str, rows: Vec<CheckRow>) -> Vec<Tagged> {
    rows.into_iter()
        .map(|row| Tagged {
            param: param.to_owned(),
            row,
        })
        .collect()
}

/// Runs a suite on one chain.
pub fn run_suite(spec: &ChainSpec, suite: Suite, tol: &Tolerances) -> Result<Vec<Tagged>> {
    let cert = spec
        .certificate(tol)
        .with_context(|| format!("certifying {}", spec.id()))?;
    let k = cert.constants;
    let ver = Verifier::new(cert, *tol)?;
    let mut out = Vec::new();
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Drift) {
        let steps = spec.file.run.marginal_steps.unwrap_or(100);
        out.extend(tag("", check_rate_props(&k.phi, k.eps_b, 64)?.to_vec()));
        out.extend(tag("", ver.check_marginals(steps)?));
        out.extend(tag("", ver.check_bivariate_drift()));
        out.extend(tag("k<=32", ver.check_transformed_drift(32)?));
    }
    if want(Suite::Lemmas) {
        out.extend(tag("", ver.check_lemma_bounds()?));
    }
    if want(Suite::Theorem) {
        let f = spec.f()?;
        let per_xi: Vec<Result<Vec<Tagged>>> = spec
            .file
            .xi
            .par_iter()
            .map(|&xi| Ok(tag(&format!("xi={xi}"), ver.check_theorem(f, xi)?)))
            .collect();
        for r in per_xi {
            out.extend(r?);
        }
    }
    if want(Suite::Corollary) {
        let f = spec.f()?;
        let chain = spec.chain()?;
        let input = RescaleInput {
            seq: &chain.seq,
            v_hat: &chain.v,
            alpha: k.phi.alpha(),
            beta: k.phi.beta(),
            small_set: &chain.small_set,
            eps_b: spec.file.run.rescale_eps_b.unwrap_or(tol.eps_b_default),
        };
        let mut jobs: Vec<(f64, Option<f64>)> = spec.file.xi.iter().map(|&xi| (xi, None)).collect();
        for &lambda in &spec.file.lambda {
            jobs.extend(spec.file.xi.iter().map(|&xi| (xi, Some(lambda))));
        }
        let results: Vec<Result<Vec<Tagged>>> = jobs
            .par_iter()
            .map(|&(xi, lambda)| match lambda {
                None => Ok(tag(&format!("xi={xi}"), ver.check_corollary(f, xi)?)),
                Some(l) => Ok(tag(
                    &format!("xi={xi} lambda={l}"),
                    check_corollary_rescaled(&input, l, f, xi, tol)
                        .with_context(|| format!("rescaling {} with lambda={l}", spec.id()))?,
                )),
            })
            .collect();
        for r in results {
            out.extend(r?);
        }
    }
    Ok(out)
}

/// Writes the suite report; returns whether every row passed.
pub fn verify<W: Write>(out: W, spec: &ChainSpec, suite: Suite, tol: &Tolerances) -> Result<bool> {
    let rows = run_suite(spec, suite, tol)?;
    let mut w = writer(out);
    w.write_record(CHECK_HEADER)?;
    for t in &rows {
        write_check(&mut w, spec.id(), &t.param, &t.row)?;
    }
    w.flush()?;
    Ok(rows.iter().all(|t| t.row.pass))
}

/// DP value and tail for each simulated statistic, in `OUTCOME_LABELS` order.
pub fn dp_oracle(
    aug: &AugmentedSequence,
    spec: &ChainSpec,
    start: (usize, usize),
    tol: &Tolerances,
) -> Result<[(f64, f64); 4]> {
    let cert = spec.certificate(tol)?;
    let consts = theorem_c(&cert.constants, tol.series_rel)?;
    let bounds = subgeo_core::constants::LemmaBounds::new(&cert.constants, &consts);
    let rate = Rate::poly(cert.constants.phi, cert.constants.eps_b)?;
    let queries = [
        DpQuery {
            weight: PairWeight::One,
            rate: Rate::Unit,
            stop: Stop::Tau,
        },
        DpQuery {
            weight: PairWeight::One,
            rate,
            stop: Stop::Tau,
        },
        DpQuery {
            weight: PairWeight::PhiVbar,
            rate: Rate::Unit,
            stop: Stop::Tau,
        },
        DpQuery {
            weight: PairWeight::One,
            rate: Rate::Unit,
            stop: Stop::FirstHit { include_hit: false },
        },
    ];
    let mut out = [(0.0, 0.0); 4];
    for (o, q) in out.iter_mut().zip(&queries) {
        let r = dp_expected_sum(aug, &bounds, start, q, tol.dp_rel, tol.dp_max_steps)?;
        *o = (r.value, r.tail);
    }
    Ok(out)
}

/// Monte Carlo moments of the coupling statistics, with the exact DP values
/// alongside. Chunks run on the rayon pool and are merged in a fixed order,
/// so the output does not depend on the thread count.
pub fn simulate<W: Write>(
    out: W,
    spec: &ChainSpec,
    replicates: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<SimStats> {
    if replicates == 0 {
        bail!("replicates must be positive");
    }
    let cert = spec.certificate(tol)?;
    let aug = AugmentedSequence::new(&cert)?;
    let [x, x2] = spec.file.run.start.unwrap_or([0, 0]);
    let rate = Rate::poly(cert.constants.phi, cert.constants.eps_b)?;
    let chunks = (0..chunk_count(replicates))
        .into_par_iter()
        .map(|c| simulate_chunk(&aug, (x, x2), &rate, seed, c, replicates, tol.sim_max_steps))
        .collect::<subgeo_core::Result<Vec<_>>>()?;
    let stats = SimStats::from(reduce_chunks(chunks));
    let dp = dp_oracle(&aug, spec, (x, x2), tol)?;
    let mut w = writer(out);
    w.write_record([
        "chain_id",
        "start",
        "seed",
        "statistic",
        "replicates",
        "mean",
        "variance",
        "std_error",
        "dp_value",
        "dp_tail",
    ])?;
    for (i, label) in OUTCOME_LABELS.iter().enumerate() {
        w.write_record([
            spec.id().to_owned(),
            format!("{x} {x2}"),
            seed.to_string(),
            (*label).to_owned(),
            stats.replicates.to_string(),
            float(stats.mean[i]),
            float(stats.variance[i]),
            float(stats.std_error[i]),
            float(dp[i].0),
            float(dp[i].1),
        ])?;
    }
    w.flush()?;
    Ok(stats)
}
