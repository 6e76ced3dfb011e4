//! Machine checks of every inequality on a certified finite chain.
//!
//! Each check returns [`CheckRow`]s carrying the left side, the truncation
//! tail (already added to the left side for pass/fail), the right side and
//! the slack `rhs - lhs - tail`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::certify::{certify_rescaled, DriftCertificate, StateSet};
use crate::chain::{dot, stationary, KernelSequence, StateMeasure};
use crate::constants::{
    poly_corollary_const, poly_min_const, theorem_c, LemmaBounds, TheoremConstants,
};
use crate::coupling::{
    backward_power, dp_expected_sum_all, marginal_check, AugmentedSequence, DpQuery, PairWeight,
    Stop,
};
use crate::float::{pow_zero_one, powf};
use crate::ratefn::{delta_unchecked, h_k_unchecked, PhiSpec, Rate};
use crate::young::{make_pair, weighted_norm, WeightW};
use crate::{Error, Result, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check_id: &'static str,
    pub pair: String,
    pub lhs: f64,
    pub tail: f64,
    pub rhs: f64,
    pub slack: f64,
    /// Truncation index behind `tail`; 0 when nothing was truncated.
    pub terms: usize,
    pub pass: bool,
}

impl CheckRow {
    fn new(
        check_id: &'static str,
        pair: String,
        lhs: f64,
        tail: f64,
        rhs: f64,
        allowance: f64,
    ) -> Self {
        let slack = rhs - lhs - tail;
        CheckRow {
            check_id,
            pair,
            lhs,
            tail,
            rhs,
            slack,
            terms: 0,
            pass: slack >= -allowance,
        }
    }

    fn with_terms(mut self, terms: usize) -> Self {
        self.terms = terms;
        self
    }
}

pub fn all_pass(rows: &[CheckRow]) -> bool {
    rows.iter().all(|r| r.pass)
}

/// The row with the smallest slack.
pub fn worst(rows: &[CheckRow]) -> Option<&CheckRow> {
    rows.iter().min_by(|a, b| a.slack.total_cmp(&b.slack))
}

fn pair_label(x: usize, x2: usize) -> String {
    format!("({x},{x2})")
}

/// Worst signed violations of `r(n+m) ≤ r(n) r(m)` and
/// `r(n+m) - r(n) ≤ δ_n r(n) Σ_{k=1}^m r(k)` over `n, m ≤ big_n`, with
/// `δ_n = ε_b φ′(H_φ⁻¹(ε_b n))`. Allowance is `1e-12` relative.
pub fn check_rate_props(phi: &PhiSpec, eps_b: f64, big_n: usize) -> Result<[CheckRow; 2]> {
    crate::error::check_domain(eps_b > 0.0 && eps_b < 1.0, "eps_b", eps_b)?;
    let r: Vec<f64> = (0..=2 * big_n)
        .map(|n| phi.rate_at(eps_b, n as f64))
        .collect();
    let mut prefix = vec![0.0; big_n + 1];
    for m in 1..=big_n {
        prefix[m] = prefix[m - 1] + r[m];
    }
    let mut sub: Option<CheckRow> = None;
    let mut diff: Option<CheckRow> = None;
    for n in 0..=big_n {
        let d = delta_unchecked(phi, eps_b, n as f64);
        for m in 0..=big_n {
            let label = format!("n={n},m={m}");
            let rhs = r[n] * r[m];
            let row = CheckRow::new(
                "rate_log_subadditive",
                label.clone(),
                r[n + m],
                0.0,
                rhs,
                1e-12 * rhs,
            );
            if sub
                .as_ref()
                .is_none_or(|w| row.slack / rhs < w.slack / w.rhs)
            {
                sub = Some(row);
            }
            let lhs = r[n + m] - r[n];
            let rhs = d * r[n] * prefix[m];
            let row = CheckRow::new("rate_difference", label, lhs, 0.0, rhs, 1e-12 * r[n + m]);
            if diff.as_ref().is_none_or(|w| row.slack < w.slack) {
                diff = Some(row);
            }
        }
    }
    match (sub, diff) {
        (Some(a), Some(b)) => Ok([a, b]),
        _ => Err(Error::Domain {
            what: "N",
            value: big_n as f64,
        }),
    }
}

/// A certificate with its constant ledger and coupled chain.
#[derive(Debug, Clone)]
pub struct Verifier {
    pub cert: DriftCertificate,
    pub constants: TheoremConstants,
    pub bounds: LemmaBounds,
    pub aug: AugmentedSequence,
    pub tol: Tolerances,
}

/// Per-pair data shared by the main bound and its corollary.
struct SummedDifferences {
    horizon: usize,
    pair_lhs: Vec<f64>,
    measure_lhs: Vec<f64>,
    /// `K^N V̄` and `K^N 1`.
    kv: Vec<f64>,
    k1: Vec<f64>,
}

impl Verifier {
    pub fn new(cert: DriftCertificate, tol: Tolerances) -> Result<Self> {
        let constants = theorem_c(&cert.constants, tol.series_rel)?;
        let bounds = LemmaBounds::new(&cert.constants, &constants);
        let aug = AugmentedSequence::new(&cert)?;
        Ok(Verifier {
            cert,
            constants,
            bounds,
            aug,
            tol,
        })
    }

    fn n(&self) -> usize {
        self.cert.n_states()
    }

    fn rate(&self) -> Rate {
        Rate::Poly {
            phi: self.cert.constants.phi,
            eps_b: self.cert.constants.eps_b,
        }
    }

    /// Coupled-chain marginals against the base chain, every start, `m ≤ steps`.
    pub fn check_marginals(&self, steps: usize) -> Result<Vec<CheckRow>> {
        let n = self.n();
        let mut rows = Vec::with_capacity(n * n);
        for x in 0..n {
            for x2 in 0..n {
                let e = marginal_check(&self.aug, x, x2, steps)?;
                rows.push(CheckRow::new(
                    "marginal",
                    pair_label(x, x2),
                    e,
                    0.0,
                    1e-12,
                    0.0,
                ));
            }
        }
        Ok(rows)
    }

    /// Items (i)–(iv) of the bivariate drift for every pair and kernel.
    pub fn check_bivariate_drift(&self) -> Vec<CheckRow> {
        let n = self.n();
        let k = &self.cert.constants;
        let v = &self.cert.v;
        let bar_b = self.constants.bar_b;
        let allowance = 2.0 * self.tol.drift_slack;
        let mut rows = Vec::new();
        for (ki, kernel) in self.aug.kernels().iter().enumerate() {
            for x in 0..n {
                for x2 in 0..n {
                    let z = x * n + x2;
                    let vb = self.aug.vbar()[z];
                    let row = kernel.row(x, x2);
                    let lhs = dot(&row.uncoupled, self.aug.vbar())
                        + row
                            .coupled
                            .iter()
                            .zip(v)
                            .map(|(m, vy)| m * (2.0 * vy - 1.0))
                            .sum::<f64>();
                    let label = format!("({x},{x2}) k={ki}");
                    let drift = vb - k.eps_b * k.phi.value(vb);
                    if self.aug.in_cbar()[z] {
                        let rhs = 2.0 * (k.b_v + k.c_v) - 1.0;
                        rows.push(CheckRow::new(
                            "drift_ii",
                            label.clone(),
                            lhs,
                            0.0,
                            rhs,
                            allowance,
                        ));
                        if k.eps_nu < 1.0 {
                            let q = dot(kernel.q_row(x), v) + dot(kernel.q_row(x2), v) - 1.0;
                            let rhs = 2.0 * (k.b_v + k.c_v) / (1.0 - k.eps_nu) - 1.0;
                            rows.push(CheckRow::new(
                                "drift_iv",
                                label.clone(),
                                q,
                                0.0,
                                rhs,
                                allowance,
                            ));
                        }
                        rows.push(CheckRow::new(
                            "drift_iii",
                            label,
                            lhs,
                            0.0,
                            drift + bar_b,
                            allowance,
                        ));
                    } else {
                        rows.push(CheckRow::new(
                            "drift_i",
                            label.clone(),
                            lhs,
                            0.0,
                            drift,
                            allowance,
                        ));
                        rows.push(CheckRow::new(
                            "drift_iii",
                            label,
                            lhs,
                            0.0,
                            drift,
                            allowance,
                        ));
                    }
                }
            }
        }
        rows
    }

    /// The three coupled-chain lemma bounds for every start, DP tail included.
    pub fn check_lemma_bounds(&self) -> Result<Vec<CheckRow>> {
        let n = self.n();
        let rate = self.rate();
        let queries = [
            (
                "lemma_phi_sum",
                DpQuery {
                    weight: PairWeight::PhiVbar,
                    rate: Rate::Unit,
                    stop: Stop::Tau,
                },
            ),
            (
                "lemma_first_hit",
                DpQuery {
                    weight: PairWeight::One,
                    rate,
                    stop: Stop::FirstHit { include_hit: true },
                },
            ),
            (
                "lemma_rate_sum",
                DpQuery {
                    weight: PairWeight::One,
                    rate,
                    stop: Stop::Tau,
                },
            ),
        ];
        let mut rows = Vec::new();
        for (id, q) in queries {
            let all = dp_expected_sum_all(
                &self.aug,
                &self.bounds,
                &q,
                self.tol.dp_rel,
                self.tol.dp_max_steps,
            )?;
            for x in 0..n {
                for x2 in 0..n {
                    let z = x * n + x2;
                    let vb = self.aug.vbar()[z];
                    let rhs = match id {
                        "lemma_phi_sum" => self.bounds.phi_sum().eval(vb),
                        "lemma_first_hit" => self.bounds.first_hit(vb, self.aug.in_cbar()[z]),
                        _ => self.bounds.rate_sum().eval(vb),
                    };
                    rows.push(
                        CheckRow::new(id, pair_label(x, x2), all.values[z], all.tails[z], rhs, 0.0)
                            .with_terms(all.horizon),
                    );
                }
            }
        }
        Ok(rows)
    }

    /// Per-pair bound on `2 Σ_{n≥N} E[(r(n) + φ∘V̄/φ(1)); τ > n]` given
    /// `K^N V̄` and `K^N 1`.
    fn coupling_tail(&self, horizon: usize, kv: &[f64], k1: &[f64]) -> Vec<f64> {
        let rn = self.rate().at(horizon);
        let l64 = self.bounds.rate_sum();
        let l62 = self.bounds.phi_sum();
        let phi1 = self.cert.constants.phi.at_one();
        kv.iter()
            .zip(k1)
            .map(|(a, b)| {
                let e1 = l64.slope * a + l64.intercept * b;
                let e2 = l62.slope * a + l62.intercept * b;
                2.0 * (rn * e1 + e2 / phi1)
            })
            .collect()
    }

    /// Horizon doubling from 64 until `scale · tail ≤ tol · rhs` for every pair.
    fn summed_differences(
        &self,
        f: &[f64],
        weight: &dyn Fn(usize) -> f64,
        tail_scale: f64,
        rhs: &[f64],
        measures: &[(Vec<f64>, Vec<f64>)],
    ) -> Result<SummedDifferences> {
        let n = self.n();
        if f.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.len(),
            });
        }
        // Differences of P⁽ᵐ⁾f are unchanged by a constant shift of f.
        let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let centred: Vec<f64> = f.iter().map(|x| x - 0.5 * (lo + hi)).collect();
        let ones = vec![1.0; n * n];
        let mut horizon = 64usize;
        let (kv, k1) = loop {
            let out = backward_power(
                &self.aug,
                &[self.aug.vbar().to_vec(), ones.clone()],
                horizon,
            );
            let tails = self.coupling_tail(horizon, &out[0], &out[1]);
            let ok = tails
                .iter()
                .zip(rhs)
                .all(|(t, r)| tail_scale * t <= self.tol.dp_rel * r);
            if ok || tail_scale == 0.0 {
                break (out[0].clone(), out[1].clone());
            }
            if horizon >= self.tol.dp_max_steps {
                return Err(Error::NonConvergence {
                    what: "summed differences",
                    steps: horizon,
                });
            }
            horizon = (horizon * 2).min(self.tol.dp_max_steps);
        };
        let seq: &KernelSequence = &self.cert.seq;
        // M = P⁽ᵐ⁾, advanced as M ← M P_{m+1}.
        let mut m = vec![0.0; n * n];
        for x in 0..n {
            m[x * n + x] = 1.0;
        }
        let mut pair_lhs = vec![0.0; n * n];
        let mut measure_lhs = vec![0.0; measures.len()];
        for step in 0..horizon {
            let g: Vec<f64> = (0..n)
                .map(|x| dot(&m[x * n..(x + 1) * n], &centred))
                .collect();
            let w = weight(step);
            for x in 0..n {
                for x2 in 0..n {
                    pair_lhs[x * n + x2] += w * (g[x] - g[x2]).abs();
                }
            }
            for (acc, (mu1, mu2)) in measure_lhs.iter_mut().zip(measures) {
                *acc += w * (dot(mu1, &g) - dot(mu2, &g)).abs();
            }
            m = mat_mul(&m, seq.kernel(step + 1).rows_flat(), n);
        }
        Ok(SummedDifferences {
            horizon,
            pair_lhs,
            measure_lhs,
            kv,
            k1,
        })
    }

    /// Measure pairs used for the initial-law variant: uniform against the
    /// point mass at `argmax V`, and a linear ramp against uniform.
    pub fn measure_pairs(&self) -> Vec<(&'static str, Vec<f64>, Vec<f64>)> {
        let n = self.n();
        let uniform = vec![1.0 / n as f64; n];
        let arg = (0..n)
            .max_by(|&a, &b| self.cert.v[a].total_cmp(&self.cert.v[b]))
            .unwrap_or(0);
        let mut point = vec![0.0; n];
        point[arg] = 1.0;
        let total = (n * (n + 1)) as f64 / 2.0;
        let ramp: Vec<f64> = (0..n).map(|x| (x + 1) as f64 / total).collect();
        vec![
            ("uniform|argmax_v", uniform.clone(), point),
            ("ramp|uniform", ramp, uniform),
        ]
    }

    /// The common invariant law of all kernels, if there is one.
    pub fn common_stationary(&self) -> Result<StateMeasure> {
        let pi = stationary(&self.cert.seq.kernels()[0])?;
        for k in self.cert.seq.kernels() {
            let moved = k.push(pi.values());
            let err: f64 = moved
                .iter()
                .zip(pi.values())
                .map(|(a, b)| (a - b).abs())
                .sum();
            if err > 1e-12 {
                return Err(Error::Degenerate("kernels do not share an invariant law"));
            }
        }
        Ok(pi)
    }

    /// Main bound for every pair, the initial-law variant and, when the
    /// kernels share an invariant law, the stationary variant.
    pub fn check_theorem(&self, f: &[f64], xi: f64) -> Result<Vec<CheckRow>> {
        let n = self.n();
        let phi = self.cert.constants.phi;
        let pair = make_pair(xi)?;
        let w = WeightW::new(phi, pair, &self.cert.v)?;
        let fnorm = weighted_norm(f, &w)?;
        let c = self.constants.c;
        let v = &self.cert.v;
        let rhs: Vec<f64> = self.aug.vbar().iter().map(|vb| c * vb * fnorm).collect();

        let mut measures: Vec<(String, Vec<f64>, Vec<f64>)> = self
            .measure_pairs()
            .into_iter()
            .map(|(l, a, b)| (String::from(l), a, b))
            .collect();
        let stationary = self.common_stationary().ok();
        if let Some(pi) = &stationary {
            for x in 0..n {
                let mut point = vec![0.0; n];
                point[x] = 1.0;
                measures.push((format!("x={x}|pi"), point, pi.values().to_vec()));
            }
        }
        let mp: Vec<(Vec<f64>, Vec<f64>)> = measures
            .iter()
            .map(|(_, a, b)| (a.clone(), b.clone()))
            .collect();
        let rate = self.rate();
        let psi = |step: usize| pair.psi1(rate.at(step));
        let sd = self.summed_differences(f, &psi, fnorm, &rhs, &mp)?;
        let tails: Vec<f64> = self
            .coupling_tail(sd.horizon, &sd.kv, &sd.k1)
            .iter()
            .map(|t| t * fnorm)
            .collect();

        let mut rows = Vec::new();
        for x in 0..n {
            for x2 in 0..n {
                let z = x * n + x2;
                rows.push(
                    CheckRow::new(
                        "theorem",
                        pair_label(x, x2),
                        sd.pair_lhs[z],
                        tails[z],
                        rhs[z],
                        0.0,
                    )
                    .with_terms(sd.horizon),
                );
            }
        }
        for (i, (label, mu1, mu2)) in measures.iter().enumerate() {
            let mut tail = 0.0;
            for x in 0..n {
                for x2 in 0..n {
                    tail += mu1[x] * mu2[x2] * tails[x * n + x2];
                }
            }
            let r = c * (dot(mu1, v) + dot(mu2, v) - 1.0) * fnorm;
            let id = if label.ends_with("|pi") {
                "theorem_stationary"
            } else {
                "theorem_measure"
            };
            rows.push(
                CheckRow::new(id, label.clone(), sd.measure_lhs[i], tail, r, 0.0)
                    .with_terms(sd.horizon),
            );
        }
        Ok(rows)
    }

    /// Polynomial-rate form: `Σ (n+1)^(ξα/(1-α)) |Δ_n f| ≤ K c ‖f‖_{V^(α(1-ξ))} V̄`.
    pub fn check_corollary(&self, f: &[f64], xi: f64) -> Result<Vec<CheckRow>> {
        self.corollary_rows("corollary", f, xi)
    }

    fn corollary_rows(&self, id: &'static str, f: &[f64], xi: f64) -> Result<Vec<CheckRow>> {
        let n = self.n();
        let k = &self.cert.constants;
        let (alpha, beta) = (k.phi.alpha(), k.phi.beta());
        if f.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: f.len(),
            });
        }
        let pair = make_pair(xi)?;
        let mult = poly_corollary_const(alpha, beta, k.eps_b, xi)?;
        let min_c = poly_min_const(alpha, beta, k.eps_b)?;
        let expo = alpha * (1.0 - xi);
        let fnorm = f
            .iter()
            .zip(&self.cert.v)
            .map(|(fx, vx)| fx.abs() / pow_zero_one(*vx, expo))
            .fold(0.0, f64::max);
        let c = self.constants.c;
        let rhs: Vec<f64> = self
            .aug
            .vbar()
            .iter()
            .map(|vb| mult * c * fnorm * vb)
            .collect();
        let rate_exp = xi * alpha / (1.0 - alpha);
        let weight = |step: usize| pow_zero_one(step as f64 + 1.0, rate_exp);
        // (n+1)^(ξα/(1-α)) ≤ Ψ₁(r(n)) / (a₁ c_min^ξ) and ‖f‖_W = ‖f‖_{V^(α(1-ξ))} / a₂.
        let scale = fnorm / (pair.a2() * pair.a1() * pow_zero_one(min_c, xi));
        let sd = self.summed_differences(f, &weight, scale, &rhs, &[])?;
        let tails = self.coupling_tail(sd.horizon, &sd.kv, &sd.k1);
        let mut rows = Vec::with_capacity(n * n);
        for x in 0..n {
            for x2 in 0..n {
                let z = x * n + x2;
                rows.push(
                    CheckRow::new(
                        id,
                        pair_label(x, x2),
                        sd.pair_lhs[z],
                        scale * tails[z],
                        rhs[z],
                        0.0,
                    )
                    .with_terms(sd.horizon),
                );
            }
        }
        Ok(rows)
    }

    /// `P V_{k+1} ≤ V_k - φ(1) r_φ(k) + b r_φ(k+1) 1_C` with `V_k = H_k ∘ V`,
    /// for `k ≤ kmax`, on the chain (`φ`, `b_V`) and on the coupled chain
    /// (`ε_b φ`, `b̄`). One row per state or pair, worst over `k`.
    pub fn check_transformed_drift(&self, kmax: usize) -> Result<Vec<CheckRow>> {
        let n = self.n();
        let k = &self.cert.constants;
        let v = &self.cert.v;
        let mut rows = Vec::new();
        let phi = k.phi;
        for (ki, kernel) in self.cert.seq.kernels().iter().enumerate() {
            for x in 0..n {
                let inside = self.cert.small_set.contains(x);
                let mut worst_row: Option<CheckRow> = None;
                for j in 0..=kmax {
                    let jf = j as f64;
                    let next: Vec<f64> = v
                        .iter()
                        .map(|&vy| h_k_unchecked(&phi, vy, jf + 1.0))
                        .collect();
                    let lhs = dot(kernel.row(x), &next);
                    let mut rhs =
                        h_k_unchecked(&phi, v[x], jf) - phi.at_one() * phi.rate_at(1.0, jf);
                    if inside {
                        rhs += k.b_v * phi.rate_at(1.0, jf + 1.0);
                    }
                    let allow =
                        self.tol.drift_slack * (1.0 + lhs.abs()) * phi.rate_at(1.0, jf + 1.0);
                    let row = CheckRow::new(
                        "transformed_drift",
                        format!("x={x} k={ki} j={j}"),
                        lhs,
                        0.0,
                        rhs,
                        allow,
                    );
                    if worst_row.as_ref().is_none_or(|w| row.slack < w.slack) {
                        worst_row = Some(row);
                    }
                }
                rows.extend(worst_row);
            }
        }
        let scaled = phi.scaled(k.eps_b)?;
        let bar_b = self.constants.bar_b;
        for (ki, kernel) in self.aug.kernels().iter().enumerate() {
            for x in 0..n {
                for x2 in 0..n {
                    let z = x * n + x2;
                    let vb = self.aug.vbar()[z];
                    let row = kernel.row(x, x2);
                    let mut worst_row: Option<CheckRow> = None;
                    for j in 0..=kmax {
                        let jf = j as f64;
                        let h = |u: f64| h_k_unchecked(&scaled, u, jf + 1.0);
                        let mut lhs = 0.0;
                        for (m, vy) in row.uncoupled.iter().zip(self.aug.vbar()) {
                            if *m != 0.0 {
                                lhs += m * h(*vy);
                            }
                        }
                        for (m, vy) in row.coupled.iter().zip(v) {
                            if *m != 0.0 {
                                lhs += m * h(2.0 * vy - 1.0);
                            }
                        }
                        let mut rhs = h_k_unchecked(&scaled, vb, jf)
                            - scaled.at_one() * scaled.rate_at(1.0, jf);
                        if self.aug.in_cbar()[z] {
                            rhs += bar_b * scaled.rate_at(1.0, jf + 1.0);
                        }
                        let allow = 2.0
                            * self.tol.drift_slack
                            * (1.0 + lhs.abs())
                            * scaled.rate_at(1.0, jf + 1.0);
                        let r = CheckRow::new(
                            "transformed_drift_pair",
                            format!("({x},{x2}) k={ki} j={j}"),
                            lhs,
                            0.0,
                            rhs,
                            allow,
                        );
                        if worst_row.as_ref().is_none_or(|w| r.slack < w.slack) {
                            worst_row = Some(r);
                        }
                    }
                    rows.extend(worst_row);
                }
            }
        }
        Ok(rows)
    }
}

/// Inputs for the rescaled-drift corollary.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaleInput<'a> {
    pub seq: &'a KernelSequence,
    pub v_hat: &'a [f64],
    pub alpha: f64,
    pub beta: f64,
    pub small_set: &'a StateSet,
    pub eps_b: f64,
}

/// Rescales by `λ`, re-certifies, and checks the corollary on the result.
pub fn check_corollary_rescaled(
    input: &RescaleInput<'_>,
    lambda: f64,
    f: &[f64],
    xi: f64,
    tol: &Tolerances,
) -> Result<Vec<CheckRow>> {
    let rc = certify_rescaled(
        input.seq,
        input.v_hat,
        input.alpha,
        input.beta,
        input.small_set,
        lambda,
        input.eps_b,
        tol,
    )?;
    let ver = Verifier::new(rc.cert, *tol)?;
    ver.corollary_rows("corollary_rescaled", f, xi)
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        let row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let w = a[i * n + k];
            if w != 0.0 {
                for (o, v) in row.iter_mut().zip(&b[k * n..(k + 1) * n]) {
                    *o += w * v;
                }
            }
        }
    }
    out
}

/// `V̂^η` per state.
pub fn rescaled_v(v_hat: &[f64], eta: f64) -> Vec<f64> {
    v_hat.iter().map(|&x| powf(x, eta)).collect()
}
