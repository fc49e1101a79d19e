//! Per-point evaluation of the requested analyses.

use std::time::Instant;

use projein::conformal::{
    compare_weyl, conformal_decompose, iota_checks, projective_cotractor, schouten_halving_check, MetricJets,
};
use projein::connection::{random_one_form, random_polynomial, DensityFrame, MetricSource};
use projein::einstein::{analyze_point, e_skew, verdict_from, PointAnalysis, CONNECTION_ORDER};
use projein::obstructions::{metric_symmetry_map, p_form, q_form, wedge_obstruction};
use projein::projective::{cotton, ProjectiveCurvature};
use projein::tractor::{
    einstein_submetric, submetric_derivative, tractor_commutator, tractor_curvature, TractorContext, TractorKind,
    TractorSection,
};
use projein::{Error, Jet, Rational, Scalar, Tensor, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::manifest::{Plan, Ring, TractorCheck};
use crate::report::*;
use crate::CliError;

/// Number of probe cotractors fed to the inclusion checks.
const PROBES: usize = 3;

fn max_value<F: Scalar>(ts: &[&Tensor<F>]) -> f64 {
    ts.iter().map(|t| t.max_abs_value()).fold(0.0, f64::max)
}

fn probe_rng(plan: &Plan, index: usize, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(plan.chart.seed ^ ((index as u64) << 32) ^ salt)
}

fn probe_tractor<F: Scalar>(rng: &mut ChaCha8Rng, p: &[F], order: usize) -> Result<TractorSection<F>, Error> {
    let n = p.len();
    let top = random_one_form(n, 2, rng).jet(p, order)?;
    let top = Tensor::from_data(n, vec![Var::Up], top.data().to_vec());
    let rho = random_polynomial(n, 2, rng).eval(p, order)?;
    TractorSection::new(TractorKind::Tractor, top, Tensor::scalar(rho))
}

fn probe_cotractors<F: Scalar>(rng: &mut ChaCha8Rng, p: &[F], order: usize) -> Result<Vec<TractorSection<F>>, Error> {
    let n = p.len();
    (0..PROBES)
        .map(|_| {
            let mu = random_one_form(n, 2, rng).jet(p, order)?;
            let sigma = random_polynomial(n, 2, rng).eval(p, order)?;
            projective_cotractor(mu, sigma)
        })
        .collect()
}

/// `λ` for the metric: declared, or `2J̃/n` at the point.
fn einstein_lambda<F: Scalar>(plan: &Plan, m: &MetricSource, p: &[F]) -> Result<(F, &'static str), Error> {
    if let Some(l) = &plan.lambda {
        return Ok((F::from_rational(l), "declared"));
    }
    let cc = conformal_decompose(&MetricJets::at(m, p, 2)?)?;
    let n = F::from_i64(p.len() as i64);
    Ok((cc.j.value().mul_ref(&F::from_i64(2)).div_ref(&n)?, "inferred"))
}

fn jet_order(plan: &Plan) -> usize {
    let a = &plan.manifest.analyses;
    if a.einstein_check.is_some() {
        CONNECTION_ORDER
    } else if a.tractor_verify.is_some() {
        3
    } else {
        2
    }
}

/// All requested analyses at one point.
pub fn evaluate_point<F: Scalar>(
    plan: &Plan,
    index: usize,
    p: &[F],
) -> Result<(PointReport, Option<PointAnalysis<F>>), Error> {
    let a = &plan.manifest.analyses;
    let tol = plan.tol;
    let order = jet_order(plan);
    let gamma = plan.field.christoffel_jet(p, order)?;
    let pc = ProjectiveCurvature::of_connection(&gamma)?;
    let c = cotton(&gamma, &pc.p)?;
    let scale = pc.r.max_abs_value().max(1.0);
    let mut out = PointReport {
        index,
        coordinates: p.iter().map(Value::of).collect(),
        invariants: None,
        chern: vec![],
        tractor: None,
        einstein: None,
        conformal: None,
        wedge: None,
    };

    if a.invariants {
        out.invariants = Some(InvariantsReport {
            weyl: TensorValue::of(&pc.w),
            schouten: TensorValue::of(&pc.p),
            beta: TensorValue::of(&pc.beta),
            cotton: TensorValue::of(&c),
            scale_connection: pc.beta.negligible(scale, tol),
        });
    }

    if !a.chern.is_empty() {
        let r0 = pc.r.truncate(0);
        let omega0 = tractor_curvature(&pc.w.truncate(0), &c.truncate(0))?;
        for &k in &a.chern {
            let pk = p_form(&r0, k)?;
            let qk = q_form(&omega0, k)?;
            let d = pk.sub(&qk)?;
            let s = scale.powi(k as i32);
            out.chern.push(ChernReport {
                k,
                p: FormValue::of(&pk),
                q: FormValue::of(&qk),
                p_equals_q: d.components.values().all(|j| j.value().negligible(s, tol)),
            });
        }
    }

    if let Some(check) = a.tractor_verify {
        let omega = tractor_curvature(&pc.w, &c)?;
        let n = plan.n();
        let omega_max = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .flat_map(|(i, j)| omega.get(i, j).iter().flatten().map(|x| x.value().magnitude()).collect::<Vec<_>>())
            .fold(0.0, f64::max);
        let ctx = TractorContext::new(&gamma, &DensityFrame::Coordinate)?;
        let s = probe_tractor(&mut probe_rng(plan, index, 1), p, order)?;
        let (top, bottom) = tractor_commutator(&s, &ctx)?;
        let (wt, wb) = omega.apply(&s)?;
        let dt = top.truncate(0).sub(&wt.truncate(0).with_weight(0))?;
        let db = bottom.truncate(0).sub(&wb.truncate(0).with_weight(0))?;
        let probe_scale = scale * max_value(&[&s.top, &s.bottom]).max(1.0);
        let submetric = match check {
            TractorCheck::Curvature => None,
            TractorCheck::Einstein => {
                let m = plan.metric().expect("checked when the plan was resolved");
                let (lambda, source) = einstein_lambda(plan, m, p)?;
                let lc = m.levi_civita(p, 3)?;
                let ctx = TractorContext::new(&lc, &DensityFrame::of_metric(m, p, 3)?)?;
                let h = einstein_submetric(&m.inverse_metric_jet(p, 3)?, &lambda)?;
                let dh = submetric_derivative(&h, &ctx)?;
                let lc_pc = ProjectiveCurvature::of_connection(&lc)?;
                let lc_omega = tractor_curvature(&lc_pc.w, &cotton(&lc, &lc_pc.p)?)?;
                let skew = lc_omega.skewness_residual(&h.matrix())?;
                let skew_vals: Vec<&Jet<F>> = skew.iter().flatten().flatten().collect();
                let lc_scale = lc_pc.r.max_abs_value().max(1.0);
                Some(SubMetricReport {
                    lambda: Value::of(&lambda),
                    lambda_source: source.into(),
                    derivative_max: max_value(&[&dh.dg, &dh.dv, &dh.dtau]),
                    parallel: dh.negligible(lc_scale, tol),
                    skewness_max: skew_vals.iter().map(|j| j.value().magnitude()).fold(0.0, f64::max),
                    skew: skew_vals.iter().all(|j| j.value().negligible(lc_scale, tol)),
                })
            }
        };
        out.tractor = Some(TractorReport {
            omega_max,
            annihilates_x: omega.annihilates_x(),
            commutator_residual: max_value(&[&dt, &db]),
            commutator_matches: dt.negligible(probe_scale, tol) && db.negligible(probe_scale, tol),
            submetric,
        });
    }

    let mut analysis = None;
    if let Some(strategy) = &plan.strategy {
        let pa = analyze_point(&gamma, strategy, tol)?;
        let n = plan.n() as i32;
        let values = match &pa.invariants {
            Ok(inv) => {
                let g_skew = inv.g.sub(&inv.g.permute(&[1, 0])?)?;
                Some(DetectorValues {
                    upsilon: TensorValue::of(&inv.upsilon),
                    g: TensorValue::of(&inv.g),
                    gamma: Value::of(inv.gamma.value()),
                    gamma_weight: -2 * (n + 1),
                    e: TensorValue::of(&inv.e),
                    e_max: inv.e.max_abs_value(),
                    e_skew_max: e_skew(&inv.e)?.max_abs_value(),
                    cotton_flat_max: inv.cotton_flat.max_abs_value(),
                    g_skew_max: g_skew.max_abs_value(),
                })
            }
            Err(_) => None,
        };
        out.einstein = Some(EinsteinPointReport {
            genericity: GenericityReport { rank: pa.genericity.rank, margin: pa.genericity.margin, ok: pa.genericity.ok },
            ricci_flat: pa.ricci_flat,
            projectively_flat: pa.projectively_flat,
            scale: pa.scale,
            values,
            failure: pa.invariants.as_ref().err().cloned(),
        });
        analysis = Some(pa);
    }

    if a.conformal_bridge {
        let m = plan.metric().expect("checked when the plan was resolved");
        let mj = MetricJets::at(m, p, 2)?;
        let cc = conformal_decompose(&mj)?;
        let (lambda, _) = einstein_lambda(plan, m, p)?;
        let (half, ein) = schouten_halving_check(&mj, Some(&lambda))?;
        let cotractors = probe_cotractors(&mut probe_rng(plan, index, 2), p, 2)?;
        let iota = iota_checks(&mj, &lambda, &cotractors)?;
        out.conformal = Some(ConformalReport {
            lambda: Value::of(&lambda),
            weyl_norm_sq: Value::of(cc.weyl_norm_sq()?.value()),
            compare_weyl_max: compare_weyl(&mj)?.max_abs_value(),
            schouten_halving_max: half.max_abs_value(),
            schouten_einstein_max: ein.map(|t| t.max_abs_value()).unwrap_or(0.0),
            iota_max: iota.max_abs(),
            dim4_identity_max: if plan.n() == 4 { Some(cc.dim4_identity_residual()?.max_abs_value()) } else { None },
        });
    }

    if a.wedge_obstruction {
        let map = metric_symmetry_map(&pc.w.truncate(0))?;
        let wo = wedge_obstruction(&map, tol)?;
        out.wedge = Some(WedgeReport {
            rows: wo.rows,
            cols: wo.cols,
            rank: wo.rank,
            gram_det: Value::of(&wo.gram_det),
            minors: wo.minors.as_ref().map(|m| m.iter().map(Value::of).collect()),
            vanishes: wo.vanishes,
        });
    }
    Ok((out, analysis))
}

fn lift(e: Error) -> CliError {
    match e {
        Error::Singular(m) => CliError::Evaluation(m),
        Error::Parse(_) | Error::UnknownBuiltin(_) | Error::Precondition(_) | Error::DimensionMismatch(_) => {
            CliError::Manifest(e.to_string())
        }
        other => CliError::Internal(other.to_string()),
    }
}

fn run_ring<F: Scalar>(plan: &Plan, timing: bool) -> Result<Report, CliError> {
    let start = Instant::now();
    let points: Vec<Vec<F>> = plan.points.iter().map(|p| p.iter().map(F::from_rational).collect()).collect();
    let results: Vec<_> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let t = Instant::now();
            let r = evaluate_point(plan, i, p).map_err(|e| match lift(e) {
                CliError::Evaluation(m) => CliError::Evaluation(format!("point {i}: {m}")),
                other => other,
            });
            (r, t.elapsed().as_secs_f64() * 1e3)
        })
        .collect();
    let mut reports = Vec::with_capacity(results.len());
    let mut analyses = Vec::new();
    let mut points_ms = Vec::new();
    for (r, ms) in results {
        let (rep, pa) = r?;
        reports.push(rep);
        analyses.extend(pa);
        points_ms.push(ms);
    }
    let verdict = plan.strategy.as_ref().map(|s| {
        let v = verdict_from(analyses, s.clone(), plan.tol);
        VerdictReport {
            strategy: v.strategy.name(),
            classification: v.classification.label().into(),
            reason: v.classification.reason().map(str::to_string),
            notes: v.notes,
        }
    });
    Ok(Report {
        tool: format!("projein {}", env!("CARGO_PKG_VERSION")),
        manifest: plan.manifest.clone(),
        dimension: plan.n(),
        ring: plan.ring,
        seed: plan.chart.seed,
        tolerance: plan.tol,
        points: reports,
        verdict,
        timing: timing.then(|| Timing { total_ms: start.elapsed().as_secs_f64() * 1e3, points_ms }),
    })
}

/// Evaluates a resolved plan on its ring.
pub fn run(plan: &Plan, timing: bool) -> Result<Report, CliError> {
    match plan.ring {
        Ring::Exact => run_ring::<Rational>(plan, timing),
        Ring::Float => run_ring::<f64>(plan, timing),
    }
}
