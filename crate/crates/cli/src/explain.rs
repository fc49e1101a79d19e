//! Human-readable summary of a report.

use std::fmt::Write;

use crate::report::Report;

/// The criterion behind a classification, in words.
pub fn criterion(classification: &str, reason: Option<&str>) -> String {
    let reason = reason.unwrap_or("");
    match classification {
        "EINSTEIN_NONZERO" => {
            "E = 0, G symmetric and γ ≠ 0 at every point ⇒ the class contains the Levi-Civita connection of an \
             Einstein metric with nonzero scalar curvature, proportional to G"
                .into()
        }
        "PROJECTIVELY_RICCI_FLAT" if reason.is_empty() => {
            "G = 0 at every point ⇒ the class contains a Ricci-flat connection".into()
        }
        "NOT_EINSTEIN" if reason.starts_with("2E_[ij]k") => {
            "2E_[ij]k ≠ 0 ⇒ no Cotton-flat connection in class, so no Einstein connection".into()
        }
        "NOT_EINSTEIN" if reason.starts_with("G_[ij]") => {
            "G_[ij] ≠ 0 ⇒ the only candidate connection has non-symmetric Ricci tensor, so it is not Levi-Civita".into()
        }
        "NOT_EINSTEIN" if reason.starts_with("E_ijk") => {
            "E ≠ 0 ⇒ the candidate connection's Schouten tensor is not parallel, so it is not Einstein".into()
        }
        "NOT_EINSTEIN" if reason.starts_with("γ = 0") => "γ = 0 ⇒ G is degenerate and defines no metric".into(),
        "INCONCLUSIVE" => format!("the detector does not apply: {reason}"),
        other => format!("{other}: {reason}"),
    }
}

pub fn explain(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} on n = {}, {} ring, seed {}, {} points", r.tool, r.dimension, ring_name(r), r.seed, r.points.len());
    if let Some(v) = &r.verdict {
        let _ = writeln!(s, "verdict: {} ({})", v.classification, v.strategy);
        let witness = v.classification == "PROJECTIVELY_RICCI_FLAT" && v.notes.iter().any(|n| n.contains("Ricci-flat"));
        let fired = if witness {
            "the input connection is itself Ricci-flat (whole Ricci jet vanishes)".to_string()
        } else {
            criterion(&v.classification, v.reason.as_deref())
        };
        let _ = writeln!(s, "criterion: {fired}");
        for n in &v.notes {
            let _ = writeln!(s, "note: {n}");
        }
    } else {
        let _ = writeln!(s, "verdict: not requested");
    }
    for p in &r.points {
        let coords: Vec<String> = p
            .coordinates
            .iter()
            .map(|v| match v {
                crate::report::Value::Exact(q) => q.trim_end_matches("/1").to_string(),
                crate::report::Value::Float(x) => x.to_string(),
            })
            .collect();
        let _ = writeln!(s, "point {} ({})", p.index, coords.join(", "));
        if let Some(i) = &p.invariants {
            let _ = writeln!(
                s,
                "  |W| = {:.3e}  |P| = {:.3e}  |C| = {:.3e}  scale connection: {}",
                i.weyl.max_abs(),
                i.schouten.max_abs(),
                i.cotton.max_abs(),
                i.scale_connection
            );
        }
        for c in &p.chern {
            let _ = writeln!(s, "  |p_{}| = {:.3e}  |q_{}| = {:.3e}  p = q: {}", c.k, c.p.max_abs(), c.k, c.q.max_abs(), c.p_equals_q);
        }
        if let Some(t) = &p.tractor {
            let _ = writeln!(
                s,
                "  |Ω| = {:.3e}  Ω·X = 0: {}  commutator = Ω: {} (residual {:.3e})",
                t.omega_max, t.annihilates_x, t.commutator_matches, t.commutator_residual
            );
            if let Some(h) = &t.submetric {
                let _ = writeln!(
                    s,
                    "  Einstein sub-metric (λ {}): parallel {} (|∇h| = {:.3e}), skew {} ({:.3e})",
                    h.lambda_source, h.parallel, h.derivative_max, h.skew, h.skewness_max
                );
            }
        }
        if let Some(e) = &p.einstein {
            let _ = writeln!(
                s,
                "  genericity rank {} margin {:.3e} ({}), ricci-flat {}, |R| = {:.3e}",
                e.genericity.rank,
                e.genericity.margin,
                if e.genericity.ok { "ok" } else { "fails" },
                e.ricci_flat,
                e.scale
            );
            if let Some(v) = &e.values {
                let _ = writeln!(
                    s,
                    "  |G| = {:.3e}  |G_[ij]| = {:.3e}  |E| = {:.3e}  |2E_[ij]k| = {:.3e}  γ = {:.6e}",
                    v.g.max_abs(),
                    v.g_skew_max,
                    v.e_max,
                    v.e_skew_max,
                    v.gamma.to_f64()
                );
            }
            if let Some(f) = &e.failure {
                let _ = writeln!(s, "  detector: {f}");
            }
        }
        if let Some(c) = &p.conformal {
            let _ = writeln!(
                s,
                "  conformal: |W̃ − W| = {:.3e}  halving {:.3e}  Einstein {:.3e}  ι {:.3e}{}",
                c.compare_weyl_max,
                c.schouten_halving_max,
                c.schouten_einstein_max,
                c.iota_max,
                c.dim4_identity_max.map(|d| format!("  dim-4 identity {d:.3e}")).unwrap_or_default()
            );
        }
        if let Some(w) = &p.wedge {
            let _ = writeln!(
                s,
                "  wedge obstruction {}×{}: rank {}, Gram determinant {:.6e}, vanishes {}",
                w.rows,
                w.cols,
                w.rank,
                w.gram_det.to_f64(),
                w.vanishes
            );
        }
    }
    s
}

fn ring_name(r: &Report) -> &'static str {
    match r.ring {
        crate::manifest::Ring::Exact => "exact",
        crate::manifest::Ring::Float => "float",
    }
}
