//! Byte-stable CSV and text renderings of harness results.
//!
//! Every function here is a pure `struct -> String` formatter: identical
//! inputs produce identical bytes (floats are written in shortest
//! round-trip form, nothing emits timestamps or machine state), so reruns
//! with the same config and seed diff clean. Column schemas are fixed by
//! the doc comment on each function.

use crate::density::Density;
use crate::invariant::{
    EquivalenceReport, LadderAssessment, LadderEntry, PullbackTrace, TraceDiagnostics, UIProfile,
};
use crate::io::fmt_f64;
use crate::lift::LiftReport;
use crate::met::{CoboundaryFit, MetReport};
use crate::transfer::fibered::DistortionReport;

/// Quote a CSV field if it holds a comma, quote, or newline (RFC 4180).
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fmt_mode(mode: &Option<crate::cesaro::CesaroMode>) -> String {
    match mode {
        Some(m) => m.to_string(),
        None => "none".to_string(),
    }
}

/// Condition table. Columns: `condition,verdict,residual,horizon,note`.
/// One row per equivalence condition, in canonical order.
pub fn conditions_csv(r: &EquivalenceReport) -> String {
    let mut out = String::from("condition,verdict,residual,horizon,note\n");
    for c in &r.conditions {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.id,
            c.verdict,
            fmt_f64(c.residual),
            c.horizon,
            csv_field(&c.note)
        ));
    }
    out
}

/// Construction agreement table. Columns:
/// `fiber,first,second,l1_distance` — pairwise L¹ distances between the
/// certified constructions of the invariant density at each audited fiber.
pub fn consistency_csv(r: &EquivalenceReport) -> String {
    let mut out = String::from("fiber,first,second,l1_distance\n");
    for e in &r.consistency {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.fiber,
            e.first,
            e.second,
            fmt_f64(e.distance)
        ));
    }
    out
}

/// Human-readable audit summary ending in a `status:` line.
pub fn equivalence_summary(r: &EquivalenceReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "equivalence audit over {} fiber(s), tolerance {}\n",
        r.fibers.len(),
        fmt_f64(r.tol)
    ));
    for c in &r.conditions {
        out.push_str(&format!(
            "  {:<28} {:<24} residual {}\n",
            c.id.to_string(),
            c.verdict.to_string(),
            fmt_f64(c.residual)
        ));
        if !c.note.is_empty() {
            out.push_str(&format!("  {:<28} note: {}\n", "", c.note));
        }
    }
    if r.consistency.is_empty() {
        out.push_str("no pair of constructions was certified; nothing to cross-check\n");
    } else {
        out.push_str(&format!(
            "constructions agree within {} over {} comparison(s)\n",
            fmt_f64(r.max_pairwise),
            r.consistency.len()
        ));
    }
    out.push_str(if r.contradiction {
        "CONTRADICTION: certified outcomes disagree\n"
    } else {
        "no contradiction among certified outcomes\n"
    });
    out.push_str(&format!("status: {}\n", report_status(r)));
    out
}

/// Overall status token for an equivalence report: `fail` on any failed
/// condition or a contradiction, `all-pass` when every condition passed,
/// `inconclusive` otherwise.
pub fn report_status(r: &EquivalenceReport) -> &'static str {
    if r.contradiction || r.any_fail() {
        "fail"
    } else if r.all_pass() {
        "all-pass"
    } else {
        "inconclusive"
    }
}

/// Pullback trace table. Columns: `n,l1_norm,max_value,cesaro_delta` —
/// per-depth L¹ norm and largest cell value of the pullback iterate, and
/// the L¹ step `‖A_{n+1} − A_n‖₁` between consecutive running averages
/// (empty for the first row).
pub fn trace_csv(trace: &PullbackTrace) -> String {
    let mut csv = TraceCsv::new();
    for term in &trace.iterates {
        csv.push(term);
    }
    csv.finish()
}

/// Streaming builder for the pullback trace table: push iterates one at a
/// time (row `n` is the `n`-th pushed density), never holding the trace.
/// Produces the same bytes as [`trace_csv`] over the recorded iterates.
#[derive(Debug, Clone)]
pub struct TraceCsv {
    out: String,
    average: Vec<f64>,
    rows: usize,
}

impl TraceCsv {
    pub fn new() -> Self {
        TraceCsv {
            out: String::from("n,l1_norm,max_value,cesaro_delta\n"),
            average: Vec::new(),
            rows: 0,
        }
    }

    /// Append the row for the next iterate.
    pub fn push(&mut self, term: &Density) {
        let n = self.rows;
        let masses = term.masses();
        let l1: f64 = masses.iter().map(|x| x.abs()).sum();
        let max = masses.iter().cloned().fold(0.0_f64, f64::max);
        let delta = if n == 0 {
            self.average = masses.as_slice().to_vec();
            String::new()
        } else {
            // A_{n+1} = (n·A_n + term) / (n+1), computed incrementally.
            let mut step = 0.0;
            for (a, &x) in self.average.iter_mut().zip(masses.iter()) {
                let next = (*a * n as f64 + x) / (n as f64 + 1.0);
                step += (next - *a).abs();
                *a = next;
            }
            fmt_f64(step)
        };
        self.out
            .push_str(&format!("{},{},{},{}\n", n, fmt_f64(l1), fmt_f64(max), delta));
        self.rows += 1;
    }

    pub fn finish(self) -> String {
        self.out
    }
}

impl Default for TraceCsv {
    fn default() -> Self {
        Self::new()
    }
}

/// Uniform-integrability profile table. Columns: `delta,phi` — the largest
/// mass any traced density places on a set of measure `delta`.
pub fn ui_profile_csv(p: &UIProfile) -> String {
    let mut out = String::from("delta,phi\n");
    for (d, phi) in p.deltas.iter().zip(p.phis.iter()) {
        out.push_str(&format!("{},{}\n", fmt_f64(*d), fmt_f64(*phi)));
    }
    out
}

/// Trace diagnostics in key-value form. Columns: `quantity,value` with
/// rows `envelope_mass`, `lp_sup`, `lp_exponent`, `ui_max_value`,
/// `ui_count`.
pub fn diagnostics_csv(d: &TraceDiagnostics) -> String {
    let mut out = String::from("quantity,value\n");
    out.push_str(&format!("envelope_mass,{}\n", fmt_f64(d.envelope_mass)));
    out.push_str(&format!("lp_sup,{}\n", fmt_f64(d.lp_sup)));
    out.push_str(&format!("lp_exponent,{}\n", fmt_f64(d.lp_exponent)));
    out.push_str(&format!("ui_max_value,{}\n", fmt_f64(d.ui.max_value)));
    out.push_str(&format!("ui_count,{}\n", d.ui.count));
    out
}

/// Merged resolution-ladder table. Columns:
/// `resolution,phi,lp_sup,envelope_mass` — headline concentration numbers
/// per rung, ascending resolution.
pub fn ladder_csv(entries: &[LadderEntry]) -> String {
    let mut out = String::from("resolution,phi,lp_sup,envelope_mass\n");
    for e in entries {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.resolution,
            fmt_f64(e.phi),
            fmt_f64(e.lp_sup),
            fmt_f64(e.envelope_mass)
        ));
    }
    out
}

/// Human-readable ladder verdict block.
pub fn ladder_summary(a: &LadderAssessment) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "resolution ladder: phi({}) {} across rungs, final value {} (threshold {})\n",
        fmt_f64(a.delta),
        if a.nondecreasing {
            "is nondecreasing"
        } else {
            "decreases"
        },
        fmt_f64(a.final_phi),
        fmt_f64(a.threshold)
    ));
    out.push_str(&format!("ladder verdict: {}\n", a.verdict));
    if !a.note.is_empty() {
        out.push_str(&format!("  note: {}\n", a.note));
    }
    out
}

/// Product-space report in key-value form. Columns: `quantity,value`.
/// Rows cover the fixed point's residual and provenance, per-fiber mass,
/// equivariance, the averaged-projector certificate, and the support sweep.
pub fn lift_csv(r: &LiftReport) -> String {
    let mut out = String::from("quantity,value\n");
    out.push_str(&format!("fibers,{}\n", r.n_fibers));
    out.push_str(&format!("fiber_dim,{}\n", r.dim));
    out.push_str(&format!("fixed_residual,{}\n", fmt_f64(r.fixed_residual)));
    out.push_str(&format!("cesaro_steps,{}\n", r.cesaro_steps));
    out.push_str(&format!("cesaro_converged,{}\n", r.cesaro_converged));
    out.push_str(&format!(
        "cesaro_certificate,{}\n",
        fmt_f64(r.cesaro_certificate)
    ));
    out.push_str(&format!("cesaro_mode,{}\n", fmt_mode(&r.cesaro_mode)));
    out.push_str(&format!("polish_steps,{}\n", r.polish_steps));
    out.push_str(&format!(
        "fiber_mass_deviation,{}\n",
        fmt_f64(r.fiber_mass_deviation)
    ));
    out.push_str(&format!("equivariance,{}\n", fmt_f64(r.equivariance)));
    out.push_str(&format!(
        "mean_ergodic_defect,{}\n",
        fmt_f64(r.mean_ergodic.defect)
    ));
    out.push_str(&format!(
        "mean_ergodic_idempotency,{}\n",
        fmt_f64(r.mean_ergodic.idempotency_defect)
    ));
    out.push_str(&format!("mean_ergodic_steps,{}\n", r.mean_ergodic.steps));
    out.push_str(&format!(
        "mean_ergodic_converged,{}\n",
        r.mean_ergodic.converged
    ));
    out.push_str(&format!(
        "mean_ergodic_via_probes,{}\n",
        r.mean_ergodic.via_probes
    ));
    out.push_str(&format!("mean_ergodic_skipped,{}\n", r.mean_ergodic.skipped));
    out.push_str(&format!(
        "support_sweep_trivial,{}\n",
        r.support_sweep.trivial
    ));
    out.push_str(&format!(
        "support_sweep_monotone,{}\n",
        r.support_sweep.monotone
    ));
    out.push_str(&format!(
        "support_sweep_reached_one,{}\n",
        r.support_sweep.reached_one
    ));
    out.push_str(&format!(
        "support_sweep_stalled,{}\n",
        r.support_sweep.stalled
    ));
    out.push_str(&format!(
        "support_sweep_min_final,{}\n",
        fmt_f64(r.support_sweep.min_final)
    ));
    out.push_str(&format!("support_sweep_steps,{}\n", r.support_sweep.steps));
    out
}

/// Fixed-point fiber table. Columns: `fiber,cell,mass` — the invariant
/// family recovered from the product-space fixed point, fiber by fiber.
pub fn lift_fixed_point_csv(r: &LiftReport) -> String {
    let mut out = String::from("fiber,cell,mass\n");
    for (w, f) in r.fixed_point.fibers() {
        for (i, &m) in f.masses().iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", w, i, fmt_f64(m)));
        }
    }
    out
}

/// Human-readable product-space summary ending in a `status:` line.
pub fn lift_summary(r: &LiftReport, status: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "product-space consistency over {} fiber(s) of dimension {}\n",
        r.n_fibers, r.dim
    ));
    out.push_str(&format!(
        "fixed point: residual {}, {} averaging step(s) ({}), {} polish step(s)\n",
        fmt_f64(r.fixed_residual),
        r.cesaro_steps,
        fmt_mode(&r.cesaro_mode),
        r.polish_steps
    ));
    out.push_str(&format!(
        "fiber masses deviate from uniform by {}\n",
        fmt_f64(r.fiber_mass_deviation)
    ));
    out.push_str(&format!(
        "one-step equivariance defect {}\n",
        fmt_f64(r.equivariance)
    ));
    if r.mean_ergodic.skipped {
        out.push_str("averaged projector: skipped (dimension above the certificate cap)\n");
    } else if r.mean_ergodic.via_probes {
        out.push_str(&format!(
            "averaged projector (probe route, {} probe(s)): defect {}\n",
            r.mean_ergodic.probe_count,
            fmt_f64(r.mean_ergodic.defect)
        ));
    } else {
        out.push_str(&format!(
            "averaged projector: defect {}, idempotency {}\n",
            fmt_f64(r.mean_ergodic.defect),
            fmt_f64(r.mean_ergodic.idempotency_defect)
        ));
    }
    let sweep = &r.support_sweep;
    if sweep.trivial {
        out.push_str(
            "support sweep: trivially satisfied (the fixed point is strictly positive)\n",
        );
    } else {
        out.push_str(&format!(
            "support sweep: monotone {}, reached one {}, stalled {}, floor {}\n",
            sweep.monotone,
            sweep.reached_one,
            sweep.stalled,
            fmt_f64(sweep.min_final)
        ));
    }
    out.push_str(&format!("status: {status}\n"));
    out
}

/// Skew-vs-block agreement table. Columns: `resolution,max_deviation` —
/// the largest entrywise difference between the product-cell
/// discretization and the block assembly, per resolution.
pub fn skew_csv(rows: &[(usize, f64)]) -> String {
    let mut out = String::from("resolution,max_deviation\n");
    for (d, dev) in rows {
        out.push_str(&format!("{},{}\n", d, fmt_f64(*dev)));
    }
    out
}

/// Human-readable skew-agreement summary ending in a `status:` line.
pub fn skew_summary(rows: &[(usize, f64)], tol: f64, status: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "product-cell discretization vs block assembly at {} resolution(s), tolerance {}\n",
        rows.len(),
        fmt_f64(tol)
    ));
    for (d, dev) in rows {
        out.push_str(&format!("  resolution {:<6} max deviation {}\n", d, fmt_f64(*dev)));
    }
    out.push_str(&format!("status: {status}\n"));
    out
}

/// Averaged-iterate report. Columns: `fiber,steps,converged,mode,certificate`
/// — one row per cycle fiber's averaging run.
pub fn met_fibers_csv(r: &MetReport) -> String {
    let mut out = String::from("fiber,steps,converged,mode,certificate\n");
    for w in 0..r.fiber_limits.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            w,
            r.limit_steps[w],
            r.limit_modes[w].is_some(),
            fmt_mode(&r.limit_modes[w]),
            fmt_f64(r.limit_certificates[w])
        ));
    }
    out
}

/// Identity table for the averaged-iterate report. Columns:
/// `quantity,value` with rows for the telescoping identity, the averaged
/// bound margin, commutation, and the limit family's equivariance.
pub fn met_identities_csv(r: &MetReport) -> String {
    let mut out = String::from("quantity,value\n");
    out.push_str(&format!("span,{}\n", r.span));
    out.push_str(&format!(
        "telescoping_identity,{}\n",
        fmt_f64(r.telescoping_identity)
    ));
    out.push_str(&format!(
        "telescope_bound_margin,{}\n",
        fmt_f64(r.telescope_bound_margin)
    ));
    out.push_str(&format!("telescope_bound_ok,{}\n", r.telescope_bound_ok));
    out.push_str(&format!("commutation,{}\n", fmt_f64(r.commutation)));
    out.push_str(&format!("equivariance,{}\n", fmt_f64(r.equivariance)));
    out.push_str(&format!("limits_converged,{}\n", r.limits_converged));
    out
}

/// Gauge-fit table. Columns: `epsilon,remainder_norm,pass` — the
/// base-averaged remainder of the gauge split against each target level.
pub fn coboundary_csv(fit: &CoboundaryFit, epsilons: &[f64]) -> String {
    let mut out = String::from("epsilon,remainder_norm,pass\n");
    for &eps in epsilons {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(eps),
            fmt_f64(fit.remainder_norm),
            fit.remainder_norm < eps
        ));
    }
    out
}

/// Human-readable averaged-iterate summary ending in a `status:` line.
pub fn met_summary(
    r: &MetReport,
    fit: Option<&CoboundaryFit>,
    epsilons: &[f64],
    status: &str,
) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "averaged-iterate identities over {} fiber(s), spans up to {}\n",
        r.fiber_limits.len(),
        r.span
    ));
    out.push_str(&format!(
        "telescoping identity defect {} (pure algebra)\n",
        fmt_f64(r.telescoping_identity)
    ));
    out.push_str(&format!(
        "averaged bound margin {} ({})\n",
        fmt_f64(r.telescope_bound_margin),
        if r.telescope_bound_ok { "held" } else { "violated" }
    ));
    out.push_str(&format!(
        "average/operator commutation defect {}\n",
        fmt_f64(r.commutation)
    ));
    out.push_str(&format!(
        "limit family: converged {}, equivariance defect {}\n",
        r.limits_converged,
        fmt_f64(r.equivariance)
    ));
    if let Some(fit) = fit {
        out.push_str(&format!(
            "gauge split: remainder {}, gauge norm {}, reconstruction defect {}\n",
            fmt_f64(fit.remainder_norm),
            fmt_f64(fit.gauge_norm),
            fmt_f64(fit.reconstruction)
        ));
        for &eps in epsilons {
            out.push_str(&format!(
                "  remainder {} target {}\n",
                if fit.remainder_norm < eps { "beats" } else { "misses" },
                fmt_f64(eps)
            ));
        }
    }
    out.push_str(&format!("status: {status}\n"));
    out
}

/// Cylinder-depth table. Columns:
/// `depth,cylinders,distortion,min_image_measure,max_diameter,inverse_bound_violations`.
pub fn fibered_depths_csv(r: &DistortionReport) -> String {
    let mut out = String::from(
        "depth,cylinders,distortion,min_image_measure,max_diameter,inverse_bound_violations\n",
    );
    for d in &r.per_depth {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            d.depth,
            d.cylinder_count,
            fmt_f64(d.distortion),
            fmt_f64(d.min_image_measure),
            fmt_f64(d.max_diameter),
            d.inverse_bound_violations
        ));
    }
    out
}

/// Small-set certificate table. Columns:
/// `epsilon,delta,sets_tested,worst_pullback_mass,pass`.
pub fn fibered_small_sets_csv(r: &DistortionReport) -> String {
    let mut out = String::from("epsilon,delta,sets_tested,worst_pullback_mass,pass\n");
    for s in &r.small_set_checks {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(s.epsilon),
            fmt_f64(s.delta),
            s.sets_tested,
            fmt_f64(s.worst_pullback_mass),
            s.pass
        ));
    }
    out
}

/// Human-readable distortion-certificate summary ending in a `status:` line.
pub fn fibered_summary(r: &DistortionReport, status: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "distortion certificate to depth {} ({} cylinder(s) enumerated)\n",
        r.options.depth, r.cylinders_enumerated
    ));
    out.push_str(&format!(
        "common refinement: {} cell(s), invertible on every branch: {}\n",
        r.common_partition_size, r.partition_invertible
    ));
    out.push_str(&format!(
        "max distortion {} (cap {}): {}\n",
        fmt_f64(r.max_distortion),
        fmt_f64(r.options.distortion_cap),
        if r.distortion_pass { "within cap" } else { "EXCEEDS CAP" }
    ));
    out.push_str(&format!(
        "min image measure {} (floor {}): {}\n",
        fmt_f64(r.min_image_measure),
        fmt_f64(r.options.image_floor),
        if r.image_floor_pass { "above floor" } else { "BELOW FLOOR" }
    ));
    out.push_str(&format!(
        "inverse-derivative bound: {}\n",
        if r.generator_proxy_pass { "held on every cylinder" } else { "VIOLATED" }
    ));
    for s in &r.small_set_checks {
        out.push_str(&format!(
            "small sets at epsilon {}: delta {}, {} set(s), worst pullback mass {}: {}\n",
            fmt_f64(s.epsilon),
            fmt_f64(s.delta),
            s.sets_tested,
            fmt_f64(s.worst_pullback_mass),
            if s.pass { "pass" } else { "FAIL" }
        ));
    }
    out.push_str(&format!("status: {status}\n"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Density;
    use crate::invariant::{
        precompactness_diagnostics, pullback_sequence, DiagnosticsOptions, VerifyOptions,
        verify_equivalences,
    };
    use crate::testutil::period2;

    #[test]
    fn csv_fields_are_quoted_when_needed() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn condition_tables_are_byte_stable() {
        let c = period2();
        let opts = VerifyOptions::new(1e-10);
        let r1 = verify_equivalences(&c, &opts).unwrap();
        let r2 = verify_equivalences(&c, &opts).unwrap();
        assert_eq!(conditions_csv(&r1), conditions_csv(&r2));
        assert_eq!(consistency_csv(&r1), consistency_csv(&r2));
        assert_eq!(equivalence_summary(&r1), equivalence_summary(&r2));
        assert!(conditions_csv(&r1).starts_with("condition,verdict,residual,horizon,note\n"));
        assert_eq!(report_status(&r1), "all-pass");
        assert!(equivalence_summary(&r1).ends_with("status: all-pass\n"));
        // 7 condition rows + header
        assert_eq!(conditions_csv(&r1).lines().count(), 8);
    }

    #[test]
    fn trace_csv_reports_cesaro_deltas() {
        let c = period2();
        let seed = Density::point_mass(0, crate::density::Weights::uniform(2).unwrap()).unwrap();
        let trace = pullback_sequence(&c, 0, &seed, 8).unwrap();
        let csv = trace_csv(&trace);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,l1_norm,max_value,cesaro_delta");
        assert_eq!(lines.len(), 1 + 9, "seed plus 8 pullback terms");
        // Row 0 has no Cesàro delta; every pullback of a density keeps mass 1.
        assert!(lines[1].starts_with("0,1,"));
        assert!(lines[1].ends_with(','));
        assert!(lines[2].starts_with("1,1,"));
        let diag = precompactness_diagnostics(&trace, &DiagnosticsOptions::default()).unwrap();
        let ui = ui_profile_csv(&diag.ui);
        assert!(ui.starts_with("delta,phi\n"));
        assert_eq!(ui.lines().count(), 1 + diag.ui.deltas.len());
        let dg = diagnostics_csv(&diag);
        assert!(dg.contains("envelope_mass,"));
        assert!(dg.contains("lp_exponent,2\n"));
    }
}
