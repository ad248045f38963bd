use std::fmt::Write;

use qls_core::System;
use qls_reduce::ReductionResult;

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"))
}

/// Plain-text summary of a reduction. Rates are in Hz, frequencies in rad/s.
pub fn reduction_report(full: &System, r: &ReductionResult<f64>) -> String {
    let mut s = String::new();
    let v = &r.validation;
    let _ = writeln!(
        s,
        "reduced {} -> {} modes, method {}{}",
        full.n(),
        r.reduced.n(),
        r.trace.method.name(),
        if r.passive { ", passive" } else { "" }
    );
    let _ = writeln!(
        s,
        "H2 error        {} (squared {})",
        opt(r.h2_error),
        opt(r.h2_squared())
    );
    let _ = writeln!(s, "quadrature      {}", opt(v.quadrature.map(|q| q.norm)));
    let _ = writeln!(s, "gamma bound     {}", opt(r.gamma));
    let _ = writeln!(
        s,
        "certified       {}",
        if r.certified { "yes" } else { "NO" }
    );
    let _ = writeln!(s, "checks:");
    for c in &v.checks {
        let _ = writeln!(
            s,
            "  {:<24} {:>12.4e}  limit {:>11.4e}  {}",
            c.name,
            c.value,
            c.limit,
            if c.pass { "ok" } else { "FAIL" }
        );
    }
    if let Some(n) = &v.residuals.necessary {
        let _ = writeln!(
            s,
            "stationarity identities (relative): C {:.3e}  B {:.3e}  PQ {:.3e}",
            n.rel_c, n.rel_b, n.rel_pq
        );
    }
    let _ = writeln!(s, "spectral abscissa {:.6e} Hz", v.residuals.abscissa);
    let chosen = &r.trace.candidates[r.trace.chosen];
    let _ = writeln!(
        s,
        "start modes {:?} of {} candidates, {} refinement steps, {} ms",
        chosen.modes,
        r.trace.candidates.len(),
        chosen.refine_iterations,
        r.trace.elapsed_ms
    );
    s
}
