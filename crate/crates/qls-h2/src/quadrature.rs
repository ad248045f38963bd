//! Frequency-domain H2 oracle, independent of the Lyapunov route.

use nalgebra::{Complex, DMatrix};
use qls_core::spectrum::eigenvalues;
use qls_core::{QuantumLinearSystem, Real};

use crate::augmented::build_augmented;
use crate::error::H2Error;
use crate::transfer::transfer_eval_abcd;

/// Integration range and accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// The integration range runs from `min|λ| / span` to `max|λ| · span`.
    pub span: f64,
    /// Initial panels per decade before adaptive refinement.
    pub panels_per_decade: usize,
    /// Relative accuracy target of the adaptive Simpson rule.
    pub rel_tol: f64,
    /// Tail share above which the result is rejected.
    pub max_tail_share: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            span: 1e4,
            panels_per_decade: 8,
            rel_tol: 1e-8,
            max_tail_share: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    /// `‖·‖₂²` including tail corrections.
    pub squared: f64,
    pub norm: f64,
    /// Contribution of `[0, ω_lo]` and `[ω_hi, ∞)`.
    pub tail: f64,
    pub evaluations: usize,
}

struct Integrand<'a> {
    a: &'a DMatrix<f64>,
    b: &'a DMatrix<f64>,
    c: &'a DMatrix<f64>,
    calls: usize,
}

impl Integrand<'_> {
    /// `‖Ξ̂(jω)‖_F² · ω`, the integrand on the `ln ω` axis.
    fn log_axis(&mut self, u: f64) -> Result<f64, H2Error> {
        let w = u.exp();
        Ok(self.at(w)? * w)
    }

    fn at(&mut self, w: f64) -> Result<f64, H2Error> {
        self.calls += 1;
        let g = transfer_eval_abcd(self.a, self.b, self.c, None, Complex::new(0.0, w))?;
        Ok(g.iter().map(|z| z.norm_sqr()).sum())
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &mut Integrand,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64, H2Error> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let flm = f.log_axis(lm)?;
    let frm = f.log_axis(rm)?;
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// `‖Ξ_G − Ξ_{G_r}‖₂²` by adaptive Simpson on a log-frequency axis.
///
/// The integrand is even in ω, so `(1/2π)∫_ℝ = (1/π)∫_0^∞`. Panel edges are
/// placed at every pole modulus and resonance frequency so narrow peaks are not
/// stepped over. Below `ω_lo` the integrand is flat and contributes
/// `ω_lo·f(ω_lo)`; above `ω_hi` it decays like `ω⁻²` and contributes `ω_hi·f(ω_hi)`.
pub fn h2_squared_quadrature(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    spec: &QuadratureSpec,
) -> Result<QuadratureEstimate, H2Error> {
    let mut marks: Vec<f64> = Vec::new();
    for z in eigenvalues(a) {
        let modulus = z.re.hypot(z.im);
        if modulus > 0.0 {
            marks.push(modulus);
        }
        if z.im.abs() > 0.0 {
            marks.push(z.im.abs());
        }
    }
    if marks.is_empty() {
        marks.push(1.0);
    }
    let lo_ref = marks.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi_ref = marks.iter().cloned().fold(0.0, f64::max);
    let (w_lo, w_hi) = (lo_ref / spec.span, hi_ref * spec.span);
    let (u_lo, u_hi) = (w_lo.ln(), w_hi.ln());

    let decades = (w_hi / w_lo).log10();
    let panels = ((decades * spec.panels_per_decade as f64).ceil() as usize).max(2);
    let mut edges: Vec<f64> = (0..=panels)
        .map(|i| u_lo + (u_hi - u_lo) * i as f64 / panels as f64)
        .collect();
    edges.extend(marks.iter().map(|w| w.ln()));
    edges.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    edges.dedup_by(|x, y| (*x - *y).abs() < 1e-12);

    let mut f = Integrand { a, b, c, calls: 0 };
    let vals: Vec<f64> = edges
        .iter()
        .map(|&u| f.log_axis(u))
        .collect::<Result<_, _>>()?;
    let mut coarse = Vec::with_capacity(edges.len() - 1);
    let mut mids = Vec::with_capacity(edges.len() - 1);
    for k in 0..edges.len() - 1 {
        let m = 0.5 * (edges[k] + edges[k + 1]);
        let fm = f.log_axis(m)?;
        mids.push(fm);
        coarse.push(simpson(vals[k], fm, vals[k + 1], edges[k + 1] - edges[k]));
    }
    let rough: f64 = coarse.iter().map(|x| x.abs()).sum();
    let tol_total = spec.rel_tol * rough.max(f64::MIN_POSITIVE);
    let mut body = 0.0;
    for k in 0..edges.len() - 1 {
        let share = tol_total * (edges[k + 1] - edges[k]) / (u_hi - u_lo);
        body += adaptive(
            &mut f,
            edges[k],
            edges[k + 1],
            vals[k],
            mids[k],
            vals[k + 1],
            coarse[k],
            share,
            40,
        )?;
    }
    let tail = w_lo * f.at(w_lo)? + w_hi * f.at(w_hi)?;
    let squared = (body + tail) / std::f64::consts::PI;
    let tail = tail / std::f64::consts::PI;
    if squared > 0.0 && tail > spec.max_tail_share * squared {
        return Err(H2Error::NonConvergentTail {
            estimate: squared,
            tail,
        });
    }
    Ok(QuadratureEstimate {
        squared,
        norm: squared.max(0.0).sqrt(),
        tail,
        evaluations: f.calls,
    })
}

/// Quadrature oracle for `‖Ξ_G − Ξ_{G_r}‖₂`.
pub fn h2_norm_quadrature<T: Real>(
    full: &QuantumLinearSystem<T>,
    reduced: &QuantumLinearSystem<T>,
    spec: &QuadratureSpec,
) -> Result<QuadratureEstimate, H2Error> {
    let aug = build_augmented(&full.cast::<f64>(), &reduced.cast::<f64>())?;
    h2_squared_quadrature(&aug.a, &aug.b, &aug.c, spec)
}
