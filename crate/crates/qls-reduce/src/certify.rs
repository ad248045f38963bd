//! Independent re-verification of a reduced model.

use nalgebra::DMatrix;
use qls_core::spectrum::{default_stability_margin, spectral_abscissa};
use qls_core::{PassiveResiduals, QuantumLinearSystem, Real, RealizabilityResiduals};
use qls_h2::{
    build_augmented, h2_norm_gramian, h2_norm_quadrature, h2_norm_system, H2Report,
    QuadratureEstimate,
};
use qls_linsolve::{gramians, solve_lyapunov};

use crate::options::ReduceOptions;
use crate::projection::{necessary_condition_residuals, NecessaryResiduals, ProjectionPair};

/// One pass/fail line of a validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Check {
            name,
            value,
            limit,
            pass: value <= limit,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResidualReport<T: Real> {
    pub realizability: RealizabilityResiduals<T>,
    pub passive: Option<PassiveResiduals<T>>,
    /// `‖B_r + C_rᵀ‖_F` before the passive structure was imposed.
    pub overwrite_delta: Option<T>,
    /// `max(1, ‖A_r‖_F, ‖B_r‖_F, ‖C_r‖_F, ‖D_r‖_F)`
    pub scale: T,
    pub abscissa: T,
    pub stability_margin: T,
    pub tv: Option<T>,
    pub intertwining: Option<T>,
    pub symmetry: Option<T>,
    pub necessary: Option<NecessaryResiduals<T>>,
}

#[derive(Debug, Clone)]
pub struct ValidationReport<T: Real> {
    pub residuals: ResidualReport<T>,
    pub h2: Option<H2Report<T>>,
    pub quadrature: Option<QuadratureEstimate>,
    /// Upper bound from an ε-strict observability inequality.
    pub gamma: Option<T>,
    pub checks: Vec<Check>,
}

impl<T: Real> ValidationReport<T> {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// `γ` with `γ² = tr(B̂ᵀQ̂B̂)` for `ÂᵀQ̂ + Q̂Â + ĈᵀĈ + δI = 0`. Since `Q̂`
/// dominates the observability Gramian, `γ` bounds the H2 error from above.
pub fn gamma_bound<T: Real>(
    full: &QuantumLinearSystem<T>,
    reduced: &QuantumLinearSystem<T>,
    eps: T,
) -> Option<T> {
    let aug = build_augmented(full, reduced).ok()?;
    let ctc = aug.c.transpose() * &aug.c;
    let dim = ctc.nrows();
    let delta = eps * T::one().max(ctc.norm());
    let q = solve_lyapunov(
        &aug.a.transpose(),
        &(ctc + DMatrix::identity(dim, dim) * delta),
    )
    .ok()?;
    Some(
        (aug.b.transpose() * q * &aug.b)
            .trace()
            .max(T::zero())
            .sqrt(),
    )
}

/// Recomputes every residual of a reduction from scratch. `projection` is
/// checked when given; `passive` switches on the passive structure checks.
pub fn validate_reduction<T: Real>(
    full: &QuantumLinearSystem<T>,
    reduced: &QuantumLinearSystem<T>,
    projection: Option<&ProjectionPair<T>>,
    passive: bool,
    overwrite_delta: Option<T>,
    opts: &ReduceOptions<T>,
) -> ValidationReport<T> {
    let scale = reduced.block_scale();
    let tol = opts.tol_real * scale;
    let realizability = reduced.realizability_residuals();
    let mut checks = vec![Check::at_most(
        "realizability",
        realizability.max().as_f64(),
        tol.as_f64(),
    )];
    let passive_res = if passive {
        reduced.passive_residuals().ok()
    } else {
        None
    };
    if passive {
        match passive_res {
            Some(p) => checks.push(Check::at_most("passivity", p.max().as_f64(), tol.as_f64())),
            None => checks.push(Check {
                name: "passivity",
                value: f64::INFINITY,
                limit: tol.as_f64(),
                pass: false,
            }),
        }
        if let Some(d) = overwrite_delta {
            checks.push(Check::at_most(
                "passive_overwrite",
                d.as_f64(),
                1e-5 * scale.as_f64(),
            ));
        }
        let dev =
            (reduced.d() - DMatrix::identity(reduced.d().nrows(), reduced.d().ncols())).amax();
        checks.push(Check::at_most("feedthrough_identity", dev.as_f64(), 0.0));
    }
    let d_dev = if full.d().shape() == reduced.d().shape() {
        (full.d() - reduced.d()).amax().as_f64()
    } else {
        f64::INFINITY
    };
    checks.push(Check::at_most("feedthrough", d_dev, 0.0));

    let abscissa = spectral_abscissa(reduced.a());
    let margin = default_stability_margin(reduced.a());
    checks.push(Check {
        name: "hurwitz",
        value: abscissa.as_f64(),
        limit: -margin.as_f64(),
        pass: abscissa < -margin,
    });

    let (mut tv, mut intertwining, mut symmetry) = (None, None, None);
    if let Some(p) = projection {
        let lim = opts.tol_projection.as_f64();
        tv = Some(p.tv_residual());
        checks.push(Check::at_most(
            "projection_tv",
            p.tv_residual().as_f64(),
            lim,
        ));
        intertwining = Some(p.intertwining_residual());
        checks.push(Check::at_most(
            "projection_intertwining",
            p.intertwining_residual().as_f64(),
            lim,
        ));
        if passive {
            symmetry = Some(p.symmetry_residual());
            checks.push(Check::at_most(
                "projection_symmetry",
                p.symmetry_residual().as_f64(),
                lim,
            ));
        }
    }

    let h2 = h2_norm_gramian(full, reduced).ok();
    let quadrature = h2.and_then(|_| h2_norm_quadrature(full, reduced, &opts.quadrature).ok());
    let gamma = h2.and_then(|_| gamma_bound(full, reduced, opts.eps));
    let necessary = h2.and_then(|_| {
        let aug = build_augmented(full, reduced).ok()?;
        let gb = gramians(&aug.a, &aug.b, &aug.c, aug.full_dim).ok()?;
        Some(necessary_condition_residuals(full, reduced, &gb))
    });
    match (h2, quadrature) {
        (Some(h), Some(q)) => {
            let floor = h2_norm_system(full).map(|r| r.norm.as_f64()).unwrap_or(1.0) * 1e-6;
            let g = h.norm.as_f64();
            let diff = (g - q.norm).abs();
            let rel = diff / g.max(q.norm).max(floor);
            checks.push(Check::at_most("h2_cross_check", rel, opts.quad_tol));
        }
        _ => checks.push(Check {
            name: "h2_cross_check",
            value: f64::INFINITY,
            limit: opts.quad_tol,
            pass: false,
        }),
    }
    match (h2, gamma) {
        (Some(h), Some(g)) => {
            let lim = g.as_f64() * (1.0 + 1e-6);
            checks.push(Check::at_most("gamma_bound", h.norm.as_f64(), lim));
        }
        _ => checks.push(Check {
            name: "gamma_bound",
            value: f64::INFINITY,
            limit: f64::NAN,
            pass: false,
        }),
    }

    ValidationReport {
        residuals: ResidualReport {
            realizability,
            passive: passive_res,
            overwrite_delta,
            scale,
            abscissa,
            stability_margin: margin,
            tv,
            intertwining,
            symmetry,
            necessary,
        },
        h2,
        quadrature,
        gamma,
        checks,
    }
}
