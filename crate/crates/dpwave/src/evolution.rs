//! Pseudo-spectral time evolution on the circle and the linearized flow
//! around the solitary wave.
//!
//! The equation is advanced in the nonlocal form
//!
//! ```text
//! u_t = -J(½u² + 2k(4-∂²)⁻¹u),    J = ∂_x(4-∂²)(1-∂²)⁻¹,
//! ```
//!
//! with `J` and `(4-∂²)⁻¹` applied as exact Fourier multipliers and the
//! square formed pointwise. An equivalent "momentum" form routes the
//! nonlinearity through `m = (1-∂²)u` and the identity
//! `3mu_x + um_x = (4-∂²)∂_x(½u²)`; the two right-hand sides agree to
//! roundoff on band-limited data, which pins the multiplier bookkeeping.
//!
//! Time stepping is classical fourth-order Runge–Kutta with a fixed step.
//! The quadratic term is dealiased by the 2/3 rule (truncation of the
//! product spectrum, with the state itself truncated once at start-up so
//! it stays band-limited). Dealiasing can be switched off to expose the
//! aliasing contribution to the conserved-quantity drift: with it off, the
//! drift of H and S grows measurably faster once the solution develops
//! spectral content near the grid cutoff; the comparison is a useful
//! resolution diagnostic.
//!
//! Every accepted step records the conserved triple `(M, H, S)`; the run
//! halts with a partial trajectory and an explanatory reason if the field
//! magnitude explodes, loses finiteness, or the drift leaves any plausible
//! resolution regime. A CFL-style guard `C = |dt|·max|u|/h ≤ limit`
//! rejects reckless steps up front.
//!
//! The linearized flow `v_t = J L_c v` is the exact moving-frame
//! linearization around the wave: by the multiplier identity
//! `J(1-3(4-∂²)⁻¹) = ∂_ξ`, expanding `J L_c v` reproduces
//! `c v_ξ - J(φv + 2k(4-∂²)⁻¹v)` term by term. Its generator is assembled
//! densely by [`jlc_matrix_spectrum`] to certify that the discrete
//! spectrum sits on the imaginary axis (no exponential instability) and
//! exhibits the fourfold symmetry `λ ↔ -λ ↔ λ̄` forced by the
//! antisymmetric/symmetric factorization.

use crate::error::{DpError, Result};
use crate::functionals::{conserved_triple_periodic, ConservedTriple};
use crate::grid::PeriodicField;
use crate::operators::{apply_lc_periodic, PeriodicOps, Symbol};
use crate::profile::SolitonProfile;
use crate::wave::WaveParams;
use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

/// Relative drift past which a run is declared unresolved and halted.
const DRIFT_KILL: f64 = 1e-3;

/// Right-hand side `u_t = -J(½u² + 2k(4-∂²)⁻¹u)`.
pub fn dp_rhs(
    u: &PeriodicField,
    params: WaveParams,
    ops: &PeriodicOps,
    dealias: bool,
) -> Result<PeriodicField> {
    let w = ops.apply(u, Symbol::InvHelmholtz4)?;
    let square = PeriodicField::new(
        u.period(),
        u.samples().iter().map(|v| 0.5 * v * v).collect(),
    )?;
    let square = if dealias {
        ops.dealias_23(&square)?
    } else {
        square
    };
    let two_k = 2.0 * params.k();
    let argument = PeriodicField::new(
        u.period(),
        square
            .samples()
            .iter()
            .zip(w.samples())
            .map(|(q, wi)| q + two_k * wi)
            .collect(),
    )?;
    let mut out = ops.apply(&argument, Symbol::SkewJ)?;
    for v in out.samples_mut() {
        *v = -*v;
    }
    Ok(out)
}

/// The same right-hand side routed through `m = (1-∂²)u`:
/// `u_t = -(1-∂²)⁻¹(2k u_x + 3m u_x + u m_x)`.
pub fn dp_rhs_m_form(
    u: &PeriodicField,
    params: WaveParams,
    ops: &PeriodicOps,
    dealias: bool,
) -> Result<PeriodicField> {
    let ux = ops.apply(u, Symbol::Derivative)?;
    let m = ops.apply(u, Symbol::HelmholtzOne)?;
    let mx = ops.apply(&m, Symbol::Derivative)?;
    let quadratic = PeriodicField::new(
        u.period(),
        (0..u.len())
            .map(|i| 3.0 * m.samples()[i] * ux.samples()[i] + u.samples()[i] * mx.samples()[i])
            .collect(),
    )?;
    let quadratic = if dealias {
        ops.dealias_23(&quadratic)?
    } else {
        quadratic
    };
    let two_k = 2.0 * params.k();
    let total = PeriodicField::new(
        u.period(),
        quadratic
            .samples()
            .iter()
            .zip(ux.samples())
            .map(|(q, di)| q + two_k * di)
            .collect(),
    )?;
    let mut out = ops.apply(&total, Symbol::InvHelmholtz1)?;
    for v in out.samples_mut() {
        *v = -*v;
    }
    Ok(out)
}

/// Fixed-step run configuration; `dt` may be negative to integrate
/// backward (`t_end` must carry the same sign).
#[derive(Debug, Clone, Copy)]
pub struct EvolutionRun {
    /// Signed time step.
    pub dt: f64,
    /// Target time; the run takes `round(t_end/dt)` steps.
    pub t_end: f64,
    /// Steps between stored snapshots (0 = endpoints only).
    pub snapshot_stride: usize,
    /// Apply the 2/3 rule to the quadratic term.
    pub dealias: bool,
    /// Largest admissible `C = |dt|·max|u₀|/h`.
    pub cfl_limit: f64,
    /// Sup-norm growth factor that declares blow-up.
    pub blowup_factor: f64,
}

impl Default for EvolutionRun {
    fn default() -> Self {
        EvolutionRun {
            dt: 0.01,
            t_end: 10.0,
            snapshot_stride: 0,
            dealias: true,
            cfl_limit: 0.9,
            blowup_factor: 50.0,
        }
    }
}

/// Trajectory record of one run.
#[derive(Debug, Clone)]
pub struct EvolutionOutput {
    /// Times of the stored snapshots.
    pub times: Vec<f64>,
    /// Stored fields (always the initial and the last accepted state).
    pub snapshots: Vec<PeriodicField>,
    /// `(t, M, H, S)` at t = 0 and after every accepted step.
    pub conserved: Vec<(f64, ConservedTriple)>,
    /// The triple at t = 0.
    pub initial_triple: ConservedTriple,
    /// Largest relative drift of any of M, H, S over the run.
    pub max_relative_drift: f64,
    /// Recorded `C = |dt|·max|u₀|/h`.
    pub cfl_constant: f64,
    /// Accepted steps.
    pub steps_taken: usize,
    /// `Some(reason)` when the run halted before `t_end`.
    pub termination: Option<String>,
}

fn linear_step(base: &PeriodicField, dir: &PeriodicField, a: f64) -> Result<PeriodicField> {
    PeriodicField::new(
        base.period(),
        base.samples()
            .iter()
            .zip(dir.samples())
            .map(|(u, d)| u + a * d)
            .collect(),
    )
}

fn rk4_step(
    u: &PeriodicField,
    dt: f64,
    mut rhs: impl FnMut(&PeriodicField) -> Result<PeriodicField>,
) -> Result<PeriodicField> {
    let k1 = rhs(u)?;
    let k2 = rhs(&linear_step(u, &k1, 0.5 * dt)?)?;
    let k3 = rhs(&linear_step(u, &k2, 0.5 * dt)?)?;
    let k4 = rhs(&linear_step(u, &k3, dt)?)?;
    PeriodicField::new(
        u.period(),
        (0..u.len())
            .map(|i| {
                u.samples()[i]
                    + dt / 6.0
                        * (k1.samples()[i]
                            + 2.0 * k2.samples()[i]
                            + 2.0 * k3.samples()[i]
                            + k4.samples()[i])
            })
            .collect(),
    )
}

fn relative_drift(now: &ConservedTriple, start: &ConservedTriple) -> f64 {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-12);
    rel(now.m, start.m)
        .max(rel(now.h, start.h))
        .max(rel(now.s, start.s))
}

/// Advances the equation from `initial` with classical RK4, monitoring the
/// conserved triple every step; halts early (with the trajectory so far and
/// a reason) on blow-up instead of erroring out.
pub fn evolve(
    initial: &PeriodicField,
    params: WaveParams,
    run: &EvolutionRun,
) -> Result<EvolutionOutput> {
    if !(run.dt.is_finite() && run.dt != 0.0) {
        return Err(DpError::Validation(format!(
            "time step must be finite and nonzero, got {}",
            run.dt
        )));
    }
    let ratio = run.t_end / run.dt;
    if !(ratio.is_finite() && ratio > 0.5) {
        return Err(DpError::Validation(format!(
            "t_end = {} is not reachable with dt = {} (need the same sign and at least one step)",
            run.t_end, run.dt
        )));
    }
    let steps = ratio.round() as usize;

    let ops = PeriodicOps::new(initial.period(), initial.len())?;
    let mut u = if run.dealias {
        ops.dealias_23(initial)?
    } else {
        initial.clone()
    };
    let sup0 = u.sup_norm();
    let h = u.spacing();
    let cfl_constant = run.dt.abs() * sup0 / h;
    if cfl_constant > run.cfl_limit {
        return Err(DpError::Validation(format!(
            "CFL guard: C = |dt|·max|u|/h = {cfl_constant:.3} exceeds the limit {:.3}; \
             shrink dt or refine deliberately",
            run.cfl_limit
        )));
    }

    let initial_triple = conserved_triple_periodic(&u, params.k(), &ops)?;
    let mut conserved = Vec::with_capacity(steps + 1);
    conserved.push((0.0, initial_triple));
    let mut times = vec![0.0];
    let mut snapshots = vec![u.clone()];
    let mut max_relative_drift = 0.0_f64;
    let mut termination = None;
    let mut steps_taken = 0usize;

    for step in 1..=steps {
        let t = step as f64 * run.dt;
        let next = match rk4_step(&u, run.dt, |s| dp_rhs(s, params, &ops, run.dealias)) {
            Ok(next) => next,
            Err(DpError::Validation(msg)) if msg.contains("non-finite") => {
                termination = Some(format!(
                    "field lost finiteness during the step to t = {t:.4}; blow-up"
                ));
                break;
            }
            Err(other) => return Err(other),
        };
        let sup = next.sup_norm();
        if !sup.is_finite() || sup > run.blowup_factor * sup0.max(f64::MIN_POSITIVE) {
            termination = Some(format!(
                "field magnitude {sup:.3e} at t = {t:.4} exceeds {}× the initial {sup0:.3e}; \
                 blow-up or unresolved gradient",
                run.blowup_factor
            ));
            break;
        }
        u = next;
        steps_taken = step;
        let triple = conserved_triple_periodic(&u, params.k(), &ops)?;
        let drift = relative_drift(&triple, &initial_triple);
        max_relative_drift = max_relative_drift.max(drift);
        conserved.push((t, triple));
        if drift > DRIFT_KILL {
            termination = Some(format!(
                "conserved-quantity drift {drift:.3e} at t = {t:.4} exceeds {DRIFT_KILL:.0e}; \
                 the run is no longer resolved"
            ));
            snapshots.push(u.clone());
            times.push(t);
            break;
        }
        let due = run.snapshot_stride > 0 && step % run.snapshot_stride == 0;
        if due || step == steps {
            snapshots.push(u.clone());
            times.push(t);
        }
    }

    if termination.is_some() && times.len() == 1 {
        // Blow-up before any snapshot beyond t = 0: store the last good state.
        snapshots.push(u.clone());
        times.push(steps_taken as f64 * run.dt);
    }

    Ok(EvolutionOutput {
        times,
        snapshots,
        conserved,
        initial_triple,
        max_relative_drift,
        cfl_constant,
        steps_taken,
        termination,
    })
}

/// Moving-frame linearized right-hand side `v_t = J L_c v`.
pub fn linearized_rhs(
    v: &PeriodicField,
    phi: &PeriodicField,
    params: WaveParams,
    ops: &PeriodicOps,
) -> Result<PeriodicField> {
    let lv = apply_lc_periodic(v, phi, params, ops)?;
    ops.apply(&lv, Symbol::SkewJ)
}

/// Norm history of a linearized run.
#[derive(Debug, Clone)]
pub struct LinearizedTrajectory {
    /// Sample times (start, every stride, end).
    pub times: Vec<f64>,
    /// L² norms at the sample times.
    pub norms: Vec<f64>,
    /// The final state.
    pub final_state: PeriodicField,
}

/// Advances `v_t = J L_c v` with RK4 around the periodized profile,
/// recording the norm every `sample_stride` steps.
pub fn evolve_linearized(
    v0: &PeriodicField,
    phi: &PeriodicField,
    params: WaveParams,
    dt: f64,
    t_end: f64,
    sample_stride: usize,
) -> Result<LinearizedTrajectory> {
    if !(dt.is_finite() && dt != 0.0 && (t_end / dt).is_finite() && t_end / dt > 0.5) {
        return Err(DpError::Validation(format!(
            "linearized run needs a finite dt and a reachable t_end, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let steps = (t_end / dt).round() as usize;
    let stride = sample_stride.max(1);
    let ops = PeriodicOps::new(v0.period(), v0.len())?;
    let mut v = v0.clone();
    let mut times = vec![0.0];
    let mut norms = vec![v.norm()];
    for step in 1..=steps {
        v = rk4_step(&v, dt, |s| linearized_rhs(s, phi, params, &ops)).map_err(|e| match e {
            DpError::Validation(msg) if msg.contains("non-finite") => DpError::Numerical(
                "linearized field lost finiteness; the step size is outside the \
                 stability region"
                    .into(),
            ),
            other => other,
        })?;
        if step % stride == 0 || step == steps {
            times.push(step as f64 * dt);
            norms.push(v.norm());
        }
    }
    Ok(LinearizedTrajectory {
        times,
        norms,
        final_state: v,
    })
}

/// Removes the secular components of `v`: its mean and its `∂_cφ`
/// Jordan coefficient.
///
/// Two directions make generic data grow linearly under `v_t = J L_c v`
/// without any unstable mode. The generalized kernel gives
/// `e^{tJL_c}∂_cφ = ∂_cφ - t·∂_ξφ`; since the nonzero-frequency spectral
/// subspaces are `L_c`-orthogonal to the kernel group, the coefficient of
/// `∂_cφ` in `v` is `⟨L_c ∂_cφ, v⟩ / ⟨L_c ∂_cφ, ∂_cφ⟩`. A nonzero mean
/// likewise pumps the translation mode: `J L_c 1 = -Jφ` is slope-shaped,
/// so a raised background drifts the crest linearly — the perturbation
/// then compares the wave against a neighbor of different mass, which is
/// a modulation, not an instability. Subtracting the right multiples of
/// `∂_cφ` and of the constant kills both coefficients jointly and leaves
/// the genuinely oscillatory part whose `ln‖v‖` fit reads the spectrum.
pub fn remove_secular_component(
    v: &PeriodicField,
    phi: &PeriodicField,
    params: WaveParams,
    ops: &PeriodicOps,
) -> Result<PeriodicField> {
    let delta = 1e-5 * params.c();
    let plus = WaveParams::new(params.c() + delta, params.k())?;
    let minus = WaveParams::new(params.c() - delta, params.k())?;
    let dcphi = PeriodicField::from_fn(phi.period(), phi.len(), |x| {
        (plus.height_from_xi(x) - minus.height_from_xi(x)) / (2.0 * delta)
    })?;
    let ldc = apply_lc_periodic(&dcphi, phi, params, ops)?;
    let denom = ldc.dot(&dcphi);
    if denom.abs() < 1e-12 {
        return Err(DpError::Numerical(
            "secular projection is degenerate: ⟨L_c ∂_cφ, ∂_cφ⟩ ≈ 0".into(),
        ));
    }
    // β(·) extracts the ∂_cφ coefficient; β(dcphi) = 1 by construction.
    let period = v.period();
    let beta_v = ldc.dot(v) / denom;
    let beta_one = ldc.integral() / denom;
    let mean_v = v.integral() / period;
    let mean_dc = dcphi.integral() / period;
    // Solve  a·1 + b·β(1) = β(v),  a·mean(∂_cφ) + b = mean(v)  for the
    // multiples (a, b) of ∂_cφ and of the constant.
    let det = 1.0 - beta_one * mean_dc;
    if det.abs() < 1e-12 {
        return Err(DpError::Numerical(
            "secular projection is degenerate: the mean and ∂_cφ directions collapse".into(),
        ));
    }
    let a = (beta_v - beta_one * mean_v) / det;
    let b = (mean_v - mean_dc * beta_v) / det;
    PeriodicField::new(
        period,
        v.samples()
            .iter()
            .zip(dcphi.samples())
            .map(|(vi, d)| vi - a * d - b)
            .collect(),
    )
}

/// Least-squares exponential rate fitted to a norm history.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthFit {
    /// Slope of `ln‖v‖` against `t`.
    pub sigma: f64,
    /// Standard error of the slope.
    pub stderr: f64,
}

/// Fits `ln‖v(t)‖ = ln‖v(0)‖ + σt` by least squares; errors on collapsed
/// or diverged norms and on degenerate time samples.
pub fn growth_rate_fit(times: &[f64], norms: &[f64]) -> Result<GrowthFit> {
    if times.len() != norms.len() {
        return Err(DpError::Validation(format!(
            "{} times against {} norms",
            times.len(),
            norms.len()
        )));
    }
    if times.len() < 3 {
        return Err(DpError::Validation(
            "growth fit needs at least three samples".into(),
        ));
    }
    for &nv in norms {
        if !(nv.is_finite() && nv > 0.0) {
            return Err(DpError::Numerical(format!(
                "norm sample {nv} makes the growth fit ill-conditioned \
                 (collapsed or diverged trajectory)"
            )));
        }
    }
    let m = times.len() as f64;
    let tbar = times.iter().sum::<f64>() / m;
    let logs: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let ybar = logs.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, y) in times.iter().zip(&logs) {
        sxx += (t - tbar) * (t - tbar);
        sxy += (t - tbar) * (y - ybar);
    }
    let span = times.iter().fold(0.0_f64, |a, t| a.max(t.abs()));
    if sxx <= 1e-24 * span.max(1.0).powi(2) {
        return Err(DpError::Validation(
            "time samples are degenerate; the slope is ill-conditioned".into(),
        ));
    }
    let sigma = sxy / sxx;
    let mut rss = 0.0;
    for (t, y) in times.iter().zip(&logs) {
        let r = y - ybar - sigma * (t - tbar);
        rss += r * r;
    }
    let stderr = (rss / (m - 2.0) / sxx).sqrt();
    Ok(GrowthFit { sigma, stderr })
}

fn circulant_kernel(n: usize, period: f64, sym: Symbol) -> Vec<f64> {
    let skew = matches!(sym, Symbol::SkewJ | Symbol::Derivative);
    let mut spec: Vec<Complex<f64>> = (0..n)
        .map(|j| {
            if skew && j == n / 2 {
                return Complex::new(0.0, 0.0);
            }
            let m = if j <= n / 2 {
                j as f64
            } else {
                j as f64 - n as f64
            };
            sym.multiplier(2.0 * PI * m / period) / n as f64
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    let mut kern: Vec<f64> = spec.iter().map(|z| z.re).collect();
    // Enforce the exact (anti)symmetry the symbol guarantees; the inverse
    // transform only delivers it to roundoff.
    if skew {
        kern[0] = 0.0;
        kern[n / 2] = 0.0;
    }
    for r in 1..n / 2 {
        if skew {
            let a = 0.5 * (kern[r] - kern[n - r]);
            kern[r] = a;
            kern[n - r] = -a;
        } else {
            let a = 0.5 * (kern[r] + kern[n - r]);
            kern[r] = a;
            kern[n - r] = a;
        }
    }
    kern
}

fn periodized_slope(params: WaveParams, period: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let x = -period / 2.0 + period * j as f64 / n as f64;
            let s = params.profile_slope(params.height_from_xi(x));
            if x > 0.0 {
                -s
            } else {
                s
            }
        })
        .collect()
}

/// Dense spectrum of the linearized generator `J L_c` on the circle.
#[derive(Debug, Clone)]
pub struct JlcSpectrum {
    /// Matrix dimension.
    pub n: usize,
    /// Circle length.
    pub period: f64,
    /// All eigenvalues as `(re, im)`.
    pub eigenvalues: Vec<(f64, f64)>,
    /// Largest real part — the exponential-instability witness.
    pub max_real_part: f64,
    /// Largest modulus.
    pub spectral_radius: f64,
    /// Deviation from the fourfold symmetry `λ ↔ -λ̄`, relative to the
    /// radius.
    pub fourfold_defect: f64,
    /// `‖J L_c ∂_ξφ‖ / ‖∂_ξφ‖` — the translation mode as discrete kernel.
    pub kernel_residual: f64,
    /// Unit-norm real seed aligned with the largest-real-part eigenvector.
    pub top_mode: Vec<f64>,
}

/// Assembles `J` and `L_c` as dense circulant/multiplication matrices,
/// takes the full nonsymmetric eigendecomposition, and extracts the
/// instability witnesses.
pub fn jlc_matrix_spectrum(profile: &SolitonProfile, period: f64, n: usize) -> Result<JlcSpectrum> {
    let params = profile.params();
    let phi = profile.periodized(period, n)?;
    let inv4 = circulant_kernel(n, period, Symbol::InvHelmholtz4);
    let jk = circulant_kernel(n, period, Symbol::SkewJ);

    let c = params.c();
    let factor = 3.0 * c + 2.0 * params.k();
    let lmat = DMatrix::from_fn(n, n, |i, j| {
        let conv = -factor * inv4[(n + i - j) % n];
        if i == j {
            c - phi.samples()[i] + conv
        } else {
            conv
        }
    });
    let jmat = DMatrix::from_fn(n, n, |i, j| jk[(n + i - j) % n]);
    let m = &jmat * &lmat;

    let slope = DVector::from_vec(periodized_slope(params, period, n));
    let kernel_residual = (&m * &slope).norm() / slope.norm();

    let eig = m.complex_eigenvalues();
    let eigenvalues: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im)).collect();
    let spectral_radius = eig.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    let max_real_part = eig.iter().fold(f64::NEG_INFINITY, |a, z| a.max(z.re));
    let scale = spectral_radius.max(1.0);
    let mut fourfold_defect = 0.0_f64;
    for z in eig.iter() {
        let target = -z.conj();
        let nearest = eig
            .iter()
            .fold(f64::INFINITY, |a, w| a.min((w - target).norm()));
        fourfold_defect = fourfold_defect.max(nearest / scale);
    }

    // Top-real-part eigenvector by shifted inverse iteration over ℂ.
    let top = eig
        .iter()
        .copied()
        .fold(Complex::new(f64::NEG_INFINITY, 0.0), |a, z| {
            if z.re > a.re {
                z
            } else {
                a
            }
        });
    let offset = 1e-8 * scale;
    let shift = top + Complex::new(offset, offset);
    let a = DMatrix::from_fn(n, n, |i, j| {
        let base = Complex::new(m[(i, j)], 0.0);
        if i == j {
            base - shift
        } else {
            base
        }
    });
    let lu = a.lu();
    let mut x = DVector::from_element(n, Complex::new(1.0, 0.0));
    for _ in 0..3 {
        x = lu.solve(&x).ok_or_else(|| {
            DpError::Numerical("inverse iteration for the top mode failed to solve".into())
        })?;
        let norm = x.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(DpError::Numerical(
                "inverse iteration for the top mode collapsed".into(),
            ));
        }
        x /= Complex::new(norm, 0.0);
    }
    // Rotate the phase so the real part carries the mode, then normalize.
    let lead = x
        .iter()
        .copied()
        .fold(Complex::new(0.0, 0.0), |a, z| {
            if z.norm() > a.norm() {
                z
            } else {
                a
            }
        });
    let phase = lead / lead.norm();
    let mut top_mode: Vec<f64> = x.iter().map(|z| (z * phase.conj()).re).collect();
    let tnorm = top_mode.iter().map(|v| v * v).sum::<f64>().sqrt();
    if tnorm > 0.0 {
        for v in &mut top_mode {
            *v /= tnorm;
        }
    }

    Ok(JlcSpectrum {
        n,
        period,
        eigenvalues,
        max_real_part,
        spectral_radius,
        fourfold_defect,
        kernel_residual,
        top_mode,
    })
}

/// Distance from `u` to the translation orbit of `reference`.
#[derive(Debug, Clone, Copy)]
pub struct OrbitDistance {
    /// `min_s ‖u(·+s) - reference‖` — the orbital distance.
    pub distance: f64,
    /// The translation by which `reference` must move right to best match
    /// `u`, reduced into `(-P/2, P/2]`.
    pub shift: f64,
    /// Distance relative to `‖reference‖`.
    pub relative: f64,
}

/// Minimizes `‖u(·-s) - reference‖` over translations: circular
/// cross-correlation for a bracketing grid shift, then Newton refinement
/// of the spectral correlation and one exact shifted evaluation.
pub fn orbit_distance(
    u: &PeriodicField,
    reference: &PeriodicField,
    ops: &PeriodicOps,
) -> Result<OrbitDistance> {
    let n = ops.len();
    let uhat = ops.spectrum(u)?;
    let rhat = ops.spectrum(reference)?;
    let z: Vec<Complex<f64>> = uhat
        .iter()
        .zip(&rhat)
        .map(|(a, b)| a * b.conj())
        .collect();
    let period = ops.period();
    let h = u.spacing();

    // Coarse pass over grid shifts.
    let us = u.samples();
    let rs = reference.samples();
    let mut best_r = 0usize;
    let mut best = f64::NEG_INFINITY;
    for r in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += us[(j + r) % n] * rs[j];
        }
        if acc > best {
            best = acc;
            best_r = r;
        }
    }
    let signed = if best_r <= n / 2 {
        best_r as f64
    } else {
        best_r as f64 - n as f64
    };
    let mut s = -signed * h;

    // Newton on C'(s) = 0 with C(s) = (h/n)·Σ Re(z_m e^{-iω_m s}).
    for _ in 0..4 {
        let mut c1 = 0.0;
        let mut c2 = 0.0;
        for (j, zm) in z.iter().enumerate() {
            let w = ops.omega(j);
            let rot = zm * Complex::new(0.0, -w * s).exp();
            c1 += w * rot.im;
            c2 += -w * w * rot.re;
        }
        if c2 >= 0.0 {
            break;
        }
        let step = c1 / c2;
        s -= step;
        if step.abs() < 1e-14 * period {
            break;
        }
    }
    // `s` aligns u back onto the reference; report its negation, i.e. how
    // far the reference has traveled to produce `u`.
    let mut shift = (-s + period / 2.0).rem_euclid(period) - period / 2.0;
    if shift <= -period / 2.0 {
        shift += period;
    }

    let aligned = ops.shift(u, -shift)?;
    let diff = PeriodicField::new(
        period,
        aligned
            .samples()
            .iter()
            .zip(rs)
            .map(|(a, b)| a - b)
            .collect(),
    )?;
    let distance = diff.norm();
    Ok(OrbitDistance {
        distance,
        shift,
        relative: distance / reference.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SymmetricGrid;
    use crate::profile::compute_profile;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference_profile(n: usize) -> SolitonProfile {
        let params = WaveParams::new(1.0, 0.25).unwrap();
        let grid = SymmetricGrid::new(params.default_half_width(), n).unwrap();
        compute_profile(params, grid, 1e-8).unwrap()
    }

    fn band_limited(period: f64, n: usize, modes: usize, seed: u64) -> PeriodicField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<(f64, f64)> = (1..=modes)
            .map(|m| {
                let decay = 1.0 / (m * m) as f64;
                (
                    decay * rng.gen_range(-1.0..1.0),
                    decay * rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        PeriodicField::from_fn(period, n, |x| {
            let mut acc = 0.3;
            for (m, (a, b)) in coeffs.iter().enumerate() {
                let arg = 2.0 * PI * (m + 1) as f64 * x / period;
                acc += a * arg.cos() + b * arg.sin();
            }
            acc
        })
        .unwrap()
    }

    #[test]
    fn the_two_nonlinearity_routes_agree_on_band_limited_data() {
        let params = WaveParams::new(1.0, 0.25).unwrap();
        let ops = PeriodicOps::new(40.0, 256).unwrap();
        let u = band_limited(40.0, 256, 20, 7);
        for dealias in [true, false] {
            let a = dp_rhs(&u, params, &ops, dealias).unwrap();
            let b = dp_rhs_m_form(&u, params, &ops, dealias).unwrap();
            let scale = a.sup_norm();
            let diff = a
                .samples()
                .iter()
                .zip(b.samples())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0_f64, f64::max);
            // Identical multiplier algebra up to the order of floating
            // products: 1e-10 of the field scale is generous.
            assert!(diff < 1e-10 * scale, "routes differ by {diff:.3e}");
        }
    }

    #[test]
    fn the_wave_is_transported_rigidly_by_the_right_hand_side() {
        let profile = reference_profile(1201);
        let params = profile.params();
        let period = 2.0 * profile.grid().half_width();
        let n = 1024;
        let phi = profile.periodized(period, n).unwrap();
        let ops = PeriodicOps::new(period, n).unwrap();
        let rhs = dp_rhs(&phi, params, &ops, true).unwrap();
        let slope = ops.apply(&phi, Symbol::Derivative).unwrap();
        let scale = slope.sup_norm() * params.c();
        let worst = rhs
            .samples()
            .iter()
            .zip(slope.samples())
            .map(|(r, s)| (r + params.c() * s).abs())
            .fold(0.0_f64, f64::max);
        assert!(
            worst < 1e-6 * scale,
            "rhs deviates from -c·∂φ by {worst:.3e} (scale {scale:.3e})"
        );
    }

    #[test]
    fn short_transport_run_tracks_the_shifted_wave() {
        let profile = reference_profile(1201);
        let params = profile.params();
        let period = 2.0 * profile.grid().half_width();
        let n = 512;
        let phi = profile.periodized(period, n).unwrap();
        let run = EvolutionRun {
            t_end: 2.0,
            ..EvolutionRun::default()
        };
        let out = evolve(&phi, params, &run).unwrap();
        assert!(out.termination.is_none());
        assert_eq!(out.steps_taken, 200);
        assert_eq!(out.conserved.len(), 201);
        assert!(out.cfl_constant > 0.0);
        // Tolerance note: RK4 phase error over 200 steps at dt = 0.01 sits
        // below 1e-7; 1e-8 would start to touch it.
        assert!(
            out.max_relative_drift < 1e-8,
            "drift {:.3e}",
            out.max_relative_drift
        );
        let ops = PeriodicOps::new(period, n).unwrap();
        let dist = orbit_distance(out.snapshots.last().unwrap(), &phi, &ops).unwrap();
        assert!(dist.relative < 1e-5, "orbit distance {:.3e}", dist.relative);
        // The wave traveled right by c·T = 2.
        assert!(
            (dist.shift - params.c() * 2.0).abs() < 1e-3,
            "shift {:.6}",
            dist.shift
        );
    }

    #[test]
    fn backward_integration_recovers_the_initial_state() {
        let profile = reference_profile(1201);
        let params = profile.params();
        let period = 2.0 * profile.grid().half_width();
        let phi = profile.periodized(period, 512).unwrap();
        let forward = evolve(
            &phi,
            params,
            &EvolutionRun {
                t_end: 3.0,
                ..EvolutionRun::default()
            },
        )
        .unwrap();
        let back = evolve(
            forward.snapshots.last().unwrap(),
            params,
            &EvolutionRun {
                dt: -0.01,
                t_end: -3.0,
                ..EvolutionRun::default()
            },
        )
        .unwrap();
        let recovered = back.snapshots.last().unwrap();
        let sup0 = phi.sup_norm();
        let worst = recovered
            .samples()
            .iter()
            .zip(phi.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        // Tolerance note: the dispersive phase error cancels on reversal and
        // only the O(dt⁶)-per-step dissipation survives; 1e-8 of the crest
        // height leaves a factor ≈ 10.
        assert!(worst < 1e-8 * sup0, "reversal defect {worst:.3e}");
    }

    #[test]
    fn step_halving_shows_fourth_order_convergence() {
        let params = WaveParams::new(1.0, 0.25).unwrap();
        let period = 44.0;
        let n = 256;
        let u0 = PeriodicField::from_fn(period, n, |x| {
            0.4 + 0.3 * (2.0 * PI * x / period).sin() + 0.2 * (4.0 * PI * x / period).cos()
        })
        .unwrap();
        let tend = 0.8;
        let state_at = |dt: f64| {
            let run = EvolutionRun {
                dt,
                t_end: tend,
                ..EvolutionRun::default()
            };
            let out = evolve(&u0, params, &run).unwrap();
            assert!(out.termination.is_none());
            out.snapshots.last().unwrap().clone()
        };
        let reference = state_at(0.003125);
        let err = |field: &PeriodicField| {
            field
                .samples()
                .iter()
                .zip(reference.samples())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };
        let e_coarse = err(&state_at(0.05));
        let e_fine = err(&state_at(0.025));
        let order = (e_coarse / e_fine).log2();
        // Tolerance note: classical RK4 gives ratio 16 (order 4); the window
        // [3.5, 4.5] absorbs the reference-solution contamination.
        assert!(
            (3.5..4.5).contains(&order),
            "observed order {order:.2} (errors {e_coarse:.3e}, {e_fine:.3e})"
        );
    }

    #[test]
    fn reckless_steps_are_rejected_by_the_cfl_guard() {
        let params = WaveParams::new(1.0, 0.25).unwrap();
        let u0 = PeriodicField::from_fn(20.0, 256, |x| (2.0 * PI * x / 20.0).sin()).unwrap();
        let run = EvolutionRun {
            dt: 0.5,
            t_end: 5.0,
            ..EvolutionRun::default()
        };
        let err = evolve(&u0, params, &run).unwrap_err();
        assert!(err.to_string().contains("CFL"), "got: {err}");
    }

    #[test]
    fn blow_up_halts_with_partial_output_instead_of_crashing() {
        let params = WaveParams::new(1.0, 0.25).unwrap();
        // High-mode content at a reckless step: mode 80 sits far outside the
        // RK4 stability region at dt = 0.5, so its amplitude multiplies by
        // ~10³ per step and the magnitude guard trips immediately.
        let u0 = PeriodicField::from_fn(20.0, 256, |x| {
            (2.0 * PI * x / 20.0).sin() + 0.4 * (2.0 * PI * 80.0 * x / 20.0).cos()
        })
        .unwrap();
        let run = EvolutionRun {
            dt: 0.5,
            t_end: 50.0,
            cfl_limit: 1e6,
            ..EvolutionRun::default()
        };
        let out = evolve(&u0, params, &run).unwrap();
        let reason = out.termination.expect("run must terminate early");
        assert!(
            reason.contains("magnitude") || reason.contains("finiteness"),
            "reason: {reason}"
        );
        assert!(out.steps_taken < 100);
        assert!(out.snapshots.len() >= 2);
        for s in &out.snapshots {
            assert!(s.samples().iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn linearized_flow_conserves_the_quadratic_form() {
        let profile = reference_profile(1201);
        let params = profile.params();
        let period = 2.0 * profile.grid().half_width();
        let n = 512;
        let phi = profile.periodized(period, n).unwrap();
        let ops = PeriodicOps::new(period, n).unwrap();
        let v0 = band_limited(period, n, 12, 11);
        let form = |v: &PeriodicField| {
            let lv = apply_lc_periodic(v, &phi, params, &ops).unwrap();
            lv.dot(v)
        };
        let start = form(&v0);
        let traj = evolve_linearized(&v0, &phi, params, 0.02, 5.0, 50).unwrap();
        let end = form(&traj.final_state);
        // ⟨L v, v⟩ is exactly conserved by v_t = J L v; only the RK4
        // dissipation breaks it.
        assert!(
            (end - start).abs() < 1e-7 * start.abs().max(1.0),
            "form drifted {start:.6e} → {end:.6e}"
        );
        // Instantaneous skewness: ⟨L v, J L v⟩ = 0 to roundoff.
        let lv = apply_lc_periodic(&v0, &phi, params, &ops).unwrap();
        let rhs = linearized_rhs(&v0, &phi, params, &ops).unwrap();
        assert!(lv.dot(&rhs).abs() < 1e-12 * lv.norm() * rhs.norm().max(1.0));
    }

    #[test]
    fn speed_derivative_maps_onto_the_translation_mode() {
        let profile = reference_profile(1201);
        let params = profile.params();
        let period = 2.0 * profile.grid().half_width();
        let n = 1024;
        let phi = profile.periodized(period, n).unwrap();
        let ops = PeriodicOps::new(period, n).unwrap();
        let delta = 1e-5;
        let plus = WaveParams::new(params.c() + delta, params.k()).unwrap();
        let minus = WaveParams::new(params.c() - delta, params.k()).unwrap();
        let dcphi = PeriodicField::from_fn(period, n, |x| {
            (plus.height_from_xi(x) - minus.height_from_xi(x)) / (2.0 * delta)
        })
        .unwrap();
        let rhs = linearized_rhs(&dcphi, &phi, params, &ops).unwrap();
        let slope = periodized_slope(params, period, n);
        let scale = slope.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let worst = rhs
            .samples()
            .iter()
            .zip(&slope)
            .map(|(r, s)| (r + s).abs())
            .fold(0.0_f64, f64::max);
        // J L_c ∂_cφ = -∂_ξφ up to the O(δ²) finite-difference error.
        assert!(worst < 1e-6 * scale, "defect {worst:.3e}");
    }

    #[test]
    fn growth_fit_recovers_a_synthetic_rate_and_rejects_collapse() {
        let times: Vec<f64> = (0..40).map(|i| 0.5 * i as f64).collect();
        let norms: Vec<f64> = times.iter().map(|t| 2.0 * (0.31 * t).exp()).collect();
        let fit = growth_rate_fit(&times, &norms).unwrap();
        assert_relative_eq!(fit.sigma, 0.31, max_relative = 1e-12);
        assert!(fit.stderr < 1e-12);

        let mut bad = norms.clone();
        bad[20] = 0.0;
        let err = growth_rate_fit(&times, &bad).unwrap_err();
        assert!(err.to_string().contains("ill-conditioned"), "got: {err}");

        let flat_times = vec![1.0; 40];
        assert!(growth_rate_fit(&flat_times, &norms).is_err());
        assert!(growth_rate_fit(&times[..2], &norms[..2]).is_err());
    }

    #[test]
    fn dense_generator_has_no_exponentially_growing_mode() {
        let profile = reference_profile(1201);
        let period = 2.0 * profile.grid().half_width();
        let spec = jlc_matrix_spectrum(&profile, period, 512).unwrap();
        assert_eq!(spec.eigenvalues.len(), 512);
        assert!(spec.spectral_radius > 1.0);
        // Tolerance note: the generalized-kernel pair splits by about the
        // square root of the periodization defect (≈ 1e-6 here); 1e-6 of
        // the radius keeps a factor ≈ 20 above it.
        assert!(
            spec.max_real_part < 1e-6 * spec.spectral_radius,
            "max real part {:.3e} vs radius {:.3e}",
            spec.max_real_part,
            spec.spectral_radius
        );
        assert!(
            spec.fourfold_defect < 1e-8,
            "fourfold defect {:.3e}",
            spec.fourfold_defect
        );
        assert!(
            spec.kernel_residual < 1e-8,
            "kernel residual {:.3e}",
            spec.kernel_residual
        );

        // The top mode seeds a linearized run whose fitted rate matches the
        // (vanishing) top real part.
        let params = profile.params();
        let phi = profile.periodized(period, 512).unwrap();
        let v0 = PeriodicField::new(period, spec.top_mode.clone()).unwrap();
        let traj = evolve_linearized(&v0, &phi, params, 0.02, 200.0, 100).unwrap();
        let fit = growth_rate_fit(&traj.times, &traj.norms).unwrap();
        assert!(fit.sigma.abs() < 1e-3, "σ = {:.3e}", fit.sigma);
        assert!(
            (fit.sigma - spec.max_real_part).abs() < 1e-3,
            "σ = {:.3e} vs max re = {:.3e}",
            fit.sigma,
            spec.max_real_part
        );
    }

    #[test]
    fn random_data_shows_no_exponential_growth_once_secular_drift_is_removed() {
        let profile = reference_profile(1201);
        let params = profile.params();
        let period = 2.0 * profile.grid().half_width();
        let n = 512;
        let phi = profile.periodized(period, n).unwrap();
        let ops = PeriodicOps::new(period, n).unwrap();
        let raw = band_limited(period, n, 24, 23);
        let v0 = remove_secular_component(&raw, &phi, params, &ops).unwrap();
        let traj = evolve_linearized(&v0, &phi, params, 0.02, 200.0, 20).unwrap();
        let fit = growth_rate_fit(&traj.times, &traj.norms).unwrap();
        // Tolerance note: the bound is one-sided — stability forbids growth,
        // not transients.  Non-normal beating swings the norm by ~3x and
        // aliases into the window fit at the ±1e-3 scale (signed value here:
        // −1.2e-3); an unstable mode would push σ positive far past 1e-3.
        assert!(fit.sigma < 1e-3, "σ = {:.3e}", fit.sigma);
        // The norm itself must stay in a bounded band: the measured
        // transient swing is ≈ 3x, so 10x headroom is generous yet would
        // catch e^{σt} growth with σ ≳ 1.2e-2 over this window.
        let hi = traj.norms.iter().cloned().fold(0.0_f64, f64::max);
        let lo = traj.norms.iter().cloned().fold(f64::MAX, f64::min);
        assert!(hi / lo < 10.0, "norm swing {:.2}", hi / lo);
    }

    #[test]
    fn translation_mode_is_an_equilibrium_of_the_linearized_flow() {
        let profile = reference_profile(1201);
        let params = profile.params();
        let period = 2.0 * profile.grid().half_width();
        let n = 512;
        let phi = profile.periodized(period, n).unwrap();
        let ops = PeriodicOps::new(period, n).unwrap();
        let slope = PeriodicField::new(period, periodized_slope(params, period, n)).unwrap();
        let rhs = linearized_rhs(&slope, &phi, params, &ops).unwrap();
        assert!(
            rhs.norm() < 1e-8 * slope.norm(),
            "‖J L_c ∂_ξφ‖ = {:.3e}",
            rhs.norm()
        );
        let traj = evolve_linearized(&slope, &phi, params, 0.02, 40.0, 20).unwrap();
        let fit = growth_rate_fit(&traj.times, &traj.norms).unwrap();
        assert!(fit.sigma.abs() < 1e-8, "σ = {:.3e}", fit.sigma);
        let spread = traj.norms.iter().fold((f64::MAX, 0.0_f64), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        assert!((spread.1 - spread.0) / spread.1 < 1e-8, "norm wandered");
    }

    #[test]
    fn orbit_distance_finds_exact_translations() {
        let profile = reference_profile(1201);
        let period = 2.0 * profile.grid().half_width();
        let n = 512;
        let phi = profile.periodized(period, n).unwrap();
        let ops = PeriodicOps::new(period, n).unwrap();
        let moved = ops.shift(&phi, 1.2345).unwrap();
        let d = orbit_distance(&moved, &phi, &ops).unwrap();
        // moved(x) = φ(x - 1.2345), so re-aligning needs s = +... the
        // minimizer undoes the applied translation exactly.
        assert!(d.relative < 1e-9, "distance {:.3e}", d.relative);
        assert!((d.shift - 1.2345).abs() < 1e-6, "shift {:.8}", d.shift);
    }

    #[test]
    fn small_perturbations_stay_near_the_orbit() {
        let profile = reference_profile(1201);
        let params = profile.params();
        let period = 2.0 * profile.grid().half_width();
        let n = 512;
        let phi = profile.periodized(period, n).unwrap();
        let eps = 1e-3;
        let seeded = PeriodicField::new(
            period,
            phi.samples()
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let x = phi.x(j);
                    v + eps * (-x * x).exp()
                })
                .collect(),
        )
        .unwrap();
        let run = EvolutionRun {
            t_end: 30.0,
            ..EvolutionRun::default()
        };
        let out = evolve(&seeded, params, &run).unwrap();
        assert!(out.termination.is_none());
        let ops = PeriodicOps::new(period, n).unwrap();
        let d = orbit_distance(out.snapshots.last().unwrap(), &phi, &ops).unwrap();
        assert!(
            d.distance <= 10.0 * eps,
            "orbit distance {:.3e} for ε = {eps:.0e}",
            d.distance
        );
    }
}
