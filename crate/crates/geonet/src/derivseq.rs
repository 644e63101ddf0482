//! The suspension-angle derivative sequence at zero deviation, evaluated by
//! recursion in arbitrary precision, with gap analysis of its values and a
//! finite-difference crosscheck against the geometric engine.

use crate::bigreal::{BigReal, Ctx};
use crate::error::{GeonetError, Result};
use crate::star::{alpha_beta_x_sequences, build_star, StarConfig};

/// Per-index state of the coupled angle/derivative recursion.
#[derive(Clone, Debug)]
pub struct AngleSeqRow {
    pub index: usize,
    pub alpha: BigReal,
    pub beta: BigReal,
    pub x: BigReal,
    pub tau: BigReal,
    /// `sigma_{i+1}`, the hook-geometry angle used by the step to `i + 1`.
    pub sigma_next: BigReal,
    pub a: BigReal,
    pub b: BigReal,
    pub c: BigReal,
    pub psi_prime: BigReal,
    pub gamma_prime: BigReal,
    pub phi_prime: BigReal,
}

#[derive(Clone, Debug)]
pub struct AngleSeqState {
    pub ctx: Ctx,
    pub rows: Vec<AngleSeqRow>,
}

impl AngleSeqState {
    pub fn phi_primes(&self) -> Vec<BigReal> {
        self.rows.iter().map(|r| r.phi_prime.clone()).collect()
    }
}

pub struct Coefficients {
    pub tau: BigReal,
    pub sigma_next: BigReal,
    pub a: BigReal,
    pub b: BigReal,
    pub c: BigReal,
}

/// Reference angle `tau_i`: the half interior angle of the 14-gon over the
/// outer circle, by layer parity.
pub fn tau(ctx: Ctx, i: usize) -> BigReal {
    if i % 2 == 0 {
        ctx.pi_frac(1, 6)
    } else {
        ctx.pi_frac(29, 42)
    }
}

/// Hook-geometry angle `sigma_{i+1}` from the layer radius `x_i`; the odd
/// case measures at the apex ring instead of the outer circle.
pub fn sigma_next(ctx: Ctx, i: usize, x_i: &BigReal, alpha0: &BigReal) -> BigReal {
    let pi7 = ctx.pi_frac(1, 7);
    let half0 = alpha0 / &ctx.int(2);
    let mut lead = &half0.sin() / &(x_i * &(&pi7 + &half0).sin());
    if i % 2 == 1 {
        lead = &lead * &(&(&pi7 + &ctx.pi_frac(1, 6)).sin() / &ctx.pi_frac(1, 6).sin());
    }
    (&pi7.sin() / &(&lead - &pi7.cos())).atan()
}

/// The step coefficients `(tau_i, sigma_{i+1}, a_i, b_i, c_i)`.
pub fn coefficients(
    ctx: Ctx,
    i: usize,
    alpha_i: &BigReal,
    alpha_next: &BigReal,
    x_i: &BigReal,
    alpha0: &BigReal,
) -> Result<Coefficients> {
    // the sequence legitimately passes within ~1e-3 rad of the tangent
    // singularities (never through them); only flag at the precision floor
    let guard = ctx.pow10(-(ctx.digits() as i32 - 3));
    let two = ctx.int(2);
    let half = ctx.ratio(1, 2);
    let t = tau(ctx, i);
    let s = sigma_next(ctx, i, x_i, alpha0);

    let half_next = alpha_next / &two;
    if half_next.cos().abs() < guard || (&half_next - &s).cos().abs() < guard {
        return Err(GeonetError::Precondition(format!(
            "tangent singularity in step coefficients at index {i}"
        )));
    }
    let tan_half_next = half_next.tan();
    let tan_shift = (&half_next - &s).tan();
    if tan_shift.abs() < guard {
        return Err(GeonetError::Precondition(format!(
            "denominator singularity in step coefficients at index {i}"
        )));
    }
    let b = -(&tan_half_next / &tan_shift);

    let pi7 = ctx.pi_frac(1, 7);
    let sin_tau = t.sin();
    let term1 = &(&(&pi7 + &s).sin() * &(&(&pi7 + &s) + &t).sin()) / &sin_tau;
    let inner = &half - &(&(&(&t + &ctx.pi_frac(2, 7)) + &(&s * &two)).sin() / &(&sin_tau * &two));
    let a = -(&tan_half_next * &(&term1 + &(&inner / &tan_shift)));

    let c = if *alpha_i > ctx.pi() {
        -ctx.one()
    } else {
        let ch = (alpha_i / &two).cos();
        let den = &ctx.one() - &(&two * &ch);
        if den.abs() < guard {
            return Err(GeonetError::Precondition(format!(
                "denominator singularity in c at index {i}"
            )));
        }
        &(&two * &ch) / &den
    };

    Ok(Coefficients {
        tau: t,
        sigma_next: s,
        a,
        b,
        c,
    })
}

/// Evaluate the derivative sequence `phi_i'(0)` for `i = 0..=n` together
/// with all intermediate coefficients.
pub fn derivative_sequence(ctx: Ctx, alpha0: &BigReal, n: usize) -> Result<AngleSeqState> {
    let seq = alpha_beta_x_sequences(ctx, alpha0, n + 1)?;
    let mut rows = Vec::with_capacity(n + 1);
    let mut phi_prime = ctx.one();
    let mut psi_prime = &ctx.ratio(1, 2) - &(&ctx.pi_frac(1, 6) - alpha0).sin();
    for i in 0..=n {
        let co = coefficients(ctx, i, &seq[i].alpha, &seq[i + 1].alpha, &seq[i].x, alpha0)?;
        let gamma_prime = &co.c * &psi_prime;
        rows.push(AngleSeqRow {
            index: i,
            alpha: seq[i].alpha.clone(),
            beta: seq[i].beta.clone(),
            x: seq[i].x.clone(),
            tau: co.tau,
            sigma_next: co.sigma_next,
            a: co.a.clone(),
            b: co.b.clone(),
            c: co.c.clone(),
            psi_prime: psi_prime.clone(),
            gamma_prime: gamma_prime.clone(),
            phi_prime: phi_prime.clone(),
        });
        let psi_next = &(&co.b * &gamma_prime) + &(&co.a * &phi_prime);
        phi_prime = &(&phi_prime + &gamma_prime) + &psi_next;
        psi_prime = psi_next;
    }
    Ok(AngleSeqState { ctx, rows })
}

/// Pairwise-gap analysis of a sequence of values.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub min_gap: BigReal,
    pub argmin: (usize, usize),
    pub min_gap_even: Option<(BigReal, (usize, usize))>,
    pub min_gap_odd: Option<(BigReal, (usize, usize))>,
    /// Least-squares slope of `ln |value|` against the index.
    pub log_magnitude_slope: f64,
    /// Number of indices where `|value|` increases over the previous one.
    pub increasing_steps: usize,
}

pub fn gap_analysis(values: &[BigReal]) -> Result<GapReport> {
    if values.len() < 2 {
        return Err(GeonetError::Precondition("gap analysis needs >= 2 values".into()));
    }
    let mut min_gap: Option<(BigReal, (usize, usize))> = None;
    let mut min_even: Option<(BigReal, (usize, usize))> = None;
    let mut min_odd: Option<(BigReal, (usize, usize))> = None;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let d = (&values[i] - &values[j]).abs();
            let upd = |slot: &mut Option<(BigReal, (usize, usize))>| {
                if slot.as_ref().map(|(m, _)| d < *m).unwrap_or(true) {
                    *slot = Some((d.clone(), (i, j)));
                }
            };
            upd(&mut min_gap);
            if i % 2 == 0 && j % 2 == 0 {
                upd(&mut min_even);
            }
            if i % 2 == 1 && j % 2 == 1 {
                upd(&mut min_odd);
            }
        }
    }
    let (min_gap, argmin) = min_gap.expect("nonempty");

    // log-magnitude regression in f64 (qualitative growth check)
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let m = v.to_f64().abs();
            (m > 0.0 && m.is_finite()).then(|| (i as f64, m.ln()))
        })
        .collect();
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        0.0
    };
    let increasing = values
        .windows(2)
        .filter(|w| w[1].abs() > w[0].abs())
        .count();
    Ok(GapReport {
        min_gap,
        argmin,
        min_gap_even: min_even,
        min_gap_odd: min_odd,
        log_magnitude_slope: slope,
        increasing_steps: increasing,
    })
}

/// Count matching leading significant decimal digits of two values.
pub fn agreement_digits(a: &BigReal, b: &BigReal) -> u32 {
    let diff = (a - b).abs();
    if diff.is_zero() {
        return u32::MAX;
    }
    let scale = a.abs().max(&b.abs());
    if scale.is_zero() {
        return 0;
    }
    let rel = (&diff / &scale).to_f64();
    if rel <= 0.0 {
        u32::MAX
    } else {
        (-rel.log10()).floor().max(0.0) as u32
    }
}

/// Finite-difference comparison of the measured suspension angles against
/// the analytic derivative sequence.
#[derive(Clone, Debug)]
pub struct FdReport {
    pub h: BigReal,
    pub deviations: Vec<BigReal>,
    pub max_deviation: BigReal,
}

/// Build `G_m(+h)` and `G_m(-h)` geometrically, central-difference the
/// measured suspension angles, and compare with the recursion values.
pub fn finite_difference_crosscheck(digits: u32, m: usize, h: &str) -> Result<FdReport> {
    let plus = StarConfig::new(digits, m, h, "88/21")?;
    let h_val = plus.phi.clone();
    if !h_val.is_positive() {
        return Err(GeonetError::Precondition("step h must be positive".into()));
    }
    let minus = StarConfig {
        phi: h_val.neg(),
        ..plus.clone()
    };
    let st_plus = build_star(&plus)?;
    let st_minus = build_star(&minus)?;
    let work = st_plus.work_ctx();
    let alpha0 = work.ratio(88, 21);
    let analytic = derivative_sequence(work, &alpha0, m)?;
    let two_h = &h_val + &h_val;
    let mut deviations = Vec::with_capacity(m + 1);
    let mut max_dev = work.zero();
    for i in 0..=m {
        let fd = &(&st_plus.layers[i].phi - &st_minus.layers[i].phi) / &two_h;
        let dev = (&fd - &analytic.rows[i].phi_prime).abs();
        max_dev = max_dev.max(&dev);
        deviations.push(dev.with_digits(digits));
    }
    Ok(FdReport {
        h: h_val.with_digits(digits),
        deviations,
        max_deviation: max_dev.with_digits(digits),
    })
}
