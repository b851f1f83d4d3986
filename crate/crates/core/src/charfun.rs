//! Empirical characteristic functions, moments, Taylor-remainder checks,
//! and the product-formula comparison for partial sums.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::compensated::CompensatedSum;
use crate::error::{CoreError, Result};
use crate::table::{FunctionTable, TableValues};

/// φ(t) sampled on a grid.
#[derive(Debug, Clone)]
pub struct CharFunSamples {
    pub t_grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub sample_size: u64,
}

/// φ(t) = (1/n) Σ_k e^{i t f(k)} with compensated accumulation of the real
/// and imaginary parts. φ(0) = 1 exactly.
pub fn empirical_charfun(values: &[f64], t_grid: &[f64]) -> Result<CharFunSamples> {
    if values.is_empty() {
        return Err(CoreError::invalid("characteristic function needs samples"));
    }
    if t_grid.is_empty() {
        return Err(CoreError::invalid("t grid must be nonempty"));
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(CoreError::invalid("t grid must be finite"));
    }
    let n = values.len() as f64;
    let phi: Vec<Complex64> = t_grid
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return Complex64::new(1.0, 0.0);
            }
            let mut re = CompensatedSum::new();
            let mut im = CompensatedSum::new();
            for &v in values {
                let (s, c) = (t * v).sin_cos();
                re.add(c);
                im.add(s);
            }
            Complex64::new(re.value() / n, im.value() / n)
        })
        .collect();
    Ok(CharFunSamples {
        t_grid: t_grid.to_vec(),
        values: phi,
        sample_size: values.len() as u64,
    })
}

/// (1/n) Σ f(k)^j with the exactness flag.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Moment {
    pub value: f64,
    /// True when integer accumulation overflowed 128 bits and the moment
    /// was recomputed in floating point.
    pub floating_fallback: bool,
}

fn checked_pow_i128(base: i128, exp: u32) -> Option<i128> {
    let mut acc: i128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

fn float_moment(values: &TableValues, n: usize, j: u32) -> f64 {
    let mut acc = CompensatedSum::new();
    for idx in 0..n {
        acc.add(values.get_f64(idx).powi(j as i32));
    }
    acc.value() / n as f64
}

/// j-th empirical moment (1/n) Σ_{k≤n} f(k)^j. Integer kinds accumulate
/// exactly in 128-bit arithmetic; on overflow the moment is recomputed in
/// floating point and flagged.
pub fn moment(table: &FunctionTable, n: u64, j: u32) -> Result<Moment> {
    if j == 0 {
        return Err(CoreError::invalid("moment order must be ≥ 1"));
    }
    if n == 0 {
        return Err(CoreError::invalid("moment needs n ≥ 1"));
    }
    if n > table.limit() {
        return Err(CoreError::OutOfRange {
            k: n,
            limit: table.limit(),
        });
    }
    let values = table.values();
    let n_us = n as usize;
    match values {
        TableValues::Float64(v) => {
            let mut acc = CompensatedSum::new();
            for &x in &v[..n_us] {
                acc.add(x.powi(j as i32));
            }
            Ok(Moment {
                value: acc.value() / n as f64,
                floating_fallback: false,
            })
        }
        _ => {
            let mut acc: i128 = 0;
            for idx in 0..n_us {
                let v = values.get_i64(idx).unwrap() as i128;
                let term = match checked_pow_i128(v, j) {
                    Some(t) => t,
                    None => {
                        return Ok(Moment {
                            value: float_moment(values, n_us, j),
                            floating_fallback: true,
                        })
                    }
                };
                acc = match acc.checked_add(term) {
                    Some(a) => a,
                    None => {
                        return Ok(Moment {
                            value: float_moment(values, n_us, j),
                            floating_fallback: true,
                        })
                    }
                };
            }
            Ok(Moment {
                value: acc as f64 / n as f64,
                floating_fallback: false,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RemainderPoint {
    pub t: f64,
    pub re_phi: f64,
    pub im_phi: f64,
    pub abs_remainder: f64,
    /// |r(t)| / |t|^order; `None` at t = 0.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RemainderReport {
    pub order: u32,
    pub sample_size: u64,
    pub points: Vec<RemainderPoint>,
    pub max_abs_remainder: f64,
    /// max over t ≠ 0 of |r(t)|/|t|^order — the o(t^order) diagnostic;
    /// recomputing on grids shrinking toward 0 must drive this down.
    pub max_ratio: f64,
}

impl RemainderReport {
    /// CSV with floats at 17 significant digits.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "t,re_phi,im_phi,abs_remainder")?;
        for p in &self.points {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                p.t, p.re_phi, p.im_phi, p.abs_remainder
            )?;
        }
        Ok(())
    }
}

/// Remainder of the order-l Taylor expansion of φ:
/// r(t) = φ(t) − (1 + Σ_{j=1}^{l} (it)^j mⱼ/j!).
pub fn taylor_check(
    samples: &CharFunSamples,
    moments: &[f64],
    order: u32,
) -> Result<RemainderReport> {
    if order == 0 {
        return Err(CoreError::invalid("expansion order must be ≥ 1"));
    }
    if (moments.len() as u32) < order {
        return Err(CoreError::invalid(format!(
            "order-{order} expansion needs {order} moments, got {}",
            moments.len()
        )));
    }
    if samples.t_grid.iter().all(|&t| t == 0.0) {
        return Err(CoreError::InsufficientData(
            "remainder ratio needs at least one t ≠ 0".into(),
        ));
    }

    let mut points = Vec::with_capacity(samples.t_grid.len());
    let mut max_abs = 0.0f64;
    let mut max_ratio = 0.0f64;
    for (&t, &phi) in samples.t_grid.iter().zip(&samples.values) {
        let mut expansion = Complex64::new(1.0, 0.0);
        let it = Complex64::new(0.0, t);
        let mut it_pow = Complex64::new(1.0, 0.0);
        let mut factorial = 1.0f64;
        for j in 1..=order {
            it_pow *= it;
            factorial *= j as f64;
            expansion += it_pow * (moments[(j - 1) as usize] / factorial);
        }
        let r = (phi - expansion).norm();
        let ratio = if t == 0.0 {
            None
        } else {
            let q = r / t.abs().powi(order as i32);
            max_ratio = max_ratio.max(q);
            Some(q)
        };
        max_abs = max_abs.max(r);
        points.push(RemainderPoint {
            t,
            re_phi: phi.re,
            im_phi: phi.im,
            abs_remainder: r,
            ratio,
        });
    }
    Ok(RemainderReport {
        order,
        sample_size: samples.sample_size,
        points,
        max_abs_remainder: max_abs,
        max_ratio,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonPoint {
    pub t: f64,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    /// |LHS(t) − RHS(t)|.
    pub discrepancy: f64,
    /// |t| · |mean_n − limit mean|: the first-order scale the gap between
    /// the two characteristic functions is measured against; `None` when
    /// the kind has no cataloged limit mean.
    pub t_times_mean_gap: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub n: u64,
    pub points: Vec<ComparisonPoint>,
    pub max_discrepancy: f64,
    /// |mean over 1..n − cataloged limit mean|, when cataloged.
    pub mean_gap: Option<f64>,
}

/// Compare the empirical characteristic function of the partial sums,
/// LHS(t) = (1/n) Σ_{k≤n} e^{i t S(k)}, against the i.i.d. surrogate
/// RHS(t) = φ_f(t)^n. Reports |LHS − RHS| per t; this is a measurement —
/// the two genuinely differ for dependent summands.
pub fn product_charfun_compare(
    table: &FunctionTable,
    n: u64,
    t_grid: &[f64],
) -> Result<ComparisonReport> {
    if n == 0 {
        return Err(CoreError::invalid("comparison needs n ≥ 1"));
    }
    if n > table.limit() {
        return Err(CoreError::OutOfRange {
            k: n,
            limit: table.limit(),
        });
    }

    let partial = crate::summatory::prefix_values_f64(table, n)?;
    let f_values: Vec<f64> = (0..n as usize).map(|i| table.values().get_f64(i)).collect();

    let lhs = empirical_charfun(&partial, t_grid)?;
    let phi_f = empirical_charfun(&f_values, t_grid)?;

    let mean_gap = crate::distribution::limit_step_distribution(table.kind())
        .ok()
        .map(|law| {
            let mean_n = moment(table, n, 1).expect("validated above").value;
            (mean_n - law.mean()).abs()
        });

    let mut points = Vec::with_capacity(t_grid.len());
    let mut max_disc = 0.0f64;
    for i in 0..t_grid.len() {
        let t = t_grid[i];
        let l = lhs.values[i];
        // (φ_f)^n in polar form; the modulus may underflow to 0 at large n,
        // which is the honest value of |φ|^n there.
        let p = phi_f.values[i];
        let r = if t == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(p.norm().powf(n as f64), p.arg() * n as f64)
        };
        let discrepancy = (l - r).norm();
        max_disc = max_disc.max(discrepancy);
        points.push(ComparisonPoint {
            t,
            lhs_re: l.re,
            lhs_im: l.im,
            rhs_re: r.re,
            rhs_im: r.im,
            discrepancy,
            t_times_mean_gap: mean_gap.map(|g| t.abs() * g),
        });
    }
    Ok(ComparisonReport {
        n,
        points,
        max_discrepancy: max_disc,
        mean_gap,
    })
}
