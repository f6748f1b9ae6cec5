//! Adaptive Dormand-Prince 5(4) integrator over fixed-size state vectors.

use nalgebra::SVector;

use crate::error::{to_f64, Error, Result};
use crate::scalar::{lit, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions<T: Real> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Upper bound on the step size; `None` leaves it unbounded.
    pub max_step: Option<T>,
    /// Steps shorter than this abort with [`Error::StepFailure`].
    pub min_step: T,
    pub max_steps: usize,
}

impl<T: Real> IntegratorOptions<T> {
    pub fn new(rel_tol: T, abs_tol: T) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_step: None,
            min_step: lit(1e-10),
            max_steps: 50_000_000,
        }
    }

    pub fn with_max_step(mut self, h: T) -> Self {
        self.max_step = Some(h);
        self
    }
}

impl<T: Real> Default for IntegratorOptions<T> {
    fn default() -> Self {
        Self::new(lit(1e-12), lit(1e-12))
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights are the last row of A; these are fifth minus fourth order.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` and returns the state at each of `times`
/// (ascending, all `>= t0`). Steps are shortened to land exactly on every sample.
pub fn integrate<T, const N: usize, F>(
    mut f: F,
    t0: T,
    y0: SVector<T, N>,
    times: &[T],
    opts: &IntegratorOptions<T>,
) -> Result<Vec<SVector<T, N>>>
where
    T: Real,
    F: FnMut(T, &SVector<T, N>) -> Result<SVector<T, N>>,
{
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidInput("sample times must be ascending and >= t0".into()));
    }
    let a: [[T; 6]; 7] = A.map(|row| row.map(lit));
    let c: [T; 7] = C.map(lit);
    let e: [T; 7] = E.map(lit);

    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let mut h = initial_step(&y, &k1, opts);
    let mut steps = 0usize;
    let mut k = [SVector::<T, N>::zeros(); 7];

    for &target in times {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::StepFailure { t: to_f64(t) });
            }
            if let Some(hmax) = opts.max_step {
                h = h.min(hmax);
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };

            k[0] = k1;
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    if a[s][j] != T::zero() {
                        ys += kj * (a[s][j] * step);
                    }
                }
                k[s] = f(t + c[s] * step, &ys)?;
            }
            let mut y_new = y;
            for (j, kj) in k.iter().enumerate().take(6) {
                if a[6][j] != T::zero() {
                    y_new += kj * (a[6][j] * step);
                }
            }
            let mut err_vec = SVector::<T, N>::zeros();
            for (j, kj) in k.iter().enumerate() {
                if e[j] != T::zero() {
                    err_vec += kj * (e[j] * step);
                }
            }
            let mut sum = T::zero();
            for i in 0..N {
                let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
                let r = err_vec[i] / sc;
                sum += r * r;
            }
            let err = (sum / lit(N as f64)).sqrt();
            if !err.is_finite() {
                h = step * lit(0.25);
                if h < opts.min_step {
                    return Err(Error::StepFailure { t: to_f64(t) });
                }
                continue;
            }
            let factor = if err == T::zero() {
                lit(5.0)
            } else {
                (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.2)).min(lit(5.0))
            };
            if err <= T::one() {
                t = if last { target } else { t + step };
                y = y_new;
                k1 = k[6];
                // Keep the unclipped step size when a step was cut short by a sample time.
                h = if last { h.max(step * factor) } else { step * factor };
            } else {
                h = step * factor.min(T::one());
                if h < opts.min_step {
                    return Err(Error::StepFailure { t: to_f64(t) });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

fn initial_step<T: Real, const N: usize>(
    y: &SVector<T, N>,
    dy: &SVector<T, N>,
    opts: &IntegratorOptions<T>,
) -> T {
    let mut d0 = T::zero();
    let mut d1 = T::zero();
    for i in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y[i].abs();
        d0 += (y[i] / sc) * (y[i] / sc);
        d1 += (dy[i] / sc) * (dy[i] / sc);
    }
    let h = if d0 < lit(1e-10) || d1 < lit(1e-10) {
        lit(1e-6)
    } else {
        lit::<T>(0.01) * (d0 / d1).sqrt()
    };
    match opts.max_step {
        Some(hmax) => h.min(hmax),
        None => h,
    }
}
