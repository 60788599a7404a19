//! Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.
//!
//! Used as the second, special-function-free route to the classical envelope
//! and as the fallback when an Airy argument leaves the reliable range.

use crate::error::{Error, Result};

pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_steps: 2_000_000 }
    }
}

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Stepper<'a, const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> {
    f: &'a F,
    opts: &'a OdeOptions,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    steps: usize,
}

fn axpy<const N: usize>(y: &[f64; N], coeffs: &[f64], ks: &[[f64; N]], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in coeffs.iter().zip(ks.iter()) {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl<'a, const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> Stepper<'a, N, F> {
    fn new(f: &'a F, t0: f64, y0: [f64; N], h0: f64, opts: &'a OdeOptions) -> Self {
        let k1 = f(t0, &y0);
        Self { f, opts, t: t0, y: y0, k1, h: h0, steps: 0 }
    }

    /// Advance to exactly `t_target` (which must be >= current t).
    fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target {
            let h = self.h.min(t_target - self.t);
            let f = self.f;
            let t = self.t;
            let y = self.y;
            let k1 = self.k1;
            let k2 = f(t + C[0] * h, &axpy(&y, &A2, &[k1], h));
            let k3 = f(t + C[1] * h, &axpy(&y, &A3, &[k1, k2], h));
            let k4 = f(t + C[2] * h, &axpy(&y, &A4, &[k1, k2, k3], h));
            let k5 = f(t + C[3] * h, &axpy(&y, &A5, &[k1, k2, k3, k4], h));
            let k6 = f(t + C[4] * h, &axpy(&y, &A6, &[k1, k2, k3, k4, k5], h));
            let ks = [k1, k2, k3, k4, k5, k6, [0.0; N]];
            let y5 = axpy(&y, &B5[..6], &ks[..6], h);
            let k7 = f(t + h, &y5);
            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = h
                    * ((B5[0] - B4[0]) * k1[i]
                        + (B5[2] - B4[2]) * k3[i]
                        + (B5[3] - B4[3]) * k4[i]
                        + (B5[4] - B4[4]) * k5[i]
                        + (B5[5] - B4[5]) * k6[i]
                        + (B5[6] - B4[6]) * k7[i]);
                let scale = self.opts.atol + self.opts.rtol * y[i].abs().max(y5[i].abs());
                err += (e / scale) * (e / scale);
            }
            let err = (err / N as f64).sqrt();
            if err <= 1.0 {
                self.t = t + h;
                self.y = y5;
                self.k1 = k7; // FSAL
            }
            let factor = if err > 0.0 {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            self.h = h * factor;
            if self.h < 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::Tolerance(format!(
                    "ode step size underflow at t = {}",
                    self.t
                )));
            }
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(Error::Tolerance("ode exceeded max step count".into()));
            }
        }
        Ok(())
    }
}

/// Integrate `y' = f(t, y)` from `t0` to `t_end >= t0`, returning y(t_end).
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
) -> Result<[f64; N]> {
    let mut stepper = Stepper::new(&f, t0, y0, initial_step(t0, t_end), opts);
    stepper.advance_to(t_end)?;
    Ok(stepper.y)
}

/// Integrate and record the state at each (ascending) sample time.
pub fn integrate_path<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    samples: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<[f64; N]>> {
    let mut out = Vec::with_capacity(samples.len());
    let first = *samples.first().unwrap_or(&t0);
    let mut stepper = Stepper::new(&f, t0, y0, initial_step(t0, first.max(t0 + 1.0)), opts);
    for &t in samples {
        if t < t0 - 1e-15 * t0.abs() {
            return Err(Error::Domain(format!("sample time {t} precedes t0 = {t0}")));
        }
        stepper.advance_to(t)?;
        out.push(stepper.y);
    }
    Ok(out)
}

fn initial_step(t0: f64, t_end: f64) -> f64 {
    ((t_end - t0).abs() * 1e-4).max(1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let y = integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 3.0, &OdeOptions::default())
            .unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let opts = OdeOptions::default();
        let y = integrate(
            |_, y: &[f64; 2]| [y[1], -4.0 * y[0]],
            0.0,
            [1.0, 0.0],
            25.0,
            &opts,
        )
        .unwrap();
        let energy = 4.0 * y[0] * y[0] + y[1] * y[1];
        assert!((energy - 4.0).abs() < 1e-9, "energy drift: {energy}");
    }

    #[test]
    fn path_sampling_matches_single_shot() {
        let opts = OdeOptions::default();
        let samples = [0.5, 1.0, 2.0, 3.0];
        let path = integrate_path(
            |t, y: &[f64; 1]| [t * y[0]],
            0.0,
            [1.0],
            &samples,
            &opts,
        )
        .unwrap();
        for (&t, y) in samples.iter().zip(&path) {
            assert!((y[0] - (t * t / 2.0).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_preceding_sample() {
        let opts = OdeOptions::default();
        let result = integrate_path(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0], &[0.5], &opts);
        assert!(result.is_err());
    }
}
