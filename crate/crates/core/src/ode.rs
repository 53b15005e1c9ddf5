//! Adaptive explicit Runge–Kutta integration (Dormand–Prince 5(4)).
//!
//! One embedded-pair stepper serves all propagation in the crate: complex
//! state vectors, dense density matrices and real covariance blocks. The
//! controller is a standard I-controller with safety factor 0.9 and step
//! clamping; steps land exactly on requested output times.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

type C64 = Complex<f64>;

/// State storage the stepper can integrate.
pub trait OdeState: Clone {
    fn zeros_like(&self) -> Self;
    fn set_zero(&mut self);
    /// self = y.
    fn assign(&mut self, y: &Self);
    /// self += c · k.
    fn axpy(&mut self, c: f64, k: &Self);
    /// Scaled error norm: RMS over components of |e| / (atol + rtol·max(|y0|, |y1|)).
    fn error_norm(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64;
}

impl OdeState for DVector<C64> {
    fn zeros_like(&self) -> Self {
        DVector::zeros(self.len())
    }

    fn set_zero(&mut self) {
        self.fill(C64::new(0.0, 0.0));
    }

    fn assign(&mut self, y: &Self) {
        self.copy_from(y);
    }

    fn axpy(&mut self, c: f64, k: &Self) {
        let cs = self.as_mut_slice();
        let ks = k.as_slice();
        for (a, b) in cs.iter_mut().zip(ks) {
            a.re += c * b.re;
            a.im += c * b.im;
        }
    }

    fn error_norm(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        scaled_rms(
            err.as_slice().iter().map(|v| v.norm_sqr()),
            y0.as_slice()
                .iter()
                .zip(y1.as_slice())
                .map(|(a, b)| a.norm_sqr().max(b.norm_sqr())),
            atol,
            rtol,
        )
    }
}

impl OdeState for DMatrix<C64> {
    fn zeros_like(&self) -> Self {
        DMatrix::zeros(self.nrows(), self.ncols())
    }

    fn set_zero(&mut self) {
        self.fill(C64::new(0.0, 0.0));
    }

    fn assign(&mut self, y: &Self) {
        self.copy_from(y);
    }

    fn axpy(&mut self, c: f64, k: &Self) {
        for (a, b) in self.as_mut_slice().iter_mut().zip(k.as_slice()) {
            a.re += c * b.re;
            a.im += c * b.im;
        }
    }

    fn error_norm(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        scaled_rms(
            err.as_slice().iter().map(|v| v.norm_sqr()),
            y0.as_slice()
                .iter()
                .zip(y1.as_slice())
                .map(|(a, b)| a.norm_sqr().max(b.norm_sqr())),
            atol,
            rtol,
        )
    }
}

impl OdeState for DVector<f64> {
    fn zeros_like(&self) -> Self {
        DVector::zeros(self.len())
    }

    fn set_zero(&mut self) {
        self.fill(0.0);
    }

    fn assign(&mut self, y: &Self) {
        self.copy_from(y);
    }

    fn axpy(&mut self, c: f64, k: &Self) {
        for (a, b) in self.as_mut_slice().iter_mut().zip(k.as_slice()) {
            *a += c * b;
        }
    }

    fn error_norm(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        scaled_rms(
            err.as_slice().iter().map(|v| v * v),
            y0.as_slice()
                .iter()
                .zip(y1.as_slice())
                .map(|(a, b)| (a * a).max(b * b)),
            atol,
            rtol,
        )
    }
}

fn scaled_rms(
    err_sq: impl Iterator<Item = f64>,
    mag_sq: impl Iterator<Item = f64>,
    atol: f64,
    rtol: f64,
) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (e2, m2) in err_sq.zip(mag_sq) {
        let scale = atol + rtol * m2.sqrt();
        sum += e2 / (scale * scale);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

// Dormand–Prince 5(4) tableau (Hairer–Nørsett–Wanner, Table II.5.2).
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// 5th-order weights equal the last row of A (FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

// Error weights: b5 − b4.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step accepted before reporting stiffness.
    pub h_min: f64,
    pub max_steps: u64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-8,
            atol: 1e-12,
            h_min: 1e-13,
            max_steps: u64::MAX,
        }
    }
}

/// Reusable Dormand–Prince 5(4) integrator for a fixed right-hand side.
pub struct DormandPrince<S: OdeState, F: FnMut(f64, &S, &mut S)> {
    rhs: F,
    opts: OdeOptions,
    k: Vec<S>,
    y_tmp: S,
    y_next: S,
    err: S,
    /// Valid FSAL derivative at the current state, if any.
    fsal: bool,
    h: f64,
    steps_taken: u64,
}

impl<S: OdeState, F: FnMut(f64, &S, &mut S)> DormandPrince<S, F> {
    pub fn new(rhs: F, template: &S, opts: OdeOptions) -> Self {
        let k = (0..7).map(|_| template.zeros_like()).collect();
        DormandPrince {
            rhs,
            opts,
            k,
            y_tmp: template.zeros_like(),
            y_next: template.zeros_like(),
            err: template.zeros_like(),
            fsal: false,
            h: 0.0,
            steps_taken: 0,
        }
    }

    /// Drop the cached derivative after a discontinuous state change.
    pub fn invalidate_fsal(&mut self) {
        self.fsal = false;
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    fn initial_step(&mut self, t: f64, y: &S, t_end: f64) -> f64 {
        // Cheap heuristic: start small relative to the span; the controller
        // grows the step quickly if the problem allows it.
        let span = (t_end - t).abs().max(1e-12);
        (span * 1e-4).min(span)
    }

    /// Advance from (t, y) to exactly t_end, calling `observer` after every
    /// accepted step as observer(t_prev, t_new, y_prev, y_new); the observer
    /// returns false to abort integration at y_new.
    pub fn integrate_to<O>(
        &mut self,
        t: f64,
        y: &mut S,
        t_end: f64,
        mut observer: O,
    ) -> Result<f64>
    where
        O: FnMut(f64, f64, &S, &S) -> bool,
    {
        if t_end == t {
            return Ok(t);
        }
        assert!(t_end > t, "integration must run forward");
        let mut t_now = t;
        if self.h <= 0.0 {
            self.h = self.initial_step(t_now, y, t_end);
        }
        if !self.fsal {
            (self.rhs)(t_now, y, &mut self.k[0]);
            self.fsal = true;
        }

        while t_now < t_end {
            let mut h = self.h.min(t_end - t_now);
            let clipped = h < self.h;

            loop {
                self.steps_taken += 1;
                if self.steps_taken > self.opts.max_steps {
                    return Err(Error::Numerical(format!(
                        "step budget exhausted at t = {t_now:.6e}"
                    )));
                }
                // Stages 2..7.
                for s in 0..6 {
                    self.y_tmp.assign(y);
                    for (j, a) in A[s].iter().enumerate().take(s + 1) {
                        if *a != 0.0 {
                            self.y_tmp.axpy(h * a, &self.k[j]);
                        }
                    }
                    let c_node = match s {
                        0 => 0.2,
                        1 => 0.3,
                        2 => 0.8,
                        3 => 8.0 / 9.0,
                        _ => 1.0,
                    };
                    let (head, tail) = self.k.split_at_mut(s + 1);
                    let _ = head;
                    (self.rhs)(t_now + c_node * h, &self.y_tmp, &mut tail[0]);
                }

                // 5th-order solution and embedded error.
                self.y_next.assign(y);
                for (j, b) in B5.iter().enumerate() {
                    if *b != 0.0 {
                        self.y_next.axpy(h * b, &self.k[j]);
                    }
                }
                self.err.set_zero();
                for (j, e) in E.iter().enumerate() {
                    if *e != 0.0 {
                        self.err.axpy(h * e, &self.k[j]);
                    }
                }

                let err_norm =
                    S::error_norm(&self.err, y, &self.y_next, self.opts.atol, self.opts.rtol);

                if err_norm <= 1.0 {
                    let t_new = t_now + h;
                    let grow = if err_norm == 0.0 {
                        5.0
                    } else {
                        (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    if !clipped || grow < 1.0 {
                        self.h = h * grow;
                    }
                    // FSAL: k7 is the derivative at the accepted point.
                    self.k.swap(0, 6);
                    std::mem::swap(y, &mut self.y_next);
                    let keep_going = observer(t_now, t_new, &self.y_next, y);
                    t_now = t_new;
                    if !keep_going {
                        return Ok(t_now);
                    }
                    break;
                }

                h *= (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9);
                if h < self.opts.h_min {
                    return Err(Error::StepSizeUnderflow { t: t_now, h });
                }
                // Rejected: k[0] still holds the derivative at y.
            }
        }
        Ok(t_now)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay_matches_analytic() {
        let y0 = DVector::from_vec(vec![1.0f64]);
        let mut y = y0.clone();
        let mut stepper = DormandPrince::new(
            |_t, y: &DVector<f64>, dy: &mut DVector<f64>| dy[0] = -2.0 * y[0],
            &y0,
            OdeOptions {
                rtol: 1e-10,
                atol: 1e-14,
                ..Default::default()
            },
        );
        stepper
            .integrate_to(0.0, &mut y, 3.0, |_, _, _, _| true)
            .unwrap();
        assert_relative_eq!(y[0], (-6.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn harmonic_oscillator_preserves_energy() {
        let y0 = DVector::from_vec(vec![1.0f64, 0.0]);
        let mut y = y0.clone();
        let omega = 5.0;
        let mut stepper = DormandPrince::new(
            move |_t, y: &DVector<f64>, dy: &mut DVector<f64>| {
                dy[0] = omega * y[1];
                dy[1] = -omega * y[0];
            },
            &y0,
            OdeOptions {
                rtol: 1e-10,
                atol: 1e-14,
                ..Default::default()
            },
        );
        stepper
            .integrate_to(0.0, &mut y, 10.0, |_, _, _, _| true)
            .unwrap();
        let energy = y[0] * y[0] + y[1] * y[1];
        assert_relative_eq!(energy, 1.0, epsilon = 1e-7);
        assert_relative_eq!(y[0], (50.0f64).cos(), epsilon = 1e-6);
    }

    #[test]
    fn complex_phase_rotation() {
        let y0 = DVector::from_vec(vec![Complex::new(1.0, 0.0)]);
        let mut y = y0.clone();
        let mut stepper = DormandPrince::new(
            |_t, y: &DVector<C64>, dy: &mut DVector<C64>| {
                dy[0] = Complex::new(0.0, -3.0) * y[0];
            },
            &y0,
            OdeOptions::default(),
        );
        stepper
            .integrate_to(0.0, &mut y, 2.0, |_, _, _, _| true)
            .unwrap();
        assert_relative_eq!(y[0].re, 6.0f64.cos(), epsilon = 1e-7);
        assert_relative_eq!(y[0].im, -(6.0f64.sin()), epsilon = 1e-7);
        assert_relative_eq!(y[0].norm(), 1.0, epsilon = 1e-7);
    }

    #[test]
    fn observer_can_stop_integration() {
        let y0 = DVector::from_vec(vec![1.0f64]);
        let mut y = y0.clone();
        let mut stepper = DormandPrince::new(
            |_t, y: &DVector<f64>, dy: &mut DVector<f64>| dy[0] = -y[0],
            &y0,
            OdeOptions::default(),
        );
        let t_stop = stepper
            .integrate_to(0.0, &mut y, 100.0, |_, _, _, y_new| y_new[0] > 0.5)
            .unwrap();
        assert!(t_stop < 100.0);
        assert!(y[0] <= 0.5 + 1e-6);
    }
}
