//! IIR and moving-average filter primitives for the waveform path.
//!
//! Butterworth low-pass filters are designed as cascades of second-order
//! sections via the bilinear transform and run in direct form II transposed.
//! Coefficients are real; state is complex so the same section filters
//! baseband I/Q streams.

use num_complex::Complex64;

use crate::{Error, Result};

/// One second-order section with complex state.
#[derive(Debug, Clone)]
pub struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    s1: Complex64,
    s2: Complex64,
}

impl Biquad {
    #[inline]
    pub fn process(&mut self, x: Complex64) -> Complex64 {
        let y = self.b0 * x + self.s1;
        self.s1 = self.b1 * x - self.a1 * y + self.s2;
        self.s2 = self.b2 * x - self.a2 * y;
        y
    }

    /// Sets the internal state to the steady state for a constant input, so
    /// the first output sample already equals `c` (the DC gain is one).
    fn seed_steady_state(&mut self, c: Complex64) {
        self.s2 = (self.b2 - self.a2) * c;
        self.s1 = (self.b1 - self.a1) * c + self.s2;
    }

    fn reset(&mut self) {
        self.s1 = Complex64::ZERO;
        self.s2 = Complex64::ZERO;
    }

    /// Frequency response at normalized angular frequency `w` (rad/sample).
    fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = Complex64::from_polar(1.0, -2.0 * w);
        (self.b0 + self.b1 * z1 + self.b2 * z2) / (Complex64::ONE + self.a1 * z1 + self.a2 * z2)
    }
}

/// A cascade of second-order sections.
#[derive(Debug, Clone)]
pub struct SosFilter {
    sections: Vec<Biquad>,
    fs: f64,
}

impl SosFilter {
    /// Designs an even-order Butterworth low-pass by bilinear transform with
    /// cutoff prewarping.
    pub fn butterworth_lowpass(order: usize, cutoff_hz: f64, fs: f64) -> Result<Self> {
        if order == 0 || !order.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "Butterworth order must be even and nonzero, got {order}"
            )));
        }
        if !(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0) {
            return Err(Error::Config(format!(
                "cutoff {cutoff_hz} Hz outside (0, {}) Hz",
                fs / 2.0
            )));
        }
        let k = 1.0 / (std::f64::consts::PI * cutoff_hz / fs).tan();
        let n = order as f64;
        let mut sections = Vec::with_capacity(order / 2);
        for i in 0..order / 2 {
            // Conjugate analog pole pair of the normalized prototype:
            // s^2 + 2 sin(theta) s + 1 with theta = pi(2i+1)/(2n).
            let a = 2.0 * (std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * n)).sin();
            let d0 = k * k + a * k + 1.0;
            sections.push(Biquad {
                b0: 1.0 / d0,
                b1: 2.0 / d0,
                b2: 1.0 / d0,
                a1: (2.0 - 2.0 * k * k) / d0,
                a2: (k * k - a * k + 1.0) / d0,
                s1: Complex64::ZERO,
                s2: Complex64::ZERO,
            });
        }
        Ok(Self { sections, fs })
    }

    #[inline]
    pub fn process(&mut self, x: Complex64) -> Complex64 {
        self.sections.iter_mut().fold(x, |v, s| s.process(v))
    }

    pub fn reset(&mut self) {
        for s in &mut self.sections {
            s.reset();
        }
    }

    /// Seeds every section as if the constant `c` had been applied forever.
    pub fn seed_steady_state(&mut self, c: Complex64) {
        for s in &mut self.sections {
            s.seed_steady_state(c);
        }
    }

    /// Complex frequency response at `f_hz`.
    pub fn response(&self, f_hz: f64) -> Complex64 {
        let w = 2.0 * std::f64::consts::PI * f_hz / self.fs;
        self.sections
            .iter()
            .fold(Complex64::ONE, |acc, s| acc * s.response(w))
    }

    /// Group delay at DC, in samples, from the phase slope near zero.
    pub fn dc_group_delay_samples(&self) -> f64 {
        let w = 1e-4;
        let h = self
            .sections
            .iter()
            .fold(Complex64::ONE, |acc, s| acc * s.response(w));
        -h.arg() / w
    }
}

/// Moving average over the last `len` samples; the matched filter for
/// rectangular NRZ pulses.
#[derive(Debug, Clone)]
pub struct MovingAverage {
    buf: Vec<Complex64>,
    idx: usize,
    sum: Complex64,
    scale: f64,
}

impl MovingAverage {
    pub fn new(len: usize) -> Self {
        assert!(len > 0);
        Self {
            buf: vec![Complex64::ZERO; len],
            idx: 0,
            sum: Complex64::ZERO,
            scale: 1.0 / len as f64,
        }
    }

    #[inline]
    pub fn process(&mut self, x: Complex64) -> Complex64 {
        self.sum += x - self.buf[self.idx];
        self.buf[self.idx] = x;
        self.idx += 1;
        if self.idx == self.buf.len() {
            self.idx = 0;
            // Resumming once per wrap keeps f64 drift from accumulating over
            // billion-sample runs without changing chunk boundaries.
            self.sum = self.buf.iter().sum();
        }
        self.sum * self.scale
    }

    pub fn reset(&mut self) {
        self.buf.fill(Complex64::ZERO);
        self.sum = Complex64::ZERO;
        self.idx = 0;
    }
}
