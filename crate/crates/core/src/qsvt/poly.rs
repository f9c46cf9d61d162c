//! Odd Chebyshev polynomials approximating `1/(κβx)` on `[1/κ, 1]`.
//!
//! `1/x` itself has a pole inside `[-1, 1]`, so the polynomial interpolates a
//! smooth odd surrogate that agrees with `1/(κβx)` on the window to well below
//! `ε′` and stays bounded in the gap `(-1/κ, 1/κ)`:
//!
//! ```text
//! f(x) = s(x) / (κβx),
//! s(x) = 1 − [erf((x + c)/w) − erf((x − c)/w)] / (2 erf(c/w))
//! ```
//!
//! `s` is even, vanishes at the origin and rises to 1 around `|x| = c`, so `f`
//! is odd and entire. The width is `w = (1/κ − c)/t` with `t = √(2 ln(1/ε′))`
//! (or more if needed for a surrogate error of at most `ε′/4` on the window); the centre `c` sits where `1/(κβc) = 0.95`,
//! moved outward by bisection only if `max |f| ≤ 0.95` would fail there. Chebyshev coefficients of `f` are
//! computed once by a DCT, and the degree is the smallest odd truncation that
//! meets both the window error and the global bound on dense grids.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use statrs::function::erf::{erf, erfc, erfc_inv};

use crate::error::{Error, Result};

/// Points in each of the window and global check grids.
pub const GRID_POINTS: usize = 10_000;

/// Slack on the global bound `|p| ≤ 1` used by invariant checks.
pub const BOUND_TOL: f64 = 1e-8;

/// Headroom kept between the surrogate's peak and 1.
const SURROGATE_PEAK: f64 = 0.95;

/// Log-amplitude lost to the Chebyshev prefactor when truncating a smoothed
/// step; the width schedule divides it out so the degree tracks `κ ln(1/ε′)`.
const TAIL_SHIFT: f64 = 3.3;

const MIN_NODES: usize = 256;
const MAX_NODES: usize = 1 << 18;

/// Odd polynomial `p` with `|p(x) − 1/(κβx)| ≤ ε′` on `1/κ ≤ |x| ≤ 1`
/// and `|p| ≤ 1` on `[-1, 1]`, stored in the Chebyshev basis.
#[derive(Clone, Debug)]
pub struct InversePolynomial {
    coefficients: Vec<f64>,
    degree: usize,
    kappa: f64,
    beta: f64,
    eps_prime: f64,
    window_error: f64,
    max_abs: f64,
    lipschitz: f64,
}

impl InversePolynomial {
    /// Chebyshev coefficients `c_0..c_d`; even entries are exactly zero.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eps_prime(&self) -> f64 {
        self.eps_prime
    }

    /// Worst window error seen on the check grid.
    pub fn window_error(&self) -> f64 {
        self.window_error
    }

    /// `max |p|` seen on the global check grid.
    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    /// Grid estimate of `max |p′|` on `[-1, 1]`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Left edge `1/κ` of the approximation window.
    pub fn window_edge(&self) -> f64 {
        1.0 / self.kappa
    }

    /// The function approximated on the window, `1/(κβx)`.
    pub fn target(&self, x: f64) -> f64 {
        1.0 / (self.kappa * self.beta * x)
    }

    /// Clenshaw evaluation of the Chebyshev series.
    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coefficients, x)
    }
}

pub(crate) fn clenshaw(c: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + c.first().copied().unwrap_or(0.0)
}

/// Smooth odd surrogate of `1/(κβx)`.
#[derive(Clone, Copy, Debug)]
struct Surrogate {
    scale: f64,
    centre: f64,
    width: f64,
    norm: f64,
}

impl Surrogate {
    fn new(kappa: f64, beta: f64, centre: f64, width: f64) -> Self {
        Surrogate {
            scale: 1.0 / (kappa * beta),
            centre,
            width,
            norm: erf(centre / width),
        }
    }

    /// Gaussian mass of `[x − c, x + c]`, evaluated so that it stays accurate
    /// when it is tiny.
    fn bracket(&self, x: f64) -> f64 {
        let x = x.abs();
        let (c, w) = (self.centre, self.width);
        if x > c {
            0.5 * (erfc((x - c) / w) - erfc((x + c) / w))
        } else {
            0.5 * (erf((x + c) / w) + erf((c - x) / w))
        }
    }

    fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let s = 1.0 - self.bracket(x) / self.norm;
        s * self.scale / x
    }
}

/// Chebyshev interpolation coefficients at `n` first-kind nodes via a
/// length-`2n` FFT of the even extension.
fn chebyshev_coefficients(f: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
    let samples: Vec<f64> = (0..n)
        .map(|j| f((std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos()))
        .collect();
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .chain(samples.iter().rev())
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(2 * n).process(&mut buf);
    let mut c: Vec<f64> = (0..n)
        .map(|k| {
            let phase = Complex::from_polar(1.0, -std::f64::consts::PI * k as f64 / (2 * n) as f64);
            (buf[k] * phase).re / n as f64
        })
        .collect();
    c[0] *= 0.5;
    c
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn surrogate_peak(kappa: f64, beta: f64, centre: f64, width: f64) -> f64 {
    let sur = Surrogate::new(kappa, beta, centre, width);
    let edge = 1.0 / kappa;
    // the peak lies in the gap or at the window edge
    linspace(edge * 1e-3, edge * 1.5, 3000)
        .into_iter()
        .map(|x| sur.eval(x).abs())
        .fold(0.0, f64::max)
}

/// Finds the smallest odd degree meeting the window error and global bound.
///
/// `kappa = 1` makes the window `{±1}`, where `x/β` is exact.
pub fn build_inverse_polynomial(kappa: f64, eps_prime: f64, beta: f64) -> Result<InversePolynomial> {
    if !(kappa.is_finite() && kappa >= 1.0) {
        return Err(Error::InvalidPolynomial(format!("kappa must be >= 1, got {kappa}")));
    }
    if !(eps_prime > 0.0 && eps_prime < 1.0) {
        return Err(Error::InvalidPolynomial(format!(
            "eps_prime must lie in (0, 1), got {eps_prime}"
        )));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidPolynomial(format!("beta must be positive, got {beta}")));
    }
    if beta < 1.0 {
        return Err(Error::InfeasibleBeta {
            beta,
            reason: "the target 1/(κβx) exceeds 1 at the window edge".into(),
        });
    }
    if kappa == 1.0 {
        return Ok(InversePolynomial {
            coefficients: vec![0.0, 1.0 / beta],
            degree: 1,
            kappa,
            beta,
            eps_prime,
            window_error: 0.0,
            max_abs: 1.0 / beta,
            lipschitz: 1.0 / beta,
        });
    }
    if beta * SURROGATE_PEAK <= 1.0 {
        return Err(Error::InfeasibleBeta {
            beta,
            reason: format!("need beta > {:.4} to keep |p| <= 1", 1.0 / SURROGATE_PEAK),
        });
    }

    let edge = 1.0 / kappa;
    // truncating a step of width w at ε′ needs a degree of about
    // (t/w)·√(ln(1/ε′) − TAIL_SHIFT); this t makes that proportional to κ ln(1/ε′)
    let log_inv = (1.0 / eps_prime).ln();
    let tail = (2.0_f64.sqrt() * log_inv / (log_inv - TAIL_SHIFT).max(1.0).sqrt())
        .max(erfc_inv((eps_prime * beta / 4.0).min(0.5)));
    let width_for = |centre: f64| (edge - centre) / tail;

    // centre where the target reaches the peak bound; beyond it s ≤ 1 keeps
    // the surrogate below the bound, and inside a sharp step keeps it small
    let feasible = |u: f64| surrogate_peak(kappa, beta, u * edge, width_for(u * edge)) <= SURROGATE_PEAK;
    let start = 1.0 / (SURROGATE_PEAK * beta);
    let (mut lo, mut hi) = (start, 1.0 - 1e-3);
    if feasible(start) {
        hi = start;
    } else if !feasible(hi) {
        return Err(Error::InfeasibleBeta {
            beta,
            reason: "no bounded surrogate exists".into(),
        });
    } else {
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let centre = hi * edge;
    let width = width_for(centre);
    let sur = Surrogate::new(kappa, beta, centre, width);

    // enough nodes that the aliased coefficient tail is negligible
    let estimate = (6.0 * tail / width).ceil() as usize;
    let mut nodes = (2 * estimate).next_power_of_two().max(MIN_NODES);
    let coeffs = loop {
        let mut c = chebyshev_coefficients(|x| sur.eval(x), nodes);
        for (k, ck) in c.iter_mut().enumerate() {
            if k % 2 == 0 {
                *ck = 0.0;
            }
        }
        let head = c.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let tail_max = c[nodes * 3 / 4..]
            .iter()
            .fold(0.0_f64, |a, v| a.max(v.abs()));
        if tail_max <= 1e-4 * eps_prime * head.max(1.0) || nodes >= MAX_NODES {
            break c;
        }
        nodes *= 2;
    };

    search_degree(&coeffs, kappa, beta, eps_prime)
}

fn search_degree(coeffs: &[f64], kappa: f64, beta: f64, eps_prime: f64) -> Result<InversePolynomial> {
    let edge = 1.0 / kappa;
    let window = linspace(edge, 1.0, GRID_POINTS);
    let global = linspace(0.0, 1.0, GRID_POINTS);
    let target: Vec<f64> = window.iter().map(|&x| 1.0 / (kappa * beta * x)).collect();

    struct Track {
        xs: Vec<f64>,
        prev: Vec<f64>,
        cur: Vec<f64>,
        sum: Vec<f64>,
    }
    impl Track {
        fn new(xs: Vec<f64>) -> Self {
            let n = xs.len();
            Track {
                prev: vec![1.0; n],
                cur: xs.clone(),
                sum: vec![0.0; n],
                xs,
            }
        }
        fn advance(&mut self) {
            for i in 0..self.xs.len() {
                let next = 2.0 * self.xs[i] * self.cur[i] - self.prev[i];
                self.prev[i] = self.cur[i];
                self.cur[i] = next;
            }
        }
        fn accumulate(&mut self, c: f64) {
            for (s, t) in self.sum.iter_mut().zip(&self.cur) {
                *s += c * t;
            }
        }
    }

    let mut win = Track::new(window);
    let mut glo = Track::new(global);
    // both tracks start at T_1
    let mut k = 1;
    while k < coeffs.len() {
        win.accumulate(coeffs[k]);
        glo.accumulate(coeffs[k]);
        let window_error = win
            .sum
            .iter()
            .zip(&target)
            .fold(0.0_f64, |a, (p, t)| a.max((p - t).abs()));
        let max_abs = glo.sum.iter().fold(0.0_f64, |a, p| a.max(p.abs()));
        if window_error <= eps_prime && max_abs <= 1.0 {
            let h = glo.xs[1] - glo.xs[0];
            let lipschitz = glo
                .sum
                .windows(2)
                .map(|w| (w[1] - w[0]).abs() / h)
                .fold(0.0, f64::max);
            return Ok(InversePolynomial {
                coefficients: coeffs[..=k].to_vec(),
                degree: k,
                kappa,
                beta,
                eps_prime,
                window_error,
                max_abs,
                lipschitz,
            });
        }
        win.advance();
        win.advance();
        glo.advance();
        glo.advance();
        k += 2;
    }
    Err(Error::InvalidPolynomial(format!(
        "no odd degree below {} meets eps_prime = {eps_prime:e} at kappa = {kappa}",
        coeffs.len()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clenshaw_matches_direct_sum() {
        let c = [0.0, 0.5, 0.0, -0.25, 0.0, 0.125];
        for &x in &[-0.9, -0.3, 0.0, 0.4, 1.0] {
            let t: f64 = (0..c.len())
                .map(|k| c[k] * (k as f64 * f64::acos(x)).cos())
                .sum();
            assert!((clenshaw(&c, x) - t).abs() < 1e-14);
        }
    }

    #[test]
    fn dct_recovers_known_series() {
        let f = |x: f64| 0.3 * x + 0.2 * (4.0 * x.powi(3) - 3.0 * x);
        let c = chebyshev_coefficients(f, 64);
        assert!((c[1] - 0.3).abs() < 1e-14);
        assert!((c[3] - 0.2).abs() < 1e-14);
        assert!(c.iter().enumerate().all(|(k, v)| k == 1 || k == 3 || v.abs() < 1e-14));
    }

    #[test]
    fn surrogate_matches_target_on_window() {
        let (kappa, beta, eps) = (4.0, 2.0, 1e-6);
        let edge = 1.0 / kappa;
        let tail = erfc_inv(eps * beta / 4.0);
        let centre = 0.5 * edge;
        let sur = Surrogate::new(kappa, beta, centre, (edge - centre) / tail);
        for x in linspace(edge, 1.0, 200) {
            assert!((sur.eval(x) - 1.0 / (kappa * beta * x)).abs() <= eps / 4.0);
            assert!((sur.eval(-x) + sur.eval(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_kappa_is_linear() {
        let p = build_inverse_polynomial(1.0, 1e-3, 2.0).unwrap();
        assert_eq!(p.degree(), 1);
        assert_eq!(p.eval(1.0), 0.5);
        assert_eq!(p.eval(-1.0), -0.5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_inverse_polynomial(0.5, 1e-3, 2.0).is_err());
        assert!(build_inverse_polynomial(2.0, 0.0, 2.0).is_err());
        assert!(build_inverse_polynomial(2.0, 1e-3, -1.0).is_err());
        assert!(matches!(
            build_inverse_polynomial(2.0, 1e-3, 0.9),
            Err(Error::InfeasibleBeta { .. })
        ));
        assert!(matches!(
            build_inverse_polynomial(2.0, 1e-3, 1.02),
            Err(Error::InfeasibleBeta { .. })
        ));
    }
}
