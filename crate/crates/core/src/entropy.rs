//! Eve's conditional-entropy lower bound.
//!
//! The secrecy of a key round is certified through the correlation between
//! Alice's virtual complementary observables and Bob's subsystem. Given an
//! observed CHSH value `S` and the key-basis mixing weight `lambda`, the
//! tightest correlation any compatible qubit device must still exhibit is the
//! minimum of
//!
//! ```text
//!   s²g² + c²h² + 2(2λ-1)·s·c·g·h·Δ
//! ```
//!
//! over all device parameters satisfying
//!
//! ```text
//!   cg + sh ≥ S/2,  g² ≤ 1,  h² ≤ 1,  (1-g²)(1-h²) ≥ g²h²Δ²,
//!   c² + s² = 1,    Δ² ≤ 1,
//! ```
//!
//! where `(s, c)` parameterize Alice's basis angle and `(g, h, Δ)` the
//! Pauli-correlation matrix of the device. `Δ` enters linearly, so the
//! adversarial choice saturates `|Δ| = min(1, √((1-g²)(1-h²))/(gh))` with the
//! sign that lowers the objective; the search then runs over `(φ_A/2, h)` with
//! `g` pinned to the active CHSH constraint. The entropy bound follows by
//! feeding the square root of this minimum through the binary-entropy gain
//! function, optionally with Alice's noise-preprocessing flip folded in, and
//! taking the lower convex envelope in `S`.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::tolerances;

/// Upper end of the CHSH range, `2√2`.
pub const S_MAX: f64 = 2.0 * std::f64::consts::SQRT_2;
/// Classical CHSH bound; below it no secrecy is certified.
pub const S_MIN: f64 = 2.0;

/// Binary Shannon entropy `h(x) = -x log2 x - (1-x) log2 (1-x)`, with
/// `h(0) = h(1) = 0` by continuous extension.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_range("x", x, 0.0, 1.0)?;
    Ok(binary_entropy_unchecked(x))
}

pub(crate) fn binary_entropy_unchecked(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// `φ(x) = h(1/2 + x/2)` on [0, 1].
fn phi(x: f64) -> f64 {
    binary_entropy_unchecked(0.5 + 0.5 * x)
}

/// Entropy gain `g(x) = 1 - φ(x)`, mapping a certified correlation in [0, 1]
/// to a conditional-entropy lower bound in [0, 1].
pub fn g_bound(x: f64) -> Result<f64> {
    check_range("x", x, 0.0, 1.0)?;
    Ok(1.0 - phi(x))
}

/// Entropy gain with noise preprocessing,
/// `g(x, q) = 1 + φ(√((1-2q)² + 4q(1-q)x²)) - φ(x)`; reduces to [`g_bound`]
/// at `q = 0`.
pub fn g_bound_q(x: f64, q: f64) -> Result<f64> {
    check_range("x", x, 0.0, 1.0)?;
    check_range("q", q, 0.0, 0.5)?;
    let inner = ((1.0 - 2.0 * q).powi(2) + 4.0 * q * (1.0 - q) * x * x).sqrt();
    Ok(1.0 + phi(inner.min(1.0)) - phi(x))
}

/// Device parameters witnessing the optimum of the correlation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationWitness {
    /// `sin(φ_A/2)`
    pub s: f64,
    /// `cos(φ_A/2)`
    pub c: f64,
    /// Magnitude of the first Pauli-correlation row.
    pub g: f64,
    /// Magnitude of the second Pauli-correlation row.
    pub h: f64,
    /// Row-angle alignment `cos(γ-μ)` at its adversarial extreme.
    pub delta: f64,
}

/// Result of the constrained correlation optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationBound {
    /// Certified squared correlation `E²` in [0, 1].
    pub e_squared: f64,
    pub witness: CorrelationWitness,
}

/// Objective with `Δ` eliminated at its adversarial boundary value.
fn objective(t: f64, g: f64, h: f64, two_lambda_minus_one_abs: f64) -> f64 {
    let (s, c) = t.sin_cos();
    let cross = (g * h).min(((1.0 - g * g).max(0.0) * (1.0 - h * h).max(0.0)).sqrt());
    s * s * g * g + c * c * h * h - 2.0 * two_lambda_minus_one_abs * s * c * cross
}

/// Certified lower bound on the complementary correlation for a device
/// showing CHSH value `s_chsh` with key-basis weight `lambda`.
///
/// `s_chsh ≤ 2` returns zero (classical region, no device-independent
/// secrecy); values above `2√2` beyond floating-point slack are rejected.
pub fn solve_e_lambda(s_chsh: f64, lambda: f64) -> Result<CorrelationBound> {
    check_range("lambda", lambda, 0.0, 1.0)?;
    if s_chsh > S_MAX + 1e-9 {
        return Err(Error::range("s_chsh", s_chsh, 0.0, S_MAX));
    }
    let s_chsh = s_chsh.min(S_MAX);
    if s_chsh <= S_MIN {
        return Ok(CorrelationBound {
            e_squared: 0.0,
            witness: CorrelationWitness {
                s: 0.0,
                c: 1.0,
                g: 1.0,
                h: 0.0,
                delta: 0.0,
            },
        });
    }

    let lam_abs = (2.0 * lambda - 1.0).abs();
    let half_s = 0.5 * s_chsh;

    // Feasible-surface evaluation: g is pinned to the active CHSH constraint.
    let eval = |t: f64, h: f64| -> Option<(f64, f64)> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&t) || !(0.0..=1.0).contains(&h) {
            return None;
        }
        let (s, c) = t.sin_cos();
        if c < 1e-12 {
            return None;
        }
        let mut g = (half_s - s * h) / c;
        if g > 1.0 + 1e-12 {
            // this (t, h) cannot reach the observed violation
            return None;
        }
        g = g.clamp(0.0, 1.0);
        if c * g + s * h < half_s - 1e-9 {
            return None;
        }
        Some((objective(t, g, h, lam_abs), g))
    };

    const GRID: usize = 128;
    let mut best = (f64::INFINITY, 0.0f64, 0.0f64);
    // Endpoint candidate: the maximal-violation corner (t, h) = (π/4, 1).
    let candidates = std::iter::once((std::f64::consts::FRAC_PI_4, 1.0));
    let grid = (0..GRID).flat_map(|i| {
        let t = (i as f64 + 0.5) / GRID as f64 * std::f64::consts::FRAC_PI_2;
        (0..=GRID).map(move |j| (t, j as f64 / GRID as f64))
    });
    for (t, h) in grid.chain(candidates) {
        if let Some((v, _)) = eval(t, h) {
            if v < best.0 {
                best = (v, t, h);
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::Infeasible(format!(
            "no feasible device for S = {s_chsh}"
        )));
    }

    // Pattern-search polish with step halving.
    let (mut v, mut t, mut h) = best;
    let mut step = 0.05;
    while step > tolerances::POLISH_STEP {
        let mut improved = false;
        for (dt, dh) in [
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
            (1.0, 1.0),
            (1.0, -1.0),
            (-1.0, 1.0),
            (-1.0, -1.0),
        ] {
            let (tt, hh) = (t + dt * step, (h + dh * step).clamp(0.0, 1.0));
            if let Some((vv, _)) = eval(tt, hh) {
                if vv < v - 1e-16 {
                    v = vv;
                    t = tt;
                    h = hh;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    let (s, c) = t.sin_cos();
    let g = eval(t, h).map(|(_, g)| g).unwrap_or(1.0);
    let gh = g * h;
    let slack = ((1.0 - g * g).max(0.0) * (1.0 - h * h).max(0.0)).sqrt();
    let delta_mag = if gh > 1e-15 { (slack / gh).min(1.0) } else { 0.0 };
    let delta = -(2.0 * lambda - 1.0).signum() * delta_mag;
    Ok(CorrelationBound {
        e_squared: v.clamp(0.0, 1.0),
        witness: CorrelationWitness { s, c, g, h, delta },
    })
}

/// Exact correlation bound at `lambda = 1/2` in closed form.
///
/// At equal basis weights the optimum sits on the `g = 1` boundary; the
/// stationarity condition there is quadratic in `S/2` with discriminant
/// `(1-u²)²(u²+4)` for `u = cos(φ_A/2)`, giving
///
/// ```text
///   S/2 = [u(3-u²) + (1-u²)√(u²+4)] / 2,   u ∈ [1/√2, 1],
///   E²  = (1-u²) + u²(S/2-u)² / (1-u²).
/// ```
///
/// `S/2` is strictly decreasing in `u`, so `u` is recovered by bisection.
pub fn half_weight_e2_analytic(s_chsh: f64) -> Result<f64> {
    if s_chsh > S_MAX + 1e-9 {
        return Err(Error::range("s_chsh", s_chsh, 0.0, S_MAX));
    }
    if s_chsh <= S_MIN {
        return Ok(0.0);
    }
    let k = 0.5 * s_chsh.min(S_MAX);
    let k_of_u = |u: f64| (u * (3.0 - u * u) + (1.0 - u * u) * (u * u + 4.0).sqrt()) / 2.0;
    let (mut lo, mut hi) = (std::f64::consts::FRAC_1_SQRT_2, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if k_of_u(mid) > k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    let one_minus_u2 = 1.0 - u * u;
    if one_minus_u2 < 1e-14 {
        return Ok(0.0);
    }
    let excess = k_of_u(u) - u;
    Ok((one_minus_u2 + u * u * excess * excess / one_minus_u2).clamp(0.0, 1.0))
}

/// Root of the half-weight scalar equation
/// `4x(2-x) + 2(S²+2) + S(x-S)√(2(1+x)) = 0` in its bracket above `x = 3`.
pub fn half_weight_root(s_chsh: f64) -> Result<f64> {
    if !(S_MIN..=S_MAX + 1e-9).contains(&s_chsh) {
        return Err(Error::range("s_chsh", s_chsh, S_MIN, S_MAX));
    }
    let s = s_chsh.min(S_MAX);
    let f =
        |x: f64| 4.0 * x * (2.0 - x) + 2.0 * (s * s + 2.0) + s * (x - s) * (2.0 * (1.0 + x)).sqrt();
    let (mut lo, mut hi) = (3.0, 4.5);
    let flo = f(lo);
    if flo.signum() == f(hi).signum() {
        return Err(Error::NoRoot(format!(
            "half-weight equation has no sign change on [3, 4.5] at S = {s}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Monotone correspondence between the scalar-equation root and `E²`,
/// tabulated once from the two analytic ingredients.
fn root_to_e2_table() -> &'static Vec<(f64, f64)> {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 2048;
        let mut table = Vec::with_capacity(n);
        for i in 0..n {
            let s = S_MIN + (S_MAX - S_MIN) * i as f64 / (n - 1) as f64;
            let x = half_weight_root(s).expect("root exists on (2, 2sqrt2)");
            let e2 = half_weight_e2_analytic(s).expect("analytic E2 exists");
            table.push((x, e2));
        }
        debug_assert!(table.windows(2).all(|w| w[0].0 < w[1].0));
        table
    })
}

/// Analytic cross-check value at `lambda = 1/2`: root-find the scalar
/// equation, then map the root to `E²` through the verified monotone
/// correspondence.
pub fn solve_e_half_analytic(s_chsh: f64) -> Result<f64> {
    let x = half_weight_root(s_chsh)?;
    let table = root_to_e2_table();
    if x <= table[0].0 {
        return Ok(table[0].1);
    }
    if x >= table[table.len() - 1].0 {
        return Ok(table[table.len() - 1].1);
    }
    let idx = table.partition_point(|&(xi, _)| xi < x);
    let (x0, y0) = table[idx - 1];
    let (x1, y1) = table[idx];
    Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Convexified conditional-entropy lower bound `S ↦ H(A|E)` for a fixed basis
/// weight and preprocessing probability.
#[derive(Debug, Clone)]
pub struct EntropyBound {
    lambda: f64,
    q: f64,
    s_grid: Vec<f64>,
    h_raw: Vec<f64>,
    h_env: Vec<f64>,
    convexified: bool,
}

impl EntropyBound {
    /// Evaluate `g_q(√E²(S))` on a uniform `S`-grid over `[2, 2√2]` and
    /// replace the curve by its lower convex envelope.
    pub fn new(lambda: f64, q: f64, resolution: usize) -> Result<Self> {
        check_range("lambda", lambda, 0.0, 1.0)?;
        check_range("q", q, 0.0, 0.5)?;
        if resolution < 32 {
            return Err(Error::InvalidArgument(format!(
                "resolution {resolution} below minimum 32"
            )));
        }
        let s_grid: Vec<f64> = (0..resolution)
            .map(|i| S_MIN + (S_MAX - S_MIN) * i as f64 / (resolution - 1) as f64)
            .collect();
        let h_raw: Vec<f64> = s_grid
            .par_iter()
            .map(|&s| {
                let e2 = solve_e_lambda(s, lambda)?.e_squared;
                g_bound_q(e2.sqrt(), q)
            })
            .collect::<Result<_>>()?;
        let h_env = lower_convex_envelope(&s_grid, &h_raw);
        Ok(EntropyBound {
            lambda,
            q,
            s_grid,
            h_raw,
            h_env,
            convexified: true,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn convexified(&self) -> bool {
        self.convexified
    }

    pub fn resolution(&self) -> usize {
        self.s_grid.len()
    }

    /// Grid of `(S, H)` pairs of the convexified bound.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.s_grid.iter().copied().zip(self.h_env.iter().copied())
    }

    /// Raw (pre-envelope) curve, kept for diagnostics.
    pub fn raw_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.s_grid.iter().copied().zip(self.h_raw.iter().copied())
    }

    /// Piecewise-linear evaluation; queries are clamped to `[2, 2√2]`.
    pub fn eval(&self, s: f64) -> f64 {
        let n = self.s_grid.len();
        if s <= self.s_grid[0] {
            return self.h_env[0];
        }
        if s >= self.s_grid[n - 1] {
            return self.h_env[n - 1];
        }
        let idx = self.s_grid.partition_point(|&x| x < s);
        let (x0, x1) = (self.s_grid[idx - 1], self.s_grid[idx]);
        let (y0, y1) = (self.h_env[idx - 1], self.h_env[idx]);
        y0 + (y1 - y0) * (s - x0) / (x1 - x0)
    }
}

/// Lower convex envelope of a sampled curve via a monotone-chain hull,
/// resampled back onto the input grid.
fn lower_convex_envelope(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(xs.len());
    for (&x, &y) in xs.iter().zip(ys) {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // pop while the middle point lies on or above the chord
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    xs.iter()
        .map(|&x| {
            let idx = hull.partition_point(|&(hx, _)| hx < x);
            if idx == 0 {
                hull[0].1
            } else if idx == hull.len() {
                hull[hull.len() - 1].1
            } else {
                let (x0, y0) = hull[idx - 1];
                let (x1, y1) = hull[idx];
                if (x1 - x0).abs() < f64::EPSILON {
                    y0.min(y1)
                } else {
                    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
                }
            }
        })
        .collect()
}
