//! The odd theta function `theta(z)` with `theta(z+1) = theta(z)`,
//! `theta(z+tau) = -exp(-2 pi i z) theta(z)`, its logarithmic derivative
//! `rho`, and the degree-`n` theta functions with characteristics.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smallest accepted `Im tau`.
pub const MIN_IM_TAU: f64 = 0.05;

/// Relative size below which `|theta(z)|` counts as a zero.
pub const POLE_TOL: f64 = 1e-11;

/// Truncation bound `ceil(sqrt(40 / (pi Im tau))) + 4`.
pub fn default_truncation(tau: Complex64) -> usize {
    (40.0 / (PI * tau.im)).sqrt().ceil() as usize + 4
}

/// `theta` and its first three derivatives at a point, plus the sum of the
/// term magnitudes (used to decide whether the value is a numerical zero).
#[derive(Clone, Copy, Debug)]
pub struct ThetaJet {
    pub d: [Complex64; 4],
    pub scale: f64,
}

/// Evaluation context for one modular parameter and characteristic modulus.
#[derive(Clone, Debug)]
pub struct ThetaCtx {
    tau: Complex64,
    n: usize,
    truncation: usize,
    // theta_alpha(0), theta'_alpha(0) for alpha = 0..n
    consts: Vec<(Complex64, Complex64)>,
}

impl ThetaCtx {
    pub fn new(tau: Complex64, n: usize) -> Result<ThetaCtx> {
        ThetaCtx::with_truncation(tau, n, None)
    }

    pub fn with_truncation(tau: Complex64, n: usize, truncation: Option<usize>) -> Result<ThetaCtx> {
        if tau.im.is_nan() || tau.im < MIN_IM_TAU || !tau.re.is_finite() {
            return Err(Error::BadTau(tau));
        }
        if n == 0 {
            return Err(Error::InvalidParams("characteristic modulus must be positive".into()));
        }
        let truncation = truncation.unwrap_or_else(|| default_truncation(tau));
        let mut ctx = ThetaCtx {
            tau,
            n,
            truncation,
            consts: Vec::new(),
        };
        ctx.consts = (0..n as i64)
            .map(|a| ctx.theta_char(a, Complex64::new(0.0, 0.0)))
            .collect();
        Ok(ctx)
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `theta(z)` and derivatives up to order three, by termwise differentiation.
    pub fn jet(&self, z: Complex64) -> ThetaJet {
        let m = self.truncation as i64;
        let mut d = [Complex64::new(0.0, 0.0); 4];
        let mut scale = 0.0;
        for a in -m..=m {
            let af = a as f64;
            let sign = if a.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let e = (2.0 * PI * I * (af * z + af * (af - 1.0) / 2.0 * self.tau)).exp() * sign;
            let k = 2.0 * PI * I * af;
            scale += e.norm();
            d[0] += e;
            d[1] += e * k;
            d[2] += e * k * k;
            d[3] += e * k * k * k;
        }
        ThetaJet { d, scale }
    }

    /// `(theta(z), theta'(z))`.
    pub fn theta(&self, z: Complex64) -> (Complex64, Complex64) {
        let j = self.jet(z);
        (j.d[0], j.d[1])
    }

    /// `rho(z) = theta'(z) / theta(z) - pi i`.
    pub fn rho(&self, z: Complex64) -> Result<Complex64> {
        let j = self.jet(z);
        if j.d[0].norm() <= POLE_TOL * j.scale {
            return Err(Error::Pole(z));
        }
        Ok(j.d[1] / j.d[0] - PI * I)
    }

    /// `rho'(z) = theta''/theta - (theta'/theta)^2`.
    pub fn rho_prime(&self, z: Complex64) -> Result<Complex64> {
        let j = self.jet(z);
        if j.d[0].norm() <= POLE_TOL * j.scale {
            return Err(Error::Pole(z));
        }
        let l = j.d[1] / j.d[0];
        Ok(j.d[2] / j.d[0] - l * l)
    }

    /// `(theta_alpha(z), theta_alpha'(z))` from the `n`-fold product. The
    /// characteristic is used as given, not reduced mod `n`.
    pub fn theta_char(&self, alpha: i64, z: Complex64) -> (Complex64, Complex64) {
        let n = self.n as f64;
        let af = alpha as f64;
        let shift = self.tau * (af / n);
        let factors: Vec<(Complex64, Complex64)> = (0..self.n)
            .map(|j| self.theta(z + j as f64 / n + shift))
            .collect();
        let mut prod = Complex64::new(1.0, 0.0);
        for (v, _) in &factors {
            prod *= v;
        }
        // product rule without dividing by factors, which may vanish
        let mut dprod = Complex64::new(0.0, 0.0);
        for (j, (_, dv)) in factors.iter().enumerate() {
            let mut t = *dv;
            for (l, (v, _)) in factors.iter().enumerate() {
                if l != j {
                    t *= v;
                }
            }
            dprod += t;
        }
        let slope = PI * I * (2.0 * af - n);
        let e = (PI * I * ((2.0 * af - n) * z - af / n + af * (af - n) / n * self.tau)).exp();
        (prod * e, (dprod + prod * slope) * e)
    }

    /// Cached `theta_alpha(0)`, `alpha` taken mod `n`.
    pub fn theta_const(&self, alpha: i64) -> Complex64 {
        self.consts[alpha.rem_euclid(self.n as i64) as usize].0
    }

    /// Cached `theta_alpha'(0)`, `alpha` taken mod `n`.
    pub fn theta_const_prime(&self, alpha: i64) -> Complex64 {
        self.consts[alpha.rem_euclid(self.n as i64) as usize].1
    }

    /// A point `a + b tau` with `a, b` uniform in `[-1/2, 1/2)`.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Complex64 {
        let a: f64 = rng.random_range(-0.5..0.5);
        let b: f64 = rng.random_range(-0.5..0.5);
        Complex64::new(a, 0.0) + self.tau * b
    }
}

/// `|lhs - rhs|` relative to the largest magnitude in `parts`.
fn rel(lhs: Complex64, rhs: Complex64, parts: &[Complex64]) -> f64 {
    let scale = parts
        .iter()
        .chain([&lhs, &rhs])
        .map(|c| c.norm())
        .fold(f64::MIN_POSITIVE, f64::max);
    (lhs - rhs).norm() / scale
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub identity: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub n: usize,
    pub tau: Complex64,
    pub samples: usize,
    pub residuals: Vec<IdentityResidual>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn get(&self, identity: &str) -> Option<f64> {
        self.residuals
            .iter()
            .find(|r| r.identity == identity)
            .map(|r| r.residual)
    }
}

/// Default tolerance for every identity in the self-test.
pub const SELFTEST_TOL: f64 = 1e-8;
/// The finite-difference variant of the three-point `rho` identity is looser.
pub const SELFTEST_FD_TOL: f64 = 1e-7;

/// Draw a point where `theta` is comfortably away from its zeros.
fn regular_point<R: Rng>(ctx: &ThetaCtx, rng: &mut R, extra: &[Complex64]) -> Complex64 {
    loop {
        let z = ctx.random_point(rng);
        let ok = std::iter::once(z)
            .chain(extra.iter().map(|e| z - e))
            .all(|w| {
                let j = ctx.jet(w);
                j.d[0].norm() > 1e-3 * j.scale
            });
        if ok {
            return z;
        }
    }
}

/// Residuals of the quasi-periodicity, parity, three-point `rho` and
/// generating-function identities at `samples` random points each.
pub fn theta_selftest(ctx: &ThetaCtx, samples: usize, seed: u64) -> Result<SelftestReport> {
    let n = ctx.n();
    let ni = n as i64;
    let nf = n as f64;
    let tau = ctx.tau();
    let mut rng = crate::sample::rng(seed);
    let c = crate::elliptic::c_coeffs_ctx(ctx, 1)?;
    let j0 = ctx.jet(Complex64::new(0.0, 0.0));
    let rho_const = 1.5 * PI * PI + j0.d[3] / (2.0 * j0.d[1]);

    let mut acc: Vec<(&str, f64, f64)> = [
        ("theta_period_1", SELFTEST_TOL),
        ("theta_period_tau", SELFTEST_TOL),
        ("theta_parity", SELFTEST_TOL),
        ("theta_zero", SELFTEST_TOL),
        ("rho_odd", SELFTEST_TOL),
        ("rho_period_tau", SELFTEST_TOL),
        ("rho_three_point", SELFTEST_TOL),
        ("rho_three_point_fd", SELFTEST_FD_TOL),
        ("char_period_n", SELFTEST_TOL),
        ("char_period_1", SELFTEST_TOL),
        ("char_period_tau", SELFTEST_TOL),
        ("char_parity", SELFTEST_TOL),
        ("char_bilinear", SELFTEST_TOL),
        ("char_bilinear_diagonal", SELFTEST_TOL),
    ]
    .iter()
    .map(|&(k, t)| (k, 0.0, t))
    .collect();
    let mut record = |name: &str, v: f64| {
        let e = acc.iter_mut().find(|e| e.0 == name).expect("known identity");
        e.1 = f64::max(e.1, v);
    };

    let (t0, _) = ctx.theta(Complex64::new(0.0, 0.0));
    record("theta_zero", t0.norm() / j0.scale);

    for _ in 0..samples {
        let z = regular_point(ctx, &mut rng, &[]);
        let (tz, _) = ctx.theta(z);
        let ez = (-2.0 * PI * I * z).exp();
        record("theta_period_1", rel(ctx.theta(z + 1.0).0, tz, &[]));
        record("theta_period_tau", rel(ctx.theta(z + tau).0, -ez * tz, &[]));
        record("theta_parity", rel(ctx.theta(-z).0, -ez * tz, &[]));

        let rz = ctx.rho(z)?;
        record("rho_odd", rel(ctx.rho(-z)?, -rz, &[]));
        record("rho_period_tau", rel(ctx.rho(z + tau)?, rz - 2.0 * PI * I, &[]));

        let x = z;
        let y = regular_point(ctx, &mut rng, &[-x, x]);
        let w = -x - y;
        let (rx, ry, rw) = (ctx.rho(x)?, ctx.rho(y)?, ctx.rho(w)?);
        let lhs = rx * ry + rx * rw + ry * rw;
        let squares = -0.5 * (rx * rx + ry * ry + rw * rw);
        let exact_d = -0.5 * (ctx.rho_prime(x)? + ctx.rho_prime(y)? + ctx.rho_prime(w)?);
        // five-point central stencil, truncation error O(h^4); the step
        // shrinks with the distance to the nearest pole, which is ~ 1/|rho|
        let fd = |p: Complex64| -> Result<Complex64> {
            let h = 1e-3 / ctx.rho(p)?.norm().max(1.0);
            let (a, b) = (ctx.rho(p + h)? - ctx.rho(p - h)?, ctx.rho(p + 2.0 * h)? - ctx.rho(p - 2.0 * h)?);
            Ok((8.0 * a - b) / (12.0 * h))
        };
        let fd_d = -0.5 * (fd(x)? + fd(y)? + fd(w)?);
        let parts = [rx * ry, rx * rw, ry * rw, squares, exact_d, rho_const];
        record("rho_three_point", rel(lhs, squares + exact_d + rho_const, &parts));
        record("rho_three_point_fd", rel(lhs, squares + fd_d + rho_const, &parts));

        let alpha: i64 = rng.random_range(0..ni);
        let beta: i64 = rng.random_range(0..ni);
        let (ta, _) = ctx.theta_char(alpha, z);
        let sign_n = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        record("char_period_n", rel(ctx.theta_char(alpha + ni, z).0, ta, &[]));
        record("char_period_1", rel(ctx.theta_char(alpha, z + 1.0).0, ta * sign_n, &[]));
        let factor = -(-2.0 * PI * I * nf * (z + tau / 2.0)).exp();
        record("char_period_tau", rel(ctx.theta_char(alpha, z + tau).0, factor * ta, &[]));
        let minus = (-alpha).rem_euclid(ni);
        let rhs = -(-2.0 * PI * I * alpha as f64 / nf).exp() * ctx.theta_char(minus, z).0;
        record("char_parity", rel(ctx.theta_char(alpha, -z).0, rhs, &[]));

        let (lhs, parts) = bilinear_lhs(ctx, &c, alpha, beta, y, z);
        let rhs = bilinear_rhs(ctx, alpha, beta, y, z)?;
        record("char_bilinear", rel(lhs, rhs.0, &[parts, rhs.1]));

        let (lhs, parts) = bilinear_lhs(ctx, &c, alpha, alpha, z, z);
        let rhs = bilinear_rhs_diagonal(ctx, alpha, alpha, z);
        record("char_bilinear_diagonal", rel(lhs, rhs.0, &[parts, rhs.1]));
    }

    let residuals = acc
        .into_iter()
        .map(|(name, residual, tolerance)| IdentityResidual {
            identity: name.to_string(),
            residual,
            tolerance,
            pass: residual < tolerance,
        })
        .collect();
    Ok(SelftestReport {
        n,
        tau,
        samples,
        residuals,
    })
}

/// `sum_r c_{beta-alpha, r} theta_{beta-r}(y) theta_{alpha+r}(z)` and the
/// largest summand magnitude.
fn bilinear_lhs(
    ctx: &ThetaCtx,
    c: &crate::elliptic::CoeffMatrix,
    alpha: i64,
    beta: i64,
    y: Complex64,
    z: Complex64,
) -> (Complex64, Complex64) {
    let ni = ctx.n() as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut big = Complex64::new(0.0, 0.0);
    for r in 0..ni {
        let t = c.get(beta - alpha, r)
            * ctx.theta_char((beta - r).rem_euclid(ni), y).0
            * ctx.theta_char((alpha + r).rem_euclid(ni), z).0;
        if t.norm() > big.norm() {
            big = t;
        }
        sum += t;
    }
    (sum, big)
}

fn bilinear_rhs(ctx: &ThetaCtx, alpha: i64, beta: i64, y: Complex64, z: Complex64) -> Result<(Complex64, Complex64)> {
    let nf = ctx.n() as f64;
    let (ay, day) = ctx.theta_char(alpha, y);
    let (az, daz) = ctx.theta_char(alpha, z);
    let (by, dby) = ctx.theta_char(beta, y);
    let (bz, dbz) = ctx.theta_char(beta, z);
    let terms = [
        nf * ctx.rho(y - z)? * ay * bz,
        nf * ctx.rho(z - y)? * az * by,
        ay * dbz,
        -day * bz,
        az * dby,
        -daz * by,
    ];
    let big = terms
        .iter()
        .copied()
        .fold(Complex64::new(0.0, 0.0), |m, t| if t.norm() > m.norm() { t } else { m });
    Ok((terms.iter().sum(), big))
}

/// The right side at `y = z`: the two `rho` terms tend to
/// `n (theta_alpha' theta_beta - theta_alpha theta_beta')(z)`.
fn bilinear_rhs_diagonal(ctx: &ThetaCtx, alpha: i64, beta: i64, z: Complex64) -> (Complex64, Complex64) {
    let nf = ctx.n() as f64;
    let (a, da) = ctx.theta_char(alpha, z);
    let (b, db) = ctx.theta_char(beta, z);
    let big = [nf * da * b, nf * a * db]
        .into_iter()
        .fold(Complex64::new(0.0, 0.0), |m, t| if t.norm() > m.norm() { t } else { m });
    ((nf - 2.0) * (da * b - a * db), big)
}
