//! Lévy densities of the stick-breaking groups, the tail measure left out
//! by truncating after group `R`, and the exact probability that `M`
//! Bernoulli (or negative binomial) draws touch a truncated atom.
//!
//! Group `i` contributes atoms whose weights `V e^{-T}`, `V ~ Beta(1, alpha)`,
//! `T ~ Gamma(i - 1, alpha)`, have density
//!
//! ```text
//! f_1(p) = alpha (1 - p)^(alpha - 1)
//! f_i(p) = alpha^i / (i-2)! * int_p^1 w^-1 ln(1/w)^(i-2) (w - p)^(alpha-1) dw,  i >= 2
//! ```
//!
//! and the groups sum to the beta process Lévy density
//! `alpha p^-1 (1 - p)^(alpha - 1)`.
//!
//! `f_i` is evaluated in the log variable `s = ln(1/w)`. For `alpha < 1`
//! the endpoint factor `(w - p)^(alpha - 1)` is removed by stretching the
//! distance to the endpoint as `L v^(1/alpha)`, which turns the integrand
//! into a smooth function of `v`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{ensure_positive, Error, Result};
use crate::measure::BaseMeasureSpec;
use crate::quad::{integrate, integrate_pieces, Estimate, Tolerance};
use crate::rng::RngStream;

/// Budget for the omitted-group contribution to the truncation exponent.
pub const TAIL_CUTOFF_TOLERANCE: f64 = 1e-10;

const DENSITY_TOL: Tolerance = Tolerance::new(1e-300, 1e-12);
const INNER_TOL: Tolerance = Tolerance::new(1e-16, 1e-12);
const OUTER_TOL: Tolerance = Tolerance::new(1e-14, 1e-11);

fn check_unit(what: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what, value: p })
    }
}

fn ln_factorial(k: u32) -> f64 {
    ln_gamma(f64::from(k) + 1.0)
}

/// `1 - (1 - p)^e`, accurate for small `p`.
fn hit_probability(p: f64, e: f64) -> f64 {
    -(e * (-p).ln_1p()).exp_m1()
}

/// Inverse CDF of `Beta(1, alpha)`.
fn beta_one_quantile(u: f64, alpha: f64) -> f64 {
    -((-u).ln_1p() / alpha).exp_m1()
}

/// `alpha (1 - p)^(alpha - 1)`.
pub fn levy_density_f1(pi: f64, alpha: f64) -> Result<f64> {
    check_unit("pi", pi)?;
    ensure_positive("alpha", alpha)?;
    Ok(alpha * (1.0 - pi).powf(alpha - 1.0))
}

/// The beta process Lévy density `alpha p^-1 (1 - p)^(alpha - 1)`.
pub fn levy_total_density(pi: f64, alpha: f64) -> Result<f64> {
    check_unit("pi", pi)?;
    ensure_positive("alpha", alpha)?;
    Ok(alpha / pi * (1.0 - pi).powf(alpha - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevyDensityParams {
    pub alpha: f64,
    pub group: u32,
}

impl LevyDensityParams {
    pub fn new(alpha: f64, group: u32) -> Result<Self> {
        ensure_positive("alpha", alpha)?;
        if group == 0 {
            return Err(Error::param("group", 0.0, "groups are numbered from 1"));
        }
        Ok(Self { alpha, group })
    }
}

/// `f_i(pi)` with its quadrature error estimate. Group 1 is closed form.
pub fn group_density(pi: f64, params: LevyDensityParams) -> Result<Estimate> {
    check_unit("pi", pi)?;
    let LevyDensityParams { alpha, group } = params;
    if group == 1 {
        return Ok(Estimate {
            value: levy_density_f1(pi, alpha)?,
            error: 0.0,
            evals: 0,
        });
    }
    let k = group - 2;
    let kf = f64::from(k);
    let big_l = -pi.ln();
    let log_c = f64::from(group) * alpha.ln() - ln_factorial(k);
    let power = |s: f64| if k == 0 { 0.0 } else { kf * s.ln() };

    if alpha >= 1.0 {
        // s^k (e^-s - p)^(alpha - 1) on [0, L]; e^-s - p = p expm1(L - s).
        let a1 = alpha - 1.0;
        let f = |s: f64| {
            let gap = if a1 == 0.0 {
                0.0
            } else {
                a1 * (pi.ln() + (big_l - s).exp_m1().ln())
            };
            (log_c + power(s) + gap).exp()
        };
        integrate(f, 0.0, big_l, DENSITY_TOL)
    } else {
        let inv = 1.0 / alpha;
        let scale = log_c + (alpha - 1.0) * pi.ln() + alpha * big_l.ln() - alpha.ln();
        let f = |v: f64| {
            let x = big_l * v.powf(inv);
            let phi = if x < 1e-8 { 0.5 * x } else { (x.exp_m1() / x).ln() };
            (scale + power(big_l - x) + (alpha - 1.0) * phi).exp()
        };
        integrate(f, 0.0, 1.0, DENSITY_TOL)
    }
}

/// `f_i(pi)` for group `i >= 1`.
pub fn levy_density_fi(pi: f64, params: LevyDensityParams) -> Result<f64> {
    group_density(pi, params).map(|e| e.value)
}

/// Pointwise value of `sum_{i > R} f_i(pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailDensity {
    pub value: f64,
    /// Last group included.
    pub last_group: u32,
    /// Bound on the groups after `last_group`.
    pub remainder: f64,
    pub quadrature_error: f64,
}

/// Truncated tail of the Lévy measure, `nu_R^+ = mu x sum_{i > R} lambda_i`,
/// for a constant concentration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyTail {
    pub alpha: f64,
    pub gamma: f64,
    pub truncation: u32,
    /// Last group kept when integrating against `1 - (1 - p)^(M r)`.
    pub tail_cutoff: u32,
    /// `gamma M r (alpha / (1 + alpha))^tail_cutoff`, which bounds the
    /// contribution of the groups after `tail_cutoff` to the exponent.
    pub remainder_bound: f64,
}

impl LevyTail {
    /// `exponent_scale` is `M r`, the exponent in `1 - (1 - p)^(M r)`.
    pub fn new(alpha: f64, gamma: f64, truncation: u32, exponent_scale: f64) -> Result<Self> {
        ensure_positive("alpha", alpha)?;
        ensure_positive("gamma", gamma)?;
        ensure_positive("M r", exponent_scale)?;
        let ratio = alpha / (1.0 + alpha);
        let mut cutoff = 0u32;
        let mut bound = gamma * exponent_scale;
        while bound >= TAIL_CUTOFF_TOLERANCE {
            cutoff += 1;
            bound *= ratio;
        }
        Ok(Self {
            alpha,
            gamma,
            truncation,
            tail_cutoff: cutoff.max(truncation),
            remainder_bound: bound,
        })
    }

    /// `sum_{i > R} f_i(pi)`, adding groups until a geometric bound on the
    /// rest falls below `1e-13` of the running sum. Past `i - 1 > alpha L`
    /// (`L = ln(1/pi)`) each term satisfies
    /// `f_{i+1} <= alpha L / (i - 1) * f_i`.
    pub fn density(&self, pi: f64) -> Result<TailDensity> {
        check_unit("pi", pi)?;
        let alpha_l = -self.alpha * pi.ln();
        let mut sum = 0.0;
        let mut qerr = 0.0;
        let mut i = self.truncation + 1;
        loop {
            let term = group_density(pi, LevyDensityParams { alpha: self.alpha, group: i })?;
            sum += term.value;
            qerr += term.error;
            if i >= 2 {
                let q = alpha_l / f64::from(i - 1);
                if q < 1.0 {
                    let rest = term.value * q / (1.0 - q);
                    if rest <= 1e-13 * sum || sum == 0.0 {
                        return Ok(TailDensity {
                            value: sum,
                            last_group: i,
                            remainder: rest,
                            quadrature_error: qerr,
                        });
                    }
                }
            }
            i += 1;
        }
    }
}

/// `sum_{i > R} f_i(pi)` with an adaptive number of groups.
pub fn levy_tail_density(pi: f64, tail: &LevyTail) -> Result<f64> {
    tail.density(pi).map(|t| t.value)
}

/// `int_0^1 f_i(p) phi(p) dp`, integrating the quadrature-evaluated
/// density itself. Used to check the group densities; the truncation
/// routines below use the cheaper product representation.
pub fn integrate_group_density<P: Fn(f64) -> f64>(
    params: LevyDensityParams,
    phi: P,
) -> Result<Estimate> {
    let density = |p: f64| group_density(p, params).map_or(f64::NAN, |e| e.value);
    integrate_against(params.alpha, f64::from(params.group), density, phi)
}

/// `int_0^1 sum_{i > R} f_i(p) phi(p) dp`. `phi` must vanish at 0 fast
/// enough to make the integral finite when `R = 0`.
pub fn integrate_tail_density<P: Fn(f64) -> f64>(tail: &LevyTail, phi: P) -> Result<Estimate> {
    let density = |p: f64| tail.density(p).map_or(f64::NAN, |t| t.value);
    integrate_against(tail.alpha, f64::from(tail.truncation + 1), density, phi)
}

fn integrate_against<D: Fn(f64) -> f64, P: Fn(f64) -> f64>(
    alpha: f64,
    group: f64,
    density: D,
    phi: P,
) -> Result<Estimate> {
    // p in (0, 1/2]: p = e^-y. The weight -ln p is roughly Gamma(i, alpha).
    let y_max = (group + 10.0 * group.sqrt() + 40.0) / alpha;
    let lower = integrate_pieces(
        |y: f64| {
            let p = (-y).exp();
            density(p) * phi(p) * p
        },
        &split(std::f64::consts::LN_2, y_max, 8),
        OUTER_TOL,
    )?;
    // p in [1/2, 1): p = 1 - t^(1/alpha) / 2 absorbs (1 - p)^(alpha - 1).
    let upper = if alpha < 1.0 {
        let inv = 1.0 / alpha;
        integrate(
            |t: f64| {
                let p = 1.0 - 0.5 * t.powf(inv);
                density(p) * phi(p) * 0.5 * inv * t.powf(inv - 1.0)
            },
            0.0,
            1.0,
            OUTER_TOL,
        )?
    } else {
        integrate(|p| density(p) * phi(p), 0.5, 1.0, OUTER_TOL)?
    };
    Ok(lower + upper)
}

fn split(a: f64, b: f64, pieces: usize) -> Vec<f64> {
    (0..=pieces)
        .map(|k| a + (b - a) * k as f64 / pieces as f64)
        .collect()
}

/// `int_0^1 (1 - e^(t p)) alpha p^-1 (1 - p)^(alpha - 1) dp`, the Laplace
/// exponent of the beta process per unit base mass, for `t < 0`.
pub fn laplace_exponent(alpha: f64, t: f64) -> Result<Estimate> {
    ensure_positive("alpha", alpha)?;
    if !(t < 0.0 && t.is_finite()) {
        return Err(Error::param("t", t, "must be negative"));
    }
    let jump = |p: f64| -(t * p).exp_m1() / p;
    if alpha >= 1.0 {
        integrate(
            |p| jump(p) * alpha * (1.0 - p).powf(alpha - 1.0),
            0.0,
            1.0,
            OUTER_TOL,
        )
    } else {
        integrate(|u| jump(beta_one_quantile(u, alpha)), 0.0, 1.0, OUTER_TOL)
    }
}

/// `gamma (alpha / (1 + alpha))^R`, the expected mass of the truncated tail.
pub fn expected_missing_mass(alpha: f64, gamma: f64, truncation: u32) -> Result<f64> {
    ensure_positive("alpha", alpha)?;
    ensure_positive("gamma", gamma)?;
    Ok(gamma * (alpha / (1.0 + alpha)).powi(truncation as i32))
}

/// `1 - exp(-gamma M r (alpha / (1 + alpha))^R)`.
pub fn truncation_bound_analytic(
    alpha: f64,
    gamma: f64,
    truncation: u32,
    processes: u32,
    dispersion: f64,
) -> Result<f64> {
    ensure_positive("M", f64::from(processes))?;
    ensure_positive("r", dispersion)?;
    let mass = expected_missing_mass(alpha, gamma, truncation)?;
    Ok(-(-mass * f64::from(processes) * dispersion).exp_m1())
}

/// Parameters of the truncation-error problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationProblem {
    pub alpha: f64,
    pub gamma: f64,
    /// Number of likelihood processes `M`.
    pub processes: u32,
    /// Negative binomial dispersion `r`; 1 for Bernoulli processes.
    pub dispersion: f64,
}

impl TruncationProblem {
    pub fn new(alpha: f64, gamma: f64, processes: u32, dispersion: f64) -> Result<Self> {
        ensure_positive("alpha", alpha)?;
        ensure_positive("gamma", gamma)?;
        ensure_positive("M", f64::from(processes))?;
        ensure_positive("r", dispersion)?;
        Ok(Self {
            alpha,
            gamma,
            processes,
            dispersion,
        })
    }

    pub fn bernoulli(alpha: f64, gamma: f64, processes: u32) -> Result<Self> {
        Self::new(alpha, gamma, processes, 1.0)
    }

    /// `M r`.
    pub fn exponent_scale(&self) -> f64 {
        f64::from(self.processes) * self.dispersion
    }

    fn hit(&self, p: f64) -> f64 {
        hit_probability(p, self.exponent_scale())
    }

    /// `E[g(w V)]` with `V ~ Beta(1, alpha)`, `g(p) = 1 - (1 - p)^(M r)`.
    fn hit_given_scale(&self, w: f64) -> Result<Estimate> {
        let alpha = self.alpha;
        if alpha >= 1.0 {
            integrate(
                |v| self.hit(w * v) * alpha * (1.0 - v).powf(alpha - 1.0),
                0.0,
                1.0,
                INNER_TOL,
            )
        } else {
            integrate(
                |u| self.hit(w * beta_one_quantile(u, alpha)),
                0.0,
                1.0,
                INNER_TOL,
            )
        }
    }

    /// `int f_i(p) g(p) dp = E[g(V_i e^{-T_i})]`, by integrating over `T`.
    pub fn group_hit_integral(&self, group: u32) -> Result<Estimate> {
        if group == 0 {
            return Err(Error::param("group", 0.0, "groups are numbered from 1"));
        }
        if group == 1 {
            return self.hit_given_scale(1.0);
        }
        let alpha = self.alpha;
        let shape = f64::from(group - 1);
        let log_norm = shape * alpha.ln() - ln_gamma(shape);
        // g(w V) <= M r w, so s beyond ln(M r) + 40 contributes < e^-40.
        let s_max = self.exponent_scale().ln().max(0.0) + 40.0;
        let mode = (shape - 1.0) / alpha;
        let mut points = split(0.0, s_max, 16);
        if mode > 0.0 && mode < s_max {
            points.push(mode);
            points.sort_by(f64::total_cmp);
        }
        let inner_err = std::cell::Cell::new(0.0);
        let outer = integrate_pieces(
            |s: f64| {
                let density = (log_norm + (shape - 1.0) * s.ln() - alpha * s).exp();
                if density < 1e-300 {
                    return 0.0;
                }
                match self.hit_given_scale((-s).exp()) {
                    Ok(h) => {
                        inner_err.set(inner_err.get() + h.error * density);
                        h.value * density
                    }
                    Err(_) => f64::NAN,
                }
            },
            &points,
            OUTER_TOL,
        )?;
        // Inner errors are weighted by the density at each node; scale by
        // the typical node spacing to turn the sum into an integral bound.
        let spacing = s_max / outer.evals.max(1) as f64;
        Ok(Estimate {
            error: outer.error + inner_err.get() * spacing,
            ..outer
        })
    }

    /// `int nu(dp) g(p)` for the untruncated Lévy measure, per unit `gamma`.
    pub fn full_hit_integral(&self) -> Result<Estimate> {
        let alpha = self.alpha;
        if alpha >= 1.0 {
            integrate(
                |p| self.hit(p) / p * alpha * (1.0 - p).powf(alpha - 1.0),
                0.0,
                1.0,
                OUTER_TOL,
            )
        } else {
            // p = Q(u) maps the measure alpha (1-p)^(alpha-1) dp to du.
            integrate(
                |u| {
                    let p = beta_one_quantile(u, alpha);
                    self.hit(p) / p
                },
                0.0,
                1.0,
                OUTER_TOL,
            )
        }
    }

    /// `lambda_i((x, 1])`: the chance a group-`i` weight exceeds `x`.
    pub fn group_survival(&self, group: u32, x: f64) -> Result<Estimate> {
        let alpha = self.alpha;
        if group == 1 {
            return Ok(Estimate {
                value: (1.0 - x).powf(alpha),
                error: 0.0,
                evals: 0,
            });
        }
        let big_l = -x.ln();
        let shape = f64::from(group - 1);
        let log_norm = shape * alpha.ln() - ln_gamma(shape);
        integrate(
            |s: f64| {
                let keep = alpha * (-(s - big_l).exp_m1()).ln();
                (log_norm + (shape - 1.0) * s.ln() - alpha * s + keep).exp()
            },
            0.0,
            big_l,
            INNER_TOL,
        )
    }

    /// `nu((x, 1]) / gamma` for the untruncated measure.
    pub fn full_survival(&self, x: f64) -> Result<Estimate> {
        let alpha = self.alpha;
        if alpha >= 1.0 {
            // p = e^-y for y in [0, ln(1/x)).
            integrate(
                |y: f64| alpha * ((alpha - 1.0) * (-(-y).exp()).ln_1p()).exp(),
                0.0,
                -x.ln(),
                INNER_TOL,
            )
        } else {
            let u0 = -(alpha * (-x).ln_1p()).exp_m1();
            integrate(|u| 1.0 / beta_one_quantile(u, alpha), u0, 1.0, INNER_TOL)
        }
    }

    /// `nu_R^+((x, 1]) / gamma` in one integral: the group weights' scale
    /// densities sum to `alpha w^-1 P(R - 1, alpha ln(1/w))` over `i > R`,
    /// with `P` the regularized lower incomplete gamma function.
    pub fn tail_survival(&self, truncation: u32, x: f64) -> Result<Estimate> {
        let alpha = self.alpha;
        let big_l = -x.ln();
        let first = if truncation == 0 {
            (1.0 - x).powf(alpha)
        } else {
            0.0
        };
        let shape = f64::from(truncation.max(1) - 1);
        let body = integrate(
            |s: f64| {
                let keep = (-(s - big_l).exp_m1()).powf(alpha);
                let weight = if shape == 0.0 { 1.0 } else { gamma_lr(shape, alpha * s) };
                alpha * keep * weight
            },
            0.0,
            big_l,
            INNER_TOL,
        )?;
        Ok(Estimate {
            value: first + body.value,
            ..body
        })
    }
}

/// Lower simple-function grid on `[0, 1)`: cells `[(k-1)/n, k/n)` with
/// left-endpoint representatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleFunctionGrid {
    pub n: u32,
}

impl SimpleFunctionGrid {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("n", f64::from(n), "grid needs at least two cells"));
        }
        Ok(Self { n })
    }

    /// Cell `k` (1-based) as `[lower, upper)`.
    pub fn cell(&self, k: u32) -> (f64, f64) {
        let n = f64::from(self.n);
        (f64::from(k - 1) / n, f64::from(k) / n)
    }

    pub fn representative(&self, k: u32) -> f64 {
        self.cell(k).0
    }

    /// Cut points `b_2, ..., b_n` where survival functions are needed;
    /// the first cell has representative 0 and contributes nothing.
    fn cuts(&self) -> Vec<f64> {
        (2..=self.n).map(|k| self.representative(k)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    SimpleFunction,
    Adaptive,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: QuadratureMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u32>,
    #[serde(rename = "I_max")]
    pub i_max: u32,
    pub remainder_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    #[serde(rename = "R")]
    pub truncation: u32,
    #[serde(rename = "M")]
    pub processes: u32,
    pub r: f64,
    #[serde(rename = "exact_PE")]
    pub exact_pe: f64,
    /// Absent when the concentration varies with location.
    pub analytic_bound: Option<f64>,
    pub expected_missing_mass: f64,
    pub quadrature_error: f64,
    pub provenance: Provenance,
}

impl TruncationReport {
    /// The exponent `int nu_R^+ (1 - (1 - p)^(M r))`.
    pub fn exponent(&self) -> f64 {
        -(-self.exact_pe).ln_1p()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Adaptive,
    SimpleFunction(SimpleFunctionGrid),
}

fn pe_from_exponent(exponent: f64) -> f64 {
    -(-exponent.max(0.0)).exp_m1()
}

/// `P(E) = 1 - exp(-int nu_R^+(Theta, dp) (1 - (1 - p)^(M r)))`.
pub fn truncation_error_exact(
    problem: &TruncationProblem,
    truncation: u32,
    method: Method,
) -> Result<TruncationReport> {
    match method {
        Method::Adaptive => TruncationSweep::adaptive(problem, truncation)?.from_scratch(truncation),
        Method::SimpleFunction(grid) => simple_function_report(problem, truncation, grid),
    }
}

fn report(
    problem: &TruncationProblem,
    truncation: u32,
    exponent: f64,
    error: f64,
    provenance: Provenance,
) -> Result<TruncationReport> {
    let TruncationProblem {
        alpha,
        gamma,
        processes,
        dispersion,
    } = *problem;
    Ok(TruncationReport {
        truncation,
        processes,
        r: dispersion,
        exact_pe: pe_from_exponent(exponent),
        analytic_bound: Some(truncation_bound_analytic(alpha, gamma, truncation, processes, dispersion)?),
        expected_missing_mass: expected_missing_mass(alpha, gamma, truncation)?,
        quadrature_error: error,
        provenance,
    })
}

/// Simple-function evaluation computed from scratch: each cell's tail mass
/// comes from the single-integral form of `nu_R^+((x, 1])`.
fn simple_function_report(
    problem: &TruncationProblem,
    truncation: u32,
    grid: SimpleFunctionGrid,
) -> Result<TruncationReport> {
    let survival = grid
        .cuts()
        .into_iter()
        .map(|x| problem.tail_survival(truncation, x))
        .collect::<Result<Vec<_>>>()?;
    let (exponent, error) = lower_sum(problem, grid, &survival);
    report(
        problem,
        truncation,
        exponent,
        error,
        Provenance {
            method: QuadratureMethod::SimpleFunction,
            n: Some(grid.n),
            tolerance: None,
            samples: None,
            i_max: truncation,
            remainder_bound: 0.0,
        },
    )
}

/// `gamma sum_{k=2}^n nu(B_nk) g(b_nk)` from survival values at `b_2..b_n`.
fn lower_sum(problem: &TruncationProblem, grid: SimpleFunctionGrid, survival: &[Estimate]) -> (f64, f64) {
    let mut exponent = 0.0;
    let mut error = 0.0;
    for (idx, s) in survival.iter().enumerate() {
        let k = idx as u32 + 2;
        let next = survival.get(idx + 1).map_or(0.0, |e| e.value);
        let hit = problem.hit(grid.representative(k));
        exponent += (s.value - next) * hit;
        error += 2.0 * s.error * hit;
    }
    (problem.gamma * exponent, problem.gamma * error)
}

/// Reports for `R = 0..=R_max`, computed incrementally through
/// `nu_R^+ = nu_{R-1}^+ - nu_R`: one new per-group integral per step.
#[derive(Clone, Debug)]
pub struct TruncationSweep {
    problem: TruncationProblem,
    tail: LevyTail,
    /// `int f_i g`, index `i - 1`, for `i = 1..=tail_cutoff`.
    group_integrals: Vec<Estimate>,
    full: Estimate,
}

impl TruncationSweep {
    /// Per-group integrals by adaptive quadrature, up to the cutoff where
    /// the omitted exponent is below [`TAIL_CUTOFF_TOLERANCE`].
    pub fn adaptive(problem: &TruncationProblem, max_truncation: u32) -> Result<Self> {
        let tail = LevyTail::new(
            problem.alpha,
            problem.gamma,
            max_truncation,
            problem.exponent_scale(),
        )?;
        let group_integrals = (1..=tail.tail_cutoff)
            .map(|i| problem.group_hit_integral(i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            problem: *problem,
            tail,
            group_integrals,
            full: problem.full_hit_integral()?,
        })
    }

    pub fn tail(&self) -> &LevyTail {
        &self.tail
    }

    /// `int f_i g` for group `i`.
    pub fn group_integral(&self, group: u32) -> Option<Estimate> {
        self.group_integrals.get(group.checked_sub(1)? as usize).copied()
    }

    fn provenance(&self) -> Provenance {
        Provenance {
            method: QuadratureMethod::Adaptive,
            n: None,
            tolerance: Some(OUTER_TOL.rel),
            samples: None,
            i_max: self.tail.tail_cutoff,
            remainder_bound: self.tail.remainder_bound,
        }
    }

    /// Sums the kept groups `R + 1..=I_max` directly.
    pub fn from_scratch(&self, truncation: u32) -> Result<TruncationReport> {
        let kept: Estimate = self
            .group_integrals
            .iter()
            .skip(truncation as usize)
            .copied()
            .sum();
        let gamma = self.problem.gamma;
        report(
            &self.problem,
            truncation,
            gamma * kept.value,
            gamma * kept.error + self.tail.remainder_bound,
            self.provenance(),
        )
    }

    /// Starts from the full Lévy measure and peels off one group per level.
    pub fn incremental(&self, max_truncation: u32) -> Result<Vec<TruncationReport>> {
        let gamma = self.problem.gamma;
        let mut exponent = gamma * self.full.value;
        let mut error = gamma * self.full.error;
        let mut out = Vec::with_capacity(max_truncation as usize + 1);
        for r in 0..=max_truncation {
            if r > 0 {
                let c = self
                    .group_integral(r)
                    .unwrap_or_default();
                exponent -= gamma * c.value;
                error += gamma * c.error;
            }
            out.push(report(&self.problem, r, exponent, error, self.provenance())?);
        }
        Ok(out)
    }
}

/// Simple-function sweep over `R = 0..=R_max`: the cell masses of `nu` are
/// computed once and each level subtracts the cell masses of one group.
pub fn simple_function_sweep(
    problem: &TruncationProblem,
    max_truncation: u32,
    grid: SimpleFunctionGrid,
) -> Result<Vec<TruncationReport>> {
    let cuts = grid.cuts();
    let mut survival = cuts
        .iter()
        .map(|&x| problem.full_survival(x))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(max_truncation as usize + 1);
    for r in 0..=max_truncation {
        if r > 0 {
            for (s, &x) in survival.iter_mut().zip(&cuts) {
                let g = problem.group_survival(r, x)?;
                s.value -= g.value;
                s.error += g.error;
            }
        }
        let (exponent, error) = lower_sum(problem, grid, &survival);
        out.push(report(
            problem,
            r,
            exponent,
            error,
            Provenance {
                method: QuadratureMethod::SimpleFunction,
                n: Some(grid.n),
                tolerance: None,
                samples: None,
                i_max: r,
                remainder_bound: 0.0,
            },
        )?);
    }
    Ok(out)
}

/// Truncation error for a location-dependent concentration: the exponent
/// `gamma E_theta[sum_{i > R} int f_i(p | alpha(theta)) g(p) dp]` is
/// averaged over `samples` locations. No analytic bound is reported.
/// Returns the report and the Monte Carlo standard error of `exact_PE`.
pub fn truncation_error_varying(
    base: &BaseMeasureSpec,
    truncation: u32,
    processes: u32,
    dispersion: f64,
    samples: u32,
    rng: &mut RngStream,
) -> Result<(TruncationReport, f64)> {
    if samples < 2 {
        return Err(Error::param("samples", f64::from(samples), "need at least two locations"));
    }
    let gamma = base.total_mass();
    let mut exps = Vec::with_capacity(samples as usize);
    let mut error = 0.0;
    let mut cutoff = 0;
    let mut remainder: f64 = 0.0;
    let mut missing = 0.0;
    for _ in 0..samples {
        let theta = base.sample_location(rng);
        let alpha = base.concentration().at(theta)?;
        let problem = TruncationProblem::new(alpha, gamma, processes, dispersion)?;
        let sweep = TruncationSweep::adaptive(&problem, truncation)?;
        let rep = sweep.from_scratch(truncation)?;
        exps.push(rep.exponent());
        error += rep.quadrature_error;
        cutoff = cutoff.max(sweep.tail.tail_cutoff);
        remainder = remainder.max(sweep.tail.remainder_bound);
        missing += rep.expected_missing_mass;
    }
    let n = f64::from(samples);
    let mean = exps.iter().sum::<f64>() / n;
    let var = exps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se_exponent = (var / n).sqrt();
    let pe = pe_from_exponent(mean);
    Ok((
        TruncationReport {
            truncation,
            processes,
            r: dispersion,
            exact_pe: pe,
            analytic_bound: None,
            expected_missing_mass: missing / n,
            quadrature_error: error / n,
            provenance: Provenance {
                method: QuadratureMethod::MonteCarlo,
                n: None,
                tolerance: Some(OUTER_TOL.rel),
                samples: Some(samples),
                i_max: cutoff,
                remainder_bound: remainder,
            },
        },
        (1.0 - pe) * se_exponent,
    ))
}
