//! Truncated Seeley sequences and the extension operator from `J = [0, ∞)`
//! to `ℝ`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::aaa::{check_vanishing, TailWindows, VanishingReport};
use crate::error::{Error, Result};
use crate::func::{Fun, SmoothFn};
use crate::jetcalc::Jet;
use crate::nets::{seminorm, Domain, Grid, Net};

pub const MAX_LEN: usize = 16;
pub const DEFAULT_PRECISION_BITS: u64 = 256;
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Significant digits of the exported decimal weights.
pub const EXPORT_DIGITS: usize = 80;

#[derive(Debug, Clone)]
pub struct SeeleySequence {
    pub len: usize,
    /// `b_l = −2^l`.
    pub nodes: Vec<f64>,
    /// Weights rounded to `f64`, used for evaluation.
    pub weights: Vec<f64>,
    /// Weights rounded to `precision_bits` significant bits.
    pub exact_weights: Vec<BigRational>,
    pub precision_bits: u64,
    /// `r_n = |Σ a_l b_l^n − 1|` for the rounded weights, `n < L`.
    pub residuals: Vec<f64>,
    /// The same residuals for the `f64` weights.
    pub f64_residuals: Vec<f64>,
}

pub fn build_sequence(len: usize) -> Result<SeeleySequence> {
    build_sequence_with_precision(len, DEFAULT_PRECISION_BITS)
}

pub fn build_sequence_with_precision(len: usize, precision_bits: u64) -> Result<SeeleySequence> {
    if !(1..=MAX_LEN).contains(&len) {
        return Err(Error::InvalidInput(format!(
            "sequence length {len} outside 1..={MAX_LEN}"
        )));
    }
    if precision_bits < 2 {
        return Err(Error::InvalidInput("precision must be at least 2 bits".into()));
    }
    let nodes_exact: Vec<BigRational> = (0..len)
        .map(|l| -BigRational::from_integer(BigInt::one() << l))
        .collect();
    let solved = solve_vandermonde(&nodes_exact);
    let exact_weights: Vec<BigRational> = solved
        .iter()
        .map(|a| round_to_bits(a, precision_bits))
        .collect();
    let weights: Vec<f64> = exact_weights.iter().map(to_f64).collect();
    let residuals = moment_residuals(&nodes_exact, &exact_weights);
    let f64_as_exact: Vec<BigRational> = weights
        .iter()
        .map(|w| BigRational::from_float(*w).expect("finite weight"))
        .collect();
    let f64_residuals = moment_residuals(&nodes_exact, &f64_as_exact);
    if let Some((n, r)) = residuals
        .iter()
        .enumerate()
        .find(|(_, r)| !(**r < RESIDUAL_TOLERANCE))
    {
        return Err(Error::ConditioningFailure {
            len,
            n,
            residual: *r,
        });
    }
    Ok(SeeleySequence {
        len,
        nodes: nodes_exact.iter().map(to_f64).collect(),
        weights,
        exact_weights,
        precision_bits,
        residuals,
        f64_residuals,
    })
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Solves `Σ_l a_l b_l^n = 1`, `n < L`, by exact Gaussian elimination.
fn solve_vandermonde(b: &[BigRational]) -> Vec<BigRational> {
    let n = b.len();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|row| {
            let mut r: Vec<BigRational> = b.iter().map(|bl| pow(bl, row)).collect();
            r.push(BigRational::one());
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .expect("distinct nodes give a nonsingular system");
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = &*v / &p;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= &factor * pv;
            }
        }
    }
    m.into_iter().map(|mut r| r.pop().unwrap()).collect()
}

fn pow(q: &BigRational, n: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..n {
        acc *= q;
    }
    acc
}

fn moment_residuals(b: &[BigRational], a: &[BigRational]) -> Vec<f64> {
    (0..b.len())
        .map(|n| {
            let s: BigRational = a.iter().zip(b).map(|(al, bl)| al * pow(bl, n)).sum();
            to_f64(&(s - BigRational::one()).abs())
        })
        .collect()
}

/// Nearest rational of the form `m·2^e` with `|m| < 2^bits`.
fn round_to_bits(q: &BigRational, bits: u64) -> BigRational {
    if q.is_zero() {
        return q.clone();
    }
    let e = q.numer().bits() as i64 - q.denom().bits() as i64 - bits as i64;
    let scaled = if e >= 0 {
        q / BigRational::from_integer(BigInt::one() << e as u64)
    } else {
        q * BigRational::from_integer(BigInt::one() << (-e) as u64)
    };
    let m = BigRational::from_integer(scaled.round().to_integer());
    if e >= 0 {
        m * BigRational::from_integer(BigInt::one() << e as u64)
    } else {
        m / BigRational::from_integer(BigInt::one() << (-e) as u64)
    }
}

/// Scientific decimal with `digits` significant digits, e.g. `-1.75e0`.
pub fn to_decimal_string(q: &BigRational, digits: usize) -> String {
    if q.is_zero() {
        return "0".into();
    }
    let sign = if q.is_negative() { "-" } else { "" };
    let a = q.abs();
    let ten = BigInt::from(10);
    let mut e10 = ((a.numer().bits() as f64 - a.denom().bits() as f64) * std::f64::consts::LOG10_2)
        .floor() as i64;
    let scaled_int = |e10: i64| -> BigInt {
        let shift = digits as i64 - 1 - e10;
        let s = if shift >= 0 {
            &a * BigRational::from_integer(num_traits::pow(ten.clone(), shift as usize))
        } else {
            &a / BigRational::from_integer(num_traits::pow(ten.clone(), (-shift) as usize))
        };
        s.round().to_integer()
    };
    let lower = num_traits::pow(ten.clone(), digits - 1);
    let upper = num_traits::pow(ten.clone(), digits);
    let mut m = scaled_int(e10);
    for _ in 0..4 {
        if m >= upper {
            e10 += 1;
        } else if m < lower {
            e10 -= 1;
        } else {
            break;
        }
        m = scaled_int(e10);
    }
    let s = m.to_str_radix(10);
    let (head, tail) = s.split_at(1);
    let tail = tail.trim_end_matches('0');
    if e10 >= 0 && (tail.len() as i64) <= e10 {
        let zeros = "0".repeat((e10 as usize) - tail.len());
        format!("{sign}{head}{tail}{zeros}")
    } else if tail.is_empty() {
        format!("{sign}{head}e{e10}")
    } else {
        format!("{sign}{head}.{tail}e{e10}")
    }
}

impl SeeleySequence {
    /// `Σ_l |a_l| |b_l|^n`.
    pub fn abs_moment(&self, n: usize) -> f64 {
        self.weights
            .iter()
            .zip(&self.nodes)
            .map(|(a, b)| a.abs() * b.abs().powi(n as i32))
            .sum()
    }

    /// `C_k = Σ_{n≤k} max(1, Σ_l |a_l| |b_l|^n)`.
    pub fn growth_constant(&self, k: usize) -> f64 {
        (0..=k).map(|n| self.abs_moment(n).max(1.0)).sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest `X` such that `[−X, 0)` maps into `[0, valid_max]` under every `b_l`.
    pub fn negative_window(&self, valid_max: f64) -> f64 {
        valid_max / self.nodes[self.len - 1].abs()
    }

    pub fn export(&self) -> SequenceExport {
        SequenceExport {
            len: self.len,
            b: self.nodes.iter().map(|b| b.to_string()).collect(),
            a: self
                .exact_weights
                .iter()
                .map(|a| to_decimal_string(a, EXPORT_DIGITS))
                .collect(),
            precision_bits: self.precision_bits,
            residuals: self.residuals.clone(),
            f64_residuals: self.f64_residuals.clone(),
            growth: (0..self.len).map(|k| self.growth_constant(k)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceExport {
    #[serde(rename = "L")]
    pub len: usize,
    pub b: Vec<String>,
    pub a: Vec<String>,
    pub precision_bits: u64,
    pub residuals: Vec<f64>,
    pub f64_residuals: Vec<f64>,
    #[serde(rename = "C")]
    pub growth: Vec<f64>,
}

/// `Eu`: `u` on `J`, `Σ_l a_l u(b_l x)` for `x < 0`.
pub struct Extension {
    u: Fun,
    seq: Arc<SeeleySequence>,
    valid_max: f64,
}

impl Extension {
    fn check(&self, y: f64) -> Result<()> {
        if y > self.valid_max {
            return Err(Error::OutOfDomain(format!(
                "extension needs u at {y}, beyond its valid range [0, {}]",
                self.valid_max
            )));
        }
        Ok(())
    }
}

impl SmoothFn for Extension {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        if x >= 0.0 {
            self.check(x)?;
            return self.u.jet(x, k);
        }
        let mut derivs = vec![0.0; k + 1];
        for (a, b) in self.seq.weights.iter().zip(&self.seq.nodes) {
            let y = b * x;
            self.check(y)?;
            let j = self.u.jet(y, k)?;
            let mut scale = *a;
            for (d, v) in derivs.iter_mut().zip(&j.derivs) {
                *d += scale * v;
                scale *= b;
            }
        }
        Ok(Jet { x, derivs })
    }

    fn value(&self, x: f64) -> Result<f64> {
        if x >= 0.0 {
            self.check(x)?;
            return self.u.value(x);
        }
        let mut acc = 0.0;
        for (a, b) in self.seq.weights.iter().zip(&self.seq.nodes) {
            self.check(b * x)?;
            acc += a * self.u.value(b * x)?;
        }
        Ok(acc)
    }
}

pub fn extend(u: Fun, seq: &Arc<SeeleySequence>) -> Fun {
    extend_within(u, seq, f64::INFINITY)
}

/// Extension of a `u` that is only valid on `[0, valid_max]`.
pub fn extend_within(u: Fun, seq: &Arc<SeeleySequence>, valid_max: f64) -> Fun {
    Arc::new(Extension {
        u,
        seq: seq.clone(),
        valid_max,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Gap {
    pub n: usize,
    pub derivative_at_zero: f64,
    pub residual: f64,
    /// `r_n |u^(n)(0)|`.
    pub gap: f64,
    /// `|Σ a_l b_l^n u^(n)(0) − u^(n)(0)|` evaluated with the `f64` weights.
    pub evaluated_gap: f64,
    pub within_tolerance: bool,
}

pub fn smoothness_gap(u: &dyn SmoothFn, seq: &SeeleySequence, n_max: usize) -> Result<Vec<Gap>> {
    if n_max >= seq.len {
        return Err(Error::Precondition(format!(
            "n_max = {n_max} must be below L = {}",
            seq.len
        )));
    }
    let j = u.jet(0.0, n_max)?;
    Ok((0..=n_max)
        .map(|n| {
            let d = j.derivs[n];
            let left: f64 = seq
                .weights
                .iter()
                .zip(&seq.nodes)
                .map(|(a, b)| a * b.powi(n as i32) * d)
                .sum();
            let gap = seq.residuals[n] * d.abs();
            Gap {
                n,
                derivative_at_zero: d,
                residual: seq.residuals[n],
                gap,
                evaluated_gap: (left - d).abs(),
                within_tolerance: gap < 1e-6 * (1.0 + d.abs()),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub k: usize,
    /// `|Eu|_{k,∞,ℝ}`.
    pub lhs: f64,
    /// `|u|_{k,∞,J}`.
    pub seminorm_j: f64,
    pub growth: f64,
    pub holds: bool,
}

/// `|Eu|_{k,∞,ℝ} ≤ C_k |u|_{k,∞,J}` on the given grids.
pub fn extension_bound_check(
    u: &Fun,
    seq: &Arc<SeeleySequence>,
    k: usize,
    real_grid: &Grid,
    half_grid: &Grid,
) -> Result<BoundCheck> {
    half_grid.check_in(Domain::HalfLine)?;
    let eu = extend(u.clone(), seq);
    let lhs = seminorm(&*eu, k, real_grid)?;
    let seminorm_j = seminorm(&**u, k, half_grid)?;
    let growth = seq.growth_constant(k);
    let rhs = growth * seminorm_j;
    Ok(BoundCheck {
        k,
        lhs,
        seminorm_j,
        growth,
        holds: lhs <= rhs * (1.0 + 1e-12) + 1e-300,
    })
}

/// ε-wise extension of a net on `J`.
pub fn extend_net(net: &Net, seq: &Arc<SeeleySequence>) -> Result<Net> {
    if net.domain != Domain::HalfLine {
        return Err(Error::Precondition(format!(
            "net '{}' is not defined on the half-line",
            net.label
        )));
    }
    let (inner, seq) = (net.clone(), seq.clone());
    Ok(Net::from_fn(
        format!("E[{}]", net.label),
        Domain::Real,
        move |eps| Ok(extend(inner.at(eps)?, &seq)),
    ))
}

/// Extended net together with its vanishing-at-infinity evidence.
pub struct FlaggedExtension {
    pub net: Net,
    /// Tail checks of the input at each probed ε.
    pub vanishing: Vec<(f64, VanishingReport)>,
    /// Every probed member vanishes at +∞ through order `j_max`, so the
    /// extension is flagged as vanishing at infinity as well.
    pub vanishing_at_infinity: bool,
}

/// [`extend_net`] plus the vanishing flag, checked at `eps_values`.
pub fn extend_net_flagged(
    net: &Net,
    seq: &Arc<SeeleySequence>,
    eps_values: &[f64],
    j_max: usize,
    tails: &TailWindows,
) -> Result<FlaggedExtension> {
    let extended = extend_net(net, seq)?;
    let vanishing = eps_values
        .iter()
        .map(|&eps| Ok((eps, check_vanishing(&*net.at(eps)?, j_max, tails)?)))
        .collect::<Result<Vec<_>>>()?;
    let vanishing_at_infinity = !vanishing.is_empty() && vanishing.iter().all(|(_, r)| r.vanishing);
    Ok(FlaggedExtension {
        net: extended,
        vanishing,
        vanishing_at_infinity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::expr_fn;
    use crate::jetcalc::parse;

    fn f(s: &str) -> Fun {
        expr_fn(parse(s).unwrap())
    }

    /// `a_l = Π_{m≠l} (1 − b_m) / (b_l − b_m)`, the Lagrange basis at 1.
    fn lagrange_weights(len: usize) -> Vec<BigRational> {
        let b: Vec<BigRational> = (0..len)
            .map(|l| -BigRational::from_integer(BigInt::one() << l))
            .collect();
        (0..len)
            .map(|l| {
                let mut p = BigRational::one();
                for m in (0..len).filter(|&m| m != l) {
                    p *= (BigRational::one() - &b[m]) / (&b[l] - &b[m]);
                }
                p
            })
            .collect()
    }

    #[test]
    fn short_sequences_are_exact() {
        let s1 = build_sequence(1).unwrap();
        assert_eq!(s1.weights, vec![1.0]);
        assert_eq!(s1.residuals, vec![0.0]);
        let s2 = build_sequence(2).unwrap();
        assert_eq!(s2.nodes, vec![-1.0, -2.0]);
        assert_eq!(s2.weights, vec![3.0, -2.0]);
    }

    #[test]
    fn elimination_agrees_with_lagrange_form() {
        for len in [3, 4, 8, 12, 16] {
            let b: Vec<BigRational> = (0..len)
                .map(|l| -BigRational::from_integer(BigInt::one() << l))
                .collect();
            assert_eq!(solve_vandermonde(&b), lagrange_weights(len));
        }
        let s4 = build_sequence(4).unwrap();
        let expect = [45.0 / 7.0, -7.5, 2.25, -5.0 / 28.0];
        for (a, e) in s4.weights.iter().zip(expect) {
            assert!((a - e).abs() < 1e-14);
        }
    }

    #[test]
    fn residuals_small_up_to_sixteen() {
        for len in 1..=MAX_LEN {
            let s = build_sequence(len).unwrap();
            assert!(s.max_residual() < 1e-8, "L = {len}");
        }
        assert!(build_sequence(12).unwrap().f64_residuals[11] > 1e-8);
        assert!(build_sequence(0).is_err());
        assert!(build_sequence(17).is_err());
    }

    #[test]
    fn low_precision_is_a_conditioning_failure() {
        assert!(matches!(
            build_sequence_with_precision(12, 53),
            Err(Error::ConditioningFailure { len: 12, .. })
        ));
    }

    #[test]
    fn growth_constants_nondecreasing() {
        let s = build_sequence(6).unwrap();
        let c: Vec<f64> = (0..8).map(|k| s.growth_constant(k)).collect();
        assert!(c.windows(2).all(|w| w[0] <= w[1]));
        assert!(c.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn decimal_strings() {
        let q = BigRational::new(BigInt::from(-7), BigInt::from(4));
        assert_eq!(to_decimal_string(&q, 10), "-1.75e0");
        assert_eq!(to_decimal_string(&BigRational::from_integer((-2).into()), 10), "-2");
        assert_eq!(to_decimal_string(&BigRational::from_integer(1200.into()), 10), "1200");
        let third = BigRational::new(BigInt::from(1), BigInt::from(3000));
        assert_eq!(to_decimal_string(&third, 5), "3.3333e-4");
        let s = build_sequence(4).unwrap().export();
        assert_eq!(s.a[0].parse::<f64>().unwrap(), 45.0 / 7.0);
        assert_eq!(s.b[3], "-8");
    }

    #[test]
    fn extension_examples() {
        let s4 = Arc::new(build_sequence(4).unwrap());
        let one = extend(f("1"), &s4);
        assert!((one.value(-3.0).unwrap() - 1.0).abs() < 1e-13);
        let id = extend(f("x"), &s4);
        assert!((id.value(-0.7).unwrap() + 0.7).abs() < 1e-13);
        let e = extend(f("exp(-x)"), &s4);
        let direct: f64 = s4
            .weights
            .iter()
            .zip(&s4.nodes)
            .map(|(a, b)| a * (0.25 * b).exp())
            .sum();
        assert_eq!(e.value(-0.25).unwrap(), direct);
        assert_eq!(e.value(0.5).unwrap(), (-0.5f64).exp());
    }

    #[test]
    fn extension_derivatives_match_values() {
        let s = Arc::new(build_sequence(6).unwrap());
        let e = extend(f("exp(-x)*sin(x)"), &s);
        let x = -0.3;
        let h = 1e-5;
        let fd = (e.value(x + h).unwrap() - e.value(x - h).unwrap()) / (2.0 * h);
        assert!((e.jet(x, 1).unwrap().derivs[1] - fd).abs() < 1e-6);
    }

    #[test]
    fn valid_range_is_enforced() {
        let s = Arc::new(build_sequence(4).unwrap());
        let e = extend_within(f("exp(-x)"), &s, 10.0);
        assert!(e.value(-1.0).is_ok());
        assert!(matches!(e.value(-2.0), Err(Error::OutOfDomain(_))));
        assert_eq!(s.negative_window(10.0), 1.25);
    }

    #[test]
    fn gaps_equal_residual_transfer() {
        let s = build_sequence(8).unwrap();
        for g in smoothness_gap(&*f("exp(-x)"), &s, 5).unwrap() {
            assert!(g.gap < 1e-8 && g.within_tolerance);
            assert_eq!(g.gap, g.residual * g.derivative_at_zero.abs());
        }
        let g = smoothness_gap(&*f("1"), &s, 3).unwrap();
        assert!(g[1..].iter().all(|g| g.gap == 0.0));
        let g = smoothness_gap(&*f("x^2"), &build_sequence(3).unwrap(), 2).unwrap();
        assert!(g[2].gap < 1e-7);
        assert!(smoothness_gap(&*f("1"), &s, 8).is_err());
    }

    #[test]
    fn bound_examples() {
        let real = Grid::uniform(-5.0, 5.0, 1001);
        let half = Grid::uniform(0.0, 40.0, 4001);
        let s4 = Arc::new(build_sequence(4).unwrap());
        let b = extension_bound_check(&f("exp(-x)"), &s4, 2, &real, &half).unwrap();
        assert!(b.holds);
        assert!((b.seminorm_j - 3.0).abs() < 1e-12);
        let b = extension_bound_check(&f("1"), &s4, 3, &real, &half).unwrap();
        assert!(b.holds && (b.lhs - 1.0).abs() < 1e-12);
        let s6 = Arc::new(build_sequence(6).unwrap());
        let b = extension_bound_check(&f("exp(-x)*sin(x)"), &s6, 3, &real, &half).unwrap();
        assert!(b.holds);
    }

    #[test]
    fn extend_net_requires_half_line() {
        let s = Arc::new(build_sequence(4).unwrap());
        let net = Net::from_template(parse("eps^2*exp(-x)").unwrap(), Domain::Real);
        assert!(extend_net(&net, &s).is_err());
        let ext = extend_net(&net.with_domain(Domain::HalfLine), &s).unwrap();
        assert_eq!(ext.domain, Domain::Real);
    }

    #[test]
    fn vanishing_flag() {
        let s = Arc::new(build_sequence(4).unwrap());
        let tails = TailWindows::default();
        let decaying = Net::from_template(parse("eps*exp(-x)").unwrap(), Domain::HalfLine);
        let r = extend_net_flagged(&decaying, &s, &[0.5, 0.1], 2, &tails).unwrap();
        assert!(r.vanishing_at_infinity);
        assert_eq!(r.vanishing.len(), 2);
        let periodic = Net::from_template(parse("sin(x)").unwrap(), Domain::HalfLine);
        let r = extend_net_flagged(&periodic, &s, &[0.5], 2, &tails).unwrap();
        assert!(!r.vanishing_at_infinity);
    }
}
