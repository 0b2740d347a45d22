//! Bounded solutions of `u′ + A u = f` for constant hyperbolic `A`,
//! `n ≤ 2`, split into a principal part on `ℝ` and a decaying corrective
//! part on `J`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::aaa::{bochner_probe, check_vanishing, AAASpec, AaaSettings, BochnerProbe, VanishingReport};
use crate::error::{Error, Result};
use crate::func::{expr_fn, Fun, SmoothFn};
use crate::jetcalc::Jet;
use crate::nets::{Domain, EpsSchedule, Grid, Net};
use crate::quadrature::{integrate_vec, Refinement};

use super::{verify_solution, NDDSystem, SolutionReport, SolutionSettings};

pub type Matrix = Vec<Vec<f64>>;

/// Truncation horizon is `HORIZON_DECAY / min |Re λ|`.
pub const HORIZON_DECAY: f64 = 40.0;
pub const HYPERBOLICITY_GAP: f64 = 1e-8;

fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn zeros(n: usize) -> Matrix {
    vec![vec![0.0; n]; n]
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|r| (0..n).map(|c| (0..n).map(|k| a[r][k] * b[k][c]).sum()).collect())
        .collect()
}

fn matvec(a: &Matrix, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn scaled(a: &Matrix, s: f64) -> Matrix {
    a.iter().map(|r| r.iter().map(|v| v * s).collect()).collect()
}

/// Stable/unstable splitting of `A` and the decaying propagators
/// `E₊(s) = e^{−sA}P₊`, `E₋(s) = e^{sA}P₋` for `s ≥ 0`.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub a: Matrix,
    /// Real parts of the eigenvalues.
    pub real_parts: Vec<f64>,
    pub p_plus: Matrix,
    pub p_minus: Matrix,
    /// Set when the eigenvalues are real with opposite signs: `(λ₊, λ₋)`.
    mixed: Option<(f64, f64)>,
}

impl Spectrum {
    pub fn new(a: &Matrix) -> Result<Self> {
        let n = a.len();
        if !(1..=2).contains(&n) || a.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("A must be a 1x1 or 2x2 matrix".into()));
        }
        if a.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("A has non-finite entries".into()));
        }
        let (real_parts, eig) = if n == 1 {
            (vec![a[0][0]], Some((a[0][0], a[0][0])))
        } else {
            let tau = 0.5 * (a[0][0] + a[1][1]);
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let disc = tau * tau - det;
            if disc >= 0.0 {
                let d = disc.sqrt();
                (vec![tau + d, tau - d], Some((tau + d, tau - d)))
            } else {
                (vec![tau, tau], None)
            }
        };
        if let Some(re) = real_parts.iter().find(|r| r.abs() < HYPERBOLICITY_GAP) {
            return Err(Error::NonHyperbolic(*re));
        }
        let all_positive = real_parts.iter().all(|r| *r > 0.0);
        let all_negative = real_parts.iter().all(|r| *r < 0.0);
        let (p_plus, p_minus, mixed) = if all_positive {
            (identity(n), zeros(n), None)
        } else if all_negative {
            (zeros(n), identity(n), None)
        } else {
            let (l1, l2) = eig.expect("mixed signs imply real eigenvalues");
            let p1: Matrix = (0..2)
                .map(|r| {
                    (0..2)
                        .map(|c| (a[r][c] - if r == c { l2 } else { 0.0 }) / (l1 - l2))
                        .collect()
                })
                .collect();
            let p2: Matrix = (0..2)
                .map(|r| (0..2).map(|c| if r == c { 1.0 } else { 0.0 } - p1[r][c]).collect())
                .collect();
            (p1, p2, Some((l1, l2)))
        };
        Ok(Self {
            a: a.clone(),
            real_parts,
            p_plus,
            p_minus,
            mixed,
        })
    }

    pub fn min_decay(&self) -> f64 {
        self.real_parts.iter().map(|r| r.abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn has_stable(&self) -> bool {
        self.real_parts.iter().any(|r| *r > 0.0)
    }

    pub fn has_unstable(&self) -> bool {
        self.real_parts.iter().any(|r| *r < 0.0)
    }

    /// `e^{−sA}P₊`.
    pub fn e_plus(&self, s: f64) -> Matrix {
        match self.mixed {
            Some((lp, _)) => scaled(&self.p_plus, (-s * lp).exp()),
            None if self.has_stable() => expm(&self.a, -s),
            None => zeros(self.a.len()),
        }
    }

    /// `e^{sA}P₋`.
    pub fn e_minus(&self, s: f64) -> Matrix {
        match self.mixed {
            Some((_, lm)) => scaled(&self.p_minus, (s * lm).exp()),
            None if self.has_unstable() => expm(&self.a, s),
            None => zeros(self.a.len()),
        }
    }
}

/// `e^{tA}` in closed form for `n ≤ 2`.
pub fn expm(a: &Matrix, t: f64) -> Matrix {
    if a.len() == 1 {
        return vec![vec![(t * a[0][0]).exp()]];
    }
    let tau = 0.5 * (a[0][0] + a[1][1]);
    let nmat: Matrix = vec![
        vec![a[0][0] - tau, a[0][1]],
        vec![a[1][0], a[1][1] - tau],
    ];
    let d2 = -(nmat[0][0] * nmat[1][1] - nmat[0][1] * nmat[1][0]);
    let z = t * t * d2;
    let (c, s) = if z.abs() < 1e-8 {
        (1.0 + z / 2.0, t * (1.0 + z / 6.0))
    } else if d2 > 0.0 {
        let d = d2.sqrt();
        ((t * d).cosh(), (t * d).sinh() / d)
    } else {
        let d = (-d2).sqrt();
        ((t * d).cos(), (t * d).sin() / d)
    };
    let e = (t * tau).exp();
    (0..2)
        .map(|r| {
            (0..2)
                .map(|col| e * (if r == col { c } else { 0.0 } + s * nmat[r][col]))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Part {
    Principal,
    Corrective,
}

/// Shared state of one solve; jets of all components are cached together.
struct LseCore {
    spectrum: Spectrum,
    n: usize,
    g: Vec<Fun>,
    h: Vec<Fun>,
    w0: Vec<f64>,
    horizon: f64,
    cfg: Refinement,
    cache: Mutex<HashMap<(Part, u64, usize), Arc<Block>>>,
}

type Block = Vec<Vec<f64>>;

impl LseCore {
    fn jets(&self, fs: &[Fun], x: f64, k: usize) -> Result<Block> {
        fs.iter()
            .map(|f| Ok(f.jet(x, k)?.derivs))
            .collect()
    }

    /// Flattened `[component][derivative]` integrand.
    fn accumulate(out: &mut [f64], m: &Matrix, jets: &Block, k: usize, sign: f64) {
        let n = m.len();
        for r in 0..n {
            for c in 0..n {
                if m[r][c] == 0.0 {
                    continue;
                }
                for d in 0..=k {
                    out[r * (k + 1) + d] += sign * m[r][c] * jets[c][d];
                }
            }
        }
    }

    fn unflatten(&self, flat: Vec<f64>, k: usize) -> Block {
        flat.chunks(k + 1).map(|c| c.to_vec()).collect()
    }

    /// `∫_0^S E₊(s) f(x−s) ds − ∫_0^S E₋(s) f(x+s) ds`, differentiated under the integral.
    fn whole_line(&self, f: &[Fun], x: f64, k: usize) -> Result<Vec<f64>> {
        let dim = self.n * (k + 1);
        let sp = &self.spectrum;
        integrate_vec(
            |s| {
                let mut out = vec![0.0; dim];
                if sp.has_stable() {
                    Self::accumulate(&mut out, &sp.e_plus(s), &self.jets(f, x - s, k)?, k, 1.0);
                }
                if sp.has_unstable() {
                    Self::accumulate(&mut out, &sp.e_minus(s), &self.jets(f, x + s, k)?, k, -1.0);
                }
                Ok(out)
            },
            0.0,
            self.horizon,
            dim,
            &self.cfg,
        )
    }

    fn principal(&self, x: f64, k: usize) -> Result<Block> {
        Ok(self.unflatten(self.whole_line(&self.g, x, k)?, k))
    }

    /// `E₊(x)w₀ + ∫_0^x E₊(s)h(x−s) ds − ∫_0^S E₋(s)h(x+s) ds` on `J`.
    fn corrective(&self, x: f64, k: usize) -> Result<Block> {
        if x < 0.0 {
            return Err(Error::OutOfDomain(format!("corrective part evaluated at {x} < 0")));
        }
        let sp = &self.spectrum;
        let dim = self.n * (k + 1);
        let mut flat = vec![0.0; dim];
        if sp.has_unstable() {
            let part = integrate_vec(
                |s| {
                    let mut out = vec![0.0; dim];
                    Self::accumulate(&mut out, &sp.e_minus(s), &self.jets(&self.h, x + s, k)?, k, -1.0);
                    Ok(out)
                },
                0.0,
                self.horizon,
                dim,
                &self.cfg,
            )?;
            for (f, p) in flat.iter_mut().zip(part) {
                *f += p;
            }
        }
        if sp.has_stable() {
            let part = integrate_vec(
                |s| {
                    let mut out = vec![0.0; dim];
                    Self::accumulate(&mut out, &sp.e_plus(s), &self.jets(&self.h, x - s, k)?, k, 1.0);
                    Ok(out)
                },
                0.0,
                x,
                dim,
                &self.cfg,
            )?;
            for (f, p) in flat.iter_mut().zip(part) {
                *f += p;
            }
            // Boundary terms from differentiating ∫_0^x, and the homogeneous part.
            let e = sp.e_plus(x);
            let minus_a = scaled(&sp.a, -1.0);
            let h0 = self.jets(&self.h, 0.0, k)?;
            let mut powers = vec![identity(self.n)];
            for m in 1..=k {
                powers.push(matmul(&powers[m - 1], &minus_a));
            }
            for d in 0..=k {
                let mut v = matvec(&matmul(&powers[d], &e), &self.w0);
                for i in 0..d {
                    let hi: Vec<f64> = h0.iter().map(|c| c[i]).collect();
                    let b = matvec(&matmul(&powers[d - 1 - i], &e), &hi);
                    for (vv, bb) in v.iter_mut().zip(b) {
                        *vv += bb;
                    }
                }
                for r in 0..self.n {
                    flat[r * (k + 1) + d] += v[r];
                }
            }
        }
        Ok(self.unflatten(flat, k))
    }

    fn jet(&self, part: Part, x: f64, k: usize) -> Result<Arc<Block>> {
        let key = (part, x.to_bits(), k);
        if let Some(b) = self.cache.lock().expect("lse cache poisoned").get(&key) {
            return Ok(b.clone());
        }
        let b = Arc::new(match part {
            Part::Principal => self.principal(x, k)?,
            Part::Corrective => self.corrective(x, k)?,
        });
        self.cache
            .lock()
            .expect("lse cache poisoned")
            .insert(key, b.clone());
        Ok(b)
    }
}

struct Component {
    core: Arc<LseCore>,
    parts: Vec<Part>,
    index: usize,
}

impl SmoothFn for Component {
    fn jet(&self, x: f64, k: usize) -> Result<Jet> {
        let mut derivs = vec![0.0; k + 1];
        for p in &self.parts {
            let b = self.core.jet(*p, x, k)?;
            for (d, v) in derivs.iter_mut().zip(&b[self.index]) {
                *d += v;
            }
        }
        Ok(Jet { x, derivs })
    }
}

/// Principal, corrective and reassembled components of one solve.
pub struct LseSolution {
    pub spectrum: Spectrum,
    pub horizon: f64,
    /// `e^{−HORIZON_DECAY} sup|g| / min|Re λ|` on the probe grid.
    pub tail_bound: f64,
    pub v: Vec<Fun>,
    pub w: Vec<Fun>,
    pub u: Vec<Fun>,
}

/// Solves `u′ + A u = g + h` with `v` bounded on `ℝ` and `w` decaying on `J`.
/// `w₀` is projected onto the stable subspace.
pub fn solve_constant_lse(a: &Matrix, forcing: &[AAASpec], eps: f64, w0: Option<&[f64]>) -> Result<LseSolution> {
    let spectrum = Spectrum::new(a)?;
    let n = a.len();
    if forcing.len() != n {
        return Err(Error::InvalidInput(format!(
            "forcing has {} components, expected {n}",
            forcing.len()
        )));
    }
    let (g, h): (Vec<Fun>, Vec<Fun>) = forcing
        .iter()
        .map(|s| {
            let (g, h) = s.at(eps);
            (expr_fn(g), expr_fn(h))
        })
        .unzip();
    let w0 = match w0 {
        Some(v) if v.len() == n => matvec(&spectrum.p_plus, v),
        Some(v) => {
            return Err(Error::InvalidInput(format!(
                "initial value has {} components, expected {n}",
                v.len()
            )))
        }
        None => vec![0.0; n],
    };
    let horizon = HORIZON_DECAY / spectrum.min_decay();
    let mut sup_g = 0.0f64;
    for f in &g {
        for &x in &Grid::uniform(-50.0, 50.0, 1001).points {
            sup_g = sup_g.max(f.value(x)?.abs());
        }
    }
    let tail_bound = (-HORIZON_DECAY).exp() * sup_g / spectrum.min_decay();
    let core = Arc::new(LseCore {
        spectrum: spectrum.clone(),
        n,
        g,
        h,
        w0,
        horizon,
        cfg: Refinement::default(),
        cache: Mutex::new(HashMap::new()),
    });
    let make = |parts: &[Part]| -> Vec<Fun> {
        (0..n)
            .map(|index| {
                Arc::new(Component {
                    core: core.clone(),
                    parts: parts.to_vec(),
                    index,
                }) as Fun
            })
            .collect()
    };
    Ok(LseSolution {
        spectrum,
        horizon,
        tail_bound,
        v: make(&[Part::Principal]),
        w: make(&[Part::Corrective]),
        u: make(&[Part::Principal, Part::Corrective]),
    })
}

/// `sup_grid |y′ + A y − f|` over components.
pub fn substitution_residual(a: &Matrix, y: &[Fun], f: &[Fun], grid: &Grid) -> Result<f64> {
    let mut worst = 0.0f64;
    for &x in &grid.points {
        let jets = y.iter().map(|c| c.jet(x, 1)).collect::<Result<Vec<_>>>()?;
        for (r, fr) in f.iter().enumerate() {
            let mut v = jets[r].derivs[1] - fr.value(x)?;
            for (c, j) in jets.iter().enumerate() {
                v += a[r][c] * j.derivs[0];
            }
            worst = worst.max(v.abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub real_parts: Vec<f64>,
    pub horizon: f64,
    pub tail_bound: f64,
    /// Per ε, `sup_ℝ |v′ + A v − g|`.
    pub principal_residuals: Vec<f64>,
    /// Per ε, `sup_J |w′ + A w − h|`.
    pub corrective_residuals: Vec<f64>,
    pub probes: Vec<Option<BochnerProbe>>,
    pub vanishing: Vec<VanishingReport>,
    pub solution: SolutionReport,
}

pub struct SplitSolution {
    pub v: Vec<Net>,
    pub w: Vec<Net>,
    pub u: Vec<Net>,
    pub report: SplitReport,
}

/// Solves ε-wise and verifies the reassembled net against the system.
pub fn split_solve(
    a: &Matrix,
    forcing: &[AAASpec],
    schedule: &EpsSchedule,
    aaa: &AaaSettings,
    settings: &SolutionSettings,
) -> Result<SplitSolution> {
    let depends_on_eps = forcing
        .iter()
        .any(|s| !s.principal.params().is_empty() || !s.corrective.params().is_empty());
    let eps_values = if depends_on_eps { schedule.values() } else { vec![schedule.eps0] };
    let mut solutions = Vec::new();
    let mut principal_residuals = Vec::new();
    let mut corrective_residuals = Vec::new();
    let mut probes = Vec::new();
    let mut vanishing = Vec::new();
    for &eps in &eps_values {
        let sol = solve_constant_lse(a, forcing, eps, None)?;
        let (g, h): (Vec<Fun>, Vec<Fun>) = forcing
            .iter()
            .map(|s| {
                let (g, h) = s.at(eps);
                (expr_fn(g), expr_fn(h))
            })
            .unzip();
        principal_residuals.push(substitution_residual(a, &sol.v, &g, &aaa.real_grid)?);
        corrective_residuals.push(substitution_residual(a, &sol.w, &h, &aaa.half_grid)?);
        for (v, w) in sol.v.iter().zip(&sol.w) {
            probes.push(bochner_probe(&**v, &aaa.probe).ok());
            vanishing.push(check_vanishing(&**w, aaa.j_max, &aaa.tails)?);
        }
        solutions.push((eps, sol));
    }
    let (real_parts, horizon, tail_bound) = {
        let first = &solutions[0].1;
        (first.spectrum.real_parts.clone(), first.horizon, first.tail_bound)
    };
    let solutions = Arc::new(solutions);
    let pick = move |which: fn(&LseSolution) -> &Vec<Fun>, index: usize, domain: Domain, label: &str| {
        let solutions = solutions.clone();
        Net::from_fn(format!("{label}_{index}"), domain, move |eps| {
            let best = solutions
                .iter()
                .min_by(|x, y| (x.0 - eps).abs().total_cmp(&(y.0 - eps).abs()))
                .expect("at least one solve");
            if depends_on_eps && best.0 != eps {
                return Err(Error::InvalidInput(format!("no solve at eps = {eps}")));
            }
            Ok(which(&best.1)[index].clone())
        })
    };
    let n = a.len();
    let v: Vec<Net> = (0..n).map(|i| pick(|s| &s.v, i, Domain::Real, "v")).collect();
    let w: Vec<Net> = (0..n).map(|i| pick(|s| &s.w, i, Domain::HalfLine, "w")).collect();
    let u: Vec<Net> = (0..n).map(|i| pick(|s| &s.u, i, Domain::HalfLine, "u")).collect();
    let forcing_nets: Vec<Net> = forcing.iter().map(|s| s.net()).collect();
    let sys = NDDSystem::lse(a, forcing_nets)?;
    let solution = verify_solution(&sys, &u, schedule, settings)?;
    Ok(SplitSolution {
        v,
        w,
        u,
        report: SplitReport {
            real_parts,
            horizon,
            tail_bound,
            principal_residuals,
            corrective_residuals,
            probes,
            vanishing,
            solution,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::parse;

    fn spec(g: &str, h: &str) -> AAASpec {
        AAASpec::parse(g, h).unwrap()
    }

    fn f(s: &str) -> Fun {
        expr_fn(parse(s).unwrap())
    }

    #[test]
    fn scalar_examples() {
        let sol = solve_constant_lse(&vec![vec![1.0]], &[spec("sin(x)", "exp(-x)")], 0.5, None).unwrap();
        for x in [-3.0f64, 0.0, 0.7, 9.0] {
            let v = sol.v[0].value(x).unwrap();
            assert!((v - 0.5 * (x.sin() - x.cos())).abs() < 1e-10);
        }
        for x in [0.0f64, 0.7, 9.0] {
            let w = sol.w[0].value(x).unwrap();
            assert!((w - x * (-x).exp()).abs() < 1e-10);
        }
        let grid = Grid::uniform(-10.0, 10.0, 81);
        let a = vec![vec![1.0]];
        assert!(substitution_residual(&a, &sol.v, &[f("sin(x)")], &grid).unwrap() < 1e-8);
        let half = Grid::uniform(0.0, 10.0, 41);
        assert!(substitution_residual(&a, &sol.w, &[f("exp(-x)")], &half).unwrap() < 1e-8);
        let c = solve_constant_lse(&a, &[spec("3", "0")], 0.5, None).unwrap();
        assert!((c.v[0].value(2.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let sol = solve_constant_lse(&vec![vec![2.0]], &[spec("0", "0")], 0.5, None).unwrap();
        assert_eq!(sol.u[0].value(1.5).unwrap(), 0.0);
    }

    #[test]
    fn nonhyperbolic_rejected() {
        assert!(matches!(
            solve_constant_lse(&vec![vec![1e-9]], &[spec("0", "0")], 0.5, None),
            Err(Error::NonHyperbolic(_))
        ));
        let rot = vec![vec![0.0, 1.0], vec![-1.0, 0.0]];
        assert!(matches!(Spectrum::new(&rot), Err(Error::NonHyperbolic(_))));
    }

    #[test]
    fn matrix_exponential_closed_form() {
        let a = vec![vec![1.0, 2.0], vec![0.5, -0.3]];
        let t = 0.37;
        let e = expm(&a, t);
        let mut series = identity(2);
        let mut term = identity(2);
        for k in 1..30 {
            term = scaled(&matmul(&term, &a), t / k as f64);
            for r in 0..2 {
                for c in 0..2 {
                    series[r][c] += term[r][c];
                }
            }
        }
        for r in 0..2 {
            for c in 0..2 {
                assert!((e[r][c] - series[r][c]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn saddle_system_has_bounded_solution() {
        let a = vec![vec![1.0, 2.0], vec![0.0, -1.5]];
        let forcing = [spec("sin(x)", "exp(-x)"), spec("cos(2*x)", "exp(-2*x)")];
        let sol = solve_constant_lse(&a, &forcing, 0.5, None).unwrap();
        let p = &sol.spectrum;
        let sum = matmul(&p.p_plus, &p.p_plus);
        for (row, prow) in sum.iter().zip(&p.p_plus) {
            for (v, pv) in row.iter().zip(prow) {
                assert!((v - pv).abs() < 1e-14);
            }
        }
        let grid = Grid::uniform(-8.0, 8.0, 33);
        let half = Grid::uniform(0.0, 8.0, 17);
        let g = [f("sin(x)"), f("cos(2*x)")];
        let h = [f("exp(-x)"), f("exp(-2*x)")];
        assert!(substitution_residual(&a, &sol.v, &g, &grid).unwrap() < 1e-8);
        assert!(substitution_residual(&a, &sol.w, &h, &half).unwrap() < 1e-8);
        assert!(sol.w[0].value(40.0).unwrap().abs() < 1e-10);
        assert!(sol.w[1].value(40.0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn complex_stable_pair() {
        let a = vec![vec![0.5, 2.0], vec![-2.0, 0.5]];
        let sol = solve_constant_lse(&a, &[spec("sin(x)", "0"), spec("0", "exp(-x)")], 0.5, None).unwrap();
        let grid = Grid::uniform(-5.0, 5.0, 21);
        let half = Grid::uniform(0.0, 5.0, 21);
        assert!(substitution_residual(&a, &sol.v, &[f("sin(x)"), f("0")], &grid).unwrap() < 1e-8);
        assert!(substitution_residual(&a, &sol.w, &[f("0"), f("exp(-x)")], &half).unwrap() < 1e-8);
    }

    #[test]
    fn initial_value_projected() {
        let a = vec![vec![1.0]];
        let sol = solve_constant_lse(&a, &[spec("0", "0")], 0.5, Some(&[2.0])).unwrap();
        assert!((sol.w[0].value(1.0).unwrap() - 2.0 * (-1.0f64).exp()).abs() < 1e-14);
        let d = sol.w[0].jet(1.0, 2).unwrap();
        assert!((d.derivs[2] - 2.0 * (-1.0f64).exp()).abs() < 1e-14);
        let unstable = solve_constant_lse(&vec![vec![-1.0]], &[spec("0", "0")], 0.5, Some(&[2.0])).unwrap();
        assert_eq!(unstable.w[0].value(1.0).unwrap(), 0.0);
    }
}
