use serde::Serialize;

use super::{EpsSchedule, Grid, Net};
use crate::error::{Error, Result};
use crate::func::SmoothFn;

/// `max_grid |f^(j)|` for `j = 0..=k`.
pub fn derivative_sups(f: &dyn SmoothFn, k: usize, grid: &Grid) -> Result<Vec<f64>> {
    if grid.points.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let mut sups = vec![0.0f64; k + 1];
    for &x in &grid.points {
        let jet = f.jet(x, k)?;
        for (s, d) in sups.iter_mut().zip(&jet.derivs) {
            *s = s.max(d.abs());
        }
    }
    Ok(sups)
}

/// `|f|_{k,∞} ≈ Σ_{j≤k} max_grid |f^(j)|`.
pub fn seminorm(f: &dyn SmoothFn, k: usize, grid: &Grid) -> Result<f64> {
    Ok(derivative_sups(f, k, grid)?.iter().sum())
}

/// Seminorms of a net: one row per ε, one column per order `k`.
#[derive(Debug, Clone, Serialize)]
pub struct SeminormTable {
    pub eps: Vec<f64>,
    /// `values[i][k] = |u_{ε_i}|_{k,∞}`.
    pub values: Vec<Vec<f64>>,
}

impl SeminormTable {
    pub fn compute(net: &Net, k_max: usize, schedule: &EpsSchedule, grid: &Grid) -> Result<Self> {
        schedule.validate()?;
        grid.check_in(net.domain)?;
        let eps = schedule.values();
        let mut values = Vec::with_capacity(eps.len());
        for &e in &eps {
            let f = net.at(e)?;
            let sups = derivative_sups(f.as_ref(), k_max, grid)?;
            let mut acc = 0.0;
            values.push(
                sups.iter()
                    .map(|s| {
                        acc += s;
                        acc
                    })
                    .collect(),
            );
        }
        Ok(Self { eps, values })
    }

    pub fn k_max(&self) -> usize {
        self.values[0].len() - 1
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[k]).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["eps".to_string()];
        header.extend((0..=self.k_max()).map(|k| format!("k{k}")));
        let io = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(&header).map_err(io)?;
        for (e, row) in self.eps.iter().zip(&self.values) {
            let mut rec = vec![e.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::parse;
    use crate::nets::Domain;

    fn grid_0_2pi() -> Grid {
        Grid::uniform(0.0, 2.0 * std::f64::consts::PI, 4001)
    }

    #[test]
    fn sine_seminorms() {
        let sin = parse("sin(x)").unwrap();
        assert!((seminorm(&sin, 0, &grid_0_2pi()).unwrap() - 1.0).abs() < 1e-3);
        assert!((seminorm(&sin, 1, &grid_0_2pi()).unwrap() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn decaying_exponential_on_half_line() {
        let f = parse("exp(-x)").unwrap();
        let g = Grid::uniform(0.0, 20.0, 4001);
        assert!((seminorm(&f, 2, &g).unwrap() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn table_and_csv_layout() {
        let net = Net::from_template(parse("eps*sin(x)").unwrap(), Domain::Real);
        let t = SeminormTable::compute(&net, 1, &EpsSchedule::default(), &grid_0_2pi()).unwrap();
        assert_eq!(t.values.len(), 12);
        assert_eq!(t.values[0].len(), 2);
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("eps,k0,k1\n0.5,"));
        assert_eq!(csv.lines().count(), 13);
    }
}
