//! Random regression instances `(y, A)` and their flat-file formats.
//!
//! `y` has i.i.d. `N(0, sigma_y^2)` entries and `A` has i.i.d. `N(0, 1/M)`
//! entries, so columns have unit norm on average. Draws come from a seeded
//! PCG64 stream: all of `y` first, then `A` in row-major order.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_pcg::Pcg64;
use std::io::{BufRead, Read, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub y: DVector<f64>,
    /// `M x N` design matrix.
    pub design: DMatrix<f64>,
    pub sigma_y: f64,
    pub seed: u64,
}

impl Instance {
    /// Wraps existing data, checking only that the shapes agree.
    pub fn from_parts(y: DVector<f64>, design: DMatrix<f64>, sigma_y: f64, seed: u64) -> Result<Self> {
        if design.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: design.nrows(),
                got: y.len(),
            });
        }
        Ok(Self {
            y,
            design,
            sigma_y,
            seed,
        })
    }

    /// Number of observations.
    pub fn m(&self) -> usize {
        self.design.nrows()
    }

    /// Number of coefficients.
    pub fn n(&self) -> usize {
        self.design.ncols()
    }

    pub fn alpha(&self) -> f64 {
        self.m() as f64 / self.n() as f64
    }

    /// Dumps as little-endian binary: `M: u64, N: u64, sigma_y: f64, seed: u64`,
    /// then `A` row-major, then `y`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&(self.m() as u64).to_le_bytes())?;
        w.write_all(&(self.n() as u64).to_le_bytes())?;
        w.write_all(&self.sigma_y.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for mu in 0..self.m() {
            for i in 0..self.n() {
                w.write_all(&self.design[(mu, i)].to_le_bytes())?;
            }
        }
        for v in self.y.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut buf)
                .map_err(|e| Error::Format(format!("truncated binary instance: {e}")))?;
            Ok(buf)
        };
        let m = u64::from_le_bytes(next(&mut r)?) as usize;
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let sigma_y = f64::from_le_bytes(next(&mut r)?);
        let seed = u64::from_le_bytes(next(&mut r)?);
        let mut design = DMatrix::zeros(m, n);
        for mu in 0..m {
            for i in 0..n {
                design[(mu, i)] = f64::from_le_bytes(next(&mut r)?);
            }
        }
        let mut y = DVector::zeros(m);
        for mu in 0..m {
            y[mu] = f64::from_le_bytes(next(&mut r)?);
        }
        Self::from_parts(y, design, sigma_y, seed)
    }

    /// Dumps as CSV text: a `M,N,sigma_y,seed` header line, then `M` rows of
    /// `A`, then `y` on one line. Floats use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{},{},{},{}", self.m(), self.n(), self.sigma_y, self.seed)?;
        for mu in 0..self.m() {
            let row: Vec<String> = (0..self.n()).map(|i| self.design[(mu, i)].to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        let y: Vec<String> = self.y.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", y.join(","))
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut line = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Format("unexpected end of file".into()))?
                .map_err(|e| Error::Format(e.to_string()))
        };
        let header = line()?;
        let h: Vec<&str> = header.trim().split(',').collect();
        if h.len() != 4 {
            return Err(Error::Format(format!("bad header: {header}")));
        }
        let bad = |s: &str| Error::Format(format!("bad field: {s}"));
        let m: usize = h[0].parse().map_err(|_| bad(h[0]))?;
        let n: usize = h[1].parse().map_err(|_| bad(h[1]))?;
        let sigma_y: f64 = h[2].parse().map_err(|_| bad(h[2]))?;
        let seed: u64 = h[3].parse().map_err(|_| bad(h[3]))?;
        let parse_row = |s: String, len: usize| -> Result<Vec<f64>> {
            let v: Vec<f64> = s
                .trim()
                .split(',')
                .map(|t| t.parse::<f64>().map_err(|_| bad(t)))
                .collect::<Result<_>>()?;
            if v.len() != len {
                return Err(Error::Format(format!("expected {len} fields, got {}", v.len())));
            }
            Ok(v)
        };
        let mut design = DMatrix::zeros(m, n);
        for mu in 0..m {
            for (i, v) in parse_row(line()?, n)?.into_iter().enumerate() {
                design[(mu, i)] = v;
            }
        }
        let y = DVector::from_vec(parse_row(line()?, m)?);
        Self::from_parts(y, design, sigma_y, seed)
    }
}

/// Draws a fresh instance. Requires `0 < M < N` and `sigma_y > 0`.
pub fn sample_instance(m: usize, n: usize, sigma_y: f64, seed: u64) -> Result<Instance> {
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter(format!("need 0 < M < N, got M = {m}, N = {n}")));
    }
    if !(sigma_y > 0.0 && sigma_y.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma_y must be positive, got {sigma_y}"
        )));
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let y = DVector::from_fn(m, |_, _| sigma_y * draw());
    let scale = 1.0 / (m as f64).sqrt();
    let row_major: Vec<f64> = (0..m * n).map(|_| scale * draw()).collect();
    let design = DMatrix::from_row_slice(m, n, &row_major);
    Ok(Instance {
        y,
        design,
        sigma_y,
        seed,
    })
}

/// Subtracts the mean of `y` and each column mean of `A`.
pub fn center_instance(inst: &Instance) -> Instance {
    let m = inst.m() as f64;
    let y_mean = inst.y.sum() / m;
    let y = inst.y.map(|v| v - y_mean);
    let mut design = inst.design.clone();
    for mut col in design.column_iter_mut() {
        let mean = col.sum() / m;
        col.add_scalar_mut(-mean);
    }
    Instance {
        y,
        design,
        sigma_y: inst.sigma_y,
        seed: inst.seed,
    }
}
