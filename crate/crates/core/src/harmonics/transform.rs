use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use libm::{cos, sin, sqrt};

use super::HarmonicCoeffs;
use crate::special::{legendre_table, mode_count, tri};
use crate::sphere::{Layout, QuadratureGrid};
use crate::{Error, Result};

/// Precomputed tables for repeated analysis/synthesis on one grid.
#[derive(Debug, Clone)]
pub struct Transform {
    grid: Arc<QuadratureGrid>,
    n: usize,
    band_limit: usize,
    /// Product grid: P̄ₗᵐ per ring, triangular. Circle: unused.
    legendre: Vec<Vec<f64>>,
    /// cos(mφ_k), sin(mφ_k) per azimuth (product) or per node (circle).
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl Transform {
    /// Tables for a grid that is exact for degree `2·band_limit`.
    pub fn new(grid: &Arc<QuadratureGrid>, band_limit: usize) -> Result<Self> {
        if grid.degree() < band_limit {
            return Err(Error::GridTooCoarse {
                degree: grid.degree(),
                band_limit,
            });
        }
        Self::synthesis_only(grid, grid.dim(), band_limit)
    }

    /// Tables usable for synthesis at any band limit.
    pub(crate) fn synthesis_only(grid: &Arc<QuadratureGrid>, n: usize, band_limit: usize) -> Result<Self> {
        if grid.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: grid.dim(),
            });
        }
        let trig = |phi: f64| {
            let c: Vec<f64> = (0..=band_limit).map(|m| cos(m as f64 * phi)).collect();
            let s: Vec<f64> = (0..=band_limit).map(|m| sin(m as f64 * phi)).collect();
            (c, s)
        };
        let (legendre, angles): (Vec<Vec<f64>>, Vec<f64>) = match &grid.layout {
            Layout::Circle { .. } => {
                let angles = grid
                    .nodes()
                    .iter()
                    .map(|p| libm::atan2(p.coords()[1], p.coords()[0]))
                    .collect();
                (Vec::new(), angles)
            }
            Layout::Product {
                cos_theta,
                n_azimuth,
                offset,
                ..
            } => {
                let legendre = cos_theta
                    .iter()
                    .map(|&x| {
                        let mut t = Vec::new();
                        legendre_table(band_limit, x, sqrt((1.0 - x * x).max(0.0)), &mut t);
                        t
                    })
                    .collect();
                let dphi = 2.0 * core::f64::consts::PI / *n_azimuth as f64;
                let angles = (0..*n_azimuth).map(|k| offset + dphi * k as f64).collect();
                (legendre, angles)
            }
        };
        let (cos, sin) = angles.into_iter().map(trig).unzip();
        Ok(Self {
            grid: Arc::clone(grid),
            n,
            band_limit,
            legendre,
            cos,
            sin,
        })
    }

    /// The grid these tables belong to.
    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    /// Band limit of the tables.
    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    /// Quadrature projection of node values.
    pub fn analyze(&self, values: &[f64]) -> Result<HarmonicCoeffs> {
        if values.len() != self.grid.len() {
            return Err(Error::GridMismatch);
        }
        if self.grid.degree() < self.band_limit {
            return Err(Error::GridTooCoarse {
                degree: self.grid.degree(),
                band_limit: self.band_limit,
            });
        }
        let band = self.band_limit;
        let mut out = alloc::vec![0.0; mode_count(self.n, band)];
        match &self.grid.layout {
            Layout::Circle { .. } => {
                let w = self.grid.weights()[0];
                let (k0, k) = (1.0 / sqrt(2.0 * core::f64::consts::PI), 1.0 / sqrt(core::f64::consts::PI));
                for (i, &f) in values.iter().enumerate() {
                    let wf = w * f;
                    out[0] += wf * k0;
                    for l in 1..=band {
                        out[2 * l - 1] += wf * k * self.sin[i][l];
                        out[2 * l] += wf * k * self.cos[i][l];
                    }
                }
            }
            Layout::Product {
                ring_weights,
                n_azimuth,
                ..
            } => {
                let dphi = 2.0 * core::f64::consts::PI / *n_azimuth as f64;
                let mut cs = alloc::vec![0.0; band + 1];
                let mut sn = alloc::vec![0.0; band + 1];
                for (j, ring) in values.chunks_exact(*n_azimuth).enumerate() {
                    cs.iter_mut().for_each(|v| *v = 0.0);
                    sn.iter_mut().for_each(|v| *v = 0.0);
                    for (k, &f) in ring.iter().enumerate() {
                        let (c, s) = (&self.cos[k], &self.sin[k]);
                        for m in 0..=band {
                            cs[m] += f * c[m];
                            sn[m] += f * s[m];
                        }
                    }
                    let w = ring_weights[j] * dphi;
                    let leg = &self.legendre[j];
                    for l in 0..=band {
                        let base = l * l + l;
                        out[base] += w * leg[tri(l, 0)] * cs[0];
                        for m in 1..=l {
                            let p = w * SQRT_2 * leg[tri(l, m)];
                            out[base + m] += p * cs[m];
                            out[base - m] += p * sn[m];
                        }
                    }
                }
            }
        }
        HarmonicCoeffs::from_values(self.n, band, out)
    }

    /// Node values of Σ u_{l,m} Y_{l,m}; `c` may have any band limit up to
    /// the tables' band limit.
    pub fn synthesize(&self, c: &HarmonicCoeffs) -> Result<Vec<f64>> {
        if c.dim() != self.n || c.band_limit() > self.band_limit {
            return Err(Error::ShapeMismatch);
        }
        let band = c.band_limit();
        let u = c.values();
        let mut out = Vec::with_capacity(self.grid.len());
        match &self.grid.layout {
            Layout::Circle { .. } => {
                let (k0, k) = (1.0 / sqrt(2.0 * core::f64::consts::PI), 1.0 / sqrt(core::f64::consts::PI));
                for i in 0..self.grid.len() {
                    let mut v = k0 * u[0];
                    for l in 1..=band {
                        v += k * (u[2 * l - 1] * self.sin[i][l] + u[2 * l] * self.cos[i][l]);
                    }
                    out.push(v);
                }
            }
            Layout::Product { n_azimuth, .. } => {
                let mut a = alloc::vec![0.0; band + 1];
                let mut b = alloc::vec![0.0; band + 1];
                for leg in &self.legendre {
                    for m in 0..=band {
                        let (mut sa, mut sb) = (0.0, 0.0);
                        for l in m..=band {
                            let p = leg[tri(l, m)];
                            let base = l * l + l;
                            sa += p * u[base + m];
                            if m > 0 {
                                sb += p * u[base - m];
                            }
                        }
                        a[m] = if m == 0 { sa } else { SQRT_2 * sa };
                        b[m] = SQRT_2 * sb;
                    }
                    for k in 0..*n_azimuth {
                        let (c, s) = (&self.cos[k], &self.sin[k]);
                        let mut v = a[0];
                        for m in 1..=band {
                            v += a[m] * c[m] + b[m] * s[m];
                        }
                        out.push(v);
                    }
                }
            }
        }
        Ok(out)
    }
}
