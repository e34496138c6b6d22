//! Function specifications accepted by `--init` and `--u`.
//!
//! | Form | Function |
//! |------|----------|
//! | `constant:<c>` | u ≡ c |
//! | `random[:seed=<k>]` | positive random band-limited function |
//! | `extremizer:zeta=<z>[,c=<c>]` | family member; `<z>` is `<r>e<k>` (r·e_k) or `a:b:c` |
//! | `bump:l=<l>,m=<m>,amp=<a>` | 1 + a·Y_{l,m} |
//! | `file:<path>` | coefficient JSON |

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use confsob_core::conformal::{extremizer, ExtremizerParams};
use confsob_core::harmonics::{mode_count, HarmonicCoeffs};
use confsob_core::sphere::{sphere_area, Constant, QuadratureGrid, SphereFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::read_coeffs;
use crate::BoxError;

#[derive(Debug, Clone, PartialEq)]
pub enum Zeta {
    /// r·e_k, k counted from 1.
    Axis { r: f64, k: usize },
    Vector(Vec<f64>),
}

impl Zeta {
    fn resolve(&self, n: usize) -> Result<Vec<f64>, SpecError> {
        match self {
            Self::Axis { r, k } => {
                if *k == 0 || *k > n + 1 {
                    return Err(SpecError(format!("axis e{k} does not exist in R^{}", n + 1)));
                }
                let mut z = vec![0.0; n + 1];
                z[k - 1] = *r;
                Ok(z)
            }
            Self::Vector(v) if v.len() == n + 1 => Ok(v.clone()),
            Self::Vector(v) => Err(SpecError(format!("zeta has {} entries, expected {}", v.len(), n + 1))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Constant(f64),
    Random { seed: Option<u64> },
    Extremizer { zeta: Zeta, c: f64 },
    Bump { l: usize, m: i64, amp: f64 },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecError(pub String);

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid function spec: {}", self.0)
    }
}

impl std::error::Error for SpecError {}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, SpecError> {
    v.trim()
        .parse()
        .map_err(|_| SpecError(format!("cannot parse {key}={v}")))
}

fn parse_zeta(v: &str) -> Result<Zeta, SpecError> {
    if v.contains(':') {
        return v.split(':').map(|x| num("zeta", x)).collect::<Result<_, _>>().map(Zeta::Vector);
    }
    // "0.3e3" names the axis, not 300.
    let (r, k) = v
        .rsplit_once('e')
        .ok_or_else(|| SpecError(format!("zeta={v}: expected <r>e<k> or a:b:c")))?;
    Ok(Zeta::Axis {
        r: num("zeta", r)?,
        k: num("zeta axis", k)?,
    })
}

fn pairs(body: &str) -> Result<Vec<(&str, &str)>, SpecError> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| SpecError(format!("expected key=value, got {kv:?}")))
        })
        .collect()
}

impl FromStr for InitSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let (kind, body) = s.split_once(':').unwrap_or((s, ""));
        match kind.trim() {
            "constant" => Ok(Self::Constant(num("constant", body)?)),
            "random" => {
                let mut seed = None;
                for (k, v) in pairs(body)? {
                    match k {
                        "seed" => seed = Some(num(k, v)?),
                        _ => return Err(SpecError(format!("random: unknown key {k}"))),
                    }
                }
                Ok(Self::Random { seed })
            }
            "extremizer" => {
                let (mut zeta, mut c) = (None, 1.0);
                for (k, v) in pairs(body)? {
                    match k {
                        "zeta" => zeta = Some(parse_zeta(v)?),
                        "c" => c = num(k, v)?,
                        _ => return Err(SpecError(format!("extremizer: unknown key {k}"))),
                    }
                }
                let zeta = zeta.ok_or_else(|| SpecError("extremizer needs zeta=...".into()))?;
                Ok(Self::Extremizer { zeta, c })
            }
            "bump" => {
                let (mut l, mut m, mut amp) = (None, 0, 0.5);
                for (k, v) in pairs(body)? {
                    match k {
                        "l" => l = Some(num(k, v)?),
                        "m" => m = num(k, v)?,
                        "amp" => amp = num(k, v)?,
                        _ => return Err(SpecError(format!("bump: unknown key {k}"))),
                    }
                }
                let l = l.ok_or_else(|| SpecError("bump needs l=...".into()))?;
                Ok(Self::Bump { l, m, amp })
            }
            "file" if !body.is_empty() => Ok(Self::File(PathBuf::from(body))),
            other => Err(SpecError(format!("unknown kind {other:?} in {s:?}"))),
        }
    }
}

/// A random positive function: the constant 1 plus random modes decaying
/// like 1/(1+l), damped until positive on a degree-4L grid.
pub fn random_positive(n: usize, band: usize, seed: u64) -> Result<HarmonicCoeffs, BoxError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Arc::new(QuadratureGrid::new(n, 4 * band)?);
    let root = sphere_area(n)?.sqrt();
    let mut amp = 0.6;
    for _ in 0..60 {
        let raw: Vec<f64> = (0..mode_count(n, band)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut c = HarmonicCoeffs::from_values(n, band, raw)?;
        let degrees: Vec<usize> = c.degrees().collect();
        for (v, l) in c.values_mut().iter_mut().zip(degrees) {
            *v *= amp / (1.0 + l as f64);
        }
        c.set(0, 0, root)?;
        if c.synthesize(&grid)?.values().iter().all(|&v| v > 0.0) {
            return Ok(c);
        }
        amp *= 0.7;
    }
    Err(SpecError("could not draw a positive random function".into()).into())
}

impl InitSpec {
    /// Coefficients at band limit `band` (projected for the family).
    pub fn coeffs(&self, n: usize, band: usize, seed: u64) -> Result<HarmonicCoeffs, BoxError> {
        let root = sphere_area(n)?.sqrt();
        match self {
            Self::Constant(c) => {
                let mut out = HarmonicCoeffs::zeros(n, band)?;
                out.set(0, 0, c * root)?;
                Ok(out)
            }
            Self::Random { seed: s } => random_positive(n, band, s.unwrap_or(seed)),
            Self::Extremizer { .. } => {
                let f = self.function(n, band, seed)?;
                let grid = Arc::new(QuadratureGrid::new(n, 4 * band)?);
                Ok(HarmonicCoeffs::project(f.as_ref(), &grid, band)?)
            }
            Self::Bump { l, m, amp } => {
                let mut out = HarmonicCoeffs::zeros(n, band.max(*l))?;
                out.set(0, 0, root)?;
                out.set(*l, *m, *amp)?;
                Ok(out)
            }
            Self::File(p) => {
                let c = read_coeffs(p)?;
                if c.dim() != n {
                    return Err(SpecError(format!("{} holds n = {}, expected {n}", p.display(), c.dim())).into());
                }
                Ok(c)
            }
        }
    }

    /// The function itself; exact for constants and family members.
    pub fn function(&self, n: usize, band: usize, seed: u64) -> Result<Box<dyn SphereFunction>, BoxError> {
        match self {
            Self::Constant(c) => Ok(Box::new(Constant(*c))),
            Self::Extremizer { zeta, c } => {
                let p = ExtremizerParams::new(zeta.resolve(n)?, *c)?;
                Ok(Box::new(extremizer(&p)?))
            }
            _ => Ok(Box::new(self.coeffs(n, band, seed)?)),
        }
    }

    /// Parameters of a family member, if this is one.
    pub fn family_params(&self, n: usize) -> Result<Option<ExtremizerParams>, BoxError> {
        match self {
            Self::Extremizer { zeta, c } => Ok(Some(ExtremizerParams::new(zeta.resolve(n)?, *c)?)),
            Self::Constant(c) => Ok(Some(ExtremizerParams::constant(n, *c)?)),
            _ => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use confsob_core::sphere::SpherePoint;

    #[test]
    fn parses_forms() {
        assert_eq!("constant:1".parse::<InitSpec>().unwrap(), InitSpec::Constant(1.0));
        assert_eq!("random:seed=7".parse::<InitSpec>().unwrap(), InitSpec::Random { seed: Some(7) });
        assert_eq!("random".parse::<InitSpec>().unwrap(), InitSpec::Random { seed: None });
        assert_eq!(
            "extremizer:zeta=0.3e3".parse::<InitSpec>().unwrap(),
            InitSpec::Extremizer {
                zeta: Zeta::Axis { r: 0.3, k: 3 },
                c: 1.0
            }
        );
        assert_eq!(
            "extremizer:zeta=0.1:-0.2:0,c=2".parse::<InitSpec>().unwrap(),
            InitSpec::Extremizer {
                zeta: Zeta::Vector(vec![0.1, -0.2, 0.0]),
                c: 2.0
            }
        );
        assert_eq!(
            "bump:l=2,m=0,amp=0.5".parse::<InitSpec>().unwrap(),
            InitSpec::Bump { l: 2, m: 0, amp: 0.5 }
        );
        assert_eq!("file:a/b.json".parse::<InitSpec>().unwrap(), InitSpec::File("a/b.json".into()));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "constant:x", "extremizer:c=2", "random:sed=1", "bump:m=1", "file:", "sphere:1"] {
            assert!(s.parse::<InitSpec>().is_err(), "{s}");
        }
        let bad_axis: InitSpec = "extremizer:zeta=0.3e4".parse().unwrap();
        assert!(bad_axis.coeffs(2, 4, 0).is_err());
    }

    #[test]
    fn random_is_positive_and_reproducible() {
        let a = random_positive(2, 8, 7).unwrap();
        assert_eq!(a, random_positive(2, 8, 7).unwrap());
        assert_ne!(a, random_positive(2, 8, 8).unwrap());
        let g = Arc::new(QuadratureGrid::new(2, 40).unwrap());
        assert!(a.synthesize(&g).unwrap().values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn family_projection_matches_function() {
        let spec: InitSpec = "extremizer:zeta=0.3e3,c=2".parse().unwrap();
        let c = spec.coeffs(2, 16, 0).unwrap();
        let f = spec.function(2, 16, 0).unwrap();
        let p = SpherePoint::from_polar(0.7, 1.1);
        assert!((c.eval(&p).unwrap() - f.eval(&p).unwrap()).abs() < 1e-9);
    }
}
