//! Data-generating distributions for oracles and simulations: scalar
//! families (with density, CDF and quantile) and point clouds in `R^d`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::stats::{phi_cdf, phi_inv, phi_pdf};
use crate::{Error, Result, Sample};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    Normal { mu: f64, sigma: f64 },
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Laplace { mu: f64, scale: f64 },
    Logistic { mu: f64, scale: f64 },
    /// Half-normal pieces of scales `left` and `right` joined at 0, each with
    /// mass 1/2. The density jumps at the median from `1/(left √(2π))` to
    /// `1/(right √(2π))`, so `F` has distinct one-sided derivatives there.
    SplitNormal { left: f64, right: f64 },
    /// Uniform on the unit cube `[0, 1]^d`.
    UnitCube { dim: usize },
    /// Standard normal in `R^d`.
    StdNormalCloud { dim: usize },
}

impl DistributionSpec {
    pub fn standard_normal() -> Self {
        DistributionSpec::Normal { mu: 0.0, sigma: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        use DistributionSpec::*;
        let ok = match *self {
            Normal { mu, sigma } => mu.is_finite() && sigma > 0.0 && sigma.is_finite(),
            Uniform { a, b } => a.is_finite() && b.is_finite() && a < b,
            Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Laplace { mu, scale } | Logistic { mu, scale } => mu.is_finite() && scale > 0.0 && scale.is_finite(),
            SplitNormal { left, right } => left > 0.0 && right > 0.0 && left.is_finite() && right.is_finite(),
            UnitCube { dim } | StdNormalCloud { dim } => dim >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid distribution parameters: {self}")))
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            DistributionSpec::UnitCube { dim } | DistributionSpec::StdNormalCloud { dim } => dim,
            _ => 1,
        }
    }

    /// True for the scalar families (which have `pdf`, `cdf`, `quantile`).
    pub fn is_scalar(&self) -> bool {
        !matches!(self, DistributionSpec::UnitCube { .. } | DistributionSpec::StdNormalCloud { .. })
    }

    /// Center of symmetry, for the symmetric scalar families.
    pub fn symmetry_center(&self) -> Option<f64> {
        match *self {
            DistributionSpec::Normal { mu, .. }
            | DistributionSpec::Laplace { mu, .. }
            | DistributionSpec::Logistic { mu, .. } => Some(mu),
            DistributionSpec::Uniform { a, b } => Some(0.5 * (a + b)),
            DistributionSpec::SplitNormal { left, right } if left == right => Some(0.0),
            _ => None,
        }
    }

    /// Draws one point into `out`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        use DistributionSpec::*;
        match *self {
            Normal { mu, sigma } => out.push(mu + sigma * rng.sample::<f64, _>(StandardNormal)),
            Uniform { a, b } => out.push(a + (b - a) * rng.random::<f64>()),
            Exponential { rate } => out.push(rng.sample::<f64, _>(Exp1) / rate),
            Laplace { mu, scale } => {
                let e: f64 = rng.sample(Exp1);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                out.push(mu + sign * scale * e);
            }
            Logistic { mu, scale } => {
                let u: f64 = rng.random();
                // keep ln finite at u = 0
                let u = u.max(f64::MIN_POSITIVE);
                out.push(mu + scale * (u / (1.0 - u)).ln());
            }
            SplitNormal { left, right } => {
                let z: f64 = rng.sample::<f64, _>(StandardNormal).abs();
                if rng.random::<bool>() {
                    out.push(right * z);
                } else {
                    out.push(-left * z);
                }
            }
            UnitCube { dim } => out.extend((0..dim).map(|_| rng.random::<f64>())),
            StdNormalCloud { dim } => out.extend((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal))),
        }
    }

    /// An i.i.d. sample of `n` points.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Sample {
        let mut coords = Vec::with_capacity(n * self.dim());
        for _ in 0..n {
            self.draw(rng, &mut coords);
        }
        Sample::new(self.dim(), coords).expect("generated coordinates are finite")
    }

    /// Density in `R^d`.
    pub fn density(&self, x: &[f64]) -> f64 {
        match *self {
            DistributionSpec::UnitCube { .. } => {
                if x.iter().all(|&c| (0.0..=1.0).contains(&c)) {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionSpec::StdNormalCloud { .. } => x.iter().map(|&c| phi_pdf(c)).product(),
            _ => self.pdf(x[0]),
        }
    }

    /// Scalar density. Returns the right-continuous version at jumps.
    pub fn pdf(&self, x: f64) -> f64 {
        use DistributionSpec::*;
        match *self {
            Normal { mu, sigma } => phi_pdf((x - mu) / sigma) / sigma,
            Uniform { a, b } => {
                if (a..=b).contains(&x) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Exponential { rate } => {
                if x >= 0.0 {
                    rate * (-rate * x).exp()
                } else {
                    0.0
                }
            }
            Laplace { mu, scale } => (-(x - mu).abs() / scale).exp() / (2.0 * scale),
            Logistic { mu, scale } => {
                let e = (-((x - mu) / scale).abs()).exp();
                e / (scale * (1.0 + e) * (1.0 + e))
            }
            SplitNormal { left, right } => {
                if x >= 0.0 {
                    phi_pdf(x / right) / right
                } else {
                    phi_pdf(x / left) / left
                }
            }
            UnitCube { .. } | StdNormalCloud { .. } => f64::NAN,
        }
    }

    /// One-sided limits `(f(x-), f(x+))` of the scalar density.
    pub fn one_sided_density(&self, x: f64) -> (f64, f64) {
        match *self {
            DistributionSpec::SplitNormal { left, right } if x == 0.0 => {
                (phi_pdf(0.0) / left, phi_pdf(0.0) / right)
            }
            DistributionSpec::Uniform { a, b } if x == a => (0.0, 1.0 / (b - a)),
            DistributionSpec::Uniform { a, b } if x == b => (1.0 / (b - a), 0.0),
            DistributionSpec::Exponential { rate } if x == 0.0 => (0.0, rate),
            _ => {
                let f = self.pdf(x);
                (f, f)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        use DistributionSpec::*;
        match *self {
            Normal { mu, sigma } => phi_cdf((x - mu) / sigma),
            Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Laplace { mu, scale } => {
                let z = (x - mu) / scale;
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            Logistic { mu, scale } => 1.0 / (1.0 + (-(x - mu) / scale).exp()),
            SplitNormal { left, right } => {
                if x < 0.0 {
                    phi_cdf(x / left)
                } else {
                    phi_cdf(x / right)
                }
            }
            UnitCube { .. } | StdNormalCloud { .. } => f64::NAN,
        }
    }

    /// `G^{-1}(q)` for `q` in `(0, 1)`.
    pub fn quantile(&self, q: f64) -> f64 {
        use DistributionSpec::*;
        match *self {
            Normal { mu, sigma } => mu + sigma * phi_inv(q),
            Uniform { a, b } => a + (b - a) * q,
            Exponential { rate } => -(-q).ln_1p() / rate,
            Laplace { mu, scale } => {
                if q < 0.5 {
                    mu + scale * (2.0 * q).ln()
                } else {
                    mu - scale * (2.0 * (1.0 - q)).ln()
                }
            }
            Logistic { mu, scale } => mu + scale * (q / (1.0 - q)).ln(),
            SplitNormal { left, right } => {
                let z = phi_inv(q);
                if q < 0.5 {
                    left * z
                } else {
                    right * z
                }
            }
            UnitCube { .. } | StdNormalCloud { .. } => f64::NAN,
        }
    }

    /// Closed form of `∫ g(x)^2 dx` for the symmetric scalar families.
    pub fn density_square_integral(&self) -> Option<f64> {
        match *self {
            DistributionSpec::Normal { sigma, .. } => Some(1.0 / (2.0 * sigma * std::f64::consts::PI.sqrt())),
            DistributionSpec::Uniform { a, b } => Some(1.0 / (b - a)),
            DistributionSpec::Laplace { scale, .. } => Some(1.0 / (4.0 * scale)),
            DistributionSpec::Logistic { scale, .. } => Some(1.0 / (6.0 * scale)),
            _ => None,
        }
    }

    /// Finite variance of the scalar families.
    pub fn variance(&self) -> Option<f64> {
        use DistributionSpec::*;
        match *self {
            Normal { sigma, .. } => Some(sigma * sigma),
            Uniform { a, b } => Some((b - a) * (b - a) / 12.0),
            Exponential { rate } => Some(1.0 / (rate * rate)),
            Laplace { scale, .. } => Some(2.0 * scale * scale),
            Logistic { scale, .. } => Some(std::f64::consts::PI.powi(2) * scale * scale / 3.0),
            SplitNormal { left, right } => {
                let m = (right - left) * (2.0 / std::f64::consts::PI).sqrt() / 2.0;
                Some((left * left + right * right) / 2.0 - m * m)
            }
            UnitCube { .. } | StdNormalCloud { .. } => None,
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DistributionSpec::*;
        match *self {
            Normal { mu, sigma } => write!(f, "normal({mu},{sigma})"),
            Uniform { a, b } => write!(f, "uniform({a},{b})"),
            Exponential { rate } => write!(f, "exponential({rate})"),
            Laplace { mu, scale } => write!(f, "laplace({mu},{scale})"),
            Logistic { mu, scale } => write!(f, "logistic({mu},{scale})"),
            SplitNormal { left, right } => write!(f, "splitnormal({left},{right})"),
            UnitCube { dim } => write!(f, "cube({dim})"),
            StdNormalCloud { dim } => write!(f, "mvnormal({dim})"),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Accepts `name` or `name(arg, ...)`, e.g. `normal`, `normal(0,2)`,
    /// `uniform(0,1)`, `splitnormal(1,2)`, `cube(2)`, `square`, `mvnormal(3)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidArgument(format!("unknown distribution `{s}`"));
        let (name, args) = match s.find('(') {
            Some(open) => {
                let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
                let args = inner
                    .split(',')
                    .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
                    .collect::<Result<Vec<f64>>>()?;
                (&s[..open], args)
            }
            None => (s, Vec::new()),
        };
        let arg = |i: usize, default: f64| args.get(i).copied().unwrap_or(default);
        let arity = |max: usize| if args.len() > max { Err(bad()) } else { Ok(()) };
        let as_dim = |v: f64| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(bad())
            }
        };
        let spec = match name.trim() {
            "normal" => {
                arity(2)?;
                DistributionSpec::Normal { mu: arg(0, 0.0), sigma: arg(1, 1.0) }
            }
            "uniform" => {
                arity(2)?;
                DistributionSpec::Uniform { a: arg(0, 0.0), b: arg(1, 1.0) }
            }
            "exponential" => {
                arity(1)?;
                DistributionSpec::Exponential { rate: arg(0, 1.0) }
            }
            "laplace" => {
                arity(2)?;
                DistributionSpec::Laplace { mu: arg(0, 0.0), scale: arg(1, 1.0) }
            }
            "logistic" => {
                arity(2)?;
                DistributionSpec::Logistic { mu: arg(0, 0.0), scale: arg(1, 1.0) }
            }
            "splitnormal" => {
                arity(2)?;
                DistributionSpec::SplitNormal { left: arg(0, 1.0), right: arg(1, 2.0) }
            }
            "square" => {
                arity(0)?;
                DistributionSpec::UnitCube { dim: 2 }
            }
            "cube" => {
                arity(1)?;
                DistributionSpec::UnitCube { dim: as_dim(arg(0, 3.0))? }
            }
            "mvnormal" => {
                arity(1)?;
                DistributionSpec::StdNormalCloud { dim: as_dim(arg(0, 2.0))? }
            }
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_real_line;
    use rand::SeedableRng;

    fn scalar_families() -> Vec<DistributionSpec> {
        ["normal(1,2)", "uniform(-1,3)", "exponential(2)", "laplace(0.5,1.5)", "logistic(-1,0.7)", "splitnormal(1,2)"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect()
    }

    #[test]
    fn parse_round_trip() {
        for d in scalar_families() {
            assert_eq!(d.to_string().parse::<DistributionSpec>().unwrap(), d);
        }
        assert_eq!("square".parse::<DistributionSpec>().unwrap(), DistributionSpec::UnitCube { dim: 2 });
        assert_eq!("normal".parse::<DistributionSpec>().unwrap(), DistributionSpec::standard_normal());
        for bad in ["cauchy", "normal(0,-1)", "normal(0,1,2)", "cube(0)", "cube(1.5)", "uniform(1,0)", "normal(a)"] {
            assert!(bad.parse::<DistributionSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for d in scalar_families() {
            for q in [0.01, 0.1, 0.3, 0.5, 0.77, 0.99] {
                let x = d.quantile(q);
                assert!((d.cdf(x) - q).abs() < 1e-9, "{d} q={q}");
            }
        }
    }

    #[test]
    fn pdf_integrates_to_one_and_matches_square_integral() {
        for d in scalar_families() {
            let total = integrate_real_line(&|x| d.pdf(x), 1e-10);
            // uniform and exponential have jumps: Simpson converges slowly there
            assert!((total - 1.0).abs() < 1e-5, "{d}: {total}");
            if let Some(sq) = d.density_square_integral() {
                let num = integrate_real_line(&|x| d.pdf(x) * d.pdf(x), 1e-10);
                assert!((num - sq).abs() < 1e-5 * sq.max(1.0), "{d}");
            }
        }
    }

    #[test]
    fn split_normal_one_sided() {
        let d: DistributionSpec = "splitnormal(1,2)".parse().unwrap();
        let (l, r) = d.one_sided_density(0.0);
        assert!((l - 2.0 * r).abs() < 1e-15);
        assert_eq!(d.cdf(0.0), 0.5);
        assert_eq!(d.quantile(0.5), 0.0);
    }

    #[test]
    fn sample_moments() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for d in scalar_families() {
            let s = d.sample(&mut rng, 200_000);
            let mean = crate::stats::mean(s.coords());
            let var = crate::stats::variance(s.coords());
            let true_mean = crate::quadrature::integrate_real_line(&|x| x * d.pdf(x), 1e-10);
            assert!((mean - true_mean).abs() < 0.02 * d.variance().unwrap().sqrt() + 1e-3, "{d}");
            assert!((var / d.variance().unwrap() - 1.0).abs() < 0.03, "{d}");
        }
        let cloud = DistributionSpec::UnitCube { dim: 3 }.sample(&mut rng, 10);
        assert_eq!((cloud.len(), cloud.dim()), (10, 3));
    }
}
