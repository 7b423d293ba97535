//! Edge-weight distributions.
//!
//! A [`WeightDistribution`] is a named, parameterized law for the positive
//! edge passage times. Each kind exposes its tail function `H(x) = P(X > x)`
//! in closed form, its essential supremum, and a fixed inverse-transform
//! sampling map so that a given uniform stream yields identical variates on
//! every platform.
//!
//! For unbounded kinds the module also provides the threshold functions
//! `f(n)` (solving `H(f(n)) = ln n / n`) and `g(n)` (a canonical choice with
//! `n^2 H(g(n)) -> 0`), which bracket `W_n/n` for large `n`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::rng::unit_open;

/// A real number extended with a positive-infinity marker.
///
/// Used for the essential supremum, which is finite exactly for the
/// bounded-support kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    /// The value as an `f64`, mapping the marker to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::Infinite => f64::INFINITY,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let cmp = match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a.total_cmp(b),
            (ExtendedReal::Finite(_), ExtendedReal::Infinite) => Ordering::Less,
            (ExtendedReal::Infinite, ExtendedReal::Finite(_)) => Ordering::Greater,
            (ExtendedReal::Infinite, ExtendedReal::Infinite) => Ordering::Equal,
        };
        Some(cmp)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => write!(f, "inf"),
        }
    }
}

/// A law for the edge passage times.
///
/// Values are strictly positive for every kind. `TwoPoint` is the canonical
/// bounded law with an atom at the supremum, `Uniform` the canonical
/// atomless bounded law; `Exponential` and `Pareto` cover light and heavy
/// unbounded tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightDistribution {
    /// Value `b` with probability `p0`, value `a` otherwise; `0 < a < b`.
    TwoPoint { a: f64, b: f64, p0: f64 },
    /// Uniform on `[lo, hi]` with `0 <= lo < hi`.
    Uniform { lo: f64, hi: f64 },
    /// Rate `lambda > 0`; `H(x) = exp(-lambda x)` for `x >= 0`.
    Exponential { lambda: f64 },
    /// Shape `alpha > 0` and scale `s > 0`; `H(x) = (x/s)^-alpha` for `x >= s`.
    Pareto { alpha: f64, scale: f64 },
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.to_string()))
    }
}

impl WeightDistribution {
    pub fn two_point(a: f64, b: f64, p0: f64) -> Result<Self> {
        require(a.is_finite() && b.is_finite() && p0.is_finite(), "twopoint: non-finite parameter")?;
        require(0.0 < a && a < b, "twopoint: requires 0 < a < b")?;
        require(0.0 < p0 && p0 < 1.0, "twopoint: requires 0 < p0 < 1")?;
        Ok(WeightDistribution::TwoPoint { a, b, p0 })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        require(lo.is_finite() && hi.is_finite(), "uniform: non-finite parameter")?;
        require(0.0 <= lo && lo < hi, "uniform: requires 0 <= lo < hi")?;
        Ok(WeightDistribution::Uniform { lo, hi })
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        require(lambda.is_finite() && lambda > 0.0, "exp: requires lambda > 0")?;
        Ok(WeightDistribution::Exponential { lambda })
    }

    pub fn pareto(alpha: f64, scale: f64) -> Result<Self> {
        require(alpha.is_finite() && alpha > 0.0, "pareto: requires alpha > 0")?;
        require(scale.is_finite() && scale > 0.0, "pareto: requires scale > 0")?;
        Ok(WeightDistribution::Pareto { alpha, scale })
    }

    /// Tail probability `H(x) = P(X > x)`, exact per kind.
    pub fn tail(&self, x: f64) -> f64 {
        match *self {
            WeightDistribution::TwoPoint { a, b, p0 } => {
                if x < a {
                    1.0
                } else if x < b {
                    p0
                } else {
                    0.0
                }
            }
            WeightDistribution::Uniform { lo, hi } => {
                if x < lo {
                    1.0
                } else if x < hi {
                    (hi - x) / (hi - lo)
                } else {
                    0.0
                }
            }
            WeightDistribution::Exponential { lambda } => {
                if x < 0.0 {
                    1.0
                } else {
                    (-lambda * x).exp()
                }
            }
            WeightDistribution::Pareto { alpha, scale } => {
                if x < scale {
                    1.0
                } else {
                    (x / scale).powf(-alpha)
                }
            }
        }
    }

    /// `inf { x : P(X > x) = 0 }`, the top of the support.
    pub fn essential_supremum(&self) -> ExtendedReal {
        match *self {
            WeightDistribution::TwoPoint { b, .. } => ExtendedReal::Finite(b),
            WeightDistribution::Uniform { hi, .. } => ExtendedReal::Finite(hi),
            WeightDistribution::Exponential { .. } | WeightDistribution::Pareto { .. } => {
                ExtendedReal::Infinite
            }
        }
    }

    /// Whether the support is bounded (the essential supremum is finite).
    pub fn is_bounded(&self) -> bool {
        self.essential_supremum().is_finite()
    }

    /// Whether the tail is left-continuous and vanishing at the essential
    /// supremum (no atom at the top of the support). Among the bounded
    /// kinds this holds for `Uniform` and fails for `TwoPoint`.
    pub fn is_atomless_at_sup(&self) -> bool {
        matches!(self, WeightDistribution::Uniform { .. })
    }

    /// The inverse-transform kernel: maps one uniform draw `u` in (0, 1) to
    /// a variate. This map is the sampling contract; [`Self::sample`] is
    /// exactly `sample_from_unit(unit_open(rng))`.
    pub fn sample_from_unit(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0);
        match *self {
            WeightDistribution::TwoPoint { a, b, p0 } => {
                if u < p0 {
                    b
                } else {
                    a
                }
            }
            WeightDistribution::Uniform { lo, hi } => lo + u * (hi - lo),
            WeightDistribution::Exponential { lambda } => -u.ln() / lambda,
            WeightDistribution::Pareto { alpha, scale } => scale * u.powf(-1.0 / alpha),
        }
    }

    /// Draws one variate, consuming exactly one `u64` from the stream.
    pub fn sample(&self, rng: &mut impl RngCore) -> f64 {
        self.sample_from_unit(unit_open(rng))
    }

    /// The unique `x` with `H(x) = ln n / n`, in closed form.
    ///
    /// Defined only for unbounded kinds and `n >= 3` (so that `ln n / n < 1`).
    pub fn f_of_n(&self, n: usize) -> Result<f64> {
        if n < 3 {
            return Err(Error::Precondition(format!("f(n) requires n >= 3, got {n}")));
        }
        let n_f = n as f64;
        let target = n_f.ln() / n_f;
        match *self {
            WeightDistribution::Exponential { lambda } => Ok(-target.ln() / lambda),
            WeightDistribution::Pareto { alpha, scale } => Ok(scale * target.powf(-1.0 / alpha)),
            _ => Err(Error::Precondition("f(n) undefined: mu < inf".to_string())),
        }
    }

    /// The canonical upper threshold with `n^2 H(g(n)) -> 0`.
    ///
    /// Exponential: `(2 ln n + ln ln n) / lambda`, giving `n^2 H(g) = 1/ln n`.
    /// Pareto: `s n^{2/alpha} (ln ln n)^{1/alpha}`, giving `n^2 H(g) = 1/ln ln n`.
    /// Requires `n >= 16` so that `ln ln n > 1`.
    pub fn g_of_n(&self, n: usize) -> Result<f64> {
        if n < 16 {
            return Err(Error::Precondition(format!("g(n) requires n >= 16, got {n}")));
        }
        let ln_n = (n as f64).ln();
        match *self {
            WeightDistribution::Exponential { lambda } => {
                Ok((2.0 * ln_n + ln_n.ln()) / lambda)
            }
            WeightDistribution::Pareto { alpha, scale } => {
                Ok(scale * (n as f64).powf(2.0 / alpha) * ln_n.ln().powf(1.0 / alpha))
            }
            _ => Err(Error::Precondition("g(n) undefined: mu < inf".to_string())),
        }
    }
}

impl fmt::Display for WeightDistribution {
    /// Canonical spec-string form, parseable by [`FromStr`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            WeightDistribution::TwoPoint { a, b, p0 } => {
                write!(f, "twopoint:a={a},b={b},p0={p0}")
            }
            WeightDistribution::Uniform { lo, hi } => write!(f, "uniform:lo={lo},hi={hi}"),
            WeightDistribution::Exponential { lambda } => write!(f, "exp:lambda={lambda}"),
            WeightDistribution::Pareto { alpha, scale } => {
                write!(f, "pareto:alpha={alpha},scale={scale}")
            }
        }
    }
}

/// Parses key=value parameter lists like `a=1,b=2,p0=0.05`.
///
/// `keys` lists the accepted keys in canonical order; returns the parsed
/// values in that order, `None` where a key was absent. Unknown and
/// duplicated keys are errors.
fn parse_params(spec: &str, body: &str, keys: &[&str]) -> Result<Vec<Option<f64>>> {
    let mut out = vec![None; keys.len()];
    if body.trim().is_empty() {
        return Ok(out);
    }
    for item in body.split(',') {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("{spec}: expected key=value, got {item:?}")))?;
        let key = key.trim();
        let idx = keys
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| Error::Parse(format!("{spec}: unknown key {key:?}")))?;
        if out[idx].is_some() {
            return Err(Error::Parse(format!("{spec}: duplicate key {key:?}")));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{spec}: bad number for {key:?}")))?;
        out[idx] = Some(value);
    }
    Ok(out)
}

fn required(spec: &str, key: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::Parse(format!("{spec}: missing key {key:?}")))
}

impl FromStr for WeightDistribution {
    type Err = Error;

    /// Parses a distribution spec string, case-insensitively:
    /// `twopoint:a=1,b=2,p0=0.05`, `uniform:lo=0,hi=1`, `exp:lambda=1`,
    /// `pareto:alpha=2,scale=1` (scale defaults to 1).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (kind, body) = match lower.split_once(':') {
            Some((k, b)) => (k.trim(), b),
            None => (lower.as_str(), ""),
        };
        match kind {
            "twopoint" => {
                let v = parse_params(&lower, body, &["a", "b", "p0"])?;
                WeightDistribution::two_point(
                    required(&lower, "a", v[0])?,
                    required(&lower, "b", v[1])?,
                    required(&lower, "p0", v[2])?,
                )
            }
            "uniform" => {
                let v = parse_params(&lower, body, &["lo", "hi"])?;
                WeightDistribution::uniform(
                    required(&lower, "lo", v[0])?,
                    required(&lower, "hi", v[1])?,
                )
            }
            "exp" | "exponential" => {
                let v = parse_params(&lower, body, &["lambda"])?;
                WeightDistribution::exponential(required(&lower, "lambda", v[0])?)
            }
            "pareto" => {
                let v = parse_params(&lower, body, &["alpha", "scale"])?;
                WeightDistribution::pareto(required(&lower, "alpha", v[0])?, v[1].unwrap_or(1.0))
            }
            other => Err(Error::Parse(format!("unknown distribution kind {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;

    fn exp1() -> WeightDistribution {
        WeightDistribution::exponential(1.0).unwrap()
    }

    fn pareto(alpha: f64) -> WeightDistribution {
        WeightDistribution::pareto(alpha, 1.0).unwrap()
    }

    fn two_point() -> WeightDistribution {
        WeightDistribution::two_point(1.0, 2.0, 0.3).unwrap()
    }

    #[test]
    fn tail_closed_forms() {
        assert_eq!(exp1().tail(0.0), 1.0);
        assert!((pareto(2.0).tail(10.0) - 0.01).abs() < 1e-15);
        assert_eq!(two_point().tail(1.5), 0.3);
        // below the support minimum the tail is 1
        assert_eq!(two_point().tail(0.5), 1.0);
        assert_eq!(pareto(2.0).tail(0.99), 1.0);
        let u = WeightDistribution::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.tail(-1.0), 1.0);
        assert!((u.tail(0.25) - 0.75).abs() < 1e-15);
        assert_eq!(u.tail(1.0), 0.0);
    }

    #[test]
    fn essential_supremum_per_kind() {
        let u = WeightDistribution::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.essential_supremum(), ExtendedReal::Finite(1.0));
        assert_eq!(exp1().essential_supremum(), ExtendedReal::Infinite);
        assert_eq!(
            WeightDistribution::two_point(1.0, 2.0, 0.3).unwrap().essential_supremum(),
            ExtendedReal::Finite(2.0)
        );
        assert!(ExtendedReal::Infinite > ExtendedReal::Finite(1e300));
        // tail at the supremum is 0 for bounded kinds, positive for unbounded
        assert_eq!(u.tail(1.0), 0.0);
        assert_eq!(two_point().tail(2.0), 0.0);
        // positive at any finite x within f64 exponent range
        assert!(exp1().tail(500.0) > 0.0);
        assert!(pareto(0.5).tail(1e12) > 0.0);
    }

    #[test]
    fn inverse_transform_kernels() {
        let tp = WeightDistribution::two_point(1.0, 2.0, 0.4).unwrap();
        assert_eq!(tp.sample_from_unit(0.39), 2.0);
        assert_eq!(tp.sample_from_unit(0.41), 1.0);
        let e = WeightDistribution::exponential(2.0).unwrap();
        assert!((e.sample_from_unit(0.5) - (-(0.5f64).ln() / 2.0)).abs() < 1e-15);
        let p = WeightDistribution::pareto(2.0, 1.0).unwrap();
        assert!((p.sample_from_unit(0.25) - 0.25f64.powf(-0.5)).abs() < 1e-15);
        let u = WeightDistribution::uniform(1.0, 3.0).unwrap();
        assert!((u.sample_from_unit(0.5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn samples_are_strictly_positive() {
        let dists = [
            WeightDistribution::two_point(1.0, 2.0, 0.05).unwrap(),
            WeightDistribution::uniform(0.0, 1.0).unwrap(),
            exp1(),
            pareto(0.5),
        ];
        for (i, d) in dists.iter().enumerate() {
            let mut rng = replicate_rng(11, i as u64);
            for _ in 0..10_000 {
                assert!(d.sample(&mut rng) > 0.0);
            }
        }
    }

    #[test]
    fn empirical_tail_matches_closed_form() {
        // 10^4 variates; empirical tail within 4 standard errors at fixed x.
        let cases = [
            (WeightDistribution::two_point(1.0, 2.0, 0.3).unwrap(), 1.5),
            (WeightDistribution::uniform(0.0, 1.0).unwrap(), 0.7),
            (exp1(), 1.0),
            (pareto(2.0), 2.0),
        ];
        for (k, (d, x)) in cases.iter().enumerate() {
            let mut rng = replicate_rng(5, k as u64);
            let m = 10_000;
            let hits = (0..m).filter(|_| d.sample(&mut rng) > *x).count();
            let emp = hits as f64 / m as f64;
            let t = d.tail(*x);
            let se = (t * (1.0 - t) / m as f64).sqrt();
            assert!(
                (emp - t).abs() <= 4.0 * se,
                "{d}: empirical {emp} vs tail {t} (se {se})"
            );
        }
    }

    #[test]
    fn f_of_n_closed_forms_and_plugback() {
        let e = WeightDistribution::exponential(0.5).unwrap();
        let n = 1000usize;
        let expect = ((n as f64).ln() - (n as f64).ln().ln()) / 0.5;
        assert!((e.f_of_n(n).unwrap() - expect).abs() < 1e-12);

        let p = pareto(2.0);
        let expect_p = (n as f64 / (n as f64).ln()).powf(0.5);
        assert!((p.f_of_n(n).unwrap() - expect_p).abs() < 1e-12);

        // plugging f back into the tail recovers ln n / n
        for d in [exp1(), pareto(0.7), pareto(3.0)] {
            for n in [10usize, 100, 10_000, 1_000_000] {
                let f = d.f_of_n(n).unwrap();
                let target = (n as f64).ln() / n as f64;
                assert!(
                    (d.tail(f) - target).abs() <= 1e-10,
                    "{d}, n={n}: tail(f)={} target={target}",
                    d.tail(f)
                );
            }
        }

        // n = round(e^e) = 15, the smallest interesting grid point
        let f = exp1().f_of_n(15).unwrap();
        assert!((exp1().tail(f) - 15f64.ln() / 15.0).abs() <= 1e-12);
    }

    #[test]
    fn f_of_n_rejects_bounded_and_small_n() {
        let u = WeightDistribution::uniform(0.0, 1.0).unwrap();
        assert!(matches!(u.f_of_n(100), Err(Error::Precondition(_))));
        assert!(exp1().f_of_n(2).is_err());
    }

    #[test]
    fn g_of_n_values_and_decay() {
        let lambda = 0.5;
        let e = WeightDistribution::exponential(lambda).unwrap();
        let n = 100usize;
        let ln_n = (n as f64).ln();
        assert!((e.g_of_n(n).unwrap() - (2.0 * ln_n + ln_n.ln()) / lambda).abs() < 1e-12);

        let p = pareto(2.0);
        assert!((p.g_of_n(n).unwrap() - (n as f64) * ln_n.ln().powf(0.5)).abs() < 1e-9);

        // n^2 H(g(n)) equals 1/ln n (exp) resp. 1/ln ln n (pareto), so it
        // falls strictly along the grid
        for d in [exp1(), pareto(1.5)] {
            let mut prev = f64::INFINITY;
            for n in [16usize, 100, 10_000, 1_000_000] {
                let g = d.g_of_n(n).unwrap();
                let v = (n as f64) * (n as f64) * d.tail(g);
                assert!(v < prev, "{d}: n={n} gives {v} >= {prev}");
                prev = v;
            }
        }

        let g = exp1().g_of_n(1_000_000).unwrap();
        let v = 1e12 * exp1().tail(g);
        assert!((v - 1.0 / (1e6f64).ln()).abs() < 1e-12);

        assert!(exp1().g_of_n(15).is_err());
        assert!(WeightDistribution::uniform(0.0, 1.0).unwrap().g_of_n(100).is_err());
    }

    #[test]
    fn spec_string_round_trip() {
        let specs = [
            "twopoint:a=1,b=2,p0=0.05",
            "uniform:lo=0,hi=1",
            "exp:lambda=1",
            "pareto:alpha=2,scale=1",
        ];
        for s in specs {
            let d: WeightDistribution = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
            let again: WeightDistribution = d.to_string().parse().unwrap();
            assert_eq!(d, again);
        }
        // case-insensitive, defaulted scale, alias
        let d: WeightDistribution = "Pareto:ALPHA=2".parse().unwrap();
        assert_eq!(d, WeightDistribution::pareto(2.0, 1.0).unwrap());
        let d: WeightDistribution = "Exponential:lambda=2".parse().unwrap();
        assert_eq!(d, WeightDistribution::exponential(2.0).unwrap());
    }

    #[test]
    fn spec_string_errors() {
        assert!("gauss:mu=0".parse::<WeightDistribution>().is_err());
        assert!("exp:rate=1".parse::<WeightDistribution>().is_err()); // unknown key
        assert!("exp:lambda=1,lambda=2".parse::<WeightDistribution>().is_err());
        assert!("uniform:lo=0".parse::<WeightDistribution>().is_err()); // missing hi
        assert!("uniform:lo=1,hi=0".parse::<WeightDistribution>().is_err());
        assert!("twopoint:a=2,b=1,p0=0.5".parse::<WeightDistribution>().is_err());
        assert!("twopoint:a=1,b=2,p0=0".parse::<WeightDistribution>().is_err());
        assert!("exp:lambda=x".parse::<WeightDistribution>().is_err());
    }
}
