//! Radial profile functions: the metric profile `xi`, the comparison
//! profile `iota` and the warping function `rho`.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A smooth function of the radial distance `r >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSpec {
    /// `f(r) = r`.
    Euclidean,
    /// `f(r) = sinh(kappa r) / kappa`.
    Hyperbolic { kappa: f64 },
    /// `f(r) = cosh(kappa r)`, the warping of hyperbolic space over a totally geodesic slice.
    Cosh { kappa: f64 },
    /// `f(r) = value`.
    Constant { value: f64 },
    /// Monotone cubic interpolation of sampled data.
    Table(TableProfile),
}

impl ProfileSpec {
    pub fn hyperbolic(kappa: f64) -> Self {
        ProfileSpec::Hyperbolic { kappa }
    }

    pub fn cosh(kappa: f64) -> Self {
        ProfileSpec::Cosh { kappa }
    }

    pub fn constant(value: f64) -> Self {
        ProfileSpec::Constant { value }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            ProfileSpec::Euclidean => r,
            ProfileSpec::Hyperbolic { kappa } => (kappa * r).sinh() / kappa,
            ProfileSpec::Cosh { kappa } => (kappa * r).cosh(),
            ProfileSpec::Constant { value } => *value,
            ProfileSpec::Table(t) => t.eval(r).0,
        }
    }

    pub fn d1(&self, r: f64) -> f64 {
        match self {
            ProfileSpec::Euclidean => 1.0,
            ProfileSpec::Hyperbolic { kappa } => (kappa * r).cosh(),
            ProfileSpec::Cosh { kappa } => kappa * (kappa * r).sinh(),
            ProfileSpec::Constant { .. } => 0.0,
            ProfileSpec::Table(t) => t.eval(r).1,
        }
    }

    pub fn d2(&self, r: f64) -> f64 {
        match self {
            ProfileSpec::Euclidean => 0.0,
            ProfileSpec::Hyperbolic { kappa } => kappa * (kappa * r).sinh(),
            ProfileSpec::Cosh { kappa } => kappa * kappa * (kappa * r).cosh(),
            ProfileSpec::Constant { .. } => 0.0,
            ProfileSpec::Table(t) => t.eval(r).2,
        }
    }

    /// `f'/f`. Closed forms for the built-ins stay finite where `f` itself overflows.
    pub fn log_d1(&self, r: f64) -> f64 {
        match self {
            ProfileSpec::Euclidean => 1.0 / r,
            ProfileSpec::Hyperbolic { kappa } => kappa / (kappa * r).tanh(),
            ProfileSpec::Cosh { kappa } => kappa * (kappa * r).tanh(),
            ProfileSpec::Constant { .. } => 0.0,
            ProfileSpec::Table(t) => {
                let (v, d, _) = t.eval(r);
                d / v
            }
        }
    }

    /// `f''/f`.
    pub fn d2_ratio(&self, r: f64) -> f64 {
        match self {
            ProfileSpec::Euclidean | ProfileSpec::Constant { .. } => 0.0,
            ProfileSpec::Hyperbolic { kappa } | ProfileSpec::Cosh { kappa } => kappa * kappa,
            ProfileSpec::Table(t) => {
                let (v, _, dd) = t.eval(r);
                dd / v
            }
        }
    }

    /// `(1 - f'^2) / f^2`, the sectional curvature of the spheres `{r = const}`
    /// beyond the flat part. Zero for the euclidean profile.
    pub fn sphere_term(&self, r: f64) -> f64 {
        match self {
            ProfileSpec::Euclidean => 0.0,
            ProfileSpec::Hyperbolic { kappa } => -kappa * kappa,
            ProfileSpec::Constant { value } => 1.0 / (value * value),
            _ => {
                let v = self.value(r);
                let d = self.d1(r);
                (1.0 - d * d) / (v * v)
            }
        }
    }

    /// Upper end of the range where the profile is backed by data.
    pub fn domain_end(&self) -> f64 {
        match self {
            ProfileSpec::Table(t) => t.last_r(),
            _ => f64::INFINITY,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProfileSpec::Euclidean => "euclidean".into(),
            ProfileSpec::Hyperbolic { kappa } => format!("hyperbolic(kappa={kappa})"),
            ProfileSpec::Cosh { kappa } => format!("cosh(kappa={kappa})"),
            ProfileSpec::Constant { value } => format!("constant({value})"),
            ProfileSpec::Table(t) => format!("table({} samples)", t.len()),
        }
    }
}

/// Samples `(r, value)` with Fritsch-Carlson monotone cubic slopes.
///
/// Beyond the last sample the profile continues linearly with the end slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableSamples", into = "TableSamples")]
pub struct TableProfile {
    r: Vec<f64>,
    v: Vec<f64>,
    m: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TableSamples {
    samples: Vec<(f64, f64)>,
}

impl TryFrom<TableSamples> for TableProfile {
    type Error = Error;

    fn try_from(s: TableSamples) -> Result<Self> {
        TableProfile::new(s.samples)
    }
}

impl From<TableProfile> for TableSamples {
    fn from(t: TableProfile) -> Self {
        TableSamples {
            samples: t.r.iter().copied().zip(t.v.iter().copied()).collect(),
        }
    }
}

impl TableProfile {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::TableFormat(format!("need at least 3 samples, got {}", samples.len())));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::TableFormat(format!(
                    "r column not strictly increasing at row {} (r = {} then {})",
                    i + 1,
                    w[0].0,
                    w[1].0
                )));
            }
        }
        if samples.iter().any(|(r, v)| !r.is_finite() || !v.is_finite()) {
            return Err(Error::TableFormat("non-finite sample".into()));
        }
        let (r, v): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
        let m = pchip_slopes(&r, &v);
        Ok(TableProfile { r, v, m })
    }

    /// Reads a CSV with header `r,value`; lines starting with `#` are ignored.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "r" || &headers[1] != "value" {
            return Err(Error::TableFormat(format!(
                "expected header `r,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut samples = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::TableFormat(format!("row {}: cannot parse `{s}`", line + 1)))
            };
            samples.push((parse(&rec[0])?, parse(&rec[1])?));
        }
        Self::new(samples)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn first(&self) -> (f64, f64) {
        (self.r[0], self.v[0])
    }

    pub fn last_r(&self) -> f64 {
        *self.r.last().unwrap()
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let n = self.r.len();
        if x >= self.r[n - 1] {
            let d = x - self.r[n - 1];
            return (self.v[n - 1] + self.m[n - 1] * d, self.m[n - 1], 0.0);
        }
        if x <= self.r[0] {
            let d = x - self.r[0];
            return (self.v[0] + self.m[0] * d, self.m[0], 0.0);
        }
        let k = self.r.partition_point(|&ri| ri <= x) - 1;
        let h = self.r[k + 1] - self.r[k];
        let t = (x - self.r[k]) / h;
        let (y0, y1, m0, m1) = (self.v[k], self.v[k + 1], self.m[k], self.m[k + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * h * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * m1;
        let d1 = (6.0 * t2 - 6.0 * t) * (y0 - y1) / h + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (3.0 * t2 - 2.0 * t) * m1;
        let d2 = (12.0 * t - 6.0) * (y0 - y1) / (h * h) + ((6.0 * t - 4.0) * m0 + (6.0 * t - 2.0) * m1) / h;
        (value, d1, d2)
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] <= 0.0 {
            m[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosh_table(step: f64, end: f64) -> TableProfile {
        let n = (end / step).round() as usize;
        TableProfile::new((0..=n).map(|i| (i as f64 * step, (i as f64 * step).cosh())).collect()).unwrap()
    }

    #[test]
    fn builtins_match_closed_forms() {
        let h = ProfileSpec::hyperbolic(2.0);
        assert!((h.value(0.5) - 1f64.sinh() / 2.0).abs() < 1e-15);
        assert!((h.log_d1(0.5) - 2.0 / 1f64.tanh()).abs() < 1e-14);
        assert_eq!(ProfileSpec::Euclidean.value(3.0), 3.0);
        assert_eq!(ProfileSpec::constant(1.0).log_d1(3.0), 0.0);
    }

    #[test]
    fn log_derivative_survives_overflow() {
        let h = ProfileSpec::hyperbolic(1.0);
        assert!(h.value(1000.0).is_infinite());
        assert!((h.log_d1(1000.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn table_reproduces_cosh() {
        let t = cosh_table(0.01, 3.0);
        for &x in &[0.013, 0.5, 1.337, 2.9] {
            let (v, d, dd) = t.eval(x);
            assert!((v - x.cosh()).abs() < 1e-5, "value at {x}");
            assert!((d - x.sinh()).abs() < 1e-3, "slope at {x}");
            if x > 0.1 {
                assert!((dd - x.cosh()).abs() < 0.1, "curvature at {x}");
            }
        }
    }

    #[test]
    fn table_hits_samples_exactly() {
        let t = cosh_table(0.1, 2.0);
        assert_eq!(t.eval(1.0).0, 1f64.cosh());
    }

    #[test]
    fn table_preserves_monotonicity() {
        let t = TableProfile::new(vec![(0.0, 0.0), (1.0, 0.0), (1.1, 5.0), (3.0, 5.1)]).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=300 {
            let v = t.eval(i as f64 * 0.01).0;
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn non_monotone_r_is_rejected() {
        let err = TableProfile::new(vec![(0.0, 0.0), (1.0, 1.0), (0.5, 2.0)]).unwrap_err();
        assert!(matches!(err, Error::TableFormat(_)));
    }

    #[test]
    fn csv_with_comments() {
        let src = "# warping\nr,value\n0,1\n# mid\n0.5,1.1276259652063807\n1,1.5430806348152437\n";
        let t = TableProfile::from_csv_reader(src.as_bytes()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.first(), (0.0, 1.0));
    }

    #[test]
    fn csv_bad_header() {
        let err = TableProfile::from_csv_reader("x,y\n0,1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("r,value"));
    }

    #[test]
    fn serde_round_trip() {
        let spec = ProfileSpec::Table(cosh_table(0.5, 2.0));
        let s = serde_json::to_string(&spec).unwrap();
        let back: ProfileSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
    }
}
