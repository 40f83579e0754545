//! Domain types shared by every model: monthly dates, the bivariate
//! excess-return series, 2x2 conditional covariances and parameter blocks.
//!
//! All types are immutable once built. Constructors validate; there is no
//! way to obtain a [`Cov2`] that is not positive semidefinite.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of observations in an [`ExcessReturnSeries`].
pub const MIN_SERIES_LEN: usize = 10;

/// A pair of values, one per asset (market first, hedge second) or one per state.
pub type Vec2 = [f64; 2];

/// Calendar month, `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u8,
}

impl YearMonth {
    pub fn new(year: i32, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidConfig(format!("month {month} out of range")));
        }
        Ok(Self { year, month })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u8 {
        self.month
    }

    pub fn succ(&self) -> Self {
        if self.month == 12 {
            Self { year: self.year + 1, month: 1 }
        } else {
            Self { year: self.year, month: self.month + 1 }
        }
    }

    /// `n` consecutive months starting at `self`.
    pub fn range(&self, n: usize) -> Vec<YearMonth> {
        std::iter::successors(Some(*self), |m| Some(m.succ())).take(n).collect()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("`{s}` is not a YYYY-MM month"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year = y.parse::<i32>().map_err(|_| bad())?;
        let month = m.parse::<u8>().map_err(|_| bad())?;
        YearMonth::new(year, month).map_err(|_| bad())
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Unvalidated input to [`validate_series`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawSeries {
    pub dates: Vec<YearMonth>,
    pub rm: Vec<f64>,
    pub rb: Vec<f64>,
}

/// Aligned monthly excess returns of the market (`rm`) and the hedge asset
/// (`rb`), stored as decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeries", into = "RawSeries")]
pub struct ExcessReturnSeries {
    dates: Vec<YearMonth>,
    rm: Vec<f64>,
    rb: Vec<f64>,
}

impl ExcessReturnSeries {
    pub fn new(dates: Vec<YearMonth>, rm: Vec<f64>, rb: Vec<f64>) -> Result<Self> {
        validate_series(RawSeries { dates, rm, rb })
    }

    /// Series with consecutive synthetic months starting at `start`.
    pub fn from_returns(start: YearMonth, rm: Vec<f64>, rb: Vec<f64>) -> Result<Self> {
        let dates = start.range(rm.len());
        Self::new(dates, rm, rb)
    }

    pub fn len(&self) -> usize {
        self.rm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rm.is_empty()
    }

    pub fn dates(&self) -> &[YearMonth] {
        &self.dates
    }

    pub fn rm(&self) -> &[f64] {
        &self.rm
    }

    pub fn rb(&self) -> &[f64] {
        &self.rb
    }

    /// Observation at `t` as (market, hedge).
    pub fn obs(&self, t: usize) -> Vec2 {
        [self.rm[t], self.rb[t]]
    }

    /// Sample covariance (denominator `T - 1`).
    pub fn sample_covariance(&self) -> Result<Cov2> {
        let n = self.len() as f64;
        let mm = self.rm.iter().sum::<f64>() / n;
        let mb = self.rb.iter().sum::<f64>() / n;
        let (mut smm, mut sbb, mut smb) = (0.0, 0.0, 0.0);
        for (x, y) in self.rm.iter().zip(&self.rb) {
            let (dx, dy) = (x - mm, y - mb);
            smm += dx * dx;
            sbb += dy * dy;
            smb += dx * dy;
        }
        let d = n - 1.0;
        Cov2::new(smm / d, sbb / d, smb / d)
    }
}

impl TryFrom<RawSeries> for ExcessReturnSeries {
    type Error = Error;

    fn try_from(raw: RawSeries) -> Result<Self> {
        validate_series(raw)
    }
}

impl From<ExcessReturnSeries> for RawSeries {
    fn from(s: ExcessReturnSeries) -> Self {
        RawSeries { dates: s.dates, rm: s.rm, rb: s.rb }
    }
}

/// Checks lengths, finiteness and monthly date continuity.
pub fn validate_series(raw: RawSeries) -> Result<ExcessReturnSeries> {
    let RawSeries { dates, rm, rb } = raw;
    if rm.len() != rb.len() || rm.len() != dates.len() {
        return Err(Error::LengthMismatch {
            detail: format!("dates {}, rm {}, rb {}", dates.len(), rm.len(), rb.len()),
        });
    }
    if rm.len() < MIN_SERIES_LEN {
        return Err(Error::TooShort { len: rm.len(), min: MIN_SERIES_LEN });
    }
    for (name, col) in [("rm", &rm), ("rb", &rb)] {
        if let Some(row) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { column: name.to_string(), row });
        }
    }
    check_monthly(&dates)?;
    Ok(ExcessReturnSeries { dates, rm, rb })
}

/// Dates must be strictly increasing with no gaps.
pub(crate) fn check_monthly(dates: &[YearMonth]) -> Result<()> {
    for (i, w) in dates.windows(2).enumerate() {
        let (prev, next) = (w[0], w[1]);
        if next == prev {
            return Err(Error::DuplicateMonth(next));
        }
        if next < prev {
            return Err(Error::NonMonotoneDates { row: i + 1, prev, next });
        }
    }
    match dates.windows(2).find(|w| w[1] != w[0].succ()) {
        Some(w) => Err(Error::MissingMonth { prev: w[0], next: w[1] }),
        None => Ok(()),
    }
}

/// Symmetric positive semidefinite 2x2 conditional covariance
/// `[[smm, smb], [smb, sbb]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Cov2Repr", into = "Cov2Repr")]
pub struct Cov2 {
    smm: f64,
    sbb: f64,
    smb: f64,
}

#[derive(Serialize, Deserialize)]
struct Cov2Repr {
    smm: f64,
    sbb: f64,
    smb: f64,
}

impl TryFrom<Cov2Repr> for Cov2 {
    type Error = Error;
    fn try_from(r: Cov2Repr) -> Result<Self> {
        Cov2::new(r.smm, r.sbb, r.smb)
    }
}

impl From<Cov2> for Cov2Repr {
    fn from(c: Cov2) -> Self {
        Cov2Repr { smm: c.smm, sbb: c.sbb, smb: c.smb }
    }
}

impl Cov2 {
    pub fn new(smm: f64, sbb: f64, smb: f64) -> Result<Self> {
        if !(smm.is_finite() && sbb.is_finite() && smb.is_finite()) {
            return Err(Error::InvalidCovariance("non-finite entry".into()));
        }
        if smm <= 0.0 {
            return Err(Error::InvalidCovariance(format!("smm > 0 violated (smm = {smm})")));
        }
        if sbb <= 0.0 {
            return Err(Error::InvalidCovariance(format!("sbb > 0 violated (sbb = {sbb})")));
        }
        let det = smm * sbb - smb * smb;
        if det < 0.0 {
            return Err(Error::InvalidCovariance(format!(
                "smm*sbb - smb^2 >= 0 violated (determinant {det:e})"
            )));
        }
        Ok(Self { smm, sbb, smb })
    }

    pub fn identity() -> Self {
        Self { smm: 1.0, sbb: 1.0, smb: 0.0 }
    }

    /// Built from a sum of PSD quadratic forms; skips validation.
    pub(crate) fn from_psd_parts(smm: f64, sbb: f64, smb: f64) -> Self {
        Self { smm, sbb, smb }
    }

    pub fn smm(&self) -> f64 {
        self.smm
    }

    pub fn sbb(&self) -> f64 {
        self.sbb
    }

    pub fn smb(&self) -> f64 {
        self.smb
    }

    pub fn det(&self) -> f64 {
        self.smm * self.sbb - self.smb * self.smb
    }

    /// `e' H^{-1} e` via the closed-form inverse.
    pub fn inv_quad(&self, e: Vec2) -> f64 {
        (self.sbb * e[0] * e[0] - 2.0 * self.smb * e[0] * e[1] + self.smm * e[1] * e[1]) / self.det()
    }

    /// Bivariate normal log density of innovation `e`.
    pub fn log_density(&self, e: Vec2) -> f64 {
        -LN_2PI - 0.5 * self.det().ln() - 0.5 * self.inv_quad(e)
    }

    /// PSD check with a relative slack for rounding in long recursions.
    pub fn is_psd(&self, rel_tol: f64) -> bool {
        self.smm.is_finite()
            && self.sbb.is_finite()
            && self.smb.is_finite()
            && self.smm >= 0.0
            && self.sbb >= 0.0
            && self.det() >= -rel_tol * (self.smm * self.sbb).max(f64::MIN_POSITIVE)
    }

    /// Lower Cholesky factor `(l11, l21, l22)` with diagonal floor `floor`.
    pub fn cholesky(&self, floor: f64) -> (f64, f64, f64) {
        let l11 = self.smm.max(floor).sqrt();
        let l21 = self.smb / l11;
        let l22 = (self.sbb - l21 * l21).max(floor).sqrt();
        (l11, l21, l22)
    }

    pub fn as_matrix(&self) -> [[f64; 2]; 2] {
        [[self.smm, self.smb], [self.smb, self.sbb]]
    }
}

pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Mean-equation coefficients. The market equation is
/// `l10 + l11 * smm + l12 * smb`, the hedge equation `l20 + l21 * smb + l22 * sbb`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanParams {
    pub l10: f64,
    pub l11: f64,
    pub l12: f64,
    pub l20: f64,
    pub l21: f64,
    pub l22: f64,
}

impl MeanParams {
    /// Hedge prices of risk pinned at zero.
    pub fn restricted(l10: f64, l11: f64, l12: f64, l20: f64) -> Self {
        Self { l10, l11, l12, l20, l21: 0.0, l22: 0.0 }
    }

    pub fn is_restricted(&self) -> bool {
        self.l21 == 0.0 && self.l22 == 0.0
    }
}

/// One regime of the diagonal BEKK-in-mean model: `C` lower triangular
/// `[[c11, 0], [c12, c22]]`, `A = diag(a11, a22)`, `B = diag(b11, b22)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BekkParams {
    pub mean: MeanParams,
    pub c11: f64,
    pub c12: f64,
    pub c22: f64,
    pub a11: f64,
    pub a22: f64,
    pub b11: f64,
    pub b22: f64,
}

impl BekkParams {
    /// `C C'`.
    pub fn intercept(&self) -> Cov2 {
        Cov2::from_psd_parts(
            self.c11 * self.c11,
            self.c12 * self.c12 + self.c22 * self.c22,
            self.c11 * self.c12,
        )
    }

    pub fn is_finite(&self) -> bool {
        let m = &self.mean;
        [
            m.l10, m.l11, m.l12, m.l20, m.l21, m.l22, self.c11, self.c12, self.c22, self.a11,
            self.a22, self.b11, self.b22,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Two regimes plus the staying probabilities `p` (state 1) and `q` (state 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsModelParams {
    pub regime1: BekkParams,
    pub regime2: BekkParams,
    pub p: f64,
    pub q: f64,
}

impl RsModelParams {
    pub fn new(regime1: BekkParams, regime2: BekkParams, p: f64, q: f64) -> Result<Self> {
        check_prob("p", p)?;
        check_prob("q", q)?;
        Ok(Self { regime1, regime2, p, q })
    }

    pub fn regime(&self, k: usize) -> &BekkParams {
        if k == 0 {
            &self.regime1
        } else {
            &self.regime2
        }
    }

    /// Regimes exchanged along with `p` and `q`.
    pub fn swapped(&self) -> Self {
        Self { regime1: self.regime2, regime2: self.regime1, p: self.q, q: self.p }
    }
}

pub(crate) fn check_prob(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

/// Single-regime model with high-volatility dummy terms in the market
/// equation: when the dummy is on, the market mean gains
/// `l10d + l11d * smm + l12d * smb`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DummyParams {
    pub base: BekkParams,
    pub l10d: f64,
    pub l11d: f64,
    pub l12d: f64,
}

/// Any of the fitted model families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Single(BekkParams),
    Switching(RsModelParams),
    Dummy(DummyParams),
}

/// Per-period output of the regime filter.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterOutput {
    /// `P(s_t = k | info through t-1)`.
    pub ex_ante: Vec<Vec2>,
    /// `P(s_t = k | info through t)`.
    pub filtered: Vec<Vec2>,
    /// `P(s_t = k | full sample)`.
    pub smoothed: Vec<Vec2>,
    pub state_cov: Vec<[Cov2; 2]>,
    pub agg_cov: Vec<Cov2>,
    pub agg_innov: Vec<Vec2>,
    /// Periods where the likelihood increment hit the probability floor.
    pub floored: Vec<usize>,
}

impl FilterOutput {
    pub fn len(&self) -> usize {
        self.ex_ante.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ex_ante.is_empty()
    }

    /// State labels exchanged in every path.
    pub fn swapped(&self) -> Self {
        let flip = |v: &Vec<Vec2>| v.iter().map(|x| [x[1], x[0]]).collect();
        Self {
            ex_ante: flip(&self.ex_ante),
            filtered: flip(&self.filtered),
            smoothed: flip(&self.smoothed),
            state_cov: self.state_cov.iter().map(|c| [c[1], c[0]]).collect(),
            agg_cov: self.agg_cov.clone(),
            agg_innov: self.agg_innov.clone(),
            floored: self.floored.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn months(n: usize) -> Vec<YearMonth> {
        YearMonth::new(1953, 3).unwrap().range(n)
    }

    #[test]
    fn accepts_724_aligned_rows() {
        let n = 724;
        let rm: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 0.04).collect();
        let rb: Vec<f64> = (0..n).map(|i| (i as f64 * 0.11).cos() * 0.01).collect();
        let s = ExcessReturnSeries::new(months(n), rm, rb).unwrap();
        assert_eq!(s.len(), 724);
        assert_eq!(s.dates()[0].to_string(), "1953-03");
        assert_eq!(s.dates()[723].to_string(), "2013-06");
    }

    #[test]
    fn nan_is_reported_with_row() {
        let mut rb = vec![0.01; 12];
        rb[7] = f64::NAN;
        let err = ExcessReturnSeries::new(months(12), vec![0.0; 12], rb).unwrap_err();
        match err {
            Error::NonFinite { column, row } => {
                assert_eq!(column, "rb");
                assert_eq!(row, 7);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn short_series_rejected() {
        let err = ExcessReturnSeries::new(months(5), vec![0.0; 5], vec![0.0; 5]).unwrap_err();
        assert!(err.to_string().contains("too short"));
    }

    #[test]
    fn gaps_and_order_rejected() {
        let mut d = months(12);
        d.swap(3, 4);
        assert!(matches!(
            ExcessReturnSeries::new(d, vec![0.0; 12], vec![0.0; 12]),
            Err(Error::NonMonotoneDates { row: 4, .. })
        ));
        let mut d = months(13);
        d.remove(6);
        assert!(matches!(
            ExcessReturnSeries::new(d, vec![0.0; 12], vec![0.0; 12]),
            Err(Error::MissingMonth { .. })
        ));
        assert!(matches!(
            ExcessReturnSeries::new(months(12), vec![0.0; 12], vec![0.0; 11]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn cov2_constructor_names_violation() {
        let e = Cov2::new(1.0, 1.0, 2.0).unwrap_err().to_string();
        assert!(e.contains("smm*sbb - smb^2 >= 0"), "{e}");
        let e = Cov2::new(0.0, 1.0, 0.0).unwrap_err().to_string();
        assert!(e.contains("smm > 0"), "{e}");
        let e = Cov2::new(1.0, -1.0, 0.0).unwrap_err().to_string();
        assert!(e.contains("sbb > 0"), "{e}");
        assert!(Cov2::new(1.0, 4.0, 2.0).is_ok());
    }

    #[test]
    fn cov2_deserialization_validates() {
        let bad = r#"{"smm":1.0,"sbb":1.0,"smb":3.0}"#;
        assert!(serde_json::from_str::<Cov2>(bad).is_err());
    }

    #[test]
    fn year_month_parsing() {
        let m: YearMonth = "1953-03".parse().unwrap();
        assert_eq!(m.succ().to_string(), "1953-04");
        assert_eq!("1999-12".parse::<YearMonth>().unwrap().succ().to_string(), "2000-01");
        assert!("1953-13".parse::<YearMonth>().is_err());
        assert!("1953/03".parse::<YearMonth>().is_err());
    }

    #[test]
    fn inv_quad_matches_explicit_inverse() {
        let h = Cov2::new(2.0, 3.0, 0.5).unwrap();
        let det = 2.0 * 3.0 - 0.25;
        let inv = [[3.0 / det, -0.5 / det], [-0.5 / det, 2.0 / det]];
        let e = [0.3, -1.2];
        let direct = e[0] * (inv[0][0] * e[0] + inv[0][1] * e[1])
            + e[1] * (inv[1][0] * e[0] + inv[1][1] * e[1]);
        assert!((h.inv_quad(e) - direct).abs() < 1e-14);
    }
}
