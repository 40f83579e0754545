mod common;

use common::{literal_jb, literal_lb, noise_series, normal};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rsbekk::data::{
    bond_price, bond_total_return, excess_returns, parse_csv, write_csv, Column, LoadOptions,
    MonthlyTable, Units,
};
use rsbekk::premium::{annualized_median_premium, linear_premium, rs_premium};
use rsbekk::stats::{self, jarque_bera, ljung_box, skew_kurt, summary_stats};
use rsbekk::{bekk, regime, BekkParams, Error, MeanParams, RsModelParams, YearMonth};

#[test]
fn flat_yields_earn_the_coupon() {
    for y in [0.005, 0.03, 0.0725, 0.15] {
        for r in bond_total_return(&[y; 24], 5).unwrap() {
            assert!((r - y / 12.0).abs() < 1e-14);
        }
    }
}

#[test]
fn five_year_bond_matches_cash_flows() {
    let (prev, cur) = (0.04, 0.03);
    let mut price = 0.0;
    for year in 1..=5 {
        price += prev / (1.0f64 + cur).powi(year);
    }
    price += 1.0 / (1.0f64 + cur).powi(5);
    let want = prev / 12.0 + price - 1.0;
    let got = bond_total_return(&[prev, cur], 5).unwrap()[0];
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    assert!((bond_price(cur, prev, 5) - price).abs() < 1e-12);
}

#[test]
fn rising_yields_lose_value() {
    let r = bond_total_return(&[0.04, 0.05], 10).unwrap()[0];
    assert!(r - 0.04 / 12.0 < 0.0);
    assert!(matches!(bond_total_return(&[0.04, -0.01], 5), Err(Error::InvalidYield { index: 1, .. })));
}

#[test]
fn excess_returns_subtract_monthly_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dates = YearMonth::new(2000, 1).unwrap().range(50);
    let total: Vec<f64> = (0..50).map(|_| 0.05 * normal(&mut rng)).collect();
    let rf: Vec<f64> = (0..50).map(|i| 0.01 + 0.001 * i as f64).collect();
    let ex = excess_returns(Column { dates: &dates, values: &total }, Column { dates: &dates, values: &rf }).unwrap();
    for t in 0..50 {
        assert_eq!(ex[t], total[t] - rf[t] / 12.0);
    }
    let zero = vec![0.0; 50];
    let same = excess_returns(Column { dates: &dates, values: &total }, Column { dates: &dates, values: &zero }).unwrap();
    assert_eq!(same, total);
    let one = excess_returns(Column { dates: &dates[..1], values: &[0.01] }, Column { dates: &dates[..1], values: &[0.012] }).unwrap();
    assert!((one[0] - 0.009).abs() < 1e-15);
    assert!(excess_returns(Column { dates: &dates[1..], values: &total[1..] }, Column { dates: &dates[..49], values: &rf[..49] }).is_err());
}

#[test]
fn csv_round_trip_in_both_units() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dates = YearMonth::new(1953, 3).unwrap().range(724);
    let cols = vec![(0..724).map(|_| 0.04 * normal(&mut rng)).collect::<Vec<_>>(), (0..724).map(|_| 0.02 * normal(&mut rng)).collect()];
    let table = MonthlyTable::new(dates, vec!["rm".into(), "rb".into()], cols).unwrap();
    for units in [Units::Decimal, Units::Percent] {
        let mut buf = Vec::new();
        write_csv(&mut buf, &table, units).unwrap();
        let back = parse_csv(buf.as_slice(), &LoadOptions::default()).unwrap();
        assert_eq!(back.len(), 724);
        assert_eq!(back.dates, table.dates);
        for (a, b) in back.columns.iter().flatten().zip(table.columns.iter().flatten()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}

#[test]
fn csv_errors() {
    let opts = LoadOptions::default();
    assert!(matches!(parse_csv("date,rm\n".as_bytes(), &opts), Err(Error::EmptyTable)));
    let dup = "date,rm\n2000-01,0.1\n2000-02,0.2\n2000-02,0.3\n";
    let err = parse_csv(dup.as_bytes(), &opts).unwrap_err();
    assert!(err.to_string().contains("2000-02"), "{err}");
    let bad = "date,rm\n2000-01,0.1\n2000-02,abc\n";
    assert!(matches!(parse_csv(bad.as_bytes(), &opts), Err(Error::Parse { row: 2, .. })));
}

#[test]
fn diagnostics_match_literal_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..100 {
        let n = 50 + 10 * i;
        let x: Vec<f64> = (0..n).map(|_| normal(&mut rng).powi(if i % 3 == 0 { 3 } else { 1 })).collect();
        let jb = jarque_bera(&x).unwrap().statistic;
        let lb = ljung_box(&x, 6).unwrap().statistic;
        assert!((jb - literal_jb(&x)).abs() < 1e-9 * (1.0 + jb));
        assert!((lb - literal_lb(&x, 6)).abs() < 1e-9 * (1.0 + lb));
    }
}

#[test]
fn gaussian_noise_looks_gaussian() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 100_000;
    let x: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let (s, k) = skew_kurt(&x).unwrap();
    let nf = n as f64;
    assert!(s.abs() < 3.0 * (6.0 / nf).sqrt());
    assert!((k - 3.0).abs() < 3.0 * (24.0 / nf).sqrt());
    let st = summary_stats(&x).unwrap();
    // 3-sigma upper points of chi-squared(2) and chi-squared(6).
    assert!(st.jarque_bera.statistic < 2.0 + 3.0 * 2.0);
    assert!(st.ljung_box_levels.statistic < 6.0 + 3.0 * 12f64.sqrt());
    assert!(st.ljung_box_levels.p_value > 0.05);
}

#[test]
fn statistics_are_shift_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<f64> = (0..500).map(|_| normal(&mut rng)).collect();
    let y: Vec<f64> = x.iter().map(|v| v + 10.0).collect();
    let (a, b) = (summary_stats(&x).unwrap(), summary_stats(&y).unwrap());
    assert!((a.std - b.std).abs() < 1e-12);
    assert!((a.jarque_bera.statistic - b.jarque_bera.statistic).abs() < 1e-6);
    assert!((a.ljung_box_levels.statistic - b.ljung_box_levels.statistic).abs() < 1e-8);
    assert!(a.ljung_box_squares.statistic >= 0.0);
}

#[test]
fn alternating_series_is_perfectly_anticorrelated() {
    let x: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let rho = stats::autocorrelations(&x, 2).unwrap();
    // The sample estimator gives -(n-1)/n at lag one.
    assert!((rho[0] + 199.0 / 200.0).abs() < 1e-12);
    let lb = ljung_box(&x, 6).unwrap();
    assert!(lb.statistic > 1000.0 && lb.p_value < 1e-12);
}

fn regime_block(l11: f64, l12: f64, c11: f64) -> BekkParams {
    BekkParams {
        mean: MeanParams::restricted(0.0, l11, l12, 0.0),
        c11,
        c12: 0.3,
        c22: 0.8,
        a11: 0.3,
        a22: 0.2,
        b11: 0.8,
        b22: 0.7,
    }
}

#[test]
fn linear_premium_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let series = noise_series(&mut rng, 100, 1.0);
    let b = regime_block(0.0, 0.0, 1.0);
    let h = series.sample_covariance().unwrap();
    let path = bekk::log_likelihood(&series, &b, &h).unwrap().cov;
    let zero = linear_premium(&b.mean, &path);
    assert!(zero.total.iter().all(|v| *v == 0.0));
    let unit = linear_premium(&MeanParams { l11: 1.0, ..Default::default() }, &path);
    assert!(unit.market.iter().zip(&path).all(|(m, h)| *m == h.smm()));
    let p = linear_premium(&MeanParams { l11: 2.5, l12: -1.5, ..Default::default() }, &path);
    assert!((0..100).all(|t| p.total[t] == p.market[t] + p.hedge[t]));
}

#[test]
fn switching_premium_oracle_and_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let series = noise_series(&mut rng, 80, 1.0);
    let h0 = series.sample_covariance().unwrap();
    let rs = RsModelParams::new(regime_block(0.2, -0.1, 0.8), regime_block(-0.1, 0.3, 1.4), 0.9, 0.8).unwrap();
    let f = regime::rs_log_likelihood(&series, &rs, &h0).unwrap().filter;
    let got = rs_premium(&rs, &f).unwrap();
    for t in 0..80 {
        let (s, h) = (f.smoothed[t], f.state_cov[t]);
        let market = s[0] * 0.2 * h[0].smm() + s[1] * -0.1 * h[1].smm();
        let hedge = s[0] * -0.1 * h[0].smb() + s[1] * 0.3 * h[1].smb();
        assert!((got.market[t] - market).abs() < 1e-14);
        assert!((got.hedge[t] - hedge).abs() < 1e-14);
        assert_eq!(got.total[t], got.market[t] + got.hedge[t]);
    }

    let mut pinned = f.clone();
    pinned.smoothed = vec![[1.0, 0.0]; 80];
    let state1: Vec<_> = f.state_cov.iter().map(|c| c[0]).collect();
    assert_eq!(rs_premium(&rs, &pinned).unwrap(), linear_premium(&rs.regime1.mean, &state1));

    let b = rs.regime1;
    let same = RsModelParams::new(b, b, 0.9, 0.8).unwrap();
    let fs = regime::rs_log_likelihood(&series, &same, &h0).unwrap().filter;
    let single = bekk::log_likelihood(&series, &b, &h0).unwrap().cov;
    let (a, c) = (rs_premium(&same, &fs).unwrap(), linear_premium(&b.mean, &single));
    for t in 0..80 {
        assert!((a.total[t] - c.total[t]).abs() < 1e-12);
    }

    // Relabeling the states leaves the premium unchanged.
    let sw = rs_premium(&rs.swapped(), &f.swapped()).unwrap();
    for t in 0..80 {
        assert!((sw.total[t] - got.total[t]).abs() < 1e-15);
    }
}

#[test]
fn annualized_median() {
    assert!((annualized_median_premium(&[0.003; 11]).unwrap() - 0.036).abs() < 1e-15);
    let mut v = vec![0.003; 11];
    v[4] = 5.0;
    assert!((annualized_median_premium(&v).unwrap() - 0.036).abs() < 1e-15);
    assert!(matches!(annualized_median_premium(&[]), Err(Error::EmptyInput)));
}
