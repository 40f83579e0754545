use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rsbekk::data::{self, LoadOptions, MonthlyTable, Units};
use rsbekk::estimation::{self, OptimizerConfig};
use rsbekk::premium::{self, PremiumPaths};
use rsbekk::stats::{self, median, SummaryStats};
use rsbekk::{bekk, regime, simulate};
use rsbekk::{BekkParams, Cov2, ExcessReturnSeries, MeanParams, ModelParams, ModelSpec, RsModelParams};
use serde::Serialize;
use serde_json::Value;

use crate::doc::ResultDocument;
use crate::{FilterArgs, FitArgs, InputArgs, PremiumArgs, SimulateArgs, StatsArgs, UnitsArg};

fn units(u: Option<UnitsArg>) -> Option<Units> {
    u.map(|u| match u {
        UnitsArg::Decimal => Units::Decimal,
        UnitsArg::Percent => Units::Percent,
    })
}

fn load_table(path: &Path, u: Option<UnitsArg>) -> Result<MonthlyTable> {
    let opts = LoadOptions { units: units(u), ..Default::default() };
    data::load_csv(path, &opts).with_context(|| format!("loading {}", path.display()))
}

fn load_series(args: &InputArgs) -> Result<ExcessReturnSeries> {
    let table = load_table(&args.input, args.units)?;
    let pick = |given: &Option<String>, i: usize| -> Result<String> {
        match given {
            Some(c) => Ok(c.clone()),
            None => table
                .names
                .get(i)
                .cloned()
                .with_context(|| format!("input needs at least {} value columns", i + 1)),
        }
    };
    let market = pick(&args.market, 0)?;
    let hedge = pick(&args.hedge, 1)?;
    Ok(table.to_series(&market, &hedge)?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct StatsRow<'a> {
    column: &'a str,
    #[serde(flatten)]
    stats: SummaryStats,
}

pub fn stats(args: &StatsArgs) -> Result<ExitCode> {
    let table = load_table(&args.input, args.units)?;
    let rows: Vec<StatsRow> = table
        .names
        .iter()
        .zip(&table.columns)
        .map(|(name, col)| {
            stats::summary_stats(col)
                .map(|stats| StatsRow { column: name, stats })
                .with_context(|| format!("column `{name}`"))
        })
        .collect::<Result<_>>()?;

    let mut out = io::stdout().lock();
    if args.json {
        serde_json::to_writer_pretty(&mut out, &rows)?;
        writeln!(out)?;
    } else {
        writeln!(
            out,
            "{:<12} {:>6} {:>10} {:>10} {:>8} {:>8} {:>10} {:>8} {:>10} {:>8} {:>10} {:>8}",
            "column", "n", "mean", "std", "skew", "kurt", "JB", "p", "LB(6)", "p", "LB2(6)", "p"
        )?;
        for r in &rows {
            let s = &r.stats;
            writeln!(
                out,
                "{:<12} {:>6} {:>10.6} {:>10.6} {:>8.4} {:>8.4} {:>10.3} {:>8.4} {:>10.3} {:>8.4} {:>10.3} {:>8.4}",
                r.column,
                s.n,
                s.mean,
                s.std,
                s.skewness,
                s.kurtosis,
                s.jarque_bera.statistic,
                s.jarque_bera.p_value,
                s.ljung_box_levels.statistic,
                s.ljung_box_levels.p_value,
                s.ljung_box_squares.statistic,
                s.ljung_box_squares.p_value,
            )?;
        }
    }
    if let Some(path) = &args.out {
        let mut w = csv::Writer::from_writer(output(Some(path))?);
        w.write_record([
            "column", "n", "mean", "std", "skewness", "kurtosis", "jb", "jb_p", "lb", "lb_p",
            "lb_sq", "lb_sq_p",
        ])?;
        for r in &rows {
            let s = &r.stats;
            let vals = [
                s.n as f64,
                s.mean,
                s.std,
                s.skewness,
                s.kurtosis,
                s.jarque_bera.statistic,
                s.jarque_bera.p_value,
                s.ljung_box_levels.statistic,
                s.ljung_box_levels.p_value,
                s.ljung_box_squares.statistic,
                s.ljung_box_squares.p_value,
            ];
            let mut rec = vec![r.column.to_string()];
            rec.extend(vals.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

pub fn fit(args: &FitArgs) -> Result<ExitCode> {
    let series = load_series(&args.input)?;
    let spec = ModelSpec { n_regimes: args.regimes, restricted: args.restricted, dummy: None };
    let cfg = OptimizerConfig {
        n_restarts: args.restarts,
        max_iterations: args.max_iterations,
        seed: args.seed,
        ..Default::default()
    };
    let result = estimation::fit(&series, &spec, &cfg)?;
    let doc = ResultDocument::new(&result, series.len());
    let mut w = output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    if result.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: optimizer did not converge; result written anyway");
        Ok(ExitCode::from(2))
    }
}

// ---------------------------------------------------------------------------

fn check_length(doc: &ResultDocument, series: &ExcessReturnSeries) -> Result<()> {
    if doc.n_obs != series.len() {
        bail!(
            "result was fitted on {} observations but the input has {}",
            doc.n_obs,
            series.len()
        );
    }
    Ok(())
}

pub fn filter(args: &FilterArgs) -> Result<ExitCode> {
    let series = load_series(&args.input)?;
    let doc = ResultDocument::read(&args.result)?;
    check_length(&doc, &series)?;
    let ModelParams::Switching(rs) = doc.params else {
        bail!("filter needs a two-regime result");
    };
    let h0 = series.sample_covariance()?;
    let f = regime::rs_log_likelihood(&series, &rs, &h0)?.filter;

    let mut w = csv::Writer::from_writer(output(args.out.as_deref())?);
    w.write_record([
        "date",
        "ex_ante_1",
        "ex_ante_2",
        "filtered_1",
        "filtered_2",
        "smoothed_1",
        "smoothed_2",
        "var_m_1",
        "var_m_2",
        "var_m_1_x1e4",
        "var_m_2_x1e4",
        "var_b_1",
        "var_b_2",
        "cov_mb_1",
        "cov_mb_2",
    ])?;
    for (t, date) in series.dates().iter().enumerate() {
        let h = &f.state_cov[t];
        let vals = [
            f.ex_ante[t][0],
            f.ex_ante[t][1],
            f.filtered[t][0],
            f.filtered[t][1],
            f.smoothed[t][0],
            f.smoothed[t][1],
            h[0].smm(),
            h[1].smm(),
            h[0].smm() * 1e4,
            h[1].smm() * 1e4,
            h[0].sbb(),
            h[1].sbb(),
            h[0].smb(),
            h[1].smb(),
        ];
        let mut rec = vec![date.to_string()];
        rec.extend(vals.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let var = |k: usize| f.state_cov.iter().map(|h| h[k].smm() * 1e4).collect::<Vec<_>>();
    let low = f.smoothed.iter().filter(|p| p[0] > 0.5).count();
    eprintln!(
        "median market variance x1e4: state 1 {:.4}, state 2 {:.4}; months in state 1: {} of {}",
        median(&var(0)),
        median(&var(1)),
        low,
        series.len()
    );
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

/// Built-in single-regime parameters (restricted mean, BEKK magnitudes of
/// a typical monthly market / bond fit).
pub fn default_single() -> BekkParams {
    BekkParams {
        mean: MeanParams::restricted(0.0, 2.0, 1.0, 0.001),
        c11: 0.012,
        c12: 0.00027,
        c22: 0.00084,
        a11: 0.25,
        a22: 0.46,
        b11: 0.92,
        b22: 0.90,
    }
}

/// Built-in switching parameters with a calm and a turbulent state.
pub fn default_switching() -> RsModelParams {
    RsModelParams {
        regime1: BekkParams {
            mean: MeanParams::restricted(0.003, 3.0, 0.0, 0.001),
            c11: 0.02,
            c12: 0.001,
            c22: 0.006,
            a11: 0.15,
            a22: 0.2,
            b11: 0.8,
            b22: 0.8,
        },
        regime2: BekkParams {
            mean: MeanParams::restricted(0.0, -1.0, 0.0, 0.0),
            c11: 0.05,
            c12: -0.002,
            c22: 0.012,
            a11: 0.2,
            a22: 0.25,
            b11: 0.7,
            b22: 0.7,
        },
        p: 0.85,
        q: 0.75,
    }
}

/// Accepts a full result document or a bare `ModelParams` block.
fn read_params(path: &Path) -> Result<ModelParams> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let block = v.get("params").cloned().unwrap_or(v);
    serde_json::from_value(block).context("parameter block")
}

pub fn simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let params = match &args.params {
        Some(p) => read_params(p)?,
        None if args.regimes == 2 => ModelParams::Switching(default_switching()),
        None => ModelParams::Single(default_single()),
    };
    // Pre-sample covariance at the calm unconditional market level.
    let h0 = Cov2::new(0.002, 0.0001, 0.0)?;
    let sim = match params {
        ModelParams::Single(b) => simulate::simulate_single(&b, args.t, &h0, args.seed)?,
        ModelParams::Switching(rs) => simulate::simulate_rs(&rs, args.t, &h0, args.seed)?,
        ModelParams::Dummy(_) => bail!("cannot simulate a dummy-augmented model"),
    };
    let with_states = matches!(params, ModelParams::Switching(_));
    let mut w = csv::Writer::from_writer(output(args.out.as_deref())?);
    if with_states {
        w.write_record(["date", "rm", "rb", "state"])?;
    } else {
        w.write_record(["date", "rm", "rb"])?;
    }
    let s = &sim.series;
    for t in 0..s.len() {
        let mut rec = vec![s.dates()[t].to_string(), s.rm()[t].to_string(), s.rb()[t].to_string()];
        if with_states {
            rec.push((sim.states[t] + 1).to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PremiumSummary {
    annualized: bool,
    median_market: f64,
    median_hedge: f64,
    median_total: f64,
}

pub fn premium(args: &PremiumArgs) -> Result<ExitCode> {
    let series = load_series(&args.input)?;
    let doc = ResultDocument::read(&args.result)?;
    check_length(&doc, &series)?;
    let h0 = series.sample_covariance()?;
    let paths: PremiumPaths = match doc.params {
        ModelParams::Single(b) => {
            let path = bekk::log_likelihood(&series, &b, &h0)?;
            premium::linear_premium(&b.mean, &path.cov)
        }
        ModelParams::Switching(rs) => {
            let f = regime::rs_log_likelihood(&series, &rs, &h0)?.filter;
            premium::rs_premium(&rs, &f)?
        }
        ModelParams::Dummy(_) => bail!("premium decomposition needs a linear or two-regime result"),
    };
    if let Some(path) = &args.out {
        premium::write_premium_csv(output(Some(path))?, series.dates(), &paths)?;
    }
    let scale = if args.annualize { 12.0 } else { 1.0 };
    let summary = PremiumSummary {
        annualized: args.annualize,
        median_market: median(&paths.market) * scale,
        median_hedge: median(&paths.hedge) * scale,
        median_total: median(&paths.total) * scale,
    };
    let mut out = io::stdout().lock();
    if args.json {
        serde_json::to_writer_pretty(&mut out, &summary)?;
        writeln!(out)?;
    } else {
        let unit = if args.annualize { "per annum" } else { "per month" };
        writeln!(out, "median premium ({unit}):")?;
        writeln!(out, "  market {:.6}", summary.median_market)?;
        writeln!(out, "  hedge  {:.6}", summary.median_hedge)?;
        writeln!(out, "  total  {:.6}", summary.median_total)?;
    }
    Ok(ExitCode::SUCCESS)
}
