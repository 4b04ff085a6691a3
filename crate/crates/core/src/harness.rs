//! Runs estimators over a stream against exact ground truth and reduces the
//! resulting series to accuracy metrics.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::baselines::{P2Estimator, ReservoirEstimator, UniformHistEstimator};
use crate::data_aligned::DataAlignedEstimator;
use crate::datagen::StreamSpec;
use crate::error::{Error, Result};
use crate::estimator::QuantileEstimator;
use crate::histogram::Quantile;
use crate::interpolated::InterpolatedEstimator;
use crate::oracle::ExactQuantileStore;

/// Accuracy levels reported for time-until-accuracy by default.
pub const DEFAULT_ALPHAS: [f64; 3] = [0.01, 0.05, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorSpec {
    Interpolated { bins: usize },
    DataAligned { bins: usize },
    P2,
    Reservoir { size: usize, seed: u64 },
    Uniform { bins: usize },
}

impl EstimatorSpec {
    /// Builds an estimator. `q` is only used by estimators that track a
    /// single quantile.
    pub fn build(&self, q: Quantile) -> Result<Box<dyn QuantileEstimator>> {
        Ok(match *self {
            EstimatorSpec::Interpolated { bins } => Box::new(InterpolatedEstimator::new(bins)?),
            EstimatorSpec::DataAligned { bins } => Box::new(DataAlignedEstimator::new(bins)?),
            EstimatorSpec::P2 => Box::new(P2Estimator::new(q)),
            EstimatorSpec::Reservoir { size, seed } => {
                Box::new(ReservoirEstimator::new(size, seed)?)
            }
            EstimatorSpec::Uniform { bins } => Box::new(UniformHistEstimator::new(bins)?),
        })
    }

    /// Whether one instance can answer every quantile.
    pub fn serves_all_quantiles(&self) -> bool {
        !matches!(self, EstimatorSpec::P2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub estimator: EstimatorSpec,
    pub quantiles: Vec<Quantile>,
    pub stream: StreamSpec,
    /// Whether to compute exact ground truth alongside the estimates.
    pub truth: bool,
    /// Record every `stride`-th step (and always the last).
    pub stride: usize,
    pub alphas: Vec<f64>,
}

impl RunConfig {
    pub fn new(estimator: EstimatorSpec, quantiles: Vec<Quantile>, stream: StreamSpec) -> Self {
        RunConfig {
            estimator,
            quantiles,
            stream,
            truth: true,
            stride: 1,
            alphas: DEFAULT_ALPHAS.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        if self.quantiles.is_empty() {
            return Err(Error::Config("at least one quantile is required".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
            return Err(Error::Config(format!("invalid accuracy level {a}")));
        }
        self.stream.validate()
    }
}

/// One recorded step. `index` counts the data seen so far, starting at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub index: u64,
    pub estimate: f64,
    pub truth: Option<f64>,
    pub rel_error: Option<f64>,
}

impl SeriesRecord {
    fn new(index: u64, estimate: f64, truth: Option<f64>) -> Self {
        let rel_error = truth.filter(|&t| t > 0.0).map(|t| (estimate - t).abs() / t);
        SeriesRecord {
            index,
            estimate,
            truth,
            rel_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSeries {
    pub estimator: String,
    pub memory: usize,
    pub quantile: Quantile,
    pub records: Vec<SeriesRecord>,
}

impl EvalSeries {
    pub fn has_truth(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.truth.is_some())
    }

    pub fn last(&self) -> Option<&SeriesRecord> {
        self.records.last()
    }

    /// Records with `index > from`.
    pub fn tail(&self, from: u64) -> EvalSeries {
        EvalSeries {
            records: self
                .records
                .iter()
                .filter(|r| r.index > from)
                .copied()
                .collect(),
            ..self.clone()
        }
    }
}

/// An estimator and the (series index, quantile index) pairs it answers.
type Instance = (Box<dyn QuantileEstimator>, Vec<(usize, usize)>);

/// Feeds `values` to every estimator in `specs`, sharing one oracle, and
/// returns one series per (estimator, quantile) pair in that order.
pub fn evaluate(
    values: &[f64],
    specs: &[EstimatorSpec],
    quantiles: &[Quantile],
    truth: bool,
    stride: usize,
) -> Result<Vec<EvalSeries>> {
    if stride == 0 {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    if quantiles.is_empty() {
        return Err(Error::Config("at least one quantile is required".into()));
    }

    let mut instances: Vec<Instance> = Vec::new();
    let mut series = Vec::with_capacity(specs.len() * quantiles.len());
    for spec in specs {
        if spec.serves_all_quantiles() {
            let est = spec.build(quantiles[0])?;
            let mut targets = Vec::new();
            for (qi, &q) in quantiles.iter().enumerate() {
                targets.push((series.len(), qi));
                series.push(new_series(est.as_ref(), q, values.len(), stride));
            }
            instances.push((est, targets));
        } else {
            for (qi, &q) in quantiles.iter().enumerate() {
                let est = spec.build(q)?;
                let target = vec![(series.len(), qi)];
                series.push(new_series(est.as_ref(), q, values.len(), stride));
                instances.push((est, target));
            }
        }
    }

    let mut oracle = truth.then(ExactQuantileStore::new);
    let mut truths = vec![None; quantiles.len()];
    let last = values.len();
    for (step, &d) in values.iter().enumerate() {
        let index = step + 1;
        if let Some(o) = oracle.as_mut() {
            o.insert(d).map_err(|e| e.at_step(index))?;
        }
        for (est, _) in instances.iter_mut() {
            est.observe(d).map_err(|e| e.at_step(index))?;
        }
        if index % stride != 0 && index != last {
            continue;
        }
        if let Some(o) = oracle.as_ref() {
            for (t, &q) in truths.iter_mut().zip(quantiles) {
                *t = Some(o.quantile(q).map_err(|e| e.at_step(index))?);
            }
        }
        for (est, targets) in &instances {
            for &(s, qi) in targets {
                let estimate = est.estimate(quantiles[qi]).map_err(|e| e.at_step(index))?;
                series[s]
                    .records
                    .push(SeriesRecord::new(index as u64, estimate, truths[qi]));
            }
        }
    }
    Ok(series)
}

fn new_series(est: &dyn QuantileEstimator, q: Quantile, len: usize, stride: usize) -> EvalSeries {
    EvalSeries {
        estimator: est.name(),
        memory: est.memory_footprint(),
        quantile: q,
        records: Vec::with_capacity(len / stride + 1),
    }
}

/// Runs a single configuration: one series per configured quantile.
pub fn run(config: &RunConfig) -> Result<Vec<EvalSeries>> {
    config.validate()?;
    let values = config.stream.values()?;
    evaluate(
        &values,
        &[config.estimator],
        &config.quantiles,
        config.truth,
        config.stride,
    )
}

fn require_truth(series: &EvalSeries) -> Result<()> {
    if series.records.is_empty() {
        return Err(Error::Config("series is empty".into()));
    }
    if !series.has_truth() {
        return Err(Error::Config(format!(
            "series for {} has no ground truth",
            series.estimator
        )));
    }
    Ok(())
}

/// Index after which the relative error stays at or below `alpha`: the last
/// recorded index whose error exceeds `alpha`, or 0 if none does. Steps
/// where the truth is not positive are ignored.
pub fn time_until_accuracy(series: &EvalSeries, alpha: f64) -> Result<u64> {
    require_truth(series)?;
    Ok(series
        .records
        .iter()
        .rev()
        .find(|r| r.rel_error.is_some_and(|e| e > alpha))
        .map_or(0, |r| r.index))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub estimator: String,
    pub memory: usize,
    pub quantile: Quantile,
    pub final_estimate: f64,
    pub final_truth: Option<f64>,
    /// Mean of the relative errors over steps with positive truth.
    pub mean_rel_error: Option<f64>,
    /// Largest absolute error over all recorded steps.
    pub linf_error: Option<f64>,
    /// Recorded steps excluded from relative metrics (truth not positive).
    pub skipped: usize,
    pub time_until_accuracy: Vec<(f64, u64)>,
}

/// Mean relative error, L-infinity error and t(alpha) for each `alphas`.
pub fn summarize(series: &EvalSeries, alphas: &[f64]) -> Result<Summary> {
    require_truth(series)?;
    let last = series.last().unwrap();
    let mut rel_sum = 0.0;
    let mut rel_n = 0usize;
    let mut linf: f64 = 0.0;
    for r in &series.records {
        let t = r.truth.unwrap();
        linf = linf.max((r.estimate - t).abs());
        if let Some(e) = r.rel_error {
            rel_sum += e;
            rel_n += 1;
        }
    }
    let t_alpha = alphas
        .iter()
        .map(|&a| Ok((a, time_until_accuracy(series, a)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Summary {
        estimator: series.estimator.clone(),
        memory: series.memory,
        quantile: series.quantile,
        final_estimate: last.estimate,
        final_truth: last.truth,
        mean_rel_error: (rel_n > 0).then(|| rel_sum / rel_n as f64),
        linf_error: Some(linf),
        skipped: series.records.len() - rel_n,
        time_until_accuracy: t_alpha,
    })
}

/// Summary row for a series without ground truth.
fn estimate_only(series: &EvalSeries) -> Summary {
    Summary {
        estimator: series.estimator.clone(),
        memory: series.memory,
        quantile: series.quantile,
        final_estimate: series.last().map_or(f64::NAN, |r| r.estimate),
        final_truth: None,
        mean_rel_error: None,
        linf_error: None,
        skipped: 0,
        time_until_accuracy: Vec::new(),
    }
}

impl Summary {
    /// Summary when the series has truth, otherwise just the final estimate.
    pub fn of(series: &EvalSeries, alphas: &[f64]) -> Result<Summary> {
        if series.has_truth() {
            summarize(series, alphas)
        } else {
            Ok(estimate_only(series))
        }
    }
}

/// Aligned summaries of several estimators run over the same stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub alphas: Vec<f64>,
    pub rows: Vec<Summary>,
    pub series: Vec<EvalSeries>,
}

/// Runs every configuration over one shared stream and tabulates the results.
/// All configurations must agree on stream, quantiles, stride and truth.
pub fn compare(configs: &[RunConfig]) -> Result<Comparison> {
    check_comparable(configs)?;
    let values = configs[0].stream.values()?;
    tabulate(configs, &values)
}

/// [`compare`] over values already loaded from the configurations' stream.
pub fn compare_values(configs: &[RunConfig], values: &[f64]) -> Result<Comparison> {
    check_comparable(configs)?;
    tabulate(configs, values)
}

fn check_comparable(configs: &[RunConfig]) -> Result<()> {
    if configs.len() < 2 {
        return Err(Error::Config(
            "compare needs at least two configurations".into(),
        ));
    }
    let first = &configs[0];
    for c in configs {
        c.validate()?;
        if c.stream != first.stream {
            return Err(Error::Config(format!(
                "configurations use different streams: {:?} vs {:?}",
                first.stream, c.stream
            )));
        }
        if c.quantiles != first.quantiles
            || c.stride != first.stride
            || c.truth != first.truth
            || c.alphas != first.alphas
        {
            return Err(Error::Config(
                "configurations differ in quantiles, stride, truth or accuracy levels".into(),
            ));
        }
    }
    Ok(())
}

fn tabulate(configs: &[RunConfig], values: &[f64]) -> Result<Comparison> {
    let first = &configs[0];
    let specs: Vec<EstimatorSpec> = configs.iter().map(|c| c.estimator).collect();
    let series = evaluate(values, &specs, &first.quantiles, first.truth, first.stride)?;
    let rows = series
        .iter()
        .map(|s| Summary::of(s, &first.alphas))
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        alphas: first.alphas.clone(),
        rows,
        series,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Writes summaries as CSV with one `t_<alpha>` column per accuracy level.
pub fn write_summary_csv<W: Write>(out: W, alphas: &[f64], rows: &[Summary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        "estimator",
        "memory",
        "quantile",
        "final_estimate",
        "final_truth",
        "mean_rel_error",
        "linf_error",
        "skipped",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(alphas.iter().map(|a| format!("t_{a}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.estimator.clone(),
            r.memory.to_string(),
            r.quantile.to_string(),
            r.final_estimate.to_string(),
            opt(r.final_truth),
            opt(r.mean_rel_error),
            opt(r.linf_error),
            r.skipped.to_string(),
        ];
        for &a in alphas {
            let t = r
                .time_until_accuracy
                .iter()
                .find(|(x, _)| *x == a)
                .map(|(_, t)| t.to_string());
            rec.push(t.unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-step series as CSV: `index,estimate,truth,rel_error`. Missing truth
/// leaves the last two columns empty.
pub fn write_series_csv<W: Write>(out: W, series: &EvalSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "estimate", "truth", "rel_error"])?;
    for r in &series.records {
        w.write_record([
            r.index.to_string(),
            r.estimate.to_string(),
            opt(r.truth),
            opt(r.rel_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_csv<R: Read>(input: R) -> Result<Vec<SeriesRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Writes the bins of a data-aligned estimator every `stride` steps, as long
/// format CSV `index,bin,lower,upper,count`.
pub fn trace_bins<W: Write>(values: &[f64], bins: usize, stride: usize, out: W) -> Result<()> {
    if stride == 0 {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    let mut est = DataAlignedEstimator::new(bins)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "bin", "lower", "upper", "count"])?;
    for (step, &d) in values.iter().enumerate() {
        let index = step + 1;
        est.observe(d).map_err(|e| e.at_step(index))?;
        if index % stride != 0 && index != values.len() {
            continue;
        }
        let h = est.histogram();
        for (j, (&upper, &count)) in h.boundaries().iter().zip(h.counts()).enumerate() {
            w.write_record([
                index.to_string(),
                (j + 1).to_string(),
                h.bin_lower(j).to_string(),
                upper.to_string(),
                count.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.3}%", x * 100.0));
        let num = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        let mut header = format!(
            "{:<20} {:>6} {:>7} {:>12} {:>12} {:>10} {:>10}",
            "estimator", "memory", "q", "estimate", "truth", "mean rel", "L-inf"
        );
        for a in &self.alphas {
            header.push_str(&format!(" {:>10}", format!("t({a})")));
        }
        writeln!(f, "{header}")?;
        writeln!(f, "{}", "-".repeat(header.len()))?;
        for r in &self.rows {
            write!(
                f,
                "{:<20} {:>6} {:>7} {:>12.4} {:>12} {:>10} {:>10}",
                r.estimator,
                r.memory,
                r.quantile.to_string(),
                r.final_estimate,
                num(r.final_truth),
                pct(r.mean_rel_error),
                num(r.linf_error),
            )?;
            for (_, t) in &r.time_until_accuracy {
                write!(f, " {t:>10}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> Quantile {
        Quantile::new(v).unwrap()
    }

    fn series_with(errors: &[f64]) -> EvalSeries {
        // truth 1, estimate 1 + error
        EvalSeries {
            estimator: "test".into(),
            memory: 1,
            quantile: q(0.5),
            records: errors
                .iter()
                .enumerate()
                .map(|(i, e)| SeriesRecord::new(i as u64 + 1, 1.0 + e, Some(1.0)))
                .collect(),
        }
    }

    #[test]
    fn time_until_accuracy_examples() {
        let s = series_with(&[0.5, 0.2, 0.05, 0.01, 0.01]);
        assert_eq!(time_until_accuracy(&s, 0.1).unwrap(), 2);
        assert_eq!(time_until_accuracy(&s, 0.6).unwrap(), 0);
        let s = series_with(&[0.0, 0.0, 0.3]);
        assert_eq!(time_until_accuracy(&s, 0.1).unwrap(), 3);
    }

    #[test]
    fn time_until_accuracy_needs_truth() {
        let mut s = series_with(&[0.1]);
        s.records[0].truth = None;
        assert!(time_until_accuracy(&s, 0.1).is_err());
    }

    #[test]
    fn summary_examples() {
        let mk = |est: &[f64], truth: &[f64]| EvalSeries {
            estimator: "x".into(),
            memory: 1,
            quantile: q(0.5),
            records: est
                .iter()
                .zip(truth)
                .enumerate()
                .map(|(i, (&e, &t))| SeriesRecord::new(i as u64 + 1, e, Some(t)))
                .collect(),
        };
        let s = summarize(&mk(&[10.0, 10.0], &[10.0, 10.0]), &[0.01]).unwrap();
        assert_eq!(s.mean_rel_error, Some(0.0));
        assert_eq!(s.linf_error, Some(0.0));
        let s = summarize(&mk(&[11.0, 9.0], &[10.0, 10.0]), &[0.01]).unwrap();
        assert!((s.mean_rel_error.unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(s.linf_error, Some(1.0));
        assert_eq!(s.final_estimate, 9.0);
        assert_eq!(s.time_until_accuracy, vec![(0.01, 2)]);
    }

    #[test]
    fn non_positive_truth_is_skipped() {
        let s = EvalSeries {
            estimator: "x".into(),
            memory: 1,
            quantile: q(0.5),
            records: vec![
                SeriesRecord::new(1, 1.0, Some(-2.0)),
                SeriesRecord::new(2, 1.0, Some(0.0)),
                SeriesRecord::new(3, 1.1, Some(1.0)),
            ],
        };
        assert_eq!(s.records[0].rel_error, None);
        let sum = summarize(&s, &[0.05]).unwrap();
        assert_eq!(sum.skipped, 2);
        assert!((sum.mean_rel_error.unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(sum.linf_error, Some(3.0));
        assert_eq!(sum.time_until_accuracy, vec![(0.05, 3)]);
    }

    #[test]
    fn stride_controls_records() {
        let values: Vec<f64> = (1..=10).map(f64::from).collect();
        let s = evaluate(
            &values,
            &[EstimatorSpec::DataAligned { bins: 4 }],
            &[q(0.5)],
            true,
            1,
        )
        .unwrap();
        assert_eq!(s[0].records.len(), 10);
        assert_eq!(s[0].records[9].index, 10);
        let s = evaluate(
            &values,
            &[EstimatorSpec::DataAligned { bins: 4 }],
            &[q(0.5)],
            true,
            4,
        )
        .unwrap();
        let idx: Vec<u64> = s[0].records.iter().map(|r| r.index).collect();
        assert_eq!(idx, vec![4, 8, 10]);
    }

    #[test]
    fn no_truth_still_records_estimates() {
        let values: Vec<f64> = (1..=10).map(f64::from).collect();
        let s = evaluate(
            &values,
            &[EstimatorSpec::Uniform { bins: 4 }],
            &[q(0.5)],
            false,
            1,
        )
        .unwrap();
        assert_eq!(s[0].records.len(), 10);
        assert!(s[0]
            .records
            .iter()
            .all(|r| r.truth.is_none() && r.rel_error.is_none()));
        assert!(summarize(&s[0], &[0.1]).is_err());
        let row = Summary::of(&s[0], &[0.1]).unwrap();
        assert_eq!(row.mean_rel_error, None);
    }

    #[test]
    fn p2_gets_one_instance_per_quantile() {
        let values: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = evaluate(&values, &[EstimatorSpec::P2], &[q(0.5), q(0.9)], true, 10).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].quantile, q(0.5));
        assert_eq!(s[1].quantile, q(0.9));
        assert!(s[1].last().unwrap().estimate > s[0].last().unwrap().estimate);
    }

    #[test]
    fn errors_carry_step_index() {
        let values = [1.0, 2.0, f64::NAN];
        let err = evaluate(&values, &[EstimatorSpec::P2], &[q(0.5)], false, 1).unwrap_err();
        assert!(matches!(err, Error::AtStep { step: 3, .. }), "{err}");
    }

    #[test]
    fn compare_rejects_mismatched_streams() {
        let a = RunConfig::new(
            EstimatorSpec::P2,
            vec![q(0.5)],
            StreamSpec::stationary(10, 1),
        );
        let mut b = a.clone();
        b.stream = StreamSpec::stationary(10, 2);
        assert!(matches!(compare(&[a.clone(), b]), Err(Error::Config(_))));
        assert!(matches!(compare(&[a]), Err(Error::Config(_))));
    }

    #[test]
    fn invalid_run_configs() {
        let mut c = RunConfig::new(
            EstimatorSpec::P2,
            vec![q(0.5)],
            StreamSpec::stationary(10, 1),
        );
        c.stride = 0;
        assert!(run(&c).is_err());
        c.stride = 1;
        c.quantiles.clear();
        assert!(run(&c).is_err());
    }

    #[test]
    fn series_csv_layout() {
        let s = EvalSeries {
            estimator: "x".into(),
            memory: 1,
            quantile: q(0.5),
            records: vec![
                SeriesRecord::new(1, 1.5, Some(2.0)),
                SeriesRecord::new(2, 3.0, None),
            ],
        };
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &s).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "index,estimate,truth,rel_error\n1,1.5,2,0.25\n2,3,,\n"
        );
        assert_eq!(read_series_csv(&buf[..]).unwrap(), s.records);
    }

    #[test]
    fn bin_trace_rows() {
        let values = [3.0, 1.0, 2.0, 5.0];
        let mut buf = Vec::new();
        trace_bins(&values, 3, 2, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,bin,lower,upper,count");
        // 2 bins at step 2, 3 bins at step 4.
        assert_eq!(lines.len(), 1 + 2 + 3);
        assert_eq!(lines[1], "2,1,0,1,1");
        assert_eq!(lines[3].split(',').next(), Some("4"));
    }
}
