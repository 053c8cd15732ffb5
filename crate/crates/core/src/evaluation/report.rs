use std::fmt;
use std::io::Write;

use crate::error::Result;

/// One metric value from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub metric: String,
    pub k: Option<usize>,
    pub depth: Option<usize>,
    pub run: usize,
    pub seed: u64,
    pub value: f64,
}

/// Mean and sample standard deviation of one (metric, k, depth) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub metric: String,
    pub k: Option<usize>,
    pub depth: Option<usize>,
    pub mean: f64,
    pub std_dev: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub task: String,
    pub seeds: Vec<u64>,
    /// `key=value` pairs describing the configuration used.
    pub config: Vec<(String, String)>,
    pub records: Vec<RunRecord>,
}

impl EvalReport {
    pub fn new(task: impl Into<String>, seeds: &[u64]) -> Self {
        EvalReport {
            task: task.into(),
            seeds: seeds.to_vec(),
            config: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn runs(&self) -> usize {
        self.seeds.len()
    }

    pub fn with_config(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.config.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, metric: &str, k: Option<usize>, depth: Option<usize>, run: usize, value: f64) {
        self.records.push(RunRecord {
            metric: metric.to_string(),
            k,
            depth,
            run,
            seed: self.seeds[run],
            value,
        });
    }

    /// Appends another report's records, e.g. one depth of a sweep.
    pub fn absorb(&mut self, other: EvalReport, depth: Option<usize>) {
        for mut r in other.records {
            if depth.is_some() {
                r.depth = depth;
            }
            self.records.push(r);
        }
    }

    /// Cells in order of first appearance.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(&str, Option<usize>, Option<usize>)> = Vec::new();
        for r in &self.records {
            let key = (r.metric.as_str(), r.k, r.depth);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        keys.into_iter()
            .map(|(metric, k, depth)| {
                let values: Vec<f64> = self
                    .records
                    .iter()
                    .filter(|r| r.metric == metric && r.k == k && r.depth == depth)
                    .map(|r| r.value)
                    .collect();
                let (mean, std_dev) = mean_and_sd(&values);
                SummaryRow {
                    metric: metric.to_string(),
                    k,
                    depth,
                    mean,
                    std_dev,
                    count: values.len(),
                }
            })
            .collect()
    }

    /// Looks up the mean of a cell.
    pub fn mean(&self, metric: &str, k: Option<usize>, depth: Option<usize>) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.metric == metric && s.k == k && s.depth == depth)
            .map(|s| s.mean)
    }

    /// `task,metric,k,depth,run,seed,value`, one line per record. Values use
    /// the shortest representation that round-trips.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "task,metric,k,depth,run,seed,value")?;
        let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{:?}",
                self.task,
                r.metric,
                opt(r.k),
                opt(r.depth),
                r.run,
                r.seed,
                r.value
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ASCII")
    }
}

/// Sample mean and standard deviation (`n − 1` denominator; 0 for one value).
pub fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "task: {}  runs: {}", self.task, self.runs())?;
        if !self.config.is_empty() {
            let cfg: Vec<String> = self.config.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(f, "config: {}", cfg.join(" "))?;
        }
        writeln!(f, "{:<22} {:>6} {:>6} {:>10} {:>10}", "metric", "k", "depth", "mean", "sd")?;
        let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
        for s in self.summary() {
            writeln!(
                f,
                "{:<22} {:>6} {:>6} {:>10.4} {:>10.4}",
                s.metric,
                opt(s.k),
                opt(s.depth),
                s.mean,
                s.std_dev
            )?;
        }
        Ok(())
    }
}
